#!/usr/bin/env python

"""
Script: errors.py
Description:
    Exception types raised by the simulator. Configuration problems, invalid physical inputs and
    broken schedule constraints are kept apart so the command line can report each one clearly.
"""


class EngagementError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigurationError(EngagementError, ValueError):
    """Invalid scenario. Holds every (field_path, message) pair that was found."""

    def __init__(self, violations, message=None):
        if isinstance(violations, str):
            violations = [("", violations)]
        self.violations = [(str(path), str(text)) for path, text in violations]
        if message is None:
            message = "; ".join(f"{path}: {text}" if path else text for path, text in self.violations)
        super().__init__(message)


class ModelError(EngagementError, ValueError):
    """A physical model was given parameters it cannot represent."""


class ConstraintViolation(EngagementError, RuntimeError):
    def __init__(self, customer_id, device, slot, rule, detail=""):
        self.customer_id = customer_id
        self.device = device
        self.slot = slot
        self.rule = rule
        text = f"customer {customer_id}, device {device}, slot {slot}: {rule} violated"
        if detail:
            text += f" ({detail})"
        super().__init__(text)


class ConvergenceError(ConstraintViolation):
    """Raised when escalating every peak to full power still breaks the severity bound."""
