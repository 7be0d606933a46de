#!/usr/bin/env python

"""
Script: runlog.py
Description:
    Collects the human-readable narrative of a command. Every step appends a line; lines are echoed
    to the terminal in colour and the whole list is written to LOGFILE.txt when the command ends,
    whether it succeeded or not.

Dependencies:
    - Colorama: For coloured terminal output.
"""

import os

from colorama import Fore, Style, init

init(autoreset=True)

LOGFILE_NAME = "LOGFILE.txt"


class RunLog:
    def __init__(self, echo=True):
        self.lines = []
        self.echo = echo

    def append(self, message):
        # quiet entry: kept for LOGFILE.txt only
        self.lines.append(str(message))

    def info(self, message):
        self._emit(message, "")

    def success(self, message):
        self._emit(message, Fore.GREEN + Style.BRIGHT)

    def warn(self, message):
        self._emit(f"Warning: {message}", Fore.YELLOW + Style.BRIGHT)

    def error(self, message):
        self._emit(f"Error: {message}", Fore.RED + Style.BRIGHT)

    def _emit(self, message, colour):
        self.lines.append(str(message))
        if self.echo:
            print(colour + str(message) + (Style.RESET_ALL if colour else ""))

    def write(self, directory):
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, LOGFILE_NAME)
        with open(path, "w", encoding="utf-8", newline="\n") as logfile:
            logfile.write("\n".join(self.lines) + "\n")
        return path

    def __iter__(self):
        return iter(self.lines)

    def __len__(self):
        return len(self.lines)
