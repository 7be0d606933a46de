import sys

from colorama import Fore, Style, init

from scripts import cli

init(autoreset=True)


def display_engageplan_design():
    design = """
    ***************************************************
    *                                                 *
    *               Welcome to EngagePlan             *
    *                                                 *
    ***************************************************
    *  Customer engagement plans for peak reduction   *
    *  in residential communities (CDP / PDP).        *
    ***************************************************
    """
    print(design)


def display_command_options(commands):
    print("Select a command to run:")
    for key, (name, text) in commands.items():
        print(f"{key}: {name:<10} {text}")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if argv:
        return cli.main(argv)

    display_engageplan_design()
    commands = {
        '1': ('run', 'evaluate every plan of a scenario'),
        '2': ('sweep', 'evaluate a grid of plan parameters'),
        '3': ('validate', 'check a scenario without running it'),
    }
    display_command_options(commands)

    choice = input(Fore.GREEN + Style.BRIGHT + "Enter the number of the command to run: " + Style.RESET_ALL).strip()
    if choice not in commands:
        print(Fore.RED + "Invalid choice. Please select a valid command number.")
        return 1

    config = input(Fore.GREEN + Style.BRIGHT + "Enter the scenario file: " + Style.RESET_ALL).strip()
    return cli.main([commands[choice][0], "--config", config])


if __name__ == "__main__":
    sys.exit(main())
