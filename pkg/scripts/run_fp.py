"""Run the fp experiment at desk scale; extra arguments pass through to the CLI."""

import sys

from randritz.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "--experiment", "fp", *sys.argv[1:]]))
