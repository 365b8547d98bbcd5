"""Run the butterfly experiment at desk scale; extra arguments pass through to the CLI."""

import sys

from randritz.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "--experiment", "butterfly", *sys.argv[1:]]))
