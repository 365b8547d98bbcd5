"""Run the ham experiment at desk scale; extra arguments pass through to the CLI."""

import sys

from randritz.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "--experiment", "ham", *sys.argv[1:]]))
