"""Run every desk-scale experiment into one output directory (default ``results``)."""

import sys

from randritz.cli import main

RUNS = [
    ["exp", "--experiment", "ham", "--g21", "zero"],
    ["exp", "--experiment", "ham", "--g21", "gaussian"],
    ["exp", "--experiment", "butterfly", "--shift", "0,2"],
    ["exp", "--experiment", "butterfly", "--shift", "1,1"],
    ["exp", "--experiment", "fp"],
    ["mc-cond", "--experiment", "mc-cond"],
    ["mc-cond", "--experiment", "tails"],
]

if __name__ == "__main__":
    root = sys.argv[1] if len(sys.argv) > 1 else "results"
    for args in RUNS:
        tag = "_".join(a for a in args[2:] if not a.startswith("--")).replace(",", "_")
        code = main([*args, "--out", f"{root}/{tag}", "--deterministic"])
        if code:
            sys.exit(code)
