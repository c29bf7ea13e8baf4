#!/usr/bin/env python3
"""Compile the 33-hole central game database (a couple of minutes),
verify it against the built-in reference values, and export the web bundle.
"""

import sys

from pegsol import cli

OUT = sys.argv[1] if len(sys.argv) > 1 else "pegsol_data"


def run(args: list[str]) -> None:
    print("$ pegsol", " ".join(args))
    rc = cli.main(args)
    if rc != 0:
        sys.exit(rc)


run(["compile", "english33", "--problem", "1:1", "--p", "7", "--out", OUT, "-v"])
run(["verify", "english33", "--out", OUT])
run(["export", "english33", "--problem", "1:1", "--out", OUT])
