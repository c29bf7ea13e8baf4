#!/usr/bin/env python3
"""Compile, verify and export every triangular-board database.

Produces Triangle10/15/21Winning.txt plus the web bundles in one pass.
"""

import sys
from pathlib import Path

from pegsol import cli

OUT = sys.argv[1] if len(sys.argv) > 1 else "pegsol_data"


def run(args: list[str]) -> None:
    print("$ pegsol", " ".join(args))
    rc = cli.main(args)
    if rc != 0:
        sys.exit(rc)


for board in ("triangle4", "triangle5", "triangle6"):
    run(["compile", board, "--type", "1", "--out", OUT])
    run(["verify", board, "--out", OUT])
    run(["export", board, "--type", "1", "--out", OUT])
print(f"done; databases in {Path(OUT).resolve()}")
