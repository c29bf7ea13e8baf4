"""Loader for the embedded reference counts used by ``pegsol verify``.

The data file carries known-correct layer sizes and winning-code sets for
the classic problems on the supported boards, so verification runs fully
offline.  Keys are board kinds; values are board-specific tables (see
``data/expected_counts.json``).
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def expected_counts() -> dict:
    payload = (
        resources.files("pegsol").joinpath("data/expected_counts.json").read_text()
    )
    return json.loads(payload)


def for_board(kind: str) -> dict:
    data = expected_counts()
    if kind not in data:
        raise KeyError(f"no reference data for board {kind!r}")
    return data[kind]


def int_keys(table: dict) -> dict[int, int]:
    return {int(k): v for k, v in table.items()}
