"""Build, load, verify: the orchestration behind the CLI subcommands.

``compile_*`` functions build databases and write them (plus a metadata
sidecar with per-layer counts) into an output directory.  ``load_*``
functions read them back.  ``verify_board`` recomputes or reloads a board's
databases and compares them against the embedded reference counts,
returning one check result per fact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pegsol import formats, reference
from pegsol.boards import BoardGeometry, make_geometry
from pegsol.layers import (
    RAW,
    REDUCED,
    PartitionConfig,
    complement_image,
    forward_layers,
    losing_layers,
    winning_layers,
)
from pegsol.posclass import (
    ProblemSpec,
    enumerate_types,
    get_type,
    null_class,
    problem_by_address,
)
from pegsol.windb import (
    ComplementDB,
    TypeDatabase,
    build_complement_db,
    build_type_database,
)

DEFAULT_OUT = "pegsol_data"


def default_partitions(geom: BoardGeometry) -> int:
    return 1 if geom.N <= 21 else 7


def make_config(
    geom: BoardGeometry,
    p: int | None = None,
    scratch: str | None = None,
    jobs: int = 1,
    memory_budget: int | None = None,
) -> PartitionConfig:
    return PartitionConfig(
        p=p if p is not None else default_partitions(geom),
        scratch=scratch,
        jobs=jobs,
        **({"memory_budget": memory_budget} if memory_budget else {}),
    )


def _merge_meta(geom: BoardGeometry, out_dir: Path, key: str, entry: dict) -> None:
    try:
        meta = formats.load_meta(geom, out_dir)
    except FileNotFoundError:
        meta = {"board": geom.kind, "entries": {}}
    meta.setdefault("entries", {})[key] = entry
    formats.save_meta(meta, geom, out_dir)


def _count_entry(db: ComplementDB) -> dict:
    return {
        "problem": f"{db.problem.type_number}:{db.problem.number}",
        "degenerate": db.problem.degenerate,
        "solvable": db.solvable,
        "storedTotal": db.stored_total,
        "fCounts": {str(n): c for n, c in sorted(db.f_counts.items())},
        "wCounts": {str(n): c for n, c in sorted(db.w_counts.items())},
        "lCounts": {str(n): c for n, c in sorted(db.l_counts.items())},
        "buildSeconds": round(db.build_seconds, 3),
    }


# ----------------------------------------------------------------------
# compile


def compile_problem(
    kind: str,
    address: str,
    out_dir: Path,
    config: PartitionConfig | None = None,
    with_losing: bool = False,
    progress=None,
) -> ComplementDB:
    """Build one complement problem and write its binary layer files."""
    geom = make_geometry(kind)
    problem = problem_by_address(geom, address)
    config = config or make_config(geom)
    db = build_complement_db(
        problem, geom, config, with_losing=with_losing, progress=progress
    )
    out_dir = Path(out_dir)
    formats.save_binary_layers(db.layers, geom, out_dir)
    _merge_meta(
        geom,
        out_dir,
        f"problem:{problem.type_number}:{problem.number}",
        _count_entry(db),
    )
    return db


def compile_type(
    kind: str,
    type_number: int,
    out_dir: Path,
    config: PartitionConfig | None = None,
    progress=None,
) -> tuple[TypeDatabase, dict[int, ComplementDB]]:
    """Build a whole problem type (complement problems, superset, indexed
    store) and write its text database."""
    geom = make_geometry(kind)
    ptype = get_type(geom, type_number)
    config = config or make_config(geom)
    db, cdbs, superset = build_type_database(ptype, geom, config, progress=progress)
    out_dir = Path(out_dir)
    formats.save_type_database(db, geom, out_dir)
    entry = {
        "type": type_number,
        "problems": {str(i): _count_entry(c) for i, c in sorted(cdbs.items())},
        "supersetCounts": {str(n): c for n, c in sorted(superset.w_counts.items())},
        "indexedTotal": db.indexed.total(),
        "plainTotal": int(sum(a.size for a in db.plain.values())),
    }
    _merge_meta(geom, out_dir, f"type:{type_number}", entry)
    return db, cdbs


def compile_all(
    kind: str,
    out_dir: Path,
    config: PartitionConfig | None = None,
    progress=None,
) -> list[TypeDatabase]:
    geom = make_geometry(kind)
    out = []
    for ptype in enumerate_types(kind):
        db, _ = compile_type(kind, ptype.number, out_dir, config, progress)
        out.append(db)
    return out


# ----------------------------------------------------------------------
# load


def load_problem_db(kind: str, out_dir: Path) -> ComplementDB:
    geom = make_geometry(kind)
    meta = formats.load_meta(geom, Path(out_dir))
    entries = meta.get("entries", {})
    problem_entries = {k: v for k, v in entries.items() if k.startswith("problem:")}
    if not problem_entries:
        raise FileNotFoundError(f"no compiled problem for {kind} in {out_dir}")
    key, entry = sorted(problem_entries.items())[0]
    _, t, i = key.split(":")
    geom = make_geometry(kind)
    problem = problem_by_address(geom, f"{t}:{i}")
    layers = formats.load_binary_layers(geom, Path(out_dir))
    return ComplementDB(
        problem=problem,
        layers=layers,
        raw=problem.degenerate,
        f_counts=reference.int_keys(entry.get("fCounts", {})),
        w_counts=reference.int_keys(entry.get("wCounts", {})),
        l_counts=reference.int_keys(entry.get("lCounts", {})),
    )


def load_type_db(kind: str, out_dir: Path, type_number: int) -> TypeDatabase:
    geom = make_geometry(kind)
    return formats.load_type_database(geom, Path(out_dir), type_number)


# ----------------------------------------------------------------------
# verify


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "ok  " if self.ok else "FAIL"
        return f"{status} {self.name}" + (f": {self.detail}" if self.detail else "")


def _check_eq(name: str, got, want) -> Check:
    ok = got == want
    return Check(name, ok, "" if ok else f"got {got!r}, want {want!r}")


def _check_counts(name: str, got: dict[int, int], want: dict[int, int]) -> list[Check]:
    out = []
    for n in sorted(want):
        out.append(_check_eq(f"{name}[n={n}]", got.get(n), want[n]))
    return out


def verify_board(
    kind: str, out_dir: Path, config: PartitionConfig | None = None
) -> list[Check]:
    """Compare a board's databases against the embedded reference values.

    Small boards are recomputed and also compared against their on-disk
    files; the 33-hole cross is checked from its compiled files alone; the
    45-hole cross checks the head of its forward layers directly.
    """
    geom = make_geometry(kind)
    config = config or make_config(geom)
    try:
        ref = reference.for_board(kind)
    except KeyError:
        raise FileNotFoundError(f"no reference data for board {kind!r}") from None
    if kind == "wiegleb45":
        return _verify_wiegleb(geom, ref, config)
    if kind == "english33":
        return _verify_english33(geom, ref, Path(out_dir))
    if kind == "triangle4":
        return _verify_triangle4(geom, ref, Path(out_dir), config)
    if kind == "triangle5":
        return _verify_triangle5(geom, ref, Path(out_dir), config)
    if kind == "triangle6":
        return _verify_triangle6(geom, ref, Path(out_dir), config)
    raise FileNotFoundError(f"no reference data for board {kind!r}")


def _verify_wiegleb(geom, ref, config) -> list[Check]:
    start = geom.full_code ^ (1 << geom.hole_index(4, 4))
    f = forward_layers(geom, [geom.mincode(start)], down_to=40, config=config)
    got = {n: f[n].count for n in f}
    return _check_counts("wiegleb45 central F", got, reference.int_keys(ref["f_head"]))


def _verify_english33(geom, ref, out_dir) -> list[Check]:
    db = load_problem_db("english33", out_dir)
    checks = []
    checks += _check_counts("english33 central F", db.f_counts, reference.int_keys(ref["f"]))
    checks += _check_counts("english33 central W", db.w_counts, reference.int_keys(ref["w"]))
    checks.append(_check_eq("english33 F total", sum(db.f_counts.values()), ref["f_total"]))
    checks.append(_check_eq("english33 stored W total", db.stored_total, ref["w_stored_total"]))
    for n, want in reference.int_keys(ref["w_exact"]).items():
        checks.append(_check_eq(f"english33 W_{n} codes", db.layers[n].tolist(), want))
    for n, (head, tail) in reference.int_keys(ref["w_edges"]).items():
        got = (db.layers[n][:3].tolist(), db.layers[n][-3:].tolist())
        checks.append(_check_eq(f"english33 W_{n} head/tail", got, (head, tail)))
    return checks


def _rebuild_and_compare(geom, out_dir, config, type_number=1) -> tuple[list[Check], TypeDatabase, dict]:
    stored = formats.load_type_database(geom, out_dir, type_number)
    rebuilt, cdbs = _fresh_type(geom, config, type_number)
    return (
        [Check(f"{geom.kind} stored file matches a fresh build", stored == rebuilt)],
        stored,
        cdbs,
    )


def _fresh_type(geom, config, type_number=1):
    ptype = get_type(geom, type_number)
    db, cdbs, _ = build_type_database(ptype, geom, config)
    return db, cdbs


def _verify_triangle5(geom, ref, out_dir, config) -> list[Check]:
    checks, db, cdbs = _rebuild_and_compare(geom, out_dir, config)
    corner = cdbs[2]
    start_raw = geom.full_code ^ 1
    raw_f = forward_layers(geom, [start_raw], reduction=RAW, config=config)
    checks += _check_counts(
        "triangle5 corner raw F",
        {n: l.count for n, l in raw_f.items()},
        reference.int_keys(ref["raw_f"]),
    )
    checks += _check_counts(
        "triangle5 corner reduced F", corner.f_counts, reference.int_keys(ref["reduced_f"])
    )
    checks += _check_counts("triangle5 corner W", corner.w_counts, reference.int_keys(ref["w"]))
    checks.append(_check_eq("triangle5 corner stored W total", corner.stored_total, ref["w_stored_total"]))
    result = winning_layers(geom, [geom.mincode(start_raw)], config=config)
    l_counts = {n: l.count for n, l in losing_layers(result, geom, config).items()}
    checks += _check_counts("triangle5 corner L", l_counts, reference.int_keys(ref["l"]))
    checks.append(_check_eq("triangle5 corner L total", sum(l_counts.values()), ref["l_total"]))
    for n, want in reference.int_keys(ref["w_sets"]).items():
        checks.append(_check_eq(f"triangle5 W_{n} codes", corner.layers[n].tolist(), want))
    idb = db.indexed
    grid = {
        n: {j: c for j, c in enumerate(idb.index_counts(n))} for n in range(1, 8)
    }
    for n, row in reference.int_keys(ref["indexed_rows"]).items():
        got = {int(j): grid[n].get(int(j), 0) for j in row}
        checks.append(_check_eq(f"triangle5 indexed row n={n}", got, reference.int_keys(row)))
    totals = [sum(grid[n].get(j, 0) for n in range(1, 8)) for j in range(idb.topindex)]
    for j, want in reference.int_keys(ref["indexed_totals"]).items():
        checks.append(_check_eq(f"triangle5 index {j} total", totals[j], want))
    checks.append(_check_eq("triangle5 indexed grand total", sum(totals), ref["indexed_grand"]))
    checks.append(_check_eq("triangle5 index 5 empty", totals[5], 0))
    checks.append(_check_eq("triangle5 indices 8..15 empty", sum(totals[8:]), 0))
    checks.append(
        _check_eq("triangle5 plain total", int(sum(a.size for a in db.plain.values())), ref["plain_total"])
    )
    checks.append(_check_eq("triangle5 1-peg indexed codes", idb.codes[1].tolist(), ref["layer1_codes"]))
    checks.append(_check_eq("triangle5 1-peg offsets", idb.ends[1].tolist(), ref["layer1_ends"]))
    return checks


def _verify_triangle6(geom, ref, out_dir, config) -> list[Check]:
    checks, _, cdbs = _rebuild_and_compare(geom, out_dir, config)
    corner = cdbs[3]
    checks += _check_counts("triangle6 corner F", corner.f_counts, reference.int_keys(ref["f"]))
    checks += _check_counts("triangle6 corner W", corner.w_counts, reference.int_keys(ref["w"]))
    start = geom.mincode(geom.full_code ^ 1)
    result = winning_layers(geom, [start], config=config)
    l_counts = {n: l.count for n, l in losing_layers(result, geom, config).items()}
    checks += _check_counts("triangle6 corner L", l_counts, reference.int_keys(ref["l"]))
    checks.append(_check_eq("triangle6 corner L total", sum(l_counts.values()), ref["l_total"]))
    # the published totals row disagrees with its own per-layer column by
    # one; the per-layer values are what the build must reproduce
    checks.append(
        _check_eq(
            "triangle6 F total (sum of published per-layer values)",
            sum(corner.f_counts.values()),
            ref["f_total_from_layers"],
        )
    )
    checks.append(
        _check_eq(
            "triangle6 stored W total (sum of published per-layer values)",
            corner.stored_total,
            ref["w_stored_total_from_layers"],
        )
    )
    return checks


def _verify_triangle4(geom, ref, out_dir, config) -> list[Check]:
    checks, db, _ = _rebuild_and_compare(geom, out_dir, config)
    idb = db.indexed
    checks.append(_check_eq("triangle4 problem count", idb.p, 0))
    same = all(
        np.array_equal(db.plain[n], idb.codes[n])
        and idb.ends[n].tolist() == [int(db.plain[n].size)]
        for n in db.plain
    )
    checks.append(Check("triangle4 plain and indexed versions identical", same))
    essential = sum(db.plain[n].size for n in range(1, 5)) + db.plain[5].size // 2
    checks.append(_check_eq("triangle4 essentially different positions", int(essential), ref["essential_positions"]))
    middle = db.plain[5]
    mirrored = complement_image(middle, geom, REDUCED)
    checks.append(Check("triangle4 middle layer self-complementary", bool(np.array_equal(middle, mirrored))))
    checks.append(_check_eq("triangle4 middle layer size", int(middle.size), ref["middle_layer_size"]))
    code, mate = ref["complement_pair_code"], ref["complement_pair_mate"]
    comp = geom.complement(code)
    pair_ok = comp == 929 and geom.mincode(comp) == geom.mincode(mate)
    checks.append(Check("triangle4 complement of 94 shares the class of 103", pair_ok))
    checks.append(Check("triangle4 pair members stored", bool(
        np.isin(np.uint64(code), middle)) and bool(np.isin(np.uint64(mate), middle))))
    return checks


# ----------------------------------------------------------------------
# stats


def stats_for(kind: str, out_dir: Path) -> dict:
    geom = make_geometry(kind)
    return formats.load_meta(geom, Path(out_dir))


def layer_table(entry: dict) -> list[tuple[int, int | None, int | None, int | None]]:
    """Rows (n, |F_n|, |W_n|, |L_n|) for one meta entry, largest n first."""
    f = reference.int_keys(entry.get("fCounts", {}))
    w = reference.int_keys(entry.get("wCounts", {}))
    l = reference.int_keys(entry.get("lCounts", {}))
    ns = sorted(set(f) | set(w) | set(l), reverse=True)
    return [(n, f.get(n), w.get(n), l.get(n)) for n in ns]
