"""Winning-position databases: per-problem complement sets, whole-type
supersets, power-set-indexed combined sets, and the lookup oracles.

A complement database stores the winning layers of one vacate-here
finish-here problem, halved through the complement mirror.  A type database
merges every complement problem of a problem type with the type's
finish-anywhere superset into one array per peg count, grouped by *index*:
the bitmask of complement problems a position can occur in, with index 0
holding positions that occur only in finish-anywhere solutions.

Degenerate problems (whose start maps, under a board symmetry, onto another
admissible finishing hole) keep their codes raw, in the canonical start
orientation; everything else is stored as smallest-code class
representatives.  When a raw code and a reduced code would describe the same
symmetry class, the raw code wins and carries the combined index bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pegsol.boards import BoardGeometry, popcount
from pegsol.layers import (
    RAW,
    REDUCED,
    LayerSet,
    PartitionConfig,
    WinningResult,
    complement_image,
    losing_layers,
    winning_layers,
)
from pegsol.posclass import ProblemSpec, ProblemType, null_class

FINISH_COMPLEMENT = "complement"
FINISH_ANYWHERE = "anywhere"


def _in_sorted(values: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Boolean membership of each value in a sorted unique table."""
    if table.size == 0:
        return np.zeros(values.shape, dtype=bool)
    pos = np.searchsorted(table, values)
    pos[pos == table.size] = table.size - 1
    return table[pos] == values


def _contains(table: np.ndarray, code: int) -> bool:
    i = int(np.searchsorted(table, np.uint64(code)))
    return i < table.size and int(table[i]) == code


# ----------------------------------------------------------------------
# complement databases


@dataclass
class ComplementDB:
    """Winning layers of one complement problem, lower half stored.

    ``layers[n]`` for n = 1 .. floor(N/2) are sorted code arrays; upper
    layers are complement mirrors.  Raw databases (degenerate problems) hold
    codes in the canonical start orientation; reduced databases hold class
    mincodes.
    """

    problem: ProblemSpec
    layers: dict[int, np.ndarray]
    raw: bool
    f_counts: dict[int, int]
    w_counts: dict[int, int]
    l_counts: dict[int, int] = field(default_factory=dict)
    build_seconds: float = 0.0

    @property
    def kind(self) -> str:
        return self.problem.kind

    @property
    def solvable(self) -> bool:
        return all(a.size > 0 for a in self.layers.values())

    @property
    def stored_total(self) -> int:
        return sum(a.size for a in self.layers.values())

    def w_layer(self, n: int, geom: BoardGeometry) -> np.ndarray:
        if n in self.layers:
            return self.layers[n]
        mirror = geom.N - n
        if mirror not in self.layers:
            raise KeyError(f"W_{n} not stored")
        return complement_image(self.layers[mirror], geom, RAW if self.raw else REDUCED)

    def reduced_layer(self, n: int, geom: BoardGeometry) -> np.ndarray:
        """Class mincodes of stored layer n (identity for reduced DBs)."""
        if not self.raw:
            return self.layers[n]
        return np.unique(geom.mincode_array(self.layers[n]))


def build_complement_db(
    problem: ProblemSpec,
    geom: BoardGeometry,
    config: PartitionConfig | None = None,
    with_losing: bool = False,
    progress=None,
) -> ComplementDB:
    """Build the winning layers of a complement problem.

    Degenerate problems are built raw from the canonical start orientation;
    the rest are built symmetry-reduced.  Unsolvable problems come back with
    empty layers, flagged through ``solvable``.
    """
    import time

    if problem.finish_rule != FINISH_COMPLEMENT:
        raise ValueError("build_complement_db needs a complement problem")
    if not null_class(geom):
        raise ValueError(f"{geom.kind} is not null-class; no complement problems")
    t0 = time.monotonic()
    start = geom.full_code ^ (1 << problem.start_hole)
    reduction = RAW if problem.degenerate else REDUCED
    if reduction == REDUCED:
        start = geom.mincode(start)
    result = winning_layers(
        geom, [start], reduction=reduction, config=config, progress=progress
    )
    db = ComplementDB(
        problem=problem,
        layers={n: l.codes for n, l in result.stored.items()},
        raw=problem.degenerate,
        f_counts=result.f_counts,
        w_counts=result.w_counts,
    )
    if with_losing:
        db.l_counts = {
            n: l.count for n, l in losing_layers(result, geom, config).items()
        }
    db.build_seconds = time.monotonic() - t0
    return db


def build_central_result(
    geom: BoardGeometry,
    problem: ProblemSpec,
    config: PartitionConfig | None = None,
    progress=None,
) -> WinningResult:
    """Like build_complement_db but returning the raw engine result with
    forward layers retained (for stats and losing-set work)."""
    start = geom.full_code ^ (1 << problem.start_hole)
    reduction = RAW if problem.degenerate else REDUCED
    if reduction == REDUCED:
        start = geom.mincode(start)
    return winning_layers(
        geom,
        [start],
        reduction=reduction,
        config=config,
        keep_forward=True,
        progress=progress,
    )


# ----------------------------------------------------------------------
# whole-type supersets and indexed databases


@dataclass
class SupersetDB:
    """Symmetry-reduced winning layers over a whole problem type: every
    position that occurs in some single-vacancy solution of the type."""

    kind: str
    type_number: int
    layers: dict[int, np.ndarray]
    f_counts: dict[int, int]
    w_counts: dict[int, int]

    def w_layer(self, n: int, geom: BoardGeometry) -> np.ndarray:
        if n in self.layers:
            return self.layers[n]
        return complement_image(self.layers[geom.N - n], geom, REDUCED)


def build_svss_superset(
    ptype: ProblemType,
    geom: BoardGeometry,
    config: PartitionConfig | None = None,
    progress=None,
) -> SupersetDB:
    """Winning superset of a type: start from every one-peg-missing position
    of the type; the finish set is its complement image, so the same halved
    machinery applies."""
    starts = np.unique(
        geom.mincode_array(
            np.array(
                [geom.full_code ^ (1 << h) for h in ptype.holes], dtype=np.uint64
            )
        )
    )
    result = winning_layers(
        geom, starts, reduction=REDUCED, config=config, progress=progress
    )
    return SupersetDB(
        kind=geom.kind,
        type_number=ptype.number,
        layers={n: l.codes for n, l in result.stored.items()},
        f_counts=result.f_counts,
        w_counts=result.w_counts,
    )


@dataclass
class IndexedWinningDB:
    """Per-peg-count winning codes grouped by power-set index.

    ``codes[n]`` is sorted by (index, code); ``ends[n][j]`` is the end
    offset of index j's run, so run j spans ``ends[j-1]:ends[j]`` (0-based
    start for j = 0).  Index bit i-1 set means the code occurs in complement
    problem i; index 0 means finish-anywhere only.
    """

    kind: str
    type_number: int
    p: int
    degen: int
    codes: dict[int, np.ndarray]
    ends: dict[int, np.ndarray]
    problems: tuple[ProblemSpec, ...] = ()

    @property
    def topindex(self) -> int:
        return 1 << self.p

    def any_table(self, n: int) -> np.ndarray:
        """All codes of layer n sorted globally, for finish-anywhere search."""
        cache = self.__dict__.setdefault("_any_tables", {})
        if n not in cache:
            cache[n] = np.sort(self.codes[n], kind="stable")
        return cache[n]

    def run(self, n: int, j: int) -> np.ndarray:
        lo = int(self.ends[n][j - 1]) if j > 0 else 0
        return self.codes[n][lo : int(self.ends[n][j])]

    def index_counts(self, n: int) -> list[int]:
        ends = self.ends[n]
        return [int(ends[0])] + [int(ends[j] - ends[j - 1]) for j in range(1, ends.size)]

    def total(self) -> int:
        return sum(a.size for a in self.codes.values())


def build_indexed_db(
    ptype: ProblemType,
    geom: BoardGeometry,
    complement_dbs: dict[int, ComplementDB],
    superset: SupersetDB,
) -> IndexedWinningDB:
    """Merge a type's complement databases and its superset into one
    index-grouped store.

    Raw codes from degenerate problems are kept; a symmetry class
    represented by a raw code drops its reduced representative, and the raw
    entries carry the index bits of every problem the class occurs in.
    """
    p = len(ptype.problems)
    half = geom.N // 2
    raw_numbers = [pr.number for pr in ptype.problems if pr.degenerate]
    reduced_numbers = [pr.number for pr in ptype.problems if not pr.degenerate]
    codes_out: dict[int, np.ndarray] = {}
    ends_out: dict[int, np.ndarray] = {}
    for n in range(1, half + 1):
        superset_classes = superset.layers[n]
        raw_pool = (
            np.unique(
                np.concatenate([complement_dbs[i].layers[n] for i in raw_numbers])
            )
            if raw_numbers
            else np.empty(0, dtype=np.uint64)
        )
        entries_codes = []
        entries_index = []
        if raw_pool.size:
            idx = np.zeros(raw_pool.size, dtype=np.int64)
            for i in raw_numbers:
                idx |= _in_sorted(raw_pool, complement_dbs[i].layers[n]) << (i - 1)
            mins = geom.mincode_array(raw_pool)
            for i in reduced_numbers:
                idx |= _in_sorted(mins, complement_dbs[i].layers[n]) << (i - 1)
            bad = ~_in_sorted(mins, superset_classes)
            if bad.any():
                raise AssertionError("raw winning code outside the type superset")
            entries_codes.append(raw_pool)
            entries_index.append(idx)
            covered = np.unique(mins)
        else:
            covered = np.empty(0, dtype=np.uint64)
        rest = np.setdiff1d(superset_classes, covered, assume_unique=True)
        if rest.size:
            idx = np.zeros(rest.size, dtype=np.int64)
            for i in reduced_numbers:
                idx |= _in_sorted(rest, complement_dbs[i].layers[n]) << (i - 1)
            entries_codes.append(rest)
            entries_index.append(idx)
        if entries_codes:
            all_codes = np.concatenate(entries_codes)
            all_index = np.concatenate(entries_index)
            order = np.lexsort((all_codes, all_index))
            all_codes, all_index = all_codes[order], all_index[order]
        else:
            all_codes = np.empty(0, dtype=np.uint64)
            all_index = np.empty(0, dtype=np.int64)
        codes_out[n] = all_codes
        ends_out[n] = np.searchsorted(
            all_index, np.arange(1 << p), side="right"
        ).astype(np.int64)
    return IndexedWinningDB(
        kind=geom.kind,
        type_number=ptype.number,
        p=p,
        degen=len(raw_numbers),
        codes=codes_out,
        ends=ends_out,
        problems=ptype.problems,
    )


@dataclass
class TypeDatabase:
    """Everything the files carry for one problem type: the plain
    finish-anywhere sets and the indexed version."""

    kind: str
    type_number: int
    plain: dict[int, np.ndarray]
    indexed: IndexedWinningDB

    def __eq__(self, other) -> bool:
        if not isinstance(other, TypeDatabase):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.type_number == other.type_number
            and sorted(self.plain) == sorted(other.plain)
            and all(np.array_equal(self.plain[n], other.plain[n]) for n in self.plain)
            and self.indexed.p == other.indexed.p
            and self.indexed.degen == other.indexed.degen
            and sorted(self.indexed.codes) == sorted(other.indexed.codes)
            and all(
                np.array_equal(self.indexed.codes[n], other.indexed.codes[n])
                and np.array_equal(self.indexed.ends[n], other.indexed.ends[n])
                for n in self.indexed.codes
            )
        )


def build_type_database(
    ptype: ProblemType,
    geom: BoardGeometry,
    config: PartitionConfig | None = None,
    progress=None,
) -> tuple[TypeDatabase, dict[int, ComplementDB], SupersetDB]:
    """Build every complement problem of a type plus its superset and merge
    them into the on-disk shape."""
    cdbs = {
        pr.number: build_complement_db(pr, geom, config, progress=progress)
        for pr in ptype.problems
    }
    superset = build_svss_superset(ptype, geom, config, progress=progress)
    indexed = build_indexed_db(ptype, geom, cdbs, superset)
    db = TypeDatabase(
        kind=geom.kind,
        type_number=ptype.number,
        plain=dict(superset.layers),
        indexed=indexed,
    )
    return db, cdbs, superset


# ----------------------------------------------------------------------
# lookup oracles


def problem_is_solvable(code: int, db: ComplementDB, geom: BoardGeometry) -> bool:
    """Whether the complement problem can still be won from this position.

    Positions above the middle layer are complemented first; membership is
    tested on the class mincode.  For a degenerate problem this answers the
    loosened question "finish at the start hole or a symmetric image of it";
    use ``board_is_solvable`` with ksym for the orientation-exact answer.
    False never rules out a one-peg finish somewhere else.
    """
    n = popcount(code)
    half = geom.N // 2
    if n > half:
        code = geom.complement(code)
        n = geom.N - n
    if n < 1 or n > half:
        return False
    return _contains(db.reduced_layer(n, geom), geom.mincode(code))


def board_is_solvable(
    code: int,
    db: IndexedWinningDB,
    geom: BoardGeometry,
    problem_number: int | None = None,
    ksym: int = 0,
    finish: str = FINISH_ANYWHERE,
) -> bool:
    """Oracle over an indexed type database.

    finish-anywhere: true when any symmetry code of the position (after
    complementing above the middle layer) appears anywhere in the store.
    finish = complement: membership restricted to index runs containing the
    problem's bit; for degenerate problems only the single symmetry code
    selected by ``ksym`` counts, which is what keeps mirror-image positions
    with identical mincodes distinguishable.
    """
    n = popcount(code)
    half = geom.N // 2
    if n > half:
        code = geom.complement(code)
        n = geom.N - n
    if n < 1 or n > half or n not in db.codes:
        return False
    syms = geom.symmetry_codes(code)
    if finish == FINISH_ANYWHERE:
        table = db.any_table(n)
        return any(_contains(table, s) for s in set(syms))
    if problem_number is None:
        raise ValueError("complement lookups need a problem number")
    if not 1 <= problem_number <= db.p:
        raise ValueError(f"problem {problem_number} out of range for this database")
    if not 0 <= ksym < len(geom.symmetries):
        raise ValueError(f"ksym {ksym} out of range")
    if problem_number <= db.degen:
        candidates = [syms[ksym]]
    else:
        candidates = list(set(syms))
    bit = 1 << (problem_number - 1)
    for j in range(1, db.topindex):
        if j & bit:
            run = db.run(n, j)
            if run.size and any(_contains(run, s) for s in candidates):
                return True
    return False


@dataclass
class JumpVerdict:
    triple: tuple[int, int, int]
    successor: int
    good: bool


class SolvabilityOracle:
    """Uniform query surface over either database shape, fixed to one
    problem/finish-rule/orientation for the lifetime of a game."""

    def __init__(
        self,
        db: ComplementDB | IndexedWinningDB,
        geom: BoardGeometry,
        problem_number: int | None = None,
        ksym: int = 0,
        finish: str = FINISH_COMPLEMENT,
    ):
        self.db = db
        self.geom = geom
        self.problem_number = problem_number
        self.ksym = ksym
        self.finish = finish
        if isinstance(db, ComplementDB) and finish != FINISH_COMPLEMENT:
            raise ValueError("a complement database only answers complement queries")

    def solvable(self, code: int) -> bool:
        if isinstance(self.db, ComplementDB):
            return problem_is_solvable(code, self.db, self.geom)
        return board_is_solvable(
            code,
            self.db,
            self.geom,
            problem_number=self.problem_number,
            ksym=self.ksym,
            finish=self.finish,
        )

    def good_jumps(self, code: int) -> list[JumpVerdict]:
        """Verdict for every legal jump: does the successor stay winning?"""
        return [
            JumpVerdict(triple, succ, self.solvable(succ))
            for triple, succ in self.geom.legal_jumps(code)
        ]
