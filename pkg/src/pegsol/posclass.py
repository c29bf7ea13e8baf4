"""Jump-parity position classes, problem types, and problem enumeration.

Every jump removes two pegs and adds one along three consecutive lattice
cells, so peg counts taken modulo 3 along the lattice diagonals yield
quantities that never change during play.  We fold those counts into a
small parity label: positions with different labels can never reach one
another.  On square-lattice boards both the x+y and x-y diagonals give an
invariant; on triangular boards only x+y does.

The label machinery decides which start/finish pairs are admissible,
whether a board is null-class (full and empty boards share a label, the
precondition for complement problems), and how starting holes group into
problem types.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from pegsol.boards import BoardGeometry, popcount

PositionClassLabel = tuple[int, ...]


@lru_cache(maxsize=None)
def _residue_masks(kind: str) -> tuple[tuple[int, int, int], ...]:
    from pegsol.boards import make_geometry

    geom = make_geometry(kind)
    groups = []
    keys = [lambda x, y: (x + y) % 3]
    if geom.lattice == "square":
        keys.append(lambda x, y: (x - y) % 3)
    for key in keys:
        masks = [0, 0, 0]
        for i, (x, y) in enumerate(geom.holes):
            masks[key(x, y)] |= 1 << i
        groups.append(tuple(masks))
    return tuple(groups)


def class_label(code: int, geom: BoardGeometry) -> PositionClassLabel:
    """Jump-invariant parity label of a position.

    The three per-residue peg-count parities flip together on every jump, so
    only their differences matter; two bits per diagonal direction remain.
    """
    label = []
    for masks in _residue_masks(geom.kind):
        c0, c1, c2 = (popcount(code & m) & 1 for m in masks)
        label.append(c1 ^ c0)
        label.append(c2 ^ c0)
    return tuple(label)


def hole_class(hole: int, geom: BoardGeometry) -> PositionClassLabel:
    """Label of the single-peg position at ``hole``."""
    if not 0 <= hole < geom.N:
        raise ValueError(f"hole index {hole} out of range for {geom.kind}")
    return class_label(1 << hole, geom)


def same_position_class(start: int, finish: int, geom: BoardGeometry) -> bool:
    """Whether a single peg at ``finish`` is reachable from a single vacancy
    at ``start`` as far as the parity invariant can tell.

    On square-lattice boards this is x0=x1 and y0=y1 (mod 3); on triangular
    boards x0+y0 = x1+y1 (mod 3).  Necessary, not sufficient.
    """
    return hole_class(start, geom) == hole_class(finish, geom)


def null_class(geom: BoardGeometry) -> bool:
    """True when the full and empty boards share a position class.

    Complement problems only exist on null-class boards; triangular boards
    fail exactly when side = 1 (mod 3).
    """
    return class_label(geom.full_code, geom) == class_label(0, geom)


def admissible_finishes(start: int, geom: BoardGeometry) -> tuple[int, ...]:
    """Holes where a single survivor is parity-admissible from a single
    vacancy at ``start``."""
    want = class_label(geom.full_code ^ (1 << start), geom)
    return tuple(h for h in range(geom.N) if hole_class(h, geom) == want)


# ----------------------------------------------------------------------
# problem enumeration


@dataclass(frozen=True)
class ProblemSpec:
    """One complement problem: vacate ``start_hole``, finish there.

    ``start_hole`` is the canonical (standard) starting vacancy; ``orbit``
    lists every symmetry-equivalent start the problem also covers.  A
    problem is degenerate when some non-identity board symmetry maps its
    start to a different parity-admissible finishing hole, which forces its
    winning sets to be stored raw rather than symmetry-reduced.
    """

    kind: str
    type_number: int
    number: int
    start_hole: int
    orbit: tuple[int, ...]
    degenerate: bool
    finish_rule: str = "complement"

    @property
    def address(self) -> str:
        return f"{self.kind}:{self.type_number}:{self.number}"


@dataclass(frozen=True)
class ProblemType:
    """A family of interconnected single-vacancy problems.

    ``holes`` are all starting vacancies belonging to the type;
    ``problems`` the complement problems (empty on boards that are not
    null-class); ``svss_pairs`` counts distinct start/finish single-vacancy
    problems of the type up to symmetry.
    """

    kind: str
    number: int
    holes: tuple[int, ...]
    problems: tuple[ProblemSpec, ...]
    svss_pairs: int

    @property
    def degen(self) -> int:
        return sum(1 for p in self.problems if p.degenerate)

    @property
    def topindex(self) -> int:
        return 1 << len(self.problems)


def hole_orbits(geom: BoardGeometry) -> list[tuple[int, ...]]:
    """Orbits of holes under the board symmetry group, by smallest member."""
    seen: set[int] = set()
    orbits = []
    for h in range(geom.N):
        if h in seen:
            continue
        orbit = sorted({perm[h] for perm in geom.symmetries})
        seen.update(orbit)
        orbits.append(tuple(orbit))
    return orbits


def _is_degenerate(hole: int, geom: BoardGeometry) -> bool:
    label = hole_class(hole, geom)
    for perm in geom.symmetries[1:]:
        image = perm[hole]
        if image != hole and hole_class(image, geom) == label:
            return True
    return False


# Canonical starting vacancies pinned by the published raw winning sets:
# the degenerate 15-hole problem stores its sets in the orientation with
# the vacancy at (0,3).
_STANDARD_START_OVERRIDES = {("triangle5", (1, 2, 6, 9, 11, 13)): 6}


def _standard_start(kind: str, orbit: tuple[int, ...]) -> int:
    return _STANDARD_START_OVERRIDES.get((kind, orbit), orbit[0])


def _svss_pair_count(geom: BoardGeometry, holes: tuple[int, ...]) -> int:
    hole_set = set(holes)
    pairs: set[tuple[int, int]] = set()
    for start in holes:
        for finish in admissible_finishes(start, geom):
            if finish not in hole_set:
                continue
            pairs.add(min((p[start], p[finish]) for p in geom.symmetries))
    return len(pairs)


@lru_cache(maxsize=None)
def enumerate_types(kind: str) -> tuple[ProblemType, ...]:
    """All problem types of a board, each with its numbered problems.

    Types are the symmetry-orbits of live position classes (classes whose
    starts admit at least one finish).  The class fixed by every symmetry,
    when present, is type 1; remaining types are ordered by smallest hole
    index.  Within a type, problems are numbered with symmetry-fixed starts
    first, then degenerate starts, then the rest, each group ordered by
    smallest orbit member.
    """
    from pegsol.boards import make_geometry

    geom = make_geometry(kind)
    labels = [hole_class(h, geom) for h in range(geom.N)]
    live = [len(admissible_finishes(h, geom)) > 0 for h in range(geom.N)]

    # group live class labels into orbits under the symmetry action
    label_action: dict[PositionClassLabel, set[PositionClassLabel]] = {}
    for h in range(geom.N):
        if not live[h]:
            continue
        group = label_action.setdefault(labels[h], {labels[h]})
        for perm in geom.symmetries:
            group.add(labels[perm[h]])
    cycles: list[frozenset[PositionClassLabel]] = []
    for label, group in label_action.items():
        merged = frozenset(group)
        for other in label_action.values():
            if other & merged:
                merged = merged | frozenset(other)
        if merged not in cycles:
            cycles.append(merged)

    type_holes = []
    for cycle in cycles:
        holes = tuple(h for h in range(geom.N) if live[h] and labels[h] in cycle)
        type_holes.append((cycle, holes))
    type_holes.sort(key=lambda item: (0 if len(item[0]) == 1 else 1, item[1][0]))

    is_null = null_class(geom)
    types = []
    for t, (_, holes) in enumerate(type_holes, start=1):
        orbits = [o for o in hole_orbits(geom) if o[0] in holes]
        ordered = sorted(
            orbits,
            key=lambda o: (
                0 if len(o) == 1 else (1 if _is_degenerate(o[0], geom) else 2),
                o[0],
            ),
        )
        problems = tuple(
            ProblemSpec(
                kind=kind,
                type_number=t,
                number=i,
                start_hole=_standard_start(kind, orbit),
                orbit=orbit,
                degenerate=_is_degenerate(orbit[0], geom),
            )
            for i, orbit in enumerate(ordered, start=1)
        ) if is_null else ()
        types.append(
            ProblemType(
                kind=kind,
                number=t,
                holes=holes,
                problems=problems,
                svss_pairs=_svss_pair_count(geom, holes),
            )
        )
    return tuple(types)


def enumerate_problems(geom: BoardGeometry) -> tuple[ProblemSpec, ...]:
    """All complement problems of a board, grouped by type number."""
    return tuple(p for t in enumerate_types(geom.kind) for p in t.problems)


def get_type(geom: BoardGeometry, type_number: int) -> ProblemType:
    for t in enumerate_types(geom.kind):
        if t.number == type_number:
            return t
    raise ValueError(f"{geom.kind} has no problem type {type_number}")


def get_problem(geom: BoardGeometry, type_number: int, number: int) -> ProblemSpec:
    for p in get_type(geom, type_number).problems:
        if p.number == number:
            return p
    raise ValueError(f"{geom.kind} type {type_number} has no problem {number}")


def problem_by_address(geom: BoardGeometry, address: str) -> ProblemSpec:
    """Resolve ``<type>:<problem>`` (or ``<board>:<type>:<problem>``)."""
    parts = address.split(":")
    if len(parts) == 3:
        if parts[0] != geom.kind:
            raise ValueError(f"problem address {address!r} is not on {geom.kind}")
        parts = parts[1:]
    if len(parts) != 2:
        raise ValueError(f"bad problem address {address!r}, want TYPE:PROBLEM")
    try:
        t, i = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"bad problem address {address!r}") from None
    return get_problem(geom, t, i)


def ksym_for(geom: BoardGeometry, problem: ProblemSpec, user_start: int) -> int:
    """Index of the symmetry transform aligning a game started at
    ``user_start`` with the problem's canonical orientation.

    Fixed once when the game starts; ties resolve to the lowest index.
    """
    for k, perm in enumerate(geom.symmetries):
        if perm[user_start] == problem.start_hole:
            return k
    raise ValueError(
        f"hole {user_start} is not a starting vacancy of problem {problem.address}"
    )
