"""Board geometries and the bit-code vocabulary shared by every other module.

A board position is an N-bit integer code: bit i is set exactly when hole i
holds a peg.  Holes are numbered row by row from the top of the board,
left to right within a row, so the top-left hole carries bit weight 1.
Everything above this module (layer expansion, winning databases, the CLI,
the web bundles) speaks this code language.

Supported boards: the 33-hole cross (``english33``), the 45-hole cross
(``wiegleb45``), the full 6x6 square (``square6``) and triangular boards of
side >= 3 (``triangle4``, ``triangle5``, ...).  Cross and square boards use
Cartesian (x, y) hole coordinates with y growing downward and jumps along
rows and columns; triangular boards use skew coordinates (x, y) with
0 <= x <= y and jumps along the three line directions of the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

Coord = tuple[int, int]
JumpTriple = tuple[int, int, int]

_SQUARE_DIRECTIONS: tuple[Coord, ...] = ((1, 0), (0, 1))
_TRIANGLE_DIRECTIONS: tuple[Coord, ...] = ((1, 0), (0, 1), (1, 1))

#: Board kinds accepted by the CLI and the file formats.
STANDARD_BOARDS = (
    "english33",
    "wiegleb45",
    "square6",
    "triangle4",
    "triangle5",
    "triangle6",
)

PEG_CHAR = "X"
EMPTY_CHAR = "."


def popcount(code: int) -> int:
    """Number of pegs in a position code."""
    return code.bit_count()


def popcount_array(codes: np.ndarray) -> np.ndarray:
    return np.bitwise_count(codes).astype(np.int64)


@dataclass(frozen=True)
class BoardGeometry:
    """A board's holes, directed jump triples, and symmetry permutations.

    ``symmetries`` is the full dihedral group of the board as hole-index
    permutations: ``perm[i]`` is the hole a peg at hole ``i`` lands on.  The
    identity is always first; rotations come before reflected transforms.
    """

    kind: str
    lattice: str  # "square" | "triangular"
    span: int  # grid width for square-lattice boards, side for triangles
    holes: tuple[Coord, ...]
    jumps: tuple[JumpTriple, ...]
    symmetries: tuple[tuple[int, ...], ...]

    @property
    def N(self) -> int:
        return len(self.holes)

    @cached_property
    def full_code(self) -> int:
        return (1 << self.N) - 1

    @cached_property
    def index_of(self) -> dict[Coord, int]:
        return {c: i for i, c in enumerate(self.holes)}

    @cached_property
    def file_stem(self) -> str:
        """Base name used for database files, e.g. ``Triangle15``."""
        base = {"english33": "English", "wiegleb45": "Wiegleb", "square6": "Square"}.get(
            self.kind, "Triangle"
        )
        return f"{base}{self.N}"

    def hole_index(self, x: int, y: int) -> int:
        try:
            return self.index_of[(x, y)]
        except KeyError:
            raise ValueError(f"({x},{y}) is not a hole on {self.kind}") from None

    # ------------------------------------------------------------------
    # scalar code operations

    def complement(self, code: int) -> int:
        """Swap pegs and holes everywhere: code maps to 2^N - 1 - code."""
        return self.full_code - code

    def apply_symmetry(self, code: int, k: int) -> int:
        """Image of a position code under symmetry transform ``k``."""
        tables = self._sym_tables
        out = 0
        for c in range(tables.shape[1]):
            out |= int(tables[k, c, (code >> (16 * c)) & 0xFFFF])
        return out

    def symmetry_codes(self, code: int) -> list[int]:
        """All transform images in symmetry order (may contain repeats)."""
        return [self.apply_symmetry(code, k) for k in range(len(self.symmetries))]

    def symmetry_images(self, code: int) -> tuple[int, ...]:
        """The distinct codes of the position's symmetry class, sorted."""
        return tuple(sorted(set(self.symmetry_codes(code))))

    def mincode(self, code: int) -> int:
        return min(self.symmetry_codes(code))

    def maxcode(self, code: int) -> int:
        return max(self.symmetry_codes(code))

    def legal_jumps(self, code: int) -> list[tuple[JumpTriple, int]]:
        """Every playable jump with its successor code.

        A jump needs a peg on the from- and over-holes and an empty to-hole;
        the successor toggles all three bits.
        """
        out = []
        for triple, full_mask, need in zip(self.jumps, self._jump_full, self._jump_need):
            if code & full_mask == need:
                out.append((triple, code ^ full_mask))
        return out

    # ------------------------------------------------------------------
    # vectorized code operations (uint64 arrays)

    def apply_symmetry_array(self, codes: np.ndarray, k: int) -> np.ndarray:
        tables = self._sym_tables
        out = tables[k, 0][codes & np.uint64(0xFFFF)]
        for c in range(1, tables.shape[1]):
            out |= tables[k, c][(codes >> np.uint64(16 * c)) & np.uint64(0xFFFF)]
        return out

    def mincode_array(self, codes: np.ndarray) -> np.ndarray:
        out = codes.copy()
        for k in range(1, len(self.symmetries)):
            np.minimum(out, self.apply_symmetry_array(codes, k), out=out)
        return out

    def maxcode_array(self, codes: np.ndarray) -> np.ndarray:
        out = codes.copy()
        for k in range(1, len(self.symmetries)):
            np.maximum(out, self.apply_symmetry_array(codes, k), out=out)
        return out

    @cached_property
    def _sym_tables(self) -> np.ndarray:
        """16-bit chunk lookup tables: tables[k, c, v] is the image under
        transform k of the bits ``v << 16c``."""
        n_chunks = (self.N + 15) // 16
        tables = np.zeros((len(self.symmetries), n_chunks, 65536), dtype=np.uint64)
        values = np.arange(65536, dtype=np.uint64)
        for k, perm in enumerate(self.symmetries):
            for c in range(n_chunks):
                for b in range(min(16, self.N - 16 * c)):
                    mask = (values >> np.uint64(b)) & np.uint64(1)
                    tables[k, c] |= np.where(
                        mask.astype(bool), np.uint64(1 << perm[16 * c + b]), np.uint64(0)
                    )
        return tables

    @cached_property
    def _jump_full(self) -> tuple[int, ...]:
        return tuple((1 << f) | (1 << o) | (1 << t) for f, o, t in self.jumps)

    @cached_property
    def _jump_need(self) -> tuple[int, ...]:
        return tuple((1 << f) | (1 << o) for f, o, _ in self.jumps)

    @cached_property
    def jump_masks(self) -> tuple[np.ndarray, np.ndarray]:
        """(full, need) uint64 mask arrays, one entry per directed jump."""
        full = np.array(self._jump_full, dtype=np.uint64)
        need = np.array(self._jump_need, dtype=np.uint64)
        return full, need

    # ------------------------------------------------------------------
    # diagnostics

    def render_ascii(self, code: int) -> str:
        """Draw a position: X peg, . empty, space off the board."""
        lines = []
        if self.lattice == "square":
            for y in range(self.span):
                row = []
                for x in range(self.span):
                    i = self.index_of.get((x, y))
                    if i is None:
                        row.append(" ")
                    else:
                        row.append(PEG_CHAR if code >> i & 1 else EMPTY_CHAR)
                lines.append("".join(row).rstrip())
        else:
            for y in range(self.span):
                cells = []
                for x in range(y + 1):
                    i = self.index_of[(x, y)]
                    cells.append(PEG_CHAR if code >> i & 1 else EMPTY_CHAR)
                lines.append(" " * (self.span - 1 - y) + " ".join(cells))
        return "\n".join(lines)

    def parse_ascii(self, text: str) -> int:
        """Inverse of render_ascii; whitespace is ignored entirely."""
        cells = []
        for ch in text:
            if ch in (PEG_CHAR, EMPTY_CHAR):
                cells.append(ch)
            elif not ch.isspace():
                raise ValueError(f"unexpected character {ch!r} in board diagram")
        if len(cells) != self.N:
            raise ValueError(
                f"board diagram has {len(cells)} cells, {self.kind} needs {self.N}"
            )
        return sum(1 << i for i, ch in enumerate(cells) if ch == PEG_CHAR)

    def parse_position(self, text: str) -> int:
        """Accept a decimal code, a 0x hex code, or an ASCII diagram."""
        s = text.strip()
        try:
            code = int(s, 16) if s.lower().startswith("0x") else int(s)
        except ValueError:
            return self.parse_ascii(text)
        if not 0 <= code <= self.full_code:
            raise ValueError(f"code {code} out of range for {self.kind} (N={self.N})")
        return code


@dataclass(frozen=True)
class Position:
    """A position code bound to its geometry; the universal state currency."""

    code: int
    geometry: BoardGeometry

    def __post_init__(self) -> None:
        if not 0 <= self.code <= self.geometry.full_code:
            raise ValueError(
                f"code {self.code} out of range for {self.geometry.kind}"
            )

    @property
    def peg_count(self) -> int:
        return popcount(self.code)

    def complement(self) -> "Position":
        return Position(self.geometry.complement(self.code), self.geometry)

    def symmetry_images(self) -> tuple[int, ...]:
        return self.geometry.symmetry_images(self.code)

    def mincode(self) -> int:
        return self.geometry.mincode(self.code)

    def maxcode(self) -> int:
        return self.geometry.maxcode(self.code)

    def legal_jumps(self) -> list[tuple[JumpTriple, "Position"]]:
        return [
            (triple, Position(succ, self.geometry))
            for triple, succ in self.geometry.legal_jumps(self.code)
        ]

    def ascii(self) -> str:
        return self.geometry.render_ascii(self.code)


def encode(position: Position) -> int:
    return position.code


def decode(code: int, geometry: BoardGeometry) -> Position:
    return Position(code, geometry)


# ----------------------------------------------------------------------
# geometry construction


def _square_board_holes(width: int, corner: int) -> tuple[Coord, ...]:
    cut = set(range(corner)) | set(range(width - corner, width))
    return tuple(
        (x, y)
        for y in range(width)
        for x in range(width)
        if not (x in cut and y in cut)
    )


def _triangle_holes(side: int) -> tuple[Coord, ...]:
    return tuple((x, y) for y in range(side) for x in range(y + 1))


def _square_transforms(width: int):
    def rot(p: Coord) -> Coord:
        return (width - 1 - p[1], p[0])

    def mirror(p: Coord) -> Coord:
        return (width - 1 - p[0], p[1])

    return rot, mirror, 4


def _triangle_transforms(side: int):
    def rot(p: Coord) -> Coord:
        x, y = p
        return (y - x, side - 1 - x)

    def mirror(p: Coord) -> Coord:
        x, y = p
        return (y - x, y)

    return rot, mirror, 3


def _build_symmetries(holes, index_of, rot, mirror, order) -> tuple[tuple[int, ...], ...]:
    transforms = []
    current = list(holes)
    for _ in range(order):
        transforms.append(tuple(current))
        current = [rot(p) for p in current]
    mirrored = [mirror(p) for p in holes]
    current = mirrored
    for _ in range(order):
        transforms.append(tuple(current))
        current = [rot(p) for p in current]
    perms = []
    for coords in transforms:
        try:
            perms.append(tuple(index_of[p] for p in coords))
        except KeyError as exc:
            raise ValueError(f"symmetry image {exc} falls off the board") from None
    return tuple(perms)


def _build_jumps(holes, index_of, directions) -> tuple[JumpTriple, ...]:
    out = []
    for i, (x, y) in enumerate(holes):
        for dx, dy in directions:
            for sign in (1, -1):
                over = (x + sign * dx, y + sign * dy)
                to = (x + 2 * sign * dx, y + 2 * sign * dy)
                if over in index_of and to in index_of:
                    out.append((i, index_of[over], index_of[to]))
    return tuple(out)


def _validate(geom: BoardGeometry) -> None:
    perms = set(geom.symmetries)
    if len(perms) != len(geom.symmetries):
        raise ValueError("duplicate symmetry permutations")
    identity = tuple(range(geom.N))
    if geom.symmetries[0] != identity:
        raise ValueError("first symmetry must be the identity")
    # group closure and inverses
    for a in geom.symmetries:
        for b in geom.symmetries:
            if tuple(a[i] for i in b) not in perms:
                raise ValueError("symmetries are not closed under composition")
    jump_set = set(geom.jumps)
    for perm in geom.symmetries:
        for f, o, t in geom.jumps:
            if (perm[f], perm[o], perm[t]) not in jump_set:
                raise ValueError("symmetry does not preserve the jump set")


@lru_cache(maxsize=None)
def make_geometry(kind: str) -> BoardGeometry:
    """Construct (and cache) one of the supported board geometries.

    ``kind`` is ``english33``, ``wiegleb45``, ``square6`` or ``triangle<s>``
    with side s >= 3.
    """
    if kind == "english33":
        span, holes = 7, _square_board_holes(7, 2)
        lattice, directions = "square", _SQUARE_DIRECTIONS
        rot, mirror, order = _square_transforms(7)
    elif kind == "wiegleb45":
        span, holes = 9, _square_board_holes(9, 3)
        lattice, directions = "square", _SQUARE_DIRECTIONS
        rot, mirror, order = _square_transforms(9)
    elif kind == "square6":
        span, holes = 6, _square_board_holes(6, 0)
        lattice, directions = "square", _SQUARE_DIRECTIONS
        rot, mirror, order = _square_transforms(6)
    elif kind.startswith("triangle"):
        try:
            side = int(kind[len("triangle"):])
        except ValueError:
            raise ValueError(f"unsupported board kind {kind!r}") from None
        if side < 3:
            raise ValueError("triangle boards need side >= 3")
        span, holes = side, _triangle_holes(side)
        lattice, directions = "triangular", _TRIANGLE_DIRECTIONS
        rot, mirror, order = _triangle_transforms(side)
    else:
        raise ValueError(f"unsupported board kind {kind!r}")

    index_of = {c: i for i, c in enumerate(holes)}
    geom = BoardGeometry(
        kind=kind,
        lattice=lattice,
        span=span,
        holes=holes,
        jumps=_build_jumps(holes, index_of, directions),
        symmetries=_build_symmetries(holes, index_of, rot, mirror, order),
    )
    _validate(geom)
    return geom
