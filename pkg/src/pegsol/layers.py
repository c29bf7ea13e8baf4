"""Layered set engine: descendants, forward/backward/winning/losing layers.

Sets of same-peg-count positions ("layers") are sorted unique uint64 arrays.
Expanding a layer applies every directed jump to every member, optionally
canonicalizes each successor to its smallest symmetry code, and removes
duplicates.  Deduplication can run fully in memory or be partitioned by
``code % p`` across scratch files so that arbitrarily large layers only ever
need one residue class in memory at a time; both routes produce identical
output.

Winning layers are the intersection of forward-reachable and
backward-reachable sets.  For complement problems (and for whole-type
supersets, whose start and finish sets are also complements of one another)
backward sets are complement images of forward sets, which halves both the
computation and the storage: only the lower half of the winning layers is
kept and the upper half is reconstructed by complementing.
"""

from __future__ import annotations

import logging
import os
import resource
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from pegsol.boards import BoardGeometry, popcount_array

log = logging.getLogger("pegsol")

RAW = "raw"
REDUCED = "reduced"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PartitionConfig:
    """How layer expansion deduplicates: p scratch partitions (1 = all in
    memory), a scratch directory, a soft buffer budget in bytes, and the
    number of parallel partition workers."""

    p: int = 1
    scratch: str | None = None
    memory_budget: int = 256 << 20
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("partition count p must be >= 1")
        if self.p > 1 and not _is_prime(self.p):
            raise ValueError("partition count p must be prime when > 1")
        if self.memory_budget < 1 << 20:
            raise ValueError("memory budget below 1 MiB is not usable")

    @property
    def chunk_rows(self) -> int:
        # successor buffers average ~40 codes per input row at 8 bytes each
        return max(1 << 16, self.memory_budget // (8 * 40))


@dataclass
class LayerSet:
    """All positions with exactly ``n`` pegs in one of the F/B/W/L roles."""

    role: str
    n: int
    codes: np.ndarray
    reduction: str
    kind: str

    @property
    def count(self) -> int:
        return int(self.codes.size)

    def validate(self, geom: BoardGeometry) -> None:
        assert self.codes.dtype == np.uint64
        assert self.role in ("F", "B", "W", "L")
        if self.codes.size:
            assert bool(np.all(np.diff(self.codes.view(np.int64)) > 0)), "not sorted-unique"
            assert bool(np.all(popcount_array(self.codes) == self.n)), "wrong peg count"
            if self.reduction == REDUCED:
                assert bool(
                    np.all(geom.mincode_array(self.codes) == self.codes)
                ), "reduced layer holds non-canonical codes"


def as_code_array(codes) -> np.ndarray:
    arr = np.asarray(codes, dtype=np.uint64)
    return np.atleast_1d(arr)


# ----------------------------------------------------------------------
# deduplication


class PartitionedDedup:
    """Accumulates code chunks and yields their sorted unique union.

    With p == 1 everything stays in memory.  With p > 1 incoming codes are
    appended to scratch file ``code % p``; finalize() deduplicates one
    partition at a time (optionally in parallel workers) and merges.
    Output is identical either way.
    """

    def __init__(self, config: PartitionConfig):
        self.config = config
        self._chunks: list[np.ndarray] = []
        self._buffered = 0
        self._tmpdir: tempfile.TemporaryDirectory | None = None
        self._files: list[Path] = []
        if config.p > 1:
            base = config.scratch or tempfile.gettempdir()
            os.makedirs(base, exist_ok=True)
            self._tmpdir = tempfile.TemporaryDirectory(prefix="pegsol-", dir=base)
            self._files = [
                Path(self._tmpdir.name) / f"part{r}.u64" for r in range(config.p)
            ]

    def add(self, codes: np.ndarray) -> None:
        if codes.size == 0:
            return
        if self.config.p == 1:
            self._chunks.append(np.unique(codes))
            self._buffered += self._chunks[-1].nbytes
            if self._buffered > self.config.memory_budget:
                self._compact()
        else:
            residue = codes % np.uint64(self.config.p)
            for r in range(self.config.p):
                part = codes[residue == r]
                if part.size:
                    with open(self._files[r], "ab") as fh:
                        fh.write(part.tobytes())

    def _compact(self) -> None:
        merged = np.unique(np.concatenate(self._chunks))
        self._chunks = [merged]
        self._buffered = merged.nbytes

    def finalize(self) -> np.ndarray:
        if self.config.p == 1:
            if not self._chunks:
                return np.empty(0, dtype=np.uint64)
            out = np.unique(np.concatenate(self._chunks))
            self._chunks = []
            return out
        parts = [p for p in self._files if p.exists()]
        if self.config.jobs > 1 and len(parts) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                uniques = list(pool.map(_dedup_partition_file, map(str, parts)))
        else:
            uniques = [_dedup_partition_file(str(p)) for p in parts]
        self._cleanup()
        if not uniques:
            return np.empty(0, dtype=np.uint64)
        return np.sort(np.concatenate(uniques), kind="stable")

    def _cleanup(self) -> None:
        if self._tmpdir is not None:
            self._tmpdir.cleanup()
            self._tmpdir = None


def _dedup_partition_file(path: str) -> np.ndarray:
    codes = np.fromfile(path, dtype=np.uint64)
    os.unlink(path)
    return np.unique(codes)


def dedup_partitioned(chunks, config: PartitionConfig | None = None) -> np.ndarray:
    """Sorted unique union of a stream of code arrays.

    Exact set semantics regardless of p; p == 1 is plain in-memory dedup.
    """
    config = config or PartitionConfig()
    dedup = PartitionedDedup(config)
    if isinstance(chunks, np.ndarray):
        chunks = [chunks]
    for chunk in chunks:
        dedup.add(as_code_array(chunk))
    return dedup.finalize()


# ----------------------------------------------------------------------
# layer expansion


def expand_chunk(codes: np.ndarray, geom: BoardGeometry) -> np.ndarray:
    """All jump successors of a code chunk, duplicates included."""
    full, need = geom.jump_masks
    parts = []
    for j in range(full.size):
        sel = (codes & full[j]) == need[j]
        if sel.any():
            parts.append(codes[sel] ^ full[j])
    if not parts:
        return np.empty(0, dtype=np.uint64)
    return np.concatenate(parts)


def descendants_codes(
    codes: np.ndarray,
    geom: BoardGeometry,
    reduction: str = REDUCED,
    config: PartitionConfig | None = None,
) -> np.ndarray:
    """Unique successors of every member of ``codes`` under all legal jumps,
    canonicalized first when ``reduction`` is ``reduced``."""
    config = config or PartitionConfig()
    dedup = PartitionedDedup(config)
    step = config.chunk_rows
    for lo in range(0, codes.size, step):
        succ = expand_chunk(codes[lo : lo + step], geom)
        if reduction == REDUCED and succ.size:
            succ = geom.mincode_array(succ)
        dedup.add(succ)
    return dedup.finalize()


def descendants(
    layer: LayerSet, geom: BoardGeometry, config: PartitionConfig | None = None
) -> LayerSet:
    codes = descendants_codes(layer.codes, geom, layer.reduction, config)
    return LayerSet(layer.role, layer.n - 1, codes, layer.reduction, layer.kind)


def complement_image(
    codes: np.ndarray, geom: BoardGeometry, reduction: str
) -> np.ndarray:
    """The set of complemented positions, in the same reduction mode.

    For reduced sets the class representative of a complement is the board
    constant minus the class maxcode.
    """
    full = np.uint64(geom.full_code)
    if reduction == RAW:
        return (full - codes)[::-1].copy()
    return np.sort(full - geom.maxcode_array(codes), kind="stable")


def intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.intersect1d(a, b, assume_unique=True)


def _report(progress, role: str, n: int, count: int, t0: float) -> None:
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss  # KiB on Linux
    msg = f"{role}_{n}: {count:,} codes in {time.monotonic() - t0:.2f}s (peak rss {peak >> 10} MiB)"
    log.info(msg)
    if progress is not None:
        progress(role, n, count, time.monotonic() - t0)


def forward_layers(
    geom: BoardGeometry,
    start_codes,
    down_to: int = 1,
    reduction: str = REDUCED,
    config: PartitionConfig | None = None,
    progress=None,
) -> dict[int, LayerSet]:
    """F layers from the one-peg-missing start set down to ``down_to`` pegs."""
    config = config or PartitionConfig()
    codes = np.unique(as_code_array(start_codes))
    n = int(popcount_array(codes[:1])[0]) if codes.size else geom.N - 1
    layers = {n: LayerSet("F", n, codes, reduction, geom.kind)}
    while n > down_to:
        t0 = time.monotonic()
        codes = descendants_codes(codes, geom, reduction, config)
        n -= 1
        layers[n] = LayerSet("F", n, codes, reduction, geom.kind)
        _report(progress, "F", n, codes.size, t0)
    return layers


def backward_layers(
    geom: BoardGeometry,
    finish_codes,
    up_to: int,
    reduction: str = REDUCED,
    config: PartitionConfig | None = None,
    progress=None,
) -> dict[int, LayerSet]:
    """B layers grown from the one-peg finish set by playing backwards:
    B_n is the complement image of the descendants of the complemented
    previous layer, and contains every position reducible to a finish."""
    config = config or PartitionConfig()
    codes = np.unique(as_code_array(finish_codes))
    if reduction == REDUCED:
        codes = np.unique(geom.mincode_array(codes))
    layers = {1: LayerSet("B", 1, codes, reduction, geom.kind)}
    for n in range(2, up_to + 1):
        t0 = time.monotonic()
        grown = descendants_codes(
            complement_image(codes, geom, reduction), geom, reduction, config
        )
        codes = complement_image(grown, geom, reduction)
        layers[n] = LayerSet("B", n, codes, reduction, geom.kind)
        _report(progress, "B", n, codes.size, t0)
    return layers


@dataclass
class WinningResult:
    """Winning layers of one problem, stored only up to the middle layer
    when the start and finish sets are complements of one another."""

    kind: str
    reduction: str
    stored: dict[int, LayerSet]
    f_counts: dict[int, int]
    complement_pair: bool
    w_counts: dict[int, int] = field(default_factory=dict)
    f_layers: dict[int, LayerSet] | None = None

    def __post_init__(self) -> None:
        if not self.w_counts:
            self.w_counts = {n: l.count for n, l in self.stored.items()}

    @property
    def solvable(self) -> bool:
        return all(c > 0 for c in self.w_counts.values()) and bool(self.w_counts)

    def w_layer(self, n: int, geom: BoardGeometry) -> LayerSet:
        """Materialize W_n, complementing the stored mirror layer if needed."""
        if n in self.stored:
            return self.stored[n]
        mirror = geom.N - n
        if not self.complement_pair or mirror not in self.stored:
            raise KeyError(f"W_{n} is not available")
        codes = complement_image(self.stored[mirror].codes, geom, self.reduction)
        return LayerSet("W", n, codes, self.reduction, self.kind)


def winning_layers(
    geom: BoardGeometry,
    start_codes,
    finish_codes=None,
    *,
    complement_pair: bool = True,
    meet: int | None = None,
    reduction: str = REDUCED,
    config: PartitionConfig | None = None,
    keep_forward: bool = False,
    progress=None,
) -> WinningResult:
    """Winning layers W_n: positions that occur in some solution.

    With ``complement_pair`` the finish set is implicitly the complement
    image of the start set; forward layers are computed all the way down and
    W_n for n up to floor(N/2) is the intersection of F_n with the
    complement image of F_(N-n).  Upper layers are complement mirrors.

    Otherwise forward and backward layers meet at ``meet`` (default
    floor(N/2)) and the remaining layers are grown from the meet: downward
    as descendants intersected with B_n, upward as F_n intersected with the
    complement image of the descendants of the complemented layer below.
    An unsolvable problem yields empty layers throughout.
    """
    config = config or PartitionConfig()
    N = geom.N
    half = N // 2

    if complement_pair:
        f = forward_layers(geom, start_codes, 1, reduction, config, progress)
        f_counts = {n: l.count for n, l in f.items()}
        stored = {}
        for n in range(1, half + 1):
            codes = intersect(
                f[n].codes, complement_image(f[N - n].codes, geom, reduction)
            )
            stored[n] = LayerSet("W", n, codes, reduction, geom.kind)
        w_counts = {n: l.count for n, l in stored.items()}
        for n in range(half + 1, N):
            w_counts[n] = w_counts[N - n]
        return WinningResult(
            kind=geom.kind,
            reduction=reduction,
            stored=stored,
            f_counts=f_counts,
            complement_pair=True,
            w_counts=w_counts,
            f_layers=f if keep_forward else None,
        )

    if finish_codes is None:
        raise ValueError("finish_codes required when start/finish are not complements")
    k = meet if meet is not None else half
    if not 1 <= k <= N - 1:
        raise ValueError("meet layer out of range")
    f = forward_layers(geom, start_codes, k, reduction, config, progress)
    b = backward_layers(geom, finish_codes, k, reduction, config, progress)
    stored: dict[int, LayerSet] = {}
    stored[k] = LayerSet(
        "W", k, intersect(f[k].codes, b[k].codes), reduction, geom.kind
    )
    for n in range(k - 1, 0, -1):
        grown = descendants_codes(stored[n + 1].codes, geom, reduction, config)
        stored[n] = LayerSet("W", n, intersect(grown, b[n].codes), reduction, geom.kind)
    for n in range(k + 1, N):
        grown = complement_image(
            descendants_codes(
                complement_image(stored[n - 1].codes, geom, reduction),
                geom,
                reduction,
                config,
            ),
            geom,
            reduction,
        )
        stored[n] = LayerSet("W", n, intersect(f[n].codes, grown), reduction, geom.kind)
    f_counts = {n: l.count for n, l in f.items()}
    return WinningResult(
        kind=geom.kind,
        reduction=reduction,
        stored=stored,
        f_counts=f_counts,
        complement_pair=False,
        f_layers=f if keep_forward else None,
    )


def losing_layers(
    result: WinningResult,
    geom: BoardGeometry,
    config: PartitionConfig | None = None,
) -> dict[int, LayerSet]:
    """L_n: positions one bad jump away, i.e. descendants of the winning
    layer above that are not themselves winning."""
    config = config or PartitionConfig()
    out: dict[int, LayerSet] = {}
    for n in range(1, geom.N - 1):
        above = result.w_layer(n + 1, geom)
        grown = descendants_codes(above.codes, geom, result.reduction, config)
        codes = np.setdiff1d(grown, result.w_layer(n, geom).codes, assume_unique=True)
        out[n] = LayerSet("L", n, codes, result.reduction, geom.kind)
    out[geom.N - 1] = LayerSet(
        "L", geom.N - 1, np.empty(0, dtype=np.uint64), result.reduction, geom.kind
    )
    return out
