"""On-disk formats: text type databases, binary layer files, JSON bundles.

Text databases (``<Stem>Winning.txt``) carry two versions of a type's
winning sets: the plain symmetry-reduced sets for finish-anywhere lookups,
and the indexed version whose runs are grouped by complement-problem bitmask
with an offset table per peg count.  Every set is sorted by index (when
present), then by code.  Serialization is byte-stable.

Binary layer files (``<Stem>Winning_<n>.bin``) hold one sorted layer as
little-endian unsigned 4-byte integers behind a small magic header.  Boards
with more than 32 holes store two words per code (low word first), except
the 33-hole cross whose stored winning codes all fit one word.

JSON bundles (``<board>_type<k>.json`` / ``<board>_problem<t>_<i>.json``)
package geometry, problem metadata and the indexed code runs for the web
UI; oversized layers are split into lazily loaded slice files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from pegsol.boards import BoardGeometry
from pegsol.posclass import ProblemSpec, ProblemType, enumerate_types
from pegsol.windb import ComplementDB, IndexedWinningDB, TypeDatabase

TEXT_MAGIC = "pegsol-winning 1"
BIN_MAGIC = b"PSW1"
BUNDLE_SCHEMA = "pegsol-bundle-1"
SLICE_SCHEMA = "pegsol-bundle-slice-1"
INLINE_LAYER_LIMIT = 20000

_CODES_PER_LINE = 12


class FormatError(ValueError):
    """Malformed database file; message carries the offending line."""


# ----------------------------------------------------------------------
# text format


def _write_codes(lines: list[str], codes: np.ndarray) -> None:
    values = codes.tolist()
    for lo in range(0, len(values), _CODES_PER_LINE):
        lines.append(" ".join(str(v) for v in values[lo : lo + _CODES_PER_LINE]))


def serialize_text(db: TypeDatabase, geom: BoardGeometry) -> str:
    idb = db.indexed
    stored = sorted(db.plain)
    lines = [
        TEXT_MAGIC,
        f"board {db.kind}",
        f"holes {geom.N}",
        f"type {db.type_number}",
        f"problems {idb.p}",
        f"degen {idb.degen}",
        f"topindex {idb.topindex}",
        f"stored {len(stored)}",
        "section plain",
    ]
    for n in stored:
        lines.append(f"layer {n} {db.plain[n].size}")
        _write_codes(lines, db.plain[n])
    lines.append("section indexed")
    for n in stored:
        lines.append(f"layer {n} {idb.codes[n].size}")
        lines.append("ends " + " ".join(str(int(e)) for e in idb.ends[n]))
        _write_codes(lines, idb.codes[n])
    lines.append("end")
    return "\n".join(lines) + "\n"


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.i = 0

    def next(self) -> str:
        while self.i < len(self.lines):
            line = self.lines[self.i]
            self.i += 1
            if line.strip():
                return line.strip()
        raise FormatError(f"line {self.i + 1}: unexpected end of file")

    def error(self, msg: str) -> FormatError:
        return FormatError(f"line {self.i}: {msg}")


def _read_codes(reader: _LineReader, count: int) -> np.ndarray:
    values: list[int] = []
    while len(values) < count:
        line = reader.next()
        try:
            values.extend(int(tok) for tok in line.split())
        except ValueError:
            raise reader.error(f"expected integer codes, got {line!r}") from None
    if len(values) != count:
        raise reader.error(f"expected {count} codes, got {len(values)}")
    return np.array(values, dtype=np.uint64)


def _expect_kv(reader: _LineReader, key: str) -> str:
    line = reader.next()
    parts = line.split(maxsplit=1)
    if len(parts) != 2 or parts[0] != key:
        raise reader.error(f"expected '{key} ...', got {line!r}")
    return parts[1]


def _expect_int_kv(reader: _LineReader, key: str) -> int:
    value = _expect_kv(reader, key)
    try:
        return int(value)
    except ValueError:
        raise reader.error(f"expected an integer for {key!r}, got {value!r}") from None


def _layer_header(reader: _LineReader) -> tuple[int, int]:
    header = reader.next().split()
    try:
        if len(header) != 3 or header[0] != "layer":
            raise ValueError
        return int(header[1]), int(header[2])
    except ValueError:
        raise reader.error("expected 'layer <n> <count>'") from None


def parse_text(text: str, geom: BoardGeometry) -> TypeDatabase:
    reader = _LineReader(text)
    if reader.next() != TEXT_MAGIC:
        raise reader.error(f"not a {TEXT_MAGIC!r} file")
    board = _expect_kv(reader, "board")
    if board != geom.kind:
        raise reader.error(f"file is for board {board!r}, expected {geom.kind!r}")
    holes = _expect_int_kv(reader, "holes")
    if holes != geom.N:
        raise reader.error(f"hole count {holes} does not match {geom.kind}")
    type_number = _expect_int_kv(reader, "type")
    p = _expect_int_kv(reader, "problems")
    degen = _expect_int_kv(reader, "degen")
    topindex = _expect_int_kv(reader, "topindex")
    if topindex != 1 << p:
        raise reader.error(f"topindex {topindex} is not 2^{p}")
    stored = _expect_int_kv(reader, "stored")
    if reader.next() != "section plain":
        raise reader.error("expected 'section plain'")
    plain: dict[int, np.ndarray] = {}
    for _ in range(stored):
        n, count = _layer_header(reader)
        plain[n] = _read_codes(reader, count)
    if reader.next() != "section indexed":
        raise reader.error("expected 'section indexed'")
    codes: dict[int, np.ndarray] = {}
    ends: dict[int, np.ndarray] = {}
    for _ in range(stored):
        n, count = _layer_header(reader)
        ends_line = reader.next().split()
        if ends_line[0] != "ends" or len(ends_line) != topindex + 1:
            raise reader.error(f"expected 'ends' with {topindex} offsets")
        ends[n] = np.array([int(v) for v in ends_line[1:]], dtype=np.int64)
        if int(ends[n][-1]) != count:
            raise reader.error("last offset does not match the layer count")
        codes[n] = _read_codes(reader, count)
    if reader.next() != "end":
        raise reader.error("expected trailing 'end'")
    ptype = _type_of(geom, type_number)
    if ptype is not None and (len(ptype.problems) != p or ptype.degen != degen):
        raise FormatError(
            f"file claims {p} problems / {degen} degenerate, geometry says "
            f"{len(ptype.problems)} / {ptype.degen}"
        )
    indexed = IndexedWinningDB(
        kind=geom.kind,
        type_number=type_number,
        p=p,
        degen=degen,
        codes=codes,
        ends=ends,
        problems=ptype.problems if ptype is not None else (),
    )
    return TypeDatabase(
        kind=geom.kind, type_number=type_number, plain=plain, indexed=indexed
    )


def _type_of(geom: BoardGeometry, type_number: int) -> ProblemType | None:
    for t in enumerate_types(geom.kind):
        if t.number == type_number:
            return t
    return None


def text_db_path(out_dir: Path, geom: BoardGeometry, type_number: int) -> Path:
    suffix = "" if type_number == 1 else f"_type{type_number}"
    return Path(out_dir) / f"{geom.file_stem}Winning{suffix}.txt"


def save_type_database(db: TypeDatabase, geom: BoardGeometry, out_dir: Path) -> Path:
    path = text_db_path(out_dir, geom, db.type_number)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_text(db, geom))
    return path


def load_type_database(geom: BoardGeometry, out_dir: Path, type_number: int) -> TypeDatabase:
    path = text_db_path(out_dir, geom, type_number)
    if not path.exists():
        raise FileNotFoundError(f"missing database file {path}")
    return parse_text(path.read_text(), geom)


# ----------------------------------------------------------------------
# binary format


def binary_words(geom: BoardGeometry) -> int:
    # the 33-hole cross stores reduced winning codes, which all fit 32 bits
    if geom.N <= 32 or geom.kind == "english33":
        return 1
    return 2


def serialize_binary(codes: np.ndarray, n: int, geom: BoardGeometry) -> bytes:
    words = binary_words(geom)
    if words == 1 and codes.size and int(codes.max()) >> 32:
        raise ValueError(
            f"layer {n} holds a code above 32 bits; {geom.kind} uses the 4-byte format"
        )
    header = BIN_MAGIC + struct.pack("<III", words, n, codes.size)
    if words == 1:
        return header + codes.astype("<u4").tobytes()
    lo = (codes & np.uint64(0xFFFFFFFF)).astype("<u4")
    hi = (codes >> np.uint64(32)).astype("<u4")
    inter = np.empty(codes.size * 2, dtype="<u4")
    inter[0::2] = lo
    inter[1::2] = hi
    return header + inter.tobytes()


def parse_binary(blob: bytes, geom: BoardGeometry) -> tuple[int, np.ndarray]:
    if blob[:4] != BIN_MAGIC:
        raise FormatError("not a pegsol binary layer file")
    words, n, count = struct.unpack("<III", blob[4:16])
    payload = np.frombuffer(blob[16:], dtype="<u4")
    if payload.size != count * words:
        raise FormatError(f"layer {n}: expected {count * words} words, got {payload.size}")
    if words == 1:
        codes = payload.astype(np.uint64)
    else:
        codes = payload[0::2].astype(np.uint64) | (
            payload[1::2].astype(np.uint64) << np.uint64(32)
        )
    return n, codes


def binary_layer_path(out_dir: Path, geom: BoardGeometry, n: int) -> Path:
    return Path(out_dir) / f"{geom.file_stem}Winning_{n}.bin"


def save_binary_layers(
    layers: dict[int, np.ndarray], geom: BoardGeometry, out_dir: Path
) -> list[Path]:
    out = []
    for n in sorted(layers):
        path = binary_layer_path(out_dir, geom, n)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(serialize_binary(layers[n], n, geom))
        out.append(path)
    return out


def load_binary_layers(geom: BoardGeometry, out_dir: Path) -> dict[int, np.ndarray]:
    layers = {}
    for n in range(1, geom.N // 2 + 1):
        path = binary_layer_path(out_dir, geom, n)
        if not path.exists():
            raise FileNotFoundError(f"missing database file {path}")
        read_n, codes = parse_binary(path.read_bytes(), geom)
        if read_n != n:
            raise FormatError(f"{path} claims layer {read_n}")
        layers[n] = codes
    return layers


# ----------------------------------------------------------------------
# build metadata sidecar


def meta_path(out_dir: Path, geom: BoardGeometry) -> Path:
    return Path(out_dir) / f"{geom.file_stem}Winning_meta.json"


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def save_meta(meta: dict, geom: BoardGeometry, out_dir: Path) -> Path:
    path = meta_path(out_dir, geom)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump_json({"schema": "pegsol-meta-1", **meta}))
    return path


def load_meta(geom: BoardGeometry, out_dir: Path) -> dict:
    path = meta_path(out_dir, geom)
    if not path.exists():
        raise FileNotFoundError(f"missing metadata file {path}")
    return json.loads(path.read_text())


# ----------------------------------------------------------------------
# JSON bundles for the web UI


def _geometry_payload(geom: BoardGeometry) -> dict:
    return {
        "board": geom.kind,
        "lattice": geom.lattice,
        "span": geom.span,
        "holeCount": geom.N,
        "holes": [list(c) for c in geom.holes],
        "jumps": [list(j) for j in geom.jumps],
        "symmetries": [list(p) for p in geom.symmetries],
    }


def _problem_payload(problem: ProblemSpec, geom: BoardGeometry, solvable: bool) -> dict:
    return {
        "number": problem.number,
        "startHole": problem.start_hole,
        "coords": list(geom.holes[problem.start_hole]),
        "orbit": list(problem.orbit),
        "degenerate": problem.degenerate,
        "solvable": solvable,
    }


def _layer_payloads(
    codes: dict[int, np.ndarray],
    ends: dict[int, np.ndarray],
    base_name: str,
    out_dir: Path | None,
) -> tuple[dict, dict]:
    layers: dict[str, dict] = {}
    layer_files: dict[str, str] = {}
    for n in sorted(codes):
        payload = {
            "ends": [int(e) for e in ends[n]],
            "codes": [int(c) for c in codes[n]],
        }
        if out_dir is not None and codes[n].size > INLINE_LAYER_LIMIT:
            name = f"{base_name}_W{n}.json"
            slice_payload = {"schema": SLICE_SCHEMA, "n": n, **payload}
            (Path(out_dir) / name).write_text(_dump_json(slice_payload))
            layer_files[str(n)] = name
        else:
            layers[str(n)] = payload
    return layers, layer_files


def export_type_bundle(
    db: TypeDatabase,
    geom: BoardGeometry,
    out_dir: Path,
) -> Path:
    """Write ``<board>_type<k>.json`` (plus slice files for huge layers)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    idb = db.indexed
    base = f"{db.kind}_type{db.type_number}"
    solvable = {
        pr.number: any(
            _problem_run_size(idb, n, pr.number) > 0 for n in idb.codes
        )
        for pr in idb.problems
    }
    layers, layer_files = _layer_payloads(idb.codes, idb.ends, base, out_dir)
    bundle = {
        "schema": BUNDLE_SCHEMA,
        **_geometry_payload(geom),
        "typeNumber": db.type_number,
        "problems": [
            _problem_payload(pr, geom, solvable[pr.number]) for pr in idb.problems
        ],
        "p": idb.p,
        "degen": idb.degen,
        "topindex": idb.topindex,
        "storedMax": max(idb.codes) if idb.codes else 0,
        "finishAnywhere": True,
        "layers": layers,
        "layerFiles": layer_files,
    }
    path = out_dir / f"{base}.json"
    path.write_text(_dump_json(bundle))
    return path


def _problem_run_size(idb: IndexedWinningDB, n: int, number: int) -> int:
    bit = 1 << (number - 1)
    return sum(idb.run(n, j).size for j in range(1, idb.topindex) if j & bit)


def export_problem_bundle(
    cdb: ComplementDB,
    geom: BoardGeometry,
    out_dir: Path,
) -> Path:
    """Write a single-problem bundle shaped like a one-problem indexed
    store: run 0 empty, run 1 the problem's winning codes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pr = cdb.problem
    base = f"{cdb.kind}_problem{pr.type_number}_{pr.number}"
    ends = {
        n: np.array([0, arr.size], dtype=np.int64) for n, arr in cdb.layers.items()
    }
    layers, layer_files = _layer_payloads(cdb.layers, ends, base, out_dir)
    bundle = {
        "schema": BUNDLE_SCHEMA,
        **_geometry_payload(geom),
        "typeNumber": pr.type_number,
        "problems": [_problem_payload(pr, geom, cdb.solvable)],
        "p": 1,
        "degen": 1 if pr.degenerate else 0,
        "topindex": 2,
        "storedMax": max(cdb.layers) if cdb.layers else 0,
        "finishAnywhere": False,
        "layers": layers,
        "layerFiles": layer_files,
    }
    path = out_dir / f"{base}.json"
    path.write_text(_dump_json(bundle))
    return path
