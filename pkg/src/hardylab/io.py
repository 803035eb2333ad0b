"""Plain-text mesh files and JSON/CSV result records.

Mesh format (0-based indices, ``flag`` is 1 for Dirichlet vertices)::

    vertices N
    x y flag          (N lines)
    triangles T
    i j k             (T lines)

Blank lines and lines starting with ``#`` are ignored.  ``save_mesh``
records the grading as ``# grading q layers`` so a round trip keeps it.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ParseError
from .geometry import Grading, Mesh, validate_mesh


def save_mesh(mesh: Mesh, path):
    lines = []
    g = mesh.grading
    if g is not None and g.layers is not None:
        lines.append(f"# grading {g.q!r} {g.layers}")
    lines.append(f"vertices {mesh.n_vertices}")
    for (x, y), flag in zip(mesh.vertices.tolist(), mesh.boundary.tolist()):
        lines.append(f"{x!r} {y!r} {int(flag)}")
    lines.append(f"triangles {mesh.n_triangles}")
    for i, j, k in mesh.triangles.tolist():
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def _content_lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield number, line


def _header(item, name):
    number, line = item
    parts = line.split()
    if len(parts) != 2 or parts[0] != name:
        raise ParseError(f"expected '{name} <count>'", number)
    try:
        count = int(parts[1])
    except ValueError:
        raise ParseError(f"bad {name} count {parts[1]!r}", number) from None
    if count < 0:
        raise ParseError(f"negative {name} count", number)
    return count


def load_mesh(path) -> Mesh:
    """Read a mesh file and re-validate every mesh invariant.

    Raises
    ------
    ParseError
        Malformed lines, wrong counts or indices outside the vertex range,
        with the offending line number.
    InvariantViolation
        A well-formed file whose mesh breaks an invariant, e.g. a
        zero-area triangle.
    """
    text = Path(path).read_text()
    grading = Grading(0.5, 0)
    body = []
    for number, line in _content_lines(text):
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "grading":
                try:
                    grading = Grading(float(parts[1]), int(parts[2]))
                except ValueError:
                    raise ParseError("bad grading comment", number) from None
            continue
        body.append((number, line))
    it = iter(body)
    try:
        nv = _header(next(it), "vertices")
        vertices, flags = [], []
        for _ in range(nv):
            number, line = next(it)
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'x y flag'", number)
            try:
                x, y = float(parts[0]), float(parts[1])
                flag = int(parts[2])
            except ValueError:
                raise ParseError("non-numeric vertex entry", number) from None
            if flag not in (0, 1) or not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError("flag must be 0 or 1 and coordinates finite", number)
            vertices.append((x, y))
            flags.append(bool(flag))
        nt = _header(next(it), "triangles")
        triangles = []
        for _ in range(nt):
            number, line = next(it)
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'i j k'", number)
            try:
                tri = [int(p) for p in parts]
            except ValueError:
                raise ParseError("non-integer vertex index", number) from None
            if min(tri) < 0 or max(tri) >= nv:
                raise ParseError(f"vertex index out of range 0..{nv - 1}", number)
            triangles.append(tri)
    except StopIteration:
        raise ParseError("unexpected end of file", len(text.splitlines())) from None
    extra = next(it, None)
    if extra is not None:
        raise ParseError("trailing content after the last triangle", extra[0])
    v = np.array(vertices, dtype=float).reshape(-1, 2)
    at0 = np.flatnonzero((v[:, 0] == 0) & (v[:, 1] == 0))
    origin = int(at0[0]) if len(at0) else None
    mesh = Mesh(v, np.array(triangles, dtype=np.int64).reshape(-1, 3), flags, origin, grading)
    try:
        return validate_mesh(mesh, check_domain=False)
    except InvariantViolation as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def _plain(value):
    """JSON-ready copy: arrays to lists, non-finite floats to null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps_record(record) -> str:
    return json.dumps(_plain(record), indent=2, allow_nan=False) + "\n"


def write_json(path, record):
    Path(path).write_text(dumps_record(record))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
