"""Readers and writers for the on-disk measure and plan formats.

* DiscreteMeasure: JSON ``{"points": [[...], ...], "weights": [...]}``.
* GridDensity: CSV whose first line is ``rows,cols,extent``, second line
  ``R,C,<lo0 hi0 [lo1 hi1]>`` and then ``R`` rows of ``C`` values (row major).
  A grid with one row or one column is read as 1D.
* GridDensity: binary PGM (P5, maxval up to 65535); pixel values are taken
  as relative density and rescaled to unit mass on load.
* MeshDensity: OFF mesh plus a sidecar CSV with one density per vertex.
* TransportPlan: CSV triples ``i,j,mass``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, GridDensity, MeasureError, MeshDensity, TransportPlan, normalize

__all__ = [
    "read_discrete",
    "write_discrete",
    "read_grid_csv",
    "write_grid_csv",
    "read_pgm",
    "write_pgm",
    "read_off",
    "write_off",
    "read_mesh_density",
    "write_plan_csv",
    "read_plan_csv",
    "load_measure",
]


def read_discrete(path) -> DiscreteMeasure:
    with open(path) as fh:
        data = json.load(fh)
    try:
        return DiscreteMeasure(data["points"], data["weights"])
    except KeyError as exc:
        raise MeasureError(f"{path}: missing key {exc.args[0]!r}") from None


def write_discrete(path, measure: DiscreteMeasure) -> None:
    pts = measure.points
    payload = {
        "points": pts.tolist(),
        "weights": measure.weights.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def read_grid_csv(path) -> GridDensity:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 3 or [c.strip() for c in rows[0]] != ["rows", "cols", "extent"]:
        raise MeasureError(f"{path}: expected header 'rows,cols,extent'")
    nr, nc = int(rows[1][0]), int(rows[1][1])
    extent = [float(x) for x in rows[1][2].split()]
    values = np.array([[float(x) for x in r] for r in rows[2:]])
    if values.shape != (nr, nc):
        raise MeasureError(f"{path}: declared {nr}x{nc} grid but found {values.shape}")
    if nr == 1 or nc == 1:
        values = values.ravel()
    return GridDensity(values, np.reshape(extent, (-1, 2)))


def write_grid_csv(path, grid: GridDensity) -> None:
    vals = grid.values if grid.dim == 2 else grid.values[:, None]
    extent = " ".join(repr(float(x)) for ax in grid.extent for x in ax)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rows", "cols", "extent"])
        w.writerow([vals.shape[0], vals.shape[1], extent])
        for row in vals:
            w.writerow([repr(float(x)) for x in row])


def _pgm_tokens(data: bytes):
    """Yield header tokens and the offset just past the last one."""
    pos, tokens = 0, []
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_pgm(path, extent=None) -> GridDensity:
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data)
    if tokens[0] != "P5":
        raise MeasureError(f"{path}: only binary PGM (P5) is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    if not 0 < maxval <= 65535:
        raise MeasureError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    img = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    img = img.reshape(height, width).astype(float)
    if height == 1 or width == 1:
        img = img.ravel()
    return normalize(GridDensity(img, extent))


def write_pgm(path, grid: GridDensity, maxval: int = 65535) -> None:
    vals = grid.values if grid.dim == 2 else grid.values[None, :]
    top = vals.max()
    scaled = np.zeros(vals.shape) if top <= 0 else vals / top * maxval
    pix = np.rint(scaled).astype(">u2" if maxval > 255 else "u1")
    header = f"P5\n{vals.shape[1]} {vals.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + pix.tobytes())


def read_off(path):
    with open(path) as fh:
        lines = [ln.split("#")[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("OFF"):
        raise MeasureError(f"{path}: not an OFF file")
    head = lines[0][3:].split() or lines.pop(1).split()
    nv, nf = int(head[0]), int(head[1])
    body = lines[1:]
    V = np.array([[float(x) for x in body[i].split()[:3]] for i in range(nv)])
    faces = []
    for ln in body[nv : nv + nf]:
        idx = [int(x) for x in ln.split()]
        n = idx[0]
        poly = idx[1 : 1 + n]
        for k in range(1, n - 1):
            faces.append((poly[0], poly[k], poly[k + 1]))
    return V, np.array(faces, dtype=np.int64).reshape(-1, 3)


def write_off(path, vertices, triangles) -> None:
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(vertices)} {len(triangles)} 0\n")
        for v in vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for t in triangles:
            fh.write("3 " + " ".join(str(int(i)) for i in t) + "\n")


def read_mesh_density(off_path, density_path=None) -> MeshDensity:
    """Mesh plus per-vertex densities; the sidecar defaults to ``<stem>.csv``."""
    V, T = read_off(off_path)
    if density_path is None:
        density_path = Path(off_path).with_suffix(".csv")
    dens = np.loadtxt(density_path, delimiter=",", ndmin=1)
    return MeshDensity(V, T, dens)


def write_plan_csv(path, plan: TransportPlan, threshold: float = 0.0) -> None:
    i, j, m = plan.triples(threshold)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for a, b, c in zip(i, j, m):
            w.writerow([int(a), int(b), repr(float(c))])


def read_plan_csv(path, shape) -> np.ndarray:
    T = np.zeros(shape)
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row:
                T[int(row[0]), int(row[1])] += float(row[2])
    return T


def load_measure(path):
    """Dispatch on file suffix: ``.json``, ``.csv``, ``.pgm`` or ``.off``."""
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return read_discrete(path)
    if suffix == ".csv":
        return read_grid_csv(path)
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".off":
        return read_mesh_density(path)
    raise MeasureError(f"{path}: unrecognised file type {suffix!r}")
