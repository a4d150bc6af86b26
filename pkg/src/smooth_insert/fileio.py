"""File formats: field JSON/CSV, mask PGM/JSON, atomic writes.

Field JSON:
    {"domain": {"kind": "box", "lower": [...], "upper": [...]}
               | {"kind": "ball", "center": [...], "radius": R},
     "shape": [...], "values": [...], "mask": [...]?}
with ``values`` (and optional ``mask``) flat in row-major order.

CSV carries columns (y, f) for n=1 and (x, y, f) for n=2, rows in
row-major sample order (first axis outer).

Masks are PGM-style ASCII rasters (P2, maxval 1, n<=2) or JSON index
lists {"domain": ..., "shape": [...], "indices": [[i, j], ...]}.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import InputError
from .field import Ball, Box, ScalarField


def atomic_write_text(path, text):
    """Write a file via temp + rename so partial outputs never appear."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj, path):
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=1) + "\n")


def domain_to_json(domain):
    if domain.kind == "box":
        return {"kind": "box", "lower": domain.lower.tolist(), "upper": domain.upper.tolist()}
    return {"kind": "ball", "center": domain.center.tolist(), "radius": domain.radius}


def domain_from_json(obj):
    kind = obj.get("kind")
    if kind == "box":
        return Box(obj["lower"], obj["upper"])
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    raise InputError(f"unknown domain kind {kind!r}")


def field_to_json(field):
    obj = {
        "domain": domain_to_json(field.domain),
        "shape": list(field.shape),
        "values": field.values.ravel().tolist(),
    }
    if not field.mask.all():
        obj["mask"] = field.mask.ravel().astype(int).tolist()
    return obj


def field_from_json(obj):
    domain = domain_from_json(obj["domain"])
    shape = obj["shape"]
    mask = obj.get("mask")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
    return ScalarField(domain, shape, np.asarray(obj["values"], dtype=float), mask=mask)


def save_field(field, path):
    dump_json(field_to_json(field), path)


def load_field(path):
    with open(path) as fh:
        return field_from_json(json.load(fh))


def field_to_csv(field):
    """CSV text for n=1 (y,f) or n=2 (x,y,f); invalid samples are omitted."""
    if field.dim == 1:
        header = "y,f"
    elif field.dim == 2:
        header = "x,y,f"
    else:
        raise InputError("CSV export supports n=1 and n=2 only")
    pts = field.points()
    vals = field.values.ravel()
    keep = field.mask.ravel()
    lines = [header]
    for p, v, ok in zip(pts, vals, keep):
        if ok:
            lines.append(",".join(repr(float(c)) for c in p) + f",{float(v)!r}")
    return "\n".join(lines) + "\n"


def save_field_csv(field, path):
    atomic_write_text(path, field_to_csv(field))


def load_field_csv(path, domain, shape):
    """Read (y,f) / (x,y,f) rows back onto the given grid.

    Rows must sit on grid points (nearest-sample snap within a tenth of a
    cell); samples without rows are masked invalid.
    """
    text = open(path).read().strip().splitlines()
    header = text[0].strip().lower().split(",")
    dim = len(header) - 1
    if dim != domain.dim:
        raise InputError(f"CSV has {dim} coordinate columns, domain has {domain.dim}")
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    values = np.zeros(shape)
    seen = np.zeros(shape, dtype=bool)
    probe = ScalarField(domain, shape, values, mask=None, _validate=False)
    lower, _ = domain.bounds()
    for line in text[1:]:
        cols = [float(c) for c in line.split(",")]
        p = np.array(cols[:dim])
        idx = np.round((p - lower) / probe.spacing).astype(int)
        if np.any(np.abs(lower + idx * probe.spacing - p) > 0.1 * probe.spacing):
            raise InputError(f"CSV point {p.tolist()} is not on the grid")
        values[tuple(idx)] = cols[-1]
        seen[tuple(idx)] = True
    return ScalarField(domain, shape, values, mask=seen & probe.mask)


def mask_to_pgm(mask_array):
    """PGM-style ASCII raster (P2, maxval 1) for a 1-d or 2-d boolean array."""
    arr = np.asarray(mask_array, dtype=int)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InputError("PGM export supports 1-d and 2-d masks only")
    lines = ["P2", f"{arr.shape[1]} {arr.shape[0]}", "1"]
    lines += [" ".join(str(v) for v in row) for row in arr]
    return "\n".join(lines) + "\n"


def pgm_to_mask(text):
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise InputError("expected ASCII PGM (P2) mask")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4 : 4 + w * h]])
    if data.size != w * h:
        raise InputError("PGM data does not match header dimensions")
    if maxval < 1:
        raise InputError("PGM maxval must be >= 1")
    arr = (data.reshape(h, w) > 0)
    return arr[0] if h == 1 else arr


def save_mask_pgm(mask_array, path):
    atomic_write_text(path, mask_to_pgm(mask_array))


def load_mask_pgm(path):
    return pgm_to_mask(open(path).read())


def mask_to_json(domain, shape, mask_array):
    idx = np.argwhere(np.asarray(mask_array, dtype=bool))
    return {
        "domain": domain_to_json(domain),
        "shape": list(int(s) for s in np.atleast_1d(shape)),
        "indices": idx.tolist(),
    }


def mask_from_json(obj):
    domain = domain_from_json(obj["domain"])
    shape = tuple(obj["shape"])
    arr = np.zeros(shape, dtype=bool)
    for idx in obj["indices"]:
        arr[tuple(idx)] = True
    return domain, shape, arr


def save_mask_json(domain, shape, mask_array, path):
    dump_json(mask_to_json(domain, shape, mask_array), path)


def load_mask_json(path):
    with open(path) as fh:
        return mask_from_json(json.load(fh))
