"""File artifacts: 16-bit binary PGM with JSON sidecars, RFC-4180 CSV,
NDJSON and run manifests with content hashes.

All writers are deterministic: no timestamps, sorted JSON keys, fixed
float formatting, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json

import numpy as np


def _to_image(values):
    """Grid values to a 2D raster: x to columns, y to rows (top = max y).
    4D grids tile as an outer (y1, x1) mosaic of inner (y2, x2) panes."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 2:
        return v.T[::-1]
    if v.ndim == 4:
        r = v.shape[0]
        img = v.transpose(1, 3, 0, 2)[::-1, ::-1]
        return img.reshape(r * r, r * r)
    raise ValueError(f"cannot rasterize a {v.ndim}-dimensional grid")


def write_pgm(path, values, sidecar=None):
    """16-bit big-endian binary PGM (P5) with min/max scaling recorded in
    a JSON sidecar next to the image."""
    img = _to_image(values)
    finite = img[np.isfinite(img)]
    vmin = float(np.min(finite)) if finite.size else 0.0
    vmax = float(np.max(finite)) if finite.size else 1.0
    span = vmax - vmin if vmax > vmin else 1.0
    scaled = np.zeros(img.shape, dtype=np.uint16)
    ok = np.isfinite(img)
    scaled[ok] = np.clip((img[ok] - vmin) / span * 65535.0, 0, 65535).astype(np.uint16)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(scaled.astype(">u2").tobytes())
    doc = {"min": vmin, "max": vmax, "gamma": 1.0}
    if sidecar:
        doc.update(sidecar)
    side_path = str(path) + ".json"
    with open(side_path, "w") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")
    return side_path


def write_field_csv(path, box, resolution, values, value_name="value"):
    """Cell-indexed CSV of a grid (one row per cell, headers included)."""
    v = np.asarray(values, dtype=float)
    m = box.m
    idx_names = []
    coord_names = []
    for i in range(1, m + 1):
        idx_names += [f"ix{i}", f"iy{i}"]
        coord_names += [f"re{i}", f"im{i}"]
    header = ",".join(idx_names + coord_names + [value_name])
    idx = np.indices(v.shape).reshape(2 * m, -1)
    axes = box.axes(resolution)
    cols = [a.astype(float) for a in idx]
    for i in range(m):
        cols.append(axes[i][0][idx[2 * i]])
        cols.append(axes[i][1][idx[2 * i + 1]])
    cols.append(v.ravel())
    table = np.column_stack(cols)
    fmt = ["%d"] * (2 * m) + ["%.17g"] * (2 * m + 1)
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=header,
               comments="", newline="\r\n")


def write_cloud_csv(path, points):
    pts = np.asarray(points, dtype=complex).ravel()
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "re", "im"])
        for i, z in enumerate(pts):
            w.writerow([i, f"{z.real:.17g}", f"{z.imag:.17g}"])


def read_cloud_csv(path):
    out = []
    with open(path, newline="") as f:
        r = csv.DictReader(f)
        for row in r:
            out.append(float(row["re"]) + 1j * float(row["im"]))
    return np.array(out, dtype=complex)


def write_ndjson(path, records):
    with open(path, "w") as f:
        for rec in records:
            json.dump(rec, f, sort_keys=True)
            f.write("\n")


def read_ndjson(path):
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def write_json(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f, sort_keys=True, indent=1, default=_json_default)
        f.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config, output_paths):
    """manifest.json: the fully resolved run configuration plus a sha256
    per output file."""
    doc = {
        "config": config,
        "outputs": {str(p): sha256_file(p) for p in output_paths},
    }
    write_json(path, doc)
    return doc
