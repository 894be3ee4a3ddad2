"""File writers: distributions and states as CSV, heatmaps as ASCII PGM (P2).

Floats are written with 17 significant digits so doubles round-trip.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .lattice import Geometry, channel_name
from .state import WalkState

PGM_MAXVAL = 65535
AXES = "xyz"


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def distribution_csv(g: Geometry, probs: np.ndarray) -> str:
    probs = np.asarray(probs).reshape(g.shape)
    lines = [",".join(AXES[: g.dim]) + ",p"]
    for v in g.nodes():
        lines.append(",".join(str(x + 1) for x in v) + "," + fmt(probs[v]))
    return "\n".join(lines) + "\n"


def write_distribution_csv(path, g: Geometry, probs: np.ndarray) -> None:
    Path(path).write_text(distribution_csv(g, probs))


def per_step_path(base, t: int) -> Path:
    base = Path(base)
    return base.with_name(f"{base.stem}_t{t:03d}{base.suffix or '.csv'}")


def state_csv(s: WalkState) -> str:
    g = s.geometry
    lines = [",".join(AXES[: g.dim]) + ",channel,re,im"]
    for v in g.nodes():
        row = s.by_node[g.rank(v)]
        labels = ",".join(str(x + 1) for x in v)
        for c in range(g.num_channels):
            lines.append(f"{labels},{channel_name(c, g.dim)},{fmt(row[c].real)},{fmt(row[c].imag)}")
    return "\n".join(lines) + "\n"


def write_state_csv(path, s: WalkState) -> None:
    Path(path).write_text(state_csv(s))


def heatmap_pixels(g: Geometry, probs: np.ndarray) -> np.ndarray:
    """2D image: D=1 one row; D=2 rows x, columns y; D=3 z-slices side by side."""
    p = np.asarray(probs, dtype=float).reshape(g.shape)
    if g.dim == 1:
        img = p[None, :]
    elif g.dim == 2:
        img = p
    else:
        img = np.concatenate([p[:, :, z] for z in range(g.size)], axis=1)
    peak = img.max()
    if peak <= 0:
        return np.zeros(img.shape, dtype=np.int64)
    return np.rint(img / peak * PGM_MAXVAL).astype(np.int64)


def pgm_text(pixels: np.ndarray) -> str:
    h, w = pixels.shape
    rows = [" ".join(str(int(x)) for x in row) for row in pixels]
    return f"P2\n{w} {h}\n{PGM_MAXVAL}\n" + "\n".join(rows) + "\n"


def write_heatmap(path, g: Geometry, probs: np.ndarray) -> Path:
    """Write the PGM and a sidecar JSON recording the normalization; returns the sidecar path."""
    path = Path(path)
    pixels = heatmap_pixels(g, probs)
    path.write_text(pgm_text(pixels))
    side = path.with_suffix(path.suffix + ".json")
    meta = {
        "max_probability": fmt(np.asarray(probs).max()),
        "maxval": PGM_MAXVAL,
        "scale": "linear, pixel = round(p / max_probability * maxval)",
        "layout": ("single row over x", "rows x, columns y", "rows x, columns z*N + y")[g.dim - 1],
        "dim": g.dim,
        "n": g.size,
    }
    side.write_text(json.dumps(meta, indent=1) + "\n")
    return side


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")
