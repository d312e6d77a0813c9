"""Deterministic CSV/SVG/JSON writers and binary grid snapshots.

Data files never contain timestamps; floats are written with a fixed
12-significant-digit format so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .core import GridSpec
from .errors import FrontspeedError

FLOAT_FMT = ".12g"


class OutputError(FrontspeedError, OSError):
    """A result file could not be written."""


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, FLOAT_FMT)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# SVG

_W, _H, _PAD = 640, 420, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _svg_open(title: str, w=_W, h=_H) -> list[str]:
    return ['<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">',
            f'<rect width="{w}" height="{h}" fill="white"/>',
            f'<text x="{w / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
            f'font-size="15">{escape(title)}</text>']


def _range(vals):
    vals = [v for v in vals if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_plot_svg(series, title="", xlabel="", ylabel="") -> str:
    """series: list of (label, xs, ys)."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x0, x1 = _range(xs_all)
    y0, y1 = _range(ys_all)

    def X(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def Y(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    out = _svg_open(title)
    out.append(f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" '
               'fill="none" stroke="black"/>')
    for v, anchor in ((x0, "start"), (x1, "end")):
        out.append(f'<text x="{X(v):.1f}" y="{_H - _PAD + 16}" text-anchor="{anchor}" '
                   f'font-family="sans-serif" font-size="11">{fmt(round(v, 6))}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{_PAD - 6}" y="{Y(v) + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{fmt(round(v, 6))}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 14}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {_H / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(series):
        pts = [(X(x), Y(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        if not pts:
            continue
        color = _COLORS[k % len(_COLORS)]
        d = " ".join(f"{'M' if i == 0 else 'L'}{px:.2f},{py:.2f}" for i, (px, py) in enumerate(pts))
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 16 + 14 * k}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def polar_plot_svg(curves, title="") -> str:
    """curves: list of (label, angles, radii); closed polygons around the origin."""
    size = 480
    cx = cy = size / 2
    rmax = max((r for _, _, rs in curves for r in rs if math.isfinite(r)), default=1.0) or 1.0
    scale = (size / 2 - 50) / rmax
    out = _svg_open(title, size, size)
    for frac in (0.25, 0.5, 0.75, 1.0):
        out.append(f'<circle cx="{cx}" cy="{cy}" r="{frac * rmax * scale:.2f}" fill="none" '
                   'stroke="#cccccc"/>')
    out.append(f'<text x="{cx + rmax * scale + 4:.1f}" y="{cy - 4}" font-family="sans-serif" '
               f'font-size="11">{fmt(round(rmax, 6))}</text>')
    out.append(f'<line x1="{cx - rmax * scale:.2f}" y1="{cy}" x2="{cx + rmax * scale:.2f}" '
               f'y2="{cy}" stroke="#cccccc"/>')
    out.append(f'<line x1="{cx}" y1="{cy - rmax * scale:.2f}" x2="{cx}" '
               f'y2="{cy + rmax * scale:.2f}" stroke="#cccccc"/>')
    for k, (label, angles, radii) in enumerate(curves):
        pts = [(cx + r * scale * math.cos(a), cy - r * scale * math.sin(a))
               for a, r in zip(angles, radii) if math.isfinite(r)]
        if not pts:
            continue
        color = _COLORS[k % len(_COLORS)]
        d = " ".join(f"{'M' if i == 0 else 'L'}{px:.2f},{py:.2f}" for i, (px, py) in enumerate(pts))
        out.append(f'<path d="{d} Z" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for px, py in pts:
            out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="12" y="{size - 14 - 14 * k}" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# binary grids

def write_grid(path, values: np.ndarray, header: dict) -> tuple[Path, Path]:
    """Raw little-endian float64 values in <path>.bin plus a JSON header in <path>.json."""
    path = Path(path)
    arr = np.ascontiguousarray(values, dtype="<f8")
    data = arr.tobytes()
    head = dict(header)
    head.update({"shape": list(arr.shape), "dtype": "<f8", "sha256": sha256_bytes(data)})
    b = write_bytes(path.with_suffix(".bin"), data)
    j = write_bytes(path.with_suffix(".json"), json_text(head).encode())
    return b, j


def read_grid(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    head = json.loads(path.with_suffix(".json").read_text())
    data = path.with_suffix(".bin").read_bytes()
    if sha256_bytes(data) != head["sha256"]:
        raise FrontspeedError(f"checksum mismatch for {path.with_suffix('.bin')}")
    arr = np.frombuffer(data, dtype=head["dtype"]).reshape(head["shape"]).copy()
    return arr, head


def write_snapshot(path, state, provenance: str = "") -> tuple[Path, Path]:
    return write_grid(path, state.u, {"t": state.t, "grid": state.grid.to_dict(),
                                      "step": state.step_index, "provenance": provenance})


def read_snapshot(path):
    from .simulate import SimState
    u, head = read_grid(path)
    return SimState(head["t"], u, GridSpec.from_dict(head["grid"]), head.get("step", 0)), head


def write_field(path, field_obj) -> tuple[Path, Path]:
    """Cache a sampled coefficient field."""
    return write_grid(path, field_obj.samples, {"cell": list(field_obj.cell.lengths),
                                                "resolution": list(field_obj.resolution),
                                                "expr": field_obj.expr,
                                                "type": type(field_obj).__name__})


def read_field(path):
    from .core import PeriodicCell, scalar_from_samples, tensor_from_samples, vector_from_samples
    arr, head = read_grid(path)
    cell = PeriodicCell(tuple(head["cell"]))
    kind = head["type"]
    if kind == "TensorField":
        return tensor_from_samples(cell, arr)
    if kind == "VectorField":
        return vector_from_samples(cell, arr)
    return scalar_from_samples(cell, arr)
