"""Region files: CSV (vertices), JSON (vertices + halfspaces) and SVG plots."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .regions import RateRegion, RegionError, hull_of


class FormatError(ValueError):
    pass


def _num(x: float) -> str:
    # repr-exact; + 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def region_to_csv(region: RateRegion) -> str:
    return "".join(",".join(_num(v) for v in row) + "\n" for row in region.vertices)


def write_region_csv(region: RateRegion, path: str | Path) -> None:
    Path(path).write_text(region_to_csv(region))


def read_region_csv(path: str | Path) -> RateRegion:
    rows = []
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(t) for t in line.split(",")])
        except ValueError:
            raise FormatError(f"{path}: line {lineno}: not a list of numbers: {line!r}") from None
    if not rows:
        raise FormatError(f"{path}: no vertices")
    dims = {len(r) for r in rows}
    if len(dims) != 1 or dims.pop() not in (2, 3):
        raise FormatError(f"{path}: every line needs 2 or 3 coordinates")
    try:
        return hull_of(np.array(rows))
    except RegionError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def region_to_json(region: RateRegion, labels: Sequence[str] | None = None,
                   meta: dict | None = None) -> dict:
    labels = list(labels or ("R0", "R1", "R2")[:region.dim])
    out = {
        "dim": region.dim,
        "labels": labels,
        "vertices": [[float(v) + 0.0 for v in row] for row in region.vertices],
        "halfspaces": [{"a": [float(v) + 0.0 for v in row[:-1]], "b": float(row[-1]) + 0.0}
                       for row in region.halfspaces],
    }
    if meta:
        out["meta"] = meta
    return out


def write_region_json(region: RateRegion, path: str | Path, **kw) -> None:
    Path(path).write_text(json.dumps(region_to_json(region, **kw), indent=1, sort_keys=True) + "\n")


def read_region_json(path: str | Path) -> RateRegion:
    try:
        data = json.loads(Path(path).read_text())
        V = np.array(data["vertices"], dtype=float)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed region JSON: {exc}") from exc
    return hull_of(V)


def read_region(path: str | Path) -> RateRegion:
    p = Path(path)
    if p.suffix.lower() == ".json":
        return read_region_json(p)
    return read_region_csv(p)


# -- SVG ----------------------------------------------------------------------

_W, _H, _PAD = 320, 320, 48


def _frontier_polygon(V: np.ndarray) -> np.ndarray:
    """Vertices of a 2-D downward-closed region in counter-clockwise order."""
    c = V.mean(axis=0) + 1e-12
    ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
    return V[np.argsort(ang, kind="stable")]


def _panel(V: np.ndarray, labels: tuple[str, str], x0: float, title: str = "") -> list[str]:
    hi = max(float(V.max()), 1e-9) * 1.1
    sx = lambda x: x0 + _PAD + x / hi * (_W - 2 * _PAD)
    sy = lambda y: _H - _PAD - y / hi * (_H - 2 * _PAD)
    out = [f'<g font-family="sans-serif" font-size="11">']
    out.append(f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(hi):.2f}" y2="{sy(0):.2f}" '
               'stroke="black"/>')
    out.append(f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(0):.2f}" y2="{sy(hi):.2f}" '
               'stroke="black"/>')
    for t in np.linspace(0, hi, 5):
        out.append(f'<text x="{sx(t):.2f}" y="{sy(0) + 14:.2f}" text-anchor="middle">{t:.2f}</text>')
        out.append(f'<text x="{sx(0) - 4:.2f}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:.2f}</text>')
    out.append(f'<text x="{sx(hi / 2):.2f}" y="{_H - 10}" text-anchor="middle">'
               f'{labels[0]} [bits]</text>')
    out.append(f'<text x="{x0 + 12}" y="{sy(hi / 2):.2f}" text-anchor="middle" '
               f'transform="rotate(-90 {x0 + 12} {sy(hi / 2):.2f})">{labels[1]} [bits]</text>')
    if title:
        out.append(f'<text x="{x0 + _W / 2}" y="16" text-anchor="middle">{title}</text>')
    poly = _frontier_polygon(V)
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in poly)
    out.append(f'<polygon points="{pts}" fill="#9ecae1" fill-opacity="0.6" stroke="#08519c"/>')
    out.append("</g>")
    return out


def region_svg(region: RateRegion, labels: Sequence[str] | None = None, title: str = "") -> str:
    """2-D regions as one panel; 3-D regions as their three coordinate projections."""
    labels = tuple(labels or ("R0", "R1", "R2")[:region.dim])
    if region.dim == 2:
        panels = [(region.vertices, labels, title)]
    else:
        panels = []
        for i, j in ((0, 1), (0, 2), (1, 2)):
            panels.append((region.project((i, j)).vertices, (labels[i], labels[j]),
                           f"{title} ({labels[i]}, {labels[j]})".strip()))
    width = _W * len(panels)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_H}" '
           f'viewBox="0 0 {width} {_H}">', f'<rect width="{width}" height="{_H}" fill="white"/>']
    for k, (V, lab, t) in enumerate(panels):
        out += _panel(V, lab, k * _W, t)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_region_svg(region: RateRegion, path: str | Path, **kw) -> None:
    Path(path).write_text(region_svg(region, **kw))
