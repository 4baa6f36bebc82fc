"""Minimal SVG line charts of success rate against a swept axis.

No plotting library is involved: the SVG is assembled as text with a fixed
style and fixed number formatting, so identical input gives byte-identical
output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

from .harness import read_csv

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 130, 36, 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

# Columns tried, in order, as the x axis; the first one that varies wins.
X_CANDIDATES = ("T", "L", "lambda", "u")


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def choose_x_axis(rows: Sequence[dict[str, Any]]) -> str | None:
    """Name of the swept column, or ``None`` when no candidate varies."""
    for col in X_CANDIDATES:
        if len({r[col] for r in rows}) > 1:
            return col
    return None


def render_svg(rows: Sequence[dict[str, Any]], title: str = "") -> str:
    """SVG text for parsed results rows (see :func:`pssbai.harness.read_csv`)."""
    xcol = choose_x_axis(rows)
    if xcol is None:
        xs = [float(i) for i in range(len(rows))]
        xlabel = "configuration"
    else:
        xs = [float(r[xcol]) for r in rows]
        xlabel = xcol

    series: dict[str, list[tuple[float, dict[str, Any]]]] = {}
    for x, r in zip(xs, rows):
        series.setdefault(r["algorithm"], []).append((x, r))

    x_ticks = sorted(set(xs))
    pos = {x: i for i, x in enumerate(x_ticks)}
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    # categorical x positions keep log-spaced sweeps (T, L) readable
    def px(x: float) -> float:
        if len(x_ticks) == 1:
            return MARGIN_L + pw / 2
        return MARGIN_L + pw * pos[x] / (len(x_ticks) - 1)

    def py(y: float) -> float:
        return MARGIN_T + ph * (1.0 - y)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>')

    # axes and grid
    x0, x1 = MARGIN_L, MARGIN_L + pw
    y0, y1 = py(0.0), py(1.0)
    for k in range(6):
        y = k / 5
        out.append(
            f'<line x1="{x0}" y1="{py(y):.1f}" x2="{x1}" y2="{py(y):.1f}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{x0 - 6}" y="{py(y) + 4:.1f}" text-anchor="end">{int(round(y * 100))}</text>'
        )
    out.append(f'<line x1="{x0}" y1="{y0:.1f}" x2="{x1}" y2="{y0:.1f}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0:.1f}" x2="{x0}" y2="{y1:.1f}" stroke="black"/>')
    for x in x_ticks:
        label = _num(x) if xcol is not None else str(int(x))
        out.append(f'<line x1="{px(x):.1f}" y1="{y0:.1f}" x2="{px(x):.1f}" y2="{y0 + 4:.1f}" stroke="black"/>')
        out.append(f'<text x="{px(x):.1f}" y="{y0 + 18:.1f}" text-anchor="middle">{_esc(label)}</text>')
    out.append(
        f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(xlabel)}</text>'
    )
    out.append(
        f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">success rate (%)</text>'
    )

    for idx, (alg, pts) in enumerate(sorted(series.items())):
        color = PALETTE[idx % len(PALETTE)]
        pts = sorted(pts, key=lambda p: p[0])
        coords = " ".join(f"{px(x):.1f},{py(r['success_rate']):.1f}" for x, r in pts)
        if len(pts) > 1:
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, r in pts:
            cx = px(x)
            out.append(
                f'<line x1="{cx:.1f}" y1="{py(r["ci_low"]):.1f}" x2="{cx:.1f}" '
                f'y2="{py(r["ci_high"]):.1f}" stroke="{color}"/>'
            )
            for yv in (r["ci_low"], r["ci_high"]):
                out.append(
                    f'<line x1="{cx - 4:.1f}" y1="{py(yv):.1f}" x2="{cx + 4:.1f}" '
                    f'y2="{py(yv):.1f}" stroke="{color}"/>'
                )
            out.append(f'<circle cx="{cx:.1f}" cy="{py(r["success_rate"]):.1f}" r="3" fill="{color}"/>')
        ly = MARGIN_T + 10 + 18 * idx
        lx = WIDTH - MARGIN_R + 14
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{_esc(alg)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path: str | Path, svg_path: str | Path, title: str = "") -> None:
    """Read a results CSV and write its chart. Raises SchemaError on a bad header."""
    rows = read_csv(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows to plot")
    Path(svg_path).write_text(render_svg(rows, title), encoding="utf-8")
