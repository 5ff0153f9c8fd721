"""Render harness output: markdown summary table, deterministic SVG
hexbin figures, hexbin CSVs, and optional raster (PNG) figures.

The SVG renderer writes one element per line in a fixed order with fixed
numeric formatting (pixels at 2 decimals, opacity at 3), so identical
layers produce byte-identical documents suitable for golden-file tests.
The PNG path exists for humans; it mirrors the SVG content but is not a
golden artifact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import EmptyLayer, IncompleteTable
from .harness import METHODS, SOURCES, HexbinLayer, SummaryCell, fmt_real

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 80, 30, 45, 45
_FILL = "#1f77b4"


@dataclass(frozen=True)
class PlotSpec:
    title: str
    x_label: str = "GT similarity"
    y_label: str = "predicted similarity"
    identity_span: tuple[float, float] | None = None  # None: use the layer band
    min_opacity: float = 0.15
    width: int = 660
    height: int = 640

    def __post_init__(self) -> None:
        if self.width < 300 or self.height < 300:
            raise ValueError("canvas must be at least 300x300")


def default_spec(layer: HexbinLayer) -> PlotSpec:
    return PlotSpec(title=f"{layer.method} vs GT ({layer.source})")


def render_summary_markdown(cells: Sequence[SummaryCell]) -> str:
    """Pipe table, methods as rows, sources as columns, 4 decimals, with
    per-source used/excluded pair counts underneath."""
    by_key = {(cell.method, cell.source): cell for cell in cells}
    missing = [(m, s) for m in METHODS for s in SOURCES if (m, s) not in by_key]
    if missing:
        raise IncompleteTable(f"missing cells: {missing}")
    lines = [
        "# Mean differences vs ground truth",
        "",
        "| Method | CheXpert | NegBio |",
        "| --- | --- | --- |",
    ]
    for method in METHODS:
        row = [format(by_key[(method, source)].mean_difference, ".4f") for source in SOURCES]
        lines.append(f"| {method} | {row[0]} | {row[1]} |")
    lines.append("")
    for source in SOURCES:
        counts = {(by_key[(m, source)].used, by_key[(m, source)].excluded) for m in METHODS}
        if len(counts) != 1:
            raise IncompleteTable(f"inconsistent pair counts for {source}: {sorted(counts)}")
        used, excluded = counts.pop()
        lines.append(f"{source}: {used} pairs used, {excluded} excluded.")
    return "\n".join(lines) + "\n"


def write_summary_csv(path: str | Path, cells: Sequence[SummaryCell]) -> None:
    lines = ["method,source,mean_difference,pairs_used,pairs_excluded"]
    for cell in cells:
        lines.append(
            f"{cell.method},{cell.source},{fmt_real(cell.mean_difference)},{cell.used},{cell.excluded}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_hexbin_csv(path: str | Path, layer: HexbinLayer) -> None:
    lines = [
        f"# hex_radius={fmt_real(layer.radius)} band_lo={fmt_real(layer.band[0])} "
        f"band_hi={fmt_real(layer.band[1])} method={layer.method} source={layer.source}",
        "x,y,count",
    ]
    for b in layer.bins:
        lines.append(f"{fmt_real(b.x)},{fmt_real(b.y)},{b.count}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _f2(value: float) -> str:
    return format(value, ".2f")


def _opacity(count: int, log_min: float, log_max: float, floor: float) -> float:
    if log_max == log_min:
        return 1.0
    return floor + (1.0 - floor) * (math.log(count) - log_min) / (log_max - log_min)


def render_hexbin_svg(layer: HexbinLayer, spec: PlotSpec | None = None) -> str:
    """One hexagon path per bin, opacity log-scaled by count, dashed
    identity segment spanning the percentile band, ticks every 0.25."""
    if not layer.bins:
        raise EmptyLayer(f"no bins to draw for {layer.method}/{layer.source}")
    if spec is None:
        spec = default_spec(layer)
    span = spec.identity_span if spec.identity_span is not None else layer.band
    if not (-1.0 <= span[0] <= 1.0 and -1.0 <= span[1] <= 1.0):
        raise ValueError(f"identity span {span} outside the [-1, 1] axis range")
    plot_w = spec.width - _MARGIN_L - _MARGIN_R
    plot_h = spec.height - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x + 1.0) / 2.0 * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (1.0 - (y + 1.0) / 2.0) * plot_h

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f"<title>{spec.title}</title>",
        f'<rect x="{_f2(_MARGIN_L)}" y="{_f2(_MARGIN_T)}" width="{_f2(plot_w)}" '
        f'height="{_f2(plot_h)}" fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    ticks = [i * 0.25 for i in range(-4, 5)]
    bottom = _MARGIN_T + plot_h
    for v in ticks:
        x = px(v)
        lines.append(
            f'<line x1="{_f2(x)}" y1="{_f2(bottom)}" x2="{_f2(x)}" y2="{_f2(bottom + 6)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{_f2(x)}" y="{_f2(bottom + 20)}" font-size="11" '
            f'text-anchor="middle" fill="#222222">{format(v, "g")}</text>'
        )
    for v in ticks:
        y = py(v)
        lines.append(
            f'<line x1="{_f2(_MARGIN_L - 6)}" y1="{_f2(y)}" x2="{_f2(_MARGIN_L)}" y2="{_f2(y)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{_f2(_MARGIN_L - 8)}" y="{_f2(y + 4)}" font-size="11" '
            f'text-anchor="end" fill="#222222">{format(v, "g")}</text>'
        )
    lines.append(
        f'<text x="{_f2(_MARGIN_L + plot_w / 2)}" y="{_f2(spec.height - 8)}" font-size="13" '
        f'text-anchor="middle" fill="#000000">{spec.x_label}</text>'
    )
    y_mid = _MARGIN_T + plot_h / 2
    lines.append(
        f'<text x="22.00" y="{_f2(y_mid)}" font-size="13" text-anchor="middle" '
        f'fill="#000000" transform="rotate(-90 22.00 {_f2(y_mid)})">{spec.y_label}</text>'
    )
    log_min = math.log(min(b.count for b in layer.bins))
    log_max = math.log(max(b.count for b in layer.bins))
    for b in layer.bins:
        points = []
        for angle in (90, 150, 210, 270, 330, 30):
            rad = math.radians(angle)
            vx = b.x + layer.radius * math.cos(rad)
            vy = b.y + layer.radius * math.sin(rad)
            points.append(f"{_f2(px(vx))},{_f2(py(vy))}")
        opacity = _opacity(b.count, log_min, log_max, spec.min_opacity)
        d = "M " + " L ".join(points) + " Z"
        lines.append(f'<path d="{d}" fill="{_FILL}" fill-opacity="{format(opacity, ".3f")}"/>')
    lines.append(
        f'<line x1="{_f2(px(span[0]))}" y1="{_f2(py(span[0]))}" x2="{_f2(px(span[1]))}" y2="{_f2(py(span[1]))}" '
        f'stroke="#333333" stroke-width="1.5" stroke-dasharray="6,4"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_hexbin_png(layer: HexbinLayer, path: str | Path, spec: PlotSpec | None = None) -> None:
    """Raster companion to the SVG, drawn with matplotlib (Agg)."""
    if not layer.bins:
        raise EmptyLayer(f"no bins to draw for {layer.method}/{layer.source}")
    if spec is None:
        spec = default_spec(layer)
    import matplotlib

    matplotlib.use("Agg", force=False)
    from matplotlib import patches
    from matplotlib import pyplot as plt

    fig, ax = plt.subplots(figsize=(6.6, 6.4), dpi=100)
    log_min = math.log(min(b.count for b in layer.bins))
    log_max = math.log(max(b.count for b in layer.bins))
    for b in layer.bins:
        ax.add_patch(
            patches.RegularPolygon(
                (b.x, b.y),
                numVertices=6,
                radius=layer.radius,
                orientation=0.0,
                facecolor=_FILL,
                alpha=_opacity(b.count, log_min, log_max, spec.min_opacity),
                edgecolor="none",
            )
        )
    span = spec.identity_span if spec.identity_span is not None else layer.band
    ax.plot(span, span, linestyle="--", color="#333333", linewidth=1.5)
    ax.set_xlim(-1.0, 1.0)
    ax.set_ylim(-1.0, 1.0)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(spec.title)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
