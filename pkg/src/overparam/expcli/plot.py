"""Log-scale convergence plots written as plain SVG."""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .runner import read_trace

FLOOR = 1e-16
WIDTH, HEIGHT = 640, 420
MARGIN = {"left": 70, "right": 20, "top": 20, "bottom": 50}
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _label(csv_path: Path) -> str:
    meta = csv_path.with_suffix(".json")
    if meta.exists():
        try:
            return json.loads(meta.read_text(encoding="utf-8")).get("label") or csv_path.stem
        except json.JSONDecodeError:
            pass
    return csv_path.stem


def emit_plot(trace_paths, output_path) -> Path:
    """One polyline per trace: iteration (linear) vs ``loss - loss_star`` (log10, floored)."""
    paths = [Path(p) for p in trace_paths]
    if not paths:
        raise ValueError("emit_plot needs at least one trace")
    series = []
    for p in paths:
        iters, gap = read_trace(p)
        if iters.size == 0:
            raise ValueError(f"{p}: trace has no finite rows")
        series.append((_label(p), iters, np.log10(np.maximum(gap, FLOOR))))

    x_max = max(float(s[1].max()) for s in series) or 1.0
    y_lo = math.floor(min(float(s[2].min()) for s in series))
    y_hi = math.ceil(max(float(s[2].max()) for s in series))
    if y_hi == y_lo:
        y_hi += 1
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + plot_w * x / x_max

    def sy(y):
        return MARGIN["top"] + plot_h * (y_hi - y) / (y_hi - y_lo)

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(WIDTH),
                     height=str(HEIGHT), viewBox=f"0 0 {WIDTH} {HEIGHT}")
    ET.SubElement(svg, "rect", x=str(MARGIN["left"]), y=str(MARGIN["top"]), width=str(plot_w),
                  height=str(plot_h), fill="none", stroke="black")
    step = max(1, (y_hi - y_lo) // 8)
    for e in range(y_lo, y_hi + 1, step):
        ET.SubElement(svg, "text", x=str(MARGIN["left"] - 6), y=f"{sy(e) + 4:.1f}",
                      **{"text-anchor": "end", "font-size": "11"}).text = f"1e{e}"
    for frac in (0.0, 0.5, 1.0):
        ET.SubElement(svg, "text", x=f"{sx(frac * x_max):.1f}", y=str(HEIGHT - MARGIN["bottom"] + 16),
                      **{"text-anchor": "middle", "font-size": "11"}).text = f"{frac * x_max:g}"
    ET.SubElement(svg, "text", x=str(MARGIN["left"] + plot_w // 2), y=str(HEIGHT - 10),
                  **{"text-anchor": "middle", "font-size": "12"}).text = "iteration"
    ET.SubElement(svg, "text", x="14", y=str(MARGIN["top"] + plot_h // 2),
                  transform=f"rotate(-90 14 {MARGIN['top'] + plot_h // 2})",
                  **{"text-anchor": "middle", "font-size": "12"}).text = "loss - optimum"

    legend = ET.SubElement(svg, "g", {"class": "legend"})
    for i, (label, iters, logy) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(iters, logy))
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color, **{"stroke-width": "1.5"})
        ly = MARGIN["top"] + 14 + 16 * i
        lx = WIDTH - MARGIN["right"] - 170
        ET.SubElement(legend, "line", x1=str(lx), y1=str(ly - 4), x2=str(lx + 20), y2=str(ly - 4),
                      stroke=color, **{"stroke-width": "2"})
        ET.SubElement(legend, "text", x=str(lx + 26), y=str(ly), **{"font-size": "11"}).text = label

    out = Path(output_path)
    ET.ElementTree(svg).write(out, encoding="utf-8", xml_declaration=True)
    return out
