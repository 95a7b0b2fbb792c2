"""Static SVG pictures of wall structures and broken lines (matplotlib, byte-stable)."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

from .potential import BrokenLine  # noqa: E402
from .scatter import Diagram, Wall  # noqa: E402

__all__ = ["RenderSpec", "auto_viewport", "render_svg"]

# t-order -> (colour, line width, dash pattern)
DEFAULT_STYLES = {
    1: ("#1f4e9c", 1.6, "solid"),
    2: ("#c0392b", 1.4, (0, (6, 3))),
    3: ("#2e8b57", 1.2, (0, (2, 2))),
}
_FALLBACK_STYLE = ("#555555", 1.0, (0, (1, 2)))


@dataclass(frozen=True)
class RenderSpec:
    viewport: tuple  # (xmin, xmax, ymin, ymax), exact rationals
    styles: dict = field(default_factory=lambda: dict(DEFAULT_STYLES))
    show_points: bool = True
    label_walls: bool = False
    lines: tuple[BrokenLine, ...] = ()
    size: tuple[float, float] = (6.0, 6.0)

    def __post_init__(self):
        x0, x1, y0, y1 = (Fraction(v) for v in self.viewport)
        if x1 <= x0 or y1 <= y0:
            raise ValueError(f"viewport {self.viewport} has no area")
        object.__setattr__(self, "viewport", (x0, x1, y0, y1))

    def style(self, order: int):
        return self.styles.get(order, _FALLBACK_STYLE)


def auto_viewport(d: Diagram, extra=()) -> tuple:
    """Square window around every wall base, joint, marked point and ``extra`` point."""
    pts = [w.base for w in d.walls] + list(d.joints) + list(d.scene.points) + list(extra)
    if not pts:
        return (Fraction(-5), Fraction(5), Fraction(-5), Fraction(5))
    xs = [Fraction(p[0]) for p in pts]
    ys = [Fraction(p[1]) for p in pts]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    half = max(max(xs) - min(xs), max(ys) - min(ys)) / 2 + 3
    return (cx - half, cx + half, cy - half, cy + half)


def _clip_ray(w: Wall, viewport):
    """Visible part of the wall ray as a pair of points, or None."""
    x0, x1, y0, y1 = viewport
    lo, hi = Fraction(0), None
    for c, (a, b) in enumerate(((x0, x1), (y0, y1))):
        p, m = w.base[c], w.dir[c]
        if m == 0:
            if not a <= p <= b:
                return None
            continue
        s_a, s_b = (a - p) / m, (b - p) / m
        s_min, s_max = min(s_a, s_b), max(s_a, s_b)
        lo = max(lo, s_min)
        hi = s_max if hi is None else min(hi, s_max)
    if hi is None or hi <= lo:
        return None
    start = (w.base[0] + lo * w.dir[0], w.base[1] + lo * w.dir[1])
    end = (w.base[0] + hi * w.dir[0], w.base[1] + hi * w.dir[1])
    return start, end


def _line_points(line: BrokenLine, viewport):
    """Polyline of a broken line from the viewport edge to its endpoint."""
    x0, x1, y0, y1 = viewport
    reach = (x1 - x0) + (y1 - y0)
    pts = []
    first = line.segments[1].start if len(line.segments) > 1 else line.endpoint
    a = line.segments[0].exponent
    pts.append((first[0] - reach * a[0], first[1] - reach * a[1]))
    for seg in line.segments[1:]:
        pts.append(seg.start)
    pts.append(line.endpoint)
    return pts


def render_svg(d: Diagram, spec: RenderSpec) -> str:
    """SVG text of the diagram; identical inputs give identical bytes."""
    fig = Figure(figsize=spec.size)
    ax = fig.add_subplot(1, 1, 1)
    x0, x1, y0, y1 = spec.viewport
    ax.set_xlim(float(x0), float(x1))
    ax.set_ylim(float(y0), float(y1))
    ax.set_aspect("equal")
    ax.grid(True, color="#e5e5e5", linewidth=0.5)
    ax.set_axisbelow(True)

    seen_orders = set()
    for w in d.walls:
        seg = _clip_ray(w, spec.viewport)
        if seg is None:
            continue
        colour, width, dash = spec.style(w.order)
        label = f"t-order {w.order}" if w.order not in seen_orders else None
        seen_orders.add(w.order)
        (sx, sy), (ex, ey) = seg
        ax.plot([float(sx), float(ex)], [float(sy), float(ey)], color=colour, linewidth=width,
                linestyle=dash, label=label, solid_capstyle="butt")
        if spec.label_walls:
            mx, my = (sx + ex) / 2, (sy + ey) / 2
            ax.annotate(repr(w.fun), (float(mx), float(my)), fontsize=6, color=colour,
                        xytext=(3, 3), textcoords="offset points")

    if spec.show_points:
        for i, p in enumerate(d.scene.points, start=1):
            ax.plot([float(p[0])], [float(p[1])], marker="o", color="black", markersize=4, linestyle="none")
            ax.annotate(f"p{i}", (float(p[0]), float(p[1])), fontsize=8,
                        xytext=(4, -10), textcoords="offset points")

    for line in spec.lines:
        pts = _line_points(line, spec.viewport)
        ax.plot([float(p[0]) for p in pts], [float(p[1]) for p in pts], color="#8e44ad",
                linewidth=0.9, alpha=0.8)
        bends = [seg.start for seg in line.segments[1:]]
        if bends:
            ax.plot([float(p[0]) for p in bends], [float(p[1]) for p in bends], marker="D",
                    markersize=3.5, color="#8e44ad", linestyle="none")
    if spec.lines:
        u = spec.lines[0].endpoint
        ax.plot([float(u[0])], [float(u[1])], marker="*", markersize=8, color="#8e44ad", linestyle="none")

    if seen_orders:
        ax.legend(loc="upper right", fontsize=7, frameon=False)
    fig.tight_layout()

    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "tropscatter", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()
