"""Ladder diagrams: vertical lines for positions, one rung per lazy transposition."""
from __future__ import annotations

from fractions import Fraction

from .core import Shuffle

# Unit column spacing with rows 0.7 units apart.
STYLE = {
    "unit": 40,
    "row": 28,
    "margin": 24,
    "header": 24,
    "dot_radius": 4,
    "stroke_width": 2,
    "font_size": 14,
    "label_gap": 24,
    "label_width": 140,
    "font_family": "serif",
}


def prob_label(p) -> str:
    if isinstance(p, Fraction):
        return str(p)
    return f"{float(p):.6g}"


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_svg(shuffle: Shuffle) -> str:
    st = STYLE
    n, steps = shuffle.n, shuffle.steps
    col = lambda pos: st["margin"] + (pos - 1) * st["unit"]  # noqa: E731
    row = lambda i: st["margin"] + st["header"] + i * st["row"]  # noqa: E731
    top = row(0.5)
    bottom = row(len(steps) + 0.5)
    width = col(n) + st["label_gap"] + st["label_width"]
    height = bottom + st["margin"]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<g stroke="black" stroke-width="{st["stroke_width"]}" fill="black" '
        f'font-family="{st["font_family"]}" font-size="{st["font_size"]}">',
    ]
    for pos in range(1, n + 1):
        x = _num(col(pos))
        out.append(f'<text x="{x}" y="{_num(row(0) - 4)}" stroke="none" text-anchor="middle">{pos}</text>')
        out.append(f'<line x1="{x}" y1="{_num(top)}" x2="{x}" y2="{_num(bottom)}"/>')
    for i, s in enumerate(steps, start=1):
        y = _num(row(i))
        xa, xb = _num(col(s.a)), _num(col(s.b))
        out.append(f'<line x1="{xa}" y1="{y}" x2="{xb}" y2="{y}"/>')
        out.append(f'<circle cx="{xa}" cy="{y}" r="{st["dot_radius"]}"/>')
        out.append(f'<circle cx="{xb}" cy="{y}" r="{st["dot_radius"]}"/>')
        out.append(f'<text x="{_num(col(n) + st["label_gap"])}" y="{_num(row(i) + st["font_size"] / 3)}" '
                   f'stroke="none">{prob_label(s.p)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_ascii(shuffle: Shuffle) -> str:
    """Text ladder: ``o`` marks the swapped positions, ``+`` a crossed line.

    >>> from transhuffle.core import Shuffle
    >>> print(render_ascii(Shuffle.from_triples(3, [(1, 3, "1/2")])), end="")
    1  2  3
    |  |  |
    o--+--o  1/2
    |  |  |
    """
    n = shuffle.n
    width = 3 * n - 2
    lines = ["  ".join(str(k) for k in range(1, n + 1)) if n < 10 else
             " ".join(f"{k:<2}" for k in range(1, n + 1)).rstrip()]
    idle = "  ".join("|" for _ in range(n))
    lines.append(idle)
    for s in shuffle.steps:
        cells = list(idle)
        for pos in range(s.a, s.b + 1):
            x = 3 * (pos - 1)
            cells[x] = "o" if pos in (s.a, s.b) else "+"
            if pos < s.b:
                cells[x + 1] = cells[x + 2] = "-"
        lines.append("".join(cells).ljust(width) + "  " + prob_label(s.p))
    lines.append(idle)
    return "\n".join(lines) + "\n"
