"""Minimal static SVG line plots, written directly (no plotting dependency)."""
from __future__ import annotations

from pathlib import Path

_WIDTH, _HEIGHT = 640, 440
_MARGIN = 70


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def write_line_plot(path: str | Path, xs: list[float], ys: list[float],
                    xlabel: str, ylabel: str, title: str) -> None:
    """One polyline with markers, linear axes, and labelled ticks."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equal, non-empty x and y sequences")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    span_x = _WIDTH - 2 * _MARGIN
    span_y = _HEIGHT - 2 * _MARGIN

    def px(x: float) -> float:
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * span_x

    def py(y: float) -> float:
        return _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * span_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="30" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
    ]
    axis = (f'M {_MARGIN} {_MARGIN} L {_MARGIN} {_HEIGHT - _MARGIN} '
            f'L {_WIDTH - _MARGIN} {_HEIGHT - _MARGIN}')
    parts.append(f'<path d="{axis}" stroke="black" fill="none"/>')
    for tx in _ticks(x_lo, x_hi):
        x = px(tx)
        parts.append(f'<line x1="{x:.1f}" y1="{_HEIGHT - _MARGIN}" x2="{x:.1f}" '
                     f'y2="{_HEIGHT - _MARGIN + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{_HEIGHT - _MARGIN + 20}" text-anchor="middle" '
                     f'font-size="11" font-family="sans-serif">{tx:.4g}</text>')
    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        parts.append(f'<line x1="{_MARGIN - 5}" y1="{y:.1f}" x2="{_MARGIN}" '
                     f'y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN - 8}" y="{y + 4:.1f}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif">{ty:.4g}</text>')
    parts.append(f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 15}" text-anchor="middle" '
                 f'font-size="13" font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="20" y="{_HEIGHT / 2}" text-anchor="middle" font-size="13" '
                 f'font-family="sans-serif" transform="rotate(-90 20 {_HEIGHT / 2})">'
                 f'{ylabel}</text>')
    points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f6fb2" stroke-width="2"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3.5" fill="#1f6fb2"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
