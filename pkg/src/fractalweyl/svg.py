"""Minimal deterministic SVG writer on a fixed 1000x1000 canvas."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

SIZE = 1000


def _f(x: float) -> str:
    return f"{x:.2f}"


@dataclass
class Canvas:
    """Maps a data window ``[x0, x1] x [y0, y1]`` onto the canvas (y up)."""

    x0: float
    x1: float
    y0: float
    y1: float
    margin: float = 0.0
    items: list[str] = field(default_factory=list)

    def px(self, x: float, y: float) -> tuple[float, float]:
        w = SIZE - 2 * self.margin
        u = self.margin + (x - self.x0) / (self.x1 - self.x0) * w
        v = self.margin + (self.y1 - y) / (self.y1 - self.y0) * w
        return u, v

    def circle(self, x: float, y: float, r: float, fill: str = "black", opacity: float = 1.0) -> None:
        u, v = self.px(x, y)
        self.items.append(f'<circle cx="{_f(u)}" cy="{_f(v)}" r="{_f(r)}" fill="{fill}" '
                          f'fill-opacity="{opacity:g}"/>')

    def ring(self, x: float, y: float, radius: float, stroke: str = "gray", width: float = 1.0) -> None:
        u, v = self.px(x, y)
        rr = radius / (self.x1 - self.x0) * (SIZE - 2 * self.margin)
        self.items.append(f'<circle cx="{_f(u)}" cy="{_f(v)}" r="{_f(rr)}" fill="none" '
                          f'stroke="{stroke}" stroke-width="{width:g}"/>')

    def polyline(self, xs: Sequence[float], ys: Sequence[float], stroke: str = "black",
                 width: float = 2.0, dash: str = "") -> None:
        pts = " ".join("{},{}".format(*map(_f, self.px(x, y))) for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{width:g}"{extra}/>')

    def polygon(self, xs: Sequence[float], ys: Sequence[float], fill: str, opacity: float = 0.3) -> None:
        pts = " ".join("{},{}".format(*map(_f, self.px(x, y))) for x, y in zip(xs, ys))
        self.items.append(f'<polygon points="{pts}" fill="{fill}" fill-opacity="{opacity:g}" stroke="none"/>')

    def text(self, x: float, y: float, s: str, size: int = 24) -> None:
        u, v = self.px(x, y)
        s = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        self.items.append(f'<text x="{_f(u)}" y="{_f(v)}" font-size="{size}" font-family="sans-serif">{s}</text>')

    def frame(self) -> None:
        self.polyline([self.x0, self.x1, self.x1, self.x0, self.x0],
                      [self.y0, self.y0, self.y1, self.y1, self.y0], stroke="black", width=1)

    def render(self, title: str = "") -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" '
                f'width="{SIZE}" height="{SIZE}">')
        body: Iterable[str] = [head, '<rect width="100%" height="100%" fill="white"/>']
        if title:
            body = list(body) + [f"<title>{title}</title>"]
        return "\n".join(list(body) + self.items + ["</svg>"]) + "\n"

    def save(self, path, title: str = "") -> None:
        with open(path, "w") as fh:
            fh.write(self.render(title))
