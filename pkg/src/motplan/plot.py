"""SVG rendering of a tour over its scenario.

Visual grammar: sensors are hollow blue circles, visited stops (station
included) are filled green numbered circles, unvisited candidates are small
grey crosses, the tour is one arrowed polyline and each restricted area is a
shaded red rectangle. Coordinates are written with two decimals so output is
byte-stable.
"""

from __future__ import annotations

import os
from xml.sax.saxutils import escape

from .model import Tour
from .scenario import Scenario

SENSOR_R = 2.5
STOP_R = 6.0


def render_tour_svg(sc: Scenario, tour: Tour | None = None, width: float = 640.0, margin: float = 30.0, title: str = "") -> str:
    reg = sc.region
    scale = (width - 2 * margin) / reg.width
    height = reg.height * scale + 2 * margin

    def sx(x):
        return margin + (x - reg.min_corner.x) * scale

    def sy(y):
        return margin + (reg.max_corner.y - y) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2f}" height="{height:.2f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="7" markerHeight="7" orient="auto">'
        '<path d="M0,0 L10,5 L0,10 z" fill="black"/></marker>',
        "</defs>",
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(
        f'<rect class="region" x="{sx(reg.min_corner.x):.2f}" y="{sy(reg.max_corner.y):.2f}" '
        f'width="{reg.width * scale:.2f}" height="{reg.height * scale:.2f}" fill="white" stroke="#888"/>'
    )
    for r in sc.restricted:
        out.append(
            f'<rect class="restricted" x="{sx(r.min_corner.x):.2f}" y="{sy(r.max_corner.y):.2f}" '
            f'width="{r.width * scale:.2f}" height="{r.height * scale:.2f}" fill="red" fill-opacity="0.3" stroke="red"/>'
        )
    for s in sc.sensors:
        out.append(
            f'<circle class="sensor" cx="{sx(s.position.x):.2f}" cy="{sy(s.position.y):.2f}" r="{SENSOR_R}" '
            'fill="none" stroke="blue"/>'
        )

    visited = list(dict.fromkeys(tour.stops)) if tour else [0]
    seen = set(visited)
    for st in sc.stops:
        if st.id in seen:
            continue
        x, y = sx(st.position.x), sy(st.position.y)
        out.append(
            f'<path class="candidate" d="M{x - 3:.2f},{y - 3:.2f} L{x + 3:.2f},{y + 3:.2f} '
            f'M{x - 3:.2f},{y + 3:.2f} L{x + 3:.2f},{y - 3:.2f}" stroke="#999"/>'
        )

    if tour:
        pts = " ".join(f"{sx(sc.stops[i].position.x):.2f},{sy(sc.stops[i].position.y):.2f}" for i in tour.stops)
        out.append(
            f'<polyline class="tour" points="{pts}" fill="none" stroke="black" stroke-width="1.2" '
            'marker-mid="url(#arrow)" marker-end="url(#arrow)"/>'
        )

    for i in visited:
        st = sc.stops[i]
        x, y = sx(st.position.x), sy(st.position.y)
        fill = "orange" if st.is_charging_station else "green"
        out.append(f'<circle class="stop" data-id="{i}" cx="{x:.2f}" cy="{y:.2f}" r="{STOP_R}" fill="{fill}"/>')
        out.append(
            f'<text class="stop-label" x="{x + STOP_R + 1:.2f}" y="{y - STOP_R:.2f}" font-size="11" '
            f'font-family="sans-serif">{i}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_tour_svg(path: str | os.PathLike, sc: Scenario, tour: Tour | None = None, **kw) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_tour_svg(sc, tour, **kw))
