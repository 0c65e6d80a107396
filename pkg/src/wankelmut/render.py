"""Deterministic SVG rendering of episode trajectories.

Cells run left to right with a gray-scale quality background (dark = low,
light = high); time runs downward; the agent's path is a polyline.
Identical traces render to byte-identical files.
"""

from __future__ import annotations

from .world import Orientation, Profile, make_environment


def _shade(q: float) -> int:
    # quality -1..1 -> gray 20..235
    v = int(round(127.5 + 107.5 * q))
    return max(0, min(255, v))


CELL_W = 8
ROW_H = 4
MARGIN = 10
PATH_STYLE = 'fill="none" stroke="#c62828" stroke-width="1.5"'


def trajectory_svg(positions, quality, max_steps: int | None = None) -> str:
    """Build the SVG document for a position sequence over a quality field."""
    pos = list(positions)
    if max_steps is not None:
        pos = pos[: max_steps + 1]
    n = len(quality)
    rows = max(len(pos), 1)
    width = 2 * MARGIN + n * CELL_W
    height = 2 * MARGIN + rows * ROW_H

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
    ]
    for i, q in enumerate(quality):
        v = _shade(float(q))
        parts.append(
            f'<rect x="{MARGIN + i * CELL_W}" y="{MARGIN}" width="{CELL_W}" '
            f'height="{rows * ROW_H}" fill="rgb({v},{v},{v})"/>'
        )
    pts = [
        (MARGIN + (p + 0.5) * CELL_W, MARGIN + (t + 0.5) * ROW_H)
        for t, p in enumerate(pos)
    ]
    if len(pts) == 1:
        x, y = pts[0]
        parts.append(f'<circle cx="{x:g}" cy="{y:g}" r="3" fill="#c62828"/>')
    else:
        joined = " ".join(f"{x:g},{y:g}" for x, y in pts)
        parts.append(f'<polyline points="{joined}" {PATH_STYLE}/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_trajectory(trace, path, max_steps: int | None = None) -> None:
    """Write a trace's trajectory to an SVG file."""
    svg = trajectory_svg(trace.positions, trace.env.quality, max_steps)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def read_trace_csv(path):
    """Parse a trace CSV back into (positions, quality or None).

    The optional leading '# env ...' comment restores the world the trace
    was recorded in; without it the background is flat gray.
    """
    positions = []
    env_params = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# env "):
                    env_params = dict(
                        item.split("=", 1) for item in line[6:].split()
                    )
                continue
            if line.startswith("t,"):
                continue
            positions.append(int(line.split(",")[1]))
    if env_params is not None:
        env = make_environment(
            int(env_params["num_cells"]),
            Profile(env_params["profile"]),
            Orientation(env_params["orientation"]),
            float(env_params["steepness"]),
        )
        quality = env.quality
    else:
        quality = [0.0] * (max(positions) + 1 if positions else 1)
    return positions, quality


def render_trace_csv(csv_path, svg_path, max_steps: int | None = None) -> None:
    positions, quality = read_trace_csv(csv_path)
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(trajectory_svg(positions, quality, max_steps))
