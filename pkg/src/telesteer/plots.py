"""Plot-data export: columnar text files, a manifest, and rendered PNGs.

Every kind writes a .dat file (labeled blocks of whitespace-separated
columns, blank line between blocks), a matching .png rendered headless,
and a manifest.json tying them together.  The text outputs are
deterministic for identical inputs; figures carry no timestamps.
"""

from __future__ import annotations

import json
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .field import EllipseBound, RectObstacle, bound_rectangle, emit_contours
from .simtrace import SimTrace

__all__ = ["PLOT_KINDS", "export_plot_data", "export_contour_sheet"]

PLOT_KINDS = ("trajectory", "steering", "potential", "ellipses")

_PNG_META = {"Software": None}


def _fmt_row(*vals: float) -> str:
    return " ".join(repr(float(v)) for v in vals)


def _scenario_geometry(trace: SimTrace):
    """Obstacles, path and field parameters recovered from the embedded
    scenario; None when the trace carries no scenario."""
    if not trace.scenario_json:
        return None
    raw = json.loads(trace.scenario_json)
    obstacles = [
        RectObstacle(
            x=o["x"], y=o["y"], heading=o["heading"], length=o["length"], width=o["width"]
        )
        for o in raw.get("obstacles", [])
    ]
    field = raw.get("field", {})
    return {
        "obstacles": obstacles,
        "path": raw.get("path", []),
        "order": int(field.get("order", 4)),
        "alpha": float(field.get("alpha", 1.0)),
    }


def _write(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _save_fig(fig, path: str) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def _obstacle_blocks(geom) -> tuple[list[str], list[np.ndarray], list[np.ndarray]]:
    """Text blocks plus polygon/contour arrays for the plan view."""
    lines: list[str] = []
    rects: list[np.ndarray] = []
    contours: list[np.ndarray] = []
    for i, obs in enumerate(geom["obstacles"]):
        corners = obs.corners()
        closed = np.vstack([corners, corners[:1]])
        rects.append(closed)
        lines.append(f"# block: obstacle-{i}-outline")
        lines.extend(_fmt_row(px, py) for px, py in closed)
        lines.append("")
        bound = bound_rectangle(obs, geom["order"])
        poly = bound.contour(0.0, 128)
        contours.append(poly)
        lines.append(f"# block: obstacle-{i}-bound")
        lines.extend(_fmt_row(px, py) for px, py in poly)
        lines.append("")
    return lines, rects, contours


def _export_trajectory(trace: SimTrace, out_dir: str) -> list[str]:
    dat = os.path.join(out_dir, "trajectory.dat")
    png = os.path.join(out_dir, "trajectory.png")
    geom = _scenario_geometry(trace)
    xs = trace.column("x")
    ys = trace.column("y")

    lines = ["# kind: trajectory", "# columns: x y", "# block: vehicle-path"]
    lines.extend(_fmt_row(x, y) for x, y in zip(xs, ys))
    lines.append("")
    fig, ax = plt.subplots(figsize=(9, 4))
    if geom is not None:
        obs_lines, rects, contours = _obstacle_blocks(geom)
        lines.extend(obs_lines)
        if geom["path"]:
            lines.append("# block: desired-path")
            lines.extend(_fmt_row(px, py) for px, py in geom["path"])
            lines.append("")
            pp = np.asarray(geom["path"])
            ax.plot(pp[:, 0], pp[:, 1], "--", color="0.5", label="desired path")
        for closed in rects:
            ax.fill(closed[:, 0], closed[:, 1], color="0.8", edgecolor="0.3")
        for poly in contours:
            ax.plot(poly[:, 0], poly[:, 1], color="tab:red", lw=1.0)
    if len(xs):
        ax.plot(xs, ys, color="tab:blue", label="vehicle")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    ax.set_title(f"trajectory: {trace.scenario_name or 'trace'}")
    _save_fig(fig, png)
    _write(dat, lines)
    return [dat, png]


def _export_steering(trace: SimTrace, out_dir: str) -> list[str]:
    dat = os.path.join(out_dir, "steering.dat")
    png = os.path.join(out_dir, "steering.png")
    t = trace.column("t")
    ref = trace.column("delta_ref")
    app = trace.column("delta_applied")
    fbl = trace.column("delta_fbl")

    lines = [
        "# kind: steering",
        "# columns: t delta_ref delta_applied delta_fbl",
        "# block: steering",
    ]
    lines.extend(_fmt_row(*row) for row in zip(t, ref, app, fbl))
    lines.append("")
    _write(dat, lines)

    deg = 180.0 / math.pi
    fig, ax = plt.subplots(figsize=(9, 3.2))
    if len(t):
        ax.plot(t, ref * deg, label="reference", color="0.4")
        ax.plot(t, app * deg, label="applied", color="tab:blue")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("steering [deg]")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    ax.set_title(f"steering: {trace.scenario_name or 'trace'}")
    _save_fig(fig, png)
    return [dat, png]


def _export_potential(trace: SimTrace, out_dir: str) -> list[str]:
    dat = os.path.join(out_dir, "potential.dat")
    png = os.path.join(out_dir, "potential.png")
    geom = _scenario_geometry(trace)
    alpha = geom["alpha"] if geom is not None else 1.0
    t = trace.column("t")
    p_fl = trace.column("p_fl")
    p_fr = trace.column("p_fr")

    lines = [
        "# kind: potential",
        f"# alpha: {alpha!r}",
        "# columns: t p_fl p_fr",
        "# block: potential",
    ]
    lines.extend(_fmt_row(*row) for row in zip(t, p_fl, p_fr))
    lines.append("")
    lines.append("# block: alpha-marker")
    if len(t):
        lines.append(_fmt_row(t[0], alpha))
        lines.append(_fmt_row(t[-1], alpha))
    lines.append("")
    _write(dat, lines)

    fig, ax = plt.subplots(figsize=(9, 3.2))
    if len(t):
        ax.plot(t, p_fl, label="front left", color="tab:blue")
        ax.plot(t, p_fr, label="front right", color="tab:orange")
    ax.axhline(alpha, color="tab:red", lw=1.0, label="bound")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("potential")
    ax.legend(loc="best")
    ax.set_title(f"edge potential: {trace.scenario_name or 'trace'}")
    _save_fig(fig, png)
    return [dat, png]


def _contour_lines_and_fig(
    rect: RectObstacle, orders: tuple[int, ...], samples: int = 256
):
    lines = ["# kind: ellipses", "# columns: x y"]
    fig, ax = plt.subplots(figsize=(6, 5))
    corners = rect.corners()
    closed = np.vstack([corners, corners[:1]])
    lines.append("# block: rectangle")
    lines.extend(_fmt_row(px, py) for px, py in closed)
    lines.append("")
    ax.fill(closed[:, 0], closed[:, 1], color="0.85", edgecolor="0.3")
    for n in orders:
        bound = bound_rectangle(rect, n)
        poly = bound.contour(0.0, samples)
        lines.append(f"# block: bound-n{n}")
        lines.extend(_fmt_row(px, py) for px, py in poly)
        lines.append("")
        ax.plot(poly[:, 0], poly[:, 1], lw=1.2, label=f"n = {n}")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    ax.set_title("rectangle bounds by power")
    return lines, fig


def _export_ellipses(trace: SimTrace, out_dir: str) -> list[str]:
    dat = os.path.join(out_dir, "ellipses.dat")
    png = os.path.join(out_dir, "ellipses.png")
    geom = _scenario_geometry(trace)
    if geom is None or not geom["obstacles"]:
        rect = RectObstacle(x=0.0, y=0.0, heading=0.0, length=4.6, width=1.8)
    else:
        rect = geom["obstacles"][0]
    lines, fig = _contour_lines_and_fig(rect, (2, 4, 6, 8))
    _write(dat, lines)
    _save_fig(fig, png)
    return [dat, png]


def export_contour_sheet(length: float, width: float, orders, out_dir: str) -> list[str]:
    """Standalone bound-contour sheet for a centered axis-aligned rectangle."""
    os.makedirs(out_dir, exist_ok=True)
    rect = RectObstacle(x=0.0, y=0.0, heading=0.0, length=length, width=width)
    lines, fig = _contour_lines_and_fig(rect, tuple(orders))
    dat = os.path.join(out_dir, "contours.dat")
    png = os.path.join(out_dir, "contours.png")
    _write(dat, lines)
    _save_fig(fig, png)
    written = [dat, png]
    _write_manifest(out_dir, "contours", written, extra={"orders": list(orders)})
    written.append(os.path.join(out_dir, "manifest.json"))
    return written


def _write_manifest(out_dir: str, kind: str, files: list[str], extra: dict | None = None):
    manifest = {
        "kind": kind,
        "files": sorted(os.path.basename(f) for f in files),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def export_plot_data(trace: SimTrace, kind: str, out_dir: str) -> list[str]:
    """Write the .dat/.png/manifest triple for one plot kind."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    os.makedirs(out_dir, exist_ok=True)
    exporter = {
        "trajectory": _export_trajectory,
        "steering": _export_steering,
        "potential": _export_potential,
        "ellipses": _export_ellipses,
    }[kind]
    written = exporter(trace, out_dir)
    _write_manifest(
        out_dir,
        kind,
        written,
        extra={"scenario": trace.scenario_name, "scenario_hash": trace.scenario_hash},
    )
    written.append(os.path.join(out_dir, "manifest.json"))
    return written
