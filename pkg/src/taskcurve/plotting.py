"""Accuracy-versus-complexity figures and their backing tables.

SVG output is deterministic: a fixed hash salt, glyphs rendered as
paths, and no embedded date, so rerunning a plot command produces
byte-identical files.
"""

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure

from taskcurve.error_model import ErrorModelParams, accuracy
from taskcurve.exceptions import DomainError

__all__ = ["PlotSeries", "build_series", "write_series_csv", "write_series_svg"]

CURVE_SAMPLES = 256

_SVG_RC = {
    "svg.hashsalt": "taskcurve",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
}


@dataclass(frozen=True)
class PlotSeries:
    """Measured points plus an optional fitted curve sampled for drawing."""

    point_c: tuple
    point_accuracy: tuple
    point_halfwidth: tuple
    curve_c: tuple
    curve_accuracy: tuple
    title: str = ""


def build_series(points, params: ErrorModelParams | None = None, title: str = "") -> PlotSeries:
    """Series for a point list, sampling the curve (when params are given)
    at CURVE_SAMPLES log-spaced c spanning the data's c range."""
    pts = sorted(points, key=lambda pt: pt.c)
    if not pts:
        raise DomainError("need at least one point to plot")
    curve_c = ()
    curve_a = ()
    if params is not None:
        lo = math.log(pts[0].c)
        hi = math.log(pts[-1].c)
        if hi > lo:
            grid = [
                math.exp(lo + (hi - lo) * i / (CURVE_SAMPLES - 1))
                for i in range(CURVE_SAMPLES)
            ]
            # exact endpoints: the curve must cover the data range
            grid[0] = float(pts[0].c)
            grid[-1] = float(pts[-1].c)
        else:
            grid = [float(pts[0].c)] * CURVE_SAMPLES
        curve_c = tuple(grid)
        curve_a = tuple(accuracy(params, c) for c in grid)
    return PlotSeries(
        point_c=tuple(pt.c for pt in pts),
        point_accuracy=tuple(pt.mean_accuracy for pt in pts),
        point_halfwidth=tuple(pt.ci_halfwidth for pt in pts),
        curve_c=curve_c,
        curve_accuracy=curve_a,
        title=title,
    )


def write_series_csv(series: PlotSeries, path) -> None:
    """Emit the plotted values: one row per data point, then one per
    curve sample (curve rows leave the half-width empty)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["row_type", "c", "accuracy", "ci_halfwidth"])
        for c, a, hw in zip(
            series.point_c, series.point_accuracy, series.point_halfwidth
        ):
            writer.writerow(["point", repr(float(c)), repr(a), repr(hw)])
        for c, a in zip(series.curve_c, series.curve_accuracy):
            writer.writerow(["curve", repr(c), repr(a), ""])


def write_series_svg(series: PlotSeries, path, *, log_x: bool = True) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(6.4, 4.4), dpi=100)
        ax = fig.add_subplot()
        if series.curve_c:
            ax.plot(
                series.curve_c,
                series.curve_accuracy,
                color="#1f77b4",
                linewidth=1.5,
                label="fit",
                zorder=1,
            )
        ax.errorbar(
            series.point_c,
            series.point_accuracy,
            yerr=series.point_halfwidth,
            fmt="o",
            color="#d62728",
            markersize=4,
            capsize=3,
            linewidth=1.0,
            label="data",
            zorder=2,
        )
        if log_x:
            ax.set_xscale("log")
        ax.set_ylim(-0.02, 1.05)
        ax.set_xlabel("problem complexity c")
        ax.set_ylabel("accuracy")
        if series.title:
            ax.set_title(series.title)
        ax.grid(True, which="both", alpha=0.25, linewidth=0.5)
        ax.legend(loc="best")
        fig.savefig(path, format="svg", metadata={"Date": None})
