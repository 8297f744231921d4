"""Deterministic SVG plots of result CSVs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import read_csv  # noqa: E402

SCHEMAS: dict[str, tuple[str, ...]] = {
    "paths": ("t", "S", "S_check", "h", "dist2_P", "absorbed"),
    "triangle": ("t", "term1", "term2", "term3"),
    "triangle4": ("t", "term1", "term2", "term3", "term4"),
    "collapse": ("t", "mean_h", "se_h", "bound", "term1", "term2", "term3"),
    "means": ("t", "mean_S", "se_S", "mean_S_check", "se_S_check", "mean_h"),
    "moments": ("t", "mean_S", "var_S", "het_S", "mean_fw", "var_fw", "het_fw",
                "exact_mean", "exact_var", "exact_het", "ks"),
    "fixation": ("N", "replica", "outcome", "time"),
    "fw_paths": ("path_id", "t", "s"),
    "snapshots": ("t", "k", "x_k"),
    "probe": ("N", "slope", "predicted"),
    "atoms": ("k", "rate", "prob"),
    "environments": ("N", "replica", "D_N", "key_ratio", "classes"),
}


class PlotSchemaError(ValueError):
    """The CSV header does not match the requested plot kind."""


def detect_kind(header) -> str:
    for kind, cols in SCHEMAS.items():
        if tuple(header) == cols:
            return kind
    raise PlotSchemaError(f"unrecognized CSV header {','.join(header)}")


def _lines(ax, x, ys: dict, xlabel: str, ylabel: str) -> None:
    for label, y in ys.items():
        gid = "".join(c if c.isalnum() else "_" for c in label.lower())
        ax.plot(x, y, label=label, linewidth=1.2, gid=gid)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if x.size:
        ax.legend(loc="best")


def _draw(ax, kind: str, cols: dict[str, np.ndarray]) -> None:
    if kind == "paths":
        _lines(ax, cols["t"], {"S": cols["S"], "S_check": cols["S_check"]}, "t", "mass")
    elif kind in ("triangle", "triangle4"):
        terms = {c: cols[c] for c in SCHEMAS[kind][1:]}
        _lines(ax, cols["t"], terms, "t", "distance")
    elif kind == "collapse":
        t, h, se = cols["t"], cols["mean_h"], cols["se_h"]
        ax.fill_between(t, h - 2 * se, h + 2 * se, alpha=0.25, linewidth=0)
        _lines(ax, t, {"mean h": h, "Lyapunov bound": cols["bound"]}, "t", "h")
    elif kind == "means":
        _lines(ax, cols["t"], {"mean S": cols["mean_S"], "mean S_check": cols["mean_S_check"]},
               "t", "mass")
    elif kind == "moments":
        _lines(ax, cols["t"], {"particles": cols["het_S"], "diffusion": cols["het_fw"],
                               "exact": cols["exact_het"]}, "t", "E[S(1-S)]")
    elif kind == "fixation":
        for code, label in ((0, "fixed_0"), (1, "fixed_1"), (2, "timeout")):
            sel = cols["outcome"] == code
            ax.scatter(cols["replica"][sel], cols["time"][sel], s=4, label=label)
        ax.set_xlabel("replica")
        ax.set_ylabel("absorption time")
        if cols["time"].size:
            ax.legend(loc="best")
    elif kind == "fw_paths":
        for pid in np.unique(cols["path_id"]):
            sel = cols["path_id"] == pid
            ax.plot(cols["t"][sel], cols["s"][sel], linewidth=0.6)
        ax.set_xlabel("t")
        ax.set_ylabel("s")
    elif kind == "snapshots":
        for k in np.unique(cols["k"]):
            sel = cols["k"] == k
            ax.plot(cols["t"][sel], cols["x_k"][sel], label=f"class {int(k)}")
        ax.set_xlabel("t")
        ax.set_ylabel("x_k")
    elif kind == "probe":
        ax.scatter(cols["N"], cols["slope"], label="measured")
        ax.scatter(cols["N"], cols["predicted"], marker="x", label="predicted")
        ax.set_xlabel("N")
        ax.set_ylabel("Var[S(t)]/t")
    elif kind == "atoms":
        ax.scatter(cols["rate"], cols["prob"], s=6)
        ax.set_xlabel("rate")
        ax.set_ylabel("probability")
    elif kind == "environments":
        ax.scatter(cols["replica"], cols["D_N"], s=8)
        ax.set_xlabel("replica")
        ax.set_ylabel("D_N")


def emit_plot(csv_path: str | Path, kind: str = "auto", out_path: str | Path | None = None) -> Path:
    """Render ``csv_path`` to SVG (default: same name, ``.svg`` suffix) and return the SVG path."""
    csv_path = Path(csv_path)
    header, data = read_csv(csv_path)
    if kind == "auto":
        kind = detect_kind(header)
    elif kind not in SCHEMAS:
        raise PlotSchemaError(f"unknown plot kind {kind!r}")
    elif tuple(header) != SCHEMAS[kind]:
        raise PlotSchemaError(f"{csv_path}: header {','.join(header)} does not match {kind}")
    cols = {name: data[:, i] for i, name in enumerate(header)}
    out_path = Path(out_path) if out_path is not None else csv_path.with_suffix(".svg")
    with plt.rc_context({"svg.hashsalt": "moranrr", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        try:
            _draw(ax, kind, cols)
            ax.set_title(f"{csv_path.name}")
            fig.tight_layout()
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return out_path
