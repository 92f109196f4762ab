"""Static SVG figures from a result set on disk.

Figures are drawn through matplotlib's SVG backend with a fixed hash salt and
no date stamp, and all heatmaps are vector quads (``pcolormesh``), so the same
inputs always give the same bytes and no image codec is involved.
"""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from ..errors import MissingPayload
from . import io
from .config import Axis
from .sweep import load_manifest, write_manifest

RC = {
    "svg.hashsalt": "srlaser",
    "svg.fonttype": "path",
    "font.size": 9,
}
PHASE_CODE = {"Normal": 0, "SuperradiantLasing": 1, "Bistable": 2}
FIG_DIR = "figures"


def _save(fig: Figure, path: Path) -> None:
    FigureCanvasSVG(fig)
    with matplotlib.rc_context(RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _new(width=5.0, height=3.6, ncols=1) -> Figure:
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(width * ncols, height), layout="constrained")
    return fig


def _float(v):
    return float(v) if v not in ("", None) else float("nan")


def _axes(manifest) -> List[Axis]:
    return [Axis(**a) for a in manifest["config"]["axes"]]


def _grid_plot(fig, ax, axes, rows, column, label, cmap="viridis", discrete=False):
    """Heatmap over the first two axes (other axes at their first value), or a line."""
    vals = np.array([_float(r[column]) if not discrete else PHASE_CODE.get(r[column], np.nan)
                     for r in rows])
    counts = [a.count for a in axes]
    if len(axes) >= 2 and counts[0] > 1 and counts[1] > 1:
        arr = vals.reshape(counts)
        arr = arr[(slice(None), slice(None)) + (0,) * (len(axes) - 2)]
        x, y = np.array(axes[0].values(), float), np.array(axes[1].values(), float)
        kw = dict(cmap=cmap, shading="nearest")
        if discrete:
            kw.update(vmin=-0.5, vmax=2.5, cmap=matplotlib.colormaps["viridis"].resampled(3))
        m = ax.pcolormesh(x, y, arr.T, **kw)
        cb = fig.colorbar(m, ax=ax, label=label)
        if discrete:
            cb.set_ticks([0, 1, 2], labels=["I normal", "II lasing", "III bistable"])
        ax.set_xlabel(axes[0].name)
        ax.set_ylabel(axes[1].name)
        for a, setter in ((axes[0], ax.set_xscale), (axes[1], ax.set_yscale)):
            if a.scale == "log":
                setter("log")
    else:
        first = next((a for a in axes if a.count > 1), axes[0] if axes else None)
        if first is None:
            ax.plot([0], vals[:1], "o")
        else:
            n = first.count
            stride = int(np.prod([a.count for a in axes[axes.index(first) + 1:]])) if axes else 1
            ax.plot(first.values(), vals[: n * stride: stride], "-o", ms=2)
            ax.set_xlabel(first.name)
            if first.scale == "log":
                ax.set_xscale("log")
        ax.set_ylabel(label)


def _payload(out: Path, rec: dict) -> dict:
    rel = rec.get("payload")
    if rel is None:
        raise MissingPayload(f"record {rec['task']}#{rec['index']} has no payload")
    path = out / rel
    if not path.exists():
        raise MissingPayload(f"sidecar {rel} is missing")
    return io.read_json(path)


def _title(rec) -> str:
    p = rec["params"]
    return "N=%d  w=%.4g  eps=%.4g  gsqrtN=%.4g" % (p["n_spins"], p["pump_w"], p["epsilon"], p["g_sqrt_n"])


def fig_phase_diagram(out, manifest, rows, path):
    fig = _new(ncols=2)
    ax1, ax2 = fig.subplots(1, 2)
    axes = _axes(manifest)
    _grid_plot(fig, ax1, axes, rows, "photons_per_n", "|a|^2 / N (lasing branch)")
    _grid_plot(fig, ax2, axes, rows, "phase", "phase", discrete=True)
    _save(fig, path)


def fig_squeeze_map(out, manifest, rows, path):
    fig = _new()
    _grid_plot(fig, fig.subplots(), _axes(manifest), rows, "zeta0_db", "zeta(0) [dB]", cmap="magma")
    _save(fig, path)


def fig_spectra(out, rec, path):
    d = _payload(out, rec)
    fig = _new()
    ax = fig.subplots()
    ax.plot(d["omega"], d["s_plus"], label="S+")
    ax.plot(d["omega"], d["s_minus"], label="S-")
    ax.plot(d["omega"], d["s_ref"], "k--", lw=0.8, label="chi = 0 reference")
    if "s_eps0" in d:
        ax.plot(d["omega"], d["s_eps0"], "k-.", lw=0.8, label="epsilon = 0 laser")
    ax.set_yscale("log")
    ax.set_xlabel("omega")
    ax.set_ylabel("S(omega)")
    ax.set_title(_title(rec))
    ax.legend()
    _save(fig, path)


def fig_hysteresis(out, rec, path):
    d = _payload(out, rec)
    fig = _new()
    ax = fig.subplots()
    ax.plot(d["up"]["w"], d["up"]["jz_per_n"], "-o", ms=2, label="pump up")
    ax.plot(d["down"]["w"], d["down"]["jz_per_n"], "-s", ms=2, label="pump down")
    ax.set_xlabel("w")
    ax.set_ylabel("Jz / N")
    ax.set_title(_title(rec))
    ax.legend()
    _save(fig, path)


def fig_exact(out, rec, path):
    d = _payload(out, rec)
    fig = _new(ncols=2)
    ax1, ax2 = fig.subplots(1, 2)
    pmf = np.asarray(d["photon_pmf"], float)
    ax1.bar(np.arange(pmf.size), pmf, width=1.0)
    ax1.set_xlabel("photon number n")
    ax1.set_ylabel("P(n)")
    m = np.asarray(d["two_m_values"], float) / 2
    ax2.bar(m, d["spin_pmf"], width=1.0)
    ax2.set_xlabel("M")
    ax2.set_ylabel("P_M")
    fig.suptitle(_title(rec))
    _save(fig, path)


def fig_q(out, rec, path):
    d = _payload(out, rec)
    snaps = d["snapshots"]
    fig = _new(width=3.2, height=3.2, ncols=len(snaps))
    axs = np.atleast_1d(fig.subplots(1, len(snaps)))
    for ax, s in zip(axs, snaps):
        ax.pcolormesh(s["x"], s["p"], np.asarray(s["q"], float), shading="nearest", cmap="viridis")
        ax.set_aspect("equal")
        ax.set_title("t = %.4g" % s["time"])
        ax.set_xlabel("x")
    axs[0].set_ylabel("p")
    _save(fig, path)


PER_RECORD = {
    "spectra": fig_spectra,
    "hysteresis": fig_hysteresis,
    "exact-steady-state": fig_exact,
    "q-snapshots": fig_q,
}
GRID = {"phase-diagram": fig_phase_diagram, "squeeze-map": fig_squeeze_map}


def emit_figures(out) -> List[str]:
    """Write SVGs for every task in the result set at ``out`` and update the manifest.

    Raises
    ------
    MissingPayload
        When a record names a sidecar file that does not exist.
    """
    out = Path(out)
    manifest = load_manifest(out)
    (out / FIG_DIR).mkdir(exist_ok=True)
    written = []
    for task in manifest["config"]["tasks"]:
        recs = [r for r in manifest["records"] if r["task"] == task]
        if task in GRID:
            rows = io.read_csv(out / f"{task}.csv")
            rel = f"{FIG_DIR}/{task}.svg"
            GRID[task](out, manifest, rows, out / rel)
            written.append(rel)
        else:
            for rec in recs:
                if rec["status"] != "ok":
                    continue
                rel = f"{FIG_DIR}/{task}-{rec['index']:05d}.svg"
                PER_RECORD[task](out, rec, out / rel)
                written.append(rel)
    for stale in (out / FIG_DIR).glob("*"):
        if f"{FIG_DIR}/{stale.name}" not in written:
            stale.unlink()
    data_files = [f for f in manifest["files"] if not f.startswith(FIG_DIR + "/")]
    write_manifest(out, manifest["config"], manifest["records"], data_files + written, figures=written)
    return written
