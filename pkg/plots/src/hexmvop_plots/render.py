"""Renderers for the four CSV artifact kinds.

Read-only consumers of the documented schemas; the only computation beyond
plotting is the least-squares slope of the decay curves.  Figures are
deterministic: fixed styling, no timestamps in the image metadata.
"""
from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": "hexmvop-plot"}


class SchemaError(ValueError):
    pass


def _read_csv(path, columns):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    lines = [ln for ln in lines if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty")
    header = lines[0].split(",")
    if header != columns:
        raise SchemaError(f"{path}: header {header}, expected {columns}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        raise SchemaError(f"{path}: no data rows")
    return data


def render_zeros(in_csv, title=None):
    data = _read_csv(in_csv, ["re", "im"])
    fig, ax = plt.subplots(figsize=(6, 6))
    th = np.linspace(0, 2 * np.pi, 512)
    ax.plot(np.cos(th), np.sin(th), color="#888888", lw=1.0, zorder=1,
            label="|z| = 1")
    ax.scatter(data[:, 0], data[:, 1], s=18, color="#1f77b4", zorder=2,
               label=f"{len(data)} zeros")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(title or "zeros of det P_N")
    return fig


def render_density(in_csv, title=None):
    data = _read_csv(in_csv, ["theta", "density"])
    th, dens = data[:, 0], data[:, 1]
    mass = np.trapezoid(np.concatenate([dens, dens[:1]]),
                        np.concatenate([th, [th[0] + 2 * np.pi]]))
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(111, projection="polar")
    ax.plot(np.concatenate([th, th[:1]]), np.concatenate([dens, dens[:1]]),
            color="#d62728")
    ax.set_title(title or "circle density")
    ax.annotate(f"mass {mass:.3f}", xy=(0.02, 0.02),
                xycoords="figure fraction", fontsize=9)
    return fig


def render_decay(in_csv, title=None):
    data = _read_csv(in_csv, ["N", "z_re", "z_im", "error"])
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    slopes = []
    for key in sorted({(r[1], r[2]) for r in data}):
        rows = data[(data[:, 1] == key[0]) & (data[:, 2] == key[1])]
        rows = rows[np.argsort(rows[:, 0])]
        Ns, errs = rows[:, 0], rows[:, 3]
        label = f"z = {key[0]:g}{key[1]:+g}i"
        ax.semilogy(Ns, errs, "o-", label=label)
        good = errs > 0
        if good.sum() >= 2:
            slope = np.polyfit(Ns[good], np.log(errs[good]), 1)[0]
            slopes.append(slope)
    ax.set_xlabel("N")
    ax.set_ylabel("asymptotic error")
    ax.legend(fontsize=8)
    note = f"fitted slope {np.mean(slopes):+.3f}" if slopes else "no fit"
    ax.annotate(note, xy=(0.02, 0.02), xycoords="figure fraction", fontsize=9)
    ax.set_title(title or "strong-asymptotics error decay")
    return fig


def render_heatmap(in_csv, title=None, lozenge_type=0):
    data = _read_csv(in_csv, ["col", "row", "lozenge_type", "probability"])
    sel = data[data[:, 2] == lozenge_type]
    if sel.size == 0:
        raise SchemaError(f"no rows with lozenge_type={lozenge_type}")
    cols = sel[:, 0].astype(int)
    rows = sel[:, 1].astype(int)
    grid = np.full((rows.max() - rows.min() + 1, cols.max() - cols.min() + 1),
                   np.nan)
    grid[rows - rows.min(), cols - cols.min()] = sel[:, 3]
    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.imshow(grid, origin="lower", cmap="viridis", vmin=0.0, vmax=1.0,
                   extent=[cols.min() - 0.5, cols.max() + 0.5,
                           rows.min() - 0.5, rows.max() + 0.5])
    fig.colorbar(im, ax=ax, label="probability")
    ax.set_xlabel("level")
    ax.set_ylabel("height")
    names = {0: "path occupation", 1: "horizontal-step lozenge",
             2: "diagonal-step lozenge", 3: "empty lozenge"}
    ax.set_title(title or names.get(lozenge_type, "density"))
    return fig


RENDERERS = {
    "zeros": render_zeros,
    "density": render_density,
    "decay": render_decay,
    "heatmap": render_heatmap,
}


def render(kind, in_csv, out_png, title=None, lozenge_type=0):
    if kind not in RENDERERS:
        raise SchemaError(f"unknown plot kind {kind!r}")
    if kind == "heatmap":
        fig = render_heatmap(in_csv, title=title, lozenge_type=lozenge_type)
    else:
        fig = RENDERERS[kind](in_csv, title=title)
    fig.savefig(out_png, dpi=110, metadata=_META)
    plt.close(fig)
    return out_png
