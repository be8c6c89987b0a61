"""Figure rendering for experiment outputs.

Figures are written next to the delimited data as PNG files; the Agg
backend keeps everything headless. Each renderer takes the rows the CLI
just wrote and returns the figure path.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, f"{name}.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_christoffel(rows, out_dir):
    fig, ax = plt.subplots(figsize=(6, 4))
    ladder = sorted({r["L"] for r in rows})
    for L in ladder:
        pts = [(r["xi"], r["L_lambda"]) for r in rows if r["L"] == L]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3,
                label=f"L = {L:g}")
    ref = sorted({(r["xi"], r["reference"]) for r in rows})
    ax.plot([p[0] for p in ref], [p[1] for p in ref], "k--", lw=1,
            label="limit")
    ax.set_xlabel(r"$\xi$")
    ax.set_ylabel(r"$L\,\lambda_L(\xi)$")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "christoffel")


def render_universality(grid, out_dir):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    extent = [grid.z_grid.real.min(), grid.z_grid.real.max(),
              grid.w_grid.real.min(), grid.w_grid.real.max()]
    im0 = axes[0].imshow(np.real(grid.ratio), origin="lower", extent=extent,
                         aspect="auto", cmap="RdBu_r")
    axes[0].set_title("rescaled kernel ratio")
    fig.colorbar(im0, ax=axes[0])
    im1 = axes[1].imshow(np.abs(grid.ratio - grid.sinc_ref), origin="lower",
                         extent=extent, aspect="auto", cmap="magma")
    axes[1].set_title("|ratio - sinc|")
    fig.colorbar(im1, ax=axes[1])
    for ax in axes:
        ax.set_xlabel("z")
        ax.set_ylabel("w")
    return _save(fig, out_dir, f"universality_L{grid.L:g}")


def render_clock(rows, out_dir):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    js = [r["j"] for r in rows]
    ax.axhline(1.0, color="k", lw=1, ls="--")
    ax.plot(js, [r["spacing"] for r in rows], "o")
    ax.set_xlabel("pair index j")
    ax.set_ylabel("normalized spacing")
    return _save(fig, out_dir, "clock_spacing")


def render_martin(rows, out_dir):
    fig, axes = plt.subplots(2, 1, figsize=(6, 5.4), sharex=True)
    xi = [r["xi"] for r in rows]
    f = [r["f_E"] for r in rows]
    m = [r["M_E"] for r in rows]
    axes[0].plot(xi, f, ".", ms=3)
    axes[0].set_ylabel("density $f_E$")
    axes[0].set_yscale("log")
    axes[1].plot(xi, m, ".", ms=3)
    axes[1].set_ylabel("$M_E$")
    axes[1].set_xlabel(r"$\xi$")
    return _save(fig, out_dir, "martin")


def render_kernel(rows, out_dir):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.semilogy([r["idx"] for r in rows],
                [max(r["rel_disagreement"], 1e-18) for r in rows], "o", ms=3)
    ax.set_xlabel("tuple index")
    ax.set_ylabel("max pairwise relative disagreement")
    return _save(fig, out_dir, "kernel_methods")


def render_regularity(mean_rows, growth_rows, out_dir):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot([r["L"] for r in mean_rows],
                 [r["cesaro_mean"] for r in mean_rows], "o-")
    axes[0].set_xlabel("L")
    axes[0].set_ylabel("Cesaro mean of V")
    axes[1].plot([r["x"] for r in growth_rows],
                 [r["rate"] for r in growth_rows], "o-", ms=3)
    axes[1].set_xlabel("x")
    axes[1].set_ylabel(r"$x^{-1}\log|v(x,\xi)|$")
    return _save(fig, out_dir, "regularity")
