"""Report output: delimited tables, JSON summaries and rendered figures.

CSV files carry full double precision (17 significant digits) and are
byte-deterministic for identical inputs.  Figures are rendered with the Agg
backend next to the tables they illustrate; pass render=False to skip them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .spectrum import CountingTable, DiscreteSpectrum


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_json(path, payload: dict) -> Path:
    path = Path(path)

    def default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, (np.bool_,)):
            return bool(obj)
        raise TypeError("cannot serialize %r" % type(obj))

    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=default) + "\n")
    return path


def write_eigenvalue_csv(path, spectrum: DiscreteSpectrum) -> Path:
    path = Path(path)
    trusted = spectrum.trusted()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "lambda", "trusted"])
        for i, (lam, t) in enumerate(zip(spectrum.eigenvalues, trusted)):
            w.writerow([i, _fmt(lam), int(t)])
    return path


def write_counting_csv(path, table: CountingTable) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "N", "trusted"])
        for lam, n, t in zip(table.lam, table.counts, table.trusted):
            w.writerow([_fmt(lam), int(n), int(t)])
    return path


def write_residual_csv(path, comparison: dict) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "residual", "residual_over_lambda2"])
        for lam, r, r2 in zip(
            comparison["lam"], comparison["residual"], comparison["residual_over_lam2"]
        ):
            w.writerow([_fmt(lam), _fmt(r), _fmt(r2)])
    return path


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def render_analysis_figure(path, result) -> Path:
    """Field panel: torsion slice, spinor components along x3, weight profile."""
    path = Path(path)
    from . import geometry

    n = result.grid
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))

    if result.pauli is not None:
        torsion = geometry.axial_torsion(result.frame, result.metric, n)
        im = axes[0, 0].imshow(torsion[:, :, 0].T, origin="lower", extent=[0, 2 * np.pi] * 2,
                               cmap="RdBu_r")
        fig.colorbar(im, ax=axes[0, 0], shrink=0.85)
        axes[0, 0].set_title("axial torsion, x3 = 0 slice")
        axes[0, 0].set_xlabel("x1")
        axes[0, 0].set_ylabel("x2")

        x3 = 2 * np.pi * np.arange(n) / n
        xi = result.spinor.values[0, 0, :, :]
        axes[0, 1].plot(x3, xi[:, 0].real, label="Re xi1")
        axes[0, 1].plot(x3, xi[:, 0].imag, label="Im xi1")
        axes[0, 1].plot(x3, np.abs(xi[:, 1]), label="|xi2|")
        axes[0, 1].set_title("spinor along the x3 axis")
        axes[0, 1].set_xlabel("x3")
        axes[0, 1].legend(fontsize=8)

        axes[1, 0].plot(x3, result.spinor.norm()[0, 0, :])
        axes[1, 0].set_title("weight |xi| along the x3 axis")
        axes[1, 0].set_xlabel("x3")

    g = result.metric.contravariant_grid(n)
    eig = np.linalg.eigvalsh(g)[..., 0]
    im = axes[1, 1].imshow(eig[:, :, 0].T, origin="lower", extent=[0, 2 * np.pi] * 2,
                           cmap="viridis")
    fig.colorbar(im, ax=axes[1, 1], shrink=0.85)
    axes[1, 1].set_title("smallest metric eigenvalue, x3 = 0")
    axes[1, 1].set_xlabel("x1")
    axes[1, 1].set_ylabel("x2")

    fig.suptitle(
        "charge %+d   S = %.6g   a = %.6g   b = %.6g"
        % (result.charge, result.action, result.coeff_a, result.coeff_b_action)
    )
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_spectrum_figure(path, spectrum: DiscreteSpectrum, counting: CountingTable,
                           comparison: dict | None) -> Path:
    path = Path(path)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))

    eigs = spectrum.eigenvalues
    trusted = spectrum.trusted()
    axes[0].plot(np.arange(len(eigs))[trusted], eigs[trusted], ".", ms=3, label="trusted")
    axes[0].plot(np.arange(len(eigs))[~trusted], eigs[~trusted], ".", ms=2, color="0.7",
                 label="beyond trust window")
    axes[0].axhline(spectrum.trust_radius, color="k", lw=0.6, ls="--")
    axes[0].axhline(-spectrum.trust_radius, color="k", lw=0.6, ls="--")
    axes[0].set_xlabel("index")
    axes[0].set_ylabel("eigenvalue")
    axes[0].set_title("Galerkin spectrum (M = %d)" % spectrum.M)
    axes[0].legend(fontsize=8)

    axes[1].step(counting.lam, counting.counts, where="post", label="N(lambda)")
    if comparison is not None:
        lam = np.linspace(counting.lam.min(), counting.lam.max(), 200)
        axes[1].plot(lam, comparison["a"] * lam**3 + comparison["b"] * lam**2, "--",
                     label="a lam^3 + b lam^2")
    axes[1].set_xlabel("lambda")
    axes[1].set_ylabel("count")
    axes[1].set_title("counting function")
    axes[1].legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_counting_figure(path, table: CountingTable, comparison: dict) -> Path:
    path = Path(path)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))

    axes[0].step(table.lam, table.counts, where="post", label="N(lambda)")
    lam = np.linspace(max(table.lam.min(), 1e-3), table.lam.max(), 400)
    axes[0].plot(lam, comparison["a"] * lam**3 + comparison["b"] * lam**2, "--",
                 label="a lam^3 + b lam^2")
    axes[0].set_xlabel("lambda")
    axes[0].set_ylabel("count")
    axes[0].set_title("exactly solvable counting function")
    axes[0].legend(fontsize=8)

    axes[1].plot(table.lam, comparison["residual_over_lam2"], ".", ms=3)
    lo, hi = comparison["window"]
    axes[1].axvspan(lo, hi, color="orange", alpha=0.15, label="window")
    axes[1].axhline(comparison["window_mean"], color="r", lw=0.8,
                    label="window mean %.3g" % comparison["window_mean"])
    axes[1].set_xlabel("lambda")
    axes[1].set_ylabel("(N - a lam^3 - b lam^2) / lam^2")
    axes[1].set_title("residual, growth exponent %.2f" % comparison["growth_exponent"])
    axes[1].legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def comparison_summary(comparison: dict | None) -> dict | None:
    if comparison is None:
        return None
    return {
        "a": comparison["a"],
        "b": comparison["b"],
        "window": list(comparison["window"]),
        "window_mean_residual_over_lambda2": comparison["window_mean"],
        "fit_window": list(comparison["fit_window"]),
        "growth_exponent": comparison["growth_exponent"],
    }
