"""Campaign artifacts: curves.csv, campaign.json, mse.svg, autocorr.svg.

curves.csv is the determinism-bearing artifact: float cells are written with
repr(), rows in (curve, point) order, so identical campaign results produce
byte-identical files.  The SVG plots are conveniences and carry no such
guarantee.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .campaign import CampaignConfig, CampaignResult
from .windows import circular_autocorrelation, make_window, padded_spectrum

CSV_COLUMNS = ("window", "snr_db", "mse_cells_sq", "mse_seconds_sq", "trials", "ci95")


def _jsonable(value):
    """Recursively convert dataclasses/arrays/complex to plain JSON types."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def environment_fingerprint() -> dict:
    import scipy

    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": _kernels.BACKEND,
        "platform": platform.platform(),
    }


def write_curves_csv(curves, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for curve in curves:
            for p in curve.points:
                writer.writerow(
                    [
                        curve.window_label,
                        repr(float(p.snr_db)),
                        repr(float(p.mse_cells_sq)),
                        repr(float(p.mse_seconds_sq)),
                        p.trials,
                        repr(float(p.ci95)),
                    ]
                )


def _plot_mse(curves, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "synclab"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for curve in curves:
        snr = [p.snr_db for p in curve.points]
        # log axis cannot show exact zeros; drop them rather than faking a floor
        mse = [p.mse_cells_sq if p.mse_cells_sq > 0 else np.nan for p in curve.points]
        ax.plot(snr, mse, marker="o", label=curve.window_label)
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("delay-cell MSE (cells$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_autocorr(window_kinds, length: int, k_pad: int, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "synclab"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n = length * k_pad
    lags = np.arange(-(n // 2), n - n // 2)
    for kind in window_kinds:
        rho = circular_autocorrelation(padded_spectrum(make_window(kind, length), k_pad))
        mag = np.abs(np.roll(rho, n // 2))
        mag = mag / mag.max()
        with np.errstate(divide="ignore"):
            ax.plot(lags, 20.0 * np.log10(mag), label=kind)
    ax.set_ylim(bottom=-80.0)
    ax.set_xlabel("lag (cells)")
    ax.set_ylabel("autocorrelation (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_reports(
    curves,
    out_dir,
    config: CampaignConfig | None = None,
    result: CampaignResult | None = None,
) -> dict[str, Path]:
    """Write all campaign artifacts into out_dir; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"curves": out / "curves.csv", "json": out / "campaign.json", "mse": out / "mse.svg"}
    write_curves_csv(curves, paths["curves"])

    doc = {
        "environment": environment_fingerprint(),
        "config": _jsonable(config) if config is not None else None,
        "curves": [
            {
                "window": c.window_label,
                "points": [_jsonable(p) for p in c.points],
            }
            for c in curves
        ],
    }
    if result is not None:
        doc["truth"] = _jsonable(result.truth)
        doc["failed_trials"] = result.failed_trials
        doc["total_trials"] = result.total_trials
        doc["trial_errors"] = list(result.errors)
    with open(paths["json"], "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _plot_mse(curves, paths["mse"])
    if config is not None:
        kinds = [w for w in config.windows]
        if kinds:
            paths["autocorr"] = out / "autocorr.svg"
            _plot_autocorr(kinds, config.scenario.ofdm.n_c, config.scenario.ofdm.k_pad,
                           paths["autocorr"])
    return paths
