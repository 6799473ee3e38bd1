"""Command-line entry points.

Exit codes: 0 success, 1 configuration/usage errors, 2 campaign aborted
because more than 1% of trials failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .campaign import CampaignError, load_campaign, run_campaign
from .channel import synth_snapshot
from .ddmap import load_map, transform_fft2d
from .estimator import cross_correlate, estimate_offsets, extract_fingerprint, locate_static_row
from .presets import PRESETS
from .reports import emit_reports
from .scenario import derive_grids, load_scenario
from .theory import MeanSpectrum, mse_theoretical, optimal_spectrum, spectrum_from_window
from .windows import WINDOW_KINDS, mainlobe_metrics, make_window, padded_spectrum


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="sync-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Monte Carlo MSE campaign over SNR and windows")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="campaign config file (.toml or .json)")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in campaign config")
    run.add_argument("--out", type=Path, help="report directory (overrides config output_dir)")
    run.add_argument("--seed", type=int, help="override master seed")
    run.add_argument("--trials", type=int, help="override trials per point")
    run.add_argument("--threads", type=int, help="override worker threads")

    theory = sub.add_parser("theory", help="peak probabilities and MSE of a mean spectrum")
    theory.add_argument("--kn-c", type=int, required=True, help="number of delay cells")
    theory.add_argument("--sigma-bar-sq", type=float, required=True, help="per-cell noise variance")
    theory.add_argument("--target", type=float, required=True, help="drift location in cells")
    theory.add_argument(
        "--source",
        default="onehot",
        help="onehot | from-window:<kind> | from-file:<path>",
    )
    theory.add_argument("--k-pad", type=int, default=4, help="padding for from-window sources")
    theory.add_argument("--out", type=Path, help="write JSON here instead of stdout")

    windows = sub.add_parser("windows", help="window metrics CSV and autocorrelation plot")
    windows.add_argument("--length", type=int, default=64)
    windows.add_argument("--k-pad", type=int, default=4)
    windows.add_argument("--kinds", nargs="+", default=list(WINDOW_KINDS), choices=WINDOW_KINDS)
    windows.add_argument("--out", type=Path, required=True, help="output directory")

    est = sub.add_parser("estimate", help="drift estimate from two map dumps or a scenario")
    est.add_argument("--ref", type=Path, help="reference delay-Doppler map dump")
    est.add_argument("--new", dest="new_map", type=Path, help="later delay-Doppler map dump")
    est.add_argument("--scenario", type=Path, help="scenario config; frames are synthesized")
    est.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    return parser


def _emit_json(doc: dict, out: Path | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_run(args) -> int:
    try:
        if args.config is not None:
            config = load_campaign(args.config)
        else:
            config = PRESETS[args.preset]()
        updates = {}
        if args.seed is not None:
            updates["master_seed"] = args.seed
        if args.trials is not None:
            updates["trials_per_point"] = args.trials
        if args.threads is not None:
            updates["threads"] = args.threads
        if args.out is not None:
            updates["output_dir"] = str(args.out)
        if updates:
            config = dataclasses.replace(config, **updates)
        if config.output_dir is None:
            raise ValueError("no output directory: pass --out or set output_dir")
    except (OSError, ValueError, KeyError) as exc:
        print(f"sync-lab run: config error: {exc}", file=sys.stderr)
        return 1

    try:
        result = run_campaign(config)
    except CampaignError as exc:
        print(f"sync-lab run: {exc}", file=sys.stderr)
        return 2
    paths = emit_reports(result.curves, config.output_dir, config=config, result=result)
    for curve in result.curves:
        worst = max(p.mse_cells_sq for p in curve.points)
        print(f"{curve.window_label}: {len(curve.points)} SNR points, max MSE {worst:.4g} cells^2")
    print(f"reports: {', '.join(str(p) for p in paths.values())}")
    return 0


def _theory_spectrum(args) -> MeanSpectrum:
    source = args.source
    if source == "onehot":
        return MeanSpectrum(
            values=optimal_spectrum(args.target, args.kn_c),
            sigma_bar_sq=args.sigma_bar_sq,
            target_index=args.target,
        )
    if source.startswith("from-window:"):
        kind = source.split(":", 1)[1]
        if args.kn_c % args.k_pad:
            raise ValueError("kn-c must be divisible by k-pad for window sources")
        win = make_window(kind, args.kn_c // args.k_pad)
        return spectrum_from_window(win, args.k_pad, args.target, args.sigma_bar_sq)
    if source.startswith("from-file:"):
        path = Path(source.split(":", 1)[1])
        if path.suffix == ".json":
            values = np.asarray(json.loads(path.read_text()), dtype=np.float64)
        else:
            values = np.loadtxt(path, dtype=np.float64)
        if values.size != args.kn_c:
            raise ValueError(f"spectrum file has {values.size} cells, expected {args.kn_c}")
        return MeanSpectrum(values=values, sigma_bar_sq=args.sigma_bar_sq, target_index=args.target)
    raise ValueError(f"unknown spectrum source {source!r}")


def _cmd_theory(args) -> int:
    try:
        spectrum = _theory_spectrum(args)
    except (OSError, ValueError) as exc:
        print(f"sync-lab theory: {exc}", file=sys.stderr)
        return 1
    result = mse_theoretical(spectrum)
    _emit_json(
        {
            "kn_c": args.kn_c,
            "sigma_bar_sq": args.sigma_bar_sq,
            "target": args.target,
            "source": args.source,
            "probabilities": [float(p) for p in result.probabilities],
            "mse": result.mse,
        },
        args.out,
    )
    return 0


def _cmd_windows(args) -> int:
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = []
        for kind in args.kinds:
            metrics = mainlobe_metrics(padded_spectrum(make_window(kind, args.length), args.k_pad))
            rows.append((kind, metrics))
        csv_path = out / "windows.csv"
        with open(csv_path, "w") as fh:
            fh.write("window,mainlobe_width_bins,null_to_null_bins,peak_sidelobe_db\n")
            for kind, m in rows:
                fh.write(
                    f"{kind},{m.mainlobe_width_bins!r},{m.null_to_null_bins!r},{m.peak_sidelobe_db!r}\n"
                )
        from .reports import _plot_autocorr

        _plot_autocorr(args.kinds, args.length, args.k_pad, out / "autocorr.svg")
    except (OSError, ValueError) as exc:
        print(f"sync-lab windows: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {csv_path} and {out / 'autocorr.svg'}")
    return 0


def _cmd_estimate(args) -> int:
    try:
        if args.ref is not None or args.new_map is not None:
            if args.ref is None or args.new_map is None:
                raise ValueError("--ref and --new must be given together")
            ref_map = load_map(args.ref)
            new_map = load_map(args.new_map)
            grid = ref_map.grid
        elif args.scenario is not None:
            scn = load_scenario(args.scenario)
            grid = derive_grids(scn.ofdm)
            rect_g = make_window("rectangular", scn.ofdm.g_symbols)
            rect_nc = make_window("rectangular", scn.ofdm.n_c)
            ref_map = transform_fft2d(
                synth_snapshot(scn, frame_id=0), rect_g, rect_nc, scn.ofdm.k_pad, grid=grid
            )
            drifted = scn.drifted()
            new_map = transform_fft2d(
                synth_snapshot(drifted, frame_id=1), rect_g, rect_nc, scn.ofdm.k_pad, grid=grid
            )
        else:
            raise ValueError("need either --ref/--new dumps or --scenario")
        k0 = locate_static_row(ref_map)
        corr = cross_correlate(new_map, extract_fingerprint(ref_map, k0))
        est = estimate_offsets(corr, grid, k0)
    except (OSError, ValueError) as exc:
        print(f"sync-lab estimate: {exc}", file=sys.stderr)
        return 1
    _emit_json(
        {
            "row_shift": est.row_shift,
            "col_shift": est.col_shift,
            "cfo_drift_hz": est.cfo_drift_hz,
            "to_drift_s": est.to_drift_s,
            "peak_magnitude": est.peak_magnitude,
            "peak_to_median_ratio": est.peak_to_median_ratio,
        },
        args.out,
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "theory": _cmd_theory,
        "windows": _cmd_windows,
        "estimate": _cmd_estimate,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
