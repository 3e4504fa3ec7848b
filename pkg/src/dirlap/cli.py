"""Command-line interface.

Subcommands: sample, fit, fit-mixture, separate, eval, lut.  Every run
writes its fully resolved configuration next to its outputs (inside the
JSON artifacts or as a sidecar), so results are reproducible from the
files alone.  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio_io import read_mixture, write_wav
from .dld import AngularDataset, DldParams, FitConfig, fit_dld
from .metrics import bss_scores
from .mixture import fit_mixture
from .sampling import sample_dld, spherical_to_unit
from .separation import MixtureSignals, SeparationConfig, separate
from .special import DEFAULT_GRID_SIZE, KLookupTable, build_k_lookup

CACHE_ENV = "DIRLAP_CACHE_DIR"


def _nonneg_float(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _angle_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad angle list {text!r}") from exc


def _ratio_float(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def _fit_config(args):
    return FitConfig(
        eta=args.eta,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        k_init=args.k_init,
        restarts=getattr(args, "restarts", 0),
    )


def cmd_sample(args):
    mean = spherical_to_unit(np.asarray(args.mean_angles, dtype=float), args.convention)
    if len(mean) != args.p:
        raise ValueError(
            f"--mean-angles gives a {len(mean)}-dimensional mean, but --p is {args.p}"
        )
    params = DldParams(mean=mean, k=args.k, p=args.p)
    data = sample_dld(params, args.n, args.seed, blocks=args.blocks)
    out = Path(args.out)
    data.to_csv(out)
    sidecar = {
        "command": "sample",
        "p": args.p,
        "k": args.k,
        "n": args.n,
        "seed": args.seed,
        "mean_angles": list(args.mean_angles),
        "convention": args.convention,
        "blocks": args.blocks,
        "mean": params.mean.tolist(),
        "csv": out.name,
    }
    _write_json(out.with_suffix(".json"), sidecar)
    print(f"wrote {data.n} points to {out}")
    return 0


def cmd_fit(args):
    data = AngularDataset.from_csv(args.data)
    cfg = _fit_config(args)
    result = fit_dld(data, cfg)
    payload = result.params.to_dict()
    payload["diagnostics"] = {
        "converged": result.converged,
        "iterations": result.n_iter,
        "log_likelihood": result.log_likelihood,
        "n_points": data.n,
    }
    payload["config"] = vars(cfg).copy()
    payload["data"] = str(args.data)
    _write_json(args.out, payload)
    print(
        f"fit: k={result.params.k:.4f} converged={result.converged} "
        f"iters={result.n_iter} -> {args.out}"
    )
    return 0


def cmd_fit_mixture(args):
    data = AngularDataset.from_csv(args.data)
    cfg = _fit_config(args)
    result = fit_mixture(data, args.components, cfg)
    payload = result.model.to_dict()
    payload["diagnostics"] = {
        "converged": result.converged,
        "iterations": result.n_iter,
        "log_likelihood": result.log_likelihood,
        "marginal_log_likelihood": result.marginal_log_likelihood,
        "starved_components": result.starved,
        "n_points": data.n,
    }
    payload["config"] = vars(cfg).copy()
    payload["data"] = str(args.data)
    _write_json(args.out, payload)
    print(
        f"mixture fit: K={args.components} converged={result.converged} "
        f"iters={result.n_iter} -> {args.out}"
    )
    return 0


def cmd_separate(args):
    channels, rate = read_mixture(args.mixture)
    signals = MixtureSignals(channels=channels, sample_rate=rate)
    cfg = SeparationConfig(
        frame_length=args.frame_length,
        frame_ms=args.frame_ms,
        mode=args.mode,
        q=args.q,
        soft_rule=args.soft_rule,
        energy_floor=args.energy_floor,
        images=args.images,
        fit=_fit_config(args),
    )
    result = separate(signals, args.sources, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, src in enumerate(result.sources, start=1):
        path = out_dir / f"source{i:02d}.wav"
        write_wav(path, src, rate, bits=args.bits)
        paths.append(path.name)
    if result.images is not None:
        for i, img in enumerate(result.images, start=1):
            write_wav(out_dir / f"image{i:02d}.wav", img, rate, bits=args.bits)
    report = dict(result.report)
    report["command"] = "separate"
    report["inputs"] = [str(p) for p in args.mixture]
    report["outputs"] = paths
    report["bits"] = args.bits
    _write_json(out_dir / "report.json", report)
    print(
        f"separated {args.sources} sources from {signals.n_channels} channels "
        f"in {report['timings']['total_s']:.2f}s -> {out_dir}"
    )
    return 0


def cmd_eval(args):
    if len(args.estimates) != len(args.references):
        raise ValueError(
            f"got {len(args.estimates)} estimates but {len(args.references)} references"
        )
    from .audio_io import read_wav

    def load_all(paths):
        sigs, rate = [], None
        for p in paths:
            s, r = read_wav(p)
            if s.shape[0] != 1:
                raise ValueError(f"{p}: expected mono files for eval")
            if rate is None:
                rate = r
            elif rate != r:
                raise ValueError("sample-rate mismatch between files")
            sigs.append(s[0])
        n = min(len(s) for s in sigs)
        return np.array([s[:n] for s in sigs]), rate

    est, _ = load_all(args.estimates)
    ref, _ = load_all(args.references)
    n = min(est.shape[1], ref.shape[1])
    scores = bss_scores(est[:, :n], ref[:, :n])
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "SDR", "SIR", "SAR"])
        for i in range(len(scores.sdr)):
            writer.writerow(
                [i + 1, f"{scores.sdr[i]:.4f}", f"{scores.sir[i]:.4f}", f"{scores.sar[i]:.4f}"]
            )
    _write_json(
        out.with_suffix(".json"),
        {
            "command": "eval",
            "estimates": [str(p) for p in args.estimates],
            "references": [str(p) for p in args.references],
            "matching": scores.matching,
            "sdr": scores.sdr.tolist(),
            "sir": scores.sir.tolist(),
            "sar": scores.sar.tolist(),
        },
    )
    print(f"scores -> {out}")
    return 0


def _lut_cache_path(p, grid_size):
    root = os.environ.get(CACHE_ENV)
    if root is None:
        root = Path.home() / ".cache" / "dirlap"
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path / f"klut_p{p}_n{grid_size}.json"


def cmd_lut(args):
    target = Path(args.out) if args.out else _lut_cache_path(args.p, args.grid_size)
    if target.exists() and not args.force:
        table = KLookupTable.from_json(target)
        print(f"lookup table already cached at {target} (p={table.dimension_p})")
        return 0
    table = build_k_lookup(args.p, args.grid_size)
    table.to_json(target)
    print(f"wrote lookup table p={args.p} grid={args.grid_size} -> {target}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dirlap",
        description="Directional Laplacian modelling and audio source separation",
    )
    parser.add_argument("--version", action="version", version=f"dirlap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_fit_flags(sp, restarts=False):
        sp.add_argument("--eta", type=float, default=0.01, help="gradient step size")
        sp.add_argument("--tol", type=float, default=None, help="relative convergence tolerance")
        sp.add_argument("--max-iter", type=_positive_int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--k-init", type=_nonneg_float, default=15.0)
        if restarts:
            sp.add_argument("--restarts", type=int, default=0)

    sp = sub.add_parser("sample", help="generate a synthetic angular dataset")
    sp.add_argument("--p", type=_positive_int, required=True, help="dimension (>= 2)")
    sp.add_argument("--k", type=_nonneg_float, required=True, help="concentration")
    sp.add_argument("--n", type=_positive_int, required=True, help="sample count")
    sp.add_argument(
        "--mean-angles",
        type=_angle_list,
        required=True,
        help="comma-separated spherical angles of the mean, radians in [0, pi)",
    )
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument(
        "--convention",
        choices=("elevation_first", "elevation_last"),
        default="elevation_first",
    )
    sp.add_argument("--blocks", type=_positive_int, default=360)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("fit", help="fit a single directional Laplacian to CSV data")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    add_fit_flags(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("fit-mixture", help="fit a mixture by EM")
    sp.add_argument("--data", required=True)
    sp.add_argument("--K", dest="components", type=_positive_int, required=True)
    sp.add_argument("--out", required=True)
    add_fit_flags(sp, restarts=True)
    sp.set_defaults(func=cmd_fit_mixture)

    sp = sub.add_parser("separate", help="separate sources from a mixture WAV")
    sp.add_argument(
        "--mixture",
        nargs="+",
        required=True,
        help="one multichannel WAV or several mono WAVs",
    )
    sp.add_argument("--sources", type=_positive_int, required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--frame-length", type=_positive_int, default=None)
    sp.add_argument("--frame-ms", type=_nonneg_float, default=None)
    sp.add_argument("--mode", choices=("auto", "hard", "soft"), default="auto")
    sp.add_argument("--q", type=_ratio_float, default=0.8)
    sp.add_argument("--soft-rule", choices=("per_component", "mixture"), default="per_component")
    sp.add_argument("--energy-floor", type=_nonneg_float, default=1e-6)
    sp.add_argument("--images", action="store_true", help="also write source images")
    sp.add_argument("--bits", type=int, choices=(16, 32), default=32)
    add_fit_flags(sp, restarts=True)
    sp.set_defaults(func=cmd_separate)

    sp = sub.add_parser("eval", help="SDR/SIR/SAR of estimates against references")
    sp.add_argument("--estimates", nargs="+", required=True)
    sp.add_argument("--references", nargs="+", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("lut", help="build or refresh the cached lookup table")
    sp.add_argument("--p", type=_positive_int, required=True)
    sp.add_argument("--grid-size", type=_positive_int, default=DEFAULT_GRID_SIZE)
    sp.add_argument("--out", default=None, help=f"explicit path (default: ${CACHE_ENV})")
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_lut)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
