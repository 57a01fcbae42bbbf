"""Command-line front end: simulate degradations, restore cubes, evaluate results.

Every run writes its outputs (and a manifest.json recording the exact
inputs, configuration, and seed) under one user-specified directory and
nowhere else.  Re-running a simulate or denoise from its manifest
reproduces the data outputs byte for byte; the manifest itself records
wall-clock timings and therefore differs between runs.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical
failure inside the solver.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cube import load_cube, save_cube
from .errors import ConfigurationError, NumericalError
from .metrics import quality_report, report_to_json, spectrum_at, write_report_csv
from .noise import NoiseSpec, case_spec, degrade
from .shrinkage import MODE_NONCONVEX, MODE_NUCLEAR
from .solver import DiffWeights, SolverConfig, denoise

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

THREADS_ENV = "NONLLRTV_THREADS"

_DEFAULTS = SolverConfig()


def _parse_pair(text, name):
    parts = text.split(",")
    try:
        if len(parts) == 1:
            value = int(parts[0])
            return value, value
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"{name} must be N or R,C, got {text!r}")


def _patch_arg(text):
    if text == "full":
        return None
    return _parse_pair(text, "--patch")


def _stride_arg(text):
    return _parse_pair(text, "--stride")


def _pixel_arg(text):
    return _parse_pair(text, "pixel")


def _default_threads():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be positive, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonllrtv",
        description="Hyperspectral mixed-noise simulation, restoration, and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"nonllrtv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="degrade a clean cube with seeded noise")
    sim.add_argument("input", nargs="?", help="clean cube header (.json)")
    sim.add_argument("output", help="output directory")
    sim.add_argument("--case", type=int, help="stock degradation protocol 1..6")
    sim.add_argument("--spec", help="path to a noise spec JSON file")
    sim.add_argument("--from-manifest", dest="from_manifest", help="replay a previous simulate manifest")
    sim.add_argument("--seed", type=int, help="RNG seed (overrides spec/manifest)")
    sim.set_defaults(handler=_cmd_simulate)

    den = sub.add_parser("denoise", help="restore a degraded cube")
    den.add_argument("input", nargs="?", help="degraded cube header (.json)")
    den.add_argument("output", help="output directory")
    den.add_argument("--from-manifest", dest="from_manifest", help="replay a previous denoise manifest")
    den.add_argument("--lambda", dest="lam", type=float, default=_DEFAULTS.lam, help="sparsity weight")
    den.add_argument("--tau", type=float, default=_DEFAULTS.tau, help="smoothing weight (0 disables)")
    den.add_argument("--gamma", type=float, default=_DEFAULTS.gamma, help="rank-penalty saturation scale")
    den.add_argument("--rank-cap", dest="rank_cap", type=int, default=None, help="hard per-patch rank cap")
    den.add_argument("--w1", type=float, default=_DEFAULTS.weights.spectral, help="spectral difference weight")
    den.add_argument("--w2", type=float, default=_DEFAULTS.weights.cols, help="column difference weight")
    den.add_argument("--w3", type=float, default=_DEFAULTS.weights.rows, help="row difference weight")
    den.add_argument("--mu0", type=float, default=_DEFAULTS.mu0, help="initial penalty weight")
    den.add_argument("--mu-max", dest="mu_max", type=float, default=_DEFAULTS.mu_max, help="penalty weight cap")
    den.add_argument("--rho", type=float, default=_DEFAULTS.rho, help="penalty growth factor (> 1)")
    den.add_argument("--epsilon", type=float, default=_DEFAULTS.epsilon, help="convergence tolerance")
    den.add_argument("--max-iters", dest="max_iters", type=int, default=_DEFAULTS.max_iters, help="sweep budget")
    den.add_argument("--patch", type=_patch_arg, default=(15, 15), help="patch size: N, R,C, or 'full'")
    den.add_argument("--stride", type=_stride_arg, default=None, help="anchor step: N or R,C (default patch/2)")
    den.add_argument(
        "--penalty", dest="penalty_mode", choices=[MODE_NONCONVEX, MODE_NUCLEAR],
        default=_DEFAULTS.penalty_mode, help="singular-value penalty mode",
    )
    den.add_argument(
        "--threshold-factor", dest="threshold_factor", type=float,
        default=_DEFAULTS.threshold_factor, help="extra scale on the singular-value threshold",
    )
    den.add_argument("--threads", type=int, default=None, help=f"patch-phase workers (default ${THREADS_ENV} or 1)")
    den.add_argument("--quiet", action="store_true", help="suppress per-iteration progress on stderr")
    den.set_defaults(handler=_cmd_denoise)

    ev = sub.add_parser("evaluate", help="score a restored cube against a reference")
    ev.add_argument("reference", help="reference cube header (.json)")
    ev.add_argument("test", help="cube under test (.json)")
    ev.add_argument("output", help="output directory")
    ev.add_argument("--band", type=int, default=None, help="also export band K of both cubes as 8-bit PGM")
    ev.add_argument("--spectrum", type=_pixel_arg, default=None, help="also export the I,J pixel spectra as CSV")
    ev.set_defaults(handler=_cmd_evaluate)

    spec = sub.add_parser("spectrum", help="dump one pixel's spectral profile as CSV")
    spec.add_argument("input", help="cube header (.json)")
    spec.add_argument("output", help="output directory")
    spec.add_argument("--pixel", type=_pixel_arg, required=True, help="pixel as I,J")
    spec.set_defaults(handler=_cmd_spectrum)

    return parser


def _write_manifest(outdir: Path, payload: dict) -> None:
    path = outdir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_manifest(path, expected_command):
    try:
        manifest = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"manifest {path} is not valid JSON: {exc}") from exc
    if manifest.get("command") != expected_command:
        raise ConfigurationError(
            f"manifest {path} records command {manifest.get('command')!r}, expected {expected_command!r}"
        )
    return manifest


def _cmd_simulate(args) -> int:
    if args.from_manifest:
        manifest = _load_manifest(args.from_manifest, "simulate")
        spec = NoiseSpec.from_json(manifest["noise_spec"])
        input_path = args.input or manifest["input"]
    else:
        if args.input is None:
            raise ConfigurationError("simulate needs an input cube (or --from-manifest)")
        if (args.case is None) == (args.spec is None):
            raise ConfigurationError("simulate needs exactly one of --case or --spec")
        if args.case is not None:
            spec = case_spec(args.case, seed=args.seed if args.seed is not None else 0)
        else:
            try:
                payload = json.loads(Path(args.spec).read_text())
            except OSError as exc:
                raise ConfigurationError(f"cannot read noise spec {args.spec}: {exc}") from exc
            spec = NoiseSpec.from_json(payload)
        input_path = args.input
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)

    cube = load_cube(input_path)
    started = time.perf_counter()
    result = degrade(cube.data, spec)
    elapsed = time.perf_counter() - started

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    save_cube(result.noisy, outdir / "noisy.json")
    _write_manifest(outdir, {
        "tool": "nonllrtv",
        "version": __version__,
        "command": "simulate",
        "input": str(Path(input_path).resolve()),
        "output_dir": str(outdir.resolve()),
        "seed": spec.seed,
        "noise_spec": spec.to_json(),
        "outputs": ["noisy.json", "noisy.bin"],
        "timings": {"wall_seconds": elapsed},
    })
    return EXIT_OK


def _config_from_args(args) -> SolverConfig:
    patch = args.patch
    patch_rows, patch_cols = (None, None) if patch is None else patch
    return SolverConfig(
        lam=args.lam,
        tau=args.tau,
        gamma=args.gamma,
        rank_cap=args.rank_cap,
        weights=DiffWeights(args.w1, args.w2, args.w3),
        mu0=args.mu0,
        mu_max=args.mu_max,
        rho=args.rho,
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        patch_rows=patch_rows,
        patch_cols=patch_cols,
        stride=args.stride,
        penalty_mode=args.penalty_mode,
        threshold_factor=args.threshold_factor,
    )


def _write_iteration_log(path: Path, history) -> None:
    lines = ["iteration,fit_residual,split_residual,mu"]
    for record in history:
        lines.append(
            f"{record.iteration},{float(record.fit_residual)!r},"
            f"{float(record.split_residual)!r},{float(record.mu)!r}"
        )
    path.write_text("\n".join(lines) + "\n")


def _cmd_denoise(args) -> int:
    if args.from_manifest:
        manifest = _load_manifest(args.from_manifest, "denoise")
        config = SolverConfig.from_dict(manifest["solver_config"])
        input_path = args.input or manifest["input"]
    else:
        if args.input is None:
            raise ConfigurationError("denoise needs an input cube (or --from-manifest)")
        config = _config_from_args(args)
        input_path = args.input
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 1:
        raise ConfigurationError(f"--threads must be positive, got {threads}")

    cube = load_cube(input_path)

    progress = None
    if not args.quiet:
        def progress(record):
            print(
                f"iter={record.iteration} fit={record.fit_residual:.3e} "
                f"split={record.split_residual:.3e} mu={record.mu:.3e}",
                file=sys.stderr,
            )

    result = denoise(cube.data, config, progress=progress, threads=threads)

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    save_cube(result.restored, outdir / "denoised.json")
    save_cube(result.sparse, outdir / "sparse.json")
    _write_iteration_log(outdir / "iterations.csv", result.report.history)
    _write_manifest(outdir, {
        "tool": "nonllrtv",
        "version": __version__,
        "command": "denoise",
        "input": str(Path(input_path).resolve()),
        "output_dir": str(outdir.resolve()),
        "solver_config": config.to_dict(),
        "threads": threads,
        "iterations": result.report.iterations,
        "converged": result.report.converged,
        "outputs": ["denoised.json", "denoised.bin", "sparse.json", "sparse.bin", "iterations.csv"],
        "timings": {"wall_seconds": result.report.runtime_seconds},
    })
    return EXIT_OK


def _write_pgm(path: Path, band: np.ndarray) -> None:
    pixels = np.round(np.clip(band, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())


def _write_spectrum_csv(path: Path, columns: dict) -> None:
    names = list(columns)
    series = [columns[name] for name in names]
    lines = ["band," + ",".join(names)]
    for k, values in enumerate(zip(*series)):
        lines.append(f"{k}," + ",".join(repr(float(v)) for v in values))
    path.write_text("\n".join(lines) + "\n")


def _cmd_evaluate(args) -> int:
    reference = load_cube(args.reference)
    test = load_cube(args.test)
    if reference.dims != test.dims:
        raise ConfigurationError(f"cube dims differ: {reference.dims} vs {test.dims}")

    started = time.perf_counter()
    report = quality_report(reference.data, test.data)
    elapsed = time.perf_counter() - started
    report = replace(report, runtime_seconds=elapsed)

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, outdir / "metrics.csv")
    (outdir / "metrics.json").write_text(json.dumps(report_to_json(report), indent=2, sort_keys=True) + "\n")
    outputs = ["metrics.csv", "metrics.json"]

    if args.band is not None:
        bands = reference.bands
        if not (0 <= args.band < bands):
            raise ConfigurationError(f"--band {args.band} is outside [0, {bands})")
        _write_pgm(outdir / f"band_{args.band}_reference.pgm", reference.data[:, :, args.band])
        _write_pgm(outdir / f"band_{args.band}_test.pgm", test.data[:, :, args.band])
        outputs += [f"band_{args.band}_reference.pgm", f"band_{args.band}_test.pgm"]

    if args.spectrum is not None:
        i, j = args.spectrum
        path = outdir / f"spectrum_{i}_{j}.csv"
        _write_spectrum_csv(path, {
            "reference": spectrum_at(reference.data, i, j),
            "test": spectrum_at(test.data, i, j),
        })
        outputs.append(path.name)

    _write_manifest(outdir, {
        "tool": "nonllrtv",
        "version": __version__,
        "command": "evaluate",
        "reference": str(Path(args.reference).resolve()),
        "test": str(Path(args.test).resolve()),
        "output_dir": str(outdir.resolve()),
        "band": args.band,
        "spectrum_pixel": list(args.spectrum) if args.spectrum else None,
        "mpsnr_db": report.mpsnr,
        "mssim": report.mssim,
        "outputs": outputs,
        "timings": {"wall_seconds": elapsed},
    })
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    cube = load_cube(args.input)
    i, j = args.pixel
    values = spectrum_at(cube.data, i, j)

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"spectrum_{i}_{j}.csv"
    _write_spectrum_csv(path, {"value": values})
    _write_manifest(outdir, {
        "tool": "nonllrtv",
        "version": __version__,
        "command": "spectrum",
        "input": str(Path(args.input).resolve()),
        "output_dir": str(outdir.resolve()),
        "pixel": [i, j],
        "outputs": [path.name],
        "timings": {"wall_seconds": 0.0},
    })
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
