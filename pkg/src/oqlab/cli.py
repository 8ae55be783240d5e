"""Command-line front end.

Subcommands: predict (exact quasiprobability at one setting), scan
(parameter sweeps written as CSV), simulate (Monte Carlo counting run
plus analysis report), g2 (timing run and correlation histogram), and
analyze (count CSVs to a JSON report).

Angles are degrees at this boundary and radians everywhere else. Scan
grid points run in a thread pool with per-point seeds spawned from the
master seed, so results are independent of the thread count; the
OQLAB_THREADS environment variable overrides the --threads flag.

Exit codes: 0 success, 2 usage, 3 malformed or degenerate data, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import qcore
from .analysis import ExperimentRecord, analyze, dark_count_correction
from .contexts import SETUPS, context_table
from .correlation import g2_zero, start_stop_histogram
from .oq import oq_distribution
from .photonsim import (
    SCHEMA_VERSION,
    DetectorModel,
    HeraldedSPDC,
    SingleEmitter,
    WeakCoherent,
    count_tables_from_csv,
    count_tables_to_csv,
    expected_dark_counts,
    generate_click_streams,
    simulate_counts,
    weakfield_run,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4

BUILTIN_DETECTORS = {
    "ideal": DetectorModel.ideal,
    "bench": DetectorModel,
    "dark-only": lambda: DetectorModel.ideal(dark_rate_hz=1.0e3),
}

SOURCE_KINDS = {
    "weak-coherent": WeakCoherent,
    "single-emitter": SingleEmitter,
    "heralded-spdc": HeraldedSPDC,
}


# ---------------------------------------------------------------------------
# config files


def load_config(path):
    """Parse a flat key = value config file.

    Returns {key: (value, line_number)}; values are floats, tuples of
    floats (comma separated), or bare strings. Malformed lines raise
    ValueError naming the line.
    """
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value', got '{line}'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise ValueError(f"{path}: line {lineno}: empty key or value")
            if key in entries:
                raise ValueError(f"{path}: line {lineno}: duplicate key '{key}'")
            if "," in value:
                try:
                    parsed = tuple(float(p) for p in value.split(","))
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}: expected comma-separated numbers, got '{value}'"
                    ) from None
            else:
                try:
                    parsed = float(value)
                except ValueError:
                    parsed = value
            entries[key] = (parsed, lineno)
    return entries


def resolve_detector(name_or_path: str) -> DetectorModel:
    """Build a DetectorModel from a builtin name or a config file path."""
    if name_or_path in BUILTIN_DETECTORS:
        return BUILTIN_DETECTORS[name_or_path]()
    entries = load_config(name_or_path)
    valid = set(DetectorModel.__dataclass_fields__)
    kwargs = {}
    for key, (value, lineno) in entries.items():
        if key not in valid:
            raise ValueError(f"{name_or_path}: line {lineno}: unknown detector parameter '{key}'")
        kwargs[key] = value
    try:
        return DetectorModel(**kwargs)
    except ValueError as exc:
        raise ValueError(f"{name_or_path}: {exc}") from None


def resolve_source(name_or_path: str):
    """Build a source model from a builtin kind name or a config file path."""
    if name_or_path in SOURCE_KINDS:
        return SOURCE_KINDS[name_or_path]()
    entries = load_config(name_or_path)
    if "kind" not in entries:
        raise ValueError(f"{name_or_path}: missing required key 'kind'")
    kind, kind_line = entries.pop("kind")
    if kind not in SOURCE_KINDS:
        raise ValueError(
            f"{name_or_path}: line {kind_line}: unknown source kind '{kind}' "
            f"(expected one of {sorted(SOURCE_KINDS)})"
        )
    cls = SOURCE_KINDS[kind]
    valid = set(cls.__dataclass_fields__)
    kwargs = {}
    for key, (value, lineno) in entries.items():
        if key not in valid:
            raise ValueError(f"{name_or_path}: line {lineno}: unknown {kind} parameter '{key}'")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{name_or_path}: {exc}") from None


def resolve_threads(flag_value: int) -> int:
    """Thread count for scan points; OQLAB_THREADS wins over the flag."""
    env = os.environ.get("OQLAB_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"OQLAB_THREADS must be an integer, got '{env}'") from None
    else:
        value = flag_value
    if value < 1:
        raise ValueError("thread count must be at least 1")
    return value


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    # shortest representation that parses back to the same float, so
    # emitted rows re-analyze to identical values
    return repr(float(value))


def _json_report(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _quasi_payload(q, theta_deg=None, phi_deg=None) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "w": [[float(v) for v in row] for row in q.w],
        "negativity": float(q.negativity),
        "nsit_dev": [float(v) for v in q.nsit_dev],
        "aot_dev": [float(v) for v in q.aot_dev],
    }
    if theta_deg is not None:
        payload["theta_deg"] = float(theta_deg)
    if phi_deg is not None:
        payload["phi_deg"] = float(phi_deg)
    return payload


def _budget_payload(budget) -> dict:
    return {
        "statistical": float(budget.statistical_error),
        "systematic": float(budget.systematic_error),
        "total": float(budget.combined_error()),
        "mode": budget.mode,
    }


def _write_text(path, text: str):
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_predict(args) -> dict:
    theta = math.radians(args.theta)
    phi = math.radians(args.phi)
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise ValueError("theta and phi must be finite")
    q = oq_distribution(context_table(qcore.make_pure_state(theta, phi)))
    return _quasi_payload(q, args.theta, args.phi)


def _scan_rows_pure_grid(args):
    thetas = np.arange(0.0, 90.0 + 1e-9, args.theta_step)
    phis = np.arange(0.0, 90.0 + 1e-9, args.phi_step)
    header = "theta_deg,phi_deg,w00,w01,w10,w11,negativity,nsit_dev,aot_dev"
    rows = []
    for theta in thetas:
        for phi in phis:
            q = oq_distribution(
                context_table(qcore.make_pure_state(math.radians(theta), math.radians(phi)))
            )
            rows.append(
                ",".join(
                    [_fmt(theta), _fmt(phi)]
                    + [_fmt(v) for v in q.w.ravel()]
                    + [_fmt(q.negativity), _fmt(q.nsit_dev.max()), _fmt(q.aot_dev.max())]
                )
            )
    return header, rows


def _scan_rows_bloch_disk(args):
    thetas = np.arange(0.0, 180.0 + 1e-9, args.theta_step)
    alphas = np.arange(-1.0, 1.0 + 1e-9, 1.0 / args.alpha_steps)
    header = "theta1_deg,alpha,x,z,w00,w01,w10,w11,negativity,nsit_dev,aot_dev"
    rows = []
    for theta in thetas:
        t1 = math.radians(theta)
        for alpha in alphas:
            rho = qcore.make_mixed_state(t1, t1 + math.pi, alpha)
            x, _, z = qcore.bloch_vector(rho)
            q = oq_distribution(context_table(rho))
            rows.append(
                ",".join(
                    [_fmt(theta), _fmt(alpha), _fmt(x), _fmt(z)]
                    + [_fmt(v) for v in q.w.ravel()]
                    + [_fmt(q.negativity), _fmt(q.nsit_dev.max()), _fmt(q.aot_dev.max())]
                )
            )
    return header, rows


def _weak_field_point(task):
    theta_deg, mean, pulses, det, seed_seq = task
    theta = math.radians(theta_deg)
    src = WeakCoherent(mean_photons_per_pulse=mean)
    seeds = seed_seq.spawn(2)
    tables = {
        setup: weakfield_run(theta, 0.0, src, setup, pulses, det=det, seed=seed)
        for setup, seed in zip([(1, 1), (0, 1)], seeds)
    }
    rec = ExperimentRecord(tables=tables, theta_deg=theta_deg, source="weak-coherent")
    q_raw, _ = analyze(rec, n_boot=0)
    corrected = dark_count_correction(rec, expected_dark_counts(det, pulses))
    q_corr, _ = analyze(corrected, n_boot=0)
    exact = oq_distribution(context_table(qcore.make_pure_state(theta)))
    return theta_deg, mean, q_corr, float(exact.negativity), float(q_raw.negativity)


def _scan_rows_weak_field(args):
    det = resolve_detector(args.det)
    means = [float(m) for m in args.means.split(",")]
    if not means or any(m <= 0 for m in means):
        raise ValueError("means must be positive numbers")
    thetas = np.arange(0.0, 90.0 + 1e-9, args.theta_step)
    tasks = []
    for i, theta in enumerate(thetas):
        for j, mean in enumerate(means):
            tasks.append(
                (float(theta), mean, args.pulses, det,
                 np.random.SeedSequence(args.seed, spawn_key=(i, j)))
            )
    threads = resolve_threads(args.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_weak_field_point, tasks))
    else:
        results = [_weak_field_point(t) for t in tasks]
    header = (
        "theta_deg,mean_photons,w00,w01,w10,w11,"
        "negativity_exact,negativity_uncorrected,negativity_corrected"
    )
    rows = []
    for theta_deg, mean, q_corr, exact, raw in results:
        rows.append(
            ",".join(
                [_fmt(theta_deg), _fmt(mean)]
                + [_fmt(v) for v in q_corr.w.ravel()]
                + [_fmt(exact), _fmt(raw), _fmt(q_corr.negativity)]
            )
        )
    return header, rows


def cmd_scan(args) -> str:
    builders = {
        "pure-grid": _scan_rows_pure_grid,
        "bloch-disk": _scan_rows_bloch_disk,
        "weak-field": _scan_rows_weak_field,
    }
    header, rows = builders[args.kind](args)
    text = "\n".join([f"# schema_version={SCHEMA_VERSION}", header] + rows) + "\n"
    _write_text(args.out, text)
    return args.out


def cmd_simulate(args) -> dict:
    det = resolve_detector(args.det)
    theta = math.radians(args.theta)
    phi = math.radians(args.phi)
    rho = qcore.make_pure_state(theta, phi)
    master = np.random.SeedSequence(args.seed)
    seeds = master.spawn(len(SETUPS))
    tables = {
        setup: simulate_counts(rho, setup, args.photons, det=det, seed=seed)
        for setup, seed in zip(SETUPS, seeds)
    }
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {}
    for setup, table in tables.items():
        name = f"counts_{setup[0]}{setup[1]}.csv"
        path = os.path.join(args.out_dir, name)
        count_tables_to_csv([table], path)
        paths[setup] = path

    rec = ExperimentRecord(
        tables=tables, theta_deg=args.theta, phi_deg=args.phi, source="simulated"
    )
    q, budget = analyze(rec, error_mode=args.error_mode, seed=master.spawn(1)[0])
    payload = _quasi_payload(q, args.theta, args.phi)
    payload["seed"] = args.seed
    payload["n_photons"] = args.photons
    payload["error"] = _budget_payload(budget)
    report_path = os.path.join(args.out_dir, "report.json")
    _write_text(report_path, _json_report(payload))
    payload["files"] = sorted(os.path.basename(p) for p in paths.values()) + ["report.json"]
    return payload


def cmd_g2(args) -> dict:
    det = resolve_detector(args.det)
    src = resolve_source(args.source)
    streams = generate_click_streams(src, args.duration, det=det, seed=args.seed)
    hist = start_stop_histogram(
        streams[0], streams[1], bin_width_ns=args.bin_width, max_delay_ns=args.max_delay
    )
    window = args.window if args.window is not None else det.coincidence_window_ns
    value = g2_zero(hist, window_ns=window)
    lines = [
        f"# schema_version={SCHEMA_VERSION}",
        f"# baseline={_fmt(hist.baseline)}",
        f"# low_statistics={'true' if hist.low_statistics else 'false'}",
        "tau_ns,counts,g2",
    ]
    for tau, counts, g2 in zip(hist.tau_ns, hist.counts, hist.g2):
        lines.append(f"{_fmt(tau)},{int(counts)},{_fmt(g2)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return {
        "schema_version": SCHEMA_VERSION,
        "g2_zero": None if np.isnan(value) else float(value),
        "window_ns": float(window),
        "low_statistics": bool(hist.low_statistics),
        "seed": args.seed,
        "out": args.out,
    }


def _parse_four_ints(text: str, what: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"{what} must be four comma-separated values")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"{what} must be integers, got '{text}'") from None


def cmd_analyze(args) -> dict:
    tables = {}
    for path in args.inputs:
        for setup, table in count_tables_from_csv(path).items():
            if setup in tables:
                raise ValueError(f"{path}: setup {setup} appears in more than one input")
            tables[setup] = table
    calibration = (1.0, 1.0, 1.0, 1.0)
    if args.calibration is not None:
        parts = args.calibration.split(",")
        if len(parts) != 4:
            raise ValueError("calibration must be four comma-separated factors")
        try:
            calibration = tuple(float(p) for p in parts)
        except ValueError:
            raise ValueError(f"calibration must be numbers, got '{args.calibration}'") from None
    rec = ExperimentRecord(tables=tables, calibration=calibration, source="file")
    if args.dark_counts is not None:
        rec = dark_count_correction(rec, _parse_four_ints(args.dark_counts, "dark counts"))
    q, budget = analyze(
        rec, mode=args.mode, error_mode=args.error_mode, n_boot=args.bootstrap, seed=args.seed
    )
    payload = _quasi_payload(q)
    payload["mode"] = args.mode
    payload["error"] = _budget_payload(budget)
    payload["flags"] = list(rec.flags)
    if args.out:
        _write_text(args.out, _json_report(payload))
    return payload


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oqlab",
        description="Quasiprobability laboratory for sequential polarization measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="exact quasiprobability at one setting")
    p.add_argument("--theta", type=float, required=True, help="preparation angle in degrees")
    p.add_argument("--phi", type=float, default=0.0, help="preparation phase in degrees")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.set_defaults(func=_run_predict)

    p = sub.add_parser("scan", help="write a parameter sweep as CSV")
    p.add_argument("--kind", choices=["pure-grid", "bloch-disk", "weak-field"], required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--theta-step", type=float, default=1.0, help="theta resolution in degrees")
    p.add_argument("--phi-step", type=float, default=1.0, help="phi resolution in degrees")
    p.add_argument("--alpha-steps", type=int, default=30,
                   help="mixing steps per unit, resolution 1/alpha-steps")
    p.add_argument("--means", default="0.001,0.006,0.1",
                   help="weak-field mean photon numbers, comma separated")
    p.add_argument("--pulses", type=int, default=1_000_000, help="weak-field pulses per point")
    p.add_argument("--det", default="dark-only",
                   help="weak-field detector: ideal, bench, dark-only, or config path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_run_scan)

    p = sub.add_parser("simulate", help="Monte Carlo counting run with analysis report")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--photons", type=int, default=10_000)
    p.add_argument("--det", default="bench", help="ideal, bench, dark-only, or config path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".", help="directory for count CSVs and report.json")
    p.add_argument("--error-mode", choices=["rss", "sum"], default="rss")
    p.set_defaults(func=_run_simulate)

    p = sub.add_parser("g2", help="timing run and start-stop correlation histogram")
    p.add_argument("--source", default="heralded-spdc",
                   help="weak-coherent, single-emitter, heralded-spdc, or config path")
    p.add_argument("--det", default="bench")
    p.add_argument("--duration", type=float, default=2.0, help="run length in seconds")
    p.add_argument("--bin-width", type=float, default=0.5, help="histogram bin in ns")
    p.add_argument("--max-delay", type=float, default=20.0, help="histogram range in ns")
    p.add_argument("--window", type=float, default=None,
                   help="g2(0) averaging window in ns (default: detector coincidence window)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output histogram CSV path")
    p.set_defaults(func=_run_g2)

    p = sub.add_parser("analyze", help="turn count CSVs into a quasiprobability report")
    p.add_argument("inputs", nargs="+", help="count CSV files (combined or one per setup)")
    p.add_argument("--mode", choices=["lab", "strict"], default="lab")
    p.add_argument("--dark-counts", default=None,
                   help="per-detector dark counts to subtract, four comma-separated integers")
    p.add_argument("--calibration", default=None,
                   help="per-detector calibration factors, four comma-separated numbers")
    p.add_argument("--error-mode", choices=["rss", "sum"], default="rss")
    p.add_argument("--bootstrap", type=int, default=200,
                   help="bootstrap resamples for the statistical error (0 disables)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="also write the JSON report to this path")
    p.set_defaults(func=_run_analyze)

    return parser


def _print_quasi_text(payload: dict, stream):
    w = payload["w"]
    if "theta_deg" in payload:
        stream.write(
            f"theta = {payload['theta_deg']:g} deg, phi = {payload.get('phi_deg', 0.0):g} deg\n"
        )
    stream.write("W:\n")
    for row in w:
        stream.write("  " + "  ".join(f"{v:+.6f}" for v in row) + "\n")
    stream.write(f"negativity = {payload['negativity']:.6f}\n")
    stream.write(f"nsit_dev = {max(payload['nsit_dev']):.6f}\n")
    stream.write(f"aot_dev = {max(payload['aot_dev']):.6f}\n")
    if "error" in payload:
        err = payload["error"]
        stream.write(
            f"error = {err['total']:.6f} "
            f"(statistical {err['statistical']:.6f}, systematic {err['systematic']:.6f}, "
            f"{err['mode']})\n"
        )


def _run_predict(args, out):
    payload = cmd_predict(args)
    if args.json:
        out.write(_json_report(payload))
    else:
        _print_quasi_text(payload, out)


def _run_scan(args, out):
    path = cmd_scan(args)
    out.write(f"wrote {path}\n")


def _run_simulate(args, out):
    payload = cmd_simulate(args)
    _print_quasi_text(payload, out)
    out.write(f"wrote {', '.join(payload['files'])} in {args.out_dir}\n")


def _run_g2(args, out):
    payload = cmd_g2(args)
    if payload["low_statistics"]:
        out.write("g2(0) undefined: histogram flagged low statistics\n")
    else:
        out.write(f"g2(0) = {payload['g2_zero']:.4f} over |tau| <= {payload['window_ns'] / 2:g} ns\n")
    out.write(f"wrote {payload['out']}\n")


def _run_analyze(args, out):
    payload = cmd_analyze(args)
    out.write(_json_report(payload))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        args.func(args, sys.stdout)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
