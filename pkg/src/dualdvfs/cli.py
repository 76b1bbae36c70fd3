"""Command-line front end.

Subcommands::

    dualdvfs run CONFIG --out DIR         simulate, write steps.csv/summary.json/manifest.json
    dualdvfs sweep --axis workload|alpha|beta [...]
    dualdvfs gen-trace --out trace.csv [...]
    dualdvfs validate-curves FILE

Exit codes: 0 success, 1 runtime failure, 2 configuration/input error.
Settings resolve as command-line flags > config file > built-in defaults.
``DUALDVFS_DATA_DIR`` points at an alternative data directory holding
``default_curves.csv`` and ``profiles/*.json``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from .characterization import CharacterizationError, CurveKind, ResourceClass, default_curves, load_curves
from .model import AppProfile, CoreWeights, ProfileError, load_profile, reference_profile
from .optimizer import ALL_SCHEMES, Scheme, VoltageGrid, operating_point
from .pll import PllConfig
from .predictor import PredictorError
from .simulator import ConfigError, SimConfig, compare_schemes, run
from .workload import GenParams, TraceError, generate, load_trace, write_trace

log = logging.getLogger("dualdvfs")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (
    ConfigError,
    ProfileError,
    TraceError,
    CharacterizationError,
    PredictorError,
    json.JSONDecodeError,
    FileNotFoundError,
    KeyError,
    TypeError,
    ValueError,
)

SWEEP_DEFAULTS = {
    "workload": (0.10, 1.00, 0.05),
    "alpha": (0.0, 1.0, 0.1),
    "beta": (0.0, 1.0, 0.1),
}

_KNOWN_KEYS = {
    "profile", "schemes", "trace", "predictor", "grid", "pll",
    "n_nodes", "core_weights", "curves", "freq_menu_mhz",
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve(base: Optional[Path], p: str) -> Path:
    path = Path(p)
    if base is not None and not path.is_absolute():
        candidate = base / path
        if candidate.exists():
            return candidate
    return path


def build_config(doc: dict, base_dir: Optional[Path] = None, seed: Optional[int] = None) -> tuple[SimConfig, dict]:
    """Turn a config document into a SimConfig plus the resolved settings echo."""
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    if "profile" not in doc:
        raise ConfigError("config field 'profile' is required")
    prof_src = doc["profile"]
    try:
        if isinstance(prof_src, str) and prof_src.endswith(".json"):
            profile = load_profile(_resolve(base_dir, prof_src))
        else:
            profile = load_profile(prof_src)
    except ProfileError as exc:
        raise ConfigError(f"config field 'profile': {exc}") from None

    curves = default_curves()
    if doc.get("curves"):
        curves = load_curves(_resolve(base_dir, doc["curves"]))

    trace_doc = dict(doc.get("trace") or {"generate": {}})
    tau_s = float(trace_doc.get("tau_s", 1.0))
    if "file" in trace_doc:
        trace = load_trace(_resolve(base_dir, trace_doc["file"]), tau_s=tau_s)
    else:
        gen = dict(trace_doc.get("generate") or {})
        if seed is not None:
            gen["seed"] = seed
        params = GenParams(**gen)
        trace = generate(params, tau_s=tau_s)
        trace_doc = {"generate": asdict(params), "tau_s": tau_s}

    pred = doc.get("predictor") or {}
    unknown_pred = set(pred) - {"m", "warmup_steps", "margin_t", "refresh_threshold"}
    if unknown_pred:
        raise ConfigError(f"unknown predictor field(s): {', '.join(sorted(unknown_pred))}")
    try:
        schemes = tuple(Scheme.parse(s) for s in doc.get("schemes", [s.value for s in ALL_SCHEMES]))
    except ValueError as exc:
        raise ConfigError(f"config field 'schemes': {exc}") from None

    cfg = SimConfig(
        trace=trace,
        profile=profile,
        schemes=schemes,
        grid=VoltageGrid(**(doc.get("grid") or {})),
        pll=PllConfig(**(doc.get("pll") or {})),
        n_nodes=int(doc.get("n_nodes", 10)),
        weights=CoreWeights(**(doc.get("core_weights") or {})),
        curves=curves,
        freq_menu_mhz=doc.get("freq_menu_mhz"),
        **pred,
    )
    cfg.new_predictor()  # validates m / margin pairing up front
    resolved = {
        "profile": asdict(profile),
        "schemes": [s.value for s in cfg.schemes],
        "trace": trace_doc,
        "predictor": {
            "m": cfg.m,
            "warmup_steps": cfg.warmup_steps,
            "margin_t": cfg.margin_t,
            "refresh_threshold": cfg.refresh_threshold,
        },
        "grid": asdict(cfg.grid),
        "pll": asdict(cfg.pll),
        "n_nodes": cfg.n_nodes,
        "core_weights": asdict(cfg.weights),
        "curves": doc.get("curves"),
        "freq_menu_mhz": list(cfg.freq_menu_mhz) if cfg.freq_menu_mhz else None,
    }
    return cfg, resolved


def cmd_run(args) -> int:
    config_path = Path(args.config)
    doc = json.loads(config_path.read_text(encoding="utf-8"))
    if args.profile:
        doc["profile"] = args.profile
    if args.schemes:
        doc["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if args.n_nodes is not None:
        doc["n_nodes"] = args.n_nodes
    cfg, resolved = build_config(doc, config_path.parent, seed=args.seed)

    report = run(cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    steps_path = out / "steps.csv"
    summary_path = out / "summary.json"
    steps_path.write_text(report.steps_csv(), encoding="utf-8")
    summary = report.summary()
    comp = compare_schemes(report)
    summary["best_baseline"] = comp.best_baseline.value if comp.best_baseline else None
    summary["efficiency_vs_best_baseline"] = comp.efficiency
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")

    manifest = {
        "config_path": str(config_path),
        "out_dir": str(out),
        "seed": resolved["trace"].get("generate", {}).get("seed"),
        "resolved_config": resolved,
        "files": [
            {"path": p.name, "sha256": _sha256(p)} for p in (steps_path, summary_path)
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    for row in comp.rows:
        print(f"{row.scheme.value:>10}  {row.power_reduction_x:6.3f}x")
    if comp.efficiency is not None:
        print(f"proposed vs best baseline ({comp.best_baseline.value}): {comp.efficiency:.3f}x")
    return EXIT_OK


def _frange(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ConfigError("sweep step must be positive")
    n = int(round((stop - start) / step))
    return [round(start + k * step, 10) for k in range(n + 1)]


def _sweep_point(task):
    axis, value, profile, curves, load, grid, n_nodes, schemes = task
    if axis == "alpha":
        profile = profile.with_alpha(value)
    elif axis == "beta":
        profile = profile.with_beta(value)
    else:
        load = value
    s_w = 1.0 / load
    rows = []
    for scheme in schemes:
        op = operating_point(scheme, profile, curves, s_w, grid, n_nodes=n_nodes)
        rows.append((axis, value, scheme.value, op.power, op.pair.v_core, op.pair.v_bram, op.freq))
    return rows


def sweep_rows(
    axis: str,
    values,
    profile: AppProfile,
    curves=None,
    load: float = 0.5,
    grid: VoltageGrid = VoltageGrid(),
    n_nodes: int = 10,
    schemes=ALL_SCHEMES,
    jobs: int = 1,
) -> list[tuple]:
    """Rows ``(axis, value, scheme, power_w, v_core, v_bram, freq_mhz)`` in value order."""
    if axis not in SWEEP_DEFAULTS:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    curves = curves or default_curves()
    tasks = [(axis, v, profile, curves, load, grid, n_nodes, tuple(schemes)) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "value", "scheme", "power_w", "v_core", "v_bram", "freq_mhz"])
    for axis, value, scheme, power, vc, vb, f in rows:
        w.writerow([axis, repr(value), scheme, repr(power), repr(vc), repr(vb), repr(f)])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    doc = {}
    base = None
    if args.config:
        base = Path(args.config).parent
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.profile:
        profile = load_profile(args.profile)
    elif "profile" in doc:
        src = doc["profile"]
        profile = load_profile(_resolve(base, src) if isinstance(src, str) and src.endswith(".json") else src)
    else:
        profile = reference_profile()
    curves = load_curves(_resolve(base, doc["curves"])) if doc.get("curves") else default_curves()
    grid = VoltageGrid(**(doc.get("grid") or {}))
    n_nodes = args.n_nodes if args.n_nodes is not None else int(doc.get("n_nodes", 10))
    schemes = tuple(Scheme.parse(s) for s in (args.schemes.split(",") if args.schemes else doc.get("schemes", [s.value for s in ALL_SCHEMES])))

    start, stop, step = SWEEP_DEFAULTS[args.axis]
    start = args.start if args.start is not None else start
    stop = args.stop if args.stop is not None else stop
    step = args.step if args.step is not None else step
    if args.axis == "workload" and not 0 < start <= stop <= 1:
        raise ConfigError("workload sweep range must lie in (0, 1]")
    if not 0 < args.load <= 1:
        raise ConfigError("--load must be in (0, 1]")

    rows = sweep_rows(
        args.axis, _frange(start, stop, step), profile, curves,
        load=args.load, grid=grid, n_nodes=n_nodes, schemes=schemes, jobs=args.jobs,
    )
    text = sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    params = GenParams(
        mean_load=args.mean,
        hurst=args.hurst,
        idc=args.idc,
        lambda_rate=args.lambda_rate,
        n_steps=args.n_steps,
        seed=args.seed,
    )
    trace = generate(params, tau_s=args.tau)
    written = write_trace(trace, args.out)
    for p in written:
        print(p)
    return EXIT_OK


def cmd_validate_curves(args) -> int:
    curves = load_curves(args.file)
    for cls in ResourceClass:
        tables = ", ".join(
            f"{k.value}:{len(curves.table(cls, k).voltages)}pts" for k in CurveKind
        )
        print(f"{cls.value:>8}  nominal {curves.nominal_for(cls):.3f} V  {tables}")
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualdvfs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a config and write per-step CSV, summary and manifest")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--profile")
    p.add_argument("--schemes", help="comma-separated scheme names")
    p.add_argument("--n-nodes", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="power and chosen voltages along one axis")
    p.add_argument("--axis", required=True, choices=sorted(SWEEP_DEFAULTS))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--load", type=float, default=0.5, help="fixed load for alpha/beta sweeps")
    p.add_argument("--config")
    p.add_argument("--profile")
    p.add_argument("--schemes")
    p.add_argument("--n-nodes", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    d = GenParams()
    p = sub.add_parser("gen-trace", help="synthesize a self-similar workload trace")
    p.add_argument("--out", required=True)
    p.add_argument("--mean", type=float, default=d.mean_load)
    p.add_argument("--hurst", type=float, default=d.hurst)
    p.add_argument("--idc", type=float, default=d.idc)
    p.add_argument("--lambda-rate", type=float, default=d.lambda_rate)
    p.add_argument("--n-steps", type=int, default=d.n_steps)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--tau", type=float, default=1.0)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("validate-curves", help="check a characterization CSV")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
