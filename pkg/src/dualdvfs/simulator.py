"""Central-controller loop of the multi-FPGA platform.

Every step the controller predicts the next load bin, provisions a clock for
it (bin upper edge plus margin), lets each scheme pick voltages for that
clock, and books energy.  All schemes replay one shared prediction sequence,
so differences between them come from the voltage policy alone.

The platform is ``n_nodes`` identical FPGAs fed the same per-node load.
Work above the provisioned capacity is dropped and counted as a QoS
violation; there is no backlog carried into the next step.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

from .characterization import ResourceCurves, default_curves
from .model import DEFAULT_WEIGHTS, AppProfile, CoreWeights, VoltagePair, nominal_power
from .optimizer import ALL_SCHEMES, OperatingPoint, Scheme, VoltageGrid, operating_point
from .pll import PllConfig, step_overhead_energy
from .predictor import MarkovPredictor
from .workload import WorkloadTrace, discretize

STEP_CSV_HEADER = (
    "scheme",
    "step",
    "actual_load",
    "predicted_bin",
    "freq_mhz",
    "v_core",
    "v_bram",
    "power_w",
    "energy_j",
    "qos",
    "mispredict",
)


class ConfigError(ValueError):
    pass


class Predictor(Protocol):
    m: int

    def train_step(self, observed: int): ...

    def predict_next(self, phase: Optional[int] = None) -> int: ...

    def observe(self, actual: int, phase: Optional[int] = None) -> bool: ...

    def provisioned_capacity(self, predicted_bin: int) -> float: ...


@dataclass
class SimConfig:
    trace: WorkloadTrace
    profile: AppProfile
    schemes: Sequence[Scheme] = ALL_SCHEMES
    grid: VoltageGrid = field(default_factory=VoltageGrid)
    m: int = 25
    warmup_steps: int = 64
    margin_t: float = 0.05
    refresh_threshold: int = 3
    pll: PllConfig = field(default_factory=PllConfig)
    n_nodes: int = 10
    weights: CoreWeights = DEFAULT_WEIGHTS
    curves: Optional[ResourceCurves] = None
    freq_menu_mhz: Optional[Sequence[float]] = None

    def __post_init__(self):
        self.schemes = tuple(Scheme.parse(s) if isinstance(s, str) else s for s in self.schemes)
        if not self.schemes:
            raise ConfigError("scheme list is empty")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate scheme in scheme list")
        if self.n_nodes < 1:
            raise ConfigError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if len(self.trace) <= self.warmup_steps:
            raise ConfigError(
                f"trace has {len(self.trace)} steps, needs more than warmup ({self.warmup_steps})"
            )
        if self.freq_menu_mhz is not None:
            menu = sorted(float(f) for f in self.freq_menu_mhz)
            if not menu or menu[0] <= 0:
                raise ConfigError("frequency menu must hold positive values")
            self.freq_menu_mhz = tuple(menu)
        if self.curves is None:
            self.curves = default_curves()

    def new_predictor(self) -> MarkovPredictor:
        return MarkovPredictor(
            self.m,
            warmup_steps=self.warmup_steps,
            margin_t=self.margin_t,
            refresh_threshold=self.refresh_threshold,
        )


@dataclass(frozen=True)
class StepRecord:
    step: int
    actual_load: float
    predicted_bin: Optional[int]
    provisioned_freq: float
    pair: VoltagePair
    power_w: float
    energy_j: float
    pll_overhead_j: float
    qos_violated: bool
    mispredicted: bool


@dataclass
class SchemeResult:
    scheme: Scheme
    steps: list
    total_energy_j: float
    nominal_energy_j: float
    mean_power_w: float
    power_reduction_x: float
    qos_violation_rate: float
    misprediction_rate: float

    def summary(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "total_energy_j": self.total_energy_j,
            "nominal_energy_j": self.nominal_energy_j,
            "mean_power_w": self.mean_power_w,
            "power_reduction_x": self.power_reduction_x,
            "qos_violation_rate": self.qos_violation_rate,
            "misprediction_rate": self.misprediction_rate,
        }


@dataclass
class SimReport:
    profile: str
    n_steps: int
    tau_s: float
    results: dict  # Scheme -> SchemeResult

    def __getitem__(self, scheme) -> SchemeResult:
        if isinstance(scheme, str):
            scheme = Scheme.parse(scheme)
        return self.results[scheme]

    def summary(self) -> dict:
        return {
            "profile": self.profile,
            "n_steps": self.n_steps,
            "tau_s": self.tau_s,
            "schemes": [r.summary() for r in self.results.values()],
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"

    def steps_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STEP_CSV_HEADER)
        for scheme, res in self.results.items():
            for r in res.steps:
                w.writerow(
                    [
                        scheme.value,
                        r.step,
                        repr(r.actual_load),
                        "" if r.predicted_bin is None else r.predicted_bin,
                        repr(r.provisioned_freq),
                        repr(r.pair.v_core),
                        repr(r.pair.v_bram),
                        repr(r.power_w),
                        repr(r.energy_j),
                        int(r.qos_violated),
                        int(r.mispredicted),
                    ]
                )
        return buf.getvalue()


def _quantize_freq(freq: float, f_nom: float, menu) -> float:
    if menu is None:
        return freq
    for f in menu:
        if f >= freq - 1e-9:
            return min(f, f_nom)
    return f_nom


def run(config: SimConfig, predictor: Optional[Predictor] = None) -> SimReport:
    """Simulate every configured scheme over the trace.

    ``predictor`` replaces the Markov predictor (e.g. a perfect-knowledge
    stub); it must follow the same train/predict/observe protocol.
    """
    cfg = config
    trace, profile, curves = cfg.trace, cfg.profile, cfg.curves
    tau = trace.tau_s
    n = cfg.n_nodes
    pred = predictor if predictor is not None else cfg.new_predictor()
    m = pred.m

    nominal_pair = VoltagePair.nominal(curves)
    p_nominal = nominal_power(profile, curves, cfg.weights)

    # Shared control sequence: (predicted bin, capacity, mispredicted) per step.
    control = []
    for i, load in enumerate(trace.loads):
        actual_bin = discretize(float(load), m)
        if i < cfg.warmup_steps:
            pred.train_step(actual_bin)
            control.append((None, 1.0, False))
            continue
        b = pred.predict_next(i)
        capacity = pred.provisioned_capacity(b)
        mis = pred.observe(actual_bin, i)
        control.append((b, capacity, mis))

    cache: dict = {}

    def point(scheme: Scheme, freq: float) -> OperatingPoint:
        key = (scheme, freq)
        if key not in cache:
            s_w = profile.f_nom / freq
            cache[key] = operating_point(
                scheme, profile, curves, s_w, cfg.grid, cfg.weights, n_nodes=n
            )
        return cache[key]

    results = {}
    n_post = len(trace) - cfg.warmup_steps
    nominal_energy = n * p_nominal * tau * len(trace)
    for scheme in cfg.schemes:
        steps = []
        total = 0.0
        qos_count = 0
        mis_count = 0
        prev_freq = profile.f_nom
        for i, (load, (b, capacity, mis)) in enumerate(zip(trace.loads, control)):
            load = float(load)
            if b is None:
                op = OperatingPoint(nominal_pair, profile.f_nom, p_nominal, scheme)
                served = 1.0
            else:
                freq = _quantize_freq(capacity * profile.f_nom, profile.f_nom, cfg.freq_menu_mhz)
                freq = min(freq, profile.f_nom)
                op = point(scheme, freq)
                served = freq / profile.f_nom
            node_power = op.power
            overhead = 0.0
            if op.freq != prev_freq:
                overhead = n * step_overhead_energy(cfg.pll, node_power, tau)[0]
            prev_freq = op.freq
            power_w = n * node_power
            energy = power_w * tau + overhead
            total += energy
            # PG serves capacity with full-speed nodes; same throughput as the shared clock
            qos = load > served + 1e-12
            qos_count += qos
            mis_count += mis
            steps.append(
                StepRecord(
                    step=i,
                    actual_load=load,
                    predicted_bin=b,
                    provisioned_freq=op.freq,
                    pair=op.pair,
                    power_w=power_w,
                    energy_j=energy,
                    pll_overhead_j=overhead,
                    qos_violated=qos,
                    mispredicted=mis,
                )
            )
        results[scheme] = SchemeResult(
            scheme=scheme,
            steps=steps,
            total_energy_j=total,
            nominal_energy_j=nominal_energy,
            mean_power_w=total / (tau * len(trace)),
            power_reduction_x=nominal_energy / total,
            qos_violation_rate=qos_count / len(trace),
            misprediction_rate=mis_count / n_post if n_post else 0.0,
        )
    return SimReport(profile=profile.name, n_steps=len(trace), tau_s=tau, results=results)


@dataclass(frozen=True)
class ComparisonRow:
    scheme: Scheme
    power_reduction_x: float
    proposed_vs_this: Optional[float]


@dataclass
class Comparison:
    profile: str
    rows: list
    best_baseline: Optional[Scheme]
    efficiency: Optional[float]  # proposed reduction / best baseline reduction

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["profile", "scheme", "power_reduction_x", "proposed_vs_this"])
        for r in self.rows:
            w.writerow(
                [self.profile, r.scheme.value, repr(r.power_reduction_x),
                 "" if r.proposed_vs_this is None else repr(r.proposed_vs_this)]
            )
        return buf.getvalue()


def compare_schemes(report_or_config) -> Comparison:
    """Per-scheme reductions and proposed-vs-baseline efficiency ratios."""
    report = report_or_config if isinstance(report_or_config, SimReport) else run(report_or_config)
    prop = report.results.get(Scheme.PROPOSED)
    rows = []
    for scheme, res in report.results.items():
        ratio = None
        if prop is not None and scheme is not Scheme.PROPOSED:
            ratio = prop.power_reduction_x / res.power_reduction_x
        rows.append(ComparisonRow(scheme, res.power_reduction_x, ratio))
    baselines = [r for r in rows if r.scheme is not Scheme.PROPOSED]
    best = max(baselines, key=lambda r: r.power_reduction_x) if baselines else None
    eff = best.proposed_vs_this if best is not None and prop is not None else None
    return Comparison(
        profile=report.profile,
        rows=rows,
        best_baseline=best.scheme if best else None,
        efficiency=eff,
    )

