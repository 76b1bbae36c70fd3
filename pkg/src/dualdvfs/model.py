"""Critical-path timing and rail power of an application at a voltage pair."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from .characterization import (
    CharacterizationError,
    CurveKind,
    ResourceClass,
    ResourceCurves,
    data_dir,
    factor,
)

# relative slack on the timing comparison; keeps the nominal pair feasible at s_w = 1
TIMING_RTOL = 1e-12

PROFILE_NAMES = ("tabla", "dnnweaver", "diannao", "stripes", "proteus")


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class VoltagePair:
    v_core: float
    v_bram: float

    def check(self, curves: ResourceCurves) -> None:
        lo = curves.v_crash - 1e-9
        if not lo <= self.v_core <= curves.v_core_nominal + 1e-9:
            raise CharacterizationError(
                f"v_core {self.v_core} V outside [{curves.v_crash}, {curves.v_core_nominal}] V"
            )
        if not lo <= self.v_bram <= curves.v_bram_nominal + 1e-9:
            raise CharacterizationError(
                f"v_bram {self.v_bram} V outside [{curves.v_crash}, {curves.v_bram_nominal}] V"
            )

    @classmethod
    def nominal(cls, curves: ResourceCurves) -> "VoltagePair":
        return cls(curves.v_core_nominal, curves.v_bram_nominal)


@dataclass(frozen=True)
class CoreWeights:
    """Utilization weights used to average logic/routing/DSP curves on the core rail."""

    logic: float = 0.45
    routing: float = 0.45
    dsp: float = 0.10

    def __post_init__(self):
        ws = (self.logic, self.routing, self.dsp)
        if any(w < 0 for w in ws) or not math.isclose(sum(ws), 1.0, abs_tol=1e-9):
            raise ValueError(f"core weights must be non-negative and sum to 1, got {ws}")

    def items(self):
        return (
            (ResourceClass.LOGIC, self.logic),
            (ResourceClass.ROUTING, self.routing),
            (ResourceClass.DSP, self.dsp),
        )


DEFAULT_WEIGHTS = CoreWeights()


@dataclass(frozen=True)
class AppProfile:
    """Timing/power decomposition of one application at nominal voltages.

    ``d_l0``/``d_m0`` are the logic+routing and memory shares of the critical
    path in ns, ``beta`` weights the BRAM rail in total power, the ``p_*`` are
    nominal rail powers in W and ``f_nom`` is the nominal clock in MHz.
    """

    name: str
    d_l0: float
    d_m0: float
    beta: float
    p_core_dyn0: float
    p_core_stat0: float
    p_bram_dyn0: float
    p_bram_stat0: float
    f_nom: float

    def __post_init__(self):
        if not self.d_l0 > 0:
            raise ProfileError(f"{self.name}: d_l0 must be positive")
        if self.d_m0 < 0:
            raise ProfileError(f"{self.name}: d_m0 must be non-negative")
        if self.beta < 0:
            raise ProfileError(f"{self.name}: beta must be non-negative")
        for fld in ("p_core_dyn0", "p_core_stat0", "p_bram_dyn0", "p_bram_stat0"):
            if getattr(self, fld) < 0:
                raise ProfileError(f"{self.name}: {fld} must be non-negative")
        expected = 1e3 / (self.d_l0 + self.d_m0)
        if not math.isclose(self.f_nom, expected, rel_tol=1e-6):
            raise ProfileError(
                f"{self.name}: f_nom {self.f_nom} MHz inconsistent with "
                f"d_l0+d_m0 = {self.d_l0 + self.d_m0} ns ({expected:.6g} MHz)"
            )

    @property
    def alpha(self) -> float:
        return self.d_m0 / self.d_l0

    @property
    def period_ns(self) -> float:
        return self.d_l0 + self.d_m0

    @classmethod
    def from_alpha(cls, name: str, f_nom: float, alpha: float, beta: float, **powers) -> "AppProfile":
        """Split the nominal clock period into logic and memory shares by ``alpha``."""
        period = 1e3 / f_nom
        d_l0 = period / (1.0 + alpha)
        return cls(name=name, d_l0=d_l0, d_m0=period - d_l0, beta=beta, f_nom=f_nom, **powers)

    def with_alpha(self, alpha: float) -> "AppProfile":
        powers = {k: getattr(self, k) for k in ("p_core_dyn0", "p_core_stat0", "p_bram_dyn0", "p_bram_stat0")}
        return AppProfile.from_alpha(self.name, self.f_nom, alpha, self.beta, **powers)

    def with_beta(self, beta: float) -> "AppProfile":
        return AppProfile(**{**asdict(self), "beta": beta})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def load_profile(source) -> AppProfile:
    """Load a profile from a JSON path, a bundled name, or a mapping."""
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        if not path.suffix and not path.exists():
            path = data_dir() / "profiles" / f"{source}.json"
        if not path.exists():
            raise ProfileError(f"unknown profile {str(source)!r}")
        doc = json.loads(path.read_text(encoding="utf-8"))
    fields = set(AppProfile.__dataclass_fields__)
    missing = fields - set(doc)
    if missing:
        raise ProfileError(f"profile is missing fields: {', '.join(sorted(missing))}")
    unknown = set(doc) - fields
    if unknown:
        raise ProfileError(f"profile has unknown fields: {', '.join(sorted(unknown))}")
    return AppProfile(**doc)


def bundled_profiles() -> list[AppProfile]:
    return [load_profile(name) for name in PROFILE_NAMES]


def reference_profile() -> AppProfile:
    """Generic accelerator with alpha = 0.2 and beta = 0.4."""
    return load_profile("reference")


def workload_factor(load: float) -> float:
    """Allowed clock-period stretch for a normalized load in (0, 1]."""
    if not 0.0 < load <= 1.0:
        raise ValueError(f"load must be in (0, 1], got {load}")
    return 1.0 / load


def _delay_factors(curves: ResourceCurves, pair: VoltagePair) -> tuple[float, float]:
    d_l = factor(curves, ResourceClass.LOGIC, CurveKind.DELAY, pair.v_core)
    d_m = factor(curves, ResourceClass.MEMORY, CurveKind.DELAY, pair.v_bram)
    return d_l, d_m


def critical_path_delay(profile: AppProfile, curves: ResourceCurves, pair: VoltagePair) -> float:
    pair.check(curves)
    d_l, d_m = _delay_factors(curves, pair)
    return profile.d_l0 * d_l + profile.d_m0 * d_m


def timing_feasible(
    profile: AppProfile, curves: ResourceCurves, pair: VoltagePair, s_w: float
) -> bool:
    """True when the scaled critical path fits in the stretched clock period."""
    if s_w < 1.0:
        raise ValueError(f"workload factor must be >= 1, got {s_w}")
    pair.check(curves)
    d_l, d_m = _delay_factors(curves, pair)
    alpha = profile.alpha
    return d_l + alpha * d_m <= (1.0 + alpha) * s_w * (1.0 + TIMING_RTOL)


def core_rail_factors(
    curves: ResourceCurves, v_core: float, weights: CoreWeights = DEFAULT_WEIGHTS
) -> tuple[float, float]:
    """Utilization-weighted (dynamic, static) power factors of the core rail."""
    dyn = 0.0
    stat = 0.0
    for cls, w in weights.items():
        dyn += w * factor(curves, cls, CurveKind.DYNAMIC_POWER, v_core)
        stat += w * factor(curves, cls, CurveKind.STATIC_POWER, v_core)
    return dyn, stat


def bram_rail_factors(curves: ResourceCurves, v_bram: float) -> tuple[float, float]:
    return (
        factor(curves, ResourceClass.MEMORY, CurveKind.DYNAMIC_POWER, v_bram),
        factor(curves, ResourceClass.MEMORY, CurveKind.STATIC_POWER, v_bram),
    )


def rail_power(
    profile: AppProfile,
    freq_ratio: float,
    core_dyn: float,
    core_stat: float,
    bram_dyn: float,
    bram_stat: float,
) -> float:
    # Shared by the scalar and vectorized paths so both round identically.
    core = profile.p_core_dyn0 * freq_ratio * core_dyn + profile.p_core_stat0 * core_stat
    bram = profile.p_bram_dyn0 * freq_ratio * bram_dyn + profile.p_bram_stat0 * bram_stat
    return core + profile.beta * bram


def circuit_power(
    profile: AppProfile,
    curves: ResourceCurves,
    pair: VoltagePair,
    freq: float,
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> float:
    """Device power in W at ``pair`` and clock ``freq`` (MHz)."""
    if not freq > 0:
        raise ValueError(f"frequency must be positive, got {freq}")
    pair.check(curves)
    c_dyn, c_stat = core_rail_factors(curves, pair.v_core, weights)
    b_dyn, b_stat = bram_rail_factors(curves, pair.v_bram)
    return rail_power(profile, freq / profile.f_nom, c_dyn, c_stat, b_dyn, b_stat)


def nominal_power(
    profile: AppProfile,
    curves: ResourceCurves,
    weights: CoreWeights = DEFAULT_WEIGHTS,
    freq: Optional[float] = None,
) -> float:
    return circuit_power(
        profile, curves, VoltagePair.nominal(curves), profile.f_nom if freq is None else freq, weights
    )
