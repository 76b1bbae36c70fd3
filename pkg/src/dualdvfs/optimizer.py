"""Operating-point selection for each voltage/frequency scaling scheme.

All voltage schemes search the same discrete grid exhaustively. The grids are
tiny (at most 13 x 19 points with the defaults) so the search is vectorized
over the whole grid instead of pruned; optimality holds by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .characterization import CurveKind, ResourceClass, ResourceCurves, factor
from .model import (
    DEFAULT_WEIGHTS,
    TIMING_RTOL,
    AppProfile,
    CoreWeights,
    VoltagePair,
    bram_rail_factors,
    circuit_power,
    core_rail_factors,
    nominal_power,
    rail_power,
)


class Scheme(Enum):
    PROPOSED = "proposed"
    CORE_ONLY = "core-only"
    BRAM_ONLY = "bram-only"
    FREQ_ONLY = "freq-only"
    POWER_GATING = "pg"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r} (expected one of: {valid})") from None


ALL_SCHEMES = tuple(Scheme)


@dataclass(frozen=True)
class VoltageGrid:
    """Uniform per-rail voltage grid from ``v_min`` up to ``v_max``.

    ``v_max=None`` means "up to the rail's nominal voltage", which is how the
    same grid object serves both rails.
    """

    v_min: float = 0.50
    step: float = 0.025
    v_max: Optional[float] = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.v_max is not None:
            self._count(self.v_max)

    def _count(self, top: float) -> int:
        span = (top - self.v_min) / self.step
        n = round(span)
        if span < -1e-9 or abs(span - n) > 1e-6:
            raise ValueError(
                f"grid span {self.v_min}..{top} V is not a whole number of {self.step} V steps"
            )
        return n

    def points(self, v_nominal: float) -> tuple[float, ...]:
        top = v_nominal if self.v_max is None else min(self.v_max, v_nominal)
        n = self._count(top)
        return tuple(round(self.v_min + k * self.step, 9) for k in range(n + 1))


@dataclass(frozen=True)
class OperatingPoint:
    pair: VoltagePair
    freq: float
    power: float
    scheme: Scheme
    s_w: float = 1.0


def _check_sw(s_w: float) -> None:
    if not s_w >= 1.0:
        raise ValueError(f"workload factor must be >= 1, got {s_w}")


def _grid_search(
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    core_vs: Sequence[float],
    bram_vs: Sequence[float],
    scheme: Scheme,
    weights: CoreWeights,
) -> OperatingPoint:
    _check_sw(s_w)
    # descending order: argmin's first hit is then the highest v_bram, then highest v_core
    core_vs = sorted(core_vs, reverse=True)
    bram_vs = sorted(bram_vs, reverse=True)

    d_l = np.array([factor(curves, ResourceClass.LOGIC, CurveKind.DELAY, v) for v in core_vs])
    d_m = np.array([factor(curves, ResourceClass.MEMORY, CurveKind.DELAY, v) for v in bram_vs])
    core_f = np.array([core_rail_factors(curves, v, weights) for v in core_vs])
    bram_f = np.array([bram_rail_factors(curves, v) for v in bram_vs])

    alpha = profile.alpha
    feasible = d_l[None, :] + alpha * d_m[:, None] <= (1.0 + alpha) * s_w * (1.0 + TIMING_RTOL)

    freq = profile.f_nom / s_w
    power = rail_power(
        profile,
        freq / profile.f_nom,
        core_f[None, :, 0],
        core_f[None, :, 1],
        bram_f[:, None, 0],
        bram_f[:, None, 1],
    )
    power = np.where(feasible, power, np.inf)
    idx = int(np.argmin(power))
    ib, ic = divmod(idx, len(core_vs))
    if not math.isfinite(power[ib, ic]):
        raise RuntimeError(f"no feasible voltage pair at s_w={s_w} (nominal must be feasible)")
    return OperatingPoint(
        pair=VoltagePair(core_vs[ic], bram_vs[ib]),
        freq=freq,
        power=float(power[ib, ic]),
        scheme=scheme,
        s_w=s_w,
    )


def optimize_joint(
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    grid: VoltageGrid = VoltageGrid(),
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> OperatingPoint:
    """Minimum-power (v_core, v_bram) pair meeting timing at clock f_nom / s_w."""
    return _grid_search(
        profile,
        curves,
        s_w,
        grid.points(curves.v_core_nominal),
        grid.points(curves.v_bram_nominal),
        Scheme.PROPOSED,
        weights,
    )


def optimize_core_only(
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    grid: VoltageGrid = VoltageGrid(),
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> OperatingPoint:
    return _grid_search(
        profile,
        curves,
        s_w,
        grid.points(curves.v_core_nominal),
        [curves.v_bram_nominal],
        Scheme.CORE_ONLY,
        weights,
    )


def optimize_bram_only(
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    grid: VoltageGrid = VoltageGrid(),
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> OperatingPoint:
    return _grid_search(
        profile,
        curves,
        s_w,
        [curves.v_core_nominal],
        grid.points(curves.v_bram_nominal),
        Scheme.BRAM_ONLY,
        weights,
    )


def frequency_only_power(
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> float:
    _check_sw(s_w)
    return circuit_power(profile, curves, VoltagePair.nominal(curves), profile.f_nom / s_w, weights)


def active_nodes(load: float, n_nodes: int) -> int:
    if not 0.0 < load <= 1.0:
        raise ValueError(f"load must be in (0, 1], got {load}")
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    # tolerance keeps e.g. 0.3 * 10 = 3.0000000000000004 at 3 nodes
    return min(n_nodes, math.ceil(load * n_nodes - 1e-9))


def power_gating_power(
    profile: AppProfile,
    curves: ResourceCurves,
    load: float,
    n_nodes: int,
    weights: CoreWeights = DEFAULT_WEIGHTS,
) -> float:
    """Per-node average power when only ceil(load * n) nodes run, at nominal V/f.

    Wake-up time and energy of gated nodes are ignored.
    """
    active = active_nodes(load, n_nodes)
    return active / n_nodes * nominal_power(profile, curves, weights)


def operating_point(
    scheme: Scheme,
    profile: AppProfile,
    curves: ResourceCurves,
    s_w: float,
    grid: VoltageGrid = VoltageGrid(),
    weights: CoreWeights = DEFAULT_WEIGHTS,
    n_nodes: int = 1,
) -> OperatingPoint:
    """Dispatch to the scheme's policy; PG and frequency-only keep nominal voltages."""
    if scheme is Scheme.PROPOSED:
        return optimize_joint(profile, curves, s_w, grid, weights)
    if scheme is Scheme.CORE_ONLY:
        return optimize_core_only(profile, curves, s_w, grid, weights)
    if scheme is Scheme.BRAM_ONLY:
        return optimize_bram_only(profile, curves, s_w, grid, weights)
    nominal = VoltagePair.nominal(curves)
    if scheme is Scheme.FREQ_ONLY:
        power = frequency_only_power(profile, curves, s_w, weights)
        return OperatingPoint(nominal, profile.f_nom / s_w, power, scheme, s_w)
    if scheme is Scheme.POWER_GATING:
        _check_sw(s_w)
        power = power_gating_power(profile, curves, 1.0 / s_w, n_nodes, weights)
        return OperatingPoint(nominal, profile.f_nom, power, scheme, s_w)
    raise ValueError(f"unhandled scheme {scheme}")
