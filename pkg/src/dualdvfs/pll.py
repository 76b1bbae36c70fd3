"""Clock-switch overhead of one PLL versus a pair of ping-ponged PLLs."""

from __future__ import annotations

from dataclasses import dataclass

MAX_LOCK_S = 100e-6


@dataclass(frozen=True)
class PllConfig:
    p_pll_w: float = 0.1
    t_lock_s: float = 10e-6
    dual: bool = True

    def __post_init__(self):
        if not self.p_pll_w > 0:
            raise ValueError(f"p_pll_w must be positive, got {self.p_pll_w}")
        if not 0 < self.t_lock_s <= MAX_LOCK_S:
            raise ValueError(f"t_lock_s must be in (0, {MAX_LOCK_S}], got {self.t_lock_s}")


def step_overhead_energy(cfg: PllConfig, p_design_w: float, tau_s: float) -> tuple[float, float]:
    """(energy J, stall s) charged for one step that changes frequency.

    One PLL stalls the design for the lock time and burns its own power over
    the step plus the lock; two PLLs never stall but both run for the step.
    """
    if not tau_s > cfg.t_lock_s:
        raise ValueError(f"step shorter than lock time ({tau_s} s <= {cfg.t_lock_s} s)")
    if cfg.dual:
        return 2.0 * cfg.p_pll_w * tau_s, 0.0
    energy = p_design_w * cfg.t_lock_s + cfg.p_pll_w * (tau_s + cfg.t_lock_s)
    return energy, cfg.t_lock_s


def break_even_tau(cfg: PllConfig, p_design_w: float) -> float:
    """Step length where the design's lock-time energy equals one PLL's step energy.

    This is the small-lock-time form P_design * t_lock = P_pll * tau.  The
    exact crossing of the two energies sits at (P_design + P_pll) * t_lock /
    P_pll, within P_pll / P_design of this value.  Shorter steps favour two
    PLLs; longer steps favour a single PLL.
    """
    return p_design_w * cfg.t_lock_s / cfg.p_pll_w


def exact_crossover_tau(cfg: PllConfig, p_design_w: float) -> float:
    return (p_design_w + cfg.p_pll_w) * cfg.t_lock_s / cfg.p_pll_w
