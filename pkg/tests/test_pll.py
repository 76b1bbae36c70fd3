import pytest

from dualdvfs.pll import PllConfig, break_even_tau, exact_crossover_tau, step_overhead_energy

SINGLE = PllConfig(p_pll_w=0.1, t_lock_s=10e-6, dual=False)
DUAL = PllConfig(p_pll_w=0.1, t_lock_s=10e-6, dual=True)


def test_break_even_value():
    assert break_even_tau(SINGLE, 20.0) == pytest.approx(2e-3, rel=1e-12)


def test_energy_examples():
    e1, stall1 = step_overhead_energy(SINGLE, 20.0, 2e-3)
    e2, stall2 = step_overhead_energy(DUAL, 20.0, 2e-3)
    assert e1 == pytest.approx(401e-6, rel=1e-12)
    assert stall1 == 10e-6
    assert e2 == pytest.approx(400e-6, rel=1e-12)
    assert stall2 == 0.0


def test_crossing_direction():
    # Both energies equal at the exact crossover; two PLLs cost less below it.
    x = exact_crossover_tau(SINGLE, 20.0)
    assert x == pytest.approx(2.01e-3, rel=1e-12)
    assert step_overhead_energy(SINGLE, 20.0, x)[0] == pytest.approx(step_overhead_energy(DUAL, 20.0, x)[0], rel=1e-9)
    for tau in (0.5e-3, 1e-3, 1.9e-3):
        assert step_overhead_energy(DUAL, 20.0, tau)[0] < step_overhead_energy(SINGLE, 20.0, tau)[0]
    for tau in (2.1e-3, 5e-3, 50e-3):
        assert step_overhead_energy(DUAL, 20.0, tau)[0] > step_overhead_energy(SINGLE, 20.0, tau)[0]


def test_crossing_bracketed_near_break_even():
    tau0 = break_even_tau(SINGLE, 20.0)
    diff = [step_overhead_energy(SINGLE, 20.0, t)[0] - step_overhead_energy(DUAL, 20.0, t)[0]
            for t in (0.99 * tau0, 1.01 * tau0)]
    assert diff[0] * diff[1] < 0


def test_validation():
    with pytest.raises(ValueError, match="step shorter than lock time"):
        step_overhead_energy(SINGLE, 20.0, 5e-6)
    with pytest.raises(ValueError):
        PllConfig(t_lock_s=200e-6)
    with pytest.raises(ValueError):
        PllConfig(p_pll_w=0.0)
