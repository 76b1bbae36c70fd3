import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualdvfs.workload import (
    GenParams,
    TraceError,
    WorkloadTrace,
    bin_capacity,
    discretize,
    fgn_autocovariance,
    fgn_davies_harte,
    generate,
    hurst_aggvar,
    load_trace,
    write_trace,
)


def test_same_seed_same_trace():
    a = generate(GenParams(seed=3))
    b = generate(GenParams(seed=3))
    assert np.array_equal(a.loads, b.loads)
    assert not np.array_equal(a.loads, generate(GenParams(seed=4)).loads)


def test_param_validation():
    with pytest.raises(TraceError, match="hurst"):
        GenParams(hurst=0.5)
    with pytest.raises(TraceError, match="too short for self-similar synthesis"):
        GenParams(n_steps=32)
    with pytest.raises(TraceError):
        GenParams(mean_load=1.2)


def test_default_trace_statistics():
    t = generate()
    assert len(t) == 4096
    assert t.loads.mean() == pytest.approx(0.40, rel=1e-9)
    assert abs(hurst_aggvar(t.loads) - 0.76) <= 0.10
    assert t.loads.min() >= 0 and t.loads.max() <= 1


def _cholesky_fgn(n, hurst, rng):
    gamma = fgn_autocovariance(hurst, n)
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return np.linalg.cholesky(gamma[idx]) @ rng.standard_normal(n)


def test_davies_harte_matches_cholesky_covariance():
    # Independent reference: exact Cholesky synthesis of the same covariance.
    n, h, reps = 64, 0.76, 3000
    rng = np.random.default_rng(11)
    dh = np.array([fgn_davies_harte(n, h, rng) for _ in range(reps)])
    ch = np.array([_cholesky_fgn(n, h, rng) for _ in range(reps)])
    target = fgn_autocovariance(h, 4)
    for lag in range(4):
        c_dh = np.mean(dh[:, : n - lag] * dh[:, lag:])
        c_ch = np.mean(ch[:, : n - lag] * ch[:, lag:])
        assert c_dh == pytest.approx(target[lag], abs=0.03)
        assert c_dh == pytest.approx(c_ch, abs=0.04)
    assert target[1] == pytest.approx(2 ** (2 * h - 1) - 1)


def test_burstiness_grows_with_idc():
    stds = [generate(GenParams(idc=idc, seed=1)).loads.std() for idc in (1, 50, 500)]
    assert stds[0] < stds[1] < stds[2]


def test_load_trace_examples(tmp_path):
    t = load_trace("load\n0.1\n0.5\n1.0\n")
    assert list(t.loads) == [0.1, 0.5, 1.0]
    with pytest.raises(TraceError, match="row 2"):
        load_trace("load\n1.5\n")
    with pytest.raises(TraceError, match="row 3"):
        load_trace("load\n0.2\nabc\n")
    with pytest.raises(TraceError, match="header"):
        load_trace("util\n0.2\n")
    with pytest.raises(TraceError, match="empty"):
        load_trace("load\n")
    p = tmp_path / "t.csv"
    p.write_text("load\n0.25\n")
    assert load_trace(p, tau_s=0.5).tau_s == 0.5
    assert list(load_trace(io.StringIO("load\n0.3\n")).loads) == [0.3]


def test_write_then_read(tmp_path):
    t = generate(GenParams(n_steps=128, seed=9))
    paths = write_trace(t, tmp_path / "trace.csv")
    assert paths[1].name == "trace.meta.json"
    back = load_trace(paths[0])
    assert np.array_equal(back.loads, t.loads)


def test_trace_rejects_out_of_range():
    with pytest.raises(TraceError, match="step 1"):
        WorkloadTrace([0.2, -0.1])


def test_discretize_examples():
    assert discretize(0.0, 10) == 0
    assert discretize(0.05, 10) == 0
    assert discretize(0.1, 10) == 1
    assert discretize(1.0, 10) == 9
    assert bin_capacity(9, 10) == 1.0
    with pytest.raises(ValueError):
        discretize(1.01, 10)
    with pytest.raises(ValueError):
        discretize(0.5, 1)


@given(st.floats(0.0, 1.0), st.integers(2, 64))
def test_discretize_bounds(load, m):
    b = discretize(load, m)
    assert 0 <= b < m
    assert load <= bin_capacity(b, m) + 1e-12
    if b < m - 1:
        assert load < (b + 1) / m


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(2, 64))
def test_discretize_monotone(a, b, m):
    lo, hi = sorted((a, b))
    assert discretize(lo, m) <= discretize(hi, m)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.9), st.integers(0, 2**31 - 1))
def test_generated_mean_is_exact(mean, seed):
    t = generate(GenParams(mean_load=mean, n_steps=256, seed=seed))
    assert t.loads.mean() == pytest.approx(mean, rel=1e-9)
