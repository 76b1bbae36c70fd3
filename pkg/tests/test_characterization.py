import io

import numpy as np
import pytest

from dualdvfs.characterization import (
    CharacterizationError,
    CurveKind,
    ResourceClass,
    data_dir,
    factor,
    load_curves,
)

DEFAULT_CSV = (data_dir() / "default_curves.csv").read_text()


def _replace_row(text, prefix, new_factor):
    out = []
    for line in text.splitlines():
        if line.startswith(prefix):
            cls, kind, v, _ = line.split(",")
            line = f"{cls},{kind},{v},{new_factor}"
        out.append(line)
    return "\n".join(out) + "\n"


def test_bundled_nominals(curves):
    assert curves.v_core_nominal == 0.80
    assert curves.v_bram_nominal == 0.95
    assert curves.v_crash == 0.50


def test_single_point_table_rejected():
    text = "class,kind,voltage_v,factor\n" + "\n".join(
        l for l in DEFAULT_CSV.splitlines()[1:] if not l.startswith("dsp,pstat,")
    ) + "\ndsp,pstat,0.800,1.0\n"
    with pytest.raises(CharacterizationError, match="at least 2 points"):
        load_curves(text)


def test_delay_increasing_with_voltage_rejected():
    bad = _replace_row(DEFAULT_CSV, "logic,delay,0.900", "1.5")
    with pytest.raises(CharacterizationError, match="non-increasing"):
        load_curves(bad)


def test_power_decreasing_with_voltage_rejected():
    bad = _replace_row(DEFAULT_CSV, "memory,pstat,0.700", "0.9")
    with pytest.raises(CharacterizationError, match="non-decreasing"):
        load_curves(bad)


def test_missing_class_rejected():
    text = "\n".join(l for l in DEFAULT_CSV.splitlines() if not l.startswith("dsp,")) + "\n"
    with pytest.raises(CharacterizationError, match="missing resource curves"):
        load_curves(text)


def test_nominal_factor_must_be_one():
    bad = _replace_row(DEFAULT_CSV, "routing,pdyn,0.800", "1.0001")
    with pytest.raises(CharacterizationError, match="expected 1.0"):
        load_curves(bad)


def test_bad_header_and_bad_value():
    with pytest.raises(CharacterizationError, match="header"):
        load_curves("cls,kind,v,f\nlogic,delay,0.5,1\n")
    bad = DEFAULT_CSV.replace("logic,delay,0.500,", "logic,delay,abc,", 1)
    with pytest.raises(CharacterizationError, match="row 2"):
        load_curves(bad)


def test_rows_in_any_order(curves):
    lines = DEFAULT_CSV.splitlines()
    shuffled = [lines[0]] + list(reversed(lines[1:]))
    other = load_curves(io.StringIO("\n".join(shuffled) + "\n"))
    for cls in ResourceClass:
        for kind in CurveKind:
            assert other.table(cls, kind) == curves.table(cls, kind)


def test_memory_delay_nominal(curves):
    assert factor(curves, ResourceClass.MEMORY, CurveKind.DELAY, 0.95) == 1.0


def test_midpoint_is_mean_of_knots(curves):
    t = curves.table(ResourceClass.LOGIC, CurveKind.DELAY)
    v0, v1 = t.voltages[3], t.voltages[4]
    mid = factor(curves, ResourceClass.LOGIC, CurveKind.DELAY, (v0 + v1) / 2)
    assert mid == pytest.approx((t.factors[3] + t.factors[4]) / 2, rel=1e-12)


def test_memory_static_power_drop(curves):
    assert factor(curves, ResourceClass.MEMORY, CurveKind.STATIC_POWER, 0.80) <= 0.25


def test_below_crash_and_above_range(curves):
    with pytest.raises(CharacterizationError, match="below crash voltage"):
        factor(curves, ResourceClass.LOGIC, CurveKind.DELAY, 0.49)
    with pytest.raises(CharacterizationError, match="outside"):
        factor(curves, ResourceClass.LOGIC, CurveKind.DELAY, 1.01)


@pytest.mark.parametrize("cls", list(ResourceClass))
@pytest.mark.parametrize("kind", list(CurveKind))
def test_monotone_at_1mv(curves, cls, kind):
    t = curves.table(cls, kind)
    vs = np.round(np.arange(t.v_min, t.v_max + 1e-9, 0.001), 6)
    fs = np.array([factor(curves, cls, kind, float(v)) for v in vs])
    diffs = np.diff(fs)
    if kind is CurveKind.DELAY:
        assert np.all(diffs <= 1e-15)
    else:
        assert np.all(diffs >= -1e-15)


@pytest.mark.parametrize("cls", list(ResourceClass))
@pytest.mark.parametrize("kind", list(CurveKind))
def test_knots_exact_and_nominal_one(curves, cls, kind):
    t = curves.table(cls, kind)
    for v, f in zip(t.voltages, t.factors):
        assert factor(curves, cls, kind, v) == f
    assert factor(curves, cls, kind, curves.nominal_for(cls)) == 1.0


def test_rail_membership():
    assert ResourceClass.MEMORY.on_bram_rail
    assert not any(c.on_bram_rail for c in (ResourceClass.LOGIC, ResourceClass.ROUTING, ResourceClass.DSP))


def test_data_dir_env_override(tmp_path, monkeypatch):
    (tmp_path / "default_curves.csv").write_text(DEFAULT_CSV)
    monkeypatch.setenv("DUALDVFS_DATA_DIR", str(tmp_path))
    assert data_dir() == tmp_path
