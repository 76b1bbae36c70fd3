"""Voltage characterization of FPGA resource classes.

Each resource class (logic, routing, memory, DSP) carries three tables that
map a supply voltage to a dimensionless factor relative to nominal operation:
delay, dynamic power and static power.  Tables are piecewise linear between
knots and are loaded from a small CSV file::

    class,kind,voltage_v,factor
    logic,delay,0.500,2.34
    ...

The bundled ``default_curves.csv`` is synthetic.  It was shaped by hand to
follow the qualitative behaviour of 22nm FPGA resources (steep logic delay,
tolerant routing, memory delay flat down to ~0.80 V and then spiking, memory
leakage dropping by ~75% between 0.95 V and 0.80 V); it is not measured data.
"""

from __future__ import annotations

import bisect
import csv
import io
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Union

V_CORE_NOMINAL = 0.80
V_BRAM_NOMINAL = 0.95
V_CRASH = 0.50

NOMINAL_TOLERANCE = 1e-9
# absorbs float noise when a grid voltage is compared with a table bound
_VOLTAGE_EPS = 1e-9

DATA_DIR_ENV = "DUALDVFS_DATA_DIR"


class CharacterizationError(ValueError):
    """Raised for malformed characterization files or invalid lookups."""


class ResourceClass(Enum):
    LOGIC = "logic"
    ROUTING = "routing"
    MEMORY = "memory"
    DSP = "dsp"

    @property
    def on_bram_rail(self) -> bool:
        return self is ResourceClass.MEMORY


CORE_CLASSES = (ResourceClass.LOGIC, ResourceClass.ROUTING, ResourceClass.DSP)


class CurveKind(Enum):
    DELAY = "delay"
    DYNAMIC_POWER = "pdyn"
    STATIC_POWER = "pstat"


@dataclass(frozen=True)
class CurveTable:
    """Ordered (voltage, factor) knots for one resource class and kind."""

    voltages: tuple[float, ...]
    factors: tuple[float, ...]
    kind: CurveKind

    def __post_init__(self):
        if len(self.voltages) != len(self.factors):
            raise CharacterizationError("voltage and factor columns differ in length")
        if len(self.voltages) < 2:
            raise CharacterizationError(
                f"{self.kind.value} table needs at least 2 points, got {len(self.voltages)}"
            )
        for a, b in zip(self.voltages, self.voltages[1:]):
            if not b > a:
                raise CharacterizationError(
                    f"voltages must be strictly increasing ({a} then {b})"
                )
        for f in self.factors:
            if f < 0:
                raise CharacterizationError(f"negative factor {f}")
        pairs = zip(self.factors, self.factors[1:])
        if self.kind is CurveKind.DELAY:
            bad = [i for i, (a, b) in enumerate(pairs) if b > a]
            what = "non-increasing"
        else:
            bad = [i for i, (a, b) in enumerate(pairs) if b < a]
            what = "non-decreasing"
        if bad:
            i = bad[0]
            raise CharacterizationError(
                f"{self.kind.value} table must be {what} in voltage; violated between "
                f"{self.voltages[i]} V and {self.voltages[i + 1]} V"
            )

    @property
    def v_min(self) -> float:
        return self.voltages[0]

    @property
    def v_max(self) -> float:
        return self.voltages[-1]

    def __call__(self, v: float) -> float:
        """Piecewise-linear lookup; exact at knots. No range checks here."""
        vs = self.voltages
        i = bisect.bisect_left(vs, v)
        if i < len(vs) and vs[i] == v:
            return self.factors[i]
        if i == 0:
            i = 1
        elif i == len(vs):
            i = len(vs) - 1
        v0, v1 = vs[i - 1], vs[i]
        f0, f1 = self.factors[i - 1], self.factors[i]
        return f0 + (f1 - f0) * (v - v0) / (v1 - v0)


@dataclass(frozen=True)
class ResourceCurves:
    tables: dict = field(repr=False)
    v_core_nominal: float = V_CORE_NOMINAL
    v_bram_nominal: float = V_BRAM_NOMINAL
    v_crash: float = V_CRASH

    def __post_init__(self):
        missing = [
            f"{c.value}/{k.value}"
            for c in ResourceClass
            for k in CurveKind
            if (c, k) not in self.tables
        ]
        if missing:
            raise CharacterizationError(f"missing resource curves: {', '.join(missing)}")
        for (cls, kind), table in self.tables.items():
            v_nom = self.nominal_for(cls)
            if not table.v_min - _VOLTAGE_EPS <= v_nom <= table.v_max + _VOLTAGE_EPS:
                raise CharacterizationError(
                    f"{cls.value}/{kind.value} table does not cover nominal {v_nom} V"
                )
            at_nom = table(v_nom)
            if abs(at_nom - 1.0) > NOMINAL_TOLERANCE:
                raise CharacterizationError(
                    f"{cls.value}/{kind.value} factor at nominal {v_nom} V is {at_nom}, expected 1.0"
                )

    def nominal_for(self, cls: ResourceClass) -> float:
        return self.v_bram_nominal if cls.on_bram_rail else self.v_core_nominal

    def table(self, cls: ResourceClass, kind: CurveKind) -> CurveTable:
        return self.tables[(cls, kind)]


def factor(curves: ResourceCurves, cls: ResourceClass, kind: CurveKind, v: float) -> float:
    """Interpolated factor of ``cls``/``kind`` at voltage ``v``.

    Raises CharacterizationError below the crash voltage or outside the
    table range.
    """
    if v < curves.v_crash - _VOLTAGE_EPS:
        raise CharacterizationError(
            f"{v} V is below crash voltage {curves.v_crash} V"
        )
    table = curves.tables[(cls, kind)]
    if v > table.v_max + _VOLTAGE_EPS or v < table.v_min - _VOLTAGE_EPS:
        raise CharacterizationError(
            f"{v} V outside {cls.value}/{kind.value} table range "
            f"[{table.v_min}, {table.v_max}] V"
        )
    return table(v)


def _parse_rows(rows: Iterable[dict], first_line: int = 2):
    points: dict = {}
    classes = {c.value: c for c in ResourceClass}
    kinds = {k.value: k for k in CurveKind}
    for lineno, row in enumerate(rows, start=first_line):
        try:
            cls = classes[row["class"].strip().lower()]
        except (KeyError, AttributeError):
            raise CharacterizationError(f"row {lineno}: unknown class {row.get('class')!r}")
        try:
            kind = kinds[row["kind"].strip().lower()]
        except (KeyError, AttributeError):
            raise CharacterizationError(f"row {lineno}: unknown kind {row.get('kind')!r}")
        try:
            v = float(row["voltage_v"])
            f = float(row["factor"])
        except (TypeError, ValueError):
            raise CharacterizationError(f"row {lineno}: voltage/factor must be numbers")
        points.setdefault((cls, kind), []).append((v, f, lineno))
    return points


def load_curves(
    source: Union[str, os.PathLike, io.TextIOBase],
    v_core_nominal: float = V_CORE_NOMINAL,
    v_bram_nominal: float = V_BRAM_NOMINAL,
    v_crash: float = V_CRASH,
) -> ResourceCurves:
    """Parse and validate a characterization CSV.

    ``source`` may be a path, an open text stream, or the CSV content itself
    (any string containing a newline is treated as content).
    """
    if isinstance(source, io.TextIOBase):
        text = source.read()
    elif isinstance(source, str) and ("\n" in source or not source):
        text = source
    else:
        text = Path(source).read_text(encoding="utf-8")

    reader = csv.DictReader(io.StringIO(text))
    expected = {"class", "kind", "voltage_v", "factor"}
    if reader.fieldnames is None or set(f.strip() for f in reader.fieldnames) != expected:
        raise CharacterizationError(
            f"header must be 'class,kind,voltage_v,factor', got {reader.fieldnames}"
        )
    points = _parse_rows(reader)

    tables = {}
    for key, pts in points.items():
        pts.sort()
        for (va, _, la), (vb, _, lb) in zip(pts, pts[1:]):
            if va == vb:
                raise CharacterizationError(
                    f"rows {la} and {lb}: duplicate voltage {va} for {key[0].value}/{key[1].value}"
                )
        try:
            tables[key] = CurveTable(
                voltages=tuple(p[0] for p in pts),
                factors=tuple(p[1] for p in pts),
                kind=key[1],
            )
        except CharacterizationError as exc:
            raise CharacterizationError(f"{key[0].value}/{key[1].value}: {exc}") from None

    return ResourceCurves(
        tables=tables,
        v_core_nominal=v_core_nominal,
        v_bram_nominal=v_bram_nominal,
        v_crash=v_crash,
    )


def data_dir() -> Path:
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "data"


_default_cache: dict = {}


def default_curves() -> ResourceCurves:
    """The bundled synthetic characterization (cached per data directory)."""
    path = data_dir() / "default_curves.csv"
    key = str(path)
    if key not in _default_cache:
        _default_cache[key] = load_curves(path)
    return _default_cache[key]

