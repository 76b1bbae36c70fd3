"""Workload traces: CSV ingest, self-similar synthesis and load binning.

Synthetic traces come from fractional Gaussian noise (Davies-Harte circulant
embedding).  The noise is shaped into per-step arrival counts with mean
``lambda_rate`` and variance ``idc * lambda_rate``, and counts are mapped to
load fractions so that the trace mean equals ``mean_load``; the expected peak
load is therefore ``lambda_rate / mean_load`` arrivals per step.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

MIN_SYNTH_STEPS = 64


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    mean_load: float = 0.40
    hurst: float = 0.76
    idc: float = 500.0
    lambda_rate: float = 1000.0
    n_steps: int = 4096
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.mean_load < 1.0:
            raise TraceError(f"mean_load must be in (0, 1), got {self.mean_load}")
        if not 0.5 < self.hurst <= 1.0:
            raise TraceError(f"hurst must be in (0.5, 1], got {self.hurst}")
        if not self.idc > 0:
            raise TraceError(f"idc must be positive, got {self.idc}")
        if not self.lambda_rate > 0:
            raise TraceError(f"lambda_rate must be positive, got {self.lambda_rate}")
        if self.n_steps < MIN_SYNTH_STEPS:
            raise TraceError(
                f"n_steps={self.n_steps} too short for self-similar synthesis "
                f"(need >= {MIN_SYNTH_STEPS})"
            )


@dataclass
class WorkloadTrace:
    loads: np.ndarray
    tau_s: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.loads = np.asarray(self.loads, dtype=float)
        if self.loads.ndim != 1 or len(self.loads) < 1:
            raise TraceError("trace needs at least one step")
        if not self.tau_s > 0:
            raise TraceError(f"tau_s must be positive, got {self.tau_s}")
        bad = np.flatnonzero((self.loads < 0) | (self.loads > 1) | ~np.isfinite(self.loads))
        if len(bad):
            raise TraceError(f"load at step {bad[0]} outside [0, 1]: {self.loads[bad[0]]}")

    def __len__(self):
        return len(self.loads)


def fgn_autocovariance(hurst: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * np.abs(k) ** h2 + np.abs(k - 1) ** h2)


def fgn_davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance fractional Gaussian noise of length ``n``."""
    gamma = fgn_autocovariance(hurst, n + 1)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    m = len(row)  # 2n
    lam = np.fft.fft(row).real
    if lam.min() < -1e-8 * lam.max():
        raise ArithmeticError("circulant embedding is not non-negative definite")
    lam = np.clip(lam, 0.0, None)

    half = m // 2
    w = np.zeros(m, dtype=complex)
    w[0] = np.sqrt(lam[0] / m) * rng.standard_normal()
    w[half] = np.sqrt(lam[half] / m) * rng.standard_normal()
    re = rng.standard_normal(half - 1)
    im = rng.standard_normal(half - 1)
    w[1:half] = np.sqrt(lam[1:half] / (2 * m)) * (re + 1j * im)
    w[half + 1:] = np.conj(w[1:half][::-1])
    return np.fft.fft(w).real[:n]


def synthesize_counts(params: GenParams) -> np.ndarray:
    """Non-negative per-step arrival counts with the target mean and IDC."""
    rng = np.random.default_rng(params.seed)
    z = fgn_davies_harte(params.n_steps, params.hurst, rng)
    # pin sample moments; long-range dependence makes the raw sample mean wander
    z = (z - z.mean()) / z.std()
    sigma = np.sqrt(params.idc * params.lambda_rate)
    return np.clip(np.rint(params.lambda_rate + sigma * z), 0.0, None)


def _loads_from_counts(counts: np.ndarray, params: GenParams) -> tuple[np.ndarray, float]:
    base = counts / params.lambda_rate * params.mean_load
    target = params.mean_load

    def gap(gain):
        return np.clip(gain * base, 0.0, 1.0).mean() - target

    if abs(gap(1.0)) < 1e-12:
        gain = 1.0
    else:
        hi = 1.0
        while gap(hi) < 0:
            hi *= 2.0
            if hi > 1e6:
                raise TraceError("cannot reach mean_load after clipping")
        gain = brentq(gap, 0.0, hi, xtol=1e-14, rtol=1e-14)
    return np.clip(gain * base, 0.0, 1.0), gain


def generate(params: GenParams = GenParams(), tau_s: float = 1.0) -> WorkloadTrace:
    counts = synthesize_counts(params)
    loads, gain = _loads_from_counts(counts, params)
    meta = {"generator": "fgn-davies-harte", **asdict(params), "gain": gain, "tau_s": tau_s}
    return WorkloadTrace(loads=loads, tau_s=tau_s, meta=meta)


def hurst_aggvar(x: Sequence[float], min_block: int = 2, max_frac: float = 0.05, n_sizes: int = 20) -> float:
    """Hurst exponent by the aggregated-variance method.

    The variance of block means scales as m**(2H - 2) with block size m; the
    slope is fitted on a log-spaced set of block sizes.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    max_block = max(min_block + 1, int(n * max_frac))
    sizes = np.unique(np.geomspace(min_block, max_block, n_sizes).astype(int))
    logs_m, logs_v = [], []
    for m in sizes:
        k = n // m
        if k < 2:
            continue
        means = x[: k * m].reshape(k, m).mean(axis=1)
        var = means.var(ddof=1)
        if var > 0:
            logs_m.append(np.log(m))
            logs_v.append(np.log(var))
    if len(logs_m) < 2:
        raise ValueError("series too short for an aggregated-variance fit")
    slope = np.polyfit(logs_m, logs_v, 1)[0]
    return 1.0 + slope / 2.0


def discretize(load: float, m: int) -> int:
    """Bin index of ``load``; bin b covers [b/m, (b+1)/m) and the top bin is closed."""
    if m < 2:
        raise ValueError(f"need at least 2 bins, got {m}")
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"load must be in [0, 1], got {load}")
    return min(int(np.floor(load * m)), m - 1)


def bin_capacity(index: int, m: int) -> float:
    """Load a bin provisions for: its upper edge."""
    return (index + 1) / m


def load_trace(source: Union[str, os.PathLike, io.TextIOBase], tau_s: float = 1.0) -> WorkloadTrace:
    """Read a ``load`` CSV (path, stream, or content containing a newline)."""
    if isinstance(source, io.TextIOBase):
        text, name = source.read(), getattr(source, "name", "<stream>")
    elif isinstance(source, str) and ("\n" in source or not source):
        text, name = source, "<string>"
    else:
        text, name = Path(source).read_text(encoding="utf-8"), str(source)

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["load"]:
        raise TraceError(f"{name}: expected header 'load', got {header}")
    loads = []
    # row numbers are file lines; the header is row 1
    for row_no, row in enumerate(reader, start=2):
        if not row or not row[0].strip():
            continue
        try:
            v = float(row[0])
        except ValueError:
            raise TraceError(f"{name}: row {row_no}: not a number: {row[0]!r}") from None
        if not 0.0 <= v <= 1.0:
            raise TraceError(f"{name}: row {row_no}: load {v} outside [0, 1]")
        loads.append(v)
    if not loads:
        raise TraceError(f"{name}: trace is empty")
    return WorkloadTrace(loads=np.array(loads), tau_s=tau_s, meta={"source": name})


def write_trace(trace: WorkloadTrace, path: Union[str, os.PathLike], meta_path: Optional[Union[str, os.PathLike]] = None) -> list[Path]:
    """Write the trace CSV and, alongside it, a JSON sidecar with ``meta``."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("load\n")
        for v in trace.loads:
            fh.write(f"{float(v)!r}\n")
    written = [path]
    meta_path = Path(meta_path) if meta_path else path.with_suffix(".meta.json")
    meta_path.write_text(json.dumps({**trace.meta, "tau_s": trace.tau_s}, indent=2, sort_keys=True) + "\n")
    written.append(meta_path)
    return written
