"""Markov-chain workload predictor over M load bins."""

from __future__ import annotations

import json
from typing import Optional, Sequence

import numpy as np


class PredictorError(ValueError):
    pass


class MarkovPredictor:
    """Discrete-time Markov chain over load bins.

    Transition probabilities are the row-normalized transition counts with
    add-one smoothing, so an unseen transition never has probability zero.
    During warmup the caller feeds observations through :meth:`train_step`.
    Afterwards :meth:`observe` compares each actual bin with the prediction
    made from the previous state.  Transitions seen after warmup are staged
    and only folded into the counts once ``refresh_threshold`` consecutive
    mispredictions have occurred.

    ``margin_t`` is an additive throughput margin (fraction of peak) on top of
    the predicted bin's upper edge; it must exceed one bin width so that an
    under-prediction by a single bin is still served.

    Optional ``phase_priors`` (one length-``m`` distribution per phase of a
    known period) bias the prediction toward the periodic signature; pass the
    phase to :meth:`predict_next`.
    """

    def __init__(
        self,
        m: int,
        warmup_steps: int = 64,
        margin_t: float = 0.05,
        refresh_threshold: int = 3,
        phase_priors: Optional[Sequence[Sequence[float]]] = None,
        prior_weight: float = 0.5,
    ):
        if m < 2:
            raise PredictorError(f"need at least 2 bins, got m={m}")
        if not margin_t > 1.0 / m:
            raise PredictorError(
                f"margin cannot discriminate adjacent bins: margin_t={margin_t} must exceed 1/m={1.0 / m}"
            )
        if warmup_steps < 0:
            raise PredictorError("warmup_steps must be >= 0")
        if refresh_threshold < 1:
            raise PredictorError("refresh_threshold must be >= 1")
        self.m = m
        self.warmup_steps = warmup_steps
        self.margin_t = margin_t
        self.refresh_threshold = refresh_threshold
        self.counts = np.zeros((m, m), dtype=np.int64)
        self.staged = np.zeros((m, m), dtype=np.int64)
        self.probs = np.full((m, m), 1.0 / m)
        self.state: Optional[int] = None
        self.mispredict_streak = 0

        self.phase_priors = None
        self.prior_weight = prior_weight
        if phase_priors is not None:
            priors = np.asarray(phase_priors, dtype=float)
            if priors.ndim != 2 or priors.shape[1] != m or len(priors) == 0:
                raise PredictorError(f"phase_priors must have shape (period, {m})")
            if np.any(priors < 0) or not np.allclose(priors.sum(axis=1), 1.0, atol=1e-9):
                raise PredictorError("each phase prior must be a probability vector")
            if not 0.0 <= prior_weight <= 1.0:
                raise PredictorError("prior_weight must be in [0, 1]")
            self.phase_priors = priors

    def _check_bin(self, b: int) -> int:
        b = int(b)
        if not 0 <= b < self.m:
            raise PredictorError(f"bin {b} outside [0, {self.m})")
        return b

    def _renormalize(self, rows=None) -> None:
        rows = range(self.m) if rows is None else rows
        for i in rows:
            self.probs[i] = (self.counts[i] + 1.0) / (self.counts[i].sum() + self.m)

    def train_step(self, observed: int) -> "MarkovPredictor":
        observed = self._check_bin(observed)
        if self.state is not None:
            self.counts[self.state, observed] += 1
            self._renormalize([self.state])
        self.state = observed
        return self

    def predict_next(self, phase: Optional[int] = None) -> int:
        """Most likely next bin; ties go to the higher bin."""
        row = self.probs[self.state] if self.state is not None else np.full(self.m, 1.0 / self.m)
        if self.phase_priors is not None and phase is not None:
            prior = self.phase_priors[phase % len(self.phase_priors)]
            row = (1.0 - self.prior_weight) * row + self.prior_weight * prior
        return int(self.m - 1 - np.argmax(row[::-1]))

    def observe(self, actual: int, phase: Optional[int] = None) -> bool:
        """Record the bin the workload counter saw; returns True on misprediction."""
        actual = self._check_bin(actual)
        mispredicted = self.predict_next(phase) != actual
        if self.state is not None:
            self.staged[self.state, actual] += 1
        self.state = actual
        if mispredicted:
            self.mispredict_streak += 1
            if self.mispredict_streak >= self.refresh_threshold:
                self.counts += self.staged
                self.staged[:] = 0
                self._renormalize()
                self.mispredict_streak = 0
        else:
            self.mispredict_streak = 0
        return mispredicted

    def provisioned_capacity(self, predicted_bin: int) -> float:
        """Load fraction to provision for: bin upper edge plus margin, capped at 1."""
        return min(1.0, (self._check_bin(predicted_bin) + 1) / self.m + self.margin_t)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "warmup_steps": self.warmup_steps,
            "margin_t": self.margin_t,
            "refresh_threshold": self.refresh_threshold,
            "counts": self.counts.tolist(),
            "staged": self.staged.tolist(),
            "probs": self.probs.tolist(),
            "state": self.state,
            "mispredict_streak": self.mispredict_streak,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "MarkovPredictor":
        p = cls(
            m=doc["m"],
            warmup_steps=doc.get("warmup_steps", 0),
            margin_t=doc.get("margin_t", 0.05),
            refresh_threshold=doc.get("refresh_threshold", 3),
        )
        counts = np.asarray(doc["counts"], dtype=np.int64)
        if counts.shape != (p.m, p.m) or np.any(counts < 0):
            raise PredictorError(f"counts must be a non-negative {p.m}x{p.m} matrix")
        p.counts = counts
        if "staged" in doc:
            p.staged = np.asarray(doc["staged"], dtype=np.int64).reshape(p.m, p.m)
        p._renormalize()
        if "probs" in doc and not np.allclose(doc["probs"], p.probs, atol=1e-9, rtol=0):
            raise PredictorError("probs do not match the smoothed counts")
        state = doc.get("state")
        p.state = None if state is None else p._check_bin(state)
        p.mispredict_streak = int(doc.get("mispredict_streak", 0))
        return p

    @classmethod
    def from_json(cls, text: str) -> "MarkovPredictor":
        return cls.from_dict(json.loads(text))
