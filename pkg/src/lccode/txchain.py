"""Codeword assembly, unequal energy allocation, binary PAM, AWGN.

The transmitted frame concatenates the two convolutional codewords and the
parity segment, X = (X1, X2, X3). The parity branch gets lambda times the
symbol energy of the coded branches; the split preserves the average
energy per symbol:

    es_cc = 3/(2+lambda) * es_bar,   es_lc = 3*lambda/(2+lambda) * es_bar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnergyPlan:
    """Per-branch symbol energies for a given allocation parameter."""

    lambda_db: float
    lam: float
    es_bar: float
    es_cc: float
    es_lc: float

    @property
    def amp_cc(self) -> float:
        return float(np.sqrt(self.es_cc))

    @property
    def amp_lc(self) -> float:
        return float(np.sqrt(self.es_lc))


def plan_energy(lambda_db: float, es_bar: float = 1.0) -> EnergyPlan:
    """Split ``es_bar`` between coded and parity branches at ratio lambda."""
    if es_bar <= 0:
        raise ValueError(f"es_bar must be > 0, got {es_bar}")
    lam = 10.0 ** (lambda_db / 10.0)
    es_cc = 3.0 / (2.0 + lam) * es_bar
    es_lc = 3.0 * lam / (2.0 + lam) * es_bar
    return EnergyPlan(
        lambda_db=float(lambda_db), lam=lam, es_bar=float(es_bar),
        es_cc=es_cc, es_lc=es_lc,
    )


def modulate(
    x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, plan: EnergyPlan
) -> np.ndarray:
    """Map bits to amplitude-scaled bipolar symbols, s = amp * (2x - 1)."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    x3 = np.asarray(x3, dtype=np.float64)
    if not (x1.size == x2.size == x3.size):
        raise ValueError("the three segments must have equal length")
    for x in (x1, x2, x3):
        if np.any((x != 0) & (x != 1)):
            raise ValueError("segments must be binary")
    return np.concatenate([
        plan.amp_cc * (2.0 * x1 - 1.0),
        plan.amp_cc * (2.0 * x2 - 1.0),
        plan.amp_lc * (2.0 * x3 - 1.0),
    ])


def awgn(s: np.ndarray, n0: float, seed_or_rng) -> np.ndarray:
    """Add white Gaussian noise of variance n0/2 per real sample."""
    if n0 < 0:
        raise ValueError(f"n0 must be >= 0, got {n0}")
    s = np.asarray(s, dtype=np.float64)
    if n0 == 0:
        return s.copy()
    rng = np.random.default_rng(seed_or_rng)
    return s + rng.normal(0.0, np.sqrt(n0 / 2.0), size=s.shape)
