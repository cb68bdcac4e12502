"""Empirical Besicovitch-type distances between configurations.

On a finite box the Besicovitch distance between two shift-invariant
random configurations is estimated by the mean Hamming density over
coupled sample pairs; a normal 95% interval quantifies the sampling
error.  Lower bounds for the instability constructions are closed-form
certificates, not estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Grid


def hamming_density(a: Grid, b: Grid) -> float:
    """Fraction of cells where the two grids differ; boxes must coincide."""
    if a.origin != b.origin or a.shape != b.shape:
        raise ValueError("grids live on different boxes")
    if a.data.size == 0:
        return 0.0
    return float(np.mean(a.data != b.data))


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    ci95: float
    trials: int

    @property
    def upper(self) -> float:
        return self.value + self.ci95

    @property
    def lower(self) -> float:
        return self.value - self.ci95


def db_upper_estimate(sampler: Callable[[int], tuple[Grid, Grid]],
                      trials: int, *, seed: int = 0) -> DistanceEstimate:
    """Mean Hamming density over coupled pairs drawn from the sampler.

    The sampler receives a per-trial seed and returns a pair of grids on
    the same box.  Any coupling gives an upper estimate of the Besicovitch
    distance between the two underlying processes.
    """
    from .noise import derive_seed

    if trials < 1:
        raise ValueError("need at least one trial")
    vals = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        a, b = sampler(derive_seed(seed, "db-upper", t))
        vals[t] = hamming_density(a, b)
    mean = float(vals.mean())
    if trials > 1:
        ci = 1.96 * float(vals.std(ddof=1)) / math.sqrt(trials)
    else:
        ci = float("inf")
    return DistanceEstimate(value=mean, ci95=ci, trials=trials)


def lower_certificate(kind: str, **params) -> float:
    """Closed-form lower bounds achieved by the instability constructions.

    phase1d:  alternating restrictions of the two period-2 points on the
              clear windows of a p-periodic mask stay at least
              1/2 - 1/(2p) from either periodic point.
    bern1d:   phase flips across obscured runs of length >= d survive at
              density (p-1)/(p d) - ((p-1)/p) eps against any translate.
    grid2d:   independent orbit choices on the clear hypercubes of grid
              noise disagree with any fixed configuration on at least
              1/(2 (N+1)^d) of the cells.
    """
    if kind == "phase1d":
        p = params["p"]
        if p < 2:
            raise ValueError("p must be at least 2")
        return 0.5 - 1.0 / (2.0 * p)
    if kind == "bern1d":
        p, d, eps = params["p"], params["d"], params["epsilon"]
        if d < 1:
            raise ValueError("d must be at least 1")
        return (p - 1) / (p * d) - ((p - 1) / p) * eps
    if kind == "grid2d":
        n, d = params["n"], params["d"]
        return 1.0 / (2.0 * (n + 1) ** d)
    raise ValueError(f"unknown certificate {kind!r}")
