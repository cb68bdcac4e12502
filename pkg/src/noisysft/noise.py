"""Noise models: which cells of a finite box are obscured.

All sampling is keyed: the obscured bit of a cell is a hash of the seed
and the absolute cell coordinates, so masks are reproducible, independent
of box origin, and two boxes sampled with the same seed agree on their
overlap.  The hash is a splitmix64-style mixer applied coordinatewise.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import NoiseMask

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix(z):
    # uint64 arithmetic wraps by design
    with np.errstate(over="ignore"):
        z = np.uint64(z) if np.isscalar(z) else z.astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def derive_seed(*parts) -> int:
    """Fold integers and strings into one 64-bit seed, deterministically."""
    h = np.uint64(0x8E5B_61C3_0F1D_2B97)
    for p in parts:
        if isinstance(p, str):
            digest = hashlib.blake2b(p.encode(), digest_size=8).digest()
            v = np.uint64(int.from_bytes(digest, "little"))
        else:
            v = np.uint64(int(p) & 0xFFFFFFFFFFFFFFFF)
        with np.errstate(over="ignore"):
            h = _mix(h ^ (v + _GOLDEN))
    return int(h)


def _cell_hash(seed: int, coord_arrays) -> np.ndarray:
    h = np.full(coord_arrays[0].shape, np.uint64(seed), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for i, c in enumerate(coord_arrays):
            arr = c.astype(np.int64).view(np.uint64)
            h = _mix(h ^ _mix(arr + _GOLDEN * np.uint64(i + 1)))
    return h


def cell_uniform(seed: int, origin, shape) -> np.ndarray:
    """Per-cell uniforms in [0, 1) keyed by absolute coordinates."""
    coords = np.indices(shape, dtype=np.int64)
    coords = [coords[i] + origin[i] for i in range(len(shape))]
    h = _cell_hash(seed, coords)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


@dataclass(frozen=True)
class Bernoulli:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    def describe(self) -> str:
        return f"bernoulli:{self.epsilon:g}"


@dataclass(frozen=True)
class GridNoise:
    """Slabs of width k every k + n cells along every axis, at a uniform
    random global translation: a cell is obscured when any coordinate
    falls in the first k residues of its axis class."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError("grid noise needs k >= 1 and n >= 1")

    @property
    def period(self) -> int:
        return self.k + self.n

    def describe(self) -> str:
        return f"grid:{self.k},{self.n}"


@dataclass(frozen=True)
class PhaseGrid:
    """One obscured cell every p cells, uniform phase; one-dimensional."""

    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("phase grid needs p >= 2")

    def describe(self) -> str:
        return f"phase:{self.p}"


@dataclass(frozen=True)
class Thickened:
    """The base model's mask, thickened by n.  Nested thickenings flatten:
    thickening by a then by b equals thickening by a + b."""

    base: object
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("thickening radius must be nonnegative")
        if isinstance(self.base, Thickened):
            object.__setattr__(self, "n", self.n + self.base.n)
            object.__setattr__(self, "base", self.base.base)

    def describe(self) -> str:
        return f"thick:{self.n}:{self.base.describe()}"


def parse_model(spec: str):
    """Parse model specs: bernoulli:eps, grid:k,n, phase:p, thick:n:<spec>."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "bernoulli":
            return Bernoulli(float(rest))
        if kind == "grid":
            k, n = rest.split(",")
            return GridNoise(int(k), int(n))
        if kind == "phase":
            return PhaseGrid(int(rest))
        if kind == "thick":
            n, _, inner = rest.partition(":")
            return Thickened(parse_model(inner), int(n))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad noise model spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown noise model {kind!r}")


def _grid_phases(model, seed: int, dim: int) -> tuple[int, ...]:
    period = model.period if isinstance(model, GridNoise) else model.p
    return tuple(int(_mix(np.uint64(derive_seed(seed, "phase", i)))) % period
                 for i in range(dim))


def sample_mask(model, shape, seed: int, origin=None) -> NoiseMask:
    """Sample a mask for the model on the given box."""
    shape = tuple(int(s) for s in shape)
    dim = len(shape)
    if origin is None:
        origin = (0,) * dim
    origin = tuple(int(o) for o in origin)
    meta = {"model": model.describe(), "seed": seed}

    if isinstance(model, Bernoulli):
        u = cell_uniform(seed, origin, shape)
        return NoiseMask(origin, u < model.epsilon, meta=meta)

    if isinstance(model, GridNoise):
        t = _grid_phases(model, seed, dim)
        coords = np.indices(shape, dtype=np.int64)
        hit = np.zeros(shape, dtype=bool)
        for i in range(dim):
            cls = np.mod(coords[i] + origin[i] - t[i], model.period)
            hit |= cls < model.k
        return NoiseMask(origin, hit, meta=meta)

    if isinstance(model, PhaseGrid):
        if dim != 1:
            raise ValueError("phase grid noise is one-dimensional")
        (t,) = _grid_phases(model, seed, 1)
        xs = np.arange(origin[0], origin[0] + shape[0], dtype=np.int64)
        hit = np.mod(xs - t, model.p) == model.p - 1
        return NoiseMask(origin, hit, meta=meta)

    if isinstance(model, Thickened):
        if model.n == 0:
            inner = sample_mask(model.base, shape, seed, origin)
            return NoiseMask(origin, inner.data, meta=meta)
        grown_origin = tuple(o - model.n for o in origin)
        grown_shape = tuple(s + 2 * model.n for s in shape)
        inner = sample_mask(model.base, grown_shape, seed, grown_origin)
        fat = ndimage.maximum_filter(inner.data, size=2 * model.n + 1,
                                     mode="constant")
        crop = tuple(slice(model.n, model.n + s) for s in shape)
        return NoiseMask(origin, fat[crop], meta=meta)

    raise TypeError(f"unknown noise model {model!r}")


def marginal_rate(model, dim: int) -> float:
    """Exact probability that a fixed cell is obscured."""
    if isinstance(model, Bernoulli):
        return model.epsilon
    if isinstance(model, GridNoise):
        return 1.0 - (model.n / model.period) ** dim
    if isinstance(model, PhaseGrid):
        if dim != 1:
            raise ValueError("phase grid noise is one-dimensional")
        return 1.0 / model.p
    if isinstance(model, Thickened):
        base, n = model.base, model.n
        if isinstance(base, Bernoulli):
            return 1.0 - (1.0 - base.epsilon) ** ((2 * n + 1) ** dim)
        if isinstance(base, PhaseGrid):
            if dim != 1:
                raise ValueError("phase grid noise is one-dimensional")
            return min(1.0, (2 * n + 1) / base.p)
        if isinstance(base, GridNoise):
            # count the thickened base pattern exactly over one period;
            # tile enough copies that the window never outruns the array
            period = base.period
            reps = 2 * (n // period + 1) + 1
            side = period * reps
            coords = np.indices((side,) * dim)
            hit = np.zeros((side,) * dim, dtype=bool)
            for i in range(dim):
                hit |= np.mod(coords[i], period) < base.k
            fat = ndimage.maximum_filter(hit, size=2 * n + 1, mode="wrap")
            return float(fat.mean())
    raise TypeError(f"unknown noise model {model!r}")
