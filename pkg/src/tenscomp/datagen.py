"""Synthetic path-loss-like tensors and random sampling masks.

All randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence(seed)``; both are fully specified, so streams are
reproducible across platforms. Distinct purposes draw from distinct child
streams (``SeedSequence([seed, purpose])``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .samples import SampleSet

__all__ = ["SyntheticSpec", "rng_for", "synthetic_map", "random_mask", "mask_size",
           "make_samples"]

# stream tags
FACTORS, SHADOWING, NOISE, MASK, HOLDOUT = 1, 2, 3, 4, 5


def rng_for(seed: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(purpose)])))


@dataclass
class SyntheticSpec:
    """Parameters of :func:`synthetic_map`.

    ``smoothness`` is the half-width (in cells) of the moving average applied
    to the low-rank factors and to the shadowing field; 0 disables filtering
    and the shadowing field.
    """

    dims: tuple
    rank: int = 3
    smoothness: float = 4.0
    noise_db: float = 0.0
    seed: int = 0
    level_db: float = 100.0
    variation: float = 0.15
    component_db: float = 10.0
    shadowing_db: float = 2.0

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        if not self.dims or any(n < 1 for n in self.dims):
            raise ValueError(f"invalid dims {self.dims}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        # mode-1 unfolding is n1 x prod(rest)
        limit = min(self.dims[0], int(np.prod(self.dims[1:])) if len(self.dims) > 1 else 1)
        if self.rank > limit:
            raise ValueError(
                f"rank {self.rank} exceeds the smallest mode-1 unfolding extent {limit}")
        if self.smoothness < 0 or self.noise_db < 0:
            raise ValueError("smoothness and noise_db must be >= 0")


def _smooth(a: np.ndarray, width: float, axis: int) -> np.ndarray:
    size = 2 * int(round(width)) + 1
    if size <= 1:
        return a
    return uniform_filter1d(a, size, axis=axis, mode="reflect")


def _standardize(v: np.ndarray) -> np.ndarray:
    v = v - v.mean()
    s = v.std()
    return v / s if s > 0 else v


def _unit_peak(v: np.ndarray) -> np.ndarray:
    v = v - v.mean()
    peak = np.abs(v).max()
    return v / peak if peak > 0 else v


def _factor(rng, n, smoothness):
    # zero mean, max |v| = 1
    return _unit_peak(_smooth(rng.standard_normal(n), smoothness, 0)) if n > 1 else np.ones(1)


def synthetic_map(spec: SyntheticSpec) -> np.ndarray:
    """Low-rank field + smooth shadowing + white noise, in dB.

    The low-rank part is a sum of ``rank`` outer products of smoothed factor
    vectors; the first term carries the mean level ``level_db`` so its factors
    lie in ``1 +- variation``; the remaining terms are zero-mean and bounded
    by ``component_db``. The low-rank part's mode-0 unfolding has rank
    ``<= rank``. With the defaults and ``rank <= 3``, ``noise_db <= 1`` the
    values stay within (20, 200) dB.
    """
    dims = spec.dims
    rng = rng_for(spec.seed, FACTORS)
    low = np.zeros(dims)
    for r in range(spec.rank):
        vecs = [_factor(rng, n, spec.smoothness) for n in dims]
        if r == 0:
            vecs = [1.0 + spec.variation * v for v in vecs]
            scale = spec.level_db
        else:
            scale = spec.component_db
        term = vecs[0]
        for v in vecs[1:]:
            term = np.multiply.outer(term, v)
        low += scale * term.reshape(dims)

    field = low
    if spec.smoothness > 0 and spec.shadowing_db > 0:
        s = rng_for(spec.seed, SHADOWING).standard_normal(dims)
        for axis in range(len(dims)):
            s = _smooth(s, spec.smoothness, axis)
        field = field + spec.shadowing_db * _standardize(s)
    if spec.noise_db > 0:
        field = field + spec.noise_db * rng_for(spec.seed, NOISE).standard_normal(dims)
    return field


def mask_size(dims, fraction: float) -> int:
    """``round(fraction * prod(dims))`` with halves rounded up."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    total = int(np.prod(dims))
    return min(total, int(np.floor(fraction * total + 0.5)))


def random_mask(dims, fraction: float, seed: int) -> np.ndarray:
    """Sorted flat positions (first index fastest) sampled without replacement."""
    dims = tuple(int(n) for n in dims)
    k = mask_size(dims, fraction)
    total = int(np.prod(dims))
    perm = rng_for(seed, MASK).permutation(total)
    return np.sort(perm[:k])


def make_samples(truth: np.ndarray, mask) -> SampleSet:
    return SampleSet.from_tensor(truth, mask)
