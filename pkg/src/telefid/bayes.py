"""Posterior over ideal photon-number outcomes given a threshold readout.

The outcome space is the cube ``0..max_photons_per_index`` on each of the
four detector modes, optionally cut to ``i+j+k+l <= max_total``. Terms
decay like ``(tanh(chi)**2 / 2)**n`` so the tail beyond the cap is
extrapolated geometrically from the outermost shells and compared with
``tail_tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from .detectors import Detectors, Readout, likelihood_vectors
from .errors import NotConverged, ZeroEvidence
from .source import InputState, IdealOutcome, PumpParameter, e_factor_grid


@dataclass(frozen=True)
class TruncationPolicy:
    max_photons_per_index: int = 24
    tail_tolerance: float = 1e-12
    max_total: Optional[int] = None

    def __post_init__(self):
        if self.max_photons_per_index < 1:
            raise ValueError("max_photons_per_index must be >= 1")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be > 0 (use math.inf to disable the check)")
        if self.max_total is not None and self.max_total < 1:
            raise ValueError("max_total must be >= 1")

    @classmethod
    def matched_to_oracle(cls, max_total: int) -> TruncationPolicy:
        """Outcome set identical to a Fock oracle keeping ``max_total`` photons
        over all six modes. Each pair puts one photon on the detector side, so
        detected totals reach ``1 + (max_total - 1) // 2``."""
        detected = 1 + (max_total - 1) // 2
        return cls(max_photons_per_index=detected, tail_tolerance=math.inf, max_total=detected)

    def doubled(self) -> TruncationPolicy:
        total = None if self.max_total is None else 2 * self.max_total
        return TruncationPolicy(2 * self.max_photons_per_index, self.tail_tolerance, total)


DEFAULT_TRUNCATION = TruncationPolicy()


@lru_cache(maxsize=64)
def _index_grids(n_max: int):
    idx = np.arange(n_max + 1)
    return np.meshgrid(idx, idx, idx, idx, indexing="ij")


@lru_cache(maxsize=64)
def _shell_index(n_max: int, max_total: Optional[int]) -> np.ndarray:
    i, j, k, l = _index_grids(n_max)
    if max_total is None:
        return np.maximum(np.maximum(i, j), np.maximum(k, l))
    return i + j + k + l


@lru_cache(maxsize=32)
def _e_factor_cube(alpha: float, beta: float, n_max: int, max_total: Optional[int]) -> np.ndarray:
    i, j, k, l = _index_grids(n_max)
    cube = e_factor_grid(i, j, k, l, InputState(alpha, beta))
    if max_total is not None:
        cube = np.where(i + j + k + l <= max_total, cube, 0.0)
    cube.setflags(write=False)
    return cube


@lru_cache(maxsize=64)
def _prior_terms(alpha: float, beta: float, chi: float, n_max: int, max_total: Optional[int]):
    """tanh^{2n} / (2^n i!j!k!l!) * E on the truncated cube (read-only)."""
    x = math.tanh(chi) ** 2 / 2.0
    per_index = np.empty(n_max + 1)
    per_index[0] = 1.0
    for n in range(1, n_max + 1):
        per_index[n] = per_index[n - 1] * x / n
    terms = np.einsum("i,j,k,l->ijkl", per_index, per_index, per_index, per_index)
    terms *= _e_factor_cube(alpha, beta, n_max, max_total)
    terms.setflags(write=False)
    return terms


def _check_pump(pump: PumpParameter):
    if not pump.chi > 0:
        raise ValueError("chi must be > 0: a vacuum source cannot teleport")


def _tail_estimate(grid: np.ndarray, trunc: TruncationPolicy, z: float) -> float:
    if z == 0.0:
        return 0.0
    shells = np.bincount(
        _shell_index(trunc.max_photons_per_index, trunc.max_total).ravel(),
        weights=grid.ravel(),
    )
    if trunc.max_total is not None:
        shells = shells[: trunc.max_total + 1]
    last, prev = shells[-1], shells[-2] if len(shells) > 1 else 0.0
    if last == 0.0:
        return 0.0
    if prev == 0.0 or last >= prev:
        return math.inf
    ratio = last / prev
    return float(last * ratio / (1.0 - ratio) / z)


def _evidence_grid(readout, state, pump, dets, trunc):
    _check_pump(pump)
    n_max = trunc.max_photons_per_index
    prior = _prior_terms(state.alpha, state.beta, pump.chi, n_max, trunc.max_total)
    v = likelihood_vectors(readout, dets, n_max)
    grid = prior * np.einsum("i,j,k,l->ijkl", *v)
    z = float(grid.sum())
    return grid, z, _tail_estimate(grid, trunc, z)


def _raise_if_unconverged(tail: float, trunc: TruncationPolicy):
    if tail > trunc.tail_tolerance:
        raise NotConverged(
            f"truncation tail estimate {tail:.3g} exceeds tolerance {trunc.tail_tolerance:g} "
            f"at max_photons_per_index={trunc.max_photons_per_index}",
            tail_estimate=tail,
        )


def partition_z(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    _, z, tail = _evidence_grid(readout, state, pump, dets, trunc)
    _raise_if_unconverged(tail, trunc)
    return z


@dataclass(frozen=True, eq=False)
class Posterior:
    readout: Readout
    partition_z: float
    grid: np.ndarray = field(repr=False)
    tail_estimate: float = 0.0
    evidence: float = 0.0  # marginal probability of the readout

    @cached_property
    def weights(self) -> dict[IdealOutcome, float]:
        """Nonzero posterior weights in lexicographic outcome order."""
        return {
            IdealOutcome(*map(int, idx)): float(self.grid[tuple(idx)])
            for idx in np.argwhere(self.grid > 0)
        }

    def weight(self, outcome: IdealOutcome) -> float:
        if any(n >= self.grid.shape[0] for n in outcome):
            return 0.0
        return float(self.grid[tuple(outcome)])

    def total_variation(self, other: Posterior) -> float:
        n = max(self.grid.shape[0], other.grid.shape[0])
        a = _pad(self.grid, n)
        b = _pad(other.grid, n)
        return 0.5 * float(np.abs(a - b).sum())


def _pad(grid: np.ndarray, n: int) -> np.ndarray:
    extra = n - grid.shape[0]
    return np.pad(grid, [(0, extra)] * 4) if extra else grid


def posterior(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> Posterior:
    grid, z, tail = _evidence_grid(readout, state, pump, dets, trunc)
    if z == 0.0:
        raise ZeroEvidence(f"readout {readout} is impossible under the model")
    _raise_if_unconverged(tail, trunc)
    grid /= z
    grid.setflags(write=False)
    return Posterior(
        readout=readout, partition_z=z, grid=grid, tail_estimate=tail,
        evidence=_z_to_probability(z, pump),
    )


def _z_to_probability(z: float, pump: PumpParameter) -> float:
    return z / (pump.tanh_chi**2 * pump.cosh_chi**4)


def readout_probability(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    """Marginal probability of ``readout``: Z / (tanh^2 chi cosh^4 chi)."""
    _, z, _ = _evidence_grid(readout, state, pump, dets, trunc)
    return _z_to_probability(z, pump)


def convergence_certificate(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    """Total-variation change of the posterior when the cap is doubled."""
    base = posterior(readout, state, pump, dets, trunc)
    wide = posterior(readout, state, pump, dets, trunc.doubled())
    return base.total_variation(wide)
