"""Closed-form photon statistics of a type-II SPDC pair source feeding a
linear-optics Bell measurement.

Mode order for ideal outcomes is (a_H, a_V, b_H, b_V). The teleported
state lives on (c_H, c_V). The pair-creation operator is normal ordered
with ``phi = tanh(chi)`` and vacuum amplitude ``exp(2 omega) = 1/cosh(chi)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UnreachableOutcome

NORM_TOL = 1e-12

_FACT_TABLE_SIZE = 171  # 171! overflows a double


def _float_factorials(n: int) -> np.ndarray:
    table = np.ones(n)
    for m in range(1, n):
        table[m] = table[m - 1] * m
    return table


FACTORIALS = _float_factorials(_FACT_TABLE_SIZE)


@dataclass(frozen=True)
class InputState:
    """Qubit ``alpha|H> + beta|V>`` sent by Alice. Amplitudes are real."""

    alpha: float
    beta: float

    def __post_init__(self):
        norm = self.alpha**2 + self.beta**2
        if not math.isfinite(norm) or abs(norm - 1.0) > NORM_TOL:
            raise ValueError(
                f"input amplitudes must satisfy alpha^2 + beta^2 = 1, got {norm!r}"
            )

    def swapped(self) -> InputState:
        return InputState(self.beta, self.alpha)


@dataclass(frozen=True)
class PumpParameter:
    chi: float

    def __post_init__(self):
        if not (self.chi >= 0.0 and math.isfinite(self.chi)):
            raise ValueError(f"chi must be finite and >= 0, got {self.chi!r}")

    @cached_property
    def tanh_chi(self) -> float:
        return math.tanh(self.chi)

    @cached_property
    def cosh_chi(self) -> float:
        return math.cosh(self.chi)


@dataclass(frozen=True, order=True)
class IdealOutcome:
    """Photon counts on (a_H, a_V, b_H, b_V) seen by ideal detectors."""

    i: int
    j: int
    k: int
    l: int  # noqa: E741

    def __post_init__(self):
        for name in ("i", "j", "k", "l"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 0:
                raise ValueError(f"photon count {name} must be a non-negative int, got {value!r}")

    def __iter__(self):
        return iter((self.i, self.j, self.k, self.l))

    @property
    def total(self) -> int:
        return self.i + self.j + self.k + self.l

    def swapped(self) -> IdealOutcome:
        """Relabel H <-> V on both spatial modes."""
        return IdealOutcome(self.j, self.i, self.l, self.k)

    @classmethod
    def from_string(cls, text: str) -> IdealOutcome:
        if len(text) != 4 or not text.isdigit():
            raise ValueError(f"expected four digits, got {text!r}")
        return cls(*(int(c) for c in text))


@dataclass(frozen=True)
class PureTeleportedState:
    """Two-branch state on (c_H, c_V).

    ``label_h`` is the occupation carrying the alpha branch, ``label_v`` the
    beta branch. A branch with a negative label has amplitude exactly 0.
    """

    amplitude_h: float
    amplitude_v: float
    label_h: tuple[int, int]
    label_v: tuple[int, int]

    def kets(self) -> dict[tuple[int, int], float]:
        """Nonzero amplitudes keyed by (n_cH, n_cV)."""
        out: dict[tuple[int, int], float] = {}
        for label, amp in ((self.label_h, self.amplitude_h), (self.label_v, self.amplitude_v)):
            if amp != 0.0:
                out[label] = out.get(label, 0.0) + amp
        return out

    def overlap(self, target: InputState) -> float:
        """<target|self> with target embedded as alpha|1,0> + beta|0,1>."""
        kets = self.kets()
        return target.alpha * kets.get((1, 0), 0.0) + target.beta * kets.get((0, 1), 0.0)


def _branch_terms(i, j, k, l):
    # (alpha-branch weight, beta-branch weight) without the alpha^2/beta^2 factors;
    # zero-guarded so (-1)! is never evaluated
    t_alpha = 0.0
    if i != k:
        t_alpha = FACTORIALS[i + k - 1] * FACTORIALS[j + l] * (i - k) ** 2
    t_beta = 0.0
    if l != j:
        t_beta = FACTORIALS[i + k] * FACTORIALS[j + l - 1] * (l - j) ** 2
    return float(t_alpha), float(t_beta)


def e_factor(outcome: IdealOutcome, state: InputState) -> float:
    """alpha^2 (i+k-1)!(j+l)!(i-k)^2 + beta^2 (i+k)!(j+l-1)!(l-j)^2."""
    t_alpha, t_beta = _branch_terms(*outcome)
    return state.alpha**2 * t_alpha + state.beta**2 * t_beta


def ideal_outcome_probability(
    outcome: IdealOutcome, state: InputState, pump: PumpParameter
) -> float:
    e = e_factor(outcome, state)
    if e == 0.0:
        return 0.0
    i, j, k, l = outcome
    n = outcome.total
    denom = pump.cosh_chi**4 * 2.0**n * FACTORIALS[i] * FACTORIALS[j] * FACTORIALS[k] * FACTORIALS[l]
    return float(pump.tanh_chi ** (2 * (n - 1)) / denom * e)


def teleported_pure_state(outcome: IdealOutcome, state: InputState) -> PureTeleportedState:
    i, j, k, l = outcome
    t_alpha, t_beta = _branch_terms(i, j, k, l)
    norm2 = state.alpha**2 * t_alpha + state.beta**2 * t_beta
    if norm2 == 0.0:
        raise UnreachableOutcome(f"outcome {tuple(outcome)} has zero probability for this input")
    norm = math.sqrt(norm2)
    amp_h = state.alpha * math.copysign(math.sqrt(t_alpha), i - k) / norm if t_alpha else 0.0
    amp_v = state.beta * math.copysign(math.sqrt(t_beta), l - j) / norm if t_beta else 0.0
    return PureTeleportedState(
        amplitude_h=amp_h,
        amplitude_v=amp_v,
        label_h=(j + l, i + k - 1),
        label_v=(j + l - 1, i + k),
    )


# Array versions used by the Bayesian engine. Inputs are broadcastable
# integer arrays of counts.


def branch_weight_grids(i, j, k, l):
    i, j, k, l = (np.asarray(x) for x in (i, j, k, l))
    ik, jl = i + k, j + l
    t_alpha = np.where(
        i != k,
        FACTORIALS[np.maximum(ik - 1, 0)] * FACTORIALS[jl] * (i - k) ** 2,
        0.0,
    )
    t_beta = np.where(
        l != j,
        FACTORIALS[ik] * FACTORIALS[np.maximum(jl - 1, 0)] * (l - j) ** 2,
        0.0,
    )
    return t_alpha, t_beta


def e_factor_grid(i, j, k, l, state: InputState) -> np.ndarray:
    t_alpha, t_beta = branch_weight_grids(i, j, k, l)
    return state.alpha**2 * t_alpha + state.beta**2 * t_beta


def branch_amplitude_grids(i, j, k, l, state: InputState):
    """Normalized (amp_h, amp_v) arrays; entries with zero E-factor are 0."""
    i, j, k, l = (np.asarray(x) for x in (i, j, k, l))
    t_alpha, t_beta = branch_weight_grids(i, j, k, l)
    norm2 = state.alpha**2 * t_alpha + state.beta**2 * t_beta
    safe = np.where(norm2 > 0, norm2, 1.0)
    amp_h = state.alpha * np.sign(i - k) * np.sqrt(t_alpha / safe)
    amp_v = state.beta * np.sign(l - j) * np.sqrt(t_beta / safe)
    zero = norm2 == 0
    amp_h = np.where(zero, 0.0, amp_h)
    amp_v = np.where(zero, 0.0, amp_v)
    return amp_h, amp_v
