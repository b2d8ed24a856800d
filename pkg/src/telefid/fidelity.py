"""Fidelity of the teleported mixed state with the input qubit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .bayes import (
    DEFAULT_TRUNCATION,
    Posterior,
    TruncationPolicy,
    posterior,
)
from .detectors import Detectors, Readout
from .errors import NoAcceptedEvidence, ZeroEvidence
from .source import (
    IdealOutcome,
    InputState,
    PumpParameter,
    PureTeleportedState,
    branch_amplitude_grids,
)

_S = 1.0 / math.sqrt(2.0)

DEFAULT_INPUTS: dict[str, InputState] = {
    "H": InputState(1.0, 0.0),
    "V": InputState(0.0, 1.0),
    "plus": InputState(_S, _S),
    "minus": InputState(_S, -_S),
}

# psi-minus signatures: one click per output port, orthogonal polarizations
DEFAULT_ACCEPTED: tuple[Readout, ...] = (
    Readout.from_string("1001"),
    Readout.from_string("0110"),
)

CLASSICAL_BOUND = 2.0 / 3.0


@dataclass(frozen=True, eq=False)
class MixedTeleportedState:
    """Posterior-weighted mixture of two-branch states on (c_H, c_V).

    Stored column-wise: ``outcomes`` is (n, 4) and the other arrays have
    length n. Only outcomes with positive weight are kept.
    """

    readout: Readout
    outcomes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    amplitude_h: np.ndarray = field(repr=False)
    amplitude_v: np.ndarray = field(repr=False)

    @property
    def label_h(self) -> np.ndarray:
        i, j, k, l = self.outcomes.T
        return np.stack([j + l, i + k - 1], axis=1)

    @property
    def label_v(self) -> np.ndarray:
        i, j, k, l = self.outcomes.T
        return np.stack([j + l - 1, i + k], axis=1)

    @cached_property
    def components(self) -> list[tuple[float, PureTeleportedState]]:
        out = []
        for w, a_h, a_v, lh, lv in zip(
            self.weights, self.amplitude_h, self.amplitude_v, self.label_h, self.label_v
        ):
            state = PureTeleportedState(float(a_h), float(a_v), tuple(map(int, lh)), tuple(map(int, lv)))
            out.append((float(w), state))
        return out

    def overlap_squared(self, target: InputState) -> np.ndarray:
        """|<target|Phi_ijkl>|^2 per component."""
        lh, lv = self.label_h, self.label_v
        on_h = (lh[:, 0] == 1) & (lh[:, 1] == 0)
        on_v = (lh[:, 0] == 0) & (lh[:, 1] == 1)
        ket_10 = np.where(on_h, self.amplitude_h, 0.0)
        ket_01 = np.where(on_v, self.amplitude_h, 0.0)
        on_h = (lv[:, 0] == 1) & (lv[:, 1] == 0)
        on_v = (lv[:, 0] == 0) & (lv[:, 1] == 1)
        ket_10 = ket_10 + np.where(on_h, self.amplitude_v, 0.0)
        ket_01 = ket_01 + np.where(on_v, self.amplitude_v, 0.0)
        return (target.alpha * ket_10 + target.beta * ket_01) ** 2


@lru_cache(maxsize=32)
def _overlap_squared_cube(alpha: float, beta: float, n_max: int) -> np.ndarray:
    """|<phi|Phi_ijkl>|^2 over the outcome cube; nonzero only where the
    teleported state carries exactly one photon."""
    idx = np.arange(n_max + 1)
    i, j, k, l = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    state = InputState(alpha, beta)
    amp_h, amp_v = branch_amplitude_grids(i, j, k, l, state)
    ket_10 = np.where((j + l == 1) & (i + k == 1), amp_h, 0.0)
    ket_01 = np.where((j + l == 0) & (i + k == 2), amp_h, 0.0)
    ket_10 = ket_10 + np.where((j + l == 2) & (i + k == 0), amp_v, 0.0)
    ket_01 = ket_01 + np.where((j + l == 1) & (i + k == 1), amp_v, 0.0)
    cube = (alpha * ket_10 + beta * ket_01) ** 2
    cube.setflags(write=False)
    return cube


def fidelity_of_posterior(post: Posterior, state: InputState) -> float:
    """Same quantity as :func:`fidelity_of_mixture`, summed on the outcome grid."""
    n_max = post.grid.shape[0] - 1
    overlap = _overlap_squared_cube(state.alpha, state.beta, n_max)
    return _clip_sqrt(float(np.vdot(post.grid, overlap)))


def mixed_state_from_posterior(post: Posterior, state: InputState) -> MixedTeleportedState:
    idx = np.argwhere(post.grid > 0)
    i, j, k, l = idx.T
    amp_h, amp_v = branch_amplitude_grids(i, j, k, l, state)
    return MixedTeleportedState(
        readout=post.readout,
        outcomes=idx,
        weights=post.grid[tuple(idx.T)],
        amplitude_h=amp_h,
        amplitude_v=amp_v,
    )


def mixed_state(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> MixedTeleportedState:
    return mixed_state_from_posterior(posterior(readout, state, pump, dets, trunc), state)


def _clip_sqrt(x: float) -> float:
    return math.sqrt(min(max(x, 0.0), 1.0))


def fidelity_of_mixture(mixture: MixedTeleportedState, target: InputState) -> float:
    return _clip_sqrt(float(np.dot(mixture.weights, mixture.overlap_squared(target))))


def fidelity_direct(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    """sqrt(<phi| rho |phi>) evaluated component by component."""
    return fidelity_of_mixture(mixed_state(readout, state, pump, dets, trunc), state)


def _closed_form_terms(state: InputState):
    a2, b2 = state.alpha**2, state.beta**2
    swap = (a2 - b2) ** 2
    return (
        ("1001", 1.0),
        ("0110", 1.0),
        ("1100", swap),
        ("0011", swap),
        ("2000", b2),
        ("0020", b2),
        ("0200", a2),
        ("0002", a2),
    )


def closed_form_from_weights(
    weights: Union[Posterior, Mapping[IdealOutcome, float]], state: InputState
) -> float:
    """Eight-term fidelity from posterior weights of the two-photon outcomes.

    Coefficients follow from the conditional state of each outcome: the
    psi-minus patterns 1001/0110 return the input exactly.
    """
    get = weights.weight if isinstance(weights, Posterior) else (lambda o: weights.get(o, 0.0))
    total = sum(coef * get(IdealOutcome.from_string(o)) for o, coef in _closed_form_terms(state))
    return _clip_sqrt(total)


def fidelity_closed_form(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    return closed_form_from_weights(posterior(readout, state, pump, dets, trunc), state)


@dataclass
class FidelityReport:
    """``per_readout[input][readout] = (fidelity, readout_probability)``;
    readouts with zero evidence are absent."""

    per_readout: dict[str, dict[Readout, tuple[float, float]]]
    per_input: dict[str, float]
    accepted_set: list[Readout]
    average_fidelity: float
    tail_estimate: float = 0.0

    def accepted_probability(self, name: str) -> float:
        return sum(p for _, p in self.per_readout[name].values())


def _named_inputs(inputs) -> dict[str, InputState]:
    if inputs is None:
        return dict(DEFAULT_INPUTS)
    if isinstance(inputs, Mapping):
        return dict(inputs)
    return {str(n): s for n, s in enumerate(inputs)}


def average_fidelity(
    pump: PumpParameter,
    dets: Detectors,
    inputs: Optional[Union[Mapping[str, InputState], Sequence[InputState]]] = None,
    accepted: Optional[Iterable[Readout]] = None,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> FidelityReport:
    """Mean over inputs of the probability-weighted fidelity within ``accepted``."""
    named = _named_inputs(inputs)
    accepted = list(DEFAULT_ACCEPTED if accepted is None else accepted)
    if not named:
        raise ValueError("at least one input state is required")
    if not accepted:
        raise ValueError("accepted readout set must be non-empty")

    per_readout: dict[str, dict[Readout, tuple[float, float]]] = {}
    per_input: dict[str, float] = {}
    tail = 0.0
    for name, state in named.items():
        rows: dict[Readout, tuple[float, float]] = {}
        for readout in accepted:
            try:
                post = posterior(readout, state, pump, dets, trunc)
            except ZeroEvidence:
                continue
            tail = max(tail, post.tail_estimate)
            rows[readout] = (fidelity_of_posterior(post, state), post.evidence)
        total_p = sum(p for _, p in rows.values())
        if total_p <= 0.0:
            raise NoAcceptedEvidence(
                f"no accepted readout has nonzero probability for input {name!r}"
            )
        per_readout[name] = rows
        per_input[name] = sum(f * p for f, p in rows.values()) / total_p
    avg = sum(per_input.values()) / len(per_input)
    return FidelityReport(per_readout, per_input, accepted, min(max(avg, 0.0), 1.0), tail)
