"""Brute-force Fock-space simulation of the teleportation circuit.

Everything here is computed from creation-operator algebra on six modes
(a_H, a_V, b_H, b_V, c_H, c_V). None of the closed-form outcome
probabilities or conditional states are used, so this module serves as an
independent check on them.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .detectors import Detectors, Readout, readout_likelihood
from .errors import ZeroEvidence
from .source import IdealOutcome, InputState, PumpParameter

A_H, A_V, B_H, B_V, C_H, C_V = range(6)
N_MODES = 6

Occupation = tuple[int, int, int, int, int, int]


def _unit(*modes: int) -> Occupation:
    occ = [0] * N_MODES
    for m in modes:
        occ[m] += 1
    return tuple(occ)


@dataclass
class FockVector:
    """Sparse real amplitudes keyed by six-mode occupation tuples."""

    amplitudes: dict[Occupation, float]
    max_total: int
    leakage: float = 0.0

    def norm_squared(self) -> float:
        return math.fsum(a * a for a in self.amplitudes.values())

    def __getitem__(self, occ: Occupation) -> float:
        return self.amplitudes.get(tuple(occ), 0.0)

    def __len__(self):
        return len(self.amplitudes)


# Polynomials in creation operators: exponent tuple -> coefficient.
Poly = dict


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = defaultdict(float)
    for ep, cp in p.items():
        for eq, cq in q.items():
            out[tuple(x + y for x, y in zip(ep, eq))] += cp * cq
    return dict(out)


def _poly_to_fock(p: Poly) -> dict[Occupation, float]:
    # prod (a_m^dag)^n_m |vac> = sqrt(prod n_m!) |n>
    out = {}
    for exps, c in p.items():
        amp = c * math.sqrt(math.prod(math.factorial(n) for n in exps))
        if amp != 0.0:
            out[exps] = amp
    return out


def _fock_to_poly(amps: dict[Occupation, float]) -> Poly:
    return {
        occ: a / math.sqrt(math.prod(math.factorial(n) for n in occ))
        for occ, a in amps.items()
    }


def _pair_operator_power(n: int) -> Poly:
    """(b_H^dag c_V^dag - b_V^dag c_H^dag)^n, expanded binomially."""
    out: Poly = {}
    for p in range(n + 1):
        exps = [0] * N_MODES
        exps[B_H] = exps[C_V] = p
        exps[B_V] = exps[C_H] = n - p
        out[tuple(exps)] = math.comb(n, p) * (-1.0) ** (n - p)
    return out


def build_joint_state(state: InputState, pump: PumpParameter, max_total: int = 15) -> FockVector:
    """Input qubit on mode a times the truncated normal-ordered SPDC state.

    Pair creation uses ``phi = tanh(chi)`` with vacuum amplitude
    ``1/cosh(chi)**2``. Orders with ``1 + 2n > max_total`` are dropped and
    their weight is reported as ``leakage``.
    """
    if max_total < 1:
        raise ValueError("max_total must be >= 1")
    phi = math.tanh(pump.chi)
    vac = 1.0 / math.cosh(pump.chi) ** 2
    source: Poly = {}
    n = 0
    while 1 + 2 * n <= max_total:
        scale = vac * phi**n / math.factorial(n)
        for exps, c in _pair_operator_power(n).items():
            source[exps] = source.get(exps, 0.0) + scale * c
        n += 1
    qubit: Poly = {}
    if state.alpha:
        qubit[_unit(A_H)] = state.alpha
    if state.beta:
        qubit[_unit(A_V)] = state.beta
    amps = _poly_to_fock(_poly_mul(qubit, source))
    vec = FockVector(amps, max_total)
    vec.leakage = max(0.0, 1.0 - vec.norm_squared())
    return vec


def _beam_splitter_sector(n_a: int, n_b: int) -> dict[tuple[int, int], float]:
    """(a - b)^n_a (a + b)^n_b / sqrt(2)^(n_a+n_b) as {(x, y): coeff of a^x b^y}."""
    out: dict[tuple[int, int], float] = defaultdict(float)
    scale = 2.0 ** (-(n_a + n_b) / 2)
    for u in range(n_a + 1):
        cu = math.comb(n_a, u) * (-1.0) ** (n_a - u)
        for v in range(n_b + 1):
            out[(u + v, n_a + n_b - u - v)] += scale * cu * math.comb(n_b, v)
    return out


def apply_beam_splitter(state: FockVector) -> FockVector:
    """Balanced beam splitter on spatial modes a and b, per polarization:
    a^dag -> (a^dag - b^dag)/sqrt2, b^dag -> (a^dag + b^dag)/sqrt2."""
    poly_out: Poly = defaultdict(float)
    for occ, c in _fock_to_poly(state.amplitudes).items():
        h = _beam_splitter_sector(occ[A_H], occ[B_H])
        v = _beam_splitter_sector(occ[A_V], occ[B_V])
        for (ah, bh), ch in h.items():
            for (av, bv), cv in v.items():
                poly_out[(ah, av, bh, bv, occ[C_H], occ[C_V])] += c * ch * cv
    return FockVector(_poly_to_fock(poly_out), state.max_total, state.leakage)


def max_detected_total(max_total: int) -> int:
    """Largest photon number on modes a, b kept by a six-mode cap of ``max_total``."""
    return 1 + (max_total - 1) // 2


def project_outcome(
    state: FockVector, outcome: IdealOutcome
) -> tuple[float, Optional[dict[tuple[int, int], float]]]:
    """Probability of ``outcome`` on (a_H, a_V, b_H, b_V) and the normalized
    conditional state on (c_H, c_V), or None when the probability is 0."""
    if outcome.total > max_detected_total(state.max_total):
        raise ValueError(
            f"outcome total {outcome.total} is not resolved at max_total={state.max_total}"
        )
    key = tuple(outcome)
    cond = {occ[4:]: a for occ, a in state.amplitudes.items() if occ[:4] == key}
    prob = math.fsum(a * a for a in cond.values())
    if prob == 0.0:
        return 0.0, None
    norm = math.sqrt(prob)
    return prob, {c: a / norm for c, a in cond.items()}


def outcome_table(state: FockVector) -> dict[IdealOutcome, dict[tuple[int, int], float]]:
    """Unnormalized conditional vectors for every outcome present in ``state``."""
    table: dict[tuple, dict] = defaultdict(dict)
    for occ, a in sorted(state.amplitudes.items()):
        table[occ[:4]][occ[4:]] = a
    return {IdealOutcome(*k): v for k, v in table.items()}


@dataclass
class OracleRun:
    """Cached post-beam-splitter vector for one input and pump setting."""

    state: InputState
    pump: PumpParameter
    max_total: int
    vector: FockVector = field(init=False, repr=False)

    def __post_init__(self):
        self.vector = apply_beam_splitter(build_joint_state(self.state, self.pump, self.max_total))
        self.table = outcome_table(self.vector)

    def fidelity(self, readout: Readout, dets: Detectors) -> float:
        overlap_mass = []
        evidence = []
        for outcome, cond in self.table.items():
            lik = readout_likelihood(readout, outcome, dets)
            if lik == 0.0:
                continue
            evidence.append(lik * math.fsum(a * a for a in cond.values()))
            ov = self.state.alpha * cond.get((1, 0), 0.0) + self.state.beta * cond.get((0, 1), 0.0)
            overlap_mass.append(lik * ov * ov)
        z = math.fsum(evidence)
        if z == 0.0:
            raise ZeroEvidence(f"readout {readout} is impossible under the model")
        return math.sqrt(min(max(math.fsum(overlap_mass) / z, 0.0), 1.0))


def oracle_fidelity(
    readout: Readout,
    state: InputState,
    pump: PumpParameter,
    dets: Detectors,
    max_total: int = 15,
) -> float:
    return OracleRun(state, pump, max_total).fidelity(readout, dets)
