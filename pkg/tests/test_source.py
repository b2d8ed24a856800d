import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pytest import approx

from strategies import input_states, outcomes
from telefid.errors import UnreachableOutcome
from telefid.oracle import OracleRun, project_outcome
from telefid.source import (
    IdealOutcome,
    InputState,
    PumpParameter,
    branch_amplitude_grids,
    e_factor,
    e_factor_grid,
    ideal_outcome_probability,
    teleported_pure_state,
)

S = 1 / math.sqrt(2)
O = IdealOutcome.from_string


def test_input_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        InputState(1.0, 0.1)
    InputState(-S, S)


def test_pump_rejects_negative():
    with pytest.raises(ValueError):
        PumpParameter(-0.1)
    p = PumpParameter(0.3)
    assert p.tanh_chi == math.tanh(0.3)
    assert p.cosh_chi >= 1


def test_outcome_rejects_negative():
    with pytest.raises(ValueError):
        IdealOutcome(0, -1, 0, 0)


def test_e_factor_examples():
    assert e_factor(O("0000"), InputState(S, S)) == 0.0
    assert e_factor(O("1001"), InputState(S, S)) == approx(1.0, abs=1e-15)
    assert e_factor(O("2000"), InputState(1.0, 0.0)) == 4.0


def test_e_factor_degenerate_terms_are_zero():
    # (-1)! appears in both branches; the squared-difference factor kills each
    assert e_factor(O("1010"), InputState(S, S)) == 0.0
    assert e_factor(O("0101"), InputState(S, S)) == 0.0


def test_e_factor_1001_matches_oracle_ratio():
    pump = PumpParameter(0.2)
    state = InputState(S, S)
    p_oracle, _ = project_outcome(OracleRun(state, pump, 9).vector, O("1001"))
    prefactor = pump.tanh_chi**2 / (pump.cosh_chi**4 * 2**2)
    assert p_oracle / prefactor == approx(1.0, abs=1e-12)


def test_ideal_probability_vacuum_is_zero():
    for chi in (0.0, 0.1, 0.7):
        assert ideal_outcome_probability(O("0000"), InputState(S, S), PumpParameter(chi)) == 0.0


def test_ideal_probability_1001():
    pump = PumpParameter(0.2)
    state = InputState(S, S)
    expected = math.tanh(0.2) ** 2 / (4 * math.cosh(0.2) ** 4)
    assert ideal_outcome_probability(O("1001"), state, pump) == approx(expected, rel=1e-14)
    p_oracle, _ = project_outcome(OracleRun(state, pump, 9).vector, O("1001"))
    assert abs(p_oracle - expected) < 1e-10


def _shell_total(n, state, pump):
    return math.fsum(
        ideal_outcome_probability(IdealOutcome(*o), state, pump)
        for o in itertools.product(range(n + 1), repeat=4)
        if sum(o) == n
    )


@pytest.mark.parametrize("chi", [0.05, 0.2, 0.6])
def test_photon_number_distribution_matches_pair_statistics(chi):
    # detected photons = 1 + m pairs; two independent two-mode squeezers give
    # P(m) = (m + 1) tanh^{2m} / cosh^4
    state = InputState(0.6, 0.8)
    pump = PumpParameter(chi)
    for n in range(1, 8):
        expected = n * math.tanh(chi) ** (2 * (n - 1)) / math.cosh(chi) ** 4
        assert _shell_total(n, state, pump) == approx(expected, rel=1e-12)


def test_normalization_converges_from_below():
    state = InputState(S, S)
    pump = PumpParameter(0.2)
    partial = np.cumsum([_shell_total(n, state, pump) for n in range(11)])
    assert np.all(np.diff(partial) > 0)
    assert np.all(partial <= 1 + 1e-15)
    residual = 1 - partial
    assert residual[10] < 1e-9
    # residual(N) / tanh^{2N} stays bounded
    ratios = [residual[n] / math.tanh(0.2) ** (2 * n) for n in range(1, 10)]
    assert max(ratios) < 20


def test_teleported_state_1001_is_input():
    state = InputState(0.6, -0.8)
    phi = teleported_pure_state(O("1001"), state)
    assert phi.kets() == {(1, 0): approx(0.6), (0, 1): approx(-0.8)}


def test_teleported_state_1100_flips_relative_sign():
    state = InputState(0.6, 0.8)
    phi = teleported_pure_state(O("1100"), state)
    assert phi.kets() == {(1, 0): approx(0.6), (0, 1): approx(-0.8)}


def test_teleported_state_2000_is_vertical_photon():
    for state in (InputState(1.0, 0.0), InputState(0.6, 0.8)):
        phi = teleported_pure_state(O("2000"), state)
        assert phi.amplitude_v == 0.0
        assert phi.kets() == {(0, 1): approx(1.0)}


def test_unreachable_outcome_raises():
    with pytest.raises(UnreachableOutcome):
        teleported_pure_state(O("0000"), InputState(S, S))
    with pytest.raises(UnreachableOutcome):
        teleported_pure_state(O("2000"), InputState(0.0, 1.0))


@given(outcomes, input_states())
def test_polarization_swap_symmetry(outcome, state):
    assert e_factor(outcome, state) == e_factor(outcome.swapped(), state.swapped())


@given(outcomes, input_states())
def test_teleported_state_normalized(outcome, state):
    if e_factor(outcome, state) == 0:
        return
    phi = teleported_pure_state(outcome, state)
    assert phi.amplitude_h**2 + phi.amplitude_v**2 == approx(1.0, abs=1e-12)
    if min(phi.label_h) < 0:
        assert phi.amplitude_h == 0.0
    if min(phi.label_v) < 0:
        assert phi.amplitude_v == 0.0


@given(input_states())
def test_grid_versions_match_scalar(state):
    idx = np.arange(5)
    i, j, k, l = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    e = e_factor_grid(i, j, k, l, state)
    amp_h, amp_v = branch_amplitude_grids(i, j, k, l, state)
    for o in itertools.product(range(5), repeat=4):
        outcome = IdealOutcome(*o)
        assert e[o] == approx(e_factor(outcome, state), rel=1e-14, abs=0)
        if e[o] > 0:
            phi = teleported_pure_state(outcome, state)
            assert amp_h[o] == approx(phi.amplitude_h, abs=1e-14)
            assert amp_v[o] == approx(phi.amplitude_v, abs=1e-14)
        else:
            assert amp_h[o] == amp_v[o] == 0.0


@given(st.floats(0.01, 0.6), input_states())
def test_probabilities_nonnegative(chi, state):
    pump = PumpParameter(chi)
    for o in itertools.product(range(3), repeat=4):
        assert ideal_outcome_probability(IdealOutcome(*o), state, pump) >= 0.0
