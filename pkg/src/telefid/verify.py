"""Closed form vs Fock oracle, as run by ``telefid verify``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .bayes import TruncationPolicy
from .detectors import DetectorParams, Readout
from .errors import ZeroEvidence
from .fidelity import DEFAULT_INPUTS, fidelity_direct
from .oracle import OracleRun, max_detected_total, project_outcome
from .source import IdealOutcome, PumpParameter, ideal_outcome_probability, teleported_pure_state

OUTCOME_TOTAL = 4
TOLERANCE = 1e-8
MAX_TOTAL_LIMIT = 12

DEFAULT_STATE_CHIS = (0.1, 0.3, 0.6)
DEFAULT_FID_CHIS = (0.05, 0.2, 0.4)
DEFAULT_FID_ETAS = (1e-5, 0.1, 1.0)
DEFAULT_FID_ZETAS = (0.0, 1e-6, 1e-3)
DEFAULT_READOUTS = ("1001", "1100")


def outcomes_up_to(total: int):
    for o in itertools.product(range(total + 1), repeat=4):
        if sum(o) <= total:
            yield IdealOutcome(*o)


def state_deviation(oracle_state: dict, closed_kets: dict) -> float:
    """Largest amplitude difference after aligning the global sign."""
    keys = set(oracle_state) | set(closed_kets)
    inner = sum(oracle_state.get(k, 0.0) * closed_kets.get(k, 0.0) for k in keys)
    sign = -1.0 if inner < 0 else 1.0
    return max(abs(oracle_state.get(k, 0.0) - sign * closed_kets.get(k, 0.0)) for k in keys)


@dataclass
class VerifyReport:
    max_total: int
    tolerance: float = TOLERANCE
    probability_dev: float = 0.0
    state_dev: float = 0.0
    fidelity_dev: float = 0.0
    max_leakage: float = 0.0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.diagnostics and max(
            self.probability_dev, self.state_dev, self.fidelity_dev
        ) < self.tolerance

    def summary(self) -> str:
        lines = [
            f"max_total                 {self.max_total}",
            f"max |p closed - p oracle|  {self.probability_dev:.3e}",
            f"max state deviation        {self.state_dev:.3e}",
            f"max fidelity deviation     {self.fidelity_dev:.3e}",
            f"max oracle norm leakage    {self.max_leakage:.3e}",
            f"tolerance                  {self.tolerance:.0e}",
        ]
        lines += [f"FAIL: {d}" for d in self.diagnostics]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def verify(
    max_total: int = 9,
    state_chis=DEFAULT_STATE_CHIS,
    fid_chis=DEFAULT_FID_CHIS,
    fid_etas=DEFAULT_FID_ETAS,
    fid_zetas=DEFAULT_FID_ZETAS,
    readouts=DEFAULT_READOUTS,
    tolerance: float = TOLERANCE,
) -> VerifyReport:
    if not 1 <= max_total <= MAX_TOTAL_LIMIT:
        raise ValueError(f"max_total must lie in [1, {MAX_TOTAL_LIMIT}]")
    report = VerifyReport(max_total=max_total, tolerance=tolerance)
    resolved = max_detected_total(max_total)
    if resolved < OUTCOME_TOTAL:
        report.diagnostics.append(
            f"truncation inconsistent: max_total={max_total} resolves detected totals up to "
            f"{resolved}, but the outcome grid needs {OUTCOME_TOTAL} "
            f"(max_total >= {2 * OUTCOME_TOTAL - 1})"
        )
        return report

    inputs = list(DEFAULT_INPUTS.values())
    for chi in state_chis:
        pump = PumpParameter(chi)
        for state in inputs:
            run = OracleRun(state, pump, max_total)
            report.max_leakage = max(report.max_leakage, run.vector.leakage)
            for outcome in outcomes_up_to(OUTCOME_TOTAL):
                p_oracle, cond = project_outcome(run.vector, outcome)
                p_closed = ideal_outcome_probability(outcome, state, pump)
                report.probability_dev = max(report.probability_dev, abs(p_oracle - p_closed))
                if cond is None:
                    continue
                kets = teleported_pure_state(outcome, state).kets()
                report.state_dev = max(report.state_dev, state_deviation(cond, kets))

    matched = TruncationPolicy.matched_to_oracle(max_total)
    readouts = [Readout.from_string(r) if isinstance(r, str) else r for r in readouts]
    for chi in fid_chis:
        pump = PumpParameter(chi)
        runs = [OracleRun(state, pump, max_total) for state in inputs]
        for eta, zeta in itertools.product(fid_etas, fid_zetas):
            dets = DetectorParams(eta, zeta)
            for run, readout in itertools.product(runs, readouts):
                try:
                    f_oracle = run.fidelity(readout, dets)
                except ZeroEvidence:
                    f_oracle = None
                try:
                    f_model = fidelity_direct(readout, run.state, pump, dets, matched)
                except ZeroEvidence:
                    f_model = None
                if (f_oracle is None) != (f_model is None):
                    report.diagnostics.append(
                        f"zero-evidence mismatch at chi={chi}, eta={eta}, zeta_dc={zeta}, {readout}"
                    )
                    continue
                if f_oracle is not None:
                    report.fidelity_dev = max(report.fidelity_dev, abs(f_oracle - f_model))
    return report
