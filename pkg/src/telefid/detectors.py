"""Threshold detectors with finite efficiency and dark counts, and the
mapping from a lossy channel to an effective detection efficiency."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import WindowTooLarge
from .source import IdealOutcome

LINEAR_POISSON_LIMIT = 0.1


@dataclass(frozen=True)
class DetectorParams:
    """``eta`` absorbs every transmission and coupling loss in front of the detector."""

    eta: float
    zeta_dc: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not 0.0 <= self.zeta_dc < 1.0:
            raise ValueError(f"zeta_dc must lie in [0, 1), got {self.zeta_dc!r}")


@dataclass(frozen=True, order=True)
class Readout:
    """Click flags on (a_H, a_V, b_H, b_V)."""

    q: bool
    r: bool
    s: bool
    t: bool

    def __post_init__(self):
        for name in ("q", "r", "s", "t"):
            object.__setattr__(self, name, bool(getattr(self, name)))

    def __iter__(self):
        return iter((self.q, self.r, self.s, self.t))

    def __str__(self):
        return "".join("1" if f else "0" for f in self)

    @classmethod
    def from_string(cls, text: str) -> Readout:
        text = text.strip()
        if len(text) != 4 or set(text) - {"0", "1"}:
            raise ValueError(f"readout must be four 0/1 characters, got {text!r}")
        return cls(*(c == "1" for c in text))

    def swapped(self) -> Readout:
        return Readout(self.r, self.q, self.t, self.s)


ALL_READOUTS: tuple[Readout, ...] = tuple(
    Readout(*flags) for flags in itertools.product((False, True), repeat=4)
)


@dataclass(frozen=True)
class ChannelParams:
    base_efficiency: float
    attenuation: float = 0.45  # dB/km
    distance: float = 0.0  # km
    dark_count_rate: float = 0.0  # 1/s
    coincidence_window: float = 5e-9  # s

    def __post_init__(self):
        if not 0.0 <= self.base_efficiency <= 1.0:
            raise ValueError(f"base_efficiency must lie in [0, 1], got {self.base_efficiency!r}")
        if self.attenuation < 0:
            raise ValueError(f"attenuation must be >= 0 dB/km, got {self.attenuation!r}")
        if self.distance < 0:
            raise ValueError(f"distance must be >= 0 km, got {self.distance!r}")
        if self.dark_count_rate < 0:
            raise ValueError(f"dark_count_rate must be >= 0, got {self.dark_count_rate!r}")
        if not self.coincidence_window > 0:
            raise ValueError(f"coincidence_window must be > 0, got {self.coincidence_window!r}")
        if self.dark_count_rate * self.coincidence_window >= 1.0:
            raise ValueError("dark_count_rate * coincidence_window must be < 1")

    def detector(self) -> DetectorParams:
        return DetectorParams(
            eta=effective_efficiency(self),
            zeta_dc=dark_count_probability(self.dark_count_rate, self.coincidence_window),
        )


Detectors = Union[DetectorParams, Sequence[DetectorParams]]


def as_quad(dets: Detectors) -> tuple[DetectorParams, ...]:
    if isinstance(dets, DetectorParams):
        return (dets,) * 4
    quad = tuple(dets)
    if len(quad) != 4 or not all(isinstance(d, DetectorParams) for d in quad):
        raise ValueError("expected one DetectorParams or a sequence of four")
    return quad


def p_no_click(photons: int, det: DetectorParams) -> float:
    # as printed: the dark-count factor also enters the per-photon miss probability
    if photons < 0:
        raise ValueError(f"photon number must be >= 0, got {photons!r}")
    z = det.zeta_dc
    return (1.0 - z) * (1.0 - det.eta * (1.0 - z)) ** photons


def p_click(photons: int, det: DetectorParams) -> float:
    return 1.0 - p_no_click(photons, det)


def readout_likelihood(readout: Readout, outcome: IdealOutcome, dets: Detectors) -> float:
    """p(qrst | ijkl) for four independent detectors."""
    prob = 1.0
    for clicked, n, det in zip(readout, outcome, as_quad(dets)):
        miss = p_no_click(n, det)
        prob *= (1.0 - miss) if clicked else miss
    return prob


def likelihood_vectors(readout: Readout, dets: Detectors, n_max: int) -> list[np.ndarray]:
    """Per-detector p(flag | n) for n = 0..n_max."""
    n = np.arange(n_max + 1)
    out = []
    for clicked, det in zip(readout, as_quad(dets)):
        z = det.zeta_dc
        miss = (1.0 - z) * (1.0 - det.eta * (1.0 - z)) ** n
        out.append(1.0 - miss if clicked else miss)
    return out


def effective_efficiency(ch: ChannelParams) -> float:
    return ch.base_efficiency * 10.0 ** (-ch.attenuation * ch.distance / 10.0)


def dark_count_probability(rate: float, window: float) -> float:
    """First-order Poisson probability of a dark count inside one window."""
    mean = rate * window
    if mean < 0 or not math.isfinite(mean):
        raise ValueError(f"rate and window must be non-negative, got {rate!r}, {window!r}")
    if mean >= LINEAR_POISSON_LIMIT:
        raise WindowTooLarge(
            f"rate*window = {mean:g} >= {LINEAR_POISSON_LIMIT}; linear dark-count model invalid"
        )
    return mean
