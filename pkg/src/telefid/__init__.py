"""Fidelity of linear-optics quantum teleportation with multi-pair SPDC
sources, lossy threshold detectors and dark counts."""

from .bayes import Posterior, TruncationPolicy, partition_z, posterior, readout_probability
from .detectors import (
    ALL_READOUTS,
    ChannelParams,
    DetectorParams,
    Readout,
    dark_count_probability,
    effective_efficiency,
    p_click,
    p_no_click,
    readout_likelihood,
)
from .errors import (
    ConfigError,
    NoAcceptedEvidence,
    NotConverged,
    TelefidError,
    UnreachableOutcome,
    WindowTooLarge,
    ZeroEvidence,
)
from .fidelity import (
    DEFAULT_ACCEPTED,
    DEFAULT_INPUTS,
    FidelityReport,
    MixedTeleportedState,
    average_fidelity,
    closed_form_from_weights,
    fidelity_closed_form,
    fidelity_direct,
    mixed_state,
)
from .oracle import FockVector, apply_beam_splitter, build_joint_state, oracle_fidelity, project_outcome
from .source import (
    IdealOutcome,
    InputState,
    PumpParameter,
    PureTeleportedState,
    e_factor,
    ideal_outcome_probability,
    teleported_pure_state,
)

__version__ = "0.1.0"
