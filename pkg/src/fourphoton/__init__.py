"""Simulation of a post-selected four-photon polarization state and the
four-party communication complexity game it is used for."""

__version__ = "0.1.0"

from .classical import classical_optimal_success, score_strategy
from .fock import (
    OperatorPolynomial,
    apply_beam_splitters,
    four_photon_state,
    ghz_epr_decompose,
    postselect_one_per_mode,
    spdc_second_order,
)
from .polarimetry import (
    AnalyzerSetting,
    SinusoidFit,
    correlation,
    correlation_scan,
    fit_sinusoid,
    fringe_scan_linear,
    sample_counts,
)
from .qccs import (
    QccsInputs,
    average_success,
    quantum_success_probability,
    run_protocol_trials,
    table_one,
    two_epr_state,
)
from .qstate import (
    LocalUnitary,
    NoisyState,
    OutcomeDistribution,
    PureState,
    apply_locals,
    born_distribution,
    mix_with_white_noise,
    rotation_rx,
    rotation_ry,
)
