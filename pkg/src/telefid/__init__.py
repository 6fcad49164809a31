"""Average teleportation fidelity over pure and X-state channels with
partially entangled joint measurements."""

from .analysis import (
    RegimeReport, equal_concurrence_threshold, fp_closed, frak_C, cal_C, fx_closed,
    improvement_check, quantum_feature_check, situation_b1_report, situation_b2_report,
    werner_crossover,
)
from .channels import (
    PureChannel, WernerParams, XStateParams, bell_diagonal_weights, principal_subspace_ok,
    pure_channel_density, pure_concurrence, werner_xstate, xstate_concurrence, xstate_density,
)
from .protocol import (
    MeasurementBasis, TeleportOutcome, average_fidelity_mc, average_fidelity_quadrature,
    basis_from_concurrence, build_basis, conditional_fidelity, correction_for,
    decomposition_identity_check, teleport_outcomes,
)
from .qkernel import bloch_quadrature, haar_random_qubit, wootters_concurrence

__version__ = "0.1.0"
