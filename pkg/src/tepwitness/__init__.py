"""Entropy-production trajectories and a non-Markovianity witness for
exactly solvable qubit channels, with an explicit-dilation verification path.
"""

from .channels import (
    AmplitudeDamping,
    Dephasing,
    GeneralizedAmplitudeDamping,
    KrausFamily,
    ad_G,
    ad_decay_rate,
    ad_kraus,
    apply,
    dephasing_factor,
    dephasing_kraus,
    dephasing_rate,
    extend_to_sa,
    gad_kraus,
    kraus_for,
)
from .dilation import OracleReport, dilated_state, oracle_checks, stinespring
from .entropy import (
    InfoQuantities,
    MeasurementBasis,
    classical_correlation,
    correlations,
    discord,
    entropy_exchange,
    mutual_information,
    tep,
    w_matrix,
)
from .errors import NumericalError, OracleCheckError
from .qmat import hermitian_eig, partial_trace, tensor, vn_entropy
from .witness import (
    InitialStateParam,
    OptimizerConfig,
    TimeGrid,
    TrajectoryRecord,
    WitnessResult,
    bell_state,
    generate_initial,
    negative_area,
    nonmarkovianity_measure,
    tepr_series,
    trajectory,
)

__version__ = "0.1.0"
