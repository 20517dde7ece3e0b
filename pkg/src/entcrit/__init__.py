"""Two-qubit entanglement from joint phase statistics.

Gamma = 2 ||rho_14| - |rho_23||, its supremum over local unitaries, a
Bell-analyzer protocol that measures it, and reference measures
(concurrence, partial transpose) to compare against.
"""
from .bell_analyzer import (BellProbabilities, ProtocolResult, ShotRecord,
                            bell_probabilities, corner_differences,
                            measured_abs_corners, protocol_gamma_sup,
                            sample_bell_outcomes, visibility)
from .config import TOL, Tolerances, UsageError, ValidationError
# the gamma_sup function stays in its module: re-exporting it here would
# shadow the module of the same name
from .gamma_sup import (GammaSupResult, OptimizerConfig, brute_force_oracle,
                        coordinate_ascent)
from .local_unitary import (FullLocalUnitary, LocalUnitaryParams, PhaseOnlyParams,
                            apply, apply_phase_only, build_from_params,
                            haar_local_unitary)
from .measures import (MeasureReport, concurrence_mixed, concurrence_pure,
                       is_ppt, measure_report, negativity, partial_transpose)
from .phase_povm import (FourierPair, JointPhaseDistribution, PhaseGrid,
                         fourier_components, gamma_closed_form, gamma_numeric,
                         joint_phase_distribution)
from .states import (BellKind, DensityMatrix, PureState, bell_diagonal_state,
                     bell_state, density_from_pure, haar_random_pure,
                     horodecki_state, product_state, random_mixed,
                     werner_state)

__version__ = "0.1.0"
