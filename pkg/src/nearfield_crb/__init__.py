"""Cramér-Rao bounds for near-field angle/range sensing with a uniform circular array and OFDM."""

__version__ = "0.1.0"

from .crb_closed import (
    INFINITE_CRB,
    CrbPair,
    InfiniteCrb,
    crb_closed,
    crb_r_closed,
    crb_r_farfield,
    crb_r_single_carrier,
    crb_theta_closed,
)
from .crb_exact import (
    CovarianceSpec,
    FimInnerProducts,
    QMatrix,
    crb_exact,
    crb_from_q,
    fim_inner_products,
    q_matrix,
    sampled_fim_oracle,
)
from .errors import ConvergenceError, DomainError, NearFieldError, UnidentifiableError, ValidationError
from .geometry import ArrayGeometry, TargetLocation, antenna_positions, distance_derivatives, propagation_distances
from .lemma_sums import GeometrySums, closed_form_sums, exact_sums
from .scenario import Scenario, SensingBudget, default_scenario
from .specfun import QuadratureSettings, k_alpha, phi, xi
from .waveform import SPEED_OF_LIGHT, OfdmGrid, SpectralMoments, spectral_moments, subcarrier_frequencies, wavenumbers
