"""Dressed-basis Markovian master equation for the finite-size dissipative Dicke model."""

__version__ = "0.1.0"

from .model import (ModelParams, RegimeReport, a_subspace, alpha, alphas, build_h1,
                    j3_in_j1_basis, parity_conjugate, parity_map, validate_regime)
from .reservoir import (QuadratureError, ReservoirParams, bose_einstein,
                        correlation_closed_form, correlation_quadrature, dephasing_rate,
                        excitation_rate, gamma_from_reservoir, lamb_shift_diagnostic,
                        spectral_correlation, spectral_density)
from .liouvillian import (Liouvillian, build, parity_covariance_check, steady_state,
                          superoperator_matrix)
from .dynamics import (IntegrationError, InvariantViolation, Trajectory, evolve,
                       expect_re_a, initial_state_phi, propagator_expm, quench_experiment)
from .correlation import (FitError, FitPolicy, FitResult, fit_exponential, g1,
                          steady_photon_number, tau_c_sweep)
from .oracle import (FockTruncation, TruncationError, dissipator_numeric_oracle,
                     dressed_subspace_check, full_dicke_hamiltonian)
