"""Continuous homodyne monitoring of atomic currents on Bose-Hubbard rings.

Per-run quantum trajectories (diffusive stochastic Schroedinger equation),
unconditional and stochastic master equations, dark-state analysis of
local-current monitoring, and homodyne-record filtering.
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalAbort, SchemaError, SizeLimitError
from .fock import (FockBasis, OperatorMatrix, build_basis, hop_operator,
                   number_operator, operator_matrix)
from .model import (DegeneracyPoint, ModelParams, MomentumSpectrum, TLSParams,
                    build_hamiltonian, build_tls, degeneracy_points,
                    kinetic_hamiltonian, local_current, momentum_amplitudes,
                    momentum_spectrum, tls_potential, total_current)
from .measure import (CqedParams, MeasurementChannel, asym_channel,
                      gamma_from_cqed, spontaneous_channels, sym_channel,
                      tls_channel)
from .sse import (SseConfig, StateVector, TrajectoryRecord, haar_initial,
                  haar_state,
                  simulate_ensemble, simulate_trajectory, step,
                  strong_convergence, trajectory_rng)
from .master import (DensityMatrix, MasterRecord, SmeRecord, evolve_master,
                     evolve_sme, lindblad_rhs, pure_density, purity,
                     sme_ensemble, trace_distance)
from .darkstate import (DarkStateSpec, build_dark_state,
                        build_dark_state_realspace, condensate_state,
                        dark_census, dark_coefficients, degenerate_manifolds,
                        polynomial_state)
from .signal import (SignalStats, SpectrumEstimate, backaction_spectrum,
                     demodulate, dwell_fraction, dwell_times,
                     increment_spectrum, integrate_window, plateau_labels,
                     snr, transit_times)

__all__ = [name for name in dir() if not name.startswith("_")]
