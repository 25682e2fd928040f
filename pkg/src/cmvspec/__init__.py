"""cmvspec: spectra of CMV matrices with quasi-periodic Verblunsky coefficients.

Numerical toolkit for extended CMV matrices whose Verblunsky coefficients are
sampled along a torus translation: transfer-matrix cocycles, fibered rotation
numbers and Lyapunov exponents, spectral gaps with their integer (and, for the
period-two almost periodic model, half-shifted) labels, resonance-tongue
boundaries with closed-form opening slopes, unitary matrix truncations as an
independent eigenvalue oracle, and the conjugation between coined quantum
walks on the integer lattice and CMV matrices with vanishing odd coefficients.
"""

__version__ = "0.1.0"

from .cocycle import (SL2RMatrix, SU11Generator, SU11Matrix, diagonalize_su11,
                      eigenvalues_p2_constant, eigenvalues_qp_constant,
                      iterate, szego_step, to_sl2, two_step)
from .dynamics import (LyapunovEstimate, RotationEstimate, circle_dist,
                       lyapunov, lyapunov_model, orbit_estimates,
                       orbit_estimates_model, rotation_bisect, rotation_number,
                       rotation_number_model, scan_rotation_lyapunov,
                       two_step_estimates)
from .model import (GOLDEN_MEAN, Frequency, FourierPoly, ModelSpec,
                    diophantine_margin, eval_h, load_model, model_from_dict,
                    period_two_model, quasiperiodic_model, rho_of)
from .qwalk import (CGMVData, Coin, WalkWindow, build_walk, cgmv_map,
                    coin_sequence, step_state, verify_cgmv, walk_spectrum)
from .spectrum import (CMVTruncation, GapReport, OracleReport, SpectrumScan,
                       detect_gaps, extended_cmv_block, half_cell_grid,
                       label_of, oracle_compare, scan, truncated_cmv)
from .tongues import (P2Coefficients, SlopePrediction, TongueTrace,
                      measure_slopes, p2_coefficients, predicted_slopes_qp,
                      tip_theta, tip_theta_p2, trace_tongue)

__all__ = [name for name in dir() if not name.startswith("_")]
