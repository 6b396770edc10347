"""Spectral solver and solvability checks for Vekua-type evolution operators
on ``T x G`` with ``G`` a product of circle and SU(2) factors."""
from .errors import (ConfigError, DegenerateRho, DomainError, HypothesisViolation,
                     NonNegativityError, QuadratureFailure, ResonantMode, SingularMonodromy,
                     TruncationAsymmetry, VekuaError)
from .group import (FactorKind, GroupFactor, GroupModel, ModeScalars, circle_model,
                    conjugate_mode, enumerate_modes, mode_scalars, su2_model)
from .conditions import (GlobalConstants, Spectrum, classify_lambda0, dc_prime_equivalence,
                         diophantine_check, find_resonances, global_constants)
from .fields import (CoefficientField, PairedField, apply_P, conjugate_field, decay_diagnostic,
                     psi_conjugation, solve_field)
from .kernels import BACKEND
from .modes import (ModeSolution, ModeSystem, SolverGrid, VekuaParams, build_mode_system,
                    oracle_shooting, rho_branch, solve_mode, solve_mode_forced)
from .trigpoly import CTrigPoly, SplitAntiderivative, TrigPoly, antiderivative, mean2pi

__version__ = "0.1.0"
