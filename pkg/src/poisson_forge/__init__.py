"""Exact weak Poisson structures on Lie algebras, momentum maps and loop-group holonomy."""
from .algebra import (BilinearForm, CentralExtension, LieAlgebra, LieReport, LinearEndo, TwoCocycle, abelian,
                      bracket, central_extension, check_cocycle, check_form_invariance,
                      check_kappa_skew_derivation, direct_sum, flat, gamma_inner, heisenberg, is_coboundary,
                      sharp, so3, so3_plus_line, validate_lie)
from .cotangent import (CotangentPoint, CotangentTangent, GeneratorAlgebra, gen_bracket, gen_jacobiator,
                        omega_eval, omega_oracle, orbit_form_eval, orbit_radical, reduction_check, theta_eval)
from .errors import *  # noqa: F401,F403
from .groups import MatrixRep, so2_rep, so3_rep, su2_rep, translations_rep
from .loops import (GaugeLoop, SampledLoop, TrigLoop, affine_flat_bracket, affine_ham_field, fiber_recover,
                    gauge_transform, holonomy, holonomy_equivariance_residual, loop_bracket, loop_D, loop_kappa)
from .momentum import (ComomentumMap, MomentumMap, check_equivariance, check_lie_hom, compose_group_momentum,
                       lift_obstruction)
from .poisson import (PoissonStructure, PolyVectorField, characteristic_form, differential, hamiltonian_field,
                      jacobiator, leibniz_check, pbracket, quotient_check, restrict_hyperplane, rk4_flow)
from .polynomial import Polynomial

__version__ = "0.1.0"
