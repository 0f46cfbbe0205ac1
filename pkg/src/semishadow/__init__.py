"""Shadowing of semigroup actions and non-autonomous systems by parallel gluing."""
from .core import REAL_LINE, TAU_EXACT, DomainError, Space, finite_space, hausdorff_distance, set_distance
from .gluing import GluingOracle, OracleFailure, RateFunction, glue_pair
from .maps import Affine, FiniteTable, PiecewisePsi, cyclic_g, psi
from .nonauto import NonAutoSystem, branch_shadow_construct, branch_trajectory, branch_vs_semigroup_report
from .parallel import ShadowConstructionFailed, certify_bounds, shadow_construct
from .perturb import build_pseudo, join_pseudo
from .semigroup import (GeneratorSet, InvalidTrajectory, PseudoTrajectory, Trajectory, classify_pseudo,
                        gap_profile, reencode_generators, step_gaps, validate_trajectory)
from .transfer import ConjugacySpec, SignedPower, conjugate_transfer, estimate_bilipschitz, invert_transfer
from .verdicts import check_shadowing, falsify_shadowing

__version__ = "0.1.0"
