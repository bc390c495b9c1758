"""Numerical corona-problem solver on the unit disc.

Builds bounded holomorphic h_1..h_m with sum f_j h_j = 1 from data
functions whose sublevel sets are jointly separated, by correcting a
partition-of-unity solution through the wedge-contraction recursion, with
a singular-integral solver supplying the conjugate-derivative inverses.
"""

from .corona import (
    CheckResult,
    CoronaHypothesisError,
    CoronaProblem,
    PartitionOfUnity,
    SeparationTooTightError,
    SolveReport,
    build_partition_of_unity,
    check_corona_condition,
    check_separation,
    corona_correct,
    smooth_solution,
    solve_corona,
    verify_solution,
)
from .dbar import (
    DbarSolver,
    DiscCauchySolver,
    SolverStats,
    UnsupportedDegreeError,
    cauchy_pompeiu_transform,
    solve_01,
    verify_solver,
)
from .demos import DEMOS, demo_problem, demo_specs
from .grid import (
    PolarGrid,
    ScalarField,
    integrate,
    make_polar_grid,
    sup_norm,
    wirtinger_dbar_fd,
)
from .koszul import KoszulElement, eta, kelem_axpy, koszul_b, koszul_dbar
from .oracles import (
    NotCoprimeError,
    PolyBezoutCertificate,
    ZZbarPoly,
    brute_force_transform,
    extended_euclid_bezout,
    multi_bezout,
)
from .specs import (
    BlaschkeProduct,
    FunctionSpec,
    Polynomial,
    Rational,
    eval_spec,
    parse_spec,
    spec_derivative,
)

__version__ = "0.1.0"
