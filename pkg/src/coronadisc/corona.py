"""End-to-end pipeline: hypothesis checks, partition of unity, smooth
solution, holomorphic correction, and verification.

Given data functions f_1..f_m whose moduli are jointly bounded below in the
strong (separated level set) sense, the pipeline builds normalized
smoothstep bump functions rho_j supported where |f_j| > epsilon, forms the
smooth solution g_j = rho_j / f_j of sum f_j g_j = 1, and removes its
conjugate-derivative part by the downward wedge-degree recursion: the
correction term is contracted off after one integral solve per top wedge
component.  Because the correction touches the identity sum f_j h_j = 1
only through pointwise algebra, the final residual is machine-exact
regardless of solver accuracy; solver and finite-difference error show up
solely in the holomorphy defect of the h_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dbar import DbarSolver, DiscCauchySolver, SolverStats
from .grid import PolarGrid, ScalarField, sup_norm, wirtinger_dbar_fd
from .koszul import (
    KoszulElement,
    eta,
    kelem_sub,
    kelem_sup_norm,
    koszul_b,
    koszul_dbar,
)
from .specs import FunctionSpec, eval_spec

__all__ = [
    "CoronaHypothesisError",
    "SeparationTooTightError",
    "SupportConsistencyError",
    "CoronaStageError",
    "CheckResult",
    "CoronaProblem",
    "PartitionOfUnity",
    "SolveReport",
    "check_corona_condition",
    "check_separation",
    "build_partition_of_unity",
    "smooth_solution",
    "corona_correct",
    "solve_corona",
    "verify_solution",
    "smoothstep",
    "fd_input_tolerance",
    "serialize_report",
    "parse_report",
    "RESIDUAL_TOL",
    "PARTITION_TOL",
    "ALGEBRA_TOL",
]

# Structural residual bound for a successful solve (pointwise algebra only).
RESIDUAL_TOL = 1e-10
# Partition-of-unity normalization slack.
PARTITION_TOL = 1e-14
# Relative bound for identities that involve no discretization at all.
ALGEBRA_TOL = 1e-12
# Finite-difference holomorphy defect per unit field scale: measured on the
# spec classes shipped as demos (max observed constant ~1.9) and frozen with
# headroom.  Scales with dr^2 + dtheta^2.
FD_DEFECT_COEFF = 15.0
# Contraction defect of differentiated partition data decays only first
# order (the smoothstep is C^1, so second derivatives jump at the band
# edges).  Measured coefficient <= 0.4 across the demos; frozen with
# headroom.  Scales with dr + dtheta.
FD_KINK_COEFF = 2.0


class CoronaHypothesisError(RuntimeError):
    """A hypothesis check failed; carries the stage and the worst point."""

    def __init__(self, stage: str, message: str, worst_point: complex, value: float):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.worst_point = worst_point
        self.value = value


class SeparationTooTightError(RuntimeError):
    """The smoothstep band overshoots the separation the data provides."""


class SupportConsistencyError(RuntimeError):
    """|f_j| fell to the cutoff inside the support of rho_j."""


class CoronaStageError(RuntimeError):
    """Wraps a pipeline stage failure with its stage tag."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class CheckResult:
    passed: bool
    value: float
    worst_point: complex


def fd_input_tolerance(grid: PolarGrid, scale: float) -> float:
    """Resolution-dependent ceiling for the defect of holomorphic samples."""
    h2 = grid.dr**2 + grid.dtheta**2
    return FD_DEFECT_COEFF * h2 * max(scale, 1.0)


@dataclass
class CoronaProblem:
    """Data functions with their lower bound and discretization."""

    m: int
    n: int
    specs: list[FunctionSpec]
    f: list[ScalarField]
    epsilon: float
    grid: PolarGrid

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("need at least one data function")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if len(self.specs) != self.m or len(self.f) != self.m:
            raise ValueError("specs/fields length does not match m")
        for fld in self.f:
            if fld.grid != self.grid:
                raise ValueError("data field grid differs from problem grid")

    @classmethod
    def from_specs(
        cls,
        specs: list[FunctionSpec],
        epsilon: float,
        grid: PolarGrid,
        validate: bool = True,
    ) -> CoronaProblem:
        f = [eval_spec(s, grid) for s in specs]
        problem = cls(len(specs), 1, list(specs), f, epsilon, grid)
        if validate:
            for idx, fld in enumerate(f):
                defect = sup_norm(wirtinger_dbar_fd(fld), 0.9)
                tol = fd_input_tolerance(grid, sup_norm(fld))
                if defect > tol:
                    raise ValueError(
                        f"data function {idx + 1} is not holomorphic on the grid: "
                        f"defect {defect:.3e} exceeds tolerance {tol:.3e}"
                    )
        return problem

    def boundary_samples(self) -> np.ndarray:
        """Unit-circle sample points matching the angular resolution."""
        return np.exp(1j * self.grid.theta)


def check_corona_condition(p: CoronaProblem) -> CheckResult:
    """min over grid and boundary samples of sum_j |f_j|, compared to epsilon."""
    total = np.zeros((p.grid.n_r, p.grid.n_theta))
    for fld in p.f:
        total += np.abs(fld.values)
    idx = np.unravel_index(np.argmin(total), total.shape)
    min_val = float(total[idx])
    worst = complex(p.grid.nodes[idx])
    boundary = p.boundary_samples()
    btotal = np.zeros(len(boundary))
    for spec in p.specs:
        btotal += np.abs(eval_spec(spec, boundary))
    bidx = int(np.argmin(btotal))
    if btotal[bidx] < min_val:
        min_val = float(btotal[bidx])
        worst = complex(boundary[bidx])
    return CheckResult(min_val > p.epsilon, min_val, worst)


def check_separation(p: CoronaProblem, margin: float = 0.05) -> CheckResult:
    """Require max_j |f_j| >= epsilon (1 + margin) at every sample point.

    The margin is the grid proxy for the hypothesis that the closed
    sublevel sets {|f_j| <= epsilon} have empty joint intersection: it
    keeps the complement cover open by a definite amount, boundary ring
    included.
    """
    stack = np.stack([np.abs(fld.values) for fld in p.f])
    best = stack.max(axis=0)
    idx = np.unravel_index(np.argmin(best), best.shape)
    min_val = float(best[idx])
    worst = complex(p.grid.nodes[idx])
    boundary = p.boundary_samples()
    bstack = np.stack([np.abs(eval_spec(spec, boundary)) for spec in p.specs])
    bbest = bstack.max(axis=0)
    bidx = int(np.argmin(bbest))
    if bbest[bidx] < min_val:
        min_val = float(bbest[bidx])
        worst = complex(boundary[bidx])
    return CheckResult(min_val >= p.epsilon * (1.0 + margin), min_val, worst)


def smoothstep(t: np.ndarray) -> np.ndarray:
    """0 for t <= 0, 1 for t >= 1, 3t^2 - 2t^3 between."""
    tc = np.clip(t, 0.0, 1.0)
    return tc * tc * (3.0 - 2.0 * tc)


@dataclass
class PartitionOfUnity:
    """Normalized smoothstep bumps rho_j with their band parameters."""

    rho: list[ScalarField]
    epsilon: float
    sigma: float
    chi_min: float


def build_partition_of_unity(
    p: CoronaProblem, sigma: float = 0.5, c_min: float = 0.1
) -> PartitionOfUnity:
    """Normalized smoothsteps of |f_j| over the band [epsilon, (1+sigma) epsilon].

    chi_j vanishes exactly wherever |f_j| <= epsilon, so supp(rho_j) stays
    inside the region where division by f_j is safe.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    chi = [
        smoothstep((np.abs(fld.values) - p.epsilon) / (sigma * p.epsilon)) for fld in p.f
    ]
    total = np.zeros_like(chi[0])
    for c in chi:
        total += c
    chi_min = float(total.min())
    if chi_min < c_min:
        raise SeparationTooTightError(
            f"min of the unnormalized bump sum is {chi_min:.4f} < {c_min}; "
            "the smoothstep band exceeds the available separation -- lower "
            "sigma or rerun the separation check with a larger margin"
        )
    rho = [ScalarField(p.grid, (c / total).astype(np.complex128)) for c in chi]
    return PartitionOfUnity(rho, p.epsilon, sigma, chi_min)


def smooth_solution(p: CoronaProblem, pou: PartitionOfUnity) -> list[ScalarField]:
    """g_j = rho_j / f_j on supp(rho_j), zero elsewhere; sum f_j g_j = 1."""
    g: list[ScalarField] = []
    for j, (rho_j, f_j) in enumerate(zip(pou.rho, p.f)):
        support = rho_j.values.real > 0.0
        absf = np.abs(f_j.values)
        bad = support & (absf <= p.epsilon * 1e-6)
        if bad.any():
            where = p.grid.nodes[bad][0]
            raise SupportConsistencyError(
                f"|f_{j + 1}| collapsed to {absf[bad][0]:.3e} inside supp(rho_{j + 1}) "
                f"at z = {where}; partition support invariant violated"
            )
        values = np.zeros_like(rho_j.values)
        np.divide(rho_j.values, f_j.values, out=values, where=support)
        g.append(ScalarField(p.grid, values))
    resid = np.full((p.grid.n_r, p.grid.n_theta), -1.0, dtype=np.complex128)
    for f_j, g_j in zip(p.f, g):
        resid += f_j.values * g_j.values
    worst = float(np.abs(resid).max())
    if worst > 100 * PARTITION_TOL:
        raise SupportConsistencyError(
            f"smooth solution identity failed: |sum f_j g_j - 1| reaches {worst:.3e}"
        )
    return g


def corona_correct(
    x: KoszulElement,
    p: CoronaProblem,
    g: list[ScalarField],
    solver: DbarSolver,
    stats: SolverStats | None = None,
    b_tol: float | None = None,
) -> KoszulElement:
    """Downward recursion on form degree: produce x' with b(x') = x exactly
    and dbar(x') small.

    At the top form degree the left-wedge image already works (its
    conjugate derivative lands in a vanishing degree).  Below that, the
    derivative of the wedge image is itself corrected one level up, the
    integral solver removes its dbar part, and the contraction of that
    solution is subtracted: x' = eta(x) - b(z).  Contraction and wedge are
    pointwise algebra, so b(x') = x holds to machine precision no matter
    how accurate the solver is.
    """
    scale = kelem_sup_norm(x)
    if scale == 0.0:
        return KoszulElement.zero(p.m, x.n, x.j + 1, x.l, p.grid)
    if b_tol is None:
        b_tol = ALGEBRA_TOL * max(scale, 1.0)
    b_defect = kelem_sup_norm(koszul_b(x, p.f))
    if b_defect > b_tol:
        raise ValueError(
            f"input is not contraction-closed: |b(x)| = {b_defect:.3e} > {b_tol:.3e}"
        )
    if x.l < x.n:
        dbar_defect = kelem_sup_norm(koszul_dbar(x), 0.9)
        dbar_tol = fd_input_tolerance(p.grid, scale)
        if dbar_defect > dbar_tol:
            raise ValueError(
                f"input is not dbar-closed: interior |dbar(x)| = {dbar_defect:.3e} "
                f"> {dbar_tol:.3e}"
            )
    lifted = eta(x, g)
    if x.l >= x.n:
        return lifted
    w = koszul_dbar(lifted)
    w_sup = kelem_sup_norm(w)
    if w_sup == 0.0:
        return lifted
    # b(w) = dbar(b(eta(x))) up to the finite-difference commutator.  The
    # partition data is C^1 with curvature jumps at the band edges, so the
    # commutator decays first order and scales with the derivative data.
    h1 = p.grid.dr + p.grid.dtheta
    w_tol = FD_KINK_COEFF * h1 * max(w_sup, kelem_sup_norm(lifted), 1.0)
    y = corona_correct(w, p, g, solver, stats=stats, b_tol=w_tol)
    z, st = solver.solve(y)
    if stats is not None:
        stats.absorb(st)
    return kelem_sub(lifted, koszul_b(z, p.f))


@dataclass
class SolveReport:
    """Measured norms, defects, and bound margins of one solve."""

    n_r: int
    n_theta: int
    epsilon: float
    r_int: float
    residual_sup_interior: float
    residual_sup_full: float
    h_sup: list[float]
    holo_defect: list[float]
    g_bound_margin: list[float] | None = None
    dbar_g_bound_margin: list[float] | None = None
    solver_stats: SolverStats | None = None
    sigma: float | None = None
    margin: float | None = None
    chi_min: float | None = None


def verify_solution(p: CoronaProblem, h: list[ScalarField], r_int: float = 0.9) -> SolveReport:
    """Measure the residual of sum f_j h_j = 1 and per-function holomorphy.

    All norms are grid sup-norms; the residual is reported both on the
    interior r <= r_int (where the finite-difference stencils are clean)
    and over the full grid.
    """
    if len(h) != p.m:
        raise ValueError(f"solution tuple has length {len(h)}, problem has m = {p.m}")
    for fld in h:
        if fld.grid != p.grid:
            raise ValueError("solution field grid differs from problem grid")
    resid = np.full((p.grid.n_r, p.grid.n_theta), -1.0, dtype=np.complex128)
    for f_j, h_j in zip(p.f, h):
        resid += f_j.values * h_j.values
    resid_field = ScalarField(p.grid, resid)
    return SolveReport(
        n_r=p.grid.n_r,
        n_theta=p.grid.n_theta,
        epsilon=p.epsilon,
        r_int=r_int,
        residual_sup_interior=sup_norm(resid_field, r_int),
        residual_sup_full=sup_norm(resid_field),
        h_sup=[sup_norm(fld) for fld in h],
        holo_defect=[sup_norm(wirtinger_dbar_fd(fld), r_int) for fld in h],
    )


def solve_corona(
    p: CoronaProblem,
    solver: DbarSolver | None = None,
    sigma: float = 0.5,
    margin: float = 0.05,
    r_int: float = 0.9,
    c_min: float = 0.1,
) -> tuple[list[ScalarField], SolveReport, PartitionOfUnity, list[ScalarField]]:
    """Run the full pipeline; returns (h, report, partition, smooth g).

    Raises :class:`CoronaHypothesisError` if either hypothesis check fails;
    other stage failures are wrapped in :class:`CoronaStageError`.
    """
    if solver is None:
        solver = DiscCauchySolver()
    cc = check_corona_condition(p)
    if not cc.passed:
        raise CoronaHypothesisError(
            "corona-condition",
            f"min sum |f_j| = {cc.value:.6g} <= epsilon = {p.epsilon}",
            cc.worst_point,
            cc.value,
        )
    cs = check_separation(p, margin)
    if not cs.passed:
        raise CoronaHypothesisError(
            "separation",
            f"max_j |f_j| = {cs.value:.6g} < epsilon (1 + margin) = "
            f"{p.epsilon * (1 + margin):.6g} near z = {cs.worst_point:.6g}",
            cs.worst_point,
            cs.value,
        )

    def run(stage: str, fn):
        try:
            return fn()
        except (CoronaHypothesisError, CoronaStageError):
            raise
        except Exception as exc:
            raise CoronaStageError(stage, exc) from exc

    pou = run("partition-of-unity", lambda: build_partition_of_unity(p, sigma, c_min))
    g = run("smooth-solution", lambda: smooth_solution(p, pou))
    stats = SolverStats(resolution=p.grid.resolution)
    one = KoszulElement.one(p.m, p.n, p.grid)
    corrected = run(
        "holomorphic-correction",
        lambda: corona_correct(one, p, g, solver, stats=stats),
    )
    h = [corrected.component((j,), ()) for j in range(1, p.m + 1)]
    report = run("verification", lambda: verify_solution(p, h, r_int))
    report.sigma = sigma
    report.margin = margin
    report.chi_min = pou.chi_min
    report.solver_stats = stats

    inv_eps = 1.0 / p.epsilon
    g_margin = []
    dbar_margin = []
    for rho_j, g_j in zip(pou.rho, g):
        g_margin.append(inv_eps * sup_norm(rho_j) - sup_norm(g_j))
        dbar_margin.append(
            inv_eps * sup_norm(wirtinger_dbar_fd(rho_j), r_int)
            - sup_norm(wirtinger_dbar_fd(g_j), r_int)
        )
    report.g_bound_margin = g_margin
    report.dbar_g_bound_margin = dbar_margin
    return h, report, pou, g


def serialize_report(report: SolveReport) -> str:
    """Flat ``key = value`` lines, stable order, 17 significant digits."""

    def fmt(x: float) -> str:
        return f"{x:.17g}"

    lines = [
        f"n_r = {report.n_r}",
        f"n_theta = {report.n_theta}",
        f"epsilon = {fmt(report.epsilon)}",
        f"r_int = {fmt(report.r_int)}",
    ]
    if report.sigma is not None:
        lines.append(f"sigma = {fmt(report.sigma)}")
    if report.margin is not None:
        lines.append(f"margin = {fmt(report.margin)}")
    if report.chi_min is not None:
        lines.append(f"chi_min = {fmt(report.chi_min)}")
    lines.append(f"residual_sup_interior = {fmt(report.residual_sup_interior)}")
    lines.append(f"residual_sup_full = {fmt(report.residual_sup_full)}")
    for j, v in enumerate(report.h_sup, start=1):
        lines.append(f"h_sup_{j} = {fmt(v)}")
    for j, v in enumerate(report.holo_defect, start=1):
        lines.append(f"holo_defect_{j} = {fmt(v)}")
    if report.g_bound_margin is not None:
        for j, v in enumerate(report.g_bound_margin, start=1):
            lines.append(f"g_bound_margin_{j} = {fmt(v)}")
    if report.dbar_g_bound_margin is not None:
        for j, v in enumerate(report.dbar_g_bound_margin, start=1):
            lines.append(f"dbar_g_bound_margin_{j} = {fmt(v)}")
    if report.solver_stats is not None:
        st = report.solver_stats
        lines.append(f"solver_components_solved = {st.components_solved}")
        lines.append(f"solver_max_input_sup = {fmt(st.max_input_sup)}")
        lines.append(f"solver_max_output_sup = {fmt(st.max_output_sup)}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, float]:
    """Read back a serialized report into a flat dict."""
    out: dict[str, float] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ValueError(f"report line {lineno} is not 'key = value': {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = float(value.strip())
    return out
