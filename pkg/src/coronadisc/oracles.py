"""Independent ground truth: exact polynomial cofactor identities and a
brute-force evaluation of the disc's singular integral operator.

The cofactor identities come from the extended Euclidean algorithm over
complex floating-point coefficients; every certificate is re-verified
symbolically (residual polynomial of sum_j f_j u_j - 1) before it is
returned.  The integral oracle shares no quadrature code with the solver:
it integrates in polar coordinates centered at the singular point, where
the area element cancels the kernel singularity exactly, with the radial
extent to the unit circle computed in closed form along each ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import PolarGrid, ScalarField
from .specs import Polynomial, format_complex, poly_add, poly_mul, poly_trim

__all__ = [
    "NotCoprimeError",
    "PolyBezoutCertificate",
    "extended_euclid_bezout",
    "multi_bezout",
    "ZZbarPoly",
    "brute_force_transform",
]

RESIDUAL_TOL = 1e-10
REMAINDER_REL_TOL = 1e-8


class NotCoprimeError(ValueError):
    """Inputs share a (near-)common root; no bounded cofactor identity."""


def _coeff_norm(c: np.ndarray) -> float:
    return float(np.abs(c).max())


def _pivotpoly_trim(c: np.ndarray, scale: float) -> np.ndarray:
    """Drop leading coefficients that are negligible against ``scale``."""
    c = np.asarray(c, dtype=np.complex128)
    deg = len(c) - 1
    while deg > 0 and abs(c[deg]) <= 1e-14 * scale:
        deg -= 1
    return c[: deg + 1]


def _poly_divmod(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Long division a = q b + r with deg r < deg b; b must lead robustly."""
    a = np.array(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    db = len(b) - 1
    lead = b[db]
    q = np.zeros(max(len(a) - db, 1), dtype=np.complex128)
    for k in range(len(a) - 1, db - 1, -1):
        factor = a[k] / lead
        q[k - db] = factor
        a[k - db : k + 1] -= factor * b[: db + 1]
    r = a[:db] if db > 0 else np.zeros(1, dtype=np.complex128)
    return poly_trim(q), poly_trim(r)


def _ext_euclid(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remainder chain with cofactors: returns (g, u, v) with u p + v q = g.

    Stops when the remainder norm drops below the relative floor, so a
    genuine common factor surfaces as a positive-degree g rather than a
    division blow-up.
    """
    scale = max(_coeff_norm(p), _coeff_norm(q), 1.0)
    r0, r1 = poly_trim(p), poly_trim(q)
    u0 = np.ones(1, dtype=np.complex128)
    u1 = np.zeros(1, dtype=np.complex128)
    v0 = np.zeros(1, dtype=np.complex128)
    v1 = np.ones(1, dtype=np.complex128)
    while True:
        r1 = _pivotpoly_trim(r1, scale)
        if _coeff_norm(r1) <= REMAINDER_REL_TOL * scale:
            return r0, u0, v0
        if len(r1) == 1:
            return r1, u1, v1
        quo, rem = _poly_divmod(r0, r1)
        r0, r1 = r1, rem
        u0, u1 = u1, poly_add(u0, -1.0 * poly_mul(quo, u1))
        v0, v1 = v1, poly_add(v0, -1.0 * poly_mul(quo, v1))


@dataclass
class PolyBezoutCertificate:
    """Cofactor identity sum_j inputs_j * cofactors_j = 1, symbolically checked."""

    inputs: list[np.ndarray]
    cofactors: list[np.ndarray]
    residual_poly: np.ndarray

    @property
    def residual_norm(self) -> float:
        return _coeff_norm(self.residual_poly)

    def cofactor_specs(self) -> list[Polynomial]:
        return [Polynomial(c) for c in self.cofactors]

    def dump(self) -> str:
        """One cofactor per line, in the function-spec text syntax."""
        lines = []
        for c in self.cofactors:
            lines.append("poly:" + ",".join(format_complex(x) for x in c))
        return "\n".join(lines) + "\n"


def _make_certificate(
    inputs: list[np.ndarray], cofactors: list[np.ndarray]
) -> PolyBezoutCertificate:
    total = np.zeros(1, dtype=np.complex128)
    for f, u in zip(inputs, cofactors):
        total = poly_add(total, poly_mul(f, u))
    residual = poly_add(total, np.array([-1.0], dtype=np.complex128))
    if _coeff_norm(residual) > RESIDUAL_TOL:
        raise NotCoprimeError(
            f"certificate self-check failed: residual norm {_coeff_norm(residual):.3e}"
        )
    return PolyBezoutCertificate(inputs, cofactors, residual)


def extended_euclid_bezout(p, q) -> PolyBezoutCertificate:
    """Cofactors u, v with u p + v q = 1 for coprime polynomials."""
    p = poly_trim(np.asarray(p, dtype=np.complex128))
    q = poly_trim(np.asarray(q, dtype=np.complex128))
    scale = max(_coeff_norm(p), _coeff_norm(q), 1.0)
    g, u, v = _ext_euclid(p, q)
    if len(g) > 1 or abs(g[0]) <= REMAINDER_REL_TOL * scale:
        raise NotCoprimeError(
            "inputs share a (near-)common root: gcd "
            f"degree {len(g) - 1}, norm {_coeff_norm(g):.3e}"
        )
    c = g[0]
    return _make_certificate([p, q], [poly_trim(u / c), poly_trim(v / c)])


def multi_bezout(ps) -> PolyBezoutCertificate:
    """Fold the pairwise identity across a list of jointly coprime polynomials."""
    inputs = [poly_trim(np.asarray(p, dtype=np.complex128)) for p in ps]
    if len(inputs) == 0:
        raise ValueError("need at least one polynomial")
    scale = max(max(_coeff_norm(p) for p in inputs), 1.0)
    g = inputs[0]
    cofactors = [np.ones(1, dtype=np.complex128)]
    for p_next in inputs[1:]:
        g_new, a, b = _ext_euclid(g, p_next)
        cofactors = [poly_trim(poly_mul(a, c)) for c in cofactors]
        cofactors.append(b)
        g = g_new
    if len(g) > 1 or abs(g[0]) <= REMAINDER_REL_TOL * scale:
        raise NotCoprimeError(
            f"list has a (near-)common root: running gcd degree {len(g) - 1}, "
            f"norm {_coeff_norm(g):.3e}"
        )
    c = g[0]
    return _make_certificate(inputs, [poly_trim(u / c) for u in cofactors])


class ZZbarPoly:
    """Polynomial in the coordinate and its conjugate: sum c[a, b] z^a zbar^b.

    This is test/oracle plumbing for non-holomorphic data; it carries the
    exact conjugate derivative (b c[a, b] -> c[a, b-1]).
    """

    def __init__(self, coeffs):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))

    @classmethod
    def constant(cls, value: complex) -> ZZbarPoly:
        return cls([[value]])

    @classmethod
    def zbar(cls) -> ZZbarPoly:
        return cls([[0.0, 1.0]])

    def evaluate(self, w):
        w = np.asarray(w, dtype=np.complex128)
        wb = np.conj(w)
        acc = np.zeros_like(w)
        for a in range(self.coeffs.shape[0] - 1, -1, -1):
            row = np.zeros_like(w)
            for b in range(self.coeffs.shape[1] - 1, -1, -1):
                row = row * wb + self.coeffs[a, b]
            acc = acc * w + row
        return acc

    def dbar(self) -> ZZbarPoly:
        na, nb = self.coeffs.shape
        if nb == 1:
            return ZZbarPoly(np.zeros((1, 1)))
        out = self.coeffs[:, 1:] * np.arange(1, nb)[None, :]
        return ZZbarPoly(out)

    def sample(self, grid: PolarGrid) -> ScalarField:
        return ScalarField(grid, self.evaluate(grid.nodes))


def brute_force_transform(v, point: complex, level: int) -> complex:
    """Independent evaluation of (1/pi) int v(w)/(point - w) dA(w) over the disc.

    Integration runs in polar coordinates centered at ``point``: along the
    ray of angle phi the disc is the segment 0 <= s <= s*(phi) with
    s*(phi) = -Re(conj(p) e^{i phi}) + sqrt(Re(conj(p) e^{i phi})^2 + 1 - |p|^2),
    and the area element cancels the kernel, leaving the regular integrand
    -(1/pi) v(p + s e^{i phi}) e^{-i phi}.  Midpoint rule in both variables;
    ``level`` doubles both counts.
    """
    p = complex(point)
    if abs(p) >= 1.0:
        raise ValueError(f"evaluation point must lie inside the open disc, got {p}")
    if level < 0:
        raise ValueError("refinement level must be nonnegative")
    n_phi = 24 * (2**level)
    n_s = 6 * (2**level)
    phi = 2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    e_phi = np.exp(1j * phi)
    beta = p.real * np.cos(phi) + p.imag * np.sin(phi)
    s_star = -beta + np.sqrt(beta * beta + 1.0 - abs(p) ** 2)
    s_mid = (np.arange(n_s)[:, None] + 0.5) / n_s * s_star[None, :]
    w = p + s_mid * e_phi[None, :]
    values = v.evaluate(w) if hasattr(v, "evaluate") else v(w)
    ray_sums = np.asarray(values).sum(axis=0) * (s_star / n_s)
    total = (ray_sums * np.conj(e_phi)).sum() * (2.0 * math.pi / n_phi)
    return complex(-total / math.pi)
