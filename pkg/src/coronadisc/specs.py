"""Symbolic specifications of holomorphic functions on the closed unit disc.

Each spec evaluates exactly (pointwise polynomial/rational arithmetic) and
carries an exact derivative rule, so sampled fields and their derivatives
are available without discretization error.  Supported variants:

* ``Polynomial`` -- complex coefficients, constant term first.
* ``Rational`` -- quotient of polynomials; the denominator must not vanish
  on the closed disc.
* ``BlaschkeProduct`` -- finite product of disc automorphism factors
  (z - a)/(1 - conj(a) z) with |a| < 1.
* ``Sum`` / ``Product`` / ``Scaled`` -- pointwise combinations.

The text syntax used by config files::

    poly:c0,c1,...            complex literals a, bi, or a+bi
    blaschke:a1;a2;...
    rat:(c0,c1,...)/(d0,d1,...)
    expr := term (+ term)*,  term := factor (* factor)*
    factor := atom | real-scalar
"""

from __future__ import annotations

import re

import numpy as np

from .grid import PolarGrid, ScalarField

__all__ = [
    "SpecError",
    "SpecParseError",
    "SpecEvalError",
    "FunctionSpec",
    "Polynomial",
    "Rational",
    "BlaschkeProduct",
    "Sum",
    "Product",
    "Scaled",
    "eval_spec",
    "spec_derivative",
    "parse_spec",
    "format_complex",
    "poly_trim",
]


class SpecError(ValueError):
    """Invalid function specification."""


class SpecParseError(SpecError):
    """Malformed spec text."""


class SpecEvalError(SpecError):
    """Evaluation failure (e.g. denominator zero at a point)."""


# -- polynomial coefficient helpers (constant-first lists) --------------------

def poly_trim(coeffs: np.ndarray) -> np.ndarray:
    nz = np.nonzero(coeffs)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=np.complex128)
    return coeffs[: nz[-1] + 1]


def poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return poly_trim(np.convolve(a, b))


def poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.complex128)
    out[: len(a)] += a
    out[: len(b)] += b
    return poly_trim(out)


def poly_eval(coeffs: np.ndarray, z):
    """Horner evaluation; works on scalars and arrays alike."""
    acc = np.zeros_like(np.asarray(z, dtype=np.complex128))
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def poly_deriv(coeffs: np.ndarray) -> np.ndarray:
    if len(coeffs) <= 1:
        return np.zeros(1, dtype=np.complex128)
    return poly_trim(coeffs[1:] * np.arange(1, len(coeffs)))


def _poly_roots_inside_closed_disc(coeffs: np.ndarray, tol: float = 1e-12) -> bool:
    c = poly_trim(coeffs)
    if len(c) == 1:
        return False
    roots = np.roots(c[::-1])
    return bool((np.abs(roots) <= 1.0 + tol).any())


class FunctionSpec:
    """Base class; subclasses implement exact evaluation and differentiation."""

    def evaluate(self, z):
        raise NotImplementedError

    def derivative(self) -> FunctionSpec:
        raise NotImplementedError

    def __add__(self, other: FunctionSpec) -> FunctionSpec:
        return Sum([self, other])

    def __mul__(self, other) -> FunctionSpec:
        if isinstance(other, FunctionSpec):
            return Product([self, other])
        return Scaled(complex(other), self)

    __rmul__ = __mul__


class Polynomial(FunctionSpec):
    def __init__(self, coeffs):
        self.coeffs = poly_trim(np.asarray(list(coeffs), dtype=np.complex128))
        if self.coeffs.ndim != 1:
            raise SpecError("polynomial coefficients must form a flat list")

    def evaluate(self, z):
        return poly_eval(self.coeffs, z)

    def derivative(self) -> Polynomial:
        return Polynomial(poly_deriv(self.coeffs))

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)})"


class Rational(FunctionSpec):
    def __init__(self, num: Polynomial, den: Polynomial):
        if not isinstance(num, Polynomial):
            num = Polynomial(num)
        if not isinstance(den, Polynomial):
            den = Polynomial(den)
        if len(den.coeffs) == 1 and den.coeffs[0] == 0:
            raise SpecError("rational denominator is identically zero")
        if _poly_roots_inside_closed_disc(den.coeffs):
            raise SpecError("rational denominator vanishes on the closed unit disc")
        self.num = num
        self.den = den

    def evaluate(self, z):
        den = poly_eval(self.den.coeffs, z)
        bad = np.asarray(den) == 0
        if bad.any():
            where = np.asarray(z, dtype=np.complex128)[bad] if np.ndim(z) else z
            point = where.ravel()[0] if np.ndim(z) else z
            raise SpecEvalError(f"rational denominator vanishes at z = {point}")
        return poly_eval(self.num.coeffs, z) / den

    def derivative(self) -> Rational:
        p, q = self.num.coeffs, self.den.coeffs
        num = poly_add(poly_mul(poly_deriv(p), q), -1.0 * poly_mul(p, poly_deriv(q)))
        return Rational(Polynomial(num), Polynomial(poly_mul(q, q)))

    def __repr__(self) -> str:
        return f"Rational({list(self.num.coeffs)}, {list(self.den.coeffs)})"


class BlaschkeProduct(FunctionSpec):
    """Product of factors (z - a)/(1 - conj(a) z) over the listed zeros."""

    def __init__(self, zeros):
        self.zeros = np.asarray(list(zeros), dtype=np.complex128)
        if len(self.zeros) == 0:
            raise SpecError("Blaschke product needs at least one zero")
        if (np.abs(self.zeros) >= 1.0).any():
            raise SpecError("Blaschke zeros must satisfy |a| < 1")

    def evaluate(self, z):
        z = np.asarray(z, dtype=np.complex128) if np.ndim(z) else complex(z)
        acc = np.ones_like(np.asarray(z, dtype=np.complex128))
        for a in self.zeros:
            acc = acc * (z - a) / (1.0 - np.conj(a) * z)
        return acc

    def _as_poly_pair(self) -> tuple[np.ndarray, np.ndarray]:
        num = np.ones(1, dtype=np.complex128)
        den = np.ones(1, dtype=np.complex128)
        for a in self.zeros:
            num = poly_mul(num, np.array([-a, 1.0], dtype=np.complex128))
            den = poly_mul(den, np.array([1.0, -np.conj(a)], dtype=np.complex128))
        return num, den

    def derivative(self) -> Rational:
        # Logarithmic derivative: B'/B = sum_k (1 - |a_k|^2) / ((z - a_k)(1 - conj(a_k) z)),
        # recombined over the common denominator Q^2 with B = P/Q.
        num_total = np.zeros(1, dtype=np.complex128)
        _, den = self._as_poly_pair()
        for k, a in enumerate(self.zeros):
            term = np.array([1.0 - abs(a) ** 2], dtype=np.complex128)
            for j, b in enumerate(self.zeros):
                if j == k:
                    continue
                term = poly_mul(term, np.array([-b, 1.0], dtype=np.complex128))
                term = poly_mul(term, np.array([1.0, -np.conj(b)], dtype=np.complex128))
            num_total = poly_add(num_total, term)
        return Rational(Polynomial(num_total), Polynomial(poly_mul(den, den)))

    def __repr__(self) -> str:
        return f"BlaschkeProduct({list(self.zeros)})"


class Sum(FunctionSpec):
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise SpecError("empty sum")

    def evaluate(self, z):
        acc = self.parts[0].evaluate(z)
        for p in self.parts[1:]:
            acc = acc + p.evaluate(z)
        return acc

    def derivative(self) -> Sum:
        return Sum([p.derivative() for p in self.parts])

    def __repr__(self) -> str:
        return f"Sum({self.parts})"


class Product(FunctionSpec):
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise SpecError("empty product")

    def evaluate(self, z):
        acc = self.parts[0].evaluate(z)
        for p in self.parts[1:]:
            acc = acc * p.evaluate(z)
        return acc

    def derivative(self) -> Sum:
        terms = []
        for k in range(len(self.parts)):
            factors = list(self.parts)
            factors[k] = factors[k].derivative()
            terms.append(Product(factors))
        return Sum(terms)

    def __repr__(self) -> str:
        return f"Product({self.parts})"


class Scaled(FunctionSpec):
    def __init__(self, scale: complex, inner: FunctionSpec):
        self.scale = complex(scale)
        self.inner = inner

    def evaluate(self, z):
        return self.scale * self.inner.evaluate(z)

    def derivative(self) -> Scaled:
        return Scaled(self.scale, self.inner.derivative())

    def __repr__(self) -> str:
        return f"Scaled({self.scale}, {self.inner})"


def eval_spec(spec: FunctionSpec, points):
    """Evaluate a spec on a grid (returning a field) or on explicit points."""
    if isinstance(points, PolarGrid):
        return ScalarField(points, spec.evaluate(points.nodes))
    pts = np.asarray(points, dtype=np.complex128)
    return spec.evaluate(pts)


def spec_derivative(spec: FunctionSpec) -> FunctionSpec:
    """Exact holomorphic derivative of a spec, as a spec."""
    return spec.derivative()


# -- text syntax ---------------------------------------------------------------

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = rf"[+-]?{_NUM}i?(?:[+-]{_NUM}i)?"
_COMPLEX_RE = re.compile(_COMPLEX)
_REAL_RE = re.compile(rf"[+-]?{_NUM}")
_CLIST = rf"{_COMPLEX}(?:,{_COMPLEX})*"
_SLIST = rf"{_COMPLEX}(?:;{_COMPLEX})*"
_POLY_RE = re.compile(rf"poly:({_CLIST})")
_BLASCHKE_RE = re.compile(rf"blaschke:({_SLIST})")
_RAT_RE = re.compile(rf"rat:\(({_CLIST})\)/\(({_CLIST})\)")


def parse_complex(text: str) -> complex:
    """Parse the complex-literal forms ``a``, ``bi``, ``a+bi``."""
    t = text.strip()
    m = _COMPLEX_RE.fullmatch(t)
    if not m:
        raise SpecParseError(f"bad complex literal {text!r}")
    # Split into the one or two signed pieces.
    pieces = re.findall(rf"[+-]?{_NUM}i?", t)
    if "".join(pieces) != t.replace(" ", ""):
        raise SpecParseError(f"bad complex literal {text!r}")
    re_part = 0.0
    im_part = 0.0
    seen_re = seen_im = False
    for piece in pieces:
        if piece.endswith("i"):
            if seen_im:
                raise SpecParseError(f"bad complex literal {text!r}")
            im_part = float(piece[:-1])
            seen_im = True
        else:
            if seen_re:
                raise SpecParseError(f"bad complex literal {text!r}")
            re_part = float(piece)
            seen_re = True
    return complex(re_part, im_part)


def format_complex(value: complex) -> str:
    """Inverse of :func:`parse_complex` at 17 significant digits."""
    re_part, im_part = value.real, value.imag
    if im_part == 0.0:
        return f"{re_part:.17g}"
    if re_part == 0.0:
        return f"{im_part:.17g}i"
    sign = "+" if im_part >= 0 else "-"
    return f"{re_part:.17g}{sign}{abs(im_part):.17g}i"


def _parse_clist(text: str, sep: str = ",") -> list[complex]:
    return [parse_complex(part) for part in text.split(sep)]


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def try_regex(self, regex: re.Pattern) -> re.Match | None:
        self.skip_ws()
        m = regex.match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def fail(self, why: str):
        raise SpecParseError(f"{why} at position {self.pos} in {self.text!r}")


def _parse_factor(sc: _Scanner) -> FunctionSpec:
    m = sc.try_regex(_POLY_RE)
    if m:
        return Polynomial(_parse_clist(m.group(1)))
    m = sc.try_regex(_BLASCHKE_RE)
    if m:
        return BlaschkeProduct(_parse_clist(m.group(1), sep=";"))
    m = sc.try_regex(_RAT_RE)
    if m:
        return Rational(Polynomial(_parse_clist(m.group(1))), Polynomial(_parse_clist(m.group(2))))
    m = sc.try_regex(_REAL_RE)
    if m:
        return Polynomial([float(m.group(0))])
    sc.fail("expected poly:/blaschke:/rat: atom or scalar")


def _parse_term(sc: _Scanner) -> FunctionSpec:
    factors = [_parse_factor(sc)]
    while sc.peek() == "*":
        sc.pos += 1
        factors.append(_parse_factor(sc))
    if len(factors) == 1:
        return factors[0]
    # Collapse leading scalar constants into a Scaled wrapper.
    scale = 1.0 + 0.0j
    rest: list[FunctionSpec] = []
    for f in factors:
        if isinstance(f, Polynomial) and len(f.coeffs) == 1:
            scale *= f.coeffs[0]
        else:
            rest.append(f)
    if not rest:
        return Polynomial([scale])
    inner = rest[0] if len(rest) == 1 else Product(rest)
    if scale == 1.0:
        return inner
    return Scaled(scale, inner)


def parse_spec(text: str) -> FunctionSpec:
    """Parse the config-file mini-syntax into a spec."""
    sc = _Scanner(text)
    terms = [_parse_term(sc)]
    while sc.peek() == "+":
        sc.pos += 1
        terms.append(_parse_term(sc))
    if not sc.done():
        sc.fail("trailing input")
    return terms[0] if len(terms) == 1 else Sum(terms)
