"""Pointwise exterior-algebra complex over sampled fields.

Elements live in bidegrees (j, l): wedge degree j over m generators, form
degree l over n conjugate differentials.  A component map sends index pairs
(J, L) of strictly increasing 1-based tuples to scalar fields; absent keys
are zero.  Three operators act on it:

* ``koszul_b`` lowers j by contracting against the data tuple f, with the
  alternating-sign contraction rule.
* ``koszul_dbar`` raises l by differentiating components (finite differences
  for the shipped one-variable case, or a supplied per-variable derivative).
* ``eta`` raises j by wedging sum_p e_p (g_p . ) on the left.

Sign conventions are insert-and-sort permutation parity throughout; with
them b.b = 0 and b.eta + eta.b = (sum_p f_p g_p) id hold exactly in
pointwise arithmetic -- only dbar carries discretization error.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    GridError,
    PolarGrid,
    ScalarField,
    dump_field_csv,
    sup_norm,
    wirtinger_dbar_fd,
)

__all__ = [
    "KoszulError",
    "KoszulElement",
    "koszul_b",
    "koszul_dbar",
    "eta",
    "kelem_axpy",
    "kelem_scale",
    "kelem_sub",
    "kelem_sup_norm",
    "dump_koszul_element",
]

Key = tuple[tuple[int, ...], tuple[int, ...]]


class KoszulError(ValueError):
    """Degree, size, or grid mismatch in the algebra."""


def _check_index(idx: tuple[int, ...], degree: int, bound: int, what: str) -> None:
    if len(idx) != degree:
        raise KoszulError(f"{what} index {idx} has length {len(idx)}, expected {degree}")
    if any(a < 1 for a in idx):
        raise KoszulError(f"{what} index {idx} must be 1-based")
    if not all(a < b for a, b in zip(idx, idx[1:])):
        raise KoszulError(f"{what} index {idx} must be strictly increasing")
    if idx and idx[-1] > bound:
        raise KoszulError(f"{what} index {idx} exceeds bound {bound}")


def _insert_sorted(idx: tuple[int, ...], p: int) -> tuple[tuple[int, ...], int]:
    """Insert p into a strictly increasing tuple; return (new tuple, parity sign)."""
    smaller = sum(1 for a in idx if a < p)
    new = tuple(sorted(idx + (p,)))
    return new, (-1) ** smaller


@dataclass
class KoszulElement:
    """Sparse element of bidegree (j, l); missing components are zero."""

    m: int
    n: int
    j: int
    l: int
    grid: PolarGrid
    components: dict[Key, ScalarField] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1 or self.j < 0 or self.l < 0:
            raise KoszulError(
                f"bad degrees: m={self.m}, n={self.n}, j={self.j}, l={self.l}"
            )
        if (self.j > self.m or self.l > self.n) and self.components:
            raise KoszulError(
                f"degree ({self.j}, {self.l}) exceeds ({self.m}, {self.n}); "
                "element must be identically zero"
            )
        for (J, L), fld in self.components.items():
            _check_index(J, self.j, self.m, "wedge")
            _check_index(L, self.l, self.n, "form")
            if fld.grid != self.grid:
                raise GridError("component field grid differs from element grid")

    @classmethod
    def zero(cls, m: int, n: int, j: int, l: int, grid: PolarGrid) -> KoszulElement:
        return cls(m, n, j, l, grid, {})

    @classmethod
    def scalar(cls, m: int, n: int, grid: PolarGrid, fld: ScalarField) -> KoszulElement:
        """Embed a field as the ((), ()) component in bidegree (0, 0)."""
        return cls(m, n, 0, 0, grid, {((), ()): fld})

    @classmethod
    def one(cls, m: int, n: int, grid: PolarGrid) -> KoszulElement:
        return cls.scalar(m, n, grid, ScalarField.constant(grid, 1.0))

    def is_zero_structurally(self) -> bool:
        return not self.components

    def component(self, J: tuple[int, ...], L: tuple[int, ...]) -> ScalarField:
        fld = self.components.get((J, L))
        if fld is None:
            return ScalarField.zeros(self.grid)
        return fld

    def degrees_match(self, other: KoszulElement) -> None:
        if (self.m, self.n, self.j, self.l) != (other.m, other.n, other.j, other.l):
            raise KoszulError(
                f"degree mismatch: ({self.m},{self.n},{self.j},{self.l}) vs "
                f"({other.m},{other.n},{other.j},{other.l})"
            )
        if self.grid != other.grid:
            raise GridError("elements live on different grids")


def _accumulate(store: dict[Key, np.ndarray], key: Key, values: np.ndarray) -> None:
    if key in store:
        store[key] = store[key] + values
    else:
        store[key] = values


def _build(
    m: int, n: int, j: int, l: int, grid: PolarGrid, store: dict[Key, np.ndarray]
) -> KoszulElement:
    comps = {k: ScalarField(grid, v) for k, v in store.items()}
    return KoszulElement(m, n, j, l, grid, comps)


def koszul_b(x: KoszulElement, f: list[ScalarField]) -> KoszulElement:
    """Contraction against the data tuple f, lowering wedge degree by one.

    b(e_{i1}^...^e_{it} (x) w) = sum_p (-1)^(p+1) e_{i1}^..(drop i_p)..^e_{it}
    (x) (f_{i_p} w).  Degree-(0, l) input maps to the empty element (the
    target degree is clamped at 0).
    """
    if len(f) != x.m:
        raise KoszulError(f"data tuple has length {len(f)}, element has m = {x.m}")
    for fld in f:
        if fld.grid != x.grid:
            raise GridError("data field grid differs from element grid")
    if x.j == 0:
        return KoszulElement.zero(x.m, x.n, 0, x.l, x.grid)
    store: dict[Key, np.ndarray] = {}
    for (J, L), w in x.components.items():
        for p_pos, p in enumerate(J):
            sign = -1.0 if p_pos % 2 else 1.0
            J_new = J[:p_pos] + J[p_pos + 1 :]
            _accumulate(store, (J_new, L), sign * f[p - 1].values * w.values)
    return _build(x.m, x.n, x.j - 1, x.l, x.grid, store)


def koszul_dbar(x: KoszulElement, deriv=None) -> KoszulElement:
    """Componentwise conjugate derivative, raising form degree by one.

    For the shipped n = 1 case the derivative is the polar-grid finite
    difference; ``deriv(field, k)`` may be supplied to support other
    domains with per-variable conjugate derivatives (k is 1-based).  The
    new differential index is inserted with insert-and-sort parity.
    """
    if x.l >= x.n:
        return KoszulElement.zero(x.m, x.n, x.j, x.l + 1, x.grid)
    if deriv is None:
        if x.n != 1:
            raise KoszulError(
                "n > 1 requires an explicit per-variable derivative callback"
            )
        deriv = lambda fld, k: wirtinger_dbar_fd(fld)
    store: dict[Key, np.ndarray] = {}
    for (J, L), w in x.components.items():
        for k in range(1, x.n + 1):
            if k in L:
                continue
            dw = deriv(w, k)
            L_new, sign = _insert_sorted(L, k)
            _accumulate(store, (J, L_new), sign * dw.values)
    return _build(x.m, x.n, x.j, x.l + 1, x.grid, store)


def eta(x: KoszulElement, g: list[ScalarField]) -> KoszulElement:
    """Left wedge against sum_p e_p g_p, raising wedge degree by one.

    e_p ^ (e_J (x) w) vanishes when p is in J; otherwise it contributes
    with insert-and-sort parity (-1)^(#{q in J : q < p}).
    """
    if len(g) != x.m:
        raise KoszulError(f"multiplier tuple has length {len(g)}, element has m = {x.m}")
    for fld in g:
        if fld.grid != x.grid:
            raise GridError("multiplier field grid differs from element grid")
    if x.j >= x.m:
        return KoszulElement.zero(x.m, x.n, x.j + 1, x.l, x.grid)
    store: dict[Key, np.ndarray] = {}
    for (J, L), w in x.components.items():
        for p in range(1, x.m + 1):
            if p in J:
                continue
            J_new, sign = _insert_sorted(J, p)
            _accumulate(store, (J_new, L), sign * g[p - 1].values * w.values)
    return _build(x.m, x.n, x.j + 1, x.l, x.grid, store)


def kelem_axpy(a: complex, x: KoszulElement, y: KoszulElement) -> KoszulElement:
    """a*x + y with sparse components; degrees and grids must agree.

    A structurally zero operand is degree-polymorphic (the zero element
    lives in every bidegree), so only its m, n, and grid are checked.
    """
    if x.is_zero_structurally() and (x.j, x.l) != (y.j, y.l):
        x = KoszulElement.zero(x.m, x.n, y.j, y.l, x.grid)
    elif y.is_zero_structurally() and (x.j, x.l) != (y.j, y.l):
        y = KoszulElement.zero(y.m, y.n, x.j, x.l, y.grid)
    x.degrees_match(y)
    store: dict[Key, np.ndarray] = {k: v.values.copy() for k, v in y.components.items()}
    for k, v in x.components.items():
        _accumulate(store, k, a * v.values)
    return _build(x.m, x.n, x.j, x.l, x.grid, store)


def kelem_scale(a: complex, x: KoszulElement) -> KoszulElement:
    store = {k: a * v.values for k, v in x.components.items()}
    return _build(x.m, x.n, x.j, x.l, x.grid, store)


def kelem_sub(x: KoszulElement, y: KoszulElement) -> KoszulElement:
    return kelem_axpy(-1.0, y, x)


def kelem_sup_norm(x: KoszulElement, r_max: float = 1.0) -> float:
    """Max component sup-norm inside radius r_max."""
    if not x.components:
        return 0.0
    return max(sup_norm(fld, r_max) for fld in x.components.values())


def _key_name(J: tuple[int, ...], L: tuple[int, ...]) -> str:
    if any(a > 9 for a in J + L):
        raise KoszulError("debug dump supports single-digit indices only")
    return f"J{''.join(map(str, J))}_L{''.join(map(str, L))}"


def dump_koszul_element(x: KoszulElement, directory: str) -> None:
    """Write one field CSV per component plus a manifest of degrees and keys."""
    os.makedirs(directory, exist_ok=True)
    keys = sorted(x.components.keys())
    lines = [
        f"m = {x.m}",
        f"n = {x.n}",
        f"j = {x.j}",
        f"l = {x.l}",
        f"grid = {x.grid.n_r}x{x.grid.n_theta}",
        f"components = {len(keys)}",
    ]
    for J, L in keys:
        name = _key_name(J, L)
        lines.append(f"component {name}")
        with open(os.path.join(directory, f"{name}.csv"), "w", newline="\n") as fh:
            fh.write(dump_field_csv(x.components[(J, L)]))
    with open(os.path.join(directory, "manifest.txt"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
