"""Polar grids on the unit disc, sampled complex fields, and the discrete calculus on them.

The grid is a midpoint product grid in (r, theta): no node sits at the
coordinate singularity r = 0 or on the boundary r = 1, and the midpoint cell
weights sum to the disc area pi exactly (up to roundoff).  All fields are
complex-valued numpy arrays of shape (n_r, n_theta), indexed radius-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridError",
    "FieldFormatError",
    "PolarGrid",
    "ScalarField",
    "make_polar_grid",
    "wirtinger_dbar_fd",
    "sup_norm",
    "integrate",
    "dump_field_csv",
    "load_field_csv",
]

MIN_N_R = 2
MIN_N_THETA = 4

FIELD_CSV_HEADER = "i,k,r,theta,re,im"


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


class FieldFormatError(ValueError):
    """Malformed field dump (CSV) data."""


@dataclass(frozen=True)
class PolarGrid:
    """Midpoint polar grid: r_i = (i + 0.5)/n_r, theta_k = 2 pi k / n_theta.

    Cell weights w_ik = r_i * dr * dtheta are the midpoint-rule areas; their
    sum telescopes to pi exactly.
    """

    n_r: int
    n_theta: int
    r: np.ndarray = field(init=False, repr=False, compare=False)
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_r < MIN_N_R or self.n_theta < MIN_N_THETA:
            raise GridError(
                f"grid too coarse: need n_r >= {MIN_N_R} and n_theta >= {MIN_N_THETA}, "
                f"got ({self.n_r}, {self.n_theta})"
            )
        r = (np.arange(self.n_r) + 0.5) / self.n_r
        theta = 2.0 * math.pi * np.arange(self.n_theta) / self.n_theta
        nodes = r[:, None] * np.exp(1j * theta)[None, :]
        weights = (r * self.dr * self.dtheta)[:, None] * np.ones(self.n_theta)[None, :]
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def dr(self) -> float:
        return 1.0 / self.n_r

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.n_theta

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    def shape_check(self, values: np.ndarray) -> None:
        if values.shape != (self.n_r, self.n_theta):
            raise GridError(
                f"field shape {values.shape} does not match grid ({self.n_r}, {self.n_theta})"
            )


def make_polar_grid(n_r: int, n_theta: int) -> PolarGrid:
    """Build a midpoint polar grid, rejecting unusable resolutions."""
    return PolarGrid(n_r, n_theta)


class ScalarField:
    """Complex samples of a function at the nodes of a :class:`PolarGrid`.

    Values are stored as a (n_r, n_theta) complex array.  Construction
    verifies finiteness; arithmetic stays pointwise and grid-checked.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: PolarGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.complex128)
        grid.shape_check(values)
        if not np.isfinite(values).all():
            raise ValueError("field contains non-finite values")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: PolarGrid) -> ScalarField:
        return cls(grid, np.zeros((grid.n_r, grid.n_theta), dtype=np.complex128))

    @classmethod
    def constant(cls, grid: PolarGrid, value: complex) -> ScalarField:
        return cls(grid, np.full((grid.n_r, grid.n_theta), value, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: PolarGrid, fn) -> ScalarField:
        """Sample a callable of the complex coordinate over the grid nodes."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.complex128))

    def copy(self) -> ScalarField:
        return ScalarField(self.grid, self.values.copy())

    def same_grid(self, other: ScalarField) -> None:
        if self.grid != other.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other: ScalarField) -> ScalarField:
        self.same_grid(other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: ScalarField) -> ScalarField:
        self.same_grid(other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self.same_grid(other)
            return ScalarField(self.grid, self.values * other.values)
        return ScalarField(self.grid, self.values * complex(other))

    __rmul__ = __mul__

    def __neg__(self) -> ScalarField:
        return ScalarField(self.grid, -self.values)

    def __repr__(self) -> str:
        return f"ScalarField(grid=({self.grid.n_r}, {self.grid.n_theta}))"


def wirtinger_dbar_fd(u: ScalarField) -> ScalarField:
    """Finite-difference conjugate Wirtinger derivative on the polar grid.

    In polar coordinates d/dzbar = (e^{i theta}/2)(d/dr + (i/r) d/dtheta).
    The theta derivative is a central difference with periodic wrap; the
    radial derivative is central on interior rings and one-sided (three-point
    where the grid allows, two-point on an n_r = 2 grid) at the first and
    last ring, keeping the scheme second order everywhere it can be.
    """
    grid = u.grid
    v = u.values
    dr = grid.dr
    dth = grid.dtheta

    du_dth = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * dth)

    du_dr = np.empty_like(v)
    du_dr[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * dr)
    if grid.n_r >= 3:
        du_dr[0, :] = (-3.0 * v[0, :] + 4.0 * v[1, :] - v[2, :]) / (2.0 * dr)
        du_dr[-1, :] = (3.0 * v[-1, :] - 4.0 * v[-2, :] + v[-3, :]) / (2.0 * dr)
    else:
        du_dr[0, :] = (v[1, :] - v[0, :]) / dr
        du_dr[-1, :] = (v[-1, :] - v[-2, :]) / dr

    phase = 0.5 * np.exp(1j * grid.theta)[None, :]
    inv_r = (1.0 / grid.r)[:, None]
    return ScalarField(grid, phase * (du_dr + 1j * inv_r * du_dth))


def sup_norm(u: ScalarField, r_max: float = 1.0) -> float:
    """Max of |u| over the nodes with r_i <= r_max."""
    if not 0.0 < r_max <= 1.0:
        raise ValueError(f"r_max must lie in (0, 1], got {r_max}")
    sel = u.grid.r <= r_max
    if not sel.any():
        return 0.0
    return float(np.abs(u.values[sel, :]).max())


def integrate(u: ScalarField) -> complex:
    """Midpoint-rule integral of u over the unit disc."""
    return complex((u.values * u.grid.weights).sum())


def dump_field_csv(u: ScalarField) -> str:
    """Serialize a field: header ``i,k,r,theta,re,im``, rows i-major then k,
    LF line endings, 17 significant digits."""
    grid = u.grid
    lines = [FIELD_CSV_HEADER]
    for i in range(grid.n_r):
        r = grid.r[i]
        for k in range(grid.n_theta):
            val = u.values[i, k]
            lines.append(
                f"{i},{k},{r:.17g},{grid.theta[k]:.17g},{val.real:.17g},{val.imag:.17g}"
            )
    return "\n".join(lines) + "\n"


def load_field_csv(text: str, grid: PolarGrid) -> ScalarField:
    """Parse a field dump back onto ``grid``; errors name the offending line."""
    lines = text.split("\n")
    if not lines or lines[0].strip() != FIELD_CSV_HEADER:
        raise FieldFormatError(f"line 1: expected header '{FIELD_CSV_HEADER}'")
    values = np.full((grid.n_r, grid.n_theta), np.nan, dtype=np.complex128)
    seen = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FieldFormatError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            i = int(parts[0])
            k = int(parts[1])
            re = float(parts[4])
            im = float(parts[5])
        except ValueError as exc:
            raise FieldFormatError(f"line {lineno}: {exc}") from exc
        if not (0 <= i < grid.n_r and 0 <= k < grid.n_theta):
            raise FieldFormatError(
                f"line {lineno}: node ({i}, {k}) outside grid ({grid.n_r}, {grid.n_theta})"
            )
        values[i, k] = complex(re, im)
        seen += 1
    if seen != grid.size:
        raise FieldFormatError(
            f"line {len(lines)}: dump has {seen} nodes, grid needs {grid.size}"
        )
    return ScalarField(grid, values)
