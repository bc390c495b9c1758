"""Compiled-in demo problems, so end-to-end runs need no external files.

Each demo is a tuple of spec strings plus the lower bound epsilon.  The
epsilons sit where the separation check passes with the default margin but
not by much, which is the interesting regime:

* ``wolff-trivial`` -- (z, 1 - z); an exact holomorphic solution is (1, 1).
* ``squares`` -- (z^2, (1-z)^2); the cofactor identity
  (3 - 2z) z^2 + (1 + 2z)(1 - z)^2 = 1 is the reference solution.
* ``triple`` -- squared distances to 0, 1, i; the three sublevel discs
  intersect pairwise but have empty triple intersection.
* ``single`` -- the constant 2 alone; the recursion short-circuits.
"""

from __future__ import annotations

from .corona import CoronaProblem
from .grid import make_polar_grid
from .specs import FunctionSpec, parse_spec

__all__ = ["DEMOS", "demo_specs", "demo_problem"]

DEMOS: dict[str, tuple[tuple[str, ...], float]] = {
    "wolff-trivial": (("poly:0,1", "poly:1,-1"), 0.4),
    "squares": (("poly:0,0,1", "poly:1,-2,1"), 0.16),
    "triple": (("poly:0,0,1", "poly:1,-2,1", "poly:-1,-2i,1"), 0.36),
    "single": (("poly:2",), 1.0),
}


def demo_specs(name: str) -> tuple[list[FunctionSpec], float]:
    if name not in DEMOS:
        known = ", ".join(sorted(DEMOS))
        raise KeyError(f"unknown demo {name!r}; available: {known}")
    texts, epsilon = DEMOS[name]
    return [parse_spec(t) for t in texts], epsilon


def demo_problem(name: str, n_r: int, n_theta: int, epsilon: float | None = None) -> CoronaProblem:
    specs, demo_eps = demo_specs(name)
    grid = make_polar_grid(n_r, n_theta)
    return CoronaProblem.from_specs(specs, epsilon if epsilon is not None else demo_eps, grid)
