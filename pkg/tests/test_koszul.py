import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coronadisc.grid import GridError, ScalarField, make_polar_grid, sup_norm
from coronadisc.koszul import (
    KoszulElement,
    KoszulError,
    dump_koszul_element,
    eta,
    kelem_axpy,
    kelem_scale,
    kelem_sub,
    kelem_sup_norm,
    koszul_b,
    koszul_dbar,
)
from coronadisc.specs import eval_spec, parse_spec

from _util import normalized_partners, random_element, random_fields


@pytest.fixture(scope="module")
def grid():
    return make_polar_grid(8, 16)


def test_b_two_generator_formula(grid):
    rng = np.random.default_rng(0)
    omega = ScalarField(grid, rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16)))
    f = random_fields(grid, rng, 2)
    x = KoszulElement(2, 1, 2, 0, grid, {((1, 2), ()): omega})
    bx = koszul_b(x, f)
    assert (bx.j, bx.l) == (1, 0)
    # b(e1^e2 (x) w) = e2 (x) f1 w - e1 (x) f2 w
    assert np.allclose(bx.component((2,), ()).values, f[0].values * omega.values)
    assert np.allclose(bx.component((1,), ()).values, -f[1].values * omega.values)


def test_b_single_term(grid):
    f = [eval_spec(parse_spec("poly:0,1"), grid)]
    x = KoszulElement(1, 1, 1, 0, grid, {((1,), ()): ScalarField.constant(grid, 1.0)})
    bx = koszul_b(x, f)
    assert (bx.j, bx.l) == (0, 0)
    assert np.allclose(bx.component((), ()).values, grid.nodes)


def test_b_on_degree_zero_is_empty(grid):
    f = random_fields(grid, np.random.default_rng(1), 3)
    x = KoszulElement.one(3, 1, grid)
    bx = koszul_b(x, f)
    assert bx.is_zero_structurally()
    assert bx.j == 0


def test_b_mismatches_raise(grid):
    rng = np.random.default_rng(2)
    x = random_element(grid, rng, m=3, n=1, j=1, l=0)
    with pytest.raises(KoszulError):
        koszul_b(x, random_fields(grid, rng, 2))
    other = make_polar_grid(8, 32)
    with pytest.raises(GridError):
        koszul_b(x, random_fields(other, rng, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_b_squared_is_zero(seed):
    rng = np.random.default_rng(seed)
    grid = make_polar_grid(4, 8)
    m = int(rng.integers(2, 6))
    n = int(rng.integers(1, 4))
    j = int(rng.integers(2, m + 1))
    l = int(rng.integers(0, n + 1))
    x = random_element(grid, rng, m, n, j, l)
    f = random_fields(grid, rng, m)
    bbx = koszul_b(koszul_b(x, f), f)
    scale = max(kelem_sup_norm(x), 1.0)
    assert kelem_sup_norm(bbx) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_homotopy_identity(seed):
    rng = np.random.default_rng(seed)
    grid = make_polar_grid(4, 8)
    m = int(rng.integers(1, 6))
    n = int(rng.integers(1, 4))
    j = int(rng.integers(0, m + 1))
    l = int(rng.integers(0, n + 1))
    x = random_element(grid, rng, m, n, j, l)
    f = random_fields(grid, rng, m)
    g = normalized_partners(f, grid)
    recon = kelem_axpy(1.0, koszul_b(eta(x, g), f), eta(koszul_b(x, f), g))
    scale = max(kelem_sup_norm(x), 1.0)
    assert kelem_sup_norm(kelem_sub(recon, x)) <= 1e-12 * scale


def test_eta_of_one_is_partner_tuple(grid):
    rng = np.random.default_rng(3)
    f = random_fields(grid, rng, 3)
    g = normalized_partners(f, grid)
    lifted = eta(KoszulElement.one(3, 1, grid), g)
    assert (lifted.j, lifted.l) == (1, 0)
    for p in range(1, 4):
        assert np.allclose(lifted.component((p,), ()).values, g[p - 1].values)


def test_eta_insertion_sign(grid):
    rng = np.random.default_rng(4)
    omega = ScalarField(grid, rng.standard_normal((8, 16)) + 0j)
    g = random_fields(grid, rng, 2)
    x = KoszulElement(2, 1, 1, 0, grid, {((1,), ()): omega})
    lifted = eta(x, g)
    # e2 ^ (e1 (x) w) = -e1^e2 (x) w, and the p = 1 term dies on p in J
    assert set(lifted.components) == {((1, 2), ())}
    assert np.allclose(lifted.component((1, 2), ()).values, -g[1].values * omega.values)


def test_eta_at_top_wedge_degree_is_zero(grid):
    rng = np.random.default_rng(5)
    x = random_element(grid, rng, m=2, n=1, j=2, l=0)
    g = random_fields(grid, rng, 2)
    lifted = eta(x, g)
    assert lifted.is_zero_structurally()
    assert lifted.j == 3


def test_dbar_of_conjugate_component(grid):
    zbar = ScalarField(grid, grid.nodes.conj())
    x = KoszulElement(1, 1, 1, 0, grid, {((1,), ()): zbar})
    dx = koszul_dbar(x)
    assert (dx.j, dx.l) == (1, 1)
    one = ScalarField.constant(grid, 1.0)
    h2 = grid.dr**2 + grid.dtheta**2
    assert sup_norm(dx.component((1,), (1,)) - one, 0.9) <= 1.0 * h2


def test_dbar_vanishes_above_top_form_degree(grid):
    rng = np.random.default_rng(6)
    x = random_element(grid, rng, m=2, n=1, j=1, l=1)
    dx = koszul_dbar(x)
    assert dx.is_zero_structurally()
    assert (dx.j, dx.l) == (1, 2)


def test_dbar_requires_callback_for_higher_dimension(grid):
    rng = np.random.default_rng(7)
    x = random_element(grid, rng, m=2, n=2, j=1, l=0)
    with pytest.raises(KoszulError):
        koszul_dbar(x)
    # with a pointwise callback the n = 2 algebra works
    calls = []

    def deriv(fld, k):
        calls.append(k)
        return ScalarField.constant(grid, float(k))

    dx = koszul_dbar(x, deriv=deriv)
    assert (dx.l, sorted(set(calls))) == (1, [1, 2])
    for (J, L) in dx.components:
        assert len(L) == 1


def test_dbar_insertion_parity_for_two_variables(grid):
    omega = ScalarField.constant(grid, 1.0)
    # L = (2,): inserting k = 1 lands in place, sign +1
    x = KoszulElement(1, 2, 0, 1, grid, {((), (2,)): omega})
    dx = koszul_dbar(x, deriv=lambda fld, k: ScalarField.constant(grid, 1.0))
    assert set(dx.components) == {((), (1, 2))}
    assert np.allclose(dx.component((), (1, 2)).values, 1.0)
    # L = (1,): inserting k = 2 moves past one entry, sign -1
    x2 = KoszulElement(1, 2, 0, 1, grid, {((), (1,)): omega})
    dx2 = koszul_dbar(x2, deriv=lambda fld, k: ScalarField.constant(grid, 1.0))
    assert set(dx2.components) == {((), (1, 2))}
    assert np.allclose(dx2.component((), (1, 2)).values, -1.0)


def test_b_dbar_commutation_on_holomorphic_data():
    comm = {}
    for res in [(32, 64), (64, 128)]:
        g = make_polar_grid(*res)
        f = [eval_spec(parse_spec(t), g) for t in ["poly:0,1", "poly:1,-2,1"]]
        x = KoszulElement(
            2,
            1,
            1,
            0,
            g,
            {
                ((1,), ()): eval_spec(parse_spec("poly:0,0,0,1"), g),
                ((2,), ()): eval_spec(parse_spec("blaschke:0.3"), g),
            },
        )
        c = kelem_sub(koszul_b(koszul_dbar(x), f), koszul_dbar(koszul_b(x, f)))
        comm[res] = kelem_sup_norm(c, 0.9)
        h2 = g.dr**2 + g.dtheta**2
        assert comm[res] <= 15.0 * h2
    assert comm[(32, 64)] / comm[(64, 128)] >= 3.0


def test_axpy_examples(grid):
    rng = np.random.default_rng(8)
    x = random_element(grid, rng, m=2, n=1, j=1, l=0)
    cancel = kelem_axpy(-1.0, x, x)
    assert kelem_sup_norm(cancel) == 0.0
    zero = KoszulElement.zero(2, 1, 1, 0, grid)
    y = random_element(grid, rng, m=2, n=1, j=1, l=0)
    assert kelem_sup_norm(kelem_sub(kelem_axpy(1.0, zero, y), y)) == 0.0
    e1 = KoszulElement(2, 1, 1, 0, grid, {((1,), ()): ScalarField.constant(grid, 1.0)})
    tripled = kelem_axpy(2.0, e1, e1)
    assert np.allclose(tripled.component((1,), ()).values, 3.0)


def test_axpy_degree_mismatch(grid):
    rng = np.random.default_rng(9)
    x = random_element(grid, rng, m=2, n=1, j=1, l=0)
    y = random_element(grid, rng, m=2, n=1, j=2, l=0)
    with pytest.raises(KoszulError):
        kelem_axpy(1.0, x, y)


def test_scale_and_norm(grid):
    rng = np.random.default_rng(10)
    x = random_element(grid, rng, m=3, n=1, j=1, l=0)
    assert kelem_sup_norm(kelem_scale(2.0, x)) == pytest.approx(2 * kelem_sup_norm(x))
    assert kelem_sup_norm(KoszulElement.zero(3, 1, 1, 0, grid)) == 0.0


def test_component_validation(grid):
    good = ScalarField.constant(grid, 1.0)
    with pytest.raises(KoszulError):
        KoszulElement(2, 1, 1, 0, grid, {((3,), ()): good})  # index beyond m
    with pytest.raises(KoszulError):
        KoszulElement(2, 1, 2, 0, grid, {((2, 1), ()): good})  # not increasing
    with pytest.raises(KoszulError):
        KoszulElement(2, 1, 1, 0, grid, {((1, 2), ()): good})  # wrong length
    with pytest.raises(KoszulError):
        KoszulElement(2, 1, 3, 0, grid, {((1, 2), ()): good})  # j > m nonempty


def test_degree_bookkeeping(grid):
    rng = np.random.default_rng(11)
    x = random_element(grid, rng, m=3, n=1, j=1, l=0)
    f = random_fields(grid, rng, 3)
    g = normalized_partners(f, grid)
    assert (koszul_b(x, f).j, koszul_b(x, f).l) == (0, 0)
    assert (koszul_dbar(x).j, koszul_dbar(x).l) == (1, 1)
    assert (eta(x, g).j, eta(x, g).l) == (2, 0)


def test_debug_dump(tmp_path, grid):
    rng = np.random.default_rng(12)
    x = KoszulElement(
        2,
        1,
        1,
        1,
        grid,
        {
            ((1,), (1,)): ScalarField.constant(grid, 1.0),
            ((2,), (1,)): ScalarField.constant(grid, 2.0),
        },
    )
    out = tmp_path / "elem"
    dump_koszul_element(x, str(out))
    assert (out / "J1_L1.csv").exists()
    assert (out / "J2_L1.csv").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "j = 1" in manifest and "l = 1" in manifest
    assert "component J1_L1" in manifest and "component J2_L1" in manifest
    assert "components = 2" in manifest
