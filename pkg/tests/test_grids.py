import numpy as np
import pytest

from semiscat import make_spatial_grid, make_k_grid, refine_grid, extend_grid
from semiscat.grids import edge_mass


def test_interfaces_fall_between_nodes():
    g = make_spatial_grid(0.0, 1.0, -2.0, 3.0, 257)
    # a and b sit exactly midway between adjacent nodes
    assert np.isclose(0.5 * (g.x[g.ia] + g.x[g.ia + 1]), g.a, atol=1e-14)
    assert np.isclose(0.5 * (g.x[g.ib] + g.x[g.ib + 1]), g.b, atol=1e-14)
    assert g.x[g.ia] < g.a < g.x[g.ia + 1]
    assert g.x[g.ib] < g.b < g.x[g.ib + 1]
    # no node lands on an interface
    assert np.abs(g.x - g.a).min() > 0.4 * g.dx
    assert np.abs(g.x - g.b).min() > 0.4 * g.dx


def test_grid_partition_covers_everything():
    g = make_spatial_grid(0.0, 1.0, -2.0, 3.0, 301)
    left = g.x[g.left]
    mid = g.x[g.interior]
    right = g.x[g.right]
    assert left.size + mid.size + right.size == g.n
    assert np.all(left < g.a)
    assert np.all((mid > g.a) & (mid < g.b))
    assert np.all(right > g.b)


def test_grid_is_uniform_and_barrier_integral_steps():
    g = make_spatial_grid(0.0, 1.0, -2.0, 3.0, 2049)
    steps = np.diff(g.x)
    assert np.allclose(steps, g.dx, rtol=1e-13)
    # (b - a) is an integer number of steps
    m = (g.b - g.a) / g.dx
    assert abs(m - round(m)) < 1e-10


def test_trapezoid_norm_and_inner():
    g = make_spatial_grid(0.0, 1.0, -2.0, 3.0, 513)
    assert np.isclose(g.weights.sum(), g.x[-1] - g.x[0], rtol=1e-13)
    u = np.exp(-3.0 * ((g.x - 0.4) ** 2))
    # norm^2 is the integral of exp(-6 y^2); the tails clear the box
    assert np.isclose(g.norm(u) ** 2, np.sqrt(np.pi / 6.0), rtol=1e-10)
    v = np.exp(1j * g.x) * u
    assert np.isclose(g.inner(u, v), np.sum(g.weights * u * v), rtol=1e-13)
    assert np.isclose(g.inner(v, v).real, g.norm(v) ** 2, rtol=1e-13)


def test_refine_keeps_nodes_and_alignment():
    g = make_spatial_grid(0.0, 1.0, -1.5, 2.5, 129)
    for factor in (3, 5, 7):
        f = refine_grid(g, factor)
        assert np.allclose(f.x[::factor], g.x, atol=1e-12)
        assert np.isclose(f.dx, g.dx / factor, rtol=1e-13)
        assert np.isclose(0.5 * (f.x[f.ia] + f.x[f.ia + 1]), f.a, atol=1e-13)
    assert refine_grid(g, 1) is g


def test_refine_rejects_even_factors():
    g = make_spatial_grid(0.0, 1.0, -1.5, 2.5, 129)
    with pytest.raises(ValueError):
        refine_grid(g, 2)
    with pytest.raises(ValueError):
        refine_grid(g, 0)


def test_extend_grid_pads_whole_steps():
    g = make_spatial_grid(0.0, 1.0, -1.5, 2.5, 129)
    e = extend_grid(g, 5, 3)
    assert e.n == g.n + 8
    assert np.allclose(e.x[5:5 + g.n], g.x, atol=1e-12)
    assert e.ia == g.ia + 5 and e.ib == g.ib + 5
    assert np.isclose(e.x[1] - e.x[0], g.dx, rtol=1e-13)
    with pytest.raises(ValueError):
        extend_grid(g, -1, 0)


def test_make_spatial_grid_validation():
    with pytest.raises(ValueError):
        make_spatial_grid(0.0, 1.0, 0.5, 3.0, 257)  # box misses a
    with pytest.raises(ValueError):
        make_spatial_grid(0.0, 1.0, -2.0, 0.7, 257)  # box misses b
    with pytest.raises(ValueError):
        make_spatial_grid(0.0, 1.0, -2.0, 3.0, 8)


def test_k_grid_layout_and_quadrature():
    kg = make_k_grid(0.05, 12.0, 256)
    assert kg.n == 512 and kg.n_pos == 256
    assert np.all(np.diff(kg.k) > 0)
    assert np.allclose(kg.k[:256], -kg.k[512:255:-1], atol=1e-14)
    assert np.all(kg.kpos > 0)
    assert kg.k_min == 0.05 and kg.k_max == 12.0
    # per-half trapezoid weights integrate 1 to the band length
    assert np.isclose(kg.w.sum(), 2 * (12.0 - 0.05), rtol=1e-12)
    # quadrature of a smooth function against the exact integral; the
    # truncation at k_min leaves an O(dk^2) endpoint term in the trapezoid
    from scipy.stats import norm
    f = np.exp(-0.5 * (kg.k - 2.0) ** 2)
    exact = np.sqrt(2 * np.pi) * (norm.cdf(12.0, 2.0, 1.0) - norm.cdf(0.05, 2.0, 1.0)
                                  + norm.cdf(-0.05, 2.0, 1.0) - norm.cdf(-12.0, 2.0, 1.0))
    assert np.isclose(np.sum(kg.w * f), exact, rtol=1e-4)
    fine = make_k_grid(0.05, 12.0, 1024)
    ffine = np.exp(-0.5 * (fine.k - 2.0) ** 2)
    err_c = abs(np.sum(kg.w * f) - exact)
    err_f = abs(np.sum(fine.w * ffine) - exact)
    assert err_f < err_c / 8.0  # second-order quadrature: 4x refinement -> 16x


def test_k_grid_validation():
    with pytest.raises(ValueError):
        make_k_grid(-0.1, 12.0, 256)
    with pytest.raises(ValueError):
        make_k_grid(2.0, 1.0, 256)
    with pytest.raises(ValueError):
        make_k_grid(0.05, 12.0, 32)


def test_edge_mass_detects_leakage():
    g = make_spatial_grid(0.0, 1.0, -2.0, 3.0, 513)
    inside = np.exp(-3.0 * ((g.x - 0.5) ** 2))
    assert edge_mass(g, inside) < 1e-12
    at_edge = np.exp(-((g.x - g.x_max) ** 2) / 0.5)
    assert edge_mass(g, at_edge) > 1e-2
