import numpy as np
import pytest

from closedform import free_gaussian_transform
from semiscat import (EigenFamily, NumericalError, gaussian_packet,
                      make_k_grid, make_spatial_grid, square_barrier)
from semiscat.potentials import Potential


def test_gaussian_packet_mass_and_second_derivative():
    g = make_spatial_grid(0.0, 1.0, -12.0, 13.0, 4001)
    h, k0, x0, sigma = 0.4, 2.0, -1.5, 0.6
    phi, d2 = gaussian_packet(g.x, h, k0, x0, sigma, second_deriv=True)
    assert abs(g.norm(phi) - 1.0) < 1e-10
    lap = np.zeros_like(phi)
    lap[1:-1] = (phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) / g.dx ** 2
    err = np.abs(lap[1:-1] - d2[1:-1]).max()
    assert err < 1e-3 * np.abs(d2).max()


def test_free_transform_matches_closed_form():
    zero = Potential(a=0.0, b=1.0, profile="none", v0=0.0)
    h, k0, sigma = 0.5, 2.0, 0.6
    x0 = -3.0 * sigma
    g = make_spatial_grid(0.0, 1.0, -14.0, 15.0, 4001)
    kg = make_k_grid(0.05, 8.0, 768)
    ef = EigenFamily.build(zero, h, g, kg)
    phi = gaussian_packet(g.x, h, k0, x0, sigma)
    c = ef.forward(phi)
    cf = free_gaussian_transform(kg.k, h, k0, x0, sigma)
    on = np.abs(cf) > 1e-10 * np.abs(cf).max()
    assert np.abs(c - cf)[on].max() < 1e-10 * np.abs(cf).max()
    # nothing spurious lands on the counter-propagating branch
    assert np.abs(c[~on]).max() < 1e-9 * np.abs(cf).max()


def test_band_transform_is_isometric_on_contained_packets():
    # Plancherel over the band: the packet is spectrally inside (k_min, k_max)
    # so analysis preserves the norm; the synthesis roundtrip carries a
    # residual floor from the dropped (0, k_min) sliver that grows like
    # k_min^2 (scattering mixes a linear-in-k amount of the packet into the
    # sliver even when its free spectrum is exponentially small there)
    h, k0, sigma = 0.5, 2.0, 0.6
    g = make_spatial_grid(0.0, 1.0, -14.0, 15.0, 4001)
    phi = gaussian_packet(g.x, h, k0, -3.0 * sigma, sigma)
    res = {}
    for k_min in (0.05, 0.2):
        kg = make_k_grid(k_min, 8.0, 768)
        ef = EigenFamily.build(square_barrier(), h, g, kg)
        c = ef.forward(phi)
        # the missing band mass is the square of the roundtrip residual
        assert abs(kg.norm(c) / g.norm(phi) - 1.0) < 1e-5
        res[k_min] = ef.completeness_residual(phi)
    assert res[0.05] < 5e-4
    assert res[0.2] > 4.0 * res[0.05]


def test_forward_rejects_states_touching_the_box_edge():
    h = 0.5
    g = make_spatial_grid(0.0, 1.0, -6.0, 7.0, 1601)
    kg = make_k_grid(0.05, 8.0, 256)
    ef = EigenFamily.build(square_barrier(), h, g, kg)
    phi = gaussian_packet(g.x, h, 2.0, 6.5, 0.5)
    with pytest.raises(NumericalError):
        ef.forward(phi)
    c = ef.forward(phi, tail_tol=None)
    assert np.isfinite(c).all()


def test_pos_index_folds_the_band():
    g = make_spatial_grid(0.0, 1.0, -6.0, 7.0, 801)
    kg = make_k_grid(0.05, 8.0, 128)
    ef = EigenFamily.build(square_barrier(), 0.5, g, kg)
    m = kg.n_pos
    idx = np.array([0, m - 1, m, 2 * m - 1])
    assert np.array_equal(ef.pos_index(idx), [m - 1, 0, 0, m - 1])
    basis, chip, chim, v, k = ef.select(idx)
    assert np.array_equal(k, kg.k[idx])
    assert chip.shape == (4, g.n) and chim.shape == (4, g.n)
    assert v.shape == (4, 4)
    # the band rows at +-k share their Jost data
    assert np.array_equal(basis.w[0], basis.w[3])
    assert np.array_equal(basis.w[1], basis.w[2])
