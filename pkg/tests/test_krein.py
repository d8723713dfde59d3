import numpy as np
import pytest

from semiscat import (DefectBasis, build_jost_family, coupling_matrix,
                      det_scale, interface_matrices, make_spatial_grid,
                      modified_eigenfunction, modified_resolvent_apply,
                      resolvent_apply, singular_scan, square_barrier)
from semiscat import oracle
from semiscat.krein import correction_coefficients, theta_holomorphy_defect

POT = square_barrier()
GRID = make_spatial_grid(0.0, 1.0, -6.0, 7.0, 1601)


def test_interface_matrices_values():
    h = 0.35
    A, B = interface_matrices(0.0, h)
    assert np.allclose(A, 2.0 / h ** 2 * np.eye(4), rtol=0, atol=0)
    assert np.all(B == 0.0)
    th = 0.3
    A, B = interface_matrices(th, h)
    ep = np.exp(np.array([1.5, 0.5, -1.5, -0.5]) * th)
    assert np.allclose(np.diag(A), (1.0 + ep) / h ** 2, rtol=1e-15)
    assert np.isclose(B[0, 1], 1.0 - ep[0])
    assert np.isclose(B[1, 0], ep[1] - 1.0)
    assert np.isclose(B[2, 3], 1.0 - ep[2])
    assert np.isclose(B[3, 2], ep[3] - 1.0)


def test_coupling_matrix_theta_zero_is_scalar():
    h = 0.35
    fam = build_jost_family(POT, np.array([0.7, 1.3, 2.6]), h, GRID)
    basis = DefectBasis.from_family(fam)
    M = coupling_matrix(basis, 0.0)
    target = -2.0 / h ** 2 * np.eye(4)
    assert np.abs(M - target[None]).max() < 1e-12 * (2.0 / h ** 2)
    det = np.linalg.det(M)
    assert np.allclose(det, det_scale(h), rtol=1e-12)


def test_theta_zero_eigenfunction_is_uncoupled():
    for k in (1.1, -1.1):
        me = modified_eigenfunction(POT, k, 0.0, 0.35, GRID)
        assert np.abs(me.d).max() == 0.0
        assert np.array_equal(me.psi, me.psi0)


def test_eigenfunction_interface_conditions():
    # the direct solve enforces the weighted matching of one-sided traces
    # to rounding accuracy; the function solves the equation away from the
    # interfaces up to the second-difference truncation of the check
    for theta in (0.01, 0.05, 0.08 + 0.03j):
        for k in (0.8, 1.5, 3.0, -1.5):
            me = modified_eigenfunction(POT, k, theta, 0.35, GRID)
            assert me.interface_residuals()["max"] < 1e-12
            assert me.pde_residual() < 1e-3
            # the coupling is genuinely active
            gap = np.abs(me.psi - me.psi0).max() / np.abs(me.psi0).max()
            assert gap > 1e-4


def test_reduced_modes_leave_first_order_defects():
    # the row/column shortcuts drop theta-dependent factors, so their
    # interface residuals stay at the size of theta instead of rounding
    theta = 0.05
    direct = modified_eigenfunction(POT, 1.5, theta, 0.35, GRID, mode="direct")
    assert direct.interface_residuals()["max"] < 1e-12
    for mode in ("row", "column"):
        me = modified_eigenfunction(POT, 1.5, theta, 0.35, GRID, mode=mode)
        r = me.interface_residuals()["max"]
        assert 1e-9 < r < 10.0 * abs(theta)


def test_zero_momentum_rejected():
    with pytest.raises(ValueError):
        modified_eigenfunction(POT, 0.0, 0.05, 0.35, GRID)


def test_unknown_mode_rejected():
    fam = build_jost_family(POT, np.array([1.0]), 0.35, GRID)
    basis = DefectBasis.from_family(fam)
    v = np.ones((1, 4), dtype=complex)
    with pytest.raises(ValueError):
        correction_coefficients(basis, 0.05, v, mode="qr")


def test_coefficients_holomorphic_in_theta():
    for k in (0.9, 2.2):
        for theta0 in (0.0, 0.04):
            defect = theta_holomorphy_defect(POT, k, theta0, 0.35, GRID)
            assert defect < 1e-6


def test_modified_resolvent_against_banded_oracle():
    h, z, theta = 0.4, -1.0 + 0.0j, 0.05
    f = np.exp(-((GRID.x - 0.4) ** 2) / 0.32)
    u_theta, u_smooth = modified_resolvent_apply(POT, z, theta, h, GRID, f)
    assert np.allclose(u_smooth, resolvent_apply(POT, z, h, GRID, f))
    u_fd = oracle.resolvent_solve(POT, z, theta, h, GRID, f)
    rel = GRID.norm(u_theta - u_fd) / GRID.norm(u_fd)
    assert rel < 1e-3
    # the correction channel carries real mass at this theta
    assert GRID.norm(u_theta - u_smooth) / GRID.norm(u_smooth) > 1e-3


def test_singular_scan_away_from_flags():
    kband = np.geomspace(0.3, 5.0, 16)
    out = singular_scan(POT, kband, 0.05, 0.35, GRID)
    assert not out["flagged"].any()
    assert np.abs(np.abs(out["det_scaled"]) - 1.0).max() < 0.3
    assert out["k"].shape == out["det"].shape == (16,)
