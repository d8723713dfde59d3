"""Independent closed forms used as oracles by the test suite.

Everything here is assembled from textbook formulas with plain numpy
(plane-wave matching for the rectangular barrier, the dispersive Gaussian
for the free evolution, the Gaussian Fourier integral for the free band
transform), so agreement with the package is a genuine cross-check and not
a reimplementation of the same algorithm.
"""

import numpy as np


def square_barrier_coeffs(k, h, a=0.0, b=1.0, v0=2.0):
    """Plane-wave coefficients (c1, c2) of chi_plus on x < a.

    chi_plus = e^{ikx/h} for x > b; inside the rectangular barrier it is a
    combination of e^{+-iqx/h} with q = sqrt(k^2 - v0) (upper branch), and
    the coefficients follow from value/derivative matching at b then a.
    T = 1/c1 and R = c2/c1.
    """
    k = np.asarray(k, dtype=complex)
    q = np.sqrt(k * k - v0 + 0j)
    # match at b: A e^{iqb/h} + B e^{-iqb/h} = e^{ikb/h}, derivative alike
    ab = 0.5 * (1.0 + k / q) * np.exp(1j * (k - q) * b / h)
    bb = 0.5 * (1.0 - k / q) * np.exp(1j * (k + q) * b / h)
    # traces at a
    u_a = ab * np.exp(1j * q * a / h) + bb * np.exp(-1j * q * a / h)
    du_a = (1j * q / h) * (ab * np.exp(1j * q * a / h)
                           - bb * np.exp(-1j * q * a / h))
    c1 = 0.5 * (u_a + (h / (1j * k)) * du_a) * np.exp(-1j * k * a / h)
    c2 = 0.5 * (u_a - (h / (1j * k)) * du_a) * np.exp(1j * k * a / h)
    return c1, c2


def square_barrier_tr(k, h, a=0.0, b=1.0, v0=2.0):
    """Transmission and reflection amplitudes of the rectangular barrier."""
    c1, c2 = square_barrier_coeffs(k, h, a, b, v0)
    return 1.0 / c1, c2 / c1


def free_gaussian_evolution(x, t, h, k0, x0, sigma):
    """exp(-i t H) of the unit Gaussian packet for H = -h^2 d^2/dx^2.

    The packet is exp(i k0 x / h) times the normalized envelope centered at
    x0 (matching gaussian_packet); the free evolution transports the center
    at the group velocity 2 k0 h and spreads the envelope through
    beta = 1 + i h^2 t / sigma^2.
    """
    x = np.asarray(x, dtype=float)
    alpha = 1.0 / (4.0 * sigma ** 2)
    p = k0 / h
    beta = 1.0 + 4.0j * alpha * h * h * t
    amp = (2.0 * np.pi * sigma ** 2) ** -0.25
    xi = x - x0 - 2.0 * p * h * h * t
    return (amp / np.sqrt(beta) * np.exp(1j * k0 * x0 / h)
            * np.exp(1j * p * (x - x0) - 1j * p * p * h * h * t
                     - alpha * xi * xi / beta))


def free_gaussian_transform(k, h, k0, x0, sigma):
    """Band coefficients (2 pi h)^{-1/2} int e^{-ikx/h} phi(x) dx of the packet.

    Closed Gaussian integral; valid for the free eigenfunctions e^{ikx/h}
    at any real k of either sign.
    """
    k = np.asarray(k, dtype=float)
    amp = (2.0 * np.pi * sigma ** 2) ** -0.25
    pref = amp * np.sqrt(4.0 * np.pi * sigma ** 2) / np.sqrt(2.0 * np.pi * h)
    return pref * np.exp(-1j * (k - k0) * x0 / h
                         - sigma ** 2 * (k - k0) ** 2 / h ** 2)
