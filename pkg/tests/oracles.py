"""Independent numerical oracles used by the tests.

Everything here recomputes physics by direct quadrature or closed textbook
forms, deliberately avoiding the package's sine/cosine-integral reduction so
the two routes stay independent.
"""

import math

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0
from scipy.integrate import quad
from scipy.special import sici

ETA0 = math.sqrt(mu_0 / epsilon_0)
EULER_GAMMA = 0.5772156649015329


def si_quadrature(u, tol=1e-12):
    """Si(u) by adaptive quadrature of sin(t)/t."""
    val, _ = quad(lambda t: math.sin(t) / t if t else 1.0, 0.0, u,
                  epsabs=tol, epsrel=tol, limit=200)
    return val


def ci_quadrature(u, tol=1e-12):
    """Ci(u) = gamma + ln u + integral of (cos t - 1)/t."""
    val, _ = quad(lambda t: (math.cos(t) - 1.0) / t if t else 0.0, 0.0, u,
                  epsabs=tol, epsrel=tol, limit=200)
    return EULER_GAMMA + math.log(u) + val


def _sinusoidal_field_kernel(k, h1, d, z):
    """Exact E_z of a unit sinusoidal filament: three spherical-wave terms."""
    r1 = math.sqrt(d * d + (z - h1) ** 2)
    r2 = math.sqrt(d * d + (z + h1) ** 2)
    r0 = math.sqrt(d * d + z * z)
    return (
        np.exp(-1j * k * r1) / r1
        + np.exp(-1j * k * r2) / r2
        - 2.0 * math.cos(k * h1) * np.exp(-1j * k * r0) / r0
    )


def mutual_impedance_quadrature(len1, len2, d, s, f, tol=1e-11):
    """Feed-referred echelon mutual impedance by direct coupling quadrature."""
    lam = C0 / f
    k = 2 * math.pi / lam
    h1, h2 = len1 / 2.0, len2 / 2.0

    def integrand(zeta, part):
        val = _sinusoidal_field_kernel(k, h1, d, s + zeta) * math.sin(
            k * (h2 - abs(zeta))
        )
        return val.real if part == "re" else val.imag

    # Segment at the current kink and at the filament-tip near-singularities,
    # bracketing each tip with a narrow window so the 1/R spike (width ~ d)
    # is resolved even for wire-radius separations.
    window = max(5.0 * d, 1e-5 * h2)
    cuts = {-h2, 0.0, h2}
    for tip in (h1 - s, -h1 - s):
        for z in (tip - window, tip, tip + window):
            if -h2 < z < h2:
                cuts.add(z)
    segs = sorted(cuts)
    re = im = 0.0
    for a, b in zip(segs[:-1], segs[1:]):
        r, _ = quad(integrand, a, b, args=("re",), epsabs=tol, epsrel=tol, limit=800)
        i, _ = quad(integrand, a, b, args=("im",), epsabs=tol, epsrel=tol, limit=800)
        re += r
        im += i
    z_loop = 1j * ETA0 / (4 * math.pi) * complex(re, im)
    return z_loop / (math.sin(k * h1) * math.sin(k * h2))


def self_impedance_quadrature(length, radius, f, tol=1e-11):
    """Self impedance: the filament coupled to itself one radius away."""
    return mutual_impedance_quadrature(length, length, radius, 0.0, f, tol)


def mutual_impedance_potential(len1, len2, d, s, f, n_quad=300, step=None):
    """Doubly numerical route: vector potential by quadrature, E_z by finite
    differences of it, then the outer coupling quadrature. Slower and less
    accurate, but independent of the closed-form field kernel."""
    lam = C0 / f
    k = 2 * math.pi / lam
    h1, h2 = len1 / 2.0, len2 / 2.0
    if step is None:
        step = 2e-4 * lam

    def potential(z):
        def ig(zp, part):
            r = math.sqrt(d * d + (z - zp) ** 2)
            val = math.sin(k * (h1 - abs(zp))) * np.exp(-1j * k * r) / r
            return val.real if part == "re" else val.imag

        re, _ = quad(ig, -h1, h1, args=("re",), points=[0.0], limit=200,
                     epsabs=1e-12, epsrel=1e-12)
        im, _ = quad(ig, -h1, h1, args=("im",), points=[0.0], limit=200,
                     epsabs=1e-12, epsrel=1e-12)
        return complex(re, im)

    def e_z(z):
        d2 = (potential(z + step) - 2.0 * potential(z) + potential(z - step)) / step**2
        return -1j * ETA0 / (4 * math.pi * k) * (d2 + k * k * potential(z))

    nodes, weights = np.polynomial.legendre.leggauss(n_quad // 2)
    total = 0.0 + 0.0j
    for a, b in [(-h2, 0.0), (0.0, h2)]:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for t, w in zip(nodes, weights):
            zeta = mid + half * t
            total += w * half * e_z(s + zeta) * math.sin(k * (h2 - abs(zeta)))
    z_loop = -total
    return z_loop / (math.sin(k * h1) * math.sin(k * h2))


def carter_side_by_side_halfwave(d, f):
    """Classic closed form for two parallel half-wave dipoles, side by side."""
    lam = C0 / f
    dl = d / lam
    u0 = 2 * math.pi * dl
    u1 = 2 * math.pi * (math.sqrt(dl * dl + 0.25) + 0.5)
    u2 = 2 * math.pi * (math.sqrt(dl * dl + 0.25) - 0.5)
    si0, ci0 = sici(u0)
    si1, ci1 = sici(u1)
    si2, ci2 = sici(u2)
    return complex(
        ETA0 / (4 * math.pi) * (2 * ci0 - ci1 - ci2),
        -ETA0 / (4 * math.pi) * (2 * si0 - si1 - si2),
    )


def plate_brcs_aperture_integral(width, height, alpha, beta, f, n=160):
    """Physical-optics plate RCS by 2-D Gauss-Legendre aperture integration."""
    lam = C0 / f
    k = 2 * math.pi / lam
    al, be = math.radians(alpha), math.radians(beta)
    kx = k * (math.sin(al) + math.sin(be))
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = 0.5 * width * nodes
    wx = 0.5 * width * weights
    y = 0.5 * height * nodes
    wy = 0.5 * height * weights
    phase = np.exp(1j * kx * x)
    integral = np.sum(wx * phase) * np.sum(wy)
    projection = 0.5 * (math.cos(al) + math.cos(be))
    return 4 * math.pi / lam**2 * (projection**2) * abs(integral) ** 2
