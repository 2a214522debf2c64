"""Per-Fourier-mode radial wave fields for isotropic annuli.

Displacements derive from two Helmholtz potentials: a compressional
potential ``phi = Z_n(kp r) cos(n th)`` and a shear potential
``psi = W_n(ks r) sin(n th)`` with ``u = grad phi + curl(psi e_z)`` and

    kp = omega * sqrt(rho / (lam + 2 mu)),   ks = omega * sqrt(rho / mu).

The cos/sin pairing closes under the Navier operator, so one 2x2 block
per mode captures the full physics (the sin/-cos family is its mirror
image). Radial factors Z, W are Bessel J (regular) or Hankel H1
(outgoing); cores use J only.

``basis_column`` returns the column (u_r, u_th, s_rr, s_rt) of angular
coefficients for one basis function, with the Bessel second derivatives
eliminated through the defining ODE, so all entries use only Z and Z'.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import specfun

__all__ = [
    "wavenumbers",
    "basis_column",
    "ModeField",
    "BASIS_FULL",
    "BASIS_REGULAR",
    "BASIS_OUTGOING",
]

BASIS_FULL = (("J", "P"), ("H", "P"), ("J", "S"), ("H", "S"))
BASIS_REGULAR = (("J", "P"), ("J", "S"))
BASIS_OUTGOING = (("H", "P"), ("H", "S"))


def wavenumbers(medium, omega):
    """Compressional and shear wavenumbers (kp, ks) of an isotropic medium."""
    lam, mu, rho = complex(medium.lam), complex(medium.mu), complex(medium.rho)
    kp = omega * np.sqrt(rho / (lam + 2.0 * mu))
    ks = omega * np.sqrt(rho / mu)
    return kp, ks


def _radial(kind, n, z):
    if kind == "J":
        return specfun.bessel_j(n, z), specfun.bessel_j_prime(n, z)
    if kind == "H":
        return specfun.hankel1(n, z), specfun.hankel1_prime(n, z)
    raise ValueError(f"unknown radial kind {kind!r}")


def basis_column(medium, n, r, omega, kind, pol):
    """Boundary column (u_r, u_th, sigma_rr, sigma_rth) at radius r.

    Angular dependence: u_r, sigma_rr carry cos(n th); u_th, sigma_rth
    carry sin(n th).
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    lam, mu, rho = complex(medium.lam), complex(medium.mu), complex(medium.rho)
    kp, ks = wavenumbers(medium, omega)
    if pol == "P":
        k = kp
        Z, Zp = _radial(kind, n, k * r)
        ur = k * Zp
        ut = -(n / r) * Z
        srr = (2.0 * mu * n**2 / r**2 - rho * omega**2) * Z - (2.0 * mu * k / r) * Zp
        srt = -(2.0 * mu * n / r) * (k * Zp - Z / r)
    elif pol == "S":
        k = ks
        W, Wp = _radial(kind, n, k * r)
        ur = (n / r) * W
        ut = -k * Wp
        srr = (2.0 * mu * n / r) * (k * Wp - W / r)
        srt = mu * ((ks**2 - 2.0 * n**2 / r**2) * W + (2.0 * ks / r) * Wp)
    else:
        raise ValueError(f"unknown polarization {pol!r}")
    return np.array([ur, ut, srr, srt], dtype=complex)


def basis_matrix(medium, n, r, omega, kinds):
    """Stack of basis columns, shape (4, len(kinds))."""
    out = np.empty((4, len(kinds)), dtype=complex)
    for c, (kind, pol) in enumerate(kinds):
        out[:, c] = basis_column(medium, n, r, omega, kind, pol)
    return out


@dataclass(frozen=True)
class ModeField:
    """A single-mode field in one isotropic region.

    ``terms`` pairs each (kind, pol) basis function with its coefficient.
    """

    medium: object
    omega: float
    n: int
    terms: tuple  # of (kind, pol, coeff)

    def boundary_values(self, r):
        """(u_r, u_th, sigma_rr, sigma_rth) angular coefficients at radius r."""
        out = np.zeros(4, dtype=complex)
        for kind, pol, c in self.terms:
            out += c * basis_column(self.medium, self.n, r, self.omega, kind, pol)
        return out

    def displacement_polar(self, r):
        v = self.boundary_values(r)
        return v[0], v[1]

    def traction_polar(self, r):
        v = self.boundary_values(r)
        return v[2], v[3]

    def displacement_cartesian(self, points):
        """Physical displacement vectors at Cartesian points, shape (m, 2).

        Reconstructs u = (u_r cos(n th)) rhat + (u_th sin(n th)) that.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((pts.shape[0], 2), dtype=complex)
        for i, p in enumerate(pts):
            r = float(np.hypot(p[0], p[1]))
            th = float(np.arctan2(p[1], p[0]))
            ur, ut = self.displacement_polar(r)
            cr, sr = np.cos(self.n * th), np.sin(self.n * th)
            rhat = np.array([np.cos(th), np.sin(th)])
            that = np.array([-np.sin(th), np.cos(th)])
            out[i] = ur * cr * rhat + ut * sr * that
        return out if np.asarray(points).ndim > 1 else out[0]

    def restrict(self, pols):
        """Keep only terms with polarization in ``pols`` (e.g. {"P"})."""
        kept = tuple(t for t in self.terms if t[1] in pols)
        return replace(self, terms=kept)
