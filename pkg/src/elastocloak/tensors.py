"""Rank-4 stiffness tensor algebra.

Construction of isotropic stiffness tensors, double contractions,
symmetry and Legendre-ellipticity diagnostics, and the Voigt collapse.
Entries are complex throughout; ellipticity checks are restricted to
real-valued tensors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "IsotropicMedium",
    "StiffnessTensor",
    "SymmetryReport",
    "iso_stiffness",
    "apply_stiffness",
    "check_legendre",
    "symmetry_report",
    "voigt_matrix",
    "tensor_to_json",
    "tensor_from_json",
]

# Voigt index pairs, (i, j) per slot, 0-based; order 11,22,(33),23,13,12.
_VOIGT_PAIRS = {
    2: [(0, 0), (1, 1), (0, 1)],
    3: [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)],
}


@dataclass(frozen=True)
class IsotropicMedium:
    """Isotropic elastic medium given by Lame constants and density.

    All three parameters may be complex; lossy layers carry
    ``Im(rho) > 0`` (and, through the scaled stiffness, complex moduli
    downstream of push-forwards).
    """

    lam: complex
    mu: complex
    rho: complex = 1.0

    def is_regular_real(self, dim):
        """Admissibility for real media: mu > 0 and dim*lam + 2*mu > 0."""
        if any(abs(complex(v).imag) > 0 for v in (self.lam, self.mu, self.rho)):
            return False
        return self.mu.real > 0 and dim * self.lam.real + 2 * self.mu.real > 0

    def as_dict(self):
        return {
            "lambda": _c2pair(self.lam),
            "mu": _c2pair(self.mu),
            "rho": _c2pair(self.rho),
        }

    @staticmethod
    def from_dict(d):
        return IsotropicMedium(
            lam=_pair2c(d["lambda"]), mu=_pair2c(d["mu"]), rho=_pair2c(d.get("rho", 1.0))
        )


def _c2pair(v):
    v = complex(v)
    return [v.real, v.imag]


def _pair2c(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


@dataclass
class StiffnessTensor:
    """Rank-4 stiffness tensor with symmetry metadata.

    Attributes
    ----------
    dim : int
        Spatial dimension, 2 or 3.
    entries : ndarray, shape (dim, dim, dim, dim), complex
        Tensor components C[i, j, k, l].
    major_symmetric, minor_symmetric : bool
        Construction-time guarantees; ``symmetry_report`` verifies them
        numerically.
    """

    dim: int
    entries: np.ndarray
    major_symmetric: bool = False
    minor_symmetric: bool = False

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (self.dim,) * 4:
            raise ValueError(
                f"entries must have shape {(self.dim,)*4}, got {self.entries.shape}"
            )

    def copy(self):
        return replace(self, entries=self.entries.copy())

    @property
    def is_real(self):
        return not np.any(self.entries.imag != 0.0)


@dataclass(frozen=True)
class SymmetryReport:
    major: bool
    minor: bool
    max_violation: float


def iso_stiffness(medium, dim):
    """Isotropic stiffness tensor lam*d_ij*d_kl + mu*(d_ik*d_jl + d_il*d_jk).

    Parameters
    ----------
    medium : IsotropicMedium
    dim : int
        2 or 3.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    lam, mu = complex(medium.lam), complex(medium.mu)
    eye = np.eye(dim)
    C = (
        lam * np.einsum("ij,kl->ijkl", eye, eye)
        + mu * np.einsum("ik,jl->ijkl", eye, eye)
        + mu * np.einsum("il,jk->ijkl", eye, eye)
    )
    return StiffnessTensor(dim=dim, entries=C, major_symmetric=True, minor_symmetric=True)


def apply_stiffness(C, A):
    """Double contraction (C:A)_ij = sum_kl C_ijkl A_kl."""
    A = np.asarray(A)
    if A.shape != (C.dim, C.dim):
        raise ValueError(f"A must have shape {(C.dim, C.dim)}, got {A.shape}")
    return np.einsum("ijkl,kl->ij", C.entries, A.astype(complex))


def _sym_basis(dim):
    """Orthonormal (Frobenius) basis of symmetric dim x dim matrices."""
    out = []
    for i in range(dim):
        E = np.zeros((dim, dim))
        E[i, i] = 1.0
        out.append(E)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            E = np.zeros((dim, dim))
            E[i, j] = E[j, i] = inv_sqrt2
            out.append(E)
    return out


def legendre_quotient(C, A):
    """Rayleigh quotient sum C_ijkl A_ij A_kl / ||A||_F^2 for symmetric A."""
    A = np.asarray(A, dtype=float)
    num = np.einsum("ijkl,ij,kl->", C.entries, A, A)
    return float(num.real) / float(np.sum(A * A))


def check_legendre(C, samples=4096, tol=1e-12, seed=0):
    """Estimate the Legendre ellipticity constant c0.

    Minimizes ``(C:A):A / ||A||^2`` over the deterministic orthonormal
    basis of symmetric matrices plus ``samples`` random symmetric
    unit-norm matrices.

    Returns
    -------
    (elliptic, c0) : (bool, float)
        ``elliptic`` is ``c0 > tol``.
    """
    if not C.is_real:
        raise ValueError("Legendre ellipticity is defined for real-valued tensors")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    basis = _sym_basis(C.dim)
    c0 = min(legendre_quotient(C, E) for E in basis)
    rng = np.random.default_rng(seed)
    nsym = len(basis)
    coeffs = rng.standard_normal((samples, nsym))
    for row in coeffs:
        A = sum(c * E for c, E in zip(row, basis))
        c0 = min(c0, legendre_quotient(C, A))
    return c0 > tol, c0


def symmetry_report(C, tol=1e-12):
    """Exhaustively test major and minor symmetries.

    Returns a ``SymmetryReport`` with the worst absolute violation over
    both families.
    """
    E = C.entries
    major_v = float(np.abs(E - np.einsum("ijkl->klij", E)).max())
    minor_v = max(
        float(np.abs(E - np.einsum("ijkl->jikl", E)).max()),
        float(np.abs(E - np.einsum("ijkl->ijlk", E)).max()),
    )
    return SymmetryReport(
        major=major_v <= tol,
        minor=minor_v <= tol,
        max_violation=max(major_v, minor_v),
    )


def voigt_matrix(C, tol=1e-9):
    """Collapse a minor-symmetric tensor to its Voigt matrix.

    Uses the unscaled (stress) convention, so an isotropic tensor
    reproduces the familiar lam/mu table literally. Raises if the minor
    symmetries are violated beyond ``tol`` (the collapse is undefined
    then; push-forward outputs generally fail this).
    """
    rep = symmetry_report(C, tol=tol)
    if not rep.minor:
        raise ValueError(
            f"Voigt collapse undefined: minor symmetry violated by {rep.max_violation:.3e}"
        )
    pairs = _VOIGT_PAIRS[C.dim]
    m = len(pairs)
    V = np.empty((m, m), dtype=complex)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            V[a, b] = C.entries[i, j, k, l]
    return V


def tensor_to_json(C):
    """Serialize to the interchange form {dim, entries, flags}."""
    flat = C.entries.reshape(-1)
    return json.dumps(
        {
            "dim": C.dim,
            "entries": [[v.real, v.imag] for v in flat],
            "flags": {
                "major_symmetric": C.major_symmetric,
                "minor_symmetric": C.minor_symmetric,
            },
        }
    )


def tensor_from_json(text):
    d = json.loads(text)
    dim = int(d["dim"])
    flat = np.array([complex(re, im) for re, im in d["entries"]])
    if flat.size != dim**4:
        raise ValueError(f"expected {dim**4} entries, got {flat.size}")
    return StiffnessTensor(
        dim=dim,
        entries=flat.reshape((dim,) * 4),
        major_symmetric=bool(d["flags"]["major_symmetric"]),
        minor_symmetric=bool(d["flags"]["minor_symmetric"]),
    )
