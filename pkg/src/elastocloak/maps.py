"""Radial bi-Lipschitz transformations and push-forward of elastic media.

A :class:`RadialMap` acts on radii, ``|x| -> g(|x|)``, keeping directions
fixed. The maps used for cloaking are

* ``blowup_map``: the singular construction expanding the origin of the
  ball of radius 2 to the unit disk (profile ``r -> 1 + r/2``),
* ``regularized_blowup_map(h)``: its regularization expanding the small
  ball of radius ``h`` instead (piecewise-linear profile, identity on the
  outer boundary, ``r/h`` on the inner branch).

Push-forward of a stiffness tensor under a map with Jacobian M is

    Ct_iqkp = (1/det M) * sum_{j,l} C_ijkl M_pl M_qj,   rho_t = rho/det M,

evaluated at the preimage of the requested point. For radial maps and
points expressed in the polar frame (index order r, theta[, phi]) the
Jacobian is diagonal, ``diag(g'(r), g(r)/r, ...)``, which is how the
closed-form cloak tables arise.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .tensors import StiffnessTensor

__all__ = [
    "RadialMap",
    "JacobianData",
    "JointError",
    "blowup_map",
    "regularized_blowup_map",
    "identity_map",
    "compose_maps",
    "jacobian",
    "pushforward_stiffness",
    "pushforward_density",
    "compose_pushforward_check",
    "map_to_json",
    "map_from_json",
]


class JointError(ValueError):
    """Raised at non-differentiable joints; carries one-sided Jacobians."""

    def __init__(self, message, left, right):
        super().__init__(message)
        self.left = left
        self.right = right


@dataclass(frozen=True)
class RadialMap:
    """Strictly increasing radial profile with analytic derivative/inverse.

    ``g``/``g_prime``/``g_inverse`` act on radii; ``joints`` lists interior
    radii where ``g_prime`` jumps. Profiles must be orientation preserving
    (``g' > 0`` and ``g(r)/r > 0``) on ``domain``.
    """

    kind: str
    params: dict
    dim: int
    domain: tuple
    g: callable
    g_prime: callable
    g_inverse: callable
    joints: tuple = ()

    def __call__(self, r):
        r = float(r)
        lo, hi = self.domain
        if r < lo - 1e-14 or r > hi + 1e-14:
            raise ValueError(f"radius {r} outside map domain {self.domain}")
        if r == 0.0 and lo == 0.0 and self.kind == "blowup":
            raise ValueError("blow-up map is singular at the origin")
        return float(self.g(r))

    def derivative(self, r):
        return float(self.g_prime(r))

    def inverse_radius(self, rr):
        return float(self.g_inverse(rr))

    def invert(self):
        """Map with source and image roles exchanged."""
        lo, hi = self.domain
        img = (self.g(lo) if lo > 0 else self._image_lo(), self.g(hi))
        fwd = self

        def gi(r):
            return fwd.g_inverse(r)

        def gpi(r):
            return 1.0 / fwd.g_prime(fwd.g_inverse(r))

        return RadialMap(
            kind=f"inverse:{self.kind}",
            params=dict(self.params),
            dim=self.dim,
            domain=img,
            g=gi,
            g_prime=gpi,
            g_inverse=fwd.g,
            joints=tuple(float(self.g(j)) for j in self.joints),
        )

    def _image_lo(self):
        # limit of g at an open lower endpoint (blow-up: image radius 1)
        eps = 1e-12
        return float(self.g(self.domain[0] + eps) - eps * self.g_prime(self.domain[0] + eps))

    def validate_monotone(self, samples=512):
        """Sampled monotonicity / orientation check; raises on failure."""
        lo, hi = self.domain
        rs = np.linspace(lo + 1e-9 * (hi - lo), hi, samples)
        gs = np.array([self.g(r) for r in rs])
        if np.any(np.diff(gs) <= 0):
            raise ValueError(f"map {self.kind} is not strictly increasing")
        gp = np.array([self.g_prime(r) for r in rs if not self._near_joint(r)])
        if np.any(gp <= 0):
            raise ValueError(f"map {self.kind} is not orientation preserving")
        return True

    def _near_joint(self, r, tol=1e-9):
        return any(abs(r - j) <= tol for j in self.joints)


@dataclass(frozen=True)
class JacobianData:
    """Jacobian matrix, its determinant, and where it was evaluated."""

    M: np.ndarray
    det: float
    at_point: object
    frame: str


def blowup_map(dim):
    """Singular blow-up of the origin of B_2 onto the unit disk boundary.

    Profile ``g(r) = 1 + r/2`` on (0, 2]; fixes the outer boundary r = 2
    and sends r -> 0+ to image radius 1.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return RadialMap(
        kind="blowup",
        params={},
        dim=dim,
        domain=(0.0, 2.0),
        g=lambda r: 1.0 + 0.5 * r,
        g_prime=lambda r: 0.5,
        g_inverse=lambda rr: 2.0 * (rr - 1.0),
    )


def regularized_blowup_map(h, dim):
    """Regularized blow-up expanding B_h onto the unit disk.

    Outer branch ``r -> (2-2h)/(2-h) + r/(2-h)`` for h <= r <= 2, inner
    branch ``r -> r/h`` for r < h; continuous at r = h, identity at r = 2.
    Converges to ``blowup_map`` on the outer branch as h -> 0+.
    """
    if not (0.0 < h < 1.0):
        raise ValueError(f"h must lie in (0, 1), got {h}")
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    a = (2.0 - 2.0 * h) / (2.0 - h)
    b = 1.0 / (2.0 - h)

    def g(r):
        return r / h if r < h else a + b * r

    def gp(r):
        return 1.0 / h if r < h else b

    def gi(rr):
        return rr * h if rr < 1.0 else (rr - a) / b

    return RadialMap(
        kind="regularized",
        params={"h": float(h)},
        dim=dim,
        domain=(0.0, 2.0),
        g=g,
        g_prime=gp,
        g_inverse=gi,
        joints=(float(h),),
    )


def identity_map(dim, r_max=2.0):
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return RadialMap(
        kind="identity",
        params={"r_max": float(r_max)},
        dim=dim,
        domain=(0.0, float(r_max)),
        g=lambda r: r,
        g_prime=lambda r: 1.0,
        g_inverse=lambda rr: rr,
    )


def compose_maps(first, then):
    """Composite map r -> then(first(r))."""
    if first.dim != then.dim:
        raise ValueError("maps must share dim")
    return RadialMap(
        kind="composite",
        params={"first": _map_dict(first), "then": _map_dict(then)},
        dim=first.dim,
        domain=first.domain,
        g=lambda r: then.g(first.g(r)),
        g_prime=lambda r: then.g_prime(first.g(r)) * first.g_prime(r),
        g_inverse=lambda rr: first.g_inverse(then.g_inverse(rr)),
        joints=tuple(first.joints)
        + tuple(first.g_inverse(j) for j in then.joints),
    )


def _split_point(point, dim):
    """Return (radius, direction or None, frame) for a scalar/vector point."""
    arr = np.asarray(point, dtype=float)
    if arr.ndim == 0:
        return float(arr), None, "polar"
    if arr.shape != (dim,):
        raise ValueError(f"point must be scalar or shape ({dim},)")
    r = float(np.linalg.norm(arr))
    if r == 0.0:
        raise ValueError("vector point must be nonzero")
    return r, arr / r, "cartesian"


def _principal_stretches(rmap, r_src):
    gp = rmap.g_prime(r_src)
    gt = rmap.g(r_src) / r_src
    return gp, gt


def jacobian(rmap, point, inverse=False, joint_tol=1e-12):
    """Jacobian of a radial map.

    With ``inverse=False``, ``point`` lives in the source space and the
    forward Jacobian at that point is returned. With ``inverse=True``,
    ``point`` lives in the image space and the forward Jacobian evaluated
    at its preimage is returned (the form in which the ideal-cloak tables
    are written: for the blow-up map at image radius r the determinant is
    ``r/(4(r-1))`` in 2D and ``r^2/(8(r-1)^2)`` in 3D).

    Raises :class:`JointError` (carrying one-sided data) at kinks of
    piecewise profiles.
    """
    r, direction, frame = _split_point(point, rmap.dim)
    r_src = rmap.inverse_radius(r) if inverse else r
    if r_src <= rmap.domain[0] and rmap.kind == "blowup":
        raise ValueError("blow-up map Jacobian is singular at the origin")
    for j in rmap.joints:
        if abs(r_src - j) <= joint_tol:
            left = _jac_at(rmap, j - 1e-9, direction, frame, point)
            right = _jac_at(rmap, j + 1e-9, direction, frame, point)
            raise JointError(
                f"map {rmap.kind} is non-differentiable at r = {j}", left, right
            )
    return _jac_at(rmap, r_src, direction, frame, point)


def _jac_at(rmap, r_src, direction, frame, at_point):
    gp, gt = _principal_stretches(rmap, r_src)
    dim = rmap.dim
    if frame == "polar":
        M = np.diag([gp] + [gt] * (dim - 1))
    else:
        P = np.outer(direction, direction)
        M = gp * P + gt * (np.eye(dim) - P)
    det = gp * gt ** (dim - 1)
    return JacobianData(M=M, det=float(det), at_point=at_point, frame=frame)


def pushforward_stiffness(C, rmap, point):
    """Push a stiffness tensor forward, evaluated at an image-space point.

    ``point`` may be a scalar image radius (result in the polar frame,
    index order r, theta[, phi]) or an image-space vector (result in the
    Cartesian frame). ``C`` is taken as the tensor at the preimage in the
    matching frame. The output carries only the major-symmetry flag.
    """
    if C.dim != rmap.dim:
        raise ValueError("tensor and map dims differ")
    r, direction, frame = _split_point(point, rmap.dim)
    r_src = rmap.inverse_radius(r)
    jd = _jac_at(rmap, r_src, direction, frame, point)
    if jd.det <= 0:
        raise ValueError(f"push-forward requires det M > 0, got {jd.det}")
    Ct = np.einsum("ijkl,pl,qj->iqkp", C.entries, jd.M, jd.M) / jd.det
    return StiffnessTensor(
        dim=C.dim, entries=Ct, major_symmetric=C.major_symmetric, minor_symmetric=False
    )


def pushforward_density(rho, rmap, point):
    """Density transform rho / det(M), evaluated at an image-space point."""
    r, direction, frame = _split_point(point, rmap.dim)
    r_src = rmap.inverse_radius(r)
    jd = _jac_at(rmap, r_src, direction, frame, point)
    if jd.det <= 0:
        raise ValueError(f"push-forward requires det M > 0, got {jd.det}")
    return complex(rho) / jd.det


def compose_pushforward_check(C, map_a, map_b, point):
    """Max entrywise deviation between (B o A)_* C and B_* (A_* C).

    ``point`` is an image point of the composite map. Smooth radial maps
    should agree to ~1e-10; this is a consistency diagnostic for the
    chain rule through the push-forward.
    """
    comp = compose_maps(map_a, map_b)
    direct = pushforward_stiffness(C, comp, point)
    r, direction, frame = _split_point(point, comp.dim)
    mid_r = map_b.inverse_radius(r)
    mid_point = mid_r if direction is None else mid_r * direction
    staged = pushforward_stiffness(pushforward_stiffness(C, map_a, mid_point), map_b, point)
    return float(np.abs(direct.entries - staged.entries).max())


def _map_dict(rmap):
    if rmap.kind == "composite":
        return {"kind": "composite", "params": rmap.params, "dim": rmap.dim}
    return {"kind": rmap.kind, "params": rmap.params, "dim": rmap.dim}


def map_to_json(rmap):
    return json.dumps(_map_dict(rmap))


def _map_from_dict(d):
    kind, dim, params = d["kind"], int(d["dim"]), d.get("params", {})
    if kind == "blowup":
        return blowup_map(dim)
    if kind == "regularized":
        return regularized_blowup_map(params["h"], dim)
    if kind == "identity":
        return identity_map(dim, params.get("r_max", 2.0))
    if kind == "composite":
        return compose_maps(_map_from_dict(params["first"]), _map_from_dict(params["then"]))
    raise ValueError(f"unknown map kind {kind!r}")


def map_from_json(text):
    return _map_from_dict(json.loads(text))
