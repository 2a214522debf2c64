"""Fundamental solutions and circle layer potentials.

Oracles: an independent Taylor-series evaluation of the 3D tensor, the
Navier PDE residual by high-order finite differences, finite-difference
tractions for the Xi kernel, adaptive quadrature for single-layer rows,
and the interior Calderon identity for the assembled operators.
"""

import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from elastocloak import (
    IsotropicMedium,
    asymptotic_gap_2d,
    circle_quadrature,
    dl_potential,
    eta_constant,
    green_omega,
    green_static,
    green_traction,
    layer_operators,
    sl_potential,
    solve_exterior_cavity,
)

BG = IsotropicMedium(1.0, 1.0, 1.0)
OMEGA = 1.0


def series_pi_3d(x, y, omega, medium, n_terms=40):
    """Oracle: entire Taylor series of the 3D dynamic tensor.

    Coefficients follow from expanding exp(ikd)/(4 pi d) and applying
    grad grad termwise; the medium enters through the (n+2)-th powers of
    the wavenumbers.
    """
    lam, mu = medium.lam, medium.mu
    kp = omega / np.sqrt(lam + 2 * mu)
    ks = omega / np.sqrt(mu)
    u = np.asarray(x, float) - np.asarray(y, float)
    d = np.linalg.norm(u)
    A = np.zeros((3, 3), dtype=complex)
    for n in range(n_terms):
        base = 1j**n / ((n + 2) * math.factorial(n) * omega**2)
        cI = base * ((n + 1) * ks ** (n + 2) + kp ** (n + 2)) * d ** (n - 1)
        cU = base * (n - 1) * (ks ** (n + 2) - kp ** (n + 2)) * d ** (n - 3)
        A += (cI * np.eye(3) - cU * np.outer(u, u)) / (4 * np.pi)
    return A


# ---------------------------------------------------------------------------
# point kernels


@pytest.mark.parametrize("dim", [2, 3])
def test_reciprocity(dim):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-1.5, 1.5, dim)
        y = rng.uniform(-1.5, 1.5, dim)
        if np.linalg.norm(x - y) < 1e-2:
            continue
        G = green_omega(x, y, OMEGA, BG, dim)
        Gt = green_omega(y, x, OMEGA, BG, dim)
        worst = max(worst, float(np.abs(G - Gt.T).max()))
    assert worst < 1e-12


def test_series_3d_vs_closed_form():
    x = np.array([0.1, 0.2, 0.3])
    u = 0.5 * np.array([0.6, 0.48, 0.64]) / np.linalg.norm([0.6, 0.48, 0.64])
    y = x - u
    closed = green_omega(x, y, OMEGA, BG, 3)
    assert np.abs(series_pi_3d(x, y, OMEGA, BG) - closed).max() < 1e-10


def test_3d_small_separation_structure():
    # leading 1/d terms follow the static tensor; the remainder tends to
    # the O(omega) constant i omega (2 ks^3 + kp^3) / (12 pi omega^2)
    lam, mu = BG.lam, BG.mu
    kp = OMEGA / np.sqrt(lam + 2 * mu)
    ks = OMEGA / np.sqrt(mu)
    const = 1j * (2 * ks**3 + kp**3) / (12 * np.pi * OMEGA**2) * OMEGA**2 / OMEGA**2
    const = 1j * (2 * ks**3 + kp**3) / (12 * np.pi)
    x = np.array([0.1, -0.2, 0.3])
    gaps = []
    for d in (2e-3, 1e-3):
        y = x - d * np.array([1.0, 0, 0])
        gap = green_omega(x, y, OMEGA, BG, 3) - green_static(x, y, BG, 3)
        gaps.append(gap)
        assert np.abs(gap).max() < 0.2  # remainder stays O(1)
    # Richardson in d (next correction is O(d)) onto the constant
    extr = 2 * gaps[1] - gaps[0]
    assert abs(extr[1, 1] - const) < 1e-4
    assert abs(extr[0, 0] - const) < 1e-4


def test_static_2d_unit_separation_drops_log():
    med = IsotropicMedium(1.0, 1.0)
    u = np.array([0.6, 0.8])
    x = np.array([0.3, 0.1])
    G = green_static(x, x - u, med, 2)
    expected = (1.0 / (4 * np.pi)) * (2.0 / 3.0) * np.outer(u, u)
    np.testing.assert_allclose(G, expected, atol=1e-15)


def test_static_3d_homogeneity():
    x = np.array([0.2, 0.5, -0.3])
    y = np.array([-0.4, 0.1, 0.6])
    for t in (2.0, 5.0):
        np.testing.assert_allclose(
            green_static(t * x, t * y, BG, 3), green_static(x, y, BG, 3) / t, rtol=1e-13
        )


def test_coincident_points_error():
    x = np.array([0.1, 0.2])
    with pytest.raises(ValueError):
        green_omega(x, x, OMEGA, BG, 2)
    with pytest.raises(ValueError):
        green_static(x, x, BG, 2)


def navier_residual_fd(dim, x, y, omega, medium, step):
    """Second-order FD residual of mu Lap + (lam+mu) grad div + omega^2 rho."""
    lam, mu, rho = medium.lam, medium.mu, medium.rho
    E = np.eye(dim)

    def P(z):
        return green_omega(z, y, omega, medium, dim)

    P0 = P(x)
    lap = sum((P(x + step * E[j]) - 2 * P0 + P(x - step * E[j])) / step**2
              for j in range(dim))
    gd = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for m in range(dim):
            if i == m:
                d2 = (P(x + step * E[i]) - 2 * P0 + P(x - step * E[i])) / step**2
            else:
                d2 = (
                    P(x + step * (E[i] + E[m]))
                    - P(x + step * (E[i] - E[m]))
                    - P(x - step * (E[i] - E[m]))
                    + P(x - step * (E[i] + E[m]))
                ) / (4 * step**2)
            gd[i, :] += d2[m, :]
    return mu * lap + (lam + mu) * gd + omega**2 * rho * P0, P0


@pytest.mark.parametrize("dim", [2, 3])
def test_navier_residual_of_columns(dim):
    # Richardson extrapolation of the 2nd-order residual gives a 4th-order
    # probe, resolving the contract below FD truncation noise
    rng = np.random.default_rng(1)
    y = np.zeros(dim)
    for _ in range(3):
        x = rng.uniform(0.6, 1.2) * _unit(rng, dim)
        r_h, P0 = navier_residual_fd(dim, x, y, OMEGA, BG, 4e-3)
        r_h2, _ = navier_residual_fd(dim, x, y, OMEGA, BG, 2e-3)
        resid = (4.0 * r_h2 - r_h) / 3.0
        rel = float(np.abs(resid).max() / np.abs(OMEGA**2 * P0).max())
        assert rel < 1e-6


def _unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("dim,omega", [(2, OMEGA), (3, OMEGA), (2, 0.0), (3, 0.0)])
def test_traction_kernel_matches_fd(dim, omega):
    rng = np.random.default_rng(2)
    lam, mu = BG.lam, BG.mu
    x = rng.uniform(-1, 1, dim)
    y = x + 0.8 * _unit(rng, dim)
    nu = _unit(rng, dim)
    Xi = green_traction(x, y, nu, omega, BG, dim)
    h = 1e-6
    fd = np.zeros((dim, dim), dtype=complex)
    for l in range(dim):
        def v(z):
            G = green_omega(x, z, omega, BG, dim) if omega > 0 else green_static(x, z, BG, dim)
            return G[:, l]

        grad = np.zeros((dim, dim), dtype=complex)
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h
            grad[:, j] = (v(y + e) - v(y - e)) / (2 * h)
        div = np.trace(grad)
        for i in range(dim):
            fd[l, i] = lam * nu[i] * div + mu * sum(
                nu[j] * (grad[i, j] + grad[j, i]) for j in range(dim)
            )
    assert np.abs(Xi - fd).max() < 1e-8


# ---------------------------------------------------------------------------
# small-separation expansion


def test_eta_closed_formula():
    for omega, med in ((1.0, BG), (0.7, IsotropicMedium(2.0, 0.5)), (3.0, BG)):
        lam, mu = med.lam, med.mu
        b1 = (lam + 3 * mu) / (mu * (lam + 2 * mu))
        b2 = (lam + mu) / (mu * (lam + 2 * mu))
        closed = -(1.0 / (4 * np.pi)) * (
            b1 * (np.log(omega / 2) + np.euler_gamma - 0.5j * np.pi)
            + 0.5 * b2
            - 0.5 * (np.log(mu) / mu + np.log(lam + 2 * mu) / (lam + 2 * mu))
        )
        assert abs(eta_constant(omega, med) - closed) < 1e-14


def test_eta_is_the_gap_limit():
    # Pi_omega - Pi_0 evaluated directly (no series) tends to eta * I
    x = np.array([0.3, 0.4])
    d = 1e-3
    y = x - d * np.array([np.cos(0.5), np.sin(0.5)])
    gap = green_omega(x, y, OMEGA, BG, 2) - green_static(x, y, BG, 2)
    eta = eta_constant(OMEGA, BG)
    assert abs(gap[0, 0] - eta) < 1e-6
    assert abs(gap[1, 1] - eta) < 1e-6


def test_gap_remainder_rate_dyadic():
    x = np.array([0.3, 0.4])
    direction = np.array([np.cos(0.5), np.sin(0.5)])
    Ks = []
    for d in (1e-3, 1e-4):
        gap = asymptotic_gap_2d(x, x - d * direction, OMEGA, BG)
        Ks.append(float(np.abs(gap).max() / (d**2 * abs(np.log(d)))))
    assert max(Ks) / min(Ks) < 2.0


def test_gap_small_omega_log_slope():
    lam, mu = BG.lam, BG.mu
    b1 = (lam + 3 * mu) / (mu * (lam + 2 * mu))
    e1 = eta_constant(1e-3, BG).real
    e2 = eta_constant(1e-6, BG).real
    slope = (e2 - e1) / (np.log(1e-6 / 2) - np.log(1e-3 / 2))
    assert slope == pytest.approx(-b1 / (4 * np.pi), rel=1e-10)
    assert e2 > e1 > 0  # -log(omega/2) dominates and is positive


def test_gap_diagonal_entries_equal_at_tiny_separation():
    # the isotropic eta I part dominates: residual anisotropy is O(d^2 ln d)
    x = np.array([0.3, 0.4])
    d = 1e-5
    y = x - d * np.array([np.cos(0.6), np.sin(0.6)])
    gap_full = asymptotic_gap_2d(x, y, OMEGA, BG) + eta_constant(OMEGA, BG) * np.eye(2)
    assert abs(gap_full[0, 0] - gap_full[1, 1]) < 1e-10


def test_series_and_direct_paths_agree_in_overlap():
    # the series path (used near the diagonal) must join the Hankel path
    from elastocloak.kernels import _Radial2D

    pack = _Radial2D(OMEGA, BG)
    for d in (0.05, 0.2, 0.5, 0.9):
        a_s = pack._alpha_log(np.array(d)) * np.log(d) + pack._alpha_smooth(np.array(d))
        b_s = pack._beta_log(np.array(d)) * np.log(d) + pack._beta_smooth(np.array(d))
        a_d, b_d = pack._direct_alpha_beta(np.array(d))
        assert abs(a_s - a_d) < 1e-12
        assert abs(b_s - b_d) < 1e-12
        for cs, cd in zip(
            (pack.s2 / d**2 + pack._c2_log(np.array(d)) * np.log(d) + pack._c2_smooth(np.array(d)),
             pack._c3_log(np.array(d)) * np.log(d) + pack._c3_smooth(np.array(d)),
             pack.s4 / d**2 + pack._c4_log(np.array(d)) * np.log(d) + pack._c4_smooth(np.array(d))),
            pack._direct_cs(np.array(d)),
        ):
            assert abs(cs - cd) < 1e-10


# ---------------------------------------------------------------------------
# circle quadrature and layer operators


def test_circle_quadrature_invariants():
    q = circle_quadrature(2.0, 64)
    assert abs(q.weights.sum() - 2 * np.pi * 2.0) < 1e-13
    np.testing.assert_allclose(np.linalg.norm(q.normals, axis=1), 1.0, atol=1e-14)
    with pytest.raises(ValueError):
        circle_quadrature(2.0, 33)


def test_single_layer_row_against_adaptive_quadrature():
    N = 64
    q = circle_quadrature(2.0, N)
    ops = layer_operators(q, OMEGA, BG)

    def phi(s):
        return np.array([np.cos(s) + 0.3 * np.sin(2 * s), 0.5 + np.sin(s)])

    ph = np.array([phi(s) for s in q.angles]).reshape(-1)
    i0 = 5
    t0 = q.angles[i0]
    x0 = q.nodes[i0]

    def integrand(s, comp, part):
        if abs(np.sin((t0 - s) / 2)) < 1e-14:
            return 0.0
        y = 2.0 * np.array([np.cos(s), np.sin(s)])
        v = (green_omega(x0, y, OMEGA, BG, 2) @ phi(s))[comp] * 2.0
        return v.real if part == "re" else v.imag

    row = (ops.S @ ph).reshape(N, 2)[i0]
    for comp in range(2):
        val = 0.0
        for part in ("re", "im"):
            out, _ = quad(integrand, t0 - np.pi, t0 + np.pi, args=(comp, part),
                          points=[t0], limit=400)
            val += out if part == "re" else 1j * out
        assert abs(val - row[comp]) < 1e-9


def test_static_single_layer_symmetric():
    q = circle_quadrature(2.0, 64)
    ops = layer_operators(q, 0.0, BG)
    assert np.abs(ops.S - ops.S.T).max() < 1e-12


def test_spectral_convergence_of_matvec():
    # error reduction per doubling must beat algebraic order 4
    def density(t):
        return np.stack([np.cos(3 * t), np.sin(2 * t) + 0.2], axis=-1)

    ref_N = 256
    qr = circle_quadrature(2.0, ref_N)
    opr = layer_operators(qr, OMEGA, BG)
    ref_S = (opr.S @ density(qr.angles).reshape(-1)).reshape(ref_N, 2)
    ref_K = (opr.K @ density(qr.angles).reshape(-1)).reshape(ref_N, 2)
    errs_S, errs_K = [], []
    for N in (16, 32):
        q = circle_quadrature(2.0, N)
        ops = layer_operators(q, OMEGA, BG)
        S_v = (ops.S @ density(q.angles).reshape(-1)).reshape(N, 2)
        K_v = (ops.K @ density(q.angles).reshape(-1)).reshape(N, 2)
        stride = ref_N // N
        errs_S.append(float(np.abs(S_v - ref_S[::stride]).max()))
        errs_K.append(float(np.abs(K_v - ref_K[::stride]).max()))
    assert errs_S[0] / max(errs_S[1], 1e-15) > 16.0
    assert errs_K[0] / max(errs_K[1], 1e-15) > 16.0


def test_double_layer_jump_relation():
    N = 1024
    q = circle_quadrature(2.0, N)
    t = q.angles
    density = np.stack([np.cos(t) + 0.3 * np.sin(2 * t), 0.5 + np.sin(t)], axis=1)
    i0 = 11
    x0 = q.nodes[i0]
    errs = []
    for eps in (0.04, 0.02):
        out = dl_potential(q, density, (1 + eps) * x0, OMEGA, BG)
        inn = dl_potential(q, density, (1 - eps) * x0, OMEGA, BG)
        jump = out - inn
        errs.append(float(np.abs(jump - density[i0]).max()))
    assert errs[1] < errs[0]  # first-order approach to the jump
    assert errs[1] < 0.05


@pytest.mark.parametrize("omega", [OMEGA, 0.0])
def test_calderon_identity_spectral(omega):
    src = np.array([3.0, 1.0])
    qv = np.array([0.7, -0.4])
    errs = []
    for N in (32, 64):
        q = circle_quadrature(2.0, N)
        ops = layer_operators(q, omega, BG)
        u = np.zeros((N, 2), dtype=complex)
        T = np.zeros((N, 2), dtype=complex)
        for i in range(N):
            G = green_omega(q.nodes[i], src, omega, BG, 2) if omega > 0 \
                else green_static(q.nodes[i], src, BG, 2)
            u[i] = G @ qv
            Xi = green_traction(src, q.nodes[i], q.normals[i], omega, BG, 2)
            T[i] = Xi.T @ qv
        resid = 0.5 * u.reshape(-1) + ops.K @ u.reshape(-1) - ops.S @ T.reshape(-1)
        errs.append(float(np.abs(resid).max()))
    assert errs[1] < 1e-7
    assert errs[1] < errs[0]


def test_sl_potential_point_source_consistency():
    # SL with the traction of a point-source field reproduces the Betti
    # representation together with DL (interior identity)
    N = 256
    q = circle_quadrature(2.0, N)
    src = np.array([3.0, 1.0])
    qv = np.array([0.7, -0.4])
    u = np.array([green_omega(p, src, OMEGA, BG, 2) @ qv for p in q.nodes])
    T = np.array(
        [green_traction(src, p, nrm, OMEGA, BG, 2).T @ qv
         for p, nrm in zip(q.nodes, q.normals)]
    )
    x_int = np.array([0.4, -0.3])
    rep = sl_potential(q, T, x_int, OMEGA, BG) - dl_potential(q, u, x_int, OMEGA, BG)
    expected = green_omega(x_int, src, OMEGA, BG, 2) @ qv
    assert np.abs(rep - expected).max() < 1e-12


def test_operator_export_roundtrip(tmp_path):
    q = circle_quadrature(2.0, 16)
    ops = layer_operators(q, OMEGA, BG)
    prefix = str(tmp_path / "ops")
    ops.export(prefix)
    header = json.loads((tmp_path / "ops.json").read_text())
    assert header == {"n": 16, "radius": 2.0, "omega": 1.0}
    S2 = np.fromfile(tmp_path / "ops_S.bin", dtype=np.complex128).reshape(32, 32)
    np.testing.assert_array_equal(S2, ops.S)


# ---------------------------------------------------------------------------
# exterior cavity


def test_cavity_zero_traction_zero_field():
    sol = solve_exterior_cavity(0.1, {0: (0.0, 0.0), 2: (0.0, 0.0)}, OMEGA, BG)
    vals = sol.displacement(2.0)
    for v in vals.values():
        assert np.abs(v).max() == 0.0


def test_cavity_far_trace_scaling_slope():
    tractions = {0: (1.0, 0.3), 1: (0.5, 0.2), 2: (0.3, 0.1), 3: (0.2, 0.4)}
    hs = [0.2, 0.1, 0.05, 0.025]
    norms = [solve_exterior_cavity(h, tractions, OMEGA, BG).boundary_norm(2.0) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(norms), 1)[0]
    assert 0.7 <= slope <= 1.3


def test_cavity_mode0_pressure_is_curl_free():
    sol = solve_exterior_cavity(0.1, {0: (1.0, 0.0)}, OMEGA, BG)
    coeffs = {pol: c for _, pol, c in sol.fields[0].terms}
    assert coeffs["S"] == 0.0
    assert coeffs["P"] != 0.0


def test_cavity_radiation_decay():
    # (d/dr - i k) applied to each outgoing part decays like r^(-3/2)
    sol = solve_exterior_cavity(0.1, {1: (0.4, 0.7)}, OMEGA, BG)
    from elastocloak.wavefields import wavenumbers

    kp, ks = wavenumbers(BG, OMEGA)
    for pol, k in (("P", kp), ("S", ks)):
        part = sol.part_field(1, pol)
        rs = np.array([30.0, 60.0, 120.0])
        vals = []
        for r in rs:
            h = 1e-5
            up = np.array(part.displacement_polar(r + h))
            um = np.array(part.displacement_polar(r - h))
            u0 = np.array(part.displacement_polar(r))
            resid = (up - um) / (2 * h) - 1j * k * u0
            vals.append(np.linalg.norm(resid))
        slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
        assert abs(slope + 1.5) < 0.2
