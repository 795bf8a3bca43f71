"""Dickman rho grid, xi solver, and the saddle-side integrals.

Oracles: bisection for xi (independent of the Newton path), a compensated
series for I(s), scipy quadrature for the Stieltjes form of xi_integral,
and dual-resolution marching for rho itself.
"""

import io
import math

import numpy as np
import pytest
from scipy.integrate import quad

from friabilis.dickman import (
    build_rho_grid,
    default_grid,
    export_grid_csv,
    int_exp,
    rho,
    rho_asymptotic,
    xi,
    xi_expansion,
    xi_integral,
    xi_prime,
)
from friabilis.errors import DomainError, RangeError


def bisect_xi(u):
    # pure bisection on g(x) = expm1(x) - u*x; g < 0 on (0, xi), g > 0 beyond.
    # xi(u) < 710 for any representable u, so doubling from 1 cannot overflow.
    lo, hi = 1e-12, 1.0
    while math.expm1(hi) - u * hi <= 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.expm1(mid) - u * mid <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def series_int_exp(s):
    # sum_{k>=1} s^k / (k * k!), summed with fsum; valid for moderate s
    terms, pw = [], 1.0
    for k in range(1, 250):
        pw *= s / k
        terms.append(pw / k)
    return math.fsum(terms)


def stieltjes_xi_integral(u):
    # direct quadrature of t * xi'(t); independent of the by-parts route
    def integrand(t):
        x = xi(t).xi
        return t * x / (1.0 + t * x - t)

    val, _ = quad(integrand, 1.0, u, epsabs=0, epsrel=1e-11, limit=300)
    return val


@pytest.fixture(scope="module")
def grid():
    return default_grid()


@pytest.fixture(scope="module")
def fine():
    return build_rho_grid(64.0, 1.0 / 400, quadrature_order=8)


# --- closed forms and grid invariants ---------------------------------------------


def test_rho_is_one_below_u_equals_one(grid):
    for u in (0.0, 0.25, 0.5, 0.999, 1.0):
        assert rho(u, grid) == 0.0


def test_rho_closed_form_on_1_2(grid):
    for u in (1.0 + 1e-9, 1.25, 1.5, 1.999, 2.0):
        assert rho(u, grid) == pytest.approx(math.log1p(-math.log(u)), abs=1e-12)
    assert math.exp(rho(1.5, grid)) == pytest.approx(0.594535, abs=1e-6)


def test_grid_node_invariants(grid):
    m = round(1.0 / grid.h)
    lr = grid.log_rho
    assert lr[0] == 0.0
    assert np.all(lr[: m + 1] == 0.0)
    for i in range(m, 2 * m + 1):
        u = i * grid.h
        assert abs(lr[i] - math.log1p(-math.log(u))) <= 1e-12
    # nonincreasing from u = 1 on
    assert np.all(np.diff(lr[m:]) <= 0.0)


def test_log_concave_ratio_decay(grid):
    m = round(1.0 / grid.h)
    lr = grid.log_rho
    for u in range(3, 100):
        i = u * m
        assert lr[i + m] - lr[i] < lr[i] - lr[i - m]


# --- marching accuracy -------------------------------------------------------------


def test_rho3_dual_marching_schemes():
    ga = build_rho_grid(4.0, 1.0 / 192, quadrature_order=6)
    gb = build_rho_grid(4.0, 1.0 / 400, quadrature_order=8)
    ra, rb = math.exp(rho(3.0, ga)), math.exp(rho(3.0, gb))
    assert ra == pytest.approx(rb, rel=1e-9)
    assert rb == pytest.approx(0.0486084, abs=5e-8)
    assert rb == pytest.approx(0.04860838829246, rel=1e-10)


def test_rho10_against_fine_grid(grid, fine):
    v = math.exp(rho(10.0, grid))
    assert v == pytest.approx(2.7701718377541e-11, rel=3e-9)
    assert v == pytest.approx(math.exp(rho(10.0, fine)), rel=3e-9)


def test_rho_deep_values_stay_finite(grid):
    # rho(128) ~ 1e-310 in linear space; the log grid must hold it cleanly
    lr = rho(128.0, grid)
    assert lr == pytest.approx(-712.94389, abs=1e-3)
    assert math.isfinite(lr)


def test_dde_residual_h_refinement():
    # centered difference u*rho'(u) + rho(u-1) scales like h^2, constant ~1.8
    def fitted_c(g, us):
        m = round(1.0 / g.h)
        lr = g.log_rho
        out = []
        for u in us:
            i = round(u * m)
            rp = (math.exp(lr[i + 1]) - math.exp(lr[i - 1])) / (2.0 * g.h)
            res = u * rp + math.exp(lr[i - m])
            out.append(abs(res) / (g.h ** 2 * math.exp(lr[i - m])))
        return np.array(out)

    us = [k / 8 for k in range(20, 65)]
    c64 = fitted_c(build_rho_grid(10.0, 1.0 / 64, quadrature_order=4), us)
    c128 = fitted_c(build_rho_grid(10.0, 1.0 / 128, quadrature_order=4), us)
    assert c64.max() < 2.5
    assert c128.max() < 2.5
    # raw residuals shrink 4x per h halving; the fitted constants stay put
    raw = np.median((c64 / 64.0 ** 2) / (c128 / 128.0 ** 2))
    assert 3.5 < raw < 4.5


def test_integral_identity_seeded(fine):
    # u*rho(u) = int_{u-1}^{u} rho(t) dt; integrate in scaled space
    rng = np.random.default_rng(20260817)
    for u in rng.uniform(2.2, 60.0, 100):
        base = rho(u, fine)
        val, _ = quad(
            lambda t: math.exp(rho(t, fine) - base),
            u - 1.0,
            u,
            epsabs=1e-30,
            epsrel=1e-12,
            limit=200,
        )
        assert abs(val / u - 1.0) <= 1e-9


def test_integral_identity_across_kink(fine):
    # interval straddles u = 1 where rho' jumps; split the quadrature there
    for u in (1.3, 1.7, 1.95):
        val, _ = quad(
            lambda t: math.exp(rho(t, fine)),
            u - 1.0,
            u,
            points=[1.0],
            epsabs=0,
            epsrel=1e-12,
            limit=200,
        )
        assert val == pytest.approx(u * math.exp(rho(u, fine)), rel=1e-10)


# --- domain handling ---------------------------------------------------------------


def test_rho_domain_and_range_errors(grid):
    with pytest.raises(DomainError):
        rho(-0.1, grid)
    with pytest.raises(RangeError):
        rho(grid.u_max * 1.01, grid)
    assert math.isfinite(rho(grid.u_max, grid))


def test_build_grid_validation():
    with pytest.raises(DomainError):
        build_rho_grid(501.0, 1.0 / 128)
    with pytest.raises(DomainError):
        build_rho_grid(10.0, 0.2)
    with pytest.raises(DomainError):
        build_rho_grid(10.0, 5e-5)
    with pytest.raises(DomainError):
        build_rho_grid(10.0, 1.0 / 128, quadrature_order=1)


def test_default_grid_is_cached():
    assert default_grid() is default_grid()
    g = default_grid()
    assert g.u_max == 128.0 and g.h == 1.0 / 128


# --- xi ----------------------------------------------------------------------------


def test_xi_at_one_is_zero():
    v = xi(1.0)
    assert v.xi == 0.0 and v.residual == 0.0


def test_xi_examples_against_bisection():
    v2 = xi(2.0)
    assert v2.xi == pytest.approx(1.25643, abs=1e-5)
    assert v2.xi == pytest.approx(bisect_xi(2.0), abs=1e-13)
    assert math.exp(v2.xi) == pytest.approx(1.0 + 2.0 * v2.xi, rel=1e-14)
    v1000 = xi(1000.0)
    assert v1000.xi == pytest.approx(bisect_xi(1000.0), rel=1e-13)


def test_xi_residual_invariant_sweep():
    for u in np.geomspace(1.0 + 1e-9, 1e8, 300):
        v = xi(u)
        assert v.residual <= 1e-12 * (1.0 + u * v.xi)
        assert v.xi > 0.0


def test_xi_matches_bisection_seeded():
    rng = np.random.default_rng(7)
    for lu in rng.uniform(math.log(1.001), math.log(1e6), 100):
        u = math.exp(lu)
        assert xi(u).xi == pytest.approx(bisect_xi(u), rel=1e-12, abs=1e-13)


def test_xi_monotone_and_edge_cases():
    us = np.geomspace(1.0001, 1e4, 200)
    vals = [xi(u).xi for u in us]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # u = e sits exactly where the naive Newton derivative vanishes
    assert xi(math.e).xi == pytest.approx(bisect_xi(math.e), rel=1e-12)
    with pytest.raises(DomainError):
        xi(0.999)


def test_xi_prime_matches_finite_differences():
    assert xi_prime(1.0) == 2.0
    for u in (1.5, 2.0, 10.0, 100.0):
        d = 1e-6 * u
        fd = (xi(u + d).xi - xi(u - d).xi) / (2.0 * d)
        assert xi_prime(u) == pytest.approx(fd, rel=1e-6)
    # u*xi'(u) decreases toward 1 from above
    vals = [u * xi_prime(u) for u in (2.0, 5.0, 20.0, 100.0, 1000.0)]
    assert all(a > b > 1.0 for a, b in zip(vals, vals[1:]))


def test_xi_expansion_values():
    u = math.exp(math.e)
    assert xi_expansion(u) == pytest.approx(math.e + 1.0 + 1.0 / math.e, rel=1e-12)
    assert xi_expansion(100.0) == pytest.approx(6.46397, abs=1e-5)
    with pytest.raises(DomainError):
        xi_expansion(9.9)


def test_xi_expansion_error_band():
    for u in (1e3, 1e4, 1e6):
        l, ll = math.log(u), math.log(math.log(u))
        coef = 1.0 if u < 1e4 else 0.5
        assert abs(xi(u).xi - xi_expansion(u)) <= coef * (ll / l) ** 2


# --- I(s) and xi_integral ----------------------------------------------------------


def test_int_exp_basics():
    assert int_exp(0.0) == 0.0
    assert int_exp(1.0) == pytest.approx(1.31790, abs=1e-5)
    assert int_exp(1.0) == pytest.approx(series_int_exp(1.0), rel=1e-13)
    with pytest.raises(DomainError):
        int_exp(-0.5)


def test_int_exp_dual_method_and_seam():
    for s in (10.0, 29.9, 30.0, 30.1, 40.0):
        qv, _ = quad(lambda v: math.expm1(v) / v, 0.0, s, epsabs=0, epsrel=1e-12, limit=300)
        assert int_exp(s) == pytest.approx(qv, rel=1e-10)


def test_int_exp_increasing_and_convex():
    s = np.linspace(0.0, 40.0, 81)
    v = np.array([int_exp(x) for x in s])
    d1 = np.diff(v)
    assert np.all(d1 > 0.0)
    assert np.all(np.diff(d1) > 0.0)


def test_xi_integral_values():
    assert xi_integral(1.0) == 0.0
    assert xi_integral(2.0) == pytest.approx(stieltjes_xi_integral(2.0), rel=1e-9)
    assert xi_integral(10.0) == pytest.approx(stieltjes_xi_integral(10.0), rel=1e-9)
    with pytest.raises(DomainError):
        xi_integral(0.5)


def test_xi_integral_equals_int_exp_of_xi():
    # substitution v = xi(t) maps int_1^u t xi'(t) dt onto I(xi(u)) exactly
    for u in (1.5, 2.0, 5.0, 10.0, 50.0, 100.0, 300.0):
        assert xi_integral(u) == pytest.approx(int_exp(xi(u).xi), rel=1e-12)


# --- the asymptotic ----------------------------------------------------------------


def test_rho_asymptotic_bands(grid):
    r10 = math.exp(rho_asymptotic(10.0) - rho(10.0, grid))
    r50 = math.exp(rho_asymptotic(50.0) - rho(50.0, grid))
    assert 0.9 < r10 < 1.1
    assert 0.97 < r50 < 1.03
    assert r10 == pytest.approx(1.0069562, abs=2e-4)
    assert r50 == pytest.approx(1.0014402, abs=2e-4)
    with pytest.raises(DomainError):
        rho_asymptotic(1.5)


def test_rho_asymptotic_trend(grid):
    gaps = [abs(math.exp(rho_asymptotic(u) - rho(u, grid)) - 1.0) for u in (10.0, 20.0, 40.0, 80.0)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


# --- export ------------------------------------------------------------------------


def test_export_grid_csv_roundtrip(grid):
    fh = io.StringIO()
    export_grid_csv(grid, fh)
    lines = fh.getvalue().splitlines()
    assert lines[0] == "u,log_rho"
    assert len(lines) == len(grid.log_rho) + 1
    u0, lr0 = lines[1].split(",")
    assert float(u0) == 0.0 and float(lr0) == 0.0
    mid = len(grid.log_rho) // 2
    um, lrm = lines[mid + 1].split(",")
    assert float(um) == mid * grid.h
    assert float(lrm) == grid.log_rho[mid]
