"""Calibration of the certification engine against closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxmodes.special import DomainError, LatticeBasis, log_abs_sigma_tilde, log_sigma, log_sin
from fluxmodes.verify import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    DecayHint,
    ProbeRegion,
    annihilation_residual,
    growth_estimate,
    integrate_disc,
    l2_norm_squared,
    laplacian_residual,
    laurent_coefficient,
    loop_flux,
)


class FakePsi:
    """Minimal wave-function protocol object for synthetic calibrations."""

    def __init__(self, log_abs, value=None, sites=(), hint=None, spin="+", vector_potential=None):
        self._log_abs = log_abs
        self._value = value
        self._sites = tuple(sites)
        self.decay_hint = hint
        self.spin = spin
        self._vp = vector_potential

    def log_abs(self, z):
        return self._log_abs(np.asarray(z, dtype=complex))

    def value(self, z):
        return self._value(np.asarray(z, dtype=complex))

    def vector_potential(self, z):
        return self._vp(np.asarray(z, dtype=complex))

    def singular_sites(self, r):
        return [(p, e) for p, e in self._sites if abs(p) <= r]


# ---------------------------------------------------------------------------
# disc quadrature calibrations


@pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
def test_unit_disc_power_integral(theta):
    value, err = integrate_disc(
        lambda z: -theta * np.log(np.abs(z)),
        [(0.0, -theta)],
        radius=1.0,
        abs_tol=1e-9,
        rel_tol=1e-7,
    )
    exact = math.pi / (1.0 - theta)
    assert abs(value - exact) < 1e-5 * exact
    assert err < 1e-4 * exact


def test_disc_integral_offcenter_site():
    # site away from the origin, exact value by translation invariance of
    # the integrand support: integral over |z - w| <= 1 of |z - w|^-1
    w = 0.4 + 0.3j

    def la(z):
        return -0.5 * np.log(np.abs(z - w))

    # integrate over a disc large enough to contain the unit disc around w,
    # with the integrand cut off outside |z - w| <= 1
    def la_cut(z):
        d = np.abs(z - w)
        out = -0.5 * np.log(d)
        return np.where(d <= 1.0, out, -np.inf)

    value, _ = integrate_disc(la_cut, [(w, -0.5)], radius=2.0, rel_tol=1e-6)
    assert abs(value - 2.0 * math.pi) < 2e-3


def test_disc_threads_agree():
    f = lambda z: -0.25 * np.log(np.abs(z)) - np.abs(z) ** 2
    v1, _ = integrate_disc(f, [(0.0, -0.25)], radius=2.0, threads=1)
    v2, _ = integrate_disc(f, [(0.0, -0.25)], radius=2.0, threads=2)
    assert v1 == pytest.approx(v2, rel=1e-12)


# ---------------------------------------------------------------------------
# full-plane quadrature


def test_gaussian_plane_norm():
    psi = FakePsi(lambda z: -0.5 * math.pi * np.abs(z) ** 2, hint=DecayHint("gaussian", math.pi / 2))
    res = l2_norm_squared(psi, abs_tol=1e-10, rel_tol=1e-8)
    assert res.flag == CONVERGENT
    assert res.value == pytest.approx(1.0, rel=1e-7)
    # partial integrals are nondecreasing
    partials = [s for _, s in res.radii_trace]
    assert all(b >= a - 1e-15 for a, b in zip(partials, partials[1:]))


def test_gaussian_with_site():
    # |psi| = |z|^-0.5 exp(-|z|^2 / 2); integral of r^-1 e^{-r^2} dA = pi^{3/2}
    psi = FakePsi(
        lambda z: -0.5 * np.log(np.abs(z)) - 0.5 * np.abs(z) ** 2,
        sites=[(0.0, -0.5)],
        hint=DecayHint("gaussian", 0.5),
    )
    res = l2_norm_squared(psi, abs_tol=1e-10, rel_tol=1e-7)
    assert res.flag == CONVERGENT
    assert res.value == pytest.approx(math.pi**1.5, rel=1e-6)


def test_algebraic_tail_extrapolation():
    # |psi|^2 = (1 + r^2)^-1.2, plane integral pi / 0.2
    psi = FakePsi(lambda z: -0.6 * np.log1p(np.abs(z) ** 2), hint=DecayHint("power", 1.2))
    res = l2_norm_squared(psi, abs_tol=1e-9, rel_tol=1e-6)
    assert res.flag == CONVERGENT
    assert res.value == pytest.approx(5.0 * math.pi, rel=1e-5)
    assert res.radii_trace[-1][0] <= 512.0  # certified before the cap


def test_divergent_power_tail():
    psi = FakePsi(lambda z: -0.7 * np.log1p(np.abs(z)), hint=DecayHint("power", 0.7))
    res = l2_norm_squared(psi)
    assert res.flag == DIVERGENT
    assert res.error_estimate == math.inf


def test_divergent_growing_mode():
    psi = FakePsi(lambda z: 0.1 * np.abs(z) ** 2, hint=None)
    res = l2_norm_squared(psi)
    assert res.flag == DIVERGENT


def test_inconclusive_borderline():
    # |psi|^2 ~ r^-2: logarithmically divergent, increments neither grow by
    # 1.5 nor stagnate, and there is no usable hint
    psi = FakePsi(lambda z: -np.log1p(np.abs(z)), hint=None)
    res = l2_norm_squared(psi)
    assert res.flag == INCONCLUSIVE


def test_non_integrable_site_rejected():
    psi = FakePsi(lambda z: -1.2 * np.log(np.abs(z)), sites=[(0.0, -1.2)])
    with pytest.raises(DomainError):
        l2_norm_squared(psi)


# ---------------------------------------------------------------------------
# residual reports


def _landau_plus(g):
    return FakePsi(
        log_abs=lambda z: -0.5 * g * np.abs(z) ** 2,
        value=lambda z: np.exp(-0.5 * g * np.abs(z) ** 2),
        vector_potential=lambda z: 1j * g * z,
        spin="+",
    )


def test_annihilation_order_two():
    rep = annihilation_residual(_landau_plus(1.0), ProbeRegion(0.0, 0.5, 1.5))
    assert rep.residual_norms[0] < 1e-3
    assert 1.8 <= rep.observed_order <= 2.2


def test_annihilation_detects_wrong_potential():
    psi = _landau_plus(1.0)
    psi._vp = lambda z: 0.5j * np.asarray(z, complex)  # wrong field strength
    rep = annihilation_residual(psi, ProbeRegion(0.0, 0.5, 1.5))
    assert rep.residual_norms[-1] > 1e-2
    assert rep.observed_order < 0.5


def test_annihilation_spin_minus():
    # psi = conj(z) exp(-g |z|^2 / 2) solves the spin-down equation for the
    # downward uniform field, a = (g y, -g x)
    g = 1.0
    psi = FakePsi(
        log_abs=lambda z: np.log(np.abs(z)) - 0.5 * g * np.abs(z) ** 2,
        value=lambda z: np.conj(z) * np.exp(-0.5 * g * np.abs(z) ** 2),
        vector_potential=lambda z: -1j * g * z,
        spin="-",
    )
    rep = annihilation_residual(psi, ProbeRegion(0.0, 0.5, 1.5))
    assert rep.residual_norms[0] < 1e-3
    assert 1.8 <= rep.observed_order <= 2.2


def test_annihilation_site_clearance():
    psi = _landau_plus(1.0)
    psi._sites = ((0.89 + 0.11j, -0.5),)  # next to a probe point
    with pytest.raises(DomainError):
        annihilation_residual(psi, ProbeRegion(0.0, 0.5, 1.5))


class FakePhi:
    def __init__(self, value, xi0, sites=()):
        self._value = value
        self.uniform_flux_density = xi0
        self._sites = tuple(sites)

    def value(self, z):
        return self._value(np.asarray(z, dtype=complex))

    def singular_sites(self, r):
        return [(p, e) for p, e in self._sites if abs(p) <= r]


def test_laplacian_residual():
    # phi = (pi xi0 / 2) |z|^2 + 0.3 ln|z - 2|: Laplacian 2 pi xi0 away from 2
    xi0 = 0.5
    phi = FakePhi(
        lambda z: 0.5 * math.pi * xi0 * np.abs(z) ** 2 + 0.3 * np.log(np.abs(z - 2.0)),
        xi0,
        sites=[(2.0, 0.3)],
    )
    rep = laplacian_residual(phi, ProbeRegion(0.0, 0.3, 0.9))
    assert rep.residual_norms[0] < 1e-2
    assert 1.7 <= rep.observed_order <= 2.3


# ---------------------------------------------------------------------------
# contour checks


def test_laurent_simple_pole():
    a = laurent_coefficient(lambda z: 1.0 / z, 0.0, -1, radius=0.7)
    assert a == pytest.approx(1.0, abs=1e-12)


def test_laurent_exponential():
    a2 = laurent_coefficient(np.exp, 0.0, 2, radius=1.3)
    assert a2 == pytest.approx(0.5, abs=1e-12)
    a1 = laurent_coefficient(lambda z: np.sin(math.pi * z) / math.pi, 0.0, 1, radius=0.9)
    assert a1 == pytest.approx(1.0, abs=1e-12)


def test_laurent_guards():
    with pytest.raises(DomainError):
        laurent_coefficient(np.exp, 0.0, 0, radius=1.0, samples=32)
    with pytest.raises(DomainError):
        laurent_coefficient(np.exp, 0.0, 0, radius=-1.0)


@settings(max_examples=20, deadline=None)
@given(
    st.lists(
        st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=6,
    ),
    st.integers(min_value=-5, max_value=5),
)
def test_laurent_polynomial_coefficients(coeffs, n):
    f = lambda z: sum(c * z**k for k, c in enumerate(coeffs))
    a = laurent_coefficient(f, 0.0, n, radius=1.1)
    expected = coeffs[n] if 0 <= n < len(coeffs) else 0.0
    assert abs(a - expected) < 1e-9 * (1.0 + sum(abs(c) for c in coeffs))


class FakeField:
    """Vector potential of point fluxes plus a uniform component."""

    def __init__(self, sites, xi0=0.0):
        self.sites = sites
        self.xi0 = xi0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = 1j * math.pi * self.xi0 * z
        for w, th in self.sites:
            out = out + 1j * th / np.conj(z - w)
        return out

    def singular_sites(self, r):
        return [(w, -th) for w, th in self.sites if abs(w) <= r]


def test_loop_flux_single_site():
    field = FakeField([(0.3 + 0.2j, 0.3)])
    got = loop_flux(field, (0.0, 0.0, 1.0, 1.0))
    assert got == pytest.approx(2.0 * math.pi * 0.3, abs=1e-7)


def test_loop_flux_two_sites_and_uniform():
    field = FakeField([(0.25 + 0.5j, 0.3), (-0.5 - 0.25j, 0.45)], xi0=0.2)
    rect = (-1.0, -1.0, 1.0, 1.0)
    area = 4.0
    expected = 2.0 * math.pi * 0.75 + 2.0 * math.pi * 0.2 * area
    assert loop_flux(field, rect) == pytest.approx(expected, abs=1e-6)


def test_loop_flux_excludes_outside_site():
    field = FakeField([(0.3 + 0.2j, 0.3), (5.0 + 0.0j, 0.9)])
    got = loop_flux(field, (0.0, 0.0, 1.0, 1.0))
    assert got == pytest.approx(2.0 * math.pi * 0.3, abs=1e-7)


def test_loop_flux_boundary_site_rejected():
    field = FakeField([(1.0 + 0.5j, 0.3)])
    with pytest.raises(DomainError):
        loop_flux(field, (0.0, 0.0, 1.0, 1.0))


# ---------------------------------------------------------------------------
# growth estimation


def test_growth_exponential():
    est = growth_estimate(np.exp, np.geomspace(2.0, 60.0, 14))
    assert est.order == pytest.approx(1.0, abs=0.03)
    assert est.type == pytest.approx(1.0, rel=0.05)
    assert est.confidence == "high"


def test_growth_sigma_tilde_square():
    square = LatticeBasis(1.0, 1.0j)
    est = growth_estimate(
        lambda z: log_abs_sigma_tilde(square, z),
        np.geomspace(5.0, 40.0, 12),
        log_scale=True,
    )
    assert est.order == pytest.approx(2.0, abs=0.05)
    assert est.type == pytest.approx(math.pi / 2.0, rel=0.05)


def test_growth_gaussian_twist():
    # exp(-z^2) sigma(z) on the square lattice: nu = 0, so the order-2 type
    # is |0 - 1| + pi/2
    square = LatticeBasis(1.0, 1.0j)

    def la(z):
        z = np.asarray(z, dtype=complex)
        return np.real(-z**2 + log_sigma(square, z))

    est = growth_estimate(la, np.geomspace(4.0, 32.0, 12), log_scale=True)
    assert est.order == pytest.approx(2.0, abs=0.05)
    assert est.type == pytest.approx(1.0 + math.pi / 2.0, rel=0.05)


def test_growth_order_three():
    def la(z):
        z = np.asarray(z, dtype=complex)
        return np.real(log_sin(math.pi * z**3)) - 2.0 * np.log(np.abs(z))

    est = growth_estimate(la, np.geomspace(1.5, 14.0, 12), log_scale=True)
    assert est.order == pytest.approx(3.0, abs=0.1)


def test_growth_overflow_truncates():
    est = growth_estimate(np.exp, np.geomspace(2.0, 2000.0, 24))
    assert est.notice != ""
    assert est.order == pytest.approx(1.0, abs=0.05)


def test_growth_polynomial_is_order_zero_ish():
    est = growth_estimate(lambda z: z**3, np.geomspace(5.0, 80.0, 12))
    assert est.order < 0.5


def test_growth_grid_guards():
    with pytest.raises(DomainError):
        growth_estimate(np.exp, [1.0, 2.0, 3.0])  # too few points
    with pytest.raises(DomainError):
        growth_estimate(np.exp, np.linspace(10.0, 30.0, 10))  # span < 0.75 decades
