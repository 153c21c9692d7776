"""Numerical certification engine.

Singular 2-D quadrature for L^2 membership, finite-difference annihilation
and Laplacian residuals, contour Laurent coefficients, loop-flux line
integrals, and growth order/type estimation of entire factors.

Wave functions and potentials are consumed through a duck-typed protocol
(the ansatz module provides concrete objects):

  psi.log_abs(z)            vectorized ln|psi| over complex arrays
  psi.value(z)              complex psi where the phase is defined
  psi.spin                  '+' or '-'
  psi.vector_potential(z)   a_x + i a_y, evaluated analytically
  psi.singular_sites(r)     [(position, local exponent)], |position| <= r
  psi.decay_hint            DecayHint or None

  phi.value(z)              real phi
  phi.uniform_flux_density  xi0; the Laplacian target is b0 = 2 pi xi0
  phi.singular_sites(r)     as above

The quadrature integrates exp(2 log_abs) over nested discs R, 2R, 4R, ...
Each site owns a disc of radius 0.1 x (nearest-neighbor distance) where the
known local exponent is absorbed into a Gauss-Jacobi radial weight; a C^inf
partition of unity blends the site discs into the adaptively refined polar
panels of the bulk.  Tails are certified either by geometric stagnation of
the annulus increments (exponential-type decay) or by a two-term power fit
of the increments (algebraic decay); growth by factor >= DIVERGENCE_RATIO
across two consecutive doublings flags divergence.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .special import ConsistencyError, DomainError

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
INCONCLUSIVE = "Inconclusive"

DIVERGENCE_RATIO = 1.5
RADIUS_CAP = 1.0e3
DEFAULT_MESHES = (1e-2, 5e-3, 2.5e-3)

_INITIAL_RADIUS = 4.0
_BUMP_LO, _BUMP_HI = 0.35, 0.95
_MAX_PANELS = 40_000
_RADIAL_NODES = 48
_RADIAL_NODES_COARSE = 32
_ANGULAR_NODES = 64


class DecayHint(NamedTuple):
    """Tail behavior of |psi|, guiding the quadrature's outer radius.

    kind 'gaussian' / 'exponential' / 'exp_sqrt': log|psi| eventually falls
    like -rate * |z|**s with s = 2, 1, 1/2; such increments stagnate and are
    certified by geometric extrapolation.  kind 'power': |psi| ~ C|z|**-rate
    with a smooth angular profile, so the circle integral of |psi|^2 r
    behaves like r**(1-2 rate) with corrections in r**-2.  kind 'ring': the
    circle integral itself behaves like r**rate with corrections in r**-1
    (concentrated tails, e.g. chain strips).  Algebraic tails are certified
    by a two-term fit of the annulus increments.
    """

    kind: str
    rate: float


class ProbeRegion(NamedTuple):
    center: complex
    r_inner: float
    r_outer: float


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    flag: str
    radii_trace: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ResidualReport:
    meshes: tuple[float, ...]
    residual_norms: tuple[float, ...]
    observed_order: float


@dataclass(frozen=True)
class GrowthEstimate:
    order: float
    type: float
    confidence: str
    notice: str = ""


# ---------------------------------------------------------------------------
# quadrature building blocks

_jacobi_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _jacobi_rule(beta: float) -> tuple[np.ndarray, ...]:
    key = round(float(beta), 12)
    if key not in _jacobi_cache:
        fine = roots_jacobi(_RADIAL_NODES, 0.0, key)
        coarse = roots_jacobi(_RADIAL_NODES_COARSE, 0.0, key)
        _jacobi_cache[key] = (*fine, *coarse)
    return _jacobi_cache[key]


_GL6_X, _GL6_W = roots_legendre(6)
_GL4_X, _GL4_W = roots_legendre(4)


def _smooth_rise(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    tt = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        num = np.where(tt > 0.0, np.exp(-1.0 / np.where(tt > 0.0, tt, 1.0)), 0.0)
        den = np.where(tt < 1.0, np.exp(-1.0 / np.where(tt < 1.0, 1.0 - tt, 1.0)), 0.0)
    return num / (num + den)


class _SiteSet(NamedTuple):
    pos: np.ndarray
    expo: np.ndarray
    radius: np.ndarray


def _site_set(pairs: Sequence[tuple[complex, float]]) -> _SiteSet:
    pairs = [(complex(p), float(e)) for p, e in pairs]
    # integer local exponents are smooth; only fractional powers need care
    pairs = [pe for pe in pairs if abs(pe[1] - round(pe[1])) > 1e-9]
    if not pairs:
        z = np.zeros(0, dtype=complex)
        return _SiteSet(z, np.zeros(0), np.zeros(0))
    pos = np.array([p for p, _ in pairs], dtype=complex)
    expo = np.array([e for _, e in pairs], dtype=float)
    if pos.size >= 2:
        from scipy.spatial import cKDTree

        pts = np.column_stack([pos.real, pos.imag])
        dist, _ = cKDTree(pts).query(pts, k=2)
        nn = dist[:, 1]
    else:
        nn = np.full(pos.size, np.inf)
    radius = np.minimum(0.1 * nn, 0.5)
    if np.any(radius <= 0.0):
        raise DomainError("coincident singular sites")
    return _SiteSet(pos, expo, radius)


class _Integrand:
    """exp(2 log_abs) times smooth cutoffs vanishing inside site discs."""

    def __init__(self, log_abs: Callable, sites: _SiteSet):
        self.log_abs = log_abs
        self.sites = sites
        self.rho = np.abs(sites.pos)
        self.ang = np.angle(sites.pos)

    def candidates(self, r0, r1, p0, p1) -> tuple[int, ...]:
        s = self.sites
        if s.pos.size == 0:
            return ()
        near = (self.rho + s.radius >= r0) & (self.rho - s.radius <= r1)
        idx = np.nonzero(near)[0]
        if idx.size == 0:
            return ()
        mid, half = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
        dang = np.abs((self.ang[idx] - mid + math.pi) % (2.0 * math.pi) - math.pi)
        margin = np.arcsin(np.minimum(s.radius[idx] / np.maximum(self.rho[idx], 1e-300), 1.0))
        keep = (dang <= half + margin) | (self.rho[idx] <= s.radius[idx])
        return tuple(int(i) for i in idx[keep])

    def __call__(self, Z: np.ndarray, idx: Sequence[int]) -> np.ndarray:
        s = self.sites
        fac = np.ones(Z.shape)
        for i in idx:
            t = (np.abs(Z - s.pos[i]) / s.radius[i] - _BUMP_LO) / (_BUMP_HI - _BUMP_LO)
            fac = fac * _smooth_rise(t)
        out = np.zeros(Z.shape)
        mask = fac > 0.0
        if np.any(mask):
            la = np.asarray(self.log_abs(Z[mask]), dtype=float)
            with np.errstate(over="ignore"):
                out[mask] = np.exp(2.0 * la) * fac[mask]
        return out


def _panel_pair(F: _Integrand, box: tuple[float, float, float, float]) -> tuple[float, float]:
    """(Gauss-Legendre 6x6 value, error indicator vs the 4x4 rule)."""
    r0, r1, p0, p1 = box
    idx = F.candidates(*box)

    def tensor(x, w):
        rm, rh = 0.5 * (r1 + r0), 0.5 * (r1 - r0)
        pm, ph = 0.5 * (p1 + p0), 0.5 * (p1 - p0)
        r = rm + rh * x
        p = pm + ph * x
        Z = r[:, None] * np.exp(1j * p)[None, :]
        vals = F(Z, idx) * r[:, None]
        return float(rh * ph * np.einsum("i,ij,j->", w, vals, w))

    v6 = tensor(_GL6_X, _GL6_W)
    v4 = tensor(_GL4_X, _GL4_W)
    return v6, abs(v6 - v4)


def _region_integral(
    F: _Integrand,
    r_lo: float,
    r_hi: float,
    abs_tol: float,
    rel_tol: float,
    threads: int = 1,
) -> tuple[float, float]:
    """Adaptive integral of F over the polar box [r_lo, r_hi] x [0, 2 pi)."""
    width = r_hi - r_lo
    n_r = max(2, min(8, int(round(width / max(r_lo, width / 4.0)))) if width > 0 else 2)
    r_edges = np.linspace(r_lo, r_hi, n_r + 1)
    p_edges = np.linspace(0.0, 2.0 * math.pi, 9)
    boxes = [
        (float(r_edges[i]), float(r_edges[i + 1]), float(p_edges[j]), float(p_edges[j + 1]))
        for i in range(n_r)
        for j in range(8)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            first = list(pool.map(lambda b: _panel_pair(F, b), boxes))
    else:
        first = [_panel_pair(F, b) for b in boxes]

    heap: list[tuple[float, int, tuple, float, float]] = []
    total = 0.0
    err = 0.0
    counter = 0
    for box, (v, e) in zip(boxes, first):
        total += v
        err += e
        heapq.heappush(heap, (-e, counter, box, v, e))
        counter += 1
    panels = len(boxes)

    while heap and panels < _MAX_PANELS:
        tol = max(abs_tol, rel_tol * abs(total))
        if err <= tol:
            break
        _, _, box, v, e = heapq.heappop(heap)
        if e <= tol / (len(heap) + 2):
            break  # worst panel already below its share: refinement stalled
        total -= v
        err -= e
        r0, r1, p0, p1 = box
        rm, pm = 0.5 * (r0 + r1), 0.5 * (p0 + p1)
        for child in (
            (r0, rm, p0, pm),
            (r0, rm, pm, p1),
            (rm, r1, p0, pm),
            (rm, r1, pm, p1),
        ):
            v, e = _panel_pair(F, child)
            total += v
            err += e
            heapq.heappush(heap, (-e, counter, child, v, e))
            counter += 1
        panels += 4
    return max(total, 0.0), err


def _site_disc_integral(
    log_abs: Callable, center: complex, exponent: float, radius: float
) -> tuple[float, float]:
    """Bump-weighted integral of |psi|^2 over one site disc, with error.

    The known local power rho**(2 e) becomes a Gauss-Jacobi radial weight,
    so only the smooth remainder is sampled.  The error estimate compares
    the 48- and 32-node radial rules.
    """
    beta = 2.0 * exponent + 1.0
    xf, wf, xc, wc = _jacobi_rule(beta)

    def radial(x, w):
        rho = radius * (x + 1.0) / 2.0
        phis = 2.0 * math.pi * np.arange(_ANGULAR_NODES) / _ANGULAR_NODES
        Z = center + rho[:, None] * np.exp(1j * phis)[None, :]
        la = np.asarray(log_abs(Z.ravel()), dtype=float).reshape(Z.shape)
        with np.errstate(over="ignore"):
            smooth = np.exp(2.0 * la - 2.0 * exponent * np.log(rho)[:, None])
        angular = smooth.mean(axis=1) * 2.0 * math.pi
        cut = 1.0 - _smooth_rise((rho / radius - _BUMP_LO) / (_BUMP_HI - _BUMP_LO))
        return (radius / 2.0) ** (beta + 1.0) * float(np.dot(w, angular * cut))

    fine = radial(xf, wf)
    coarse = radial(xc, wc)
    return fine, 0.5 * abs(fine - coarse)


def _site_disc_bound(log_abs: Callable, center: complex, exponent: float, radius: float) -> float:
    """Cheap upper estimate of a site-disc contribution from 8 probes."""
    rr = np.array([0.25, 0.75]) * radius
    aa = np.exp(1j * np.array([0.4, 1.97, 3.54, 5.11]))
    Z = center + rr[:, None] * aa[None, :]
    la = np.asarray(log_abs(Z.ravel()), dtype=float)
    t = float(np.max(la - exponent * np.log(np.abs(Z.ravel() - center))))
    return 2.0 * math.pi * math.exp(2.0 * t) * radius ** (2.0 * exponent + 2.0) / (2.0 * exponent + 2.0)


# ---------------------------------------------------------------------------
# tail certification


def _power_interval(p: float, a: float, b: float) -> float:
    """Integral of r**p over [a, b] (p < -1 allows b = inf)."""
    if b == math.inf:
        return -(a ** (p + 1.0)) / (p + 1.0)
    return (b ** (p + 1.0) - a ** (p + 1.0)) / (p + 1.0)


def _algebraic_tail(hint: DecayHint, increments: list[float], R: float) -> tuple[float, float] | None:
    """Tail beyond R from a two-term power fit of the last two annuli.

    Returns (tail, fit error estimate) or None if the fit is unusable.
    """
    if len(increments) < 3:
        return None
    if hint.kind == "power":
        p0, step = 1.0 - 2.0 * hint.rate, 2.0
    else:
        p0, step = hint.rate, 1.0
    if p0 >= -1.0:
        return None  # not integrable: divergence detection handles it
    a1, a2 = increments[-2], increments[-1]
    lo, mid = R / 4.0, R / 2.0
    m = np.array(
        [
            [_power_interval(p0, lo, mid), _power_interval(p0 - step, lo, mid)],
            [_power_interval(p0, mid, R), _power_interval(p0 - step, mid, R)],
        ]
    )
    try:
        alpha, beta = np.linalg.solve(m, np.array([a1, a2]))
    except np.linalg.LinAlgError:
        return None
    tail2 = alpha * _power_interval(p0, R, math.inf) + beta * _power_interval(p0 - step, R, math.inf)
    tail1 = a2 / _power_interval(p0, mid, R) * _power_interval(p0, R, math.inf)
    if not (math.isfinite(tail2) and tail2 >= 0.0):
        if not (math.isfinite(tail1) and tail1 >= 0.0):
            return None
        return tail1, tail1  # single-term estimate, all of it counted as error
    return tail2, abs(tail2 - tail1) * 0.5


def l2_norm_squared(
    psi,
    abs_tol: float = 1e-8,
    rel_tol: float = 1e-6,
    *,
    initial_radius: float = _INITIAL_RADIUS,
    radius_cap: float = RADIUS_CAP,
    max_doublings: int = 12,
    threads: int = 1,
) -> QuadratureResult:
    """Integral of |psi|^2 over the plane with a convergence verdict.

    Nested discs R, 2R, 4R, ...; see the module docstring for the cell
    treatment and the certification rules.
    """
    hint = getattr(psi, "decay_hint", None)
    algebraic = hint is not None and hint.kind in ("power", "ring")

    trace: list[tuple[float, float]] = []
    increments: list[float] = []
    total = 0.0
    quad_err = 0.0
    bad_ratios = 0
    prev_certificate: float | None = None
    r_prev = -1.0
    R = float(initial_radius)

    for _ in range(max_doublings):
        pairs = psi.singular_sites(R + 1.0)
        sites = _site_set(pairs)
        if np.any(sites.expo <= -1.0):
            raise DomainError("local exponent <= -1: |psi|^2 is not integrable")
        F = _Integrand(psi.log_abs, sites)
        tol_here = 0.1 * max(abs_tol, rel_tol * total)
        bulk, e_bulk = _region_integral(F, max(r_prev, 0.0), R, tol_here, 0.1 * rel_tol, threads)
        inc = bulk
        quad_err += e_bulk

        new = np.nonzero((np.abs(sites.pos) > r_prev) & (np.abs(sites.pos) <= R))[0]
        share = 0.1 * tol_here / max(1, new.size)
        for i in new:
            bound = _site_disc_bound(psi.log_abs, sites.pos[i], sites.expo[i], sites.radius[i])
            if bound < share:
                quad_err += bound
                continue
            v, e = _site_disc_integral(psi.log_abs, sites.pos[i], sites.expo[i], sites.radius[i])
            inc += v
            quad_err += e

        increments.append(inc)
        total += inc
        trace.append((R, total))

        if not math.isfinite(inc):
            return QuadratureResult(total if math.isfinite(total) else 0.0, math.inf, DIVERGENT, tuple(trace))
        if len(increments) >= 2 and increments[-2] > abs_tol:
            ratio = inc / max(increments[-2], 1e-300)
            bad_ratios = bad_ratios + 1 if ratio >= DIVERGENCE_RATIO else 0
            if bad_ratios >= 2:
                return QuadratureResult(total, math.inf, DIVERGENT, tuple(trace))

        tol = max(abs_tol, rel_tol * max(total, 1e-300))
        if algebraic:
            fit = _algebraic_tail(hint, increments, R)
            if fit is not None:
                tail, fit_err = fit
                certificate = total + tail
                cons = (
                    abs(certificate - prev_certificate) if prev_certificate is not None else math.inf
                )
                prev_certificate = certificate
                if max(fit_err, cons) + quad_err <= max(abs_tol, rel_tol * certificate):
                    return QuadratureResult(
                        certificate, fit_err + min(cons, fit_err) + quad_err, CONVERGENT, tuple(trace)
                    )
            # steep algebraic tails: consecutive halving ratios make the
            # measured-ratio extrapolation exact for pure power increments
            if len(increments) >= 3 and increments[-1] > 0.0:
                q1 = increments[-1] / max(increments[-2], 1e-300)
                q2 = increments[-2] / max(increments[-3], 1e-300)
                if q1 < 0.5 and q2 < 0.5:
                    geo_tail = increments[-1] * q1 / (1.0 - q1)
                    if geo_tail + quad_err <= tol:
                        return QuadratureResult(
                            total + geo_tail, 2.0 * geo_tail + quad_err, CONVERGENT, tuple(trace)
                        )
        else:
            if len(increments) >= 2:
                prev = increments[-2]
                if inc <= abs_tol and prev <= abs_tol:
                    return QuadratureResult(total, quad_err + inc, CONVERGENT, tuple(trace))
                if prev > 0.0:
                    q = inc / prev
                    if q < 0.5:
                        geo_tail = inc * q / (1.0 - q)
                        if geo_tail <= tol:
                            return QuadratureResult(total, quad_err + 2.0 * geo_tail, CONVERGENT, tuple(trace))

        r_prev = R
        R *= 2.0
        if R > radius_cap:
            break
    return QuadratureResult(total, math.inf, INCONCLUSIVE, tuple(trace))


def integrate_disc(
    log_abs: Callable,
    singular_sites: Sequence[tuple[complex, float]],
    radius: float,
    abs_tol: float = 1e-9,
    rel_tol: float = 1e-6,
    threads: int = 1,
) -> tuple[float, float]:
    """(integral of exp(2 log_abs) over |z| <= radius, error estimate).

    The building block of l2_norm_squared, exposed for calibration: exact
    radial weights at each listed singular site, adaptive panels elsewhere.
    """
    sites = _site_set(singular_sites)
    if np.any(sites.expo <= -1.0):
        raise DomainError("local exponent <= -1: integral does not exist")
    F = _Integrand(log_abs, sites)
    rough = 0.0
    site_err = 0.0
    for i in range(sites.pos.size):
        v, e = _site_disc_integral(log_abs, sites.pos[i], sites.expo[i], sites.radius[i])
        rough += v
        site_err += e
    bulk, err = _region_integral(F, 0.0, radius, max(abs_tol, rel_tol * rough), rel_tol, threads)
    value = bulk + rough
    return value, err + site_err + 1e-13 * value


# ---------------------------------------------------------------------------
# finite-difference residuals


def _probe_points(region: ProbeRegion) -> np.ndarray:
    center, r_in, r_out = region
    if not (0.0 <= r_in < r_out):
        raise DomainError("probe region needs 0 <= r_inner < r_outer")
    radii = np.linspace(r_in, r_out, 6)
    if r_in == 0.0:
        radii = radii[1:]
    angles = 2.0 * math.pi * (np.arange(16) + 0.31) / 16.0
    return (complex(center) + radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def _check_clearance(points: np.ndarray, sites: Sequence[tuple[complex, float]], clearance: float) -> None:
    if not len(sites):
        return
    pos = np.array([p for p, _ in sites], dtype=complex)
    dist = np.abs(points[:, None] - pos[None, :])
    if float(dist.min()) < clearance:
        raise DomainError(
            f"probe region within {clearance:g} of a singular site (min distance {dist.min():g})"
        )


def _observed_order(meshes: Sequence[float], norms: Sequence[float]) -> float:
    orders = []
    for (h1, n1), (h2, n2) in zip(zip(meshes, norms), zip(meshes[1:], norms[1:])):
        n1, n2 = max(n1, 1e-300), max(n2, 1e-300)
        orders.append(math.log(n1 / n2) / math.log(h1 / h2))
    return float(np.mean(orders)) if orders else 0.0


def annihilation_residual(
    psi, probe_region: ProbeRegion, meshes: Sequence[float] = DEFAULT_MESHES
) -> ResidualReport:
    """Sup-norm of the first-order annihilation residual on a probe annulus.

    Spin '+': -i (psi_x + i psi_y) - (a_x + i a_y) psi; spin '-' uses the
    conjugate combination.  Derivatives by centered differences; the vector
    potential is evaluated analytically.  A genuine zero mode shows order
    about 2 (the discretization order).
    """
    meshes = tuple(float(h) for h in meshes)
    if not meshes or any(h <= 0 for h in meshes):
        raise DomainError("meshes must be positive")
    pts = _probe_points(probe_region)
    hmax = max(meshes)
    reach = abs(probe_region.center) + probe_region.r_outer + 10.0 * hmax + 1.0
    _check_clearance(pts, psi.singular_sites(reach), 10.0 * hmax)

    conj_spin = psi.spin == "-"
    norms = []
    base = np.asarray(psi.value(pts))
    a_vals = np.asarray(psi.vector_potential(pts))
    if conj_spin:
        a_vals = np.conj(a_vals)
    for h in meshes:
        dx = (np.asarray(psi.value(pts + h)) - np.asarray(psi.value(pts - h))) / (2.0 * h)
        dy = (np.asarray(psi.value(pts + 1j * h)) - np.asarray(psi.value(pts - 1j * h))) / (2.0 * h)
        grad = dx - 1j * dy if conj_spin else dx + 1j * dy
        res = -1j * grad - a_vals * base
        norms.append(float(np.max(np.abs(res))))
    return ResidualReport(meshes, tuple(norms), _observed_order(meshes, norms))


def laplacian_residual(
    phi, probe_region: ProbeRegion, meshes: Sequence[float] = DEFAULT_MESHES
) -> ResidualReport:
    """Sup-norm of the 5-point-stencil Laplacian of phi minus b0 = 2 pi xi0."""
    meshes = tuple(float(h) for h in meshes)
    if not meshes or any(h <= 0 for h in meshes):
        raise DomainError("meshes must be positive")
    pts = _probe_points(probe_region)
    hmax = max(meshes)
    reach = abs(probe_region.center) + probe_region.r_outer + 10.0 * hmax + 1.0
    _check_clearance(pts, phi.singular_sites(reach), 10.0 * hmax)

    b0 = 2.0 * math.pi * phi.uniform_flux_density
    norms = []
    center = np.asarray(phi.value(pts), dtype=float)
    for h in meshes:
        lap = (
            np.asarray(phi.value(pts + h), dtype=float)
            + np.asarray(phi.value(pts - h), dtype=float)
            + np.asarray(phi.value(pts + 1j * h), dtype=float)
            + np.asarray(phi.value(pts - 1j * h), dtype=float)
            - 4.0 * center
        ) / h**2
        norms.append(float(np.max(np.abs(lap - b0))))
    return ResidualReport(meshes, tuple(norms), _observed_order(meshes, norms))


# ---------------------------------------------------------------------------
# contour checks


def laurent_coefficient(
    f: Callable, center: complex, n: int, radius: float, samples: int = 256
) -> complex:
    """Laurent coefficient a_n of f around center by the trapezoid rule.

    Spectrally accurate for f analytic on the circle.  The companion bound
    mean|f| >= |a_n| radius**n must hold up to quadrature error, else the
    input is inconsistent with analyticity and ConsistencyError is raised.
    """
    if samples < 64:
        raise DomainError("need at least 64 samples on the circle")
    if radius <= 0:
        raise DomainError("radius must be positive")
    phase = np.exp(2j * math.pi * np.arange(samples) / samples)
    vals = np.asarray(f(center + radius * phase))
    a_n = complex(np.mean(vals * phase ** (-n)) / radius**n)
    mean_abs = float(np.mean(np.abs(vals)))
    slack = 1e-8 * max(1.0, mean_abs)
    if mean_abs + slack < abs(a_n) * radius**n:
        raise ConsistencyError(
            "circle mean of |f| falls below |a_n| r^n: samples inconsistent with analyticity"
        )
    return a_n


def loop_flux(a: Callable, rectangle: tuple[float, float, float, float], samples_per_side: int = 256) -> float:
    """Line integral of a_x dx + a_y dy around an axis-aligned rectangle.

    rectangle = (x0, y0, x1, y1), traversed counterclockwise.  For pure
    Aharonov-Bohm fields this equals 2 pi times the enclosed flux sum, plus
    b0 times the area for a uniform component.
    """
    x0, y0, x1, y1 = map(float, rectangle)
    if not (x0 < x1 and y0 < y1):
        raise DomainError("rectangle must satisfy x0 < x1 and y0 < y1")

    sites = getattr(a, "singular_sites", None)
    if sites is not None:
        reach = max(abs(complex(x0, y0)), abs(complex(x1, y1))) + 1.0
        pos = [complex(p) for p, _ in sites(reach)]
        for p in pos:
            dx = max(x0 - p.real, 0.0, p.real - x1)
            dy = max(y0 - p.imag, 0.0, p.imag - y1)
            edge = math.hypot(dx, dy)
            if edge < 1e-6 and not (x0 + 1e-6 < p.real < x1 - 1e-6 and y0 + 1e-6 < p.imag < y1 - 1e-6):
                raise DomainError("rectangle boundary passes too close to a flux site")

    panels = max(4, samples_per_side // 8)
    x_nodes, w = roots_legendre(8)

    def side(start: complex, stop: complex, take) -> float:
        acc = 0.0
        for k in range(panels):
            za = start + (stop - start) * k / panels
            zb = start + (stop - start) * (k + 1) / panels
            mid, half = 0.5 * (za + zb), 0.5 * (zb - za)
            z = mid + half * x_nodes
            acc += abs(half) * float(np.dot(w, take(np.asarray(a(z)))))
        return acc

    total = side(complex(x0, y0), complex(x1, y0), np.real)
    total += side(complex(x1, y0), complex(x1, y1), np.imag)
    total -= side(complex(x0, y1), complex(x1, y1), np.real)
    total -= side(complex(x0, y0), complex(x0, y1), np.imag)
    return total


# ---------------------------------------------------------------------------
# growth estimation


def growth_estimate(
    f: Callable,
    r_grid: Sequence[float],
    samples_per_circle: int = 256,
    *,
    log_scale: bool = False,
) -> GrowthEstimate:
    """Growth order and type of an entire function from circle maxima.

    order: least-squares slope of ln ln M(r) against ln r over the top half
    of the grid; type: max of ln M(r) / r**order there.  With log_scale the
    evaluator returns ln f directly (mandatory when exp would overflow).
    Overflows truncate the grid with a notice.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size < 4 or r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
        raise DomainError("radius grid must be increasing, positive, length >= 4")
    if math.log10(r[-1] / r[0]) < 0.75:
        raise DomainError("radius grid must span at least 0.75 decades")

    phase = np.exp(2j * math.pi * np.arange(samples_per_circle) / samples_per_circle)
    log_m: list[float] = []
    notice = ""
    for rad in r:
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(f(rad * phase))
        if log_scale:
            lm = float(np.max(np.real(vals)))
            if not math.isfinite(lm):
                notice = f"grid truncated at r={rad:g} (non-finite log values)"
                break
        else:
            mags = np.abs(vals)
            if not np.all(np.isfinite(mags)):
                notice = f"grid truncated at r={rad:g} (overflow)"
                break
            lm = float(np.log(np.max(mags)))
        log_m.append(lm)
    if len(log_m) < 4:
        raise DomainError("too few usable radii" + (f"; {notice}" if notice else ""))

    rr = r[: len(log_m)]
    lm = np.array(log_m)
    half = len(lm) // 2
    rs, ls = rr[half:], lm[half:]
    usable = ls > 0.0
    if usable.sum() < 3:
        return GrowthEstimate(0.0, float(np.exp(lm.max())), "low", notice)

    x = np.log(rs[usable])
    y = np.log(ls[usable])
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    resid = float(np.sqrt(np.mean((y - y.mean() - slope * xc) ** 2)))
    order = max(slope, 0.0)
    gtype = float(np.max(ls / rs**order))
    confidence = "high" if resid < 0.1 and usable.sum() >= 4 else "low"
    return GrowthEstimate(order, gtype, confidence, notice)
