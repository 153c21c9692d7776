"""Scalar/vector potentials and explicit zero-mode families.

Spin '+' zero modes have the form exp(-phi) f(z) and spin '-' modes
exp(+phi) conj(h(z)), where phi solves Delta phi = b for the configuration's
flux density and f, h are holomorphic off the flux set.  The spin '-' side
is produced from the spin '+' recipe of the flux-mirrored configuration
(theta -> 1 - theta, xi0 -> -xi0) through h = f_mirror / W, with W the
entire function vanishing simply on every actual flux site.

Wave functions expose log-magnitude, pointwise values, the matching vector
potential and the list of fractional local exponents, which is the protocol
the quadrature certifier consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import (
    ConfigError,
    FluxConfiguration,
    enumerate_support,
    mirror_configuration,
    normalize_fluxes,
)
from .decide import DEFAULT_R_MAX, ZeroModeVerdict, decide
from .special import (
    DomainError,
    LatticeBasis,
    chain_dlog,
    chain_log_abs,
    lattice_constants,
    log_abs_sigma_tilde,
    log_sin,
    sigma_tilde,
    sigma_tilde_dlog,
    sinc_sqrt,
    star_dlog,
    star_log_abs,
)
from .verify import DecayHint

_EXISTS = ("ExistsFinite", "ExistsInfinite")
_SITE_KEY_DIGITS = 9
_ZERO_TOL = 1e-9
_PARALLEL_TOL = 1e-12


class NoModesError(ValueError):
    """Construction refused: the verdict does not assert zero modes."""


def _cplx(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _site_key(p: complex) -> tuple[float, float]:
    return (round(p.real, _SITE_KEY_DIGITS), round(p.imag, _SITE_KEY_DIGITS))


# ---------------------------------------------------------------------------
# potential terms
#
# Each term carries a weight w and a zero set; it contributes w*ln|W(z)| to
# phi and i*w*conj(W'/W) to a_x + i a_y, so a = sgrad phi holds term by term.


@dataclass(frozen=True)
class UniformTerm:
    xi0: float

    def phi(self, z: np.ndarray) -> np.ndarray:
        return 0.5 * math.pi * self.xi0 * (z.real**2 + z.imag**2)

    def a_field(self, z: np.ndarray) -> np.ndarray:
        return 1j * math.pi * self.xi0 * z

    def sites(self, r: float) -> list[tuple[complex, float]]:
        return []


@dataclass(frozen=True)
class PointTerm:
    position: complex
    weight: float

    def phi(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.weight * np.log(np.abs(z - self.position))

    def a_field(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1j * self.weight * np.conj(1.0 / (z - self.position))

    def sites(self, r: float) -> list[tuple[complex, float]]:
        if abs(self.position) <= r:
            return [(self.position, self.weight)]
        return []


@dataclass(frozen=True)
class ChainTerm:
    omega0: complex
    kappa: complex
    weight: float

    @property
    def direction(self) -> complex:
        return self.omega0 / abs(self.omega0)

    def _rotated(self, z: np.ndarray) -> tuple[float, complex, np.ndarray]:
        d = self.direction
        return abs(self.omega0), self.kappa / d, z / d

    def phi(self, z: np.ndarray) -> np.ndarray:
        per, k2, w = self._rotated(z)
        return self.weight * chain_log_abs(per, k2, w)

    def a_field(self, z: np.ndarray) -> np.ndarray:
        per, k2, w = self._rotated(z)
        return 1j * self.weight * np.conj(chain_dlog(per, k2, w) / self.direction)

    def sites(self, r: float) -> list[tuple[complex, float]]:
        per = abs(self.omega0)
        mc = -np.real(self.kappa * np.conj(self.omega0)) / per**2
        d = abs(np.imag(self.kappa * np.conj(self.omega0))) / per
        if d > r:
            return []
        half = math.sqrt(max(r * r - d * d, 0.0)) / per + 1.0
        ms = np.arange(math.floor(mc - half), math.ceil(mc + half) + 1)
        pos = self.kappa + ms * self.omega0
        return [(complex(p), self.weight) for p in pos[np.abs(pos) <= r]]


@dataclass(frozen=True)
class LatticeTerm:
    basis: LatticeBasis
    kappa: complex
    weight: float

    def phi(self, z: np.ndarray) -> np.ndarray:
        return self.weight * log_abs_sigma_tilde(self.basis, z - self.kappa)

    def a_field(self, z: np.ndarray) -> np.ndarray:
        return 1j * self.weight * np.conj(sigma_tilde_dlog(self.basis, z - self.kappa))

    def sites(self, r: float) -> list[tuple[complex, float]]:
        w1, w2 = self.basis.omega1, self.basis.omega2
        area = self.basis.area
        reach = r + abs(self.kappa)
        imax = int(math.ceil(reach * abs(w2) / area)) + 1
        jmax = int(math.ceil(reach * abs(w1) / area)) + 1
        out: list[tuple[complex, float]] = []
        js = np.arange(-jmax, jmax + 1)
        for i in range(-imax, imax + 1):
            pos = self.kappa + i * w1 + js * w2
            for p in pos[np.abs(pos) <= r]:
                out.append((complex(p), self.weight))
        return out


@dataclass(frozen=True)
class StarTerm:
    order: int
    scale: float
    weight: float

    def phi(self, z: np.ndarray) -> np.ndarray:
        return self.weight * star_log_abs(self.order, z / self.scale)

    def a_field(self, z: np.ndarray) -> np.ndarray:
        return 1j * self.weight * np.conj(star_dlog(self.order, z / self.scale) / self.scale)

    def sites(self, r: float) -> list[tuple[complex, float]]:
        out = [(0j, self.weight)]
        n = self.order
        m_max = int(math.floor((r / self.scale) ** n + 1e-12))
        if m_max >= 1:
            radii = self.scale * np.arange(1, m_max + 1) ** (1.0 / n)
            rays = np.exp(1j * math.pi * np.arange(2 * n) / n)
            pos = (radii[:, None] * rays[None, :]).ravel()
            out.extend((complex(p), self.weight) for p in pos[np.abs(pos) <= r])
        return out


class ScalarPotential:
    """phi as a sum of weighted log-modulus terms plus a uniform |z|^2 part."""

    def __init__(self, terms: tuple, uniform_flux_density: float):
        self.terms = terms
        self.uniform_flux_density = uniform_flux_density

    def value(self, z) -> np.ndarray:
        z = _cplx(z)
        out = np.zeros(z.shape, dtype=float)
        for t in self.terms:
            out = out + t.phi(z)
        return out

    def singular_sites(self, r: float) -> list[tuple[complex, float]]:
        acc: dict[tuple[float, float], list] = {}
        for t in self.terms:
            for p, w in t.sites(r):
                k = _site_key(p)
                if k in acc:
                    acc[k][1] += w
                else:
                    acc[k] = [p, w]
        return [(p, w) for p, w in acc.values() if abs(w) > _ZERO_TOL]


class VectorPotential:
    """a = sgrad phi, differentiated term by term; callable as a_x + i a_y."""

    def __init__(self, phi: ScalarPotential):
        self._phi = phi

    def __call__(self, z) -> np.ndarray:
        z = _cplx(z)
        out = np.zeros(z.shape, dtype=complex)
        for t in self._phi.terms:
            out = out + t.a_field(z)
        if not np.all(np.isfinite(out)):
            raise DomainError("vector potential evaluated on a flux site")
        return out

    def components(self, z) -> tuple[np.ndarray, np.ndarray]:
        a = self(z)
        return np.real(a), np.imag(a)

    def singular_sites(self, r: float) -> list[tuple[complex, float]]:
        return self._phi.singular_sites(r)


def _require_normalized(config: FluxConfiguration) -> None:
    normalized, _ = normalize_fluxes(config)
    if normalized != config:
        raise ConfigError("configuration must be normalized; apply normalize_fluxes")


def _removed_theta(config: FluxConfiguration, p: complex) -> float:
    base = replace(config, perturbation=None)
    for s in enumerate_support(base, abs(p) + 1.0):
        if abs(s.position - p) <= _ZERO_TOL:
            return s.theta
    raise ConfigError(f"removed point {p} is not a site of the configuration")


def build_scalar_potential(config: FluxConfiguration) -> ScalarPotential:
    """Assemble phi for a normalized configuration.

    phi = pi xi0 |z|^2 / 2 plus theta-weighted log moduli: |z - w| for point
    fluxes, |sin(pi (z-kappa)/omega0)| for chains, |sigma_tilde(z-kappa)| for
    lattices and the star product for star components.  Removed perturbation
    points enter with weight -theta, added ones with +theta.
    """
    _require_normalized(config)
    terms: list = []
    if config.uniform_flux_density != 0.0:
        terms.append(UniformTerm(config.uniform_flux_density))
    for s in config.finite_sites:
        terms.append(PointTerm(s.position, s.theta))
    for ch in config.chains:
        for s in ch.offsets:
            terms.append(ChainTerm(ch.omega0, s.position, s.theta))
    for lat in config.lattices:
        for s in lat.offsets:
            terms.append(LatticeTerm(lat.basis, s.position, s.theta))
    if config.star is not None:
        terms.append(StarTerm(config.star.order, config.star.scale, config.star.theta))
    if config.perturbation is not None:
        for p in config.perturbation.removed:
            terms.append(PointTerm(p, -_removed_theta(config, p)))
        for grp in config.perturbation.added:
            for p in grp.points:
                terms.append(PointTerm(p, grp.theta))
    return ScalarPotential(tuple(terms), config.uniform_flux_density)


def build_vector_potential(phi: ScalarPotential) -> VectorPotential:
    """a = sgrad phi with analytic derivatives of every log term."""
    return VectorPotential(phi)


# ---------------------------------------------------------------------------
# holomorphic factor pieces
#
# A factor is a tuple of (piece, integer power).  Pieces provide values, log
# moduli and the zero order at a prescribed point, which fixes the local
# exponent bookkeeping at flux sites.


@dataclass(frozen=True)
class Monomial:
    k: int

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        if self.k == 0:
            return np.zeros(z.shape, dtype=float)
        with np.errstate(divide="ignore"):
            return self.k * np.log(np.abs(z))

    def value(self, z: np.ndarray) -> np.ndarray:
        return z**self.k

    def zero_order_at(self, p: complex) -> int:
        return self.k if abs(p) <= _ZERO_TOL else 0


@dataclass(frozen=True)
class LinearFactors:
    points: tuple[complex, ...]

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        out = np.zeros(z.shape, dtype=float)
        with np.errstate(divide="ignore"):
            for p in self.points:
                out = out + np.log(np.abs(z - p))
        return out

    def value(self, z: np.ndarray) -> np.ndarray:
        out = np.ones(z.shape, dtype=complex)
        for p in self.points:
            out = out * (z - p)
        return out

    def zero_order_at(self, p: complex) -> int:
        return sum(1 for q in self.points if abs(q - p) <= _ZERO_TOL)


@dataclass(frozen=True)
class SincLine:
    """sin(alpha w)/w with w = (z - origin)/direction; decays off the line."""

    alpha: float
    origin: complex
    direction: complex

    def _w(self, z: np.ndarray) -> np.ndarray:
        return (z - self.origin) / self.direction

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        w = self._w(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.real(log_sin(self.alpha * w)) - np.log(np.abs(w))
        return np.where(np.abs(w) <= _ZERO_TOL, math.log(self.alpha), out)

    def value(self, z: np.ndarray) -> np.ndarray:
        w = self._w(z)
        small = np.abs(w) <= 1e-8
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(small, self.alpha, np.sin(self.alpha * np.where(small, 1.0, w)) / np.where(small, 1.0, w))
        return out

    def zero_order_at(self, p: complex) -> int:
        w = complex(self._w(_cplx(p)))
        if abs(w.imag) > 1e-7:
            return 0
        k = round(self.alpha * w.real / math.pi)
        return 1 if k != 0 and abs(self.alpha * w.real - math.pi * k) <= 1e-7 else 0


@dataclass(frozen=True)
class SinArm:
    """Entire factor sin(pi (w - kappa2)/period) in rotated coordinates."""

    period: float
    kappa2: complex
    direction: complex

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        return chain_log_abs(self.period, self.kappa2, z / self.direction)

    def value(self, z: np.ndarray) -> np.ndarray:
        return np.sin(math.pi * (z / self.direction - self.kappa2) / self.period)

    def zero_order_at(self, p: complex) -> int:
        u = (complex(p) / self.direction - self.kappa2) / self.period
        return 1 if abs(u.imag) <= 1e-7 and abs(u.real - round(u.real)) <= 1e-7 else 0


@dataclass(frozen=True)
class SigmaArm:
    basis: LatticeBasis
    kappa: complex

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        return log_abs_sigma_tilde(self.basis, z - self.kappa)

    def value(self, z: np.ndarray) -> np.ndarray:
        return sigma_tilde(self.basis, z - self.kappa)

    def zero_order_at(self, p: complex) -> int:
        w1, w2 = self.basis.omega1, self.basis.omega2
        s = np.imag(np.conj(w1) * w2)
        d = complex(p) - self.kappa
        t1 = np.imag(np.conj(d) * w2) / s
        t2 = np.imag(np.conj(w1) * d) / s
        return 1 if abs(t1 - round(t1)) <= 1e-7 and abs(t2 - round(t2)) <= 1e-7 else 0


@dataclass(frozen=True)
class StarW:
    """sin(pi w^N)/w^(N-1), w = z/scale: vanishes simply on the star set."""

    order: int
    scale: float

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        return star_log_abs(self.order, z / self.scale)

    def value(self, z: np.ndarray) -> np.ndarray:
        w = z / self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sin(math.pi * w**self.order) / w ** (self.order - 1)
        return np.where(np.abs(w) <= _ZERO_TOL, 0j, out)

    def zero_order_at(self, p: complex) -> int:
        w = complex(p) / self.scale
        if abs(w) <= _ZERO_TOL:
            return 1
        u = w**self.order
        return 1 if abs(u.imag) <= 1e-7 and abs(u.real - round(u.real)) <= 1e-7 else 0


@dataclass(frozen=True)
class StarSinc:
    """sin(alpha w^N)/w^N, w = z/scale; equals alpha at the origin."""

    alpha: float
    order: int
    scale: float

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        w = z / self.scale
        u = w**self.order
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.real(log_sin(self.alpha * u)) - self.order * np.log(np.abs(w))
        return np.where(np.abs(w) <= _ZERO_TOL, math.log(self.alpha), out)

    def value(self, z: np.ndarray) -> np.ndarray:
        w = z / self.scale
        u = w**self.order
        small = np.abs(u) <= 1e-8
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(small, self.alpha, np.sin(self.alpha * np.where(small, 1.0, u)) / np.where(small, 1.0, u))
        return out

    def zero_order_at(self, p: complex) -> int:
        u = (complex(p) / self.scale) ** self.order
        if abs(u) <= _ZERO_TOL or abs(u.imag) > 1e-7:
            return 0
        k = round(self.alpha * u.real / math.pi)
        return 1 if k != 0 and abs(self.alpha * u.real - math.pi * k) <= 1e-7 else 0


def _log_abs_sinc_sqrt(u: np.ndarray) -> np.ndarray:
    """ln |sin(sqrt u)/sqrt u|, branch free."""
    small = np.abs(u) < 1e-4
    out = np.empty(u.shape, dtype=float)
    if small.any():
        out[small] = np.log(np.abs(sinc_sqrt(u[small])))
    big = ~small
    if big.any():
        r = np.sqrt(u[big])
        out[big] = np.real(log_sin(r)) - 0.5 * np.log(np.abs(u[big]))
    return out


@dataclass(frozen=True)
class ExoticSinc:
    """Entire f = (i/pi) [sin(alpha w)/(alpha w)] / [S(pi alpha w) S(-pi alpha w)]
    with S(u) = sin(sqrt u)/sqrt u, evaluated at w = z/direction + i shift.

    Decays like exp(-c sqrt|w|) off the real w-axis neighborhoods and keeps
    the 1/|w| profile of sin(alpha w)/w on the strip.
    """

    alpha: float
    direction: complex
    shift: float

    def _w(self, z: np.ndarray) -> np.ndarray:
        return z / self.direction + 1j * self.shift

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        w = self._w(z)
        u = self.alpha * w
        pu = math.pi * u
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.real(log_sin(u)) - np.log(np.abs(u))
            num = np.where(np.abs(u) <= _ZERO_TOL, 0.0, num)
        return num - _log_abs_sinc_sqrt(pu) - _log_abs_sinc_sqrt(-pu) - math.log(math.pi)

    def value(self, z: np.ndarray) -> np.ndarray:
        w = self._w(z)
        u = self.alpha * w
        small = np.abs(u) <= 1e-8
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.where(small, 1.0, np.sin(np.where(small, 1.0, u)) / np.where(small, 1.0, u))
        den = sinc_sqrt(math.pi * u) * sinc_sqrt(-math.pi * u)
        return (1j / math.pi) * num / den

    def zero_order_at(self, p: complex) -> int:
        w = complex(self._w(_cplx(p)))
        if abs(w.imag) > 1e-7:
            return 0
        k = round(self.alpha * w.real / math.pi)
        if k == 0 or abs(self.alpha * w.real - math.pi * k) > 1e-7:
            return 0
        root = math.isqrt(abs(k))
        return 0 if root * root == abs(k) else 1


def _factor_log_abs(factor: tuple, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape, dtype=float)
    for piece, power in factor:
        if power:
            out = out + power * piece.log_abs(z)
    return out


def _factor_value(factor: tuple, z: np.ndarray) -> np.ndarray:
    out = np.ones(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for piece, power in factor:
            v = piece.value(z)
            out = out * (v if power == 1 else v**power)
    return out


# ---------------------------------------------------------------------------
# wave functions


@dataclass(frozen=True)
class WaveFunction:
    """Zero-mode candidate exp(-phi) F for spin '+', exp(+phi) conj(F) for '-'."""

    spin: str
    potential: ScalarPotential
    field: VectorPotential
    factor: tuple
    decay_hint: DecayHint
    label: str = ""

    @property
    def _sign(self) -> float:
        return -1.0 if self.spin == "+" else 1.0

    def log_abs(self, z) -> np.ndarray:
        z = _cplx(z)
        return self._sign * self.potential.value(z) + _factor_log_abs(self.factor, z)

    def magnitude(self, z) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_abs(z))

    def value(self, z) -> np.ndarray:
        z = _cplx(z)
        f = _factor_value(self.factor, z)
        if self.spin == "-":
            f = np.conj(f)
        with np.errstate(over="ignore"):
            return np.exp(self._sign * self.potential.value(z)) * f

    def vector_potential(self, z) -> np.ndarray:
        return self.field(z)

    def singular_sites(self, r: float) -> list[tuple[complex, float]]:
        out = []
        for p, w in self.potential.singular_sites(r):
            e = self._sign * w
            for piece, power in self.factor:
                if power:
                    e += power * piece.zero_order_at(p)
            if abs(e - round(e)) > _ZERO_TOL:
                out.append((p, e))
        return out


def sample_grid(psi: WaveFunction, x_range, y_range, nx: int, ny: int) -> np.ndarray:
    """|psi| on a rectangular grid, rows tracking y; inf marks flux sites."""
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    zg = xs[None, :] + 1j * ys[:, None]
    out = psi.magnitude(zg)
    # grid nodes that land on a site exactly: rounding in log space can
    # miss the pole/zero (sin(pi*n) != 0 in floats), so snap them
    reach = float(np.max(np.abs(zg))) + 1.0
    for p, e in psi.singular_sites(reach):
        hit = np.abs(zg - p) <= 1e-12 * max(1.0, abs(p))
        if hit.any():
            out[hit] = math.inf if e < 0.0 else 0.0
    return out


# ---------------------------------------------------------------------------
# recipe assembly


@dataclass(frozen=True)
class ZeroModeFamily:
    """Finitely many members of a zero-mode family plus recipe metadata."""

    spin: str
    f_recipe: str
    alpha_range: tuple[float, float] | None
    members: tuple[WaveFunction, ...]
    member_params: tuple[tuple[str, float], ...]
    notice: str = ""

    def generator(self, index: int) -> WaveFunction:
        return self.members[index]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def alpha_default(interval: tuple[float, float]) -> float:
    """Midpoint of an admissible open alpha interval."""
    lo, hi = interval
    if not hi > lo:
        raise DomainError("empty alpha interval")
    return 0.5 * (lo + hi)


def _alpha_grid(upper: float, count: int, alpha: float | None) -> list[float]:
    grid = [upper * i / (count + 1) for i in range(1, count + 1)]
    if alpha is not None:
        if not 0.0 < alpha < upper:
            raise DomainError(f"alpha must lie in (0, {upper:.6g})")
        rest = [a for a in grid if abs(a - alpha) > 1e-12 * max(1.0, upper)]
        grid = [alpha] + rest[: count - 1]
    return grid


def _line_groups(chains) -> list[list]:
    """Group chains by carrying line (same direction up to sign, same offset)."""
    groups: list[tuple[complex, complex, list]] = []
    for ch in chains:
        d = ch.direction
        base = ch.offsets[0].position
        placed = False
        for d0, b0, members in groups:
            if abs((d / d0).imag) <= _PARALLEL_TOL:
                delta = base - b0
                if abs((delta / d0).imag) <= 1e-9 * max(1.0, abs(delta)):
                    members.append(ch)
                    placed = True
                    break
        if not placed:
            groups.append((d, base, [ch]))
    return [g[2] for g in groups]


def _has_nonparallel(chains) -> bool:
    dirs = [c.direction for c in chains]
    return any(
        abs((d2 / d1).imag) > _PARALLEL_TOL
        for i, d1 in enumerate(dirs)
        for d2 in dirs[i + 1 :]
    )


def _line_flux_density(group) -> float:
    """pi * (flux per unit length) along one carrying line."""
    return math.pi * sum(
        sum(s.theta for s in ch.offsets) / abs(ch.omega0) for ch in group
    )


def _added_points(config: FluxConfiguration) -> tuple[list[complex], list[float]]:
    if config.perturbation is None:
        return [], []
    pts, thetas = [], []
    for grp in config.perturbation.added:
        for p in grp.points:
            pts.append(p)
            thetas.append(grp.theta)
    return pts, thetas


@dataclass
class _Member:
    factor: tuple
    hint: DecayHint
    param: tuple[str, float]


@dataclass
class _Recipe:
    kind: str
    alpha_range: tuple[float, float] | None
    members: list[_Member]
    notice: str = ""


def _monomial_members(config, count, kind, rate_fn, start=0):
    members = []
    for k in range(start, start + count):
        members.append(_Member(((Monomial(k), 1),), rate_fn(k), ("k", float(k))))
    return _Recipe(kind, None, members)


def _finite_recipe(config: FluxConfiguration, verdict: ZeroModeVerdict, count: int) -> _Recipe:
    total = sum(w for _, w in build_scalar_potential(config).singular_sites(math.inf))
    mult = verdict.multiplicity if verdict.multiplicity is not None else count
    notice = ""
    if count > mult:
        notice = f"multiplicity {mult} < requested {count}; family truncated"
        count = mult
    rec = _monomial_members(
        config, count, "Monomial", lambda k: DecayHint("power", total - k)
    )
    rec.notice = notice
    return rec


def _chain_recipe(config: FluxConfiguration, count: int, alpha: float | None) -> _Recipe:
    groups = _line_groups(config.chains)
    lead = groups[0]
    theta_bar = _line_flux_density(lead)
    origin = lead[0].offsets[0].position
    d = lead[0].direction
    if _has_nonparallel(config.chains):
        hint = DecayHint("exponential", 0.5 * min(_line_flux_density(g) for g in groups))
    else:
        hint = DecayHint("ring", -2.0)
    members = [
        _Member(((SincLine(a, origin, d), 1),), hint, ("alpha", a))
        for a in _alpha_grid(theta_bar, count, alpha)
    ]
    return _Recipe("SincChain", (0.0, theta_bar), members)


def _collinear_recipe(
    config: FluxConfiguration, cond: int, count: int, alpha: float | None
) -> _Recipe:
    chains = sorted(config.chains, key=lambda c: abs(c.omega0))
    d = chains[0].direction
    periods = [abs(c.omega0) for c in chains]
    thetas = [c.offsets[0].theta for c in chains]
    if cond == 3:
        cond = 1 if sum(thetas) < 1.0 else 2
    if cond == 1:
        upper = min(math.pi * t / p for t, p in zip(thetas, periods))
        members = []
        for a in _alpha_grid(upper, count, alpha):
            factor = tuple(
                (SincLine(a, c.offsets[0].position, d), 1) for c in chains
            )
            members.append(
                _Member(factor, DecayHint("ring", -2.0 * len(chains)), ("alpha", a))
            )
        return _Recipe("SincChain", (0.0, upper), members)
    upper = math.pi / periods[0] - math.pi * sum(
        (1.0 - t) / p for t, p in zip(thetas, periods)
    )
    arms = tuple(
        (SinArm(abs(c.omega0), c.offsets[0].position / d, d), 1) for c in chains[1:]
    )
    members = []
    for a in _alpha_grid(upper, count, alpha):
        factor = ((SincLine(a, chains[0].offsets[0].position, d), 1),) + arms
        members.append(_Member(factor, DecayHint("ring", -2.0), ("alpha", a)))
    return _Recipe("SincChain", (0.0, upper), members)


def _lattice_rate(config: FluxConfiguration) -> float:
    rate = 0.0
    for lat in config.lattices:
        mu = lattice_constants(lat.basis).mu
        rate += mu * sum(s.theta for s in lat.offsets)
    return rate


def _lattice_recipe(config: FluxConfiguration, count: int) -> _Recipe:
    rate = _lattice_rate(config)
    return _monomial_members(
        config, count, "Polynomial", lambda k: DecayHint("gaussian", rate)
    )


def _simple_lattice_recipe(config: FluxConfiguration, cond: int, count: int) -> _Recipe:
    lats = sorted(config.lattices, key=lambda l: l.basis.area)
    mus = [lattice_constants(l.basis).mu for l in lats]
    thetas = [l.offsets[0].theta for l in lats]
    if cond == 3:
        cond = 1 if sum(thetas) < 1.0 else 2
    if cond == 1:
        rate = sum(m * t for m, t in zip(mus, thetas))
        return _monomial_members(
            config, count, "Polynomial", lambda k: DecayHint("gaussian", rate)
        )
    rate = mus[0] * thetas[0] - sum(
        m * (1.0 - t) for m, t in zip(mus[1:], thetas[1:])
    )
    arms = tuple((SigmaArm(l.basis, l.offsets[0].position), 1) for l in lats[1:])
    members = [
        _Member(((Monomial(k), 1),) + arms, DecayHint("gaussian", rate), ("k", float(k)))
        for k in range(count)
    ]
    return _Recipe("Polynomial", None, members)


def _landau_lattice_recipe(config: FluxConfiguration, count: int) -> _Recipe:
    lat = config.lattices[0]
    mu = lattice_constants(lat.basis).mu
    eta0 = config.uniform_flux_density * lat.basis.area
    rate = mu * (eta0 + sum(s.theta for s in lat.offsets))
    return _monomial_members(
        config, count, "Polynomial", lambda k: DecayHint("gaussian", rate)
    )


def _vanishing_pieces(config: FluxConfiguration) -> tuple:
    """Entire factors that vanish simply on each component's site set."""
    pieces: list = []
    if config.finite_sites:
        pieces.append(LinearFactors(tuple(s.position for s in config.finite_sites)))
    for ch in config.chains:
        d = ch.direction
        for s in ch.offsets:
            pieces.append(SinArm(abs(ch.omega0), s.position / d, d))
    for lat in config.lattices:
        for s in lat.offsets:
            pieces.append(SigmaArm(lat.basis, s.position))
    if config.star is not None:
        pieces.append(StarW(config.star.order, config.star.scale))
    return tuple(pieces)


def _landau_general_recipe(config: FluxConfiguration, count: int) -> _Recipe:
    products = tuple((p, 1) for p in _vanishing_pieces(replace(config, perturbation=None)))
    rate = 0.5 * math.pi * abs(config.uniform_flux_density)
    members = [
        _Member(((Monomial(k), 1),) + products, DecayHint("gaussian", rate), ("k", float(k)))
        for k in range(count)
    ]
    return _Recipe("Polynomial", None, members)


def _perturbed_chain_recipe(config: FluxConfiguration, count: int, alpha: float | None) -> _Recipe:
    groups = _line_groups(config.chains)
    lead = groups[0]
    other_dirs = [g for g in groups if abs((g[0].direction / lead[0].direction).imag) > _PARALLEL_TOL]
    upper = 0.5 * _line_flux_density(lead)
    added, _ = _added_points(config)
    extra = ((LinearFactors(tuple(added)), 1),) if added else ()
    rate = 0.5 * min(_line_flux_density(g) for g in other_dirs)
    members = []
    for a in _alpha_grid(upper, count, alpha):
        factor = ((SincLine(a, lead[0].offsets[0].position, lead[0].direction), 1),) + extra
        members.append(_Member(factor, DecayHint("exponential", rate), ("alpha", a)))
    return _Recipe("SincChain", (0.0, upper), members)


def _parallel_exotic_recipe(config: FluxConfiguration, count: int, alpha: float | None) -> _Recipe:
    d = config.chains[0].direction
    upper = sum(
        math.pi * s.theta / abs(c.omega0) for c in config.chains for s in c.offsets
    )
    ys = [np.imag(s.position / d) for c in config.chains for s in c.offsets]
    shift = 1.0 + max(0.0, -min(ys))
    added, _ = _added_points(config)
    extra = ((LinearFactors(tuple(added)), 1),) if added else ()
    members = []
    for a in _alpha_grid(upper, count, alpha):
        factor = ((ExoticSinc(a, d, shift), 1),) + extra
        members.append(
            _Member(factor, DecayHint("exp_sqrt", 0.5 * math.sqrt(math.pi * a)), ("alpha", a))
        )
    return _Recipe("ExoticParallel", (0.0, upper), members)


def _patched_lattice_recipe(config: FluxConfiguration, count: int) -> _Recipe:
    rate = _lattice_rate(config)
    added, _ = _added_points(config)
    extra = ((LinearFactors(tuple(added)), 1),) if added else ()
    members = [
        _Member(((Monomial(k), 1),) + extra, DecayHint("gaussian", rate), ("k", float(k)))
        for k in range(count)
    ]
    return _Recipe("Polynomial", None, members)


def _star_recipe(config: FluxConfiguration, count: int, alpha: float | None) -> _Recipe:
    star = config.star
    n, theta = star.order, star.theta
    upper = math.pi * theta
    rate = 1.0 - 3.0 * n + 2.0 * theta * (n - 1.0)
    members = [
        _Member(
            ((StarSinc(a, n, star.scale), 1),),
            DecayHint("ring", rate),
            ("alpha", a),
        )
        for a in _alpha_grid(upper, count, alpha)
    ]
    return _Recipe("SincChain", (0.0, upper), members)


def _inherited_recipe(
    config: FluxConfiguration, count: int, alpha: float | None, r_max: float
) -> _Recipe:
    base_cfg = replace(config, perturbation=None)
    base_verdict = decide(base_cfg, "+", r_max=r_max)
    rec = _plus_recipe(base_cfg, base_verdict, count, alpha, r_max)
    _, thetas = _added_points(config)
    shift = sum(thetas)
    if shift and config.perturbation.removed == ():
        for m in rec.members:
            if m.hint.kind == "power":
                m.hint = DecayHint("power", m.hint.rate + shift)
            elif m.hint.kind == "ring":
                m.hint = DecayHint("ring", m.hint.rate - 2.0 * shift)
    return rec


def _plus_recipe(
    config: FluxConfiguration,
    verdict: ZeroModeVerdict,
    count: int,
    alpha: float | None,
    r_max: float,
) -> _Recipe:
    thm = verdict.theorem
    cond = int(verdict.condition_values.get("conditionIndex", 0))
    if thm == "Thm 6.1":
        return _finite_recipe(config, verdict, count)
    if thm == "Thm 6.3":
        return _chain_recipe(config, count, alpha)
    if thm == "Thm 6.4":
        return _collinear_recipe(config, cond, count, alpha)
    if thm in ("Thm 6.5", "Thm 6.New"):
        return _lattice_recipe(config, count)
    if thm == "§7.4 lattice theorem":
        return _simple_lattice_recipe(config, cond, count)
    if thm == "Thm 6.8":
        return _landau_lattice_recipe(config, count)
    if thm == "Thm 6.7":
        return _landau_general_recipe(config, count)
    if thm == "Thm 7.1":
        return _inherited_recipe(config, count, alpha, r_max)
    if thm == "Thm 7.3":
        return _perturbed_chain_recipe(config, count, alpha)
    if thm == "Thm 7.4":
        return _parallel_exotic_recipe(config, count, alpha)
    if thm == "§8.4 theorem":
        return _patched_lattice_recipe(config, count)
    if thm == "§7.5 theorem":
        return _star_recipe(config, count, alpha)
    raise NoModesError(f"no construction recipe for verdict {thm!r}")


def build_zero_modes(
    config: FluxConfiguration,
    verdict: ZeroModeVerdict,
    count: int,
    *,
    alpha: float | None = None,
    r_max: float = DEFAULT_R_MAX,
) -> ZeroModeFamily:
    """Construct `count` linearly independent zero modes for an Exists verdict.

    The f-factor recipe follows the theorem cited by the verdict; spin '-'
    families are the flux mirror of the spin '+' construction.  `alpha`
    overrides the first grid value for sinc-type recipes.
    """
    if count < 1:
        raise DomainError("count must be a positive integer")
    if verdict.status not in _EXISTS:
        raise NoModesError(f"verdict {verdict.status!r} asserts no zero modes to build")
    _require_normalized(config)

    phi = build_scalar_potential(config)
    a_field = build_vector_potential(phi)

    if verdict.spin == "+":
        rec = _plus_recipe(config, verdict, count, alpha, r_max)
        wrap: tuple = ()
    else:
        mirror = mirror_configuration(config)
        mv = decide(mirror, "+", r_max=r_max)
        if mv.status not in _EXISTS:
            raise NoModesError("mirror construction unavailable for this verdict")
        rec = _plus_recipe(mirror, mv, count, alpha, r_max)
        wrap = tuple((p, -1) for p in _vanishing_pieces(config))
        if config.perturbation is not None:
            removed = config.perturbation.removed
            added, _ = _added_points(config)
            if removed:
                wrap = wrap + ((LinearFactors(tuple(removed)), 1),)
            if added:
                wrap = wrap + ((LinearFactors(tuple(added)), -1),)

    members = tuple(
        WaveFunction(
            verdict.spin,
            phi,
            a_field,
            m.factor + wrap,
            m.hint,
            label=f"{rec.kind}({m.param[0]}={m.param[1]:.6g})",
        )
        for m in rec.members
    )
    return ZeroModeFamily(
        spin=verdict.spin,
        f_recipe=rec.kind,
        alpha_range=rec.alpha_range,
        members=members,
        member_params=tuple(m.param for m in rec.members),
        notice=rec.notice,
    )


def build_divergence_candidate(
    config: FluxConfiguration, verdict: ZeroModeVerdict
) -> WaveFunction:
    """Canonical would-be mode for a NotExists verdict (constant f factor).

    Running the quadrature certifier on it is expected to report divergence;
    that is the numerical counterpart of the non-existence statement.
    """
    if verdict.status != "NotExists":
        raise NoModesError("divergence candidates exist only for NotExists verdicts")
    _require_normalized(config)
    phi = build_scalar_potential(config)
    a_field = build_vector_potential(phi)
    if verdict.spin == "+":
        factor: tuple = ()
    else:
        # modulus exp(+phi)/prod|W|: every actual site contributes 1 - theta
        factor = tuple((p, -1) for p in _vanishing_pieces(config))
        if config.perturbation is not None:
            removed = config.perturbation.removed
            added, _ = _added_points(config)
            if removed:
                factor = factor + ((LinearFactors(tuple(removed)), 1),)
            if added:
                factor = factor + ((LinearFactors(tuple(added)), -1),)
    if config.uniform_flux_density != 0.0 or config.lattices:
        hint = DecayHint("gaussian", 0.0)
    elif config.chains or config.star is not None:
        hint = DecayHint("ring", 0.0)
    else:
        reach = max((abs(t.position) for t in phi.terms), default=0.0) + 1.0
        sites = phi.singular_sites(reach)
        if verdict.spin == "+":
            rate = sum(w for _, w in sites)
        else:
            rate = sum(1.0 - w for _, w in sites)
        hint = DecayHint("power", rate)
    return WaveFunction(verdict.spin, phi, a_field, factor, hint, label="divergence-candidate")
