"""Flux-configuration data model and point-set analytics.

A configuration is a uniform field density plus an arrangement of
Aharonov-Bohm fluxes: isolated sites, periodic chains (rank-1 lattices of
parallel lines), full rank-2 lattices, an optional N-fold star of integer
roots, and an optional discrete perturbation (removed / added points).

All components are immutable; analytics are pure functions.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .special import DomainError, LatticeBasis

_COINCIDENCE_TOL = 1e-9


class ConfigError(ValueError):
    """Malformed or inconsistent flux configuration."""


class ChainMergeError(ConfigError):
    """Same-line chains with incommensurable periods: union not uniformly discrete."""


@dataclass(frozen=True)
class FluxSite:
    position: complex
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "position", complex(self.position))
        object.__setattr__(self, "theta", float(self.theta))
        if not (cmath.isfinite(self.position) and math.isfinite(self.theta)):
            raise ConfigError("flux site fields must be finite")


@dataclass(frozen=True)
class ChainComponent:
    """Points kappa + omega0 * Z for each offset kappa; omega0 may be any
    nonzero complex direction."""

    omega0: complex
    offsets: tuple[FluxSite, ...]

    def __post_init__(self):
        object.__setattr__(self, "omega0", complex(self.omega0))
        object.__setattr__(self, "offsets", tuple(self.offsets))
        if self.omega0 == 0:
            raise ConfigError("chain period must be nonzero")
        if not self.offsets:
            raise ConfigError("chain needs at least one offset")

    @property
    def direction(self) -> complex:
        return self.omega0 / abs(self.omega0)


@dataclass(frozen=True)
class LatticeComponent:
    basis: LatticeBasis
    offsets: tuple[FluxSite, ...]

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(self.offsets))
        if not self.offsets:
            raise ConfigError("lattice needs at least one offset")


@dataclass(frozen=True)
class StarComponent:
    """N-fold star: all N-th roots of the positive integers on 2N rays,
    plus the origin; every site carries the same flux."""

    order: int
    theta: float
    scale: float = 1.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ConfigError("star order must be an integer >= 2")
        object.__setattr__(self, "order", int(self.order))
        if not (self.scale > 0):
            raise ConfigError("star scale must be positive")


@dataclass(frozen=True)
class AddedSet:
    points: tuple[complex, ...]
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))


@dataclass(frozen=True)
class Perturbation:
    removed: tuple[complex, ...] = ()
    added: tuple[AddedSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "removed", tuple(complex(p) for p in self.removed))
        object.__setattr__(self, "added", tuple(self.added))


@dataclass(frozen=True)
class FluxConfiguration:
    uniform_flux_density: float = 0.0  # xi0; the field is b0 = 2 pi xi0
    finite_sites: tuple[FluxSite, ...] = ()
    chains: tuple[ChainComponent, ...] = ()
    lattices: tuple[LatticeComponent, ...] = ()
    star: StarComponent | None = None
    perturbation: Perturbation | None = None

    def __post_init__(self):
        object.__setattr__(self, "finite_sites", tuple(self.finite_sites))
        object.__setattr__(self, "chains", tuple(self.chains))
        object.__setattr__(self, "lattices", tuple(self.lattices))
        if not math.isfinite(self.uniform_flux_density):
            raise ConfigError("uniform flux density must be finite")

    @property
    def is_empty(self) -> bool:
        return not (self.finite_sites or self.chains or self.lattices or self.star
                    or (self.perturbation and self.perturbation.added))


# ---------------------------------------------------------------------------
# normalization


def _frac(theta: float) -> tuple[float, int]:
    m = math.floor(theta)
    f = theta - m
    if f >= 1.0:  # theta one ulp below an integer rounds up: treat as integer flux
        return 0.0, m + 1
    return f, m


def _reduce_chain_offset(kappa: complex, omega0: complex) -> tuple[complex, int]:
    # elementary strip: 0 <= Re(conj(kappa) * omega0) < |omega0|^2
    t = (kappa.conjugate() * omega0).real / abs(omega0) ** 2
    m = math.floor(t)
    return kappa - m * omega0, m


def _reduce_lattice_offset(kappa: complex, basis: LatticeBasis) -> tuple[complex, tuple[int, int]]:
    w = kappa / basis.omega1
    tau = basis.omega2 / basis.omega1
    y = w.imag / tau.imag
    x = w.real - y * tau.real
    m1, m2 = math.floor(x), math.floor(y)
    return kappa - m1 * basis.omega1 - m2 * basis.omega2, (m1, m2)


def normalize_fluxes(config: FluxConfiguration) -> tuple[FluxConfiguration, list[dict]]:
    """Reduce every flux to its fractional part in (0, 1) and every offset to
    the elementary strip/cell; integer fluxes disappear (pure gauge).

    Returns the normalized configuration and a gauge log listing every
    integer shift and every eliminated site.  Idempotent.
    """
    log: list[dict] = []

    def norm_site(site: FluxSite, where: str) -> FluxSite | None:
        th, m = _frac(site.theta)
        if m != 0:
            log.append({"kind": where, "position": site.position, "shift": m})
        if th == 0.0:
            log.append({"kind": where, "position": site.position, "removed": True})
            return None
        return FluxSite(site.position, th)

    finite = tuple(s for s in (norm_site(s, "finite") for s in config.finite_sites) if s)

    chains = []
    for ch in config.chains:
        offs = []
        for off in ch.offsets:
            s = norm_site(off, "chain_offset")
            if s is None:
                continue
            kappa, m = _reduce_chain_offset(s.position, ch.omega0)
            if m != 0:
                log.append({"kind": "chain_offset", "position": s.position, "cell_shift": m})
            offs.append(FluxSite(kappa, s.theta))
        if offs:
            _check_distinct([o.position for o in offs], "chain offsets")
            chains.append(ChainComponent(ch.omega0, tuple(offs)))

    lattices = []
    for lat in config.lattices:
        offs = []
        for off in lat.offsets:
            s = norm_site(off, "lattice_offset")
            if s is None:
                continue
            kappa, m = _reduce_lattice_offset(s.position, lat.basis)
            if m != (0, 0):
                log.append({"kind": "lattice_offset", "position": s.position, "cell_shift": m})
            offs.append(FluxSite(kappa, s.theta))
        if offs:
            _check_distinct([o.position for o in offs], "lattice offsets")
            lattices.append(LatticeComponent(lat.basis, tuple(offs)))

    star = config.star
    if star is not None:
        th, m = _frac(star.theta)
        if m != 0:
            log.append({"kind": "star", "shift": m})
        star = StarComponent(star.order, th, star.scale) if th != 0.0 else None
        if star is None:
            log.append({"kind": "star", "removed": True})

    pert = config.perturbation
    if pert is not None:
        added = []
        for a in pert.added:
            th, m = _frac(a.theta)
            if m != 0:
                log.append({"kind": "added_set", "shift": m})
            if th != 0.0:
                added.append(AddedSet(a.points, th))
        pert = Perturbation(pert.removed, tuple(added))
        if not pert.removed and not pert.added:
            pert = None

    out = FluxConfiguration(
        uniform_flux_density=config.uniform_flux_density,
        finite_sites=finite,
        chains=tuple(chains),
        lattices=tuple(lattices),
        star=star,
        perturbation=pert,
    )
    return out, log


def _check_distinct(points: Sequence[complex], what: str) -> None:
    pts = list(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < _COINCIDENCE_TOL:
                raise ConfigError(f"coincident {what}: {pts[i]}")


def mirror_configuration(config: FluxConfiguration) -> FluxConfiguration:
    """Flux-reversed twin: theta -> 1 - theta at every site, xi0 -> -xi0.

    The spin-down problem for a configuration coincides with the spin-up
    problem for its mirror, so dual existence conditions and dual wave
    functions are all phrased through this map.  Normalized input stays
    normalized (1 - theta is again in (0, 1), offsets untouched).
    """

    def flip(s: FluxSite) -> FluxSite:
        return FluxSite(s.position, 1.0 - s.theta)

    chains = tuple(
        ChainComponent(c.omega0, tuple(flip(s) for s in c.offsets)) for c in config.chains
    )
    lattices = tuple(
        LatticeComponent(l.basis, tuple(flip(s) for s in l.offsets)) for l in config.lattices
    )
    star = config.star
    if star is not None:
        star = StarComponent(star.order, 1.0 - star.theta, star.scale)
    pert = config.perturbation
    if pert is not None:
        pert = Perturbation(
            pert.removed,
            tuple(AddedSet(a.points, 1.0 - a.theta) for a in pert.added),
        )
    return FluxConfiguration(
        uniform_flux_density=-config.uniform_flux_density,
        finite_sites=tuple(flip(s) for s in config.finite_sites),
        chains=chains,
        lattices=lattices,
        star=star,
        perturbation=pert,
    )


# ---------------------------------------------------------------------------
# chain merging


def _as_rational(x: float, cap: int = 10**6, rel: float = 1e-13) -> Fraction | None:
    """Recognize a float as a small-denominator rational, or return None.

    A rational ratio of floats matches its fraction to a few ulp; the best
    den<=cap approximant of an irrational sits several orders farther out.
    """
    fr = Fraction(x).limit_denominator(cap)
    if abs(x - float(fr)) > rel * max(1.0, abs(x)):
        return None
    return fr


def _chain_line(chain: ChainComponent) -> tuple[complex, complex] | None:
    """(anchor, unit direction) if the whole component lies on one line."""
    d = chain.direction
    anchor = chain.offsets[0].position
    for off in chain.offsets:
        rel = (off.position - anchor) / d
        if abs(rel.imag) > _COINCIDENCE_TOL:
            return None
    return anchor, d


def merge_collinear_chains(chains: Sequence[ChainComponent]) -> ChainComponent:
    """Merge chains sharing a single line into one chain, or reject.

    All period ratios must be rational (continued-fraction detection with
    denominators up to 1e6); otherwise the union is dense in the line, not
    uniformly discrete, and a ChainMergeError is raised.  Coincident points
    get their fluxes summed, then renormalized to (0, 1).
    """
    chains = list(chains)
    if not chains:
        raise ConfigError("nothing to merge")
    lines = [_chain_line(c) for c in chains]
    if any(l is None for l in lines):
        raise ConfigError("merge requires every component to lie on a single line")
    anchor, d = lines[0]
    for (a, dd), ch in zip(lines, chains):
        if abs((dd / d).imag) > _COINCIDENCE_TOL:
            raise ConfigError("chains are not parallel")
        if abs(((a - anchor) / d).imag) > _COINCIDENCE_TOL:
            raise ConfigError("chains lie on different parallel lines")

    # periods as real multiples of the common direction
    periods = [(c.omega0 / d).real for c in chains]
    base = periods[0]
    ratios: list[Fraction] = []
    for p in periods:
        fr = _as_rational(p / base)
        if fr is None or fr == 0:
            raise ChainMergeError(
                "incommensurable chain periods: union dense in the line, "
                "not uniformly discrete"
            )
        ratios.append(abs(fr))

    # least common multiple of the rational ratios
    num = 1
    for fr in ratios:
        num = num * fr.numerator // math.gcd(num, fr.numerator)
    den = ratios[0].denominator
    for fr in ratios[1:]:
        den = math.gcd(den, fr.denominator)
    period = abs(base) * num / den
    omega0 = period * d

    # collect residues of every chain modulo the merged period
    total = sum(round(period / abs(p)) * len(c.offsets) for c, p in zip(chains, periods))
    if total > 100_000:
        raise ConfigError("merged chain would carry too many residues to be usable")
    sites: list[FluxSite] = []
    for ch, p in zip(chains, periods):
        step = abs(p)
        copies = round(period / step)
        for off in ch.offsets:
            for k in range(copies):
                kappa = off.position + k * step * d * (1 if p > 0 else -1)
                kappa, _ = _reduce_chain_offset(kappa, omega0)
                sites.append(FluxSite(kappa, off.theta))

    merged: list[FluxSite] = []
    for s in sites:
        for i, t in enumerate(merged):
            if abs(t.position - s.position) < _COINCIDENCE_TOL:
                merged[i] = FluxSite(t.position, t.theta + s.theta)
                break
        else:
            merged.append(s)
    out = []
    for s in merged:
        th, _ = _frac(s.theta)
        if th != 0.0:
            out.append(FluxSite(s.position, th))
    if not out:
        raise ConfigError("merged chain has only integer fluxes left")
    out.sort(key=lambda s: (s.position.conjugate() * omega0).real)
    return ChainComponent(omega0, tuple(out))


# ---------------------------------------------------------------------------
# support enumeration


def _enumerate_chain(ch: ChainComponent, r_max: float) -> list[FluxSite]:
    pts = []
    for off in ch.offsets:
        span = (r_max + abs(off.position)) / abs(ch.omega0) + 1
        ks = np.arange(-math.ceil(span), math.ceil(span) + 1)
        pos = off.position + ks * ch.omega0
        keep = np.abs(pos) <= r_max
        pts.extend(FluxSite(p, off.theta) for p in pos[keep])
    return pts


def _enumerate_lattice(lat: LatticeComponent, r_max: float) -> list[FluxSite]:
    w1, w2 = lat.basis.omega1, lat.basis.omega2
    S = lat.basis.area
    pts = []
    for off in lat.offsets:
        r = r_max + abs(off.position)
        b1 = math.ceil(r * abs(w2) / S) + 1
        b2 = math.ceil(r * abs(w1) / S) + 1
        m1 = np.arange(-b1, b1 + 1)
        m2 = np.arange(-b2, b2 + 1)
        grid = off.position + m1[:, None] * w1 + m2[None, :] * w2
        grid = grid.ravel()
        keep = np.abs(grid) <= r_max
        pts.extend(FluxSite(p, off.theta) for p in grid[keep])
    return pts


def _enumerate_star(star: StarComponent, r_max: float) -> list[FluxSite]:
    pts = [FluxSite(0.0, star.theta)]
    m_max = int((r_max / star.scale) ** star.order) + 1
    if m_max > 5_000_000:
        raise ConfigError("star enumeration radius too large")
    n = star.order
    for m in range(1, m_max + 1):
        rad = star.scale * m ** (1.0 / n)
        if rad > r_max:
            break
        for k in range(2 * n):
            pts.append(FluxSite(rad * cmath.exp(1j * math.pi * k / n), star.theta))
    return pts


def enumerate_support(config: FluxConfiguration, r_max: float) -> list[FluxSite]:
    """Every flux site with |position| <= r_max, perturbation applied.

    Deterministic order: ascending |z|, then ascending arg.  Raises on
    coincidences between components or between added and regular sites.
    """
    if not (r_max > 0):
        raise ConfigError("r_max must be positive")
    sites: list[FluxSite] = [s for s in config.finite_sites if abs(s.position) <= r_max]
    for ch in config.chains:
        sites.extend(_enumerate_chain(ch, r_max))
    for lat in config.lattices:
        sites.extend(_enumerate_lattice(lat, r_max))
    if config.star is not None:
        sites.extend(_enumerate_star(config.star, r_max))

    _reject_close_pairs(sites, "components overlap")

    pert = config.perturbation
    if pert is not None:
        for rm in pert.removed:
            hit = [i for i, s in enumerate(sites) if abs(s.position - rm) < _COINCIDENCE_TOL]
            if not hit and abs(rm) <= r_max:
                raise ConfigError(f"removed point {rm} is not a site")
            for i in reversed(hit):
                sites.pop(i)
        added = []
        for a in pert.added:
            added.extend(FluxSite(p, a.theta) for p in a.points if abs(p) <= r_max)
        for s in added:
            if any(abs(s.position - t.position) < _COINCIDENCE_TOL for t in sites):
                raise ConfigError(f"added point {s.position} collides with a regular site")
        _reject_close_pairs(added, "added sets overlap")
        sites.extend(added)

    sites.sort(key=lambda s: (abs(s.position), cmath.phase(s.position) if s.position else -4.0))
    return sites


def _reject_close_pairs(sites: list[FluxSite], msg: str) -> None:
    if len(sites) < 2:
        return
    pos = np.array([s.position for s in sites])
    order = np.argsort(pos.real)
    pos = pos[order]
    # sweep by real part; coincidences must be near-equal in both coordinates
    for i in range(len(pos) - 1):
        j = i + 1
        while j < len(pos) and pos[j].real - pos[i].real < _COINCIDENCE_TOL:
            if abs(pos[j] - pos[i]) < _COINCIDENCE_TOL:
                raise ConfigError(f"{msg}: duplicate site at {pos[i]}")
            j += 1


# ---------------------------------------------------------------------------
# set statistics


@dataclass
class SetStats:
    """Counting function and power sums of a discrete set, for r <= r_max.

    counting_fn(r) counts all points (origin included) with |w| <= r;
    sum_s(alpha, r) is the complex sum of w^-alpha over 0 < |w| <= r;
    sum_t(alpha, r) the corresponding absolute sum.
    """

    counting_fn: Callable[[float], int]
    sum_s: Callable[[float, float], complex]
    sum_t: Callable[[float, float], float]
    convergence_exponent: float
    genus: int
    r_max: float
    low_confidence: bool


def set_stats(points, r_max: float) -> SetStats:
    """Analyze a discrete point set given as an array or a generator R -> points.

    The generator form must enumerate every point with |w| <= R.
    """
    if callable(points):
        pts = np.asarray(points(r_max), dtype=complex).ravel()
    else:
        pts = np.asarray(points, dtype=complex).ravel()
        pts = pts[np.abs(pts) <= r_max]
    radii = np.sort(np.abs(pts))
    nonzero = pts[np.abs(pts) > 0]
    order = np.argsort(np.abs(nonzero))
    nz = nonzero[order]
    nz_abs = np.abs(nz)

    def counting_fn(r: float) -> int:
        if r > r_max * (1 + 1e-12):
            raise DomainError("counting function beyond analyzed radius")
        return int(np.searchsorted(radii, r, side="right"))

    def sum_s(alpha: float, r: float) -> complex:
        k = np.searchsorted(nz_abs, r, side="right")
        return complex(np.sum(nz[:k] ** (-alpha)))

    def sum_t(alpha: float, r: float) -> float:
        k = np.searchsorted(nz_abs, r, side="right")
        return float(np.sum(nz_abs[:k] ** (-alpha)))

    r_min = nz_abs[0] if nz.size else 1.0
    decades = math.log10(r_max / r_min) if nz.size else 0.0
    low_confidence = decades < 2.0

    # convergence exponent: least-squares slope of ln n(r) vs ln r, top decade
    if nz.size >= 4:
        grid = np.geomspace(max(r_min * 1.01, r_max / 10), r_max, 24)
        counts = np.array([counting_fn(g) for g in grid], dtype=float)
        keep = counts > 0
        slope = _ls_slope(np.log(grid[keep]), np.log(counts[keep]))
        conv = max(0.0, slope)
    else:
        conv = 0.0

    genus = 0
    for n in range(1, 7):
        if _diverges(sum_t, n, r_min, r_max) and nz.size:
            genus = n
    return SetStats(counting_fn, sum_s, sum_t, conv, genus, float(r_max), low_confidence)


def _ls_slope(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    denom = float(np.dot(x, x))
    return float(np.dot(x, y - y.mean()) / denom) if denom > 0 else 0.0


def _diverges(sum_t, alpha: int, r_min: float, r_max: float) -> bool:
    """Log-linear trend test: T(alpha, r) keeps growing like log r."""
    grid = np.geomspace(max(2.0 * r_min, r_max ** 0.25), r_max, 16)
    vals = np.array([sum_t(alpha, g) for g in grid])
    if vals[-1] <= 0 or np.ptp(vals) == 0:
        return False
    lx = np.log(grid)
    corr = np.corrcoef(lx, vals)[0, 1]
    # correlation alone cannot separate log-growth from a convergent tail:
    # also require the last half of the grid to add a comparable increment
    mid = len(grid) // 2
    inc1 = vals[mid] - vals[0]
    inc2 = vals[-1] - vals[mid]
    if inc1 <= 0:
        return False
    return bool(corr > 0.99 and inc2 / inc1 > 0.45)


# ---------------------------------------------------------------------------
# serialization


def _c2pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _pair2c(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"expected [re, im] pair, got {v!r}")


def config_to_dict(config: FluxConfiguration) -> dict:
    doc: dict = {"uniform_flux_density": config.uniform_flux_density}
    if config.finite_sites:
        doc["finite"] = [
            {"position": _c2pair(s.position), "theta": s.theta} for s in config.finite_sites
        ]
    if config.chains:
        doc["chains"] = [
            {
                "omega0": _c2pair(c.omega0),
                "offsets": [{"kappa": _c2pair(o.position), "theta": o.theta} for o in c.offsets],
            }
            for c in config.chains
        ]
    if config.lattices:
        doc["lattices"] = [
            {
                "omega1": _c2pair(l.basis.omega1),
                "omega2": _c2pair(l.basis.omega2),
                "offsets": [{"kappa": _c2pair(o.position), "theta": o.theta} for o in l.offsets],
            }
            for l in config.lattices
        ]
    if config.star is not None:
        doc["star"] = {
            "order": config.star.order,
            "theta": config.star.theta,
            "scale": config.star.scale,
        }
    if config.perturbation is not None:
        p: dict = {}
        if config.perturbation.removed:
            p["removed"] = [_c2pair(q) for q in config.perturbation.removed]
        if config.perturbation.added:
            p["added"] = [
                {"points": [_c2pair(q) for q in a.points], "theta": a.theta}
                for a in config.perturbation.added
            ]
        doc["perturbation"] = p
    return doc


def config_from_dict(doc: dict) -> FluxConfiguration:
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a mapping")
    known = {"uniform_flux_density", "finite", "chains", "lattices", "star", "perturbation"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
    try:
        finite = tuple(
            FluxSite(_pair2c(s["position"]), float(s["theta"])) for s in doc.get("finite", [])
        )
        chains = tuple(
            ChainComponent(
                _pair2c(c["omega0"]),
                tuple(FluxSite(_pair2c(o["kappa"]), float(o["theta"])) for o in c["offsets"]),
            )
            for c in doc.get("chains", [])
        )
        lattices = tuple(
            LatticeComponent(
                LatticeBasis(_pair2c(l["omega1"]), _pair2c(l["omega2"])),
                tuple(FluxSite(_pair2c(o["kappa"]), float(o["theta"])) for o in l["offsets"]),
            )
            for l in doc.get("lattices", [])
        )
        star = None
        if "star" in doc:
            s = doc["star"]
            star = StarComponent(int(s["order"]), float(s["theta"]), float(s.get("scale", 1.0)))
        pert = None
        if "perturbation" in doc:
            p = doc["perturbation"]
            pert = Perturbation(
                removed=tuple(_pair2c(q) for q in p.get("removed", [])),
                added=tuple(
                    AddedSet(tuple(_pair2c(q) for q in a["points"]), float(a["theta"]))
                    for a in p.get("added", [])
                ),
            )
        return FluxConfiguration(
            uniform_flux_density=float(doc.get("uniform_flux_density", 0.0)),
            finite_sites=finite,
            chains=chains,
            lattices=lattices,
            star=star,
            perturbation=pert,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed configuration: {exc}") from exc


def load_config(path) -> FluxConfiguration:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(doc)


def save_config(config: FluxConfiguration, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# uniform discreteness


def _plane_coords(z: complex, basis: LatticeBasis) -> tuple[float, float]:
    """Real coordinates (a, b) with z = a*omega1 + b*omega2."""
    w1, w2 = basis.omega1, basis.omega2
    det = (w1.conjugate() * w2).imag
    a = (z.conjugate() * w2).imag / det
    b = (w1.conjugate() * z).imag / det
    return a, b


def uniformly_discrete(config: FluxConfiguration, window: float = 40.0) -> tuple[bool, float]:
    """(verdict, min gap) for the full support.

    Commensurability questions are settled analytically (rational period
    ratios for same-line chains, rational basis coordinates between lattice
    pairs and for chain steps inside a lattice), because a windowed minimum
    gap cannot see near-coincidences beyond the window.  The remaining
    periodic/finite arrangements are checked by the exact minimum pairwise
    gap within the window.
    """
    if config.star is not None:
        # consecutive radii m^(1/N) approach each other: never uniformly discrete
        return False, 0.0

    # chains sharing one line must merge into a single chain
    groups: dict[tuple, list[ChainComponent]] = {}
    for ch in config.chains:
        line = _chain_line(ch)
        if line is None:
            # offsets form parallel lines inside one component: uniformly
            # discrete by construction (finitely many distinct lines)
            continue
        anchor, d = line
        # canonical line key: direction mod sign, signed distance from origin
        dd = d if (d.real, d.imag) >= (0, 0) else -d
        dist = (anchor / dd).imag
        key = (round(dd.real, 9), round(dd.imag, 9), round(dist, 9))
        groups.setdefault(key, []).append(ch)
    for group in groups.values():
        if len(group) > 1:
            try:
                merge_collinear_chains(group)
            except ChainMergeError:
                return False, 0.0

    # lattice pair: the difference group is discrete iff the second basis
    # has rational coordinates in the first
    for i, la in enumerate(config.lattices):
        for lb in config.lattices[i + 1 :]:
            for vec in (lb.basis.omega1, lb.basis.omega2):
                a, b = _plane_coords(vec, la.basis)
                if _as_rational(a) is None or _as_rational(b) is None:
                    return False, 0.0
    # chain against lattice: an irrational step equidistributes the chain
    # residues in the lattice cell
    for ch in config.chains:
        for la in config.lattices:
            a, b = _plane_coords(ch.omega0, la.basis)
            if _as_rational(a) is None or _as_rational(b) is None:
                return False, 0.0

    sites = enumerate_support(config, window)
    if len(sites) < 2:
        return True, math.inf
    pos = np.array([s.position for s in sites])
    gap = _min_gap(pos)
    return gap > 1e-6, gap


def _min_gap(pos: np.ndarray) -> float:
    try:
        from scipy.spatial import cKDTree

        pts = np.column_stack([pos.real, pos.imag])
        d, _ = cKDTree(pts).query(pts, k=2)
        return float(d[:, 1].min())
    except Exception:  # pragma: no cover - scipy always present in practice
        best = math.inf
        for i in range(len(pos)):
            d = np.abs(pos[i + 1 :] - pos[i])
            if d.size:
                best = min(best, float(d.min()))
        return best
