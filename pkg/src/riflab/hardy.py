"""H^p integrability of partial derivatives of RIFs.

For ``zhat`` on the torus ``T^{n-1}`` the slice ``z_k -> phi(z_k, zhat)``
is a finite Blaschke product ``b``, and ``d phi / d z_k = b'``.  The
p-th power means of ``|b'|`` on circles of radius ``r`` increase to the
boundary mean, so the H^p question reduces to how the slice zeros
approach the circle.  Two routes are offered:

* direct radial means on tori ``{|z_k| = r} x T^{n-1}`` with the growth
  exponent of their increments as ``r -> 1``;
* the measure of ``Omega_x = {zhat : delta(zhat) < 1/x}``: if it decays
  like ``x^s`` the derivative lies in H^p exactly for ``p < 1 - s``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .rif import RIF, slice_batch

log = logging.getLogger(__name__)

# stand-in for an infinite threshold (bounded derivative)
BOUNDED_SENTINEL = 1e6


class DegenerateSamples(RuntimeError):
    pass


def _torus_grid(n_free: int, per_dim: int) -> tuple[np.ndarray, np.ndarray]:
    # midpoint grid: never lands exactly on a point with theta = 0
    if n_free == 0:
        return np.zeros((1, 0), complex), np.ones(1)
    th = 2 * np.pi * (np.arange(per_dim) + 0.5) / per_dim
    mesh = np.meshgrid(*([th] * n_free), indexing="ij")
    pts = np.exp(1j * np.stack([m.ravel() for m in mesh], axis=-1))
    return pts, np.full(len(pts), 1.0 / len(pts))


def _default_per_dim(n: int) -> int:
    return {1: 1, 2: 4096, 3: 96}.get(n, max(8, int(round(8192 ** (1 / (n - 1))))))


@dataclass(frozen=True)
class HardyGrid:
    """Quadrature for radial p-th power means of ``|d phi / d z_k|``.

    ``zhat_per_dim`` midpoints per torus variable (default by ``n``);
    each slice circle is cut into ``uniform_panels`` equal panels plus
    panels graded geometrically around every zero's argument, each with
    ``gauss`` Gauss-Legendre nodes.  Radii are ``1 - 2^-j`` for ``j`` in
    ``radius_levels``.
    """

    zhat_per_dim: int | None = None
    gauss: int = 8
    uniform_panels: int = 16
    radius_levels: tuple = tuple(range(3, 11))
    growth_margin: float = 0.05
    block: int = 1024


def _abs_bprime(zeros: np.ndarray, z: np.ndarray, boundary: bool) -> np.ndarray:
    # |b'(z)| for rows of zeros (S, d) NaN-padded, z (S, Q)
    S, d = zeros.shape
    valid = ~np.isnan(zeros)
    a = np.where(valid, zeros, 0.0)[:, :, None]
    m = valid[:, :, None]
    if boundary:
        t = (1 - np.abs(a) ** 2) / np.abs(z[:, None, :] - a) ** 2
        return np.sum(np.where(m, t, 0.0), axis=1)
    den = 1 - np.conj(a) * z[:, None, :]
    B = np.where(m, (z[:, None, :] - a) / den, 1.0)
    D = np.where(m, (1 - np.abs(a) ** 2) / den**2, 0.0)
    total = np.zeros(z.shape, complex)
    for j in range(d):
        others = np.prod(np.delete(B, j, axis=1), axis=1) if d > 1 else 1.0
        total += D[:, j, :] * others
    return np.abs(total)


def _circle_nodes(zeros: np.ndarray, r: float, cfg: HardyGrid) -> tuple[np.ndarray, np.ndarray]:
    """Angles (S, Q) and weights (S, Q) for ``(1/2pi) int_0^{2pi} d theta``."""
    S, d = zeros.shape
    base = 2 * np.pi * np.arange(cfg.uniform_panels + 1) / cfg.uniform_panels
    rho = np.abs(zeros)
    with np.errstate(divide="ignore", invalid="ignore"):
        width = np.where(np.isnan(rho), np.nan, 1 / rho - r)
    wmin = np.nanmin(width) if np.any(~np.isnan(width)) else 1.0
    levels = int(min(60, max(1, math.ceil(math.log2(math.pi / max(wmin, 1e-300))) + 1)))
    scale = 2.0 ** np.arange(levels)
    off = np.clip(width[:, :, None] * scale, None, math.pi)
    psi = np.angle(zeros)[:, :, None]
    graded = np.concatenate([psi - off, psi + off], axis=2).reshape(S, -1)
    # padded zeros fall back onto a uniform breakpoint (zero-length panels)
    graded = np.where(np.isnan(graded), 0.0, np.mod(graded, 2 * np.pi))
    bp = np.sort(np.concatenate([np.broadcast_to(base, (S, len(base))), graded], axis=1), axis=1)
    lo, hi = bp[:, :-1], bp[:, 1:]
    x, w = roots_legendre(cfg.gauss)
    half = (hi - lo) / 2
    theta = (lo + half)[:, :, None] + half[:, :, None] * x
    wt = half[:, :, None] * w / (2 * np.pi)
    return theta.reshape(S, -1), wt.reshape(S, -1)


class _RadialSamples:
    """``log|b'|`` and weights on each radius, reusable across exponents ``p``."""

    def __init__(self, f: RIF, k: int, cfg: HardyGrid):
        self.cfg = cfg
        per = cfg.zhat_per_dim or _default_per_dim(f.n)
        zhat, zw = _torus_grid(f.n - 1, per)
        self.radii = tuple(1 - 2.0**-j for j in cfg.radius_levels) + (1.0,)
        self.logs = {r: [] for r in self.radii}
        self.wts = {r: [] for r in self.radii}
        self.vanished = 0
        for a in range(0, len(zhat), cfg.block):
            sb = slice_batch(f, k, zhat[a : a + cfg.block])
            keep = ~sb.vanished
            self.vanished += int(np.sum(sb.vanished))
            zeros = sb.zeros[keep]
            zwb = zw[a : a + cfg.block][keep]
            for r in self.radii:
                th, wt = _circle_nodes(zeros, r, cfg)
                v = _abs_bprime(zeros, r * np.exp(1j * th), boundary=r == 1.0)
                with np.errstate(divide="ignore"):
                    self.logs[r].append(np.log(v).astype(np.float32))
                self.wts[r].append((wt * zwb[:, None]).astype(np.float32))
        for r in self.radii:
            self.logs[r] = np.concatenate([x.ravel() for x in self.logs[r]])
            self.wts[r] = np.concatenate([x.ravel() for x in self.wts[r]])

    def mean(self, r: float, p: float) -> float:
        lg = self.logs[r].astype(float)
        return float(np.sum(self.wts[r].astype(float) * np.exp(p * lg)))


@dataclass(frozen=True)
class HpEstimate:
    k: int
    p: float
    value: float
    mean: float
    boundary_mean: float
    extrapolated_mean: float
    radii: tuple
    means: tuple
    growth_exponent: float
    status: str
    monotone: bool
    method: str = "quadrature"

    def to_dict(self) -> dict:
        f = lambda x: x if math.isfinite(x) else str(x)  # noqa: E731
        return {
            "k": self.k,
            "p": self.p,
            "value": f(self.value),
            "mean": f(self.mean),
            "boundary_mean": f(self.boundary_mean),
            "extrapolated_mean": f(self.extrapolated_mean),
            "radii": list(self.radii),
            "means": [f(m) for m in self.means],
            "growth_exponent": f(self.growth_exponent),
            "status": self.status,
            "monotone": self.monotone,
            "method": self.method,
        }


def _estimate(samples: _RadialSamples, k: int, p: float) -> HpEstimate:
    cfg = samples.cfg
    interior = samples.radii[:-1]
    means = np.array([samples.mean(r, p) for r in interior])
    boundary = samples.mean(1.0, p)
    inc = np.diff(means)
    monotone = bool(np.all(inc >= -1e-6 * np.abs(means[1:])))
    scale = max(abs(means[-1]), 1e-300)
    if np.all(np.abs(inc[-3:]) <= 1e-12 * scale):
        gamma = math.inf
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.log2(inc[:-1] / inc[1:])
        g = g[np.isfinite(g)][-3:]
        gamma = float(np.median(g)) if g.size else math.nan
    if gamma > cfg.growth_margin:
        status = "finite"
    elif gamma < -cfg.growth_margin:
        status = "infinite"
    else:
        status = "inconclusive"
    tail = 0.0
    if math.isfinite(gamma) and gamma > 0:
        rho = 2.0**-gamma
        tail = max(float(inc[-1]), 0.0) * rho / (1 - rho)
    extrap = float(means[-1] + tail) if status == "finite" else math.inf
    if status == "finite":
        mean = boundary
    elif status == "infinite":
        mean = math.inf
    else:
        mean = float(means[-1])
    value = mean ** (1 / p) if math.isfinite(mean) else math.inf
    return HpEstimate(
        k, float(p), value, mean, boundary, extrap, interior, tuple(float(m) for m in means), gamma, status, monotone
    )


def hp_norm_partial(f: RIF, k: int, p: float, grid: HardyGrid | None = None) -> HpEstimate:
    """H^p norm of ``d phi / d z_k`` (0-based ``k``) from radial means.

    ``value`` is the p-th root of the boundary mean when the radial
    increments shrink geometrically, infinite when they grow.
    ``extrapolated_mean`` continues the interior means geometrically.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if not 0 <= k < f.n:
        raise IndexError(f"variable index {k} out of range")
    return _estimate(_RadialSamples(f, k, grid or HardyGrid()), k, p)


# -- level sets of the slice distance ------------------------------------


@dataclass(frozen=True)
class OmegaProfile:
    """Monte Carlo measure of ``Omega_x`` as a fraction of ``T^{n-1}``.

    Multiply by ``(2 pi)^(n-1)`` for unnormalised Lebesgue measure.  An
    exponent of ``-inf`` means ``Omega_x`` is empty beyond ``1/delta_min``.
    """

    k: int
    xs: tuple
    measure: tuple
    stderr: tuple
    exponent: float
    half_width: float
    fit_range: tuple | None
    delta_min: float
    samples: int
    degenerate: int
    seed: int
    method: str = "levelset"

    @property
    def bounded(self) -> bool:
        return self.exponent == -math.inf

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "xs": list(self.xs),
            "measure": list(self.measure),
            "stderr": list(self.stderr),
            "exponent": "-inf" if self.bounded else self.exponent,
            "half_width": self.half_width,
            "fit_range": None if self.fit_range is None else list(self.fit_range),
            "delta_min": self.delta_min,
            "samples": self.samples,
            "degenerate": self.degenerate,
            "seed": self.seed,
            "method": self.method,
        }


DEFAULT_XS = tuple(float(x) for x in np.logspace(0, 6, 31))


def sample_deltas(f: RIF, k: int, m: int, seed: int = 0, block: int = 1 << 14) -> tuple[np.ndarray, int]:
    """Slice distances at ``m`` uniform torus points; constant slices give ``inf``.

    Blocks draw from independent substreams of ``seed`` so the result does
    not depend on how blocks are scheduled.
    """
    nblocks = -(-m // block)
    streams = np.random.SeedSequence(seed).spawn(nblocks)
    out, degenerate = [], 0
    for b, ss in enumerate(streams):
        size = min(block, m - b * block)
        rng = np.random.default_rng(ss)
        zhat = np.exp(2j * np.pi * rng.random((size, f.n - 1)))
        sb = slice_batch(f, k, zhat)
        bad = sb.vanished | (sb.degree_defect > 0)
        degenerate += int(np.sum(bad))
        d = np.where(sb.counts > 0, sb.delta, np.inf)
        out.append(np.where(bad, np.nan, d))
    return np.concatenate(out), degenerate


# a local exponent above this near the smallest deltas means a hard floor
BOUNDED_LOCAL_EXPONENT = 25.0
LOW_ORDER_STATS = 50


def _hill(d: np.ndarray, b: float) -> tuple[float, int]:
    # MLE of beta for P(delta < t) ~ t^beta, from the samples below b
    low = d[d < b]
    if low.size == 0:
        return math.nan, 0
    return low.size / float(np.sum(np.log(b / low))), int(low.size)


def _tail_exponent(d, xs, mu, se) -> tuple[float, float, tuple | None]:
    d = np.sort(d[np.isfinite(d)])
    if d.size <= LOW_ORDER_STATS:
        return (-math.inf, 0.0, None) if d.size == 0 else (math.nan, math.inf, None)
    K = LOW_ORDER_STATS
    local = K / float(np.sum(np.log(d[K] / d[:K])))
    if local > BOUNDED_LOCAL_EXPONENT:
        return -math.inf, 0.0, None
    strong = np.nonzero(mu > 5 * se)[0]
    if strong.size == 0:
        return math.nan, math.inf, None
    top = float(xs[strong[-1]])
    beta, k = _hill(d, 10.0 / top)
    if k < 2:
        return math.nan, math.inf, None
    return -beta, 2 * beta / math.sqrt(k), (top / 10, top)


def omega_measure(
    f: RIF,
    k: int,
    xs=DEFAULT_XS,
    m: int = 100_000,
    seed: int = 0,
    max_degenerate: float = 0.01,
) -> OmegaProfile:
    """Fraction of ``T^{n-1}`` where the slice distance is below ``1/x``.

    The decay exponent is the maximum-likelihood power for the samples
    below the top of the largest decade of ``x`` whose estimate exceeds
    five standard errors.  When the smallest distances crowd against a
    positive floor the sets are declared eventually empty.
    """
    xs = np.asarray(sorted(float(x) for x in xs))
    if xs.size < 2 or xs[0] < 1:
        raise ValueError("need at least two grid points x >= 1")
    if m < 1000:
        raise ValueError("need at least 1000 samples")
    if f.n < 2:
        raise ValueError("level sets need n >= 2")
    deltas, degenerate = sample_deltas(f, k, m, seed)
    if degenerate > max_degenerate * m:
        raise DegenerateSamples(f"{degenerate} of {m} slices are degenerate")
    good = deltas[~np.isnan(deltas)]
    mu = np.array([np.mean(good < 1 / x) for x in xs])
    se = np.sqrt(mu * (1 - mu) / len(good))
    dmin = float(good.min()) if good.size else math.inf

    exponent, hw, rng = _tail_exponent(good, xs, mu, se)
    return OmegaProfile(
        k, tuple(float(x) for x in xs), tuple(mu.tolist()), tuple(se.tolist()),
        exponent, hw, rng, dmin, m, degenerate, seed,
    )


def levelset_threshold(profile: OmegaProfile) -> float:
    """``1 - s``; infinite when the level sets eventually vanish."""
    if profile.bounded:
        return math.inf
    return 1.0 - profile.exponent


def levelset_exponent_test(profile: OmegaProfile, p: float, band: float = 0.1) -> str:
    """``finite`` iff ``p < 1 - s`` outside an uncertainty band."""
    if p < 1:
        raise ValueError("the level-set test applies to p >= 1")
    if math.isnan(profile.exponent):
        return "inconclusive"
    t = levelset_threshold(profile)
    if math.isinf(t):
        return "finite"
    w = max(band, profile.half_width)
    if p < t - w:
        return "finite"
    if p > t + w:
        return "infinite"
    return "inconclusive"


# -- combined threshold --------------------------------------------------


@dataclass(frozen=True)
class ThresholdEntry:
    """``d phi / d z_k`` lies in H^p for ``p < threshold`` (``<=`` when closed)."""

    k: int
    threshold: float
    endpoint: str
    half_width: float
    bounded: bool = False
    status: str = "ok"
    routes: dict = field(default_factory=dict)
    method: str = "levelset+quadrature"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "threshold": self.threshold,
            "endpoint": self.endpoint,
            "half_width": self.half_width,
            "bounded": self.bounded,
            "status": self.status,
            "routes": self.routes,
            "method": self.method,
        }


@dataclass(frozen=True)
class IntegrabilityProfile:
    entries: tuple

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}


@dataclass(frozen=True)
class ThresholdSearch:
    p_max: float = 8.0
    bisection_steps: int = 7
    agreement: float = 0.15
    omega_samples: int = 100_000
    seed: int = 0
    grid: HardyGrid = field(default_factory=lambda: HardyGrid(zhat_per_dim=None))


def _bisect(samples: _RadialSamples, k: int, cfg: ThresholdSearch) -> tuple[float, float, bool]:
    # largest p with shrinking radial increments; (value, half-width, bounded)
    def finite(p):
        g = _estimate(samples, k, p).growth_exponent
        return g > 0

    if finite(cfg.p_max):
        return math.inf, 0.0, True
    if not finite(1.0):
        return 1.0, 0.0, False
    lo, hi = 1.0, cfg.p_max
    for _ in range(cfg.bisection_steps):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if finite(mid) else (lo, mid)
    return (lo + hi) / 2, (hi - lo) / 2, False


def hp_threshold(f: RIF, k: int, search: ThresholdSearch | None = None) -> ThresholdEntry:
    """Integrability threshold of ``d phi / d z_k`` from both routes.

    When the two agree within ``agreement`` their midpoint is reported;
    otherwise the entry is marked inconclusive and keeps both values.
    """
    cfg = search or ThresholdSearch()
    samples = _RadialSamples(f, k, cfg.grid)
    direct, direct_hw, direct_bounded = _bisect(samples, k, cfg)
    routes = {"quadrature": {"threshold": "inf" if direct_bounded else direct, "half_width": direct_hw}}
    if f.n >= 2:
        prof = omega_measure(f, k, m=cfg.omega_samples, seed=cfg.seed)
        ls = levelset_threshold(prof)
        ls_hw = prof.half_width
        routes["levelset"] = {"threshold": "inf" if math.isinf(ls) else ls, "half_width": ls_hw, "exponent": str(prof.exponent)}
    else:
        ls, ls_hw = direct, direct_hw
    both_bounded = math.isinf(ls) and direct_bounded
    if both_bounded:
        return ThresholdEntry(k, BOUNDED_SENTINEL, "open", 0.0, True, "ok", routes)
    if math.isinf(ls) or direct_bounded or abs(ls - direct) > cfg.agreement + direct_hw:
        t = direct if math.isinf(ls) else ls
        return ThresholdEntry(k, float(min(t, BOUNDED_SENTINEL)), "open", math.inf, False, "inconclusive", routes)
    # H^1 membership is known, so the threshold never drops below 1
    t = max(1.0, (float(ls) + direct) / 2)
    endpoint = "closed" if t == 1.0 else "open"
    return ThresholdEntry(k, t, endpoint, max(ls_hw, direct_hw, abs(ls - direct) / 2), False, "ok", routes)


def integrability_profile(f: RIF, search: ThresholdSearch | None = None) -> IntegrabilityProfile:
    return IntegrabilityProfile(tuple(hp_threshold(f, k, search) for k in range(f.n)))
