"""Decay exponent of ``|p|`` at an isolated zero on the torus.

After rotating the zero to ``(1, ..., 1)`` points of the polydisk near it
are written ``z_j = 1 - r_j e^{i v_j}``; ``|z_j| < 1`` is the condition
``|v_j| < arccos(r_j / 2)``.  The lower envelope of ``log|p|`` against
``log dist`` over this region gives the exponent ``q`` in
``|p(z)| >= C dist(z, zero)^q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .polycore import MultiPoly, eval_poly, substitute_affine
from .rif import InteriorZero


class NotAZero(ValueError):
    pass


class MultipleZeros(ValueError):
    """``p`` has torus zeros outside the declared neighbourhood."""


@dataclass(frozen=True)
class LojaConfig:
    """Sampling for the envelope fit.

    Distances are drawn log-uniformly in ``[10^lo, 10^hi]`` and binned
    ``bins_per_decade`` to a decade; the fit uses the smallest
    ``fit_decades`` decades.  A fraction ``edge_fraction`` of samples sits
    at the extreme admissible angles.
    """

    samples: int = 40_000
    log_dist: tuple = (-4.0, -1.0)
    bins_per_decade: int = 8
    fit_decades: float = 2.0
    edge_fraction: float = 0.25
    refine: bool = True
    neighbourhood: float = 0.2
    torus_samples: int = 20_000
    zero_tol: float = 1e-8
    collapse_decades: float = 4.0


@dataclass(frozen=True)
class LojaEstimate:
    singular_point: tuple
    q_hat: float
    C_hat: float
    half_width: float
    samples: int
    envelope: tuple
    fit_range: tuple
    seed: int
    method: str = "envelope-fit"

    def to_dict(self) -> dict:
        return {
            "singular_point": [[z.real, z.imag] for z in self.singular_point],
            "q_hat": self.q_hat,
            "C_hat": self.C_hat,
            "half_width": self.half_width,
            "samples": self.samples,
            "envelope": [list(e) for e in self.envelope],
            "fit_range": list(self.fit_range),
            "seed": self.seed,
            "method": self.method,
        }


def _local_poly(p: MultiPoly, point) -> MultiPoly:
    # q(u) = p(zeta_1 (1 - u_1), ..., zeta_n (1 - u_n)), tiny coefficients dropped
    zeta = [complex(z) for z in point]
    q = substitute_affine(p, zeta, [-z for z in zeta])
    big = max(abs(c) for _, c in q)
    return MultiPoly(q.n, {e: c for e, c in q if abs(c) > 1e-13 * big})


def _u_from_params(t: float, x: np.ndarray) -> np.ndarray:
    # x = (n direction logits, n angle logits) -> u with |u| = t inside the region
    n = x.shape[-1] // 2
    w = np.exp(x[..., :n] - x[..., :n].max(axis=-1, keepdims=True))
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    r = t * w
    lim = np.arccos(np.clip(r / 2, 0, 1))
    v = lim * np.tanh(x[..., n:])
    return r * np.exp(1j * v)


def _sample(n: int, m: int, cfg: LojaConfig, rng) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = cfg.log_dist
    t = 10 ** rng.uniform(lo, hi, m)
    w = np.abs(rng.normal(size=(m, n)))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    r = t[:, None] * w
    lim = np.arccos(r / 2)
    v = rng.uniform(-1, 1, (m, n)) * lim
    edge = rng.random(m) < cfg.edge_fraction
    signs = rng.choice([-1.0, 1.0], size=(m, n))
    v[edge] = (signs * lim * (1 - 1e-9))[edge]
    return t, r * np.exp(1j * v)


def _check_single_zero(p: MultiPoly, point, cfg: LojaConfig, rng) -> None:
    n = p.n
    ang0 = np.angle(np.asarray(point))
    th = rng.uniform(0, 2 * np.pi, (cfg.torus_samples, n))
    # torus distance in angles, wrapped
    dist = np.linalg.norm(np.angle(np.exp(1j * (th - ang0))), axis=1)
    th = th[dist > cfg.neighbourhood]
    vals = np.abs(eval_poly(p, np.exp(1j * th)))
    scale = sum(abs(c) for _, c in p)

    def obj(a):
        if np.linalg.norm(np.angle(np.exp(1j * (a - ang0)))) < cfg.neighbourhood / 2:
            return scale
        return float(abs(eval_poly(p, np.exp(1j * a))))

    for i in np.argsort(vals)[:5]:
        res = minimize(obj, th[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        if res.fun < 1e-6 * scale:
            z = np.exp(1j * res.x)
            raise MultipleZeros(f"|p| = {res.fun:.2e} at torus point {np.round(z, 6).tolist()} away from the declared zero")


def loja_probe(p: MultiPoly, point, config: LojaConfig | None = None, seed: int = 0) -> LojaEstimate:
    """Fit ``q`` and ``C`` in ``|p(z)| >= C dist(z, point)^q`` near a torus zero.

    Raises ``NotAZero`` when ``p(point)`` is not small, ``MultipleZeros``
    when a torus probe finds another zero, and ``InteriorZero`` when a
    sample inside the polydisk hits a zero.
    """
    cfg = config or LojaConfig()
    point = tuple(complex(z) for z in point)
    if len(point) != p.n:
        raise ValueError(f"point has {len(point)} coordinates, expected {p.n}")
    if any(abs(abs(z) - 1) > 1e-9 for z in point):
        raise ValueError("point must lie on the torus")
    scale = sum(abs(c) for _, c in p)
    if abs(eval_poly(p, np.array(point))) > cfg.zero_tol * scale:
        raise NotAZero(f"|p(point)| = {abs(eval_poly(p, np.array(point))):.3g}")
    rng = np.random.default_rng(seed)
    _check_single_zero(p, point, cfg, rng)

    q = _local_poly(p, point)
    t, u = _sample(p.n, cfg.samples, cfg, rng)
    vals = np.abs(eval_poly(q, u))
    if np.any(vals == 0):
        raise InteriorZero("|p| vanishes at a sample inside the polydisk")

    lo, hi = cfg.log_dist
    nb = int(round((hi - lo) * cfg.bins_per_decade))
    edges = np.linspace(lo, hi, nb + 1)
    which = np.clip(np.digitize(np.log10(t), edges) - 1, 0, nb - 1)
    env = []
    for b in range(nb):
        idx = np.nonzero(which == b)[0]
        if idx.size == 0:
            continue
        j = idx[np.argmin(vals[idx])]
        if not cfg.refine:
            env.append((math.log10(t[j]), math.log10(vals[j])))
            continue
        # move the best sample to the bin centre and minimise at fixed distance
        tc = 10 ** ((edges[b] + edges[b + 1]) / 2)
        r = np.abs(u[j]) / t[j]
        lim = np.arccos(np.clip(np.abs(u[j]) / 2, 0, 1))
        x0 = np.concatenate(
            [np.log(np.maximum(r, 1e-12)), np.arctanh(np.clip(np.angle(u[j]) / lim, -0.999999, 0.999999))]
        )
        obj = lambda x: float(np.log(abs(eval_poly(q, _u_from_params(tc, x))) + 1e-300))  # noqa: E731
        res = minimize(obj, x0, method="Nelder-Mead", options={"maxiter": 400 * p.n, "xatol": 1e-6, "fatol": 1e-9})
        env.append((math.log10(tc), min(res.fun, obj(x0)) / math.log(10)))
    env = np.array(env)
    cut = lo + cfg.fit_decades
    sel = env[env[:, 0] <= cut]
    if len(sel) < 3:
        raise ValueError("too few envelope bins in the fit range")
    A = np.stack([np.ones(len(sel)), sel[:, 0]], axis=1)
    coef, *_ = np.linalg.lstsq(A, sel[:, 1], rcond=None)
    resid = sel[:, 1] - A @ coef
    dof = max(len(sel) - 2, 1)
    cov = np.linalg.inv(A.T @ A) * float(resid @ resid) / dof
    q_hat, logC = float(coef[1]), float(coef[0])
    # spread between the two halves of the fit window
    mid = (lo + cut) / 2
    halves = [sel[sel[:, 0] <= mid], sel[sel[:, 0] > mid]]
    slopes = [np.polyfit(h[:, 0], h[:, 1], 1)[0] for h in halves if len(h) >= 2]
    spread = float(np.ptp(slopes)) / 2 if len(slopes) == 2 else 0.0
    hw = 2 * math.sqrt(max(cov[1, 1], 0.0)) + spread
    # a zero inside the polydisk drags some bin far below the power law
    drop = np.stack([np.ones(len(env)), env[:, 0]], axis=1) @ coef - env[:, 1]
    if np.any(drop > cfg.collapse_decades):
        raise InteriorZero("the envelope collapses below the fitted power law")
    if not q_hat > 0:
        raise ValueError(f"fitted exponent {q_hat:.3g} is not positive")
    return LojaEstimate(
        point, q_hat, 10**logC, max(hw, 1e-3), cfg.samples,
        tuple((float(a), float(b)) for a, b in env), (10.0**lo, 10.0**cut), seed,
    )


def snapped_exponent(estimate: LojaEstimate) -> Fraction | float:
    """Nearest integer when it lies within the confidence half-width."""
    k = round(estimate.q_hat)
    return Fraction(k) if abs(estimate.q_hat - k) <= estimate.half_width else estimate.q_hat


def loj_threshold(q, n: int):
    """``(alpha*, alpha* + 2/n)`` with ``alpha* = min(0, 1 - 2q/n)``.

    ``alpha*`` bounds the admissible weights ``alpha < alpha*`` and the
    second entry bounds the resulting membership exponents.  Exact for
    rational ``q``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(q, (int, Fraction)):
        a = min(Fraction(0), 1 - Fraction(2) * q / n)
        return a, a + Fraction(2, n)
    a = min(0.0, 1 - 2 * q / n)
    return a, a + 2 / n


@dataclass(frozen=True)
class LojVerdict:
    passes: bool
    alpha: float
    n: int
    q_used: Fraction | float
    bound: float
    claimed_exponent: Fraction | float | None
    supremum: tuple
    provenance: dict = field(default_factory=dict)
    method: str = "theorem-implication"

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "alpha": self.alpha,
            "n": self.n,
            "q_used": float(self.q_used),
            "bound": self.bound,
            "claimed_exponent": None if self.claimed_exponent is None else float(self.claimed_exponent),
            "supremum": {"alpha": str(self.supremum[0]), "exponent": str(self.supremum[1])},
            "provenance": self.provenance,
            "method": self.method,
        }


def loj_verdict(estimate: LojaEstimate, n: int, alpha, snap: bool = False) -> LojVerdict:
    """Membership of ``ptilde/p`` in ``D_{alpha + 2/n}`` if ``q < (1 - alpha) n / 2``.

    The fitted half-width is charged against the condition unless ``snap``
    replaces ``q_hat`` by its nearest integer.  Only a single torus zero is
    supported; ``loja_probe`` rejects other inputs.
    """
    a = Fraction(alpha) if isinstance(alpha, (int, Fraction)) else float(alpha)
    if not a < 0:
        raise ValueError("alpha must be negative")
    q = snapped_exponent(estimate) if snap else estimate.q_hat
    margin = 0.0 if (snap and isinstance(q, Fraction)) else estimate.half_width
    bound = (1 - a) * n / 2
    passes = bool(q + margin < bound)
    gain = Fraction(2, n) if isinstance(a, Fraction) else 2 / n
    prov = {
        "loja": estimate.to_dict(),
        "single_boundary_zero": True,
        "snapped": bool(snap and isinstance(q, Fraction)),
    }
    return LojVerdict(passes, float(a), n, q, float(bound), a + gain if passes else None, loj_threshold(q, n), prov)
