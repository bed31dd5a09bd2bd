"""Dirichlet-type norms ``sum_k prod_i (1 + k_i)^alpha_i |a(k)|^2``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .polycore import DimensionError, MultiPoly, eval_poly
from .series import CoeffBox

DEFAULT_SCHEDULE = (16, 32, 64, 128, 256, 512)
DEFAULT_MARGIN = 0.15
# smallest confidence half-width a fitted exponent is allowed to claim
MIN_HALF_WIDTH = 1e-3


def as_weights(w, n: int) -> np.ndarray:
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape == (1,) and n > 1:
        w = np.full(n, w[0])
    if w.shape != (n,):
        raise DimensionError(f"weight vector has {w.size} entries, expected {n}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def weight_tensor(orders: Sequence[int], w) -> np.ndarray:
    w = as_weights(w, len(orders))
    out = np.ones(())
    for o, a in zip(orders, w):
        out = np.multiply.outer(out, (1.0 + np.arange(o + 1)) ** a)
    return out


def weighted_partial_sum(box: CoeffBox, w) -> float:
    """Truncated squared norm of the box, summed with ``math.fsum``."""
    t = weight_tensor(box.orders, as_weights(w, box.n)) * np.abs(box.coeffs) ** 2
    return math.fsum(t.ravel())


def derivative_shift_norm(box: CoeffBox, i: int, w) -> float:
    """Squared norm of ``d f / d z_i`` under the weight ``w - 2 e_i``.

    The derivative's coefficient at ``k - e_i`` is ``k_i a(k)``; the top
    layer in variable ``i`` drops off the box.
    """
    if not 0 <= i < box.n:
        raise IndexError(f"variable index {i} out of range for n={box.n}")
    w = as_weights(w, box.n).copy()
    c = box.coeffs
    k = np.arange(1, c.shape[i])
    shape = [1] * box.n
    shape[i] = -1
    d = np.take(c, k, axis=i) * k.reshape(shape)
    w[i] -= 2.0
    if d.size == 0:
        return 0.0
    return weighted_partial_sum(CoeffBox(d), w)


# -- convergence classification ----------------------------------------


@dataclass(frozen=True)
class MembershipVerdict:
    """Three-way verdict on finiteness of a Dirichlet-type norm.

    ``tail_exponent`` estimates ``s`` in a per-order density ``N^s`` of the
    norm sum: the sum converges iff ``s < -1``.
    """

    status: str
    partial_sums: tuple
    tail_exponent: float
    half_width: float
    norm_estimate: float | None
    orders_used: tuple
    local_exponents: tuple = ()
    margin: float = DEFAULT_MARGIN
    method: str = "series-classifier"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "partial_sums": [[int(n), float(v)] for n, v in self.partial_sums],
            "tail_exponent": float(self.tail_exponent),
            "half_width": float(self.half_width),
            "norm_estimate": None if self.norm_estimate is None else float(self.norm_estimate),
            "orders_used": list(self.orders_used),
            "local_exponents": [float(x) for x in self.local_exponents],
            "margin": self.margin,
            "method": self.method,
        }


def _extrapolate_exponent(local: np.ndarray) -> tuple[float, float]:
    # Aitken on the last three local exponents when they settle geometrically
    last = float(local[-1])
    if len(local) < 2:
        return last, 0.5
    if len(local) == 2:
        return last, max(abs(local[1] - local[0]), MIN_HALF_WIDTH)
    s1, s2, s3 = local[-3:]
    d1, d2 = s2 - s1, s3 - s2
    if d1 != 0 and 0 < d2 / d1 < 0.9:
        rho = d2 / d1
        est = s3 + d2 * rho / (1 - rho)
        return float(est), max(abs(est - s3), MIN_HALF_WIDTH)
    return last, max(abs(d2), abs(d1), MIN_HALF_WIDTH)


def classify_membership(
    expander: Callable[[tuple], CoeffBox] | CoeffBox,
    w,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
    margin: float = DEFAULT_MARGIN,
) -> MembershipVerdict:
    """Decide whether the weighted coefficient sum of ``f`` is finite.

    ``expander`` is either a ready :class:`CoeffBox` or a callable taking an
    order tuple and returning one.  Partial sums are taken on the isotropic
    boxes ``[0, N]^n`` for ``N`` in ``schedule``; the shell increments give
    local power-law exponents of the per-order density, which are
    extrapolated to ``N -> infinity``.
    """
    sched = [int(x) for x in schedule]
    if len(sched) < 4:
        raise ValueError("schedule needs at least 4 orders")
    if any(b <= a for a, b in zip(sched, sched[1:])) or sched[0] < 1:
        raise ValueError("schedule must be strictly increasing positive orders")
    if isinstance(expander, CoeffBox):
        box = expander
    else:
        n = getattr(expander, "n", None)
        box = expander((sched[-1],) * n) if n else expander(sched[-1])
    n = box.n
    if min(box.orders) < sched[-1]:
        raise ValueError(f"box orders {box.orders} do not cover schedule max {sched[-1]}")
    w = as_weights(w, n)
    terms = weight_tensor(box.orders, w) * np.abs(box.coeffs) ** 2
    sums = [math.fsum(terms[(slice(0, N + 1),) * n].ravel()) for N in sched]
    partial = tuple(zip(sched, sums))
    orders_used = (sched[-1],) * n

    inc = np.diff(sums)
    width = np.diff(sched).astype(float)
    if np.all(inc <= 1e-300 + 1e-15 * abs(sums[-1])):
        # nothing beyond the first box: finite sum
        return MembershipVerdict("convergent", partial, -math.inf, 0.0, sums[-1], orders_used, (), margin)
    dens = inc / width
    loc = np.sqrt(np.array(sched[:-1], float) * np.array(sched[1:], float))
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.diff(np.log(dens)) / np.diff(np.log(loc))
    local = local[np.isfinite(local)]
    if local.size == 0:
        return MembershipVerdict("inconclusive", partial, math.nan, math.inf, None, orders_used, (), margin)
    s, hw = _extrapolate_exponent(local)

    if s + hw < -1.0:
        status = "convergent"
    elif s - hw >= -1.0 or s >= -1.0 + margin:
        status = "divergent"
    else:
        status = "inconclusive"
    estimate = None
    if status == "convergent":
        N = sched[-1]
        t_N = dens[-1] * (N / loc[-1]) ** s
        estimate = sums[-1] + t_N * N / (-s - 1.0)
    return MembershipVerdict(status, partial, s, hw, estimate, orders_used, tuple(local), margin)


# -- integral norm for non-positive weights ------------------------------


class WeightSignError(ValueError):
    pass


@dataclass(frozen=True)
class QuadConfig:
    """Polar tensor quadrature on each disk factor.

    In ``u = r^2`` the unit interval is cut into geometric panels
    ``[1 - 2^-j, 1 - 2^-(j+1)]`` for ``j < level`` plus a Gauss-Jacobi tail
    panel ``[1 - 2^-level, 1]`` carrying the weight ``(1 - u)^beta``.
    Angular nodes are equispaced; with ``angle_doubling`` the count doubles
    on every panel past the second, following the shrinking boundary scale.
    """

    min_level: int = 2
    max_level: int = 8
    gauss: int = 8
    angles: int = 32
    angle_doubling: bool = False
    max_angles: int = 2048
    rtol: float = 1e-9
    max_points: int = 40_000_000
    chunk: int = 2_000_000


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    delta: float
    normalized: float | None
    status: str
    growth_exponent: float | None
    levels: tuple = field(default=())
    method: str = "quadrature"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "delta": self.delta,
            "normalized": self.normalized,
            "status": self.status,
            "growth_exponent": self.growth_exponent,
            "levels": [[int(j), float(v)] for j, v in self.levels],
            "method": self.method,
        }


def _disk_rule(beta: float, level: int, cfg: QuadConfig) -> tuple[np.ndarray, np.ndarray]:
    # nodes z and weights for  int_D g(z) (1 - |z|^2)^beta dA(z)
    xs, ws = roots_legendre(cfg.gauss)
    zs, wts = [], []

    def ring(u_nodes, u_weights, m):
        th = 2 * np.pi * (np.arange(m) + 0.5) / m
        r = np.sqrt(u_nodes)
        zs.append((r[:, None] * np.exp(1j * th[None, :])).ravel())
        wts.append(np.repeat(0.5 * u_weights * 2 * np.pi / m, m))

    def m_at(j):
        if not cfg.angle_doubling:
            return cfg.angles
        return min(cfg.angles * 2 ** max(0, j - 1), cfg.max_angles)

    for j in range(level):
        lo, hi = 1 - 2.0**-j, 1 - 2.0 ** -(j + 1)
        u = lo + (hi - lo) * (xs + 1) / 2
        ring(u, (hi - lo) / 2 * ws * (1 - u) ** beta, m_at(j))
    h = 2.0**-level
    if beta > -1:
        # (1 - u)^beta on [1 - h, 1]: u = 1 - h (1 - x)/2, weight (h/2)^(beta+1) (1 - x)^beta
        xj, wj = roots_jacobi(cfg.gauss, beta, 0.0)
        u = 1 - h * (1 - xj) / 2
        ring(u, wj * (h / 2) ** (beta + 1), m_at(level))
    return np.concatenate(zs), np.concatenate(wts)


def _tensor_sum(f, rules, cfg: QuadConfig) -> float:
    sizes = [len(z) for z, _ in rules]
    total = int(np.prod(sizes))
    if total > cfg.max_points:
        raise MemoryError(f"quadrature grid of {total} points exceeds max_points={cfg.max_points}")
    n = len(rules)
    if n == 1:
        z, wt = rules[0]
        return math.fsum(wt * np.abs(f(z[:, None])) ** 2)
    rest_z = np.stack(np.meshgrid(*[z for z, _ in rules[1:]], indexing="ij"), axis=-1).reshape(-1, n - 1)
    rest_w = np.ones(())
    for _, wt in rules[1:]:
        rest_w = np.multiply.outer(rest_w, wt)
    rest_w = rest_w.ravel()
    z0, w0 = rules[0]
    step = max(1, cfg.chunk // len(rest_w))
    parts = []
    for a in range(0, len(z0), step):
        blk = z0[a : a + step]
        pts = np.empty((len(blk), len(rest_w), n), dtype=complex)
        pts[:, :, 0] = blk[:, None]
        pts[:, :, 1:] = rest_z[None, :, :]
        vals = np.abs(f(pts.reshape(-1, n)).reshape(len(blk), -1)) ** 2
        parts.append(math.fsum((w0[a : a + step, None] * vals * rest_w[None, :]).ravel()))
    return math.fsum(parts)


def integral_norm_leq0(f: Callable, w, quad: QuadConfig | None = None) -> IntegralEstimate:
    """``int_{D^n} |f|^2 prod_i (1 - |z_i|^2)^(-1 - alpha_i) dA`` for ``alpha_i <= 0``.

    ``f`` maps an array of points with shape ``(m, n)`` to ``m`` values,
    or is a ``MultiPoly``, in which case the rule is sized to be exact.
    The geometric panels are refined level by level until the relative
    change drops below ``rtol``.  Increments that stop shrinking are
    reported as divergence with their growth exponent (log2 of the
    increment ratio).  ``normalized`` divides by the value for ``f = 1``.
    """
    cfg = quad or QuadConfig()
    alphas = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(alphas > 0):
        raise WeightSignError("integral norm needs every alpha_i <= 0")
    betas = -1.0 - alphas
    truncated = np.any(betas <= -1)
    mass = None if truncated else float(np.prod([np.pi / (b + 1) for b in betas]))

    if isinstance(f, MultiPoly):
        # |f|^2 has angular frequencies up to d_i and is a degree d_i polynomial
        # in u after angular averaging, so small per-variable rules are exact
        if f.n != len(betas):
            raise DimensionError(f"weight of length {len(betas)} for n={f.n}")
        cfgs = [
            replace(cfg, angles=d + 1, gauss=max(cfg.gauss, (d + 2) // 2), angle_doubling=False) for d in f.multidegree
        ]
        poly = f
        f = lambda z: eval_poly(poly, z)  # noqa: E731
    else:
        cfgs = [cfg] * len(betas)

    levels = []
    for J in range(cfg.min_level, cfg.max_level + 1):
        rules = [_disk_rule(b, J, c) for b, c in zip(betas, cfgs)]
        levels.append((J, _tensor_sum(f, rules, cfg)))
        if len(levels) >= 2:
            prev, cur = levels[-2][1], levels[-1][1]
            if not truncated and abs(cur - prev) <= cfg.rtol * abs(cur):
                break

    vals = np.array([v for _, v in levels])
    inc = np.diff(vals)
    value = float(vals[-1])
    delta = float(abs(inc[-1])) if inc.size else math.inf
    growth = None
    if inc.size >= 2 and inc[-1] > 0 and inc[-2] > 0:
        growth = float(np.log2(inc[-1] / inc[-2]))
    if truncated or (growth is not None and growth > -0.07 and delta > cfg.rtol * abs(value)):
        status = "divergent"
        value = math.inf
    elif delta <= cfg.rtol * abs(value):
        status = "converged"
    else:
        status = "unconverged"
        if growth is not None and growth < 0:
            rho = 2.0**growth
            value += inc[-1] * rho / (1 - rho)
    normalized = value / mass if mass and math.isfinite(value) else None
    return IntegralEstimate(value, delta, normalized, status, growth, tuple(levels))
