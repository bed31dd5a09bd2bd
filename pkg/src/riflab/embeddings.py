"""Hölder-type interpolation between anisotropic Dirichlet-type norms.

Exponent vectors built from integers or ``Fraction`` stay exact, so the
telescoping identities can be checked with ``==``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .dirichlet import as_weights, weighted_partial_sum
from .polycore import DimensionError
from .series import CoeffBox

HOLDS_RTOL = 1e-9
SUM_TOL = 1e-12
# thresholds beyond this lie outside the range where the embedding is established
THRESHOLD_RANGE = 2


def _exact(xs) -> bool:
    return all(isinstance(x, Rational) for x in xs)


def _num(x):
    return Fraction(x) if isinstance(x, Rational) else float(x)


@dataclass(frozen=True)
class HolderSplit:
    ps: tuple
    cs: tuple

    @classmethod
    def from_ps(cls, ps) -> "HolderSplit":
        return cls(tuple(ps), cs_from_ps(ps))

    @classmethod
    def from_cs(cls, cs) -> "HolderSplit":
        return cls(ps_from_cs(cs), tuple(cs))


def cs_from_ps(ps: Sequence) -> tuple:
    """``c_l = p_l prod_{j<l} q_j`` and ``c_n = prod_j q_j`` with ``q = p/(p-1)``."""
    ps = [_num(p) for p in ps]
    if any(not p > 1 for p in ps):
        raise ValueError("every p_j must exceed 1")
    Q = Fraction(1) if _exact(ps) else 1.0
    cs = []
    for p in ps:
        cs.append(p * Q)
        Q = Q * p / (p - 1)
    cs.append(Q)
    return tuple(cs)


def ps_from_cs(cs: Sequence) -> tuple:
    """Inverse of :func:`cs_from_ps` by forward substitution."""
    cs = [_num(c) for c in cs]
    if len(cs) < 2:
        raise ValueError("need at least two exponents")
    if any(not c > 0 for c in cs):
        raise ValueError("every c_i must be positive")
    total = sum(1 / c for c in cs)
    if abs(total - 1) > SUM_TOL:
        raise ValueError(f"sum of 1/c_i is {float(total)!r}, not 1")
    Q = Fraction(1) if _exact(cs) else 1.0
    ps = []
    for c in cs[:-1]:
        p = c / Q
        if not p > 1:
            raise ValueError(f"exponents {cs} give p = {p} <= 1")
        ps.append(p)
        Q = Q * p / (p - 1)
    return tuple(ps)


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


def _check(lhs: float, rhs: float) -> InequalityCheck:
    return InequalityCheck(float(lhs), float(rhs), bool(lhs <= rhs * (1 + HOLDS_RTOL)))


def anisotropic_sum(box: CoeffBox, i: int, a: float) -> float:
    """Weighted sum with exponent ``a`` in variable ``i`` and 0 elsewhere."""
    w = np.zeros(box.n)
    w[i] = a
    return weighted_partial_sum(box, w)


def holder_check(box: CoeffBox, w, cs) -> InequalityCheck:
    """``S(alpha) <= prod_i S_i(c_i alpha_i)^(1/c_i)`` for squared sums ``S``."""
    alphas = as_weights(w, box.n)
    if len(cs) != box.n:
        raise DimensionError(f"{len(cs)} exponents for {box.n} variables")
    ps_from_cs(cs)
    lhs = weighted_partial_sum(box, alphas)
    logs = []
    for i, c in enumerate(cs):
        c = float(c)
        if math.isinf(c):
            continue
        s = anisotropic_sum(box, i, c * alphas[i])
        if s == 0.0:
            return _check(lhs, 0.0)
        logs.append(math.log(s) / c)
    return _check(lhs, math.exp(math.fsum(logs)))


def norm_interp_check(box: CoeffBox, alpha, V, U, p: float) -> InequalityCheck:
    """``S(a + V) <= S(a - U + pV)^(1/p) S(a + (q - 1)U)^(1/q)``, ``1/p + 1/q = 1``."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    n = box.n
    a, V, U = as_weights(alpha, n), as_weights(V, n), as_weights(U, n)
    q = p / (p - 1)
    lhs = weighted_partial_sum(box, a + V)
    s1 = weighted_partial_sum(box, a - U + p * V)
    s2 = weighted_partial_sum(box, a + (q - 1) * U)
    return _check(lhs, s1 ** (1 / p) * s2 ** (1 / q))


# -- feasibility of an anisotropic embedding ------------------------------


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    total: float
    cs: tuple | None
    closed_boundary: bool
    outside_range: tuple = ()
    provenance: tuple = ()
    method: str = "theorem-implication"

    def to_dict(self) -> dict:
        enc = lambda c: "inf" if math.isinf(c) else float(c)  # noqa: E731
        return {
            "feasible": self.feasible,
            "total": self.total,
            "cs": None if self.cs is None else [enc(c) for c in self.cs],
            "closed_boundary": self.closed_boundary,
            "outside_range": list(self.outside_range),
            "provenance": list(self.provenance),
            "method": self.method,
        }


def _threshold_list(profile) -> list:
    # accepts a profile with .entries, entries with .threshold/.endpoint,
    # (t, endpoint) pairs, or bare numbers (open endpoints)
    items = getattr(profile, "entries", profile)
    out = []
    for e in items:
        if hasattr(e, "threshold"):
            t = math.inf if getattr(e, "bounded", False) else float(e.threshold)
            out.append((t, e.endpoint == "closed", getattr(e, "method", None)))
        elif isinstance(e, (tuple, list)):
            t, ep = e[0], e[1]
            closed = ep == "closed" if isinstance(ep, str) else bool(ep)
            out.append((float(t), closed, None))
        else:
            out.append((float(e), False, None))
    return out


def hp_embed_feasible(alphas, profile) -> FeasibilityVerdict:
    """Whether ``sum_k alpha_k / t_k`` stays below 1 for derivative thresholds ``t``.

    The bound is strict unless every binding threshold has a closed
    endpoint.  Nonpositive exponents and infinite thresholds contribute 0.
    The witness ``1/c_k = alpha_k/t_k + (1 - sum)/n`` satisfies
    ``sum 1/c_k = 1`` and ``c_k alpha_k <= t_k``.
    """
    alphas = [float(a) for a in alphas]
    ts = _threshold_list(profile)
    if len(ts) != len(alphas):
        raise DimensionError(f"{len(alphas)} exponents for {len(ts)} thresholds")
    if any(not t > 0 for t, _, _ in ts):
        raise ValueError("thresholds must be positive")
    contrib = [0.0 if a <= 0 or math.isinf(t) else a / t for a, (t, _, _) in zip(alphas, ts)]
    total = math.fsum(contrib)
    binding = [closed for c, (_, closed, _) in zip(contrib, ts) if c > 0]
    all_closed = all(binding)
    if total < 1 - SUM_TOL:
        feasible, on_boundary = True, False
    elif abs(total - 1) <= SUM_TOL and all_closed:
        feasible, on_boundary = True, True
    else:
        feasible, on_boundary = False, abs(total - 1) <= SUM_TOL
    cs = None
    if feasible:
        slack = (1 - total) / len(alphas) if not on_boundary else 0.0
        cs = tuple(math.inf if c + slack == 0 else 1 / (c + slack) for c in contrib)
    outside = tuple(
        k for k, (a, (t, _, _)) in enumerate(zip(alphas, ts)) if a > THRESHOLD_RANGE or (a > 0 and t > THRESHOLD_RANGE)
    )
    prov = tuple(
        {"variable": k, "threshold": "inf" if math.isinf(t) else t, "endpoint": "closed" if cl else "open", "source": m}
        for k, (t, cl, m) in enumerate(ts)
    )
    return FeasibilityVerdict(feasible, total, cs, on_boundary, outside, prov)


# -- the interpolation chain giving the loss 2 - 2/n ------------------------


def ones_except(n: int, i: int) -> tuple:
    """All-ones vector of length ``n`` with a 0 in (0-based) slot ``i``."""
    return tuple(Fraction(0) if j == i else Fraction(1) for j in range(n))


@dataclass(frozen=True)
class InterpolationChain:
    """Exact data of the chain ``p = (n, n-1, ..., 2)``, ``V = -c 1``.

    Step ``k`` interpolates with ``p_k`` and ``U_k``; its first factor is
    the norm at ``alpha - 2 * ones_except(k)`` and its second factor feeds
    the next step, so ``S(alpha - c) <= prod_i S(alpha - 2 ones_except(i))^(1/n)``.
    """

    n: int
    c: Fraction
    ps: tuple
    V: tuple
    Us: tuple
    Vs: tuple
    V_prime: tuple
    exponents: tuple
    terminal_ok: bool = field(default=False)


def interpolation_chain(n: int) -> InterpolationChain:
    if n < 2:
        raise ValueError("the chain needs n >= 2")
    c = Fraction(2 * (n - 1), n)
    ps = tuple(Fraction(n - k) for k in range(n - 1))
    V = tuple(-c for _ in range(n))
    Us = [tuple(2 * e - c * n for e in ones_except(n, 0))]
    for k in range(1, n - 1):
        Us.append(tuple(2 * e + u for e, u in zip(ones_except(n, k), Us[-1])))
    # V_k is the shift entering step k; V_{k+1} = (q_k - 1) U_k
    Vs = [V]
    for p, U in zip(ps, Us):
        Vs.append(tuple(u / (p - 1) for u in U))
    V_prime = Vs[-1]
    exps, carry = [], Fraction(1)
    for p in ps:
        exps.append(carry / p)
        carry *= (p - 1) / p
    exps.append(carry)
    ok = V_prime == Us[-1] == tuple(-2 * e for e in ones_except(n, n - 1))
    # each step's first factor sits at alpha - 2 * ones_except(k)
    ok = ok and all(
        tuple(-u + p * v for u, v in zip(U, Vk)) == tuple(-2 * e for e in ones_except(n, k))
        for k, (p, U, Vk) in enumerate(zip(ps, Us, Vs))
    )
    return InterpolationChain(n, c, ps, V, tuple(Us), tuple(Vs), V_prime, tuple(exps), ok)


@dataclass(frozen=True)
class ChainCheck:
    composed: InequalityCheck
    steps: tuple

    @property
    def holds(self) -> bool:
        return self.composed.holds and all(s.holds for s in self.steps)


def chain_check(box: CoeffBox, alpha) -> ChainCheck:
    """Evaluate every two-term step of the chain and the composed bound."""
    n = box.n
    ch = interpolation_chain(n)
    a = as_weights(alpha, n)
    steps = tuple(
        norm_interp_check(box, a, [float(v) for v in Vk], [float(u) for u in U], float(p))
        for p, U, Vk in zip(ch.ps, ch.Us, ch.Vs)
    )
    lhs = weighted_partial_sum(box, a - float(ch.c))
    logs = [
        float(e) * math.log(weighted_partial_sum(box, a - 2 * np.array(ones_except(n, i), dtype=float)))
        for i, e in enumerate(ch.exponents)
    ]
    return ChainCheck(_check(lhs, math.exp(math.fsum(logs))), steps)


@dataclass(frozen=True)
class ImplicationVerdict:
    exponent: Fraction | float
    hypothesis_alpha: Fraction | float
    n: int
    provenance: dict
    method: str = "theorem-implication"

    def to_dict(self) -> dict:
        return {
            "exponent": float(self.exponent),
            "exponent_exact": str(self.exponent),
            "hypothesis_alpha": float(self.hypothesis_alpha),
            "n": self.n,
            "provenance": self.provenance,
            "method": self.method,
        }


def membership_gain_verdict(alpha, n: int, membership=None) -> ImplicationVerdict:
    """From ``1/p`` in ``D_alpha`` (``alpha < 0``), membership of ``ptilde/p`` in ``D_{alpha + 2/n}``.

    ``membership`` is the numerical verdict that supplied the hypothesis;
    it is recorded, not re-checked.
    """
    a = _num(alpha)
    if not a < 0:
        raise ValueError("the implication needs alpha < 0")
    if n < 1:
        raise ValueError("n must be positive")
    gain = Fraction(2, n) if isinstance(a, Fraction) else 2.0 / n
    prov = {"hypothesis": "1/p in D_alpha", "alpha": float(a), "n": n}
    if membership is not None:
        prov["input"] = membership.to_dict() if hasattr(membership, "to_dict") else membership
    return ImplicationVerdict(a + gain, a, n, prov)
