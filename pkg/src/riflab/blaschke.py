"""Finite Blaschke products in one variable and their ``D_p`` norms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

# N = max(MIN_ORDER, ceil(ORDER_PER_EPS / eps)) makes max|zero|^(2N) ~ exp(-80)
MIN_ORDER = 64
ORDER_PER_EPS = 40.0
MAX_ORDER = 1 << 23


class TruncationError(ValueError):
    """The tail beyond the truncation order is not small enough."""

    def __init__(self, msg: str, required_order: int):
        super().__init__(msg)
        self.required_order = required_order


@dataclass(frozen=True)
class BlaschkeProduct:
    """``c * prod_j (z - a_j) / (1 - conj(a_j) z)`` with every ``|a_j| < 1``."""

    zeros: tuple
    constant: complex = 1.0

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if any(not abs(a) < 1 for a in zs):
            raise ValueError("Blaschke zeros must lie strictly inside the unit disk")
        if abs(abs(complex(self.constant)) - 1) > 1e-12:
            raise ValueError("the constant factor must be unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "constant", complex(self.constant))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def epsilon(self) -> float:
        """Distance from the zero set to the circle; 1 for a constant."""
        return min((1 - abs(a) for a in self.zeros), default=1.0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.constant)
        for a in self.zeros:
            out = out * (z - a) / (1 - np.conj(a) * z)
        return out

    def coefficients(self, N: int) -> np.ndarray:
        """Taylor coefficients ``b(0..N)``, one factor at a time."""
        c = np.zeros(N + 1, dtype=complex)
        c[0] = self.constant
        for a in self.zeros:
            shifted = np.empty_like(c)
            shifted[0] = 0
            shifted[1:] = c[:-1]
            c = lfilter([1.0], [1.0, -np.conj(a)], shifted - a * c)
        return c


def default_order(b: BlaschkeProduct) -> int:
    return max(MIN_ORDER, math.ceil(ORDER_PER_EPS / b.epsilon))


def _norm_and_tail(b: BlaschkeProduct, p: float, N: int) -> tuple[float, float]:
    c = b.coefficients(N)
    k = np.arange(N + 1)
    t = (1.0 + k) ** p * np.abs(c) ** 2
    value = math.fsum(t)
    rho = max((abs(a) for a in b.zeros), default=0.0)
    if rho == 0.0 or t[-1] == 0.0:
        return value, 0.0
    # geometric tail: analytic decay rate, or the observed one if slower
    observed = 0.0
    noise = (64 * np.finfo(float).eps * np.abs(c).max()) ** 2
    if np.abs(c[-17:]).max() ** 2 > noise:
        # above the rounding floor the observed ratio is meaningful
        w = t[-17:]
        w = w[w > 0]
        observed = float(np.max(w[1:] / w[:-1])) if len(w) > 1 else 0.0
    r = max(((N + 2) / (N + 1)) ** p * rho**2, observed)
    if r >= 1:
        return value, math.inf
    return value, float(t[-1] * r / (1 - r))


def d_alpha_norm_1d(
    b: BlaschkeProduct, p: float, N: int | None = None, tol: float = 1e-12, detail: bool = False
):
    """``sum_k (1 + k)^p |b(k)|^2`` truncated at order ``N``.

    Without ``N`` the order starts at ``max(64, ceil(40 / eps))`` and is
    doubled until the estimated tail is below ``tol`` relative.  With
    ``detail`` the result is ``(value, tail, N)``.
    """
    if N is not None and N < 1:
        raise ValueError("truncation order must be >= 1")
    auto = N is None
    N = default_order(b) if auto else int(N)
    while True:
        value, tail = _norm_and_tail(b, p, N)
        if tail <= tol * max(value, 1.0):
            break
        if not auto or 2 * N > MAX_ORDER:
            need = 2 * N
            raise TruncationError(f"tail estimate {tail:.3g} at order {N} exceeds tolerance {tol:g}", need)
        N *= 2
    return (value, tail, N) if detail else value


def onedim_ratio(b: BlaschkeProduct, p: float, **kw) -> float:
    """``||b||^2_{D_p} * eps^(p - 1)``; bounded in eps for fixed ``p`` and degree."""
    if not p > 0:
        raise ValueError("p must be positive")
    return d_alpha_norm_1d(b, p, **kw) * b.epsilon ** (p - 1)


def spread_zeros(degree: int, eps: float, constant: complex = 1.0) -> BlaschkeProduct:
    """Zeros ``(1 - eps) e^{2 pi i m / degree}``, evenly spaced on one circle."""
    r = 1.0 - eps
    return BlaschkeProduct(tuple(r * np.exp(2j * np.pi * m / degree) for m in range(degree)), constant)
