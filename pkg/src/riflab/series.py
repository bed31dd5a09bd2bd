"""Truncated power series of rational functions ``q / p`` on a coefficient box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polycore import DimensionError, MultiPoly

# refuse boxes holding more coefficients than this unless told otherwise
MAX_COEFFS = 1 << 22


class BoxTooLarge(MemoryError):
    pass


@dataclass(frozen=True)
class CoeffBox:
    """Dense Taylor coefficients ``a(k)`` for ``0 <= k_i <= orders[i]``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim < 1:
            raise ValueError("coefficient tensor needs at least one axis")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.ndim

    @property
    def orders(self) -> tuple:
        return tuple(s - 1 for s in self.coeffs.shape)

    def __getitem__(self, k):
        return self.coeffs[tuple(k)]

    def sub(self, orders: Sequence[int]) -> "CoeffBox":
        """The leading sub-box ``[0, orders[i]]`` in each variable."""
        if len(orders) != self.n:
            raise DimensionError("orders length must equal the variable count")
        if any(o > m for o, m in zip(orders, self.orders)):
            raise ValueError(f"sub-box {tuple(orders)} exceeds {self.orders}")
        return CoeffBox(self.coeffs[tuple(slice(0, o + 1) for o in orders)])

    @classmethod
    def from_poly(cls, q: MultiPoly, orders: Sequence[int] | None = None) -> "CoeffBox":
        orders = tuple(q.multidegree if orders is None else orders)
        c = np.zeros(tuple(o + 1 for o in orders), dtype=complex)
        for e, v in q:
            if all(ei <= o for ei, o in zip(e, orders)):
                c[e] = v
        return cls(c)


def expand_ratio(q: MultiPoly, p: MultiPoly, orders: Sequence[int], max_coeffs: int = MAX_COEFFS) -> CoeffBox:
    """Taylor coefficients of ``q / p`` on the box ``[0, orders]``.

    Solves ``p(0) a(k) = q_k - sum_{0 < j <= k} p_j a(k - j)`` one total
    degree at a time; every predecessor of a degree-``s`` entry has degree
    below ``s``, so each layer is a single vectorised update.
    """
    if q.n != p.n:
        raise DimensionError("numerator and denominator have different variable counts")
    orders = tuple(int(o) for o in orders)
    if len(orders) != p.n or any(o < 0 for o in orders):
        raise ValueError(f"bad orders {orders} for n={p.n}")
    p0 = p.constant_term
    if p0 == 0:
        raise ZeroDivisionError("p(0) = 0: q/p has no power series at the origin")
    shape = tuple(o + 1 for o in orders)
    size = int(np.prod(shape))
    if size > max_coeffs:
        raise BoxTooLarge(f"box {shape} holds {size} coefficients (limit {max_coeffs})")

    a = np.zeros(size, dtype=complex)
    rhs = CoeffBox.from_poly(q, orders).coeffs.ravel().copy()
    strides = np.array([int(np.prod(shape[i + 1 :])) for i in range(len(shape))])
    idx = np.indices(shape).reshape(len(shape), -1)
    degree = idx.sum(axis=0)
    order = np.argsort(degree, kind="stable")
    bounds = np.searchsorted(degree[order], np.arange(degree.max() + 2))
    shifts = [(np.array(e), int(np.dot(e, strides)), c) for e, c in p if any(e)]

    for s in range(degree.max() + 1):
        layer = order[bounds[s] : bounds[s + 1]]
        acc = rhs[layer]
        ks = idx[:, layer]
        for e, off, c in shifts:
            ok = np.all(ks >= e[:, None], axis=0)
            if ok.any():
                acc[ok] -= c * a[layer[ok] - off]
        a[layer] = acc / p0
    return CoeffBox(a.reshape(shape))


def diagonal(box: CoeffBox) -> np.ndarray:
    """``a(l, ..., l)`` for ``l = 0 .. min(orders)``."""
    m = min(box.orders) + 1
    ix = np.arange(m)
    return box.coeffs[(ix,) * box.n]


def convolve_poly(box: CoeffBox, p: MultiPoly) -> np.ndarray:
    """Coefficients of ``p * f`` on the same box (truncated at the box edge)."""
    c = box.coeffs
    out = np.zeros_like(c)
    for e, v in p:
        if any(ei > o for ei, o in zip(e, box.orders)):
            continue
        dst = tuple(slice(ei, None) for ei in e)
        src = tuple(slice(0, o + 1 - ei) for ei, o in zip(e, box.orders))
        out[dst] += v * c[src]
    return out
