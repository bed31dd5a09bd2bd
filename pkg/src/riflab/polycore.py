"""Sparse multivariate complex polynomials.

Variables are indexed from 0.  A multi-index is a plain tuple of
non-negative ints, one entry per variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

MultiIndex = tuple

# relative size below which a trailing slice coefficient counts as zero
TRIM_RTOL = 1e-14


class DimensionError(ValueError):
    """Point or multi-index length does not match the variable count."""


class MultiPoly:
    """Immutable sparse polynomial in ``n`` complex variables.

    ``terms`` maps exponent tuples to complex coefficients.  Zero
    coefficients are dropped on construction, so the stored multidegree is
    always the componentwise maximum over the surviving exponents.
    """

    __slots__ = ("n", "_terms", "multidegree", "_tree")

    def __init__(self, n: int, terms: Mapping[Sequence[int], complex] | Iterable = ()):
        if n < 1:
            raise ValueError("a polynomial needs at least one variable")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[tuple, complex] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise DimensionError(f"exponent {exp} has length {len(exp)}, expected {n}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            clean[exp] = clean.get(exp, 0j) + complex(c)
        clean = {e: c for e, c in clean.items() if c != 0}
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", MappingProxyType(dict(sorted(clean.items()))))
        deg = tuple(max((e[i] for e in clean), default=0) for i in range(n))
        object.__setattr__(self, "multidegree", deg)
        object.__setattr__(self, "_tree", None)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c: complex, n: int) -> "MultiPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, i: int, n: int) -> "MultiPoly":
        exp = [0] * n
        exp[i] = 1
        return cls(n, {tuple(exp): 1.0})

    @classmethod
    def variables(cls, n: int) -> list["MultiPoly"]:
        return [cls.variable(i, n) for i in range(n)]

    # -- container protocol -------------------------------------------
    @property
    def terms(self) -> Mapping[tuple, complex]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coeff(self, exp: Sequence[int]) -> complex:
        return self._terms.get(tuple(exp), 0j)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def constant_term(self) -> complex:
        return self.coeff((0,) * self.n)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.n != self.n:
                raise DimensionError(f"cannot combine {self.n}- and {other.n}-variable polynomials")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return MultiPoly.constant(other, self.n)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other:
            out[e] = out.get(e, 0j) + c
        return MultiPoly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n, {e: -c for e, c in self})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple, complex] = {}
        for e1, c1 in self:
            for e2, c2 in other:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return MultiPoly(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, float, complex, np.number)):
            return NotImplemented
        return MultiPoly(self.n, {e: c / other for e, c in self})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(1.0, self.n)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n == other.n and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self.n, tuple(self._terms.items())))

    def allclose(self, other: "MultiPoly", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        """Coefficientwise comparison relative to the largest coefficient."""
        if self.n != other.n:
            return False
        keys = set(self._terms) | set(other._terms)
        scale = max([abs(c) for _, c in self] + [abs(c) for _, c in other] + [0.0])
        return all(abs(self.coeff(k) - other.coeff(k)) <= atol + rtol * scale for k in keys)

    def __repr__(self):
        if self.is_zero:
            return f"MultiPoly({self.n}, 0)"
        parts = []
        for e, c in self:
            mono = "*".join(f"z{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            cs = f"{c.real:g}" if c.imag == 0 else f"({c:g})"
            parts.append(cs if not mono else f"{cs}*{mono}")
        return f"MultiPoly({self.n}, {' + '.join(parts)})"

    # -- evaluation ---------------------------------------------------
    def _horner_tree(self):
        if self._tree is None:
            object.__setattr__(self, "_tree", _build_tree(list(self._terms.items()), self.n - 1))
        return self._tree

    def __call__(self, z) -> complex | np.ndarray:
        return eval_poly(self, z)


def _build_tree(items, var):
    # nested Horner layout: (var, [subtree for exponent 0..D]) or a scalar at var == -1
    if var < 0:
        return sum((c for _, c in items), 0j)
    groups: dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[var], []).append((e, c))
    D = max(groups) if groups else 0
    return var, [_build_tree(groups[k], var - 1) if k in groups else None for k in range(D + 1)]


def _horner(tree, z):
    if not isinstance(tree, tuple):
        return tree
    var, subs = tree
    x = z[..., var]
    acc = 0j
    for sub in reversed(subs):
        acc = acc * x
        if sub is not None:
            acc = acc + _horner(sub, z)
    return acc


def eval_poly(p: MultiPoly, z) -> complex | np.ndarray:
    """Evaluate ``p`` at one point (shape ``(n,)``) or a batch (shape ``(..., n)``)."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (p.n,):
        raise DimensionError(f"point has trailing dimension {z.shape[-1:] or 0}, expected {p.n}")
    if p.is_zero:
        out = np.zeros(z.shape[:-1], dtype=complex)
    else:
        out = _horner(p._horner_tree(), z) * np.ones(z.shape[:-1])
    return complex(out) if z.ndim == 1 else out


def reflect(p: MultiPoly, d: Sequence[int] | None = None) -> MultiPoly:
    """Reflection ``z^d * conj(p(1/conj(z)))``: ``c z^a`` becomes ``conj(c) z^(d - a)``."""
    d = p.multidegree if d is None else tuple(int(x) for x in d)
    if len(d) != p.n:
        raise DimensionError(f"reflection degree {d} has wrong length for n={p.n}")
    if any(di < mi for di, mi in zip(d, p.multidegree)):
        raise ValueError(f"reflection degree {d} is below the multidegree {p.multidegree}")
    return MultiPoly(p.n, {tuple(di - ai for di, ai in zip(d, a)): c.conjugate() for a, c in p})


def partial_derivative(p: MultiPoly, i: int) -> MultiPoly:
    if not 0 <= i < p.n:
        raise IndexError(f"variable index {i} out of range for n={p.n}")
    out = {}
    for e, c in p:
        if e[i]:
            f = list(e)
            f[i] -= 1
            out[tuple(f)] = c * e[i]
    return MultiPoly(p.n, out)


def substitute_affine(p: MultiPoly, shift: Sequence[complex], scale: Sequence[complex]) -> MultiPoly:
    """Re-expand ``p`` in new variables ``w`` with ``z_j = shift_j + scale_j * w_j``."""
    if len(shift) != p.n or len(scale) != p.n:
        raise DimensionError("shift/scale length must equal the variable count")
    out: dict[tuple, complex] = {}
    for e, c in p:
        per_var = [
            [(b, comb(k, b) * shift[j] ** (k - b) * scale[j] ** b) for b in range(k + 1)]
            for j, k in enumerate(e)
        ]
        for combo in product(*per_var):
            exp = tuple(b for b, _ in combo)
            val = c
            for _, f in combo:
                val *= f
            out[exp] = out.get(exp, 0j) + val
    return MultiPoly(p.n, out)


# -- one-variable pieces ----------------------------------------------


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial, coefficients in ascending degree order.

    ``degree_drop`` records how far the trimmed degree fell below the
    nominal degree it was sliced from.
    """

    coeffs: np.ndarray
    degree_drop: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if len(self.coeffs) else -1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))


def trim(coeffs, nominal_degree: int | None = None, rtol: float = TRIM_RTOL) -> UniPoly:
    c = np.asarray(coeffs, dtype=complex)
    nominal = len(c) - 1 if nominal_degree is None else nominal_degree
    scale = np.max(np.abs(c)) if len(c) else 0.0
    keep = len(c)
    while keep and abs(c[keep - 1]) <= rtol * scale:
        keep -= 1
    return UniPoly(c[:keep], degree_drop=nominal - (keep - 1) if keep else nominal + 1)


def slice_coeffs(p: MultiPoly, k: int, zhat) -> np.ndarray:
    """Coefficients (ascending in ``z_k``) of the slices of ``p`` at a batch of points.

    ``zhat`` has shape ``(..., n - 1)`` and fixes every variable except ``z_k``.
    Returns shape ``(..., d_k + 1)`` without trimming.
    """
    if not 0 <= k < p.n:
        raise IndexError(f"variable index {k} out of range for n={p.n}")
    zhat = np.asarray(zhat, dtype=complex)
    if zhat.shape[-1:] != (p.n - 1,) and not (p.n == 1 and zhat.shape[-1:] == (0,)):
        raise DimensionError(f"slice point needs {p.n - 1} entries, got shape {zhat.shape}")
    batch = zhat.shape[:-1]
    dk = p.multidegree[k]
    out = np.zeros(batch + (dk + 1,), dtype=complex)
    others = [i for i in range(p.n) if i != k]
    for e, c in p:
        mono = np.full(batch, c, dtype=complex)
        for col, i in enumerate(others):
            if e[i]:
                mono = mono * zhat[..., col] ** e[i]
        out[..., e[k]] += mono
    return out


def slice_poly(p: MultiPoly, k: int, zhat: Sequence[complex]) -> UniPoly:
    """One-variable polynomial in ``z_k`` with the other variables fixed at ``zhat``."""
    zhat = np.asarray(zhat, dtype=complex)
    if zhat.shape != (p.n - 1,):
        raise DimensionError(f"slice point needs {p.n - 1} entries, got shape {zhat.shape}")
    return trim(slice_coeffs(p, k, zhat), nominal_degree=p.multidegree[k])


def roots_univariate(u: UniPoly | Sequence[complex]) -> np.ndarray:
    """All roots (with multiplicity) via companion eigenvalues and one Newton polish."""
    if not isinstance(u, UniPoly):
        u = trim(u)
    if u.is_zero:
        raise ValueError("the zero polynomial has no well-defined roots")
    if u.degree < 1:
        raise ValueError("need degree >= 1 to find roots")
    return roots_batch(u.coeffs[None, :])[0]


def roots_batch(coeffs) -> np.ndarray:
    """Roots of many polynomials of one common degree.

    ``coeffs`` has shape ``(S, d + 1)``, ascending, with nonzero leading
    entries.  Returns shape ``(S, d)``.
    """
    c = np.asarray(coeffs, dtype=complex)
    S, d1 = c.shape
    d = d1 - 1
    if d < 1:
        return np.zeros((S, 0), dtype=complex)
    lead = c[:, -1]
    if np.any(lead == 0):
        raise ValueError("leading coefficient vanishes; trim before root finding")
    if d == 1:
        r = (-c[:, 0] / lead)[:, None]
    elif d == 2:
        a, b, cc = lead, c[:, 1], c[:, 0]
        disc = np.sqrt(b * b - 4 * a * cc)
        # pick the sign that avoids cancellation, then use Vieta
        sgn = np.where((np.conj(b) * disc).real >= 0, 1.0, -1.0)
        q = -0.5 * (b + sgn * disc)
        r1 = np.where(q != 0, q / a, 0)
        r2 = np.where(q != 0, cc / np.where(q != 0, q, 1), 0)
        r = np.stack([r1, r2], axis=1)
    else:
        monic = c[:, :-1] / lead[:, None]
        comp = np.zeros((S, d, d), dtype=complex)
        comp[:, 1:, :-1] = np.eye(d - 1)
        comp[:, :, -1] = -monic
        r = np.linalg.eigvals(comp)
    return _newton_polish(c, r)


def _newton_polish(c, r):
    val = np.zeros_like(r)
    der = np.zeros_like(r)
    for j in range(c.shape[1] - 1, -1, -1):
        der = der * r + val
        val = val * r + c[:, j : j + 1]
    ok = der != 0
    step = np.where(ok, val / np.where(ok, der, 1), 0)
    cand = r - step
    # accept the step only where it does not increase the residual
    cval = np.zeros_like(cand)
    for j in range(c.shape[1] - 1, -1, -1):
        cval = cval * cand + c[:, j : j + 1]
    return np.where(np.abs(cval) <= np.abs(val), cand, r)
