"""Rational inner functions ``ptilde / p`` and their one-variable slices."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .polycore import (
    MultiPoly,
    TRIM_RTOL,
    eval_poly,
    partial_derivative,
    reflect,
    roots_batch,
    slice_coeffs,
)

log = logging.getLogger(__name__)

# 1 - |zero| below this marks a boundary zero, excluded from delta
BOUNDARY_TOL = 1e-12


class RIFError(ValueError):
    """Base class for rejected RIF constructions."""


class InteriorZero(RIFError):
    pass


class DegenerateVariable(RIFError):
    pass


class UnimodularityFailure(RIFError):
    pass


class SliceVanishes(RIFError):
    """The numerator vanishes identically along the requested slice."""


@dataclass(frozen=True)
class ProbeConfig:
    """Sampling used to probe stability and unimodularity.

    The stability probe fixes all variables but the first at points of the
    open polydisk (a radius/angle grid plus seeded random points) and checks
    that every slice root in the free variable lies outside the unit disk.
    """

    radii: tuple = (0.0, 0.3, 0.6, 0.85, 0.95, 0.99, 0.999)
    n_angles: int = 16
    n_random: int = 2048
    max_grid: int = 20000
    torus_samples: int = 10000
    zero_tol: float = 1e-12
    exclusion: float = 1e-6
    unimodular_tol: float = 1e-9
    seed: int = 0


@dataclass(frozen=True)
class RIF:
    p: MultiPoly
    ptilde: MultiPoly
    multidegree: tuple
    stability_certificate: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.p.n

    def __call__(self, z):
        return eval_poly(self.ptilde, z) / eval_poly(self.p, z)

    def derivative(self, z, k: int):
        """``d phi / d z_k`` by the quotient rule."""
        p = eval_poly(self.p, z)
        q = eval_poly(self.ptilde, z)
        dp = eval_poly(partial_derivative(self.p, k), z)
        dq = eval_poly(partial_derivative(self.ptilde, k), z)
        return (dq * p - q * dp) / (p * p)

    def torus_deviation(self, m: int = 10000, seed: int = 0, exclusion: float = 1e-6) -> tuple[float, int]:
        """Max of ``| |phi| - 1 |`` over random torus points away from zeros of ``p``.

        Returns the deviation and the number of points that were kept.
        """
        rng = np.random.default_rng(seed)
        z = np.exp(2j * np.pi * rng.random((m, self.n)))
        pv = eval_poly(self.p, z)
        qv = eval_poly(self.ptilde, z)
        scale = sum(abs(c) for _, c in self.p)
        keep = np.abs(pv) > exclusion * scale
        if not np.any(keep):
            return float("nan"), 0
        dev = np.abs(np.abs(qv[keep] / pv[keep]) - 1.0)
        return float(dev.max()), int(keep.sum())


def _probe_points(n_free: int, cfg: ProbeConfig, rng) -> np.ndarray:
    if n_free == 0:
        return np.zeros((1, 0), dtype=complex)
    ring = np.array(
        [r * np.exp(2j * np.pi * (a + 0.5) / cfg.n_angles) for r in cfg.radii for a in range(cfg.n_angles)]
    )
    pts = []
    if len(ring) ** n_free <= cfg.max_grid:
        mesh = np.meshgrid(*([ring] * n_free), indexing="ij")
        pts.append(np.stack([m.ravel() for m in mesh], axis=-1))
    # uniform in each disk: radius sqrt(U)
    rad = np.sqrt(rng.random((cfg.n_random, n_free))) * cfg.radii[-1]
    pts.append(rad * np.exp(2j * np.pi * rng.random((cfg.n_random, n_free))))
    return np.concatenate(pts, axis=0)


def build_rif(p: MultiPoly, probe: ProbeConfig | None = None) -> RIF:
    """Validate ``p`` as a stable denominator and return ``reflect(p) / p``.

    Raises
    ------
    DegenerateVariable
        ``p`` does not depend on some variable.
    InteriorZero
        ``p(0) = 0`` or the probe found a zero in the open polydisk.
    UnimodularityFailure
        ``|ptilde / p|`` strays from 1 on the torus.
    """
    cfg = probe or ProbeConfig()
    rng = np.random.default_rng(cfg.seed)
    scale = sum(abs(c) for _, c in p)
    if abs(p.constant_term) <= cfg.zero_tol * max(scale, 1.0):
        raise InteriorZero("p vanishes at the origin")
    flat = [i for i, d in enumerate(p.multidegree) if d == 0]
    if flat:
        raise DegenerateVariable(f"p is constant in variable(s) {[i + 1 for i in flat]}")

    # slices in the variable of largest degree
    k = int(np.argmax(p.multidegree))
    zhat = _probe_points(p.n - 1, cfg, rng)
    coeffs = slice_coeffs(p, k, zhat)
    min_root = np.inf
    for deg, rows in _rows_by_degree(coeffs):
        if deg < 0:
            raise InteriorZero("p vanishes identically on a slice through the open polydisk")
        if deg == 0:
            continue
        r = roots_batch(coeffs[rows, : deg + 1])
        min_root = min(min_root, float(np.abs(r).min()))
    if min_root < 1.0 - cfg.zero_tol:
        raise InteriorZero(f"slice root of modulus {min_root:.6g} inside the unit disk")

    # min modulus on the full probe grid through the open polydisk
    ring = np.array([r * np.exp(2j * np.pi * (a + 0.5) / cfg.n_angles) for r in cfg.radii for a in range(cfg.n_angles)])
    full = np.empty((len(zhat), len(ring), p.n), dtype=complex)
    others = [i for i in range(p.n) if i != k]
    full[:, :, others] = zhat[:, None, :]
    full[:, :, k] = ring[None, :]
    min_mod = float(np.abs(eval_poly(p, full.reshape(-1, p.n))).min())
    if min_mod <= cfg.zero_tol * scale:
        raise InteriorZero(f"|p| = {min_mod:.3g} at an interior probe point")

    ptilde = reflect(p, p.multidegree)
    rif = RIF(p, ptilde, p.multidegree)
    dev, kept = rif.torus_deviation(cfg.torus_samples, cfg.seed, cfg.exclusion)
    if not dev < cfg.unimodular_tol:
        raise UnimodularityFailure(f"max | |phi| - 1 | = {dev:.3g} on the torus")
    cert = {
        "probe_points": int(len(zhat) * len(ring)),
        "slice_variable": k,
        "min_modulus": min_mod,
        "min_slice_root_modulus": float(min_root),
        "torus_samples_kept": kept,
        "max_unimodular_deviation": dev,
        "seed": cfg.seed,
    }
    return RIF(p, ptilde, p.multidegree, cert)


# -- slices -----------------------------------------------------------


@dataclass(frozen=True)
class BlaschkeSlice:
    """Zeros in the open disk of one slice ``z_k -> phi(z_k; zhat)``.

    ``delta`` is ``None`` for a constant slice (no zeros left).
    """

    zeros: tuple
    degree_defect: int
    delta: float | None

    @property
    def is_constant(self) -> bool:
        return not self.zeros


def _rows_by_degree(coeffs):
    # trimmed degree per row; -1 marks an identically zero row
    a = np.abs(coeffs)
    scale = a.max(axis=1, keepdims=True)
    nz = a > TRIM_RTOL * np.where(scale > 0, scale, 1.0)
    nz &= scale > 0
    deg = np.where(nz.any(axis=1), coeffs.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
    for d in np.unique(deg):
        yield int(d), np.nonzero(deg == d)[0]


@dataclass(frozen=True)
class SliceBatch:
    """Slice data for many torus points at once.

    ``zeros`` has shape ``(S, d_k)``, padded with NaN where a slice has
    fewer zeros in the open disk.  ``delta`` is NaN for constant slices.
    """

    zeros: np.ndarray
    counts: np.ndarray
    delta: np.ndarray
    vanished: np.ndarray
    dk: int

    @property
    def degree_defect(self) -> np.ndarray:
        return self.dk - self.counts


def slice_batch(f: RIF, k: int, zhat) -> SliceBatch:
    zhat = np.asarray(zhat, dtype=complex)
    coeffs = slice_coeffs(f.ptilde, k, zhat)
    S = coeffs.shape[0]
    dk = f.multidegree[k]
    zeros = np.full((S, dk), np.nan + 0j)
    vanished = np.zeros(S, dtype=bool)
    for deg, rows in _rows_by_degree(coeffs):
        if deg < 0:
            vanished[rows] = True
            continue
        if deg == 0:
            continue
        r = roots_batch(coeffs[rows, : deg + 1])
        r = np.where(np.abs(r) < 1.0 - BOUNDARY_TOL, r, np.nan)
        # compact the surviving zeros to the left
        order = np.argsort(np.isnan(r), axis=1, kind="stable")
        r = np.take_along_axis(r, order, axis=1)
        zeros[rows, :deg] = r
    counts = np.sum(~np.isnan(zeros), axis=1)
    with np.errstate(invalid="ignore"):
        dist = 1.0 - np.abs(zeros)
    delta = np.where(counts > 0, np.nanmin(np.where(np.isnan(dist), np.inf, dist), axis=1), np.nan)
    return SliceBatch(zeros, counts, delta, vanished, dk)


def slice_blaschke(f: RIF, k: int, zhat) -> BlaschkeSlice:
    """Zeros, degree defect and torus distance of the slice at ``zhat``.

    ``delta = min(1 - |zero|)`` over zeros in the open disk.  The literal
    variant ``min |1 - zero|`` is only logged at debug level.
    """
    zhat = np.asarray(zhat, dtype=complex).reshape(1, -1)
    if zhat.shape[1] != f.n - 1:
        raise ValueError(f"zhat needs {f.n - 1} entries")
    if np.any(np.abs(np.abs(zhat) - 1.0) > 1e-9):
        raise ValueError("zhat must lie on the torus")
    b = slice_batch(f, k, zhat)
    if b.vanished[0]:
        raise SliceVanishes(f"ptilde vanishes identically on the slice at {zhat[0]}")
    z = tuple(complex(x) for x in b.zeros[0, : b.counts[0]])
    delta = float(b.delta[0]) if z else None
    if z and log.isEnabledFor(logging.DEBUG):
        log.debug("slice delta=%.6g literal min|1-zero|=%.6g", delta, min(abs(1 - x) for x in z))
    return BlaschkeSlice(z, int(b.degree_defect[0]), delta)
