"""Constitutive stress law S = (nu0 + nu1 |xi|^{s(t,x)-2}) xi and its
theta-regularization S + theta * s_max |xi|^{s_max-2} xi.

The exponent regime is s >= 2 (forced by the admissible bound for d = 2, 3),
so |xi|^{s-2} is continuous at xi = 0 and S(t, x, 0) = 0 exactly.

Certificates for monotonicity and for the coercivity/growth inequality
    c S:xi >= |xi|^s + |S|^{s'} - h_bar
are sweep-based and reproducible: fixed seeds, fixed grids, reported
constants.  Margins are evaluated relative to the size of the terms; a
roundoff band of 1e-12 is allowed because the pure power law sits exactly on
the inequality (c = 2, h_bar = 0 with margin algebraically zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .exponent import ExponentField

_MARGIN_RTOL = 1e-12
_XI_SWEEP = np.logspace(-8.0, 8.0, 161)
_N_S_SWEEP = 33
_C_CAP = 2.0**64


class CoercivityError(RuntimeError):
    """No finite coercivity constant found: the law is misconfigured."""


@dataclass(frozen=True)
class StressLaw:
    nu0: float
    nu1: float
    exponent: ExponentField
    theta: float = 0.0
    s_max: float | None = None

    def __post_init__(self):
        if self.nu0 < 0 or self.nu1 < 0:
            raise ValueError("viscosity coefficients must be nonnegative")
        if self.nu0 + self.nu1 <= 0:
            raise ValueError("need nu0 + nu1 > 0")
        if not 0.0 <= self.theta < 1.0:
            raise ValueError("theta must lie in [0, 1)")
        if self.s_max is None:
            object.__setattr__(self, "s_max", self.exponent.s_max)

    # -- pointwise evaluation ------------------------------------------------

    def _check_sym(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-2:] != (2, 2):
            raise ValueError("expected a 2x2 tensor")
        if not np.array_equal(xi[..., 0, 1], xi[..., 1, 0]):
            raise ValueError("input tensor is not symmetric")
        return xi

    def eval(self, t: float, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """S(t, x, xi) for a symmetric 2x2 tensor (Frobenius |xi|)."""
        xi = self._check_sym(xi)
        s = float(self.exponent.sample(t, np.asarray(x, dtype=float)))
        mag = np.sqrt(np.sum(xi**2))
        if mag == 0.0:
            return np.zeros_like(xi)
        return (self.nu0 + self.nu1 * mag ** (s - 2.0)) * xi

    def eval_regularized(self, t: float, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """S^theta = S + theta * grad_xi |xi|^{s_max} = S + theta s_max |xi|^{s_max-2} xi."""
        xi = self._check_sym(xi)
        base = self.eval(t, x, xi)
        mag = np.sqrt(np.sum(xi**2))
        if mag == 0.0:
            return base
        return base + self.theta * self.s_max * mag ** (self.s_max - 2.0) * xi

    # -- vectorized evaluation on packed tensors -----------------------------

    def eval_packed(self, s: np.ndarray, packed: np.ndarray, regularized: bool = True) -> np.ndarray:
        """Apply the law to (..., 3)-packed symmetric tensors (a11, a22, a12)."""
        mag = np.sqrt(packed[..., 0] ** 2 + packed[..., 1] ** 2 + 2.0 * packed[..., 2] ** 2)
        g = np.full_like(mag, self.nu0)
        if self.nu1 != 0.0:
            with np.errstate(divide="ignore"):
                powed = np.where(mag > 0, mag, 1.0) ** (np.asarray(s) - 2.0)
            g = g + self.nu1 * np.where(mag > 0, powed, 0.0)
        if regularized and self.theta != 0.0:
            reg = np.where(mag > 0, mag, 1.0) ** (self.s_max - 2.0)
            g = g + self.theta * self.s_max * np.where(mag > 0, reg, 0.0)
        return g[..., None] * packed


@dataclass(frozen=True)
class MonotonicityReport:
    worst: float   # min of (S(xi1) - S(xi2)) : (xi1 - xi2)
    scale: float   # max of |S(xi1) - S(xi2)| * |xi1 - xi2| over the sweep
    n_samples: int
    seed: int


@dataclass(frozen=True)
class CoercivityCertificate:
    c: float
    h_bar: float
    worst_margin: float                  # relative to the size of the swept terms
    c_theta: float | None = None         # s_max-growth variant, theta > 0 only
    h_theta: float | None = None         # with h_theta / c_theta = (h_bar + 1) / c
    worst_margin_theta: float | None = None
    n_points: int = dc_field(default=0)

    @property
    def ok(self) -> bool:
        if self.worst_margin < -_MARGIN_RTOL:
            return False
        return self.worst_margin_theta is None or self.worst_margin_theta >= -_MARGIN_RTOL


def _random_sym_packed(rng: np.random.Generator, n: int) -> np.ndarray:
    # wide dynamic range: unit gaussians times log-uniform magnitudes
    base = rng.standard_normal((n, 3))
    scale = 10.0 ** rng.uniform(-4, 4, size=n)
    return base * scale[:, None]


def certify_monotone(law: StressLaw, n_samples: int = 100_000, seed: int = 0) -> MonotonicityReport:
    """Randomized monotonicity sweep: min (S(xi1)-S(xi2)):(xi1-xi2).

    For theta = 0 the minimum must be >= -1e-13 * scale; for theta > 0 it is
    strictly positive away from xi1 = xi2.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    xi1 = _random_sym_packed(rng, n_samples)
    xi2 = _random_sym_packed(rng, n_samples)
    t = rng.uniform(0.0, law.exponent.t_end, size=n_samples)
    x = np.column_stack([
        rng.uniform(0.0, law.exponent.grid.lx, size=n_samples),
        rng.uniform(0.0, law.exponent.grid.ly, size=n_samples),
    ])
    # nearest-slab, nearest-cell exponent per sample
    starts = np.array([sl.t_start for sl in law.exponent.slabs])
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(starts) - 1)
    h = law.exponent.grid.h
    ci = np.clip((x[:, 0] / h - 0.5).round().astype(int), 0, law.exponent.grid.nx - 1)
    cj = np.clip((x[:, 1] / h - 0.5).round().astype(int), 0, law.exponent.grid.ny - 1)
    stack = law.exponent.values_stack()
    s = stack[idx, ci, cj]

    s1 = law.eval_packed(s, xi1)
    s2 = law.eval_packed(s, xi2)
    cw = np.array([1.0, 1.0, 2.0])
    inner = np.sum((s1 - s2) * (xi1 - xi2) * cw, axis=-1)
    ds_mag = np.sqrt(np.sum((s1 - s2) ** 2 * cw, axis=-1))
    dxi_mag = np.sqrt(np.sum((xi1 - xi2) ** 2 * cw, axis=-1))
    return MonotonicityReport(
        worst=float(inner.min()),
        scale=float(np.max(ds_mag * dxi_mag)),
        n_samples=n_samples,
        seed=seed,
    )


def _sweep_margin(law: StressLaw, c: float, h_bar: float, s_lo: float, s_hi: float,
                  exponent_pair: str) -> float:
    """Worst relative coercivity margin over the (|xi|, s) sweep grid.

    exponent_pair selects the inequality: "variable" uses (s, s') on S, the
    Lemma-5.3 "smax" variant uses (s_max, s_max') on S^theta.
    """
    m = _XI_SWEEP
    worst = np.inf
    for s in np.linspace(s_lo, s_hi, _N_S_SWEEP):
        g = law.nu0 + law.nu1 * m ** (s - 2.0)
        if exponent_pair == "smax":
            g = g + law.theta * law.s_max * m ** (law.s_max - 2.0)
            p = law.s_max
        else:
            p = s
        pc = p / (p - 1.0)
        sxx = g * m * m              # S : xi
        smag = g * m                 # |S|
        lhs = c * sxx
        rhs = m**p + smag**pc
        # pointwise relative margin: a genuine violation shows up as O(1)
        # negative, pure roundoff on a tight inequality as ~1e-16
        scale = lhs + rhs + h_bar
        margin = (lhs - rhs + h_bar) / scale
        worst = min(worst, float(margin.min()))
    return worst


def certify_coercive(law: StressLaw) -> CoercivityCertificate:
    """Find (c, h_bar) by doubling c over a log sweep of |xi| and s.

    h_bar = 0 is tried first (it is exact for the pure power law, giving
    c = 2); if no finite c works, the fallback majorant h_bar = c(1+nu0+nu1)
    is coupled to the doubling.  The Lemma-5.3 s_max variant reuses
    h_theta / c_theta = (h_bar + 1) / c.
    """
    s_lo, s_hi = law.exponent.s_min, law.exponent.s_max

    def search(h_of_c):
        c = 1.0
        while c <= _C_CAP:
            m = _sweep_margin(law, c, h_of_c(c), s_lo, s_hi, "variable")
            if m >= -_MARGIN_RTOL:
                return c, h_of_c(c), m
            c *= 2.0
        return None

    found = search(lambda c: 0.0)
    if found is None:
        found = search(lambda c: c * (1.0 + law.nu0 + law.nu1))
    if found is None:
        raise CoercivityError("coercivity constant exceeds 2**64")
    c, h_bar, worst = found

    if law.theta == 0.0:
        # the s_max-growth variant needs the theta term; without it a
        # variable exponent has no s_max growth at large |xi|
        return CoercivityCertificate(
            c=c, h_bar=h_bar, worst_margin=worst,
            n_points=_XI_SWEEP.size * _N_S_SWEEP,
        )

    # s_max-growth certificate for S^theta with the tied ratio
    ratio = (h_bar + 1.0) / c
    ct = c
    while ct <= _C_CAP:
        mt = _sweep_margin(law, ct, ct * ratio, law.exponent.s_min, law.s_max, "smax")
        if mt >= -_MARGIN_RTOL:
            break
        ct *= 2.0
    else:
        raise CoercivityError("s_max coercivity constant exceeds 2**64")

    return CoercivityCertificate(
        c=c, h_bar=h_bar, worst_margin=worst,
        c_theta=ct, h_theta=ct * ratio, worst_margin_theta=mt,
        n_points=_XI_SWEEP.size * _N_S_SWEEP,
    )
