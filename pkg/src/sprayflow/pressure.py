"""Auxiliary pressure problems solved spectrally on a padded periodic box.

The four whole-plane Poisson problems
    -lap p1 =  div div (alpha zeta)      (tensor source)
    -lap p2 = -div div (u (x) u zeta)    (tensor source, opposite sign)
    -lap p3 =  div F                     (vector source)
    -lap p4 =  div div (theta beta)      (tensor source, like p1)
are approximated by embedding the physical domain centrally in a periodic box
four diameters wide, zero-extending the source, and inverting the exact
Fourier symbols.  Whole-plane uniqueness (decay at infinity) is replaced by
the zero-mean condition on the box; the padding error is measured by the
locality report, never assumed away.

Symmetric tensors are packed (a11, a22, a12); all transforms are numpy FFTs,
so solve residuals sit at FFT roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

KINDS = ("p1", "p2", "p3", "p4")

_TENSOR_KINDS = {"p1": -1.0, "p2": +1.0, "p4": -1.0}


class SupportError(ValueError):
    """Input touches the padding boundary: zero extension would be wrong."""


@dataclass(frozen=True)
class PaddedBox:
    """Periodic computational box holding the physical domain centrally."""

    inner: Grid
    factor: float = 4.0

    @property
    def n(self) -> int:
        cells = int(np.ceil(self.factor * self.inner.diameter / self.inner.h))
        return cells + cells % 2  # even count keeps the embedding symmetric

    @property
    def side(self) -> float:
        return self.n * self.inner.h

    @property
    def offset(self) -> tuple[int, int]:
        return ((self.n - self.inner.nx) // 2, (self.n - self.inner.ny) // 2)

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.inner.h)
        return np.meshgrid(k, k, indexing="ij")

    def embed(self, field: np.ndarray) -> np.ndarray:
        """Zero-extend an inner-domain field (trailing axes pass through)."""
        ox, oy = self.offset
        out = np.zeros((self.n, self.n) + field.shape[2:])
        out[ox : ox + self.inner.nx, oy : oy + self.inner.ny] = field
        return out

    def extract(self, field: np.ndarray) -> np.ndarray:
        ox, oy = self.offset
        return field[ox : ox + self.inner.nx, oy : oy + self.inner.ny]

    def check_support(self, box_field: np.ndarray) -> None:
        mag = np.abs(box_field)
        while mag.ndim > 2:
            mag = mag.sum(axis=-1)
        edge = max(
            float(mag[0, :].max()), float(mag[-1, :].max()),
            float(mag[:, 0].max()), float(mag[:, -1].max()),
        )
        if edge != 0.0:
            raise SupportError("source is not compactly supported inside the box")


@dataclass
class PressureProblem:
    kind: str
    source: np.ndarray  # on the box: (n, n, 3) packed tensor or (n, n, 2) vector
    box: PaddedBox

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pressure problem kind: {self.kind!r}")
        if not np.any(self.source):
            raise ValueError("empty source")
        want = 2 if self.kind == "p3" else 3
        if self.source.shape != (self.box.n, self.box.n, want):
            raise ValueError("source shape does not match the box")
        self.box.check_support(self.source)


def solve(problem: PressureProblem) -> np.ndarray:
    """Zero-mean solution on the box, via the exact Fourier symbols."""
    box = problem.box
    kx, ky = box.wavenumbers()
    k2 = kx**2 + ky**2
    k2[0, 0] = 1.0  # zero mode handled explicitly below
    if problem.kind == "p3":
        fx = np.fft.fft2(problem.source[..., 0])
        fy = np.fft.fft2(problem.source[..., 1])
        phat = 1j * (kx * fx + ky * fy) / k2
    else:
        a11 = np.fft.fft2(problem.source[..., 0])
        a22 = np.fft.fft2(problem.source[..., 1])
        a12 = np.fft.fft2(problem.source[..., 2])
        ktak = kx**2 * a11 + ky**2 * a22 + 2.0 * kx * ky * a12
        phat = _TENSOR_KINDS[problem.kind] * ktak / k2
    phat[0, 0] = 0.0
    return np.real(np.fft.ifft2(phat))


def residual(problem: PressureProblem, p: np.ndarray) -> float:
    """Max-norm defect of -lap p = (rhs with its mean removed), spectrally."""
    box = problem.box
    kx, ky = box.wavenumbers()
    phat = np.fft.fft2(p)
    lhs = np.real(np.fft.ifft2((kx**2 + ky**2) * phat))
    if problem.kind == "p3":
        fx = np.fft.fft2(problem.source[..., 0])
        fy = np.fft.fft2(problem.source[..., 1])
        rhat = 1j * (kx * fx + ky * fy)
    else:
        a11 = np.fft.fft2(problem.source[..., 0])
        a22 = np.fft.fft2(problem.source[..., 1])
        a12 = np.fft.fft2(problem.source[..., 2])
        rhat = _TENSOR_KINDS[problem.kind] * (
            kx**2 * a11 + ky**2 * a22 + 2.0 * kx * ky * a12
        )
    rhat[0, 0] = 0.0
    rhs = np.real(np.fft.ifft2(rhat))
    return float(np.abs(lhs - rhs).max())


def gradient(box: PaddedBox, p: np.ndarray) -> np.ndarray:
    kx, ky = box.wavenumbers()
    phat = np.fft.fft2(p)
    gx = np.real(np.fft.ifft2(1j * kx * phat))
    gy = np.real(np.fft.ifft2(1j * ky * phat))
    return np.stack([gx, gy], axis=-1)


# -- verification reports ----------------------------------------------------

@dataclass
class BoundReport:
    kind: str
    ratios: tuple[float, ...]       # per sample, skipped (zero) samples omitted
    n_skipped: int

    @property
    def worst(self) -> float:
        return max(self.ratios) if self.ratios else 0.0


def _lp_norm(values: np.ndarray, p: float, cellvol: float) -> float:
    mag = np.abs(values) if values.ndim == 2 else np.sqrt(np.sum(values**2, axis=-1))
    return float(np.sum(cellvol * mag**p)) ** (1.0 / p)


def _random_bump_tensor(rng: np.random.Generator, grid: Grid) -> np.ndarray:
    xc, yc = grid.cell_centers()
    cx = rng.uniform(0.3, 0.7) * grid.lx
    cy = rng.uniform(0.3, 0.7) * grid.ly
    rad = rng.uniform(0.1, 0.25) * grid.lx
    rho2 = ((xc - cx) ** 2 + (yc - cy) ** 2) / rad**2
    bump = np.clip(1.0 - rho2, 0.0, None) ** 3
    coeff = rng.standard_normal(3)
    return bump[..., None] * coeff


def verify_bounds(
    grid: Grid,
    n_samples: int = 10,
    seed: int = 0,
    exponents: dict | None = None,
    factor: float = 4.0,
) -> dict[str, BoundReport]:
    """Empirical operator-norm ratios ||p|| / ||source|| per problem kind.

    Exponents default to 2 for every kind; the covering can override them with
    the ball-local values (conjugates of r_i for p1, R_i/2 and R_i for p2).
    All-zero draws are skipped, not counted as ratios.
    """
    if n_samples < 10:
        raise ValueError("need at least 10 samples per kind")
    exps = {"p1": 2.0, "p2_num": 2.0, "p2_den": 4.0, "p3": 2.0}
    if exponents:
        exps.update(exponents)
    box = PaddedBox(grid, factor)
    cellvol = grid.cell_volume
    rng = np.random.default_rng(seed)
    out: dict[str, BoundReport] = {}

    for kind in ("p1", "p2", "p3"):
        ratios = []
        skipped = 0
        for _ in range(n_samples):
            if kind == "p3":
                src_inner = _random_bump_tensor(rng, grid)[..., :2]
            else:
                src_inner = _random_bump_tensor(rng, grid)
            if not np.any(src_inner):
                skipped += 1
                continue
            src = box.embed(src_inner)
            p = box.extract(solve(PressureProblem(kind, src, box)))
            if kind == "p1":
                num = _lp_norm(p, exps["p1"], cellvol)
                den = _lp_norm(src_inner, exps["p1"], cellvol)
            elif kind == "p2":
                num = _lp_norm(p, exps["p2_num"], cellvol)
                den = _lp_norm(src_inner, exps["p2_den"], cellvol) ** 2
            else:
                num = _lp_norm(p, exps["p3"], cellvol)
                den = _lp_norm(src_inner, exps["p3"], cellvol)
            if den == 0.0:
                skipped += 1
                continue
            ratios.append(num / den)
        out[kind] = BoundReport(kind, tuple(ratios), skipped)
    return out


@dataclass
class LocalityReport:
    band_edges: tuple[float, ...]
    sup_p: tuple[float, ...]        # per band, scaled by the source sup
    sup_grad_p: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        return all(a >= b for a, b in zip(self.sup_p, self.sup_p[1:]))


def verify_locality(
    grid: Grid,
    center: tuple[float, float],
    radius: float,
    kind: str = "p1",
    seed: int = 0,
    factor: float = 4.0,
) -> LocalityReport:
    """Far-field decay of p for a source supported in one ball.

    Measures sup |p| and sup |grad p| over three distance bands outside the
    ball, relative to the source sup; the harmonic far field decays like a
    multipole, so the band maxima must be monotone decreasing.
    """
    box = PaddedBox(grid, factor)
    xc, yc = grid.cell_centers()
    rho2 = ((xc - center[0]) ** 2 + (yc - center[1]) ** 2) / radius**2
    bump = np.clip(1.0 - rho2, 0.0, None) ** 3
    rng = np.random.default_rng(seed)
    ncomp = 2 if kind == "p3" else 3
    src_inner = bump[..., None] * rng.standard_normal(ncomp)
    src = box.embed(src_inner)
    p = solve(PressureProblem(kind, src, box))
    gp = gradient(box, p)

    # distances on the full box
    n, h = box.n, grid.h
    ox, oy = box.offset
    bx = (np.arange(n) + 0.5) * h - ox * h
    by = (np.arange(n) + 0.5) * h - oy * h
    gx, gy = np.meshgrid(bx, by, indexing="ij")
    dist = np.hypot(gx - center[0], gy - center[1])

    scale = float(np.abs(src).max())
    edges = (radius, 2.0 * radius, 4.0 * radius, 8.0 * radius)
    sup_p, sup_gp = [], []
    for lo, hi in zip(edges, edges[1:]):
        band = (dist >= lo) & (dist < hi)
        if not band.any():
            raise ValueError("distance band is empty; ball too large for the box")
        sup_p.append(float(np.abs(p[band]).max()) / scale)
        sup_gp.append(float(np.sqrt(np.sum(gp[band] ** 2, axis=-1)).max()) / scale)
    return LocalityReport(edges, tuple(sup_p), tuple(sup_gp))
