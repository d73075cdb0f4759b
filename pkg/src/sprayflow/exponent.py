"""Variable growth exponent s(t, x).

The exponent is piecewise constant in time (ordered slabs, discontinuities
across slab boundaries are allowed) and grid-sampled in space.  Spatial
regularity is only ever *estimated*: the log-Hoelder modulus is a sup over a
continuum, so we sample pairs, report the estimate and gate on nothing beyond
finiteness.

Also contains the ball covering with per-ball exponent statistics
(q_i, r_i, R_i) and a normalized-bump partition of unity, which the pressure
toolkit consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

_MAX_PAIR_SAMPLES = 200_000


def required_s_min(d: int) -> float:
    """Lower admissible bound for the exponent, (3d+2)/(d+2)."""
    return (3 * d + 2) / (d + 2)


def s_zero(d: int) -> float:
    """Auxiliary exponent 3 + 2/d used by the pressure estimates."""
    return 3.0 + 2.0 / d


class CoveringError(RuntimeError):
    """Raised when no admissible covering radius exists on this mesh."""


@dataclass(frozen=True)
class Slab:
    t_start: float
    values: np.ndarray  # (nx, ny), s sampled at cell centers


@dataclass(frozen=True)
class ExponentField:
    """s(t, x) as ordered time slabs of spatial grids on a common mesh."""

    slabs: tuple[Slab, ...]
    t_end: float
    grid: Grid
    d: int = 2

    def __post_init__(self):
        if not self.slabs:
            raise ValueError("exponent field needs at least one slab")
        starts = [s.t_start for s in self.slabs]
        if starts[0] != 0.0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("slabs must start at 0 and be strictly ordered")
        if starts[-1] >= self.t_end:
            raise ValueError("last slab starts at or after t_end")
        shape = (self.grid.nx, self.grid.ny)
        for s in self.slabs:
            if s.values.shape != shape:
                raise ValueError("slab grid does not match the mesh")

    @property
    def s_min(self) -> float:
        return float(min(s.values.min() for s in self.slabs))

    @property
    def s_max(self) -> float:
        return float(max(s.values.max() for s in self.slabs))

    def durations(self) -> np.ndarray:
        starts = np.array([s.t_start for s in self.slabs] + [self.t_end])
        return np.diff(starts)

    def slab_index(self, t: float) -> int:
        starts = [s.t_start for s in self.slabs]
        i = int(np.searchsorted(starts, t, side="right")) - 1
        return max(0, min(i, len(self.slabs) - 1))

    def slab_at(self, t: float) -> Slab:
        return self.slabs[self.slab_index(t)]

    def sample(self, t: float, x: np.ndarray) -> np.ndarray:
        """s at time t and positions x (n, 2), nearest-cell lookup."""
        vals = self.slab_at(t).values
        h = self.grid.h
        i = np.clip((x[..., 0] / h - 0.5).round().astype(int), 0, self.grid.nx - 1)
        j = np.clip((x[..., 1] / h - 0.5).round().astype(int), 0, self.grid.ny - 1)
        return vals[i, j]

    def values_stack(self) -> np.ndarray:
        """(nslabs, nx, ny) view of all slab grids."""
        return np.stack([s.values for s in self.slabs])


@dataclass(frozen=True)
class ValidationReport:
    s_min: float
    s_max: float
    s_min_required: float
    bound_ok: bool
    log_holder_modulus: tuple[float, ...]  # per slab

    @property
    def passed(self) -> bool:
        return self.bound_ok and all(np.isfinite(self.log_holder_modulus))


@dataclass(frozen=True)
class Covering:
    """Equal-radius ball cover with per-ball, per-slab exponent stats.

    q, r_sup, big_r have shape (nballs, nslabs); zeta is (nballs, nx, ny)
    and sums to one at every node.
    """

    centers: np.ndarray
    radius: float
    q: np.ndarray
    r_sup: np.ndarray
    big_r: np.ndarray
    zeta: np.ndarray


def validate(field: ExponentField, max_pairs: int = _MAX_PAIR_SAMPLES) -> ValidationReport:
    """Check the exponent bounds and estimate the log-Hoelder modulus.

    The modulus estimate is sup |s(x)-s(y)| * |log|x-y|| over sampled pairs
    of cell centers with |x-y| < 1/2 (exhaustive when the mesh is small).
    """
    stack = field.values_stack()
    if not np.all(np.isfinite(stack)):
        raise ValueError("exponent field contains non-finite values")
    smin_req = required_s_min(field.d)
    xc, yc = field.grid.cell_centers()
    pts = np.column_stack([xc.ravel(), yc.ravel()])
    n = pts.shape[0]
    if n * (n - 1) // 2 <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(0)
        ii = rng.integers(0, n, size=max_pairs)
        jj = rng.integers(0, n, size=max_pairs)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    dist = np.hypot(*(pts[ii] - pts[jj]).T)
    near = (dist > 0) & (dist < 0.5)
    ii, jj, dist = ii[near], jj[near], dist[near]
    moduli = []
    for slab in field.slabs:
        s = slab.values.ravel()
        if dist.size == 0:
            moduli.append(0.0)
        else:
            moduli.append(float(np.max(np.abs(s[ii] - s[jj]) * np.abs(np.log(dist)))))
    return ValidationReport(
        s_min=field.s_min,
        s_max=field.s_max,
        s_min_required=smin_req,
        bound_ok=field.s_min >= smin_req,
        log_holder_modulus=tuple(moduli),
    )


def conjugate(field: ExponentField) -> ExponentField:
    """Pointwise Hoelder conjugate s' = s / (s - 1)."""
    if field.s_min <= 1.0:
        raise ValueError("conjugate requires s > 1 everywhere")
    slabs = tuple(
        Slab(s.t_start, s.values / (s.values - 1.0)) for s in field.slabs
    )
    return ExponentField(slabs, field.t_end, field.grid, field.d)


def _ball_centers(grid: Grid, radius: float) -> np.ndarray:
    # lattice spacing = radius: farthest point sits at radius/sqrt(2) < radius,
    # so the open balls cover the closed domain with margin
    nbx = max(1, int(np.ceil(grid.lx / radius)))
    nby = max(1, int(np.ceil(grid.ly / radius)))
    cx = (np.arange(nbx) + 0.5) * grid.lx / nbx
    cy = (np.arange(nby) + 0.5) * grid.ly / nby
    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _bump(rho: np.ndarray) -> np.ndarray:
    # C^2 profile, vanishes with two derivatives at rho = 1
    out = np.clip(1.0 - rho**2, 0.0, None) ** 3
    return out


def build_covering(field: ExponentField, grid: Grid | None = None) -> Covering:
    """Cover the domain with equal balls whose 2r-oscillation of s is small.

    The radius is halved from the domain diameter until the oscillation of s
    over every doubled ball is at most s_min/d in every slab.  Raises
    CoveringError once the radius would drop below two mesh cells.
    """
    grid = grid or field.grid
    d = field.d
    smin = required_s_min(d)
    osc_cap = smin / d
    xc, yc = grid.cell_centers()
    stack = field.values_stack()  # (nslabs, nx, ny)
    radius = grid.diameter
    while True:
        if radius < 2.0 * grid.h:
            raise CoveringError(
                "covering radius underflow: exponent oscillates too fast for the mesh"
            )
        centers = _ball_centers(grid, radius)
        dist2 = (xc[None] - centers[:, 0, None, None]) ** 2 + (
            yc[None] - centers[:, 1, None, None]
        ) ** 2
        ok = True
        nb = centers.shape[0]
        q = np.empty((nb, stack.shape[0]))
        r_sup = np.empty_like(q)
        for b in range(nb):
            mask = dist2[b] < (2.0 * radius) ** 2
            if not mask.any():
                ok = False
                break
            sub = stack[:, mask]
            q[b] = sub.min(axis=1)
            r_sup[b] = sub.max(axis=1)
            if np.any(r_sup[b] - q[b] > osc_cap):
                ok = False
                break
        if ok:
            break
        radius *= 0.5

    big_r = q * (1.0 + 2.0 / d)
    raw = _bump(np.sqrt(dist2) / radius)
    total = raw.sum(axis=0)
    if np.any(total <= 0):
        raise CoveringError("partition of unity has uncovered nodes")
    zeta = raw / total
    return Covering(centers=centers, radius=radius, q=q, r_sup=r_sup, big_r=big_r, zeta=zeta)


# ---------------------------------------------------------------------------
# analytic presets (also reachable from the scenario config)

def constant_field(grid: Grid, t_end: float, value: float, d: int = 2) -> ExponentField:
    vals = np.full((grid.nx, grid.ny), float(value))
    return ExponentField((Slab(0.0, vals),), t_end, grid, d)


def sinusoidal_field(
    grid: Grid, t_end: float, base: float = 2.0, amplitude: float = 0.3, d: int = 2
) -> ExponentField:
    xc, yc = grid.cell_centers()
    vals = base + amplitude * np.sin(np.pi * xc / grid.lx) * np.sin(np.pi * yc / grid.ly)
    return ExponentField((Slab(0.0, vals),), t_end, grid, d)


def two_phase_switch_field(
    grid: Grid,
    t_end: float,
    switch_time: float,
    value_before: float = 2.0,
    base_after: float = 2.2,
    amplitude_after: float = 0.2,
    d: int = 2,
) -> ExponentField:
    """Whole-profile switch at a given time: the time-discontinuous case."""
    if not 0.0 < switch_time < t_end:
        raise ValueError("switch_time must lie strictly inside (0, t_end)")
    before = np.full((grid.nx, grid.ny), float(value_before))
    xc, yc = grid.cell_centers()
    after = base_after + amplitude_after * np.sin(np.pi * xc / grid.lx) * np.sin(
        np.pi * yc / grid.ly
    )
    return ExponentField(
        (Slab(0.0, before), Slab(switch_time, after)), t_end, grid, d
    )


PRESETS = {
    "constant": constant_field,
    "sinusoidal": sinusoidal_field,
    "two_phase_switch": two_phase_switch_field,
}
