"""Deterministic run orchestration: config in, ledger + snapshots out."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig, module_rng
from .coupling import EnergyLedger, coupled_step
from .exponent import build_covering, validate
from .fluid import FluidOps, FluidState, VelocityField, stream_function_field
from .kinetic import ParticleEnsemble, sample_initial
from .rheology import (
    CoercivityCertificate,
    CoercivityError,
    StressLaw,
    certify_coercive,
    certify_monotone,
)
from .snapshots import (
    KIND_PARTICLES,
    KIND_SCALAR,
    KIND_U_FACE,
    KIND_V_FACE,
    Snapshot,
    particles_to_table,
    write_snapshot,
)

_MONOTONE_SAMPLES_RUN = 20_000


class CertificateFailure(RuntimeError):
    pass


@dataclass
class RunResult:
    state: FluidState
    particles: ParticleEnsemble
    ledger: EnergyLedger
    certificate: CoercivityCertificate
    ledger_path: str


def initial_velocity(cfg: ScenarioConfig) -> VelocityField:
    if cfg.fluid.initial == "rest" or cfg.fluid.amplitude == 0.0:
        return VelocityField.zeros(cfg.grid)
    if cfg.fluid.initial == "stream_bump":
        amp, lx, ly = cfg.fluid.amplitude, cfg.grid.lx, cfg.grid.ly

        def psi(x, y):
            return amp * np.sin(np.pi * x / lx) ** 2 * np.sin(np.pi * y / ly) ** 2

        return stream_function_field(cfg.grid, psi)
    raise ValueError(f"unknown initial velocity preset: {cfg.fluid.initial!r}")


def build_scene(cfg: ScenarioConfig):
    """(exponent field, stress law, fluid state, particles) for a scenario."""
    field = cfg.exponent.build(cfg.grid, cfg.t_end, d=cfg.d)
    law = StressLaw(cfg.nu0, cfg.nu1, field, cfg.theta)
    state = FluidState(initial_velocity(cfg), time=0.0)
    particles = sample_initial(
        cfg.grid,
        cfg.kinetic.preset,
        cfg.kinetic.n_particles,
        mass=cfg.kinetic.mass,
        vmax=cfg.kinetic.vmax,
        temperature=cfg.kinetic.temperature,
        seed=module_rng(cfg.seed, "kinetic"),
        d=cfg.d,
    )
    return field, law, state, particles


def certify(field, law) -> CoercivityCertificate:
    """Pre-run gate: exponent bounds, covering, monotonicity, coercivity."""
    report = validate(field)
    if not report.passed:
        raise CertificateFailure(
            f"exponent field invalid: s_min {report.s_min} < required {report.s_min_required}"
        )
    build_covering(field)
    mono = certify_monotone(law, n_samples=_MONOTONE_SAMPLES_RUN, seed=0)
    floor = -1e-13 * max(mono.scale, 1.0)
    if mono.worst < floor:
        raise CertificateFailure(f"stress law not monotone: worst {mono.worst}")
    try:
        cert = certify_coercive(law)
    except CoercivityError as exc:
        raise CertificateFailure(str(exc)) from exc
    if not cert.ok:
        raise CertificateFailure(f"coercivity margin negative: {cert.worst_margin}")
    return cert


def _write_state(outdir: str, tag: str, state: FluidState, particles: ParticleEnsemble, d: int):
    t = state.time
    write_snapshot(os.path.join(outdir, f"u_{tag}.vkf"),
                   Snapshot(KIND_U_FACE, t, state.velocity.u, d))
    write_snapshot(os.path.join(outdir, f"v_{tag}.vkf"),
                   Snapshot(KIND_V_FACE, t, state.velocity.v, d))
    if state.pressure is not None:
        write_snapshot(os.path.join(outdir, f"p_{tag}.vkf"),
                       Snapshot(KIND_SCALAR, t, state.pressure, d))
    write_snapshot(
        os.path.join(outdir, f"particles_{tag}.vkf"),
        Snapshot(KIND_PARTICLES, t,
                 particles_to_table(particles.X, particles.V, particles.w, particles.fval), d),
    )


def run_scenario(cfg: ScenarioConfig, outdir: str | None = None) -> RunResult:
    """Full deterministic run; raises CertificateFailure / BlowUp / CFLViolation."""
    outdir = outdir or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    field, law, state, particles = build_scene(cfg)
    cert = certify(field, law)
    ops = FluidOps(cfg.grid)
    ledger = EnergyLedger()
    n_steps = int(round(cfg.t_end / cfg.dt))
    try:
        for step in range(n_steps):
            state, particles, _ = coupled_step(ops, state, particles, law, cfg.dt, ledger)
            if cfg.output_every and (step + 1) % cfg.output_every == 0:
                _write_state(outdir, f"{step + 1:06d}", state, particles, cfg.d)
    finally:
        # on blow-up the last good state is still on disk for post-mortem
        _write_state(outdir, "final", state, particles, cfg.d)
        ledger_path = os.path.join(outdir, "ledger.csv")
        ledger.write_csv(ledger_path)
    return RunResult(state, particles, ledger, cert, ledger_path)


def fitted_order(dts, residuals) -> float:
    """Least-squares slope of log |residual| against log dt."""
    dts = np.asarray(dts, dtype=float)
    res = np.abs(np.asarray(residuals, dtype=float))
    if np.any(res == 0):
        return np.inf
    slope = np.polyfit(np.log(dts), np.log(res), 1)[0]
    return float(slope)
