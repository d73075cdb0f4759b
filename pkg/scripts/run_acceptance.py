#!/usr/bin/env python3
"""Run the reference coupled scenario and print the conservation checks."""

import os
import sys

import numpy as np

from sprayflow.config import load_config, module_rng
from sprayflow.kinetic import sample_initial
from sprayflow.run import run_scenario

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs", "acceptance.ini")


def main():
    cfg = load_config(sys.argv[1] if len(sys.argv) > 1 else CONFIG)
    result = run_scenario(cfg)
    p0 = sample_initial(
        cfg.grid, cfg.kinetic.preset, cfg.kinetic.n_particles,
        mass=cfg.kinetic.mass, vmax=cfg.kinetic.vmax,
        temperature=cfg.kinetic.temperature,
        seed=module_rng(cfg.seed, "kinetic"),
    )
    p = result.particles
    last = result.ledger.last
    mass_drift = abs(p.mass - p0.mass) / p0.mass
    growth_err = abs(p.fval.max() / p0.fval.max() / np.exp(2.0 * last.t) - 1.0)
    defect = max(r.antisymmetry_defect for r in result.ledger.rows)
    print(f"steps: {len(result.ledger.rows)}, final t = {last.t:g}")
    print(f"mass drift:              {mass_drift:.3e}")
    print(f"sup-growth relative err: {growth_err:.3e}")
    print(f"max drag antisymmetry:   {defect:.3e}")
    print(f"accumulated residual:    {last.residual_cum:.3e}")
    print(f"E_fluid = {last.E_fluid:.6e}, E_kin = {last.E_kin:.6e}")
    print(f"ledger: {result.ledger_path}")


if __name__ == "__main__":
    main()
