"""Relax a nematic droplet at the three corners of the (lambda, omega_a) plane.

Small droplets with weak anchoring keep a single +1 defect in the middle
(radial).  Raising the anchoring strength splits it into two +1/2 defects
pushed towards the interface (polar), and large droplets with strong
anchoring stretch into a spindle (tactoid).

    python demos/droplet_states.py --n 128
"""
import argparse
import time

from ldg_phasefield import Grid2D, MaterialConstants, ModelParams, SolverConfig, init_state, minimize
from ldg_phasefield.analysis import summarize

CORNERS = [(0.8e-6, 1e7), (2e-6, 9e7), (7.5e-6, 3e8)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=96, help="grid nodes per side")
    ap.add_argument("--max-iter", type=int, default=40000)
    args = ap.parse_args()

    solver = SolverConfig(max_iter=args.max_iter, tol=1e-3, method="lbfgs")
    for lam, oa in CORNERS:
        par = ModelParams.from_physical(MaterialConstants.mbba(), lam, omega_a_over_L=oa)
        t = time.perf_counter()
        state, rep = minimize(init_state("disc_tanh", par, Grid2D(args.n)), solver, par)
        s = summarize(state.P, state.phi, par)
        charges = [d["charge"] for d in s["defects"]]
        print(f"lambda={lam:.1e} m  omega_a/L={oa:.0e} 1/m  ->  {s['label']:8s} "
              f"defects={charges} aspect={s['aspect_ratio']:.3f} "
              f"E={s['energy']['total']:.4f} ({rep.stop_reason}, {time.perf_counter() - t:.0f}s)")


if __name__ == "__main__":
    main()
