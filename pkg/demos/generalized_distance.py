"""Generalized signed distance for an anisotropic metric.

With the identity form, h is the ordinary signed distance to the circle.
With a constant director along x and anchoring ratio r, normals parallel to
the director cost more, so level sets of h bunch up along the x axis: there
|grad h| = 1 / sqrt(1 + r s_+^2) and h is smaller than the Euclidean distance.

    python demos/generalized_distance.py
"""
import numpy as np

from ldg_phasefield.sharp import BoundaryCurve, QuadraticFormField, generalized_sdf

S_PLUS = 0.64e4 / 0.35e4


def main():
    curve = BoundaryCurve.circle()
    forms = {"identity": QuadraticFormField.identity(),
             "director x, ratio 1": QuadraticFormField.constant_director(0.0, 1.0, S_PLUS)}
    offsets = np.array([-0.03, -0.01, 0.01, 0.03])
    r0 = 0.169257
    for name, form in forms.items():
        sdf = generalized_sdf(form, curve)
        print(f"{name}: band [-{sdf.s_in:.3f}, {sdf.s_out:.3f}] in s, "
              f"Hamiltonian drift {sdf.hamiltonian_drift():.1e}")
        for label, direction in (("along x", (1.0, 0.0)), ("along y", (0.0, 1.0))):
            pts = 0.5 + np.outer(r0 + offsets, direction)
            h = sdf.evaluate(pts).h
            print(f"  {label}: distance {offsets}  h {np.round(h, 5)}")
        print()


if __name__ == "__main__":
    main()
