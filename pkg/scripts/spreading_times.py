"""Spreading times tau_n for homogeneous KPP, isotropic and A = diag(1, 4).

    python scripts/spreading_times.py --alpha 0.4 --delta 0.05
"""
import argparse
import math

from frontspeed.core import PeriodicMedium, directions_on_circle
from frontspeed.nonlinearity import make_kpp
from frontspeed.validate import uniform_spreading_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.4)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--directions", type=int, default=8)
    args = ap.parse_args()
    dirs = directions_on_circle(args.directions)
    cases = [("isotropic", None, 4.0, 0.25, 60.0), ("diag(1, 4)", [[1.0, 0.0], [0.0, 4.0]], 8.0,
                                                     0.5, 120.0)]
    for name, A, L, h, T in cases:
        med = PeriodicMedium.homogeneous(2, A, L, 16)
        a22 = 1.0 if A is None else A[1][1]
        refs = [2.0 * math.sqrt(math.cos(d.angle) ** 2 + a22 * math.sin(d.angle) ** 2)
                for d in dirs]
        rep = uniform_spreading_check(med, make_kpp(1.0, med.cell), dirs, refs, args.alpha,
                                      args.delta, t_end=T, h=h)
        print(f"{name}: ratio {rep.ratio}")
        for ang, ref, tau in zip(rep.angles, rep.references, rep.taus):
            print(f"  angle {ang:.4f}  c_ref {ref:.4f}  tau {tau}")


if __name__ == "__main__":
    main()
