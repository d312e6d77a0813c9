"""Recompute the frozen reference values used by the tests.

Independent oracles (phase-plane shooting, Fourier-Hill solve) come from
tests/oracles.py; the fine-grid simulation reproduces IGNITION_SPEED.

    python scripts/pin_constants.py [--skip-sim]
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import oracles  # noqa: E402
from frontspeed.core import Direction, PeriodicMedium  # noqa: E402
from frontspeed.fronts import measure_speed  # noqa: E402
from frontspeed.nonlinearity import make_ignition  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-sim", action="store_true", help="oracles only")
    args = ap.parse_args()

    print(f"ignition theta=0.3, shooting:        {oracles.ignition_speed(0.3):.7f}")
    for eps in (0.2, 0.1, 0.05, 0.025):
        print(f"KPP ignition approx eps={eps:<6}      {oracles.ignition_approx_speed(eps):.6f}")
    print(f"heterogeneous KPP c_lin (a=0.5):    {oracles.heterogeneous_kpp_clin(0.5):.7f}")
    if args.skip_sim:
        return
    med = PeriodicMedium.homogeneous(1, None, 1.0, 64)
    m = measure_speed(med, make_ignition(0.3, 1.0, med.cell), Direction((1.0,)), t_end=120,
                      h=0.05)
    print(f"ignition theta=0.3, h=0.05, T=120:  {m.speed:.5f} +- {m.uncertainty:.1e}")


if __name__ == "__main__":
    main()
