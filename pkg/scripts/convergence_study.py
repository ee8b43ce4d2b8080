"""How fast the large-N closed forms converge to the exact per-antenna sums and CRBs.

Prints, for several aperture ratios r/R, the relative error of u_theta and
c_r and the exact-vs-closed CRB gaps as the antenna count grows.

    python3 scripts/convergence_study.py [--ratios 1.1,1.5,2,30]
"""
import argparse

from nearfield_crb import (
    ArrayGeometry, TargetLocation, closed_form_sums, crb_closed, crb_exact, default_scenario, exact_sums,
)

ANTENNAS = (8, 16, 32, 64, 128, 256)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ratios", default="1.1,1.5,2,30")
    parser.add_argument("--angle", type=float, default=0.3, help="target angle, radians")
    args = parser.parse_args()
    base = default_scenario()
    # a short grid keeps the exact path cheap at every N
    base = base.with_(n_subcarriers=16, subcarrier_spacing_hz=base.grid.bandwidth_hz / 16)
    R = base.geometry.radius
    print(f"{'r/R':>6} {'N':>5} {'err u_theta':>12} {'err c_r':>12} {'gap CRB_theta':>14} {'gap CRB_r':>12}")
    for ratio in (float(x) for x in args.ratios.split(",")):
        for N in ANTENNAS:
            geom, tgt = ArrayGeometry(N, R), TargetLocation(ratio * R, args.angle)
            ex, cf = exact_sums(geom, tgt), closed_form_sums(geom, tgt)
            sc = base.with_(n_antennas=N, range=ratio * R, angle=args.angle)
            e, c = crb_exact(sc), crb_closed(sc)
            print(f"{ratio:6g} {N:5d} {abs(ex.u_theta / cf.u_theta - 1):12.2e} {abs(ex.c_r / cf.c_r - 1):12.2e} "
                  f"{abs(e.crb_theta / c.crb_theta - 1):14.2e} {abs(e.crb_r / c.crb_r - 1):12.2e}")


if __name__ == "__main__":
    main()
