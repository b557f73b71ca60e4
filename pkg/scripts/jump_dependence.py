"""Deviation of the momentum-coordinate commutator from its edge-jump form as the jump moves.

The limit is entrywise, not uniform: for fixed k - l the deviation shrinks
as c approaches L/2, while the worst entry over a large window stays near
2 hbar until c reaches L/2. Both numbers are printed.
"""
import argparse
import sys

import numpy as np

from ringmeas.appendix import commutator_pq, jump_dependence, limiting_commutator, sawtooth_matrix
from ringmeas.model import ApparatusSpec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=20)
    ap.add_argument("--L", type=float, default=2 * np.pi)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args(argv)
    app = ApparatusSpec(m=0, w0=[1.0], K=args.K, L=args.L)
    cs = np.linspace(args.L / 2 / args.points, args.L / 2, args.points)
    limit = limiting_commutator(app)
    K = app.K
    print("c,c_over_half_L,max_deviation,nearest_neighbour_deviation")
    for c, row in zip(cs, jump_dependence(app, cs)):
        C = commutator_pq(sawtooth_matrix(app, c), app)
        nn = abs(C[K + 1, K] - limit[K + 1, K])
        print(f"{row['c']:.6f},{row['c'] / (args.L / 2):.4f},{row['max_deviation']:.6e},{nn:.6e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
