"""Monte-Carlo phase average: RMS error against the exact average versus sample count.

The error should fall like c / sqrt(n); the fitted log-log slope and the
constant c are printed after the table.
"""
import argparse
import math
import sys

import numpy as np

from ringmeas.decoherence import chi_average_exact, chi_average_mc, rms_block_error
from ringmeas.dynamics import kick
from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec


def system():
    obj = ObjectSpec.from_basis([0.0, 1.0, 2.0, 3.0], [0, 1, 3, 7])
    app = ApparatusSpec.uniform(1, 22)
    rho = np.full((4, 4), 0.25, dtype=complex)
    return obj, app, CouplingSpec.from_shift(obj, app), rho


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256, 1024, 4096, 16384])
    args = ap.parse_args(argv)
    obj, app, cpl, rho = system()
    exact = chi_average_exact(kick(rho, obj, app, cpl))
    print("n,rms_error,error_times_sqrt_n")
    errs = []
    for n in args.sizes:
        sq = [rms_block_error(chi_average_mc(rho, obj, app, cpl.gamma, n, s), exact) ** 2
              for s in range(args.seeds)]
        err = math.sqrt(float(np.mean(sq)))
        errs.append(err)
        print(f"{n},{err:.6e},{err * math.sqrt(n):.6f}")
    slope, intercept = np.polyfit(np.log(args.sizes), np.log(errs), 1)
    print(f"# fitted slope {slope:.4f} (expect -0.5), c = {math.exp(intercept):.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
