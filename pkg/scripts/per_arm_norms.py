"""Per-arm sums of ||x||_{V^-1} in multi-action runs, next to two candidate bounds.

The first bound, sqrt(2d log(1 + kT/(d lambda))), does not grow with the
number of pulls.  The second multiplies it by sqrt(N_i), the number of times
arm i was pulled, which is what Cauchy-Schwarz gives from the elliptical
potential bound on the sum of squared norms.
"""
import argparse
import math

import numpy as np

from fairbandits.config import preset
from fairbandits.harness import run_single


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--T", type=int, default=20000)
    args = ap.parse_args()

    cfg = preset("desk_scale", algorithm="full_multi", T=args.T)
    for seed in range(args.seeds):
        res = run_single(cfg, seed)
        pulls = np.zeros(cfg.k)
        for r in res.logs:
            for i in r.pulled_norms:
                pulls[i] += 1
        flat = res.summary["per_arm_norm_bound"]
        for i, total in enumerate(res.summary["per_arm_norm_sums"]):
            scaled = flat * math.sqrt(pulls[i])
            print(f"seed {seed} arm {i}: pulls {int(pulls[i]):>6}  sum {total:9.2f}  "
                  f"flat bound {flat:6.2f}  sqrt(N)-scaled bound {scaled:9.2f}")


if __name__ == "__main__":
    main()
