"""How often the accumulated width gap D^T crosses sqrt(2 T log(1/delta)) across seeds."""
import argparse

import numpy as np

from fairbandits.config import preset
from fairbandits.harness import run_single


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--algorithm", default="full", choices=["full", "full_multi"])
    args = ap.parse_args()

    cfg = preset("desk_scale", algorithm=args.algorithm, T=args.T, delta=args.delta)
    terminal = []
    for seed in range(args.seeds):
        s = run_single(cfg, seed).summary
        terminal.append(s["martingale_terminal"])
        threshold = s["martingale_threshold"]
    terminal = np.array(terminal)
    print(f"threshold {threshold:.2f}; D^T mean {terminal.mean():.3f}, sd {terminal.std():.3f}, "
          f"max |D^T| {np.abs(terminal).max():.3f}")
    print(f"exceedance frequency {np.mean(terminal >= threshold):.3f} over {args.seeds} seeds (delta {args.delta})")


if __name__ == "__main__":
    main()
