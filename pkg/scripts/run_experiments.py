"""Run one or more experiment configs and print a table of per-config means.

    python scripts/run_experiments.py configs/desk_full.yaml configs/desk_multi.yaml --jobs 4
"""
import argparse

from fairbandits.config import load_config
from fairbandits.harness import run

COLUMNS = ("cumulative_regret", "regret_growth_ratio", "fairness_loss", "s1_count", "valid_mistakes_total", "width_sum")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seeds", type=lambda s: [int(x) for x in s.split(",")], help="override seeds, e.g. 0,1,2")
    ap.add_argument("--T", type=int, help="override the horizon")
    args = ap.parse_args()

    print(f"{'config':<28}" + "".join(f"{c:>22}" for c in COLUMNS))
    for path in args.configs:
        cfg = load_config(path)
        if args.seeds:
            cfg.seeds = args.seeds
        if args.T:
            cfg.T = args.T
        mean = run(cfg, jobs=args.jobs)["mean"]
        cells = "".join(f"{'-' if mean[c] is None else format(mean[c], '.4g'):>22}" for c in COLUMNS)
        print(f"{path.rsplit('/', 1)[-1]:<28}{cells}")


if __name__ == "__main__":
    main()
