"""Compare CSP, CCACSP and SACSP under calibration-to-online transfer over several seeds."""
import argparse

import numpy as np

from sacsp.algorithms import SacspConfig
from sacsp.evaluation import SplitPlan, run_transfer, wilcoxon_signed_rank
from sacsp.preprocess import bandpass_epochs
from sacsp.synth import default_spec, generate

ALGOS = ("csp", "ccacsp", "sacsp")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--repeats", type=int, default=10)
    args = ap.parse_args()
    means = {a: [] for a in ALGOS}
    for seed in range(args.seeds):
        spec = default_spec(seed=seed)
        calib, online = bandpass_epochs(generate(spec)[0]), bandpass_epochs(generate(spec.online(136))[0])
        plan = SplitPlan(n_repeats=args.repeats, seed=seed)
        row = {a: run_transfer(calib, online, a, SacspConfig(), plan) for a in ALGOS}
        for a in ALGOS:
            means[a].append(row[a].mean)
        print(f"seed {seed:3d}  " + "  ".join(row[a].summary() for a in ALGOS))
    print()
    for a in ALGOS:
        print(f"{a:7s} mean {np.mean(means[a]):.3f}  std {np.std(means[a]):.3f}")
    if args.seeds >= 5:
        for base in ("csp", "ccacsp"):
            stat, p = wilcoxon_signed_rank(means["sacsp"], means[base])
            print(f"sacsp vs {base}: W={stat:g}, p={p:.4g}")


if __name__ == "__main__":
    main()
