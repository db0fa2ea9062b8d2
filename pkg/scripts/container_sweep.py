"""Branching container runs at n = 2, 3 on seeded random sparse families."""

import argparse
from dataclasses import dataclass

import numpy as np

from chainavoid.containers import branching_run, verify_coverage
from chainavoid.enumeration import mu_valid
from chainavoid.patterns import random_sparse_family


@dataclass
class Config:
    seed: int = 0
    families: int = 10
    max_m: int = 2
    alpha: float = 0.5


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = Config(**vars(ap.parse_args()))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.families):
        G = random_sparse_family(rng, int(rng.integers(1, cfg.max_m + 1)))
        for n in (2, 3):
            run = branching_run(n, G, alpha=cfg.alpha)
            mu = mu_valid(n, G).mu
            cov = verify_coverage(run.containers, n, G, rng=rng)
            print(
                f"{list(G.patterns)} n={n}: {run.total} containers, rounds={len(run.rounds)}, "
                f"forced={run.forced_splits}, union/mu={float(run.union_bound) / mu:.3g}, coverage={cov}"
            )


if __name__ == "__main__":
    main()
