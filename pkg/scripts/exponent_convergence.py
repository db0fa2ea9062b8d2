"""log(mu_valid)/C(n, n/2) against omega_crit as n grows."""

import argparse
import math
import time
from dataclasses import dataclass

from chainavoid import four_color_example, monochromatic_chain, mu_valid, omega_crit
from chainavoid.lattice import middle_binomial


@dataclass
class Config:
    max_n: int = 5
    node_cap: int = 2 * 10**8


FAMILIES = {
    "2-chain": monochromatic_chain(2),
    "3-chain": monochromatic_chain(3),
    "four-color": four_color_example(),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=Config.max_n)
    cfg = Config(max_n=ap.parse_args().max_n)
    print(f"{'family':<12}{'n':>3}{'mu':>14}{'log mu/C':>12}{'omega_crit':>12}{'secs':>8}")
    for name, G in FAMILIES.items():
        wc = omega_crit(G).omega_crit
        for n in range(1, cfg.max_n + 1):
            if name == "four-color" and n > 4:
                break
            t = time.perf_counter()
            mu = mu_valid(n, G, node_cap=cfg.node_cap).mu
            ratio = math.log(mu) / middle_binomial(n)
            print(f"{name:<12}{n:>3}{mu:>14}{ratio:>12.6f}{wc:>12.6f}{time.perf_counter() - t:>8.2f}")


if __name__ == "__main__":
    main()
