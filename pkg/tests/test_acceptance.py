"""Acceptance suite: one pass/fail line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import sys
import time
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from chainavoid import lattice
from chainavoid.cli import COMMANDS, run as cli_run
from chainavoid.containers import branching_run, verify_coverage, COVERAGE_EXHAUSTIVE_CAP
from chainavoid.critical import omega_crit
from chainavoid.enumeration import (
    count_contained_valid,
    expected_valid_count,
    mu_contained_enumerated,
    mu_valid,
)
from chainavoid.errors import NotSparseError
from chainavoid.hypergraph import recompute_codegrees
from chainavoid.patterns import (
    ForbiddenFamily,
    augment_with_all_chains,
    big_L,
    cset,
    four_color_example,
    is_violating_chain,
    monochromatic_chain,
    random_sparse_family,
    sparsity_report,
)
from chainavoid.supersat import bound_constant_Q, build_balanced, check_top_bound, check_pointwise
from chainavoid.templates import (
    Template,
    best_anchor,
    layered_template,
    mu_contained_closed_form,
    template_is_valid,
)

RESULTS: dict[int, tuple[bool, str]] = {}
ACCEPTANCE_FAMILIES = [monochromatic_chain(k) for k in range(2, 7)] + [four_color_example()]


def record(num, ok, detail):
    RESULTS[num] = (bool(ok), detail)
    return ok


def crit_1():
    t = time.perf_counter()
    errs = [abs(omega_crit(monochromatic_chain(k)).omega_crit - (k - 1) * math.log(2)) for k in range(2, 7)]
    dt = time.perf_counter() - t
    ok = max(errs) <= 1e-12 and dt < 1
    return record(1, ok, f"max |omega_crit - (k-1) log 2| = {max(errs):.3g}, k=2..6, {dt:.3f}s")


def crit_2():
    t = time.perf_counter()
    r = omega_crit(four_color_example())
    dt = time.perf_counter() - t
    want = {(cset(3, 4), cset(1)), (cset(4), cset(1, 2))}
    err = abs(r.omega_crit - math.log(6))
    ok = err <= 1e-12 and set(r.optimal_profiles) == want and len(r.optimal_profiles) == 2 and dt < 1
    return record(2, ok, f"omega_crit err {err:.3g}, profiles {r.format_profiles()}, {dt:.3f}s")


def crit_3():
    G = ForbiddenFamily(2, ((1, 2),))
    sparse = sparsity_report(G).is_sparse
    try:
        omega_crit(G)
        msg = None
    except NotSparseError as exc:
        msg = str(exc)
    ok = not sparse and msg is not None and "not sparse" in msg
    return record(3, ok, f"sparse={sparse}, error={msg!r}")


def crit_4():
    G = monochromatic_chain(2)
    counts = []
    t4 = None
    for n in range(5):
        t = time.perf_counter()
        counts.append(mu_valid(n, G).mu)
        t4 = time.perf_counter() - t
    ok = counts == [2, 3, 6, 20, 168] and all(type(c) is int for c in counts) and t4 < 10
    return record(4, ok, f"counts {counts}, n=4 in {t4:.3f}s")


def _random_valid_template(rng):
    while True:
        m = int(rng.integers(1, 4))
        n = int(rng.integers(0, 4))
        G = random_sparse_family(rng, m)
        T = Template(n, tuple(int(s) for s in rng.integers(0, 1 << m, size=1 << n)))
        if template_is_valid(T, G):
            return G, T


def crit_5():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        G, T = _random_valid_template(rng)
        beta = tuple(float(2 - b) for b in rng.uniform(0, 2, size=G.m))  # (0, 2]
        closed = mu_contained_closed_form(T, beta)
        for got in (mu_contained_enumerated(T, beta), count_contained_valid(T, G, beta)):
            worst = max(worst, abs(got - closed) / closed)
    return record(5, worst <= 1e-9, f"50 templates, max relative error {worst:.3g}")


def _extremal_lower_bound(G, n):
    beta = (1,) * G.m
    r = omega_crit(G)
    best = 0
    for prof in r.optimal_profiles:
        prof = prof[: n + 1]
        anchor, _ = best_anchor(prof, n, beta)
        T = layered_template(prof, n, anchor)
        assert template_is_valid(T, G)
        best = max(best, mu_contained_closed_form(T, beta))
    return best


def crit_6():
    rows = []
    ok = True
    for G in ACCEPTANCE_FAMILIES:
        for n in (2, 3, 4):
            mu = mu_valid(n, G).mu
            lb = _extremal_lower_bound(G, n)
            ok &= mu >= lb
            rows.append(mu - lb)
    return record(6, ok, f"{len(rows)} (family, n) pairs, min mu - layered = {min(rows)}")


def crit_7():
    r = expected_valid_count(2, monochromatic_chain(2), (Fraction(1, 2),), samples=10**5, rng=lattice.make_rng(7))
    z = abs(r.mc_mean - float(r.exact)) / r.mc_stderr
    return record(7, r.within(3), f"exact {r.exact}, MC {r.mc_mean:.6f} +- {r.mc_stderr:.6f} ({z:.2f} sigma)")


def _brute_L(G, limit):
    """Smallest length at which every color sequence violates, searching lengths <= limit."""
    for length in range(1, limit + 1):
        if all(is_violating_chain(list(s), G) for s in product(range(1, G.m + 1), repeat=length)):
            return length
    return None


def crit_8():
    rows = []
    ok = True
    for G, want in [(monochromatic_chain(k), k) for k in range(2, 7)] + [(four_color_example(), 3)]:
        L = big_L(G)
        ok &= L == want and _brute_L(G, L + 1) == L
        rows.append(L)
    return record(8, ok, f"L = {rows}")


def crit_9():
    rng = np.random.default_rng(9)
    n = 5
    pointwise_bad = bound_bad = chains = 0
    worst_pw = worst_slack = -math.inf
    for _ in range(20):
        G = random_sparse_family(rng, int(rng.integers(1, 3)), max_len=3)
        T = Template(n, tuple(int(s) for s in rng.integers(0, 1 << G.m, size=1 << n)))
        worst, bad, count = check_pointwise(T, G)
        pointwise_bad += len(bad)
        worst_pw = max(worst_pw, worst - omega_crit(G).omega_crit)
        A = augment_with_all_chains(G)
        Q = bound_constant_Q(A, n)
        for x in range(1 << n):
            for i in range(1, min(A.k, x.bit_count() + 1) + 1):
                for cols in product(range(1, G.m + 1), repeat=i):
                    rep = check_top_bound(T, A, x, cols, Q=Q)
                    bound_bad += len(rep.violations)
                    chains += rep.chains_checked
                    worst_slack = max(worst_slack, rep.max_slack)
    ok = pointwise_bad == 0 and bound_bad == 0
    return record(
        9, ok,
        f"20 templates at n=5: max X-C3Y-omega_crit {worst_pw:.4g}, {pointwise_bad} pointwise "
        f"and {bound_bad} bound counterexamples over {chains} chain checks (max slack {worst_slack:g})",
    )


def crit_10():
    rng = np.random.default_rng(10)
    n = 6
    violations = edges = 0
    for _ in range(20):
        G = random_sparse_family(rng, int(rng.integers(1, 3)), max_len=2)
        A = augment_with_all_chains(G)
        sets = [int(s) if 2 <= x.bit_count() <= 4 else 0 for x, s in enumerate(rng.integers(0, 1 << G.m, size=1 << n))]
        T = Template(n, tuple(sets))
        delta = float(rng.uniform(0.1, 0.7))
        res = build_balanced(T, A, delta)
        edges += res.H.num_edges()
        for (ell, j), d in recompute_codegrees(res.H.all_edges()).items():
            violations += d > (delta * n) ** (ell - j) + 1e-9
    return record(10, violations == 0, f"20 runs at n=6, {edges} edges, {violations} cap violations")


def crit_11():
    rng = np.random.default_rng(11)
    fams = [monochromatic_chain(2), random_sparse_family(rng, 2)]
    ok = True
    parts = []
    for G in fams:
        t = time.perf_counter()
        run = branching_run(3, G)
        dt = time.perf_counter() - t
        exhaustive = (G.m + 1) ** 8 <= COVERAGE_EXHAUSTIVE_CAP
        covered = verify_coverage(run.containers, 3, G)
        mu = mu_valid(3, G).mu
        ok &= exhaustive and covered and run.union_bound >= mu and dt < 60
        parts.append(f"{list(G.patterns)}: {run.total} containers, union {run.union_bound} >= {mu}, coverage {covered}, {dt:.2f}s")
    return record(11, ok, "; ".join(parts))


def crit_12(tmp: Path):
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"m": 2, "patterns": [[1, 1], [2, 2], [2, 1]], "p": ["1/4", "1/2"], "seed": 12, "n": 3, "samples": 200}))
    extra = {"balanced": ["--n", "6"], "sample": ["--sample"], "expect": ["--n", "2"]}
    differ = []
    for cmd in COMMANDS:
        if cmd == "verify":
            continue
        reports = []
        for tag in "ab":
            out = tmp / f"{cmd}-{tag}.json"
            code = cli_run([cmd, "--config", str(cfg), "--out", str(out), *extra.get(cmd, [])], stdout=_Null())
            if code != 0:
                differ.append(f"{cmd} exit {code}")
            reports.append(out.read_bytes() if out.exists() else b"")
        if reports[0] != reports[1]:
            differ.append(cmd)
    verified = []
    for tag in "ab":
        out = tmp / f"verify-{tag}.json"
        cli_run(["verify", "--config", str(tmp / "containers-a.json"), "--out", str(out)], stdout=_Null())
        verified.append(out.read_bytes() if out.exists() else b"")
    if verified[0] != verified[1] or not verified[0]:
        differ.append("verify")
    return record(12, not differ, f"{len(COMMANDS)} commands rerun; differing: {differ or 'none'}")


class _Null:
    def write(self, s):
        return len(s)

    def flush(self):
        pass


CRITERIA = [crit_1, crit_2, crit_3, crit_4, crit_5, crit_6, crit_7, crit_8, crit_9, crit_10, crit_11]


@pytest.mark.parametrize("check", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(check):
    assert check(), RESULTS.get(int(check.__name__.split("_")[1]))


def test_crit_12(tmp_path):
    assert crit_12(tmp_path), RESULTS.get(12)


def summary_lines():
    return [f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {detail}" for num, (ok, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    import tempfile

    for check in CRITERIA:
        check()
    with tempfile.TemporaryDirectory() as d:
        crit_12(Path(d))
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
