import math
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainavoid import lattice
from chainavoid.errors import ParameterError
from chainavoid.hypergraph import ambient_hypergraph, forbidden_chains, recompute_codegrees
from chainavoid.patterns import (
    ForbiddenFamily,
    augment_with_all_chains,
    four_color_example,
    monochromatic_chain,
    random_sparse_family,
)
from chainavoid.supersat import (
    audit_blocked_extensions,
    bound_constant_Q,
    build_balanced,
    chain_stats,
    check_average_witness,
    check_top_bound,
    check_pointwise,
    constants,
    count_embeddings,
    support_decomposition,
    y_x,
)
from chainavoid.templates import Template, omega
from strategies import families, templates


@given(st.lists(st.integers(1, 3), max_size=4), st.lists(st.integers(0, 7), max_size=6))
def test_count_embeddings_brute_force(pattern, sets):
    want = sum(
        all(sets[i] >> (c - 1) & 1 for i, c in zip(idx, pattern))
        for idx in combinations(range(len(sets)), len(pattern))
    )
    assert count_embeddings(pattern, sets) == want


def test_constants_examples():
    K = constants(monochromatic_chain(2))
    assert K.C1 == pytest.approx(1 / (2 * math.log(2)), abs=1e-12)
    K = constants(four_color_example())
    assert K.C1 == pytest.approx(math.log(2) / (2 * math.log(5) * math.log(6)), abs=1e-12)
    assert K.C3 == pytest.approx(math.log(5))


def test_Q_needs_augmented_family():
    with pytest.raises(ParameterError):
        bound_constant_Q(four_color_example(), 4)
    assert bound_constant_Q(monochromatic_chain(2), 4) == 1


def test_support_decomposition_matches_chain_average():
    rng = np.random.default_rng(3)
    G = ForbiddenFamily(2, ((1, 1), (2, 2), (2, 1)))
    for _ in range(5):
        T = Template(4, tuple(int(s) for s in rng.integers(0, 4, size=16)))
        s = chain_stats(T, G)
        ex, ey = support_decomposition(T, G)
        assert s.x_mean == pytest.approx(ex, abs=1e-9)
        assert s.y_mean == pytest.approx(ey, abs=1e-9)


def test_chain_mean_of_X_is_omega_over_binomials():
    T = Template.full(4, 2, (1, 3))
    s = chain_stats(T, ForbiddenFamily(2, ((1, 1), (2, 2))))
    want = 3 * math.log(3)  # every chain meets ranks 1, 2 and 3 once
    assert s.x_mean == pytest.approx(want, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(families(max_m=2).filter(lambda G: all(any(set(p) == {c} for p in G.patterns) for c in range(1, G.m + 1))), st.data())
def test_pointwise_inequality(G, data):
    T = data.draw(templates(4, G.m))
    worst, bad, count = check_pointwise(T, G)
    assert count == 24 and not bad


def test_average_witness_witness_exists():
    G = monochromatic_chain(2)
    T = Template.full(4, 1, (1, 2))
    K = constants(G)
    alpha = 0.4
    assert omega(T, (1,)) >= (K.omega_crit + alpha) * 6
    rep = check_average_witness(T, G, None, alpha)
    assert rep.ok and rep.witness is not None
    assert rep.witness_value >= K.C1 * alpha


def test_average_witness_rejects_light_template():
    with pytest.raises(ParameterError):
        check_average_witness(Template.full(4, 1, (2, 2)), monochromatic_chain(2), None, 0.4)


@pytest.mark.parametrize("G", [monochromatic_chain(2), monochromatic_chain(3), ForbiddenFamily(2, ((1, 1), (2, 2)))])
def test_top_bound_full_template(G):
    A = augment_with_all_chains(G)
    n = 4
    T = Template.full(n, G.m)
    Q = bound_constant_Q(A, n)
    for x in range(1 << n):
        for i in range(1, min(A.k, x.bit_count() + 1) + 1):
            for cols in product(range(1, G.m + 1), repeat=i):
                assert check_top_bound(T, A, x, cols, Q=Q).ok


def test_sampled_estimates_track_exact():
    G = ForbiddenFamily(2, ((1, 1), (2, 2), (2, 1)))
    T = Template.full(5, 2, (1, 4))
    exact = y_x(T, G, 0b11111)
    est = y_x(T, G, 0b11111, samples=4000, rng=lattice.make_rng(9))
    assert abs(est.mean - exact.mean) <= 4 * est.stderr


def test_balanced_caps_hold_under_recount():
    rng = np.random.default_rng(17)
    for _ in range(5):
        G = random_sparse_family(rng, int(rng.integers(1, 3)), max_len=2)
        A = augment_with_all_chains(G)
        T = Template.full(6, G.m, (2, 4))
        delta = float(rng.uniform(0.15, 0.6))
        res = build_balanced(T, A, delta)
        audit = recompute_codegrees(res.H.all_edges())
        assert audit == res.codegrees
        for (ell, j), d in audit.items():
            assert d <= (delta * 6) ** (ell - j) + 1e-9


def test_balanced_success_on_middle_layers():
    A = augment_with_all_chains(monochromatic_chain(2))
    res = build_balanced(Template.full(6, 1, (2, 3)), A, 0.3)
    assert res.success_ell == 2
    assert res.H.num_edges(2) >= res.targets[2]
    assert audit_blocked_extensions(res, Template.full(6, 1, (2, 3))) >= 0


def test_balanced_requires_band_when_strict():
    A = augment_with_all_chains(monochromatic_chain(2))
    with pytest.raises(ParameterError):
        build_balanced(Template.full(6, 1, (0, 6)), A, 0.3)
    build_balanced(Template.full(6, 1, (0, 6)), A, 0.3, strict=False)


def test_ambient_codegrees():
    H = ambient_hypergraph(2, four_color_example())
    assert H.num_edges() == 65
    assert H.codegree_table() == recompute_codegrees(H.all_edges())
    assert ambient_hypergraph(2, monochromatic_chain(2)).num_edges() == 5


def test_forbidden_chains_lie_in_template():
    T = Template.full(3, 2, (0, 2))
    G = ForbiddenFamily(2, ((1, 1), (2, 1)))
    for e in forbidden_chains(T, G):
        xs = [v[0] for v in e]
        assert all(lattice.is_proper_subset(a, b) for a, b in zip(xs, xs[1:]))
        assert tuple(v[1] for v in e) in G.patterns
