import itertools
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from congest_spanners.congest import SimConfig
from congest_spanners.graph import (
    Graph, GraphError, PairSet, bfs, distance_matrix, gen_gnp, normalize_edge,
)
from congest_spanners.spanners import (
    AlgoConfig, ClusterState, InputKindError, build_spanner, clustering_phase,
    parallel_bfs_phase, path_buying_4p, path_buying_pairwise, path_buying_sourcewise,
    prefix_suffix_buying, select_bfs_roots, select_set_A,
)
from congest_spanners.spanners.build import TAGS
from congest_spanners.spanners.params import Params, clamp01, compute_ell, compute_h, resolve
from congest_spanners.verify import verify_stretch

from .helpers import complete, connected_graphs, cycle, path


def params(n, **kw):
    base = dict(n=n, c=3.0, h=2.0, center_prob=1.0, root_prob=1.0, threshold=math.inf,
                ell=0.0, a_prob=1.0, seed=0, sim=SimConfig())
    base.update(kw)
    base["sim"] = SimConfig(seed=base["seed"])
    return Params(**base)


def path_edges(tree, v):
    p = tree.path_to(v)
    return {normalize_edge(a, b) for a, b in zip(p, p[1:])}


def canonical_path(g, u, v):
    """Nodes of the BFS-tree path rooted at the smaller endpoint, from the smaller end."""
    lo, hi = min(u, v), max(u, v)
    return bfs(g, lo).path_to(hi)


# ---------------------------------------------------------------- parameters

def test_h_formulas():
    ln = math.log(1000)
    assert compute_h("2S", 1000, sources=10) == pytest.approx((1000 * 10) ** 0.25 * ln ** 0.75)
    assert compute_h("4AP", 1000) == pytest.approx(1000 ** 0.4 * ln ** 0.8)
    assert compute_h("2P", 1000, pairs=64) == pytest.approx(4 * ln ** (2 / 3))
    assert compute_h("4P", 1000, pairs=128) == pytest.approx(128 ** (2 / 7) * ln ** (6 / 7))
    assert compute_h("8AP", 1000) == pytest.approx(1000 ** (4 / 11) * ln ** (10 / 11))
    h = compute_h("4P", 1000, pairs=128)
    assert compute_ell(1000, h) == pytest.approx(1000 * ln ** 3 / h ** 2.5)


def test_probabilities_are_clamped():
    cfg = AlgoConfig("2S")
    for h in (0.0, 0.5, 3.0, 40.0, 1e6):
        p = resolve(cfg, 300, h, SimConfig(), with_ell=True)
        for q in (p.center_prob, p.root_prob, p.a_prob):
            assert 0.0 <= q <= 1.0
    assert clamp01(float("nan")) == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        AlgoConfig("3S")
    with pytest.raises(ValueError):
        AlgoConfig("2s", c=0)
    assert AlgoConfig("sub4").algorithm == "SUB4"


def test_ell_edges_is_ceiling_capped():
    assert params(10, ell=2.1).ell_edges == 3
    assert params(10, ell=50.0).ell_edges == 9
    assert params(10, ell=math.inf).ell_edges == 9


# ---------------------------------------------------------------- clustering

def check_cluster_invariants(g, cs):
    for v, c in cs.membership.items():
        assert c in cs.centers
        assert v == c or g.has_edge(v, c)
    for c in cs.centers:
        assert cs.membership[c] == c
    for v in cs.unclustered:
        for u in g.neighbors(v):
            assert normalize_edge(u, v) in cs.unclustered_edges
    for v, c in cs.membership.items():
        if v != c:
            assert normalize_edge(v, c) in cs.cluster_edges
            # joins the smallest adjacent center
            assert c == min(u for u in g.neighbors(v) if u in cs.centers)
        elif c == v:
            assert v in cs.centers


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=25), st.floats(0, 1), st.integers(0, 100))
def test_clustering_invariants(g, prob, seed):
    cs, stats = clustering_phase(g, params(g.node_count, center_prob=prob, seed=seed))
    check_cluster_invariants(g, cs)
    assert stats.rounds <= 3


def test_clustering_all_centers():
    g = gen_gnp(30, 0.2, 1)
    cs, _ = clustering_phase(g, params(30, center_prob=1.0))
    assert cs.centers == frozenset(range(30))
    assert all(cs.membership[v] == v for v in range(30))
    assert cs.edges == set()


def test_clustering_no_centers_adds_everything():
    g = gen_gnp(30, 0.2, 1)
    cs, _ = clustering_phase(g, params(30, center_prob=0.0))
    assert not cs.centers and not cs.membership
    assert cs.unclustered_edges == g.edge_set()


def test_clustering_star_with_only_hub_center():
    star = Graph(6, [(0, i) for i in range(1, 6)])
    # find a seed where exactly the hub flips heads
    from congest_spanners.spanners.phases import local_coin
    from congest_spanners.spanners.params import STREAM_CENTERS
    seed = next(s for s in range(1000)
                if [local_coin(s, STREAM_CENTERS, v, 0.3) for v in range(6)] == [True] + [False] * 5)
    cs, _ = clustering_phase(star, params(6, center_prob=0.3, seed=seed))
    assert cs.centers == {0}
    assert cs.cluster_edges == star.edge_set()
    assert cs.members(0) == list(range(6))


def test_select_roots_and_A():
    cs = ClusterState(5, frozenset({1, 3}), {1: 1, 3: 3, 0: 1})
    assert select_bfs_roots(cs, params(5, root_prob=1.0)) == {1, 3}
    assert select_bfs_roots(cs, params(5, root_prob=0.0)) == set()
    empty = ClusterState(5, frozenset(), {})
    assert select_bfs_roots(empty, params(5)) == set()
    assert select_set_A(empty, params(5)) == set()
    # ell <= 16 c ln n clamps the A probability to 1
    p = resolve(AlgoConfig("4P", ell=10.0), 300, 5.0, SimConfig(), with_ell=True)
    assert p.a_prob == 1.0
    assert select_set_A(cs, p) == {1, 3}


# ---------------------------------------------------------------- parallel BFS

@settings(max_examples=30, deadline=None)
@given(connected_graphs(max_n=25), st.data())
def test_parallel_bfs_matches_oracle(g, data):
    roots = data.draw(st.sets(st.integers(0, g.node_count - 1), min_size=1, max_size=6))
    ref = data.draw(st.sets(st.sampled_from(sorted(g.edge_set())) if g.edge_count else st.nothing()))
    trees, stats = parallel_bfs_phase(g, roots, ref, params(g.node_count))
    oracle = distance_matrix(g)
    for r, t in trees.items():
        assert t.dist == [int(x) for x in oracle[r]]
        for v in range(g.node_count):
            if v != r:
                assert g.has_edge(v, t.parent[v]) and t.dist[t.parent[v]] == t.dist[v] - 1
            # missing count along this node's tree path
            assert t.missing_count[v] == len(path_edges(t, v) - ref)


def test_parallel_bfs_single_root_equals_sequential():
    g = gen_gnp(60, 0.08, 3)
    trees, _ = parallel_bfs_phase(g, [7], None, params(60))
    seq = bfs(g, 7)
    assert trees[7].dist == seq.dist
    assert trees[7].parent[:7] + trees[7].parent[8:] == seq.parent[:7] + seq.parent[8:]


def test_parallel_bfs_four_cycle_all_roots():
    g = cycle(4)
    trees, stats = parallel_bfs_phase(g, range(4), None, params(4))
    oracle = distance_matrix(g)
    assert all(trees[r].dist == list(oracle[r]) for r in range(4))
    assert stats.rounds <= 8 * (4 + 2)


def test_parallel_bfs_empty_reference_counts_every_edge():
    g = gen_gnp(40, 0.1, 2)
    trees, _ = parallel_bfs_phase(g, [0, 5], set(), params(40))
    for t in trees.values():
        assert t.missing_count == t.dist


# ---------------------------------------------------------------- path buying

def test_sourcewise_six_cycle():
    g = cycle(6)
    cs = ClusterState(6, frozenset({3}), {3: 3})
    bought, _ = path_buying_sourcewise(g, {0}, cs, set(), params(6, threshold=3))
    assert bought == {(0, 1), (1, 2), (2, 3)}


def test_sourcewise_threshold_zero_buys_nothing_new():
    g = cycle(6)
    cs = ClusterState(6, frozenset({3}), {3: 3, 2: 3, 4: 3})
    bought, _ = path_buying_sourcewise(g, {0}, cs, set(), params(6, threshold=0))
    assert bought == set()


def test_sourcewise_full_spanner_adds_nothing():
    g = gen_gnp(40, 0.1, 5)
    cs, _ = clustering_phase(g, params(40, center_prob=0.3, seed=1))
    current = g.edge_set()
    bought, _ = path_buying_sourcewise(g, {0, 4, 9}, cs, current, params(40))
    assert bought <= current


def test_sourcewise_picks_nearest_member_by_oracle():
    g = gen_gnp(50, 0.08, 8)
    cs, _ = clustering_phase(g, params(50, center_prob=0.15, seed=2))
    sources = {0, 10, 20}
    bought, _ = path_buying_sourcewise(g, sources, cs, set(), params(50, threshold=math.inf))
    expected = set()
    for s in sources:
        t = bfs(g, s)
        for members in cs.clusters().values():
            best = min(members, key=lambda m: (t.dist[m], m))
            expected |= path_edges(t, best)
    assert bought == expected


def test_pairwise_examples():
    g = path(5)
    p = params(5, threshold=2)
    assert path_buying_pairwise(g, PairSet([]), set(), p)[0] == set()
    # exactly at the threshold is bought
    assert path_buying_pairwise(g, PairSet([(0, 2)]), set(), p)[0] == {(0, 1), (1, 2)}
    assert path_buying_pairwise(g, PairSet([(0, 3)]), set(), p)[0] == set()
    assert path_buying_pairwise(g, PairSet([(0, 3)]), {(1, 2)}, p)[0] >= {(0, 1), (2, 3)}
    assert path_buying_pairwise(g, PairSet([(3, 4)]), set(), params(5, threshold=1))[0] == {(3, 4)}


@settings(max_examples=30, deadline=None)
@given(connected_graphs(min_n=2, max_n=20), st.data())
def test_pairwise_single_pair_matches_oracle(g, data):
    n = g.node_count
    u, v = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    current = data.draw(st.sets(st.sampled_from(sorted(g.edge_set()))))
    thr = data.draw(st.integers(0, 5))
    nodes = canonical_path(g, u, v)
    edges = {normalize_edge(a, b) for a, b in zip(nodes, nodes[1:])}
    bought, _ = path_buying_pairwise(g, PairSet([(u, v)]), current, params(n, threshold=thr))
    if len(edges - current) <= thr:
        assert bought - current == edges - current
    else:
        assert bought == set()


def test_prefix_suffix_ten_missing_ell_three():
    g = path(11)
    bought, _ = prefix_suffix_buying(g, PairSet([(0, 10)]), set(), params(11, ell=3))
    assert bought == {(0, 1), (1, 2), (2, 3), (7, 8), (8, 9), (9, 10)}


def test_prefix_suffix_ell_zero():
    g = path(11)
    assert prefix_suffix_buying(g, PairSet([(0, 10)]), set(), params(11, ell=0))[0] == set()


def test_prefix_suffix_short_path_bought_whole():
    g = path(7)
    bought, _ = prefix_suffix_buying(g, PairSet([(0, 6)]), {(2, 3)}, params(7, ell=2.5))
    assert bought | {(2, 3)} == g.edge_set()


def prefix_suffix_oracle(g, u, v, current, k, nodes=None):
    nodes = nodes or canonical_path(g, u, v)
    missing = [normalize_edge(a, b) for a, b in zip(nodes, nodes[1:])
               if normalize_edge(a, b) not in current]
    return set(missing[:k]) | set(missing[max(0, len(missing) - k):]) if k else set()


@settings(max_examples=40, deadline=None)
@given(connected_graphs(min_n=2, max_n=20), st.data())
def test_prefix_suffix_single_pair_matches_oracle(g, data):
    n = g.node_count
    u, v = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    current = data.draw(st.sets(st.sampled_from(sorted(g.edge_set()))))
    ell = data.draw(st.floats(0, 6))
    p = params(n, ell=ell)
    bought, _ = prefix_suffix_buying(g, PairSet([(u, v)]), current, p)
    assert bought - current == prefix_suffix_oracle(g, u, v, current, p.ell_edges)


@settings(max_examples=25, deadline=None)
@given(connected_graphs(min_n=3, max_n=18), st.data())
def test_prefix_suffix_many_pairs_cover_each_pair(g, data):
    n = g.node_count
    pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                              .filter(lambda t: t[0] != t[1]), min_size=1, max_size=6))
    current = data.draw(st.sets(st.sampled_from(sorted(g.edge_set()))))
    p = params(n, ell=data.draw(st.integers(0, 4)))
    pair_set = PairSet(pairs)
    bought, _ = prefix_suffix_buying(g, pair_set, current, p)
    assert bought <= g.edge_set()
    # with several roots in flight a node may keep a different shortest-path
    # parent than the smallest-id one, so follow the tree that was actually built
    trees, _ = parallel_bfs_phase(g, pair_set.endpoints(), current, p)
    for u, v in pairs:
        lo, hi = min(u, v), max(u, v)
        nodes = trees[lo].path_to(hi)
        assert len(nodes) - 1 == bfs(g, lo).dist[hi]
        assert prefix_suffix_oracle(g, u, v, current, p.ell_edges, nodes) <= bought | current


def test_prefix_suffix_tree_path_differs_from_smallest_id_path():
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4)])
    pairs = PairSet([(0, 1), (0, 2), (3, 4)])
    p = params(5, ell=1)
    bought, _ = prefix_suffix_buying(g, pairs, set(), p)
    trees, _ = parallel_bfs_phase(g, pairs.endpoints(), set(), p)
    nodes = trees[3].path_to(4)
    assert len(nodes) == 3
    assert prefix_suffix_oracle(g, 3, 4, set(), 1, nodes) <= bought


def test_4p_six_cycle_antipodal_clusters():
    g = cycle(6)
    cs = ClusterState(6, frozenset({0, 3}), {0: 0, 1: 0, 5: 0, 2: 3, 3: 3, 4: 3})
    bought, _ = path_buying_4p(g, {0, 3}, cs, set(), params(6))
    # brute force: nearest member of the other cluster, smallest id on ties
    expected = set()
    for c1, c2 in [(0, 3), (3, 0)]:
        t = bfs(g, c1)
        best = min(cs.members(c2), key=lambda m: (t.dist[m], m))
        assert t.dist[best] == 2
        expected |= path_edges(t, best)
    assert bought == expected == {(0, 1), (1, 2), (2, 3)}


def test_4p_thresholds():
    g = cycle(6)
    cs = ClusterState(6, frozenset({0, 3}), {0: 0, 1: 0, 5: 0, 2: 3, 3: 3, 4: 3})
    assert path_buying_4p(g, {0, 3}, cs, set(), params(6, threshold=1))[0] == set()
    single = ClusterState(6, frozenset({0}), {0: 0, 1: 0, 5: 0})
    assert path_buying_4p(g, {0}, single, set(), params(6))[0] == set()


# ---------------------------------------------------------------- orchestrator

def test_2s_on_tree_is_exact():
    g = Graph(15, [((i - 1) // 2, i) for i in range(1, 15)])
    r = build_spanner(g, {0, 5, 9}, AlgoConfig("2S"))
    assert r.h_edges == g.edge_set()
    rep = verify_stretch(g, r.h_edges, "all", 1, 0)
    assert rep.ok


def test_2p_on_k4():
    g = complete(4)
    pairs = PairSet(itertools.combinations(range(4), 2))
    r = build_spanner(g, pairs, AlgoConfig("2P"))
    assert verify_stretch(g, r.h_edges, pairs, 1, 2).ok


def test_4ap_on_gnp_200_stretch():
    g = gen_gnp(200, 0.05, 1)
    r = build_spanner(g, None, AlgoConfig("4AP", c=3))
    assert verify_stretch(g, r.h_edges, "all", 1, 4).ok


@pytest.mark.xfail(strict=True, reason="about h = 32 BFS trees of 199 edges exceed the "
                   "1022 edges of this sparse graph, so every edge is kept")
def test_4ap_on_gnp_200_is_sparser():
    g = gen_gnp(200, 0.05, 1)
    r = build_spanner(g, None, AlgoConfig("4AP", c=3))
    assert len(r.h_edges) < g.edge_count


def test_4ap_sparsifies_dense_graph():
    g = gen_gnp(200, 0.5, 1)
    r = build_spanner(g, None, AlgoConfig("4AP", c=3))
    assert len(r.h_edges) < 0.7 * g.edge_count
    assert verify_stretch(g, r.h_edges, "all", 1, 4).ok


@pytest.mark.parametrize("algo", ["2S", "2P", "4P", "4AP", "8AP", "SUB2", "SUB4"])
@pytest.mark.parametrize("fallbacks", [True, False])
def test_every_algorithm_small(algo, fallbacks):
    g = gen_gnp(60, 0.1, 11)
    sources = frozenset(range(0, 60, 6))
    pairs = PairSet([(i, (7 * i + 3) % 60) for i in range(40) if i != (7 * i + 3) % 60])
    inp = {"2S": sources, "SUB2": sources, "SUB4": sources, "2P": pairs, "4P": pairs}.get(algo)
    r = build_spanner(g, inp, AlgoConfig(algo, seed=2, fallbacks=fallbacks))
    assert r.h_edges <= g.edge_set()
    assert set(r.attribution) == set(r.h_edges)
    assert set(r.attribution.values()) <= set(TAGS)
    assert sum(r.tag_counts().values()) == len(r.h_edges)
    if algo in ("2S", "SUB2", "SUB4"):
        req = [(s, v) for s in sources for v in range(60)] if algo == "2S" else \
            [p for p in itertools.combinations(sorted(sources), 2)]
    elif algo in ("2P", "4P"):
        req = pairs
    else:
        req = "all"
    assert verify_stretch(g, r.h_edges, req, 1, r.stretch).ok
    again = build_spanner(g, inp, AlgoConfig(algo, seed=2, fallbacks=fallbacks))
    assert again.h_edges == r.h_edges and again.stats.rounds == r.stats.rounds


def test_fallback_records():
    g = gen_gnp(60, 0.1, 11)
    r = build_spanner(g, frozenset(range(40)), AlgoConfig("SUB2"))
    assert r.info["fallback"] == "sourcewise" and r.stretch == 2
    r = build_spanner(g, PairSet([(0, 1), (2, 3)]), AlgoConfig("4P"))
    assert r.info["ran"] == "2P" and r.stretch == 2
    r = build_spanner(g, PairSet([]), AlgoConfig("2P"))
    assert r.h_edges == set() and r.info["fallback"] == "no_pairs"


def test_input_kind_errors():
    g = gen_gnp(20, 0.3, 1)
    with pytest.raises(InputKindError):
        build_spanner(g, PairSet([(0, 1)]), AlgoConfig("2S"))
    with pytest.raises(InputKindError):
        build_spanner(g, {0, 1}, AlgoConfig("2P"))
    with pytest.raises(InputKindError):
        build_spanner(g, {0}, AlgoConfig("4AP"))
    with pytest.raises(GraphError):
        build_spanner(g, {99}, AlgoConfig("2S"))
    with pytest.raises(GraphError):
        build_spanner(Graph(4, [(0, 1), (2, 3)]), None, AlgoConfig("4AP"))


def test_result_serialization(tmp_path):
    g = gen_gnp(40, 0.15, 1)
    r = build_spanner(g, None, AlgoConfig("4AP"))
    r.write(tmp_path / "h.txt", tmp_path / "h.json")
    lines = (tmp_path / "h.txt").read_text().splitlines()
    assert len(lines) == len(r.h_edges)
    for line in lines:
        u, v, tag = line.split()
        assert r.attribution[(int(u), int(v))] == tag
    meta = json.loads((tmp_path / "h.json").read_text())
    assert meta["algorithm"] == "4AP" and meta["edges"] == len(r.h_edges)
    assert meta["log_base"] == "e"
    assert meta["config"]["bandwidth_multiplier"] == 4
    assert sum(meta["edges_by_phase"].values()) == len(r.h_edges)
    assert meta["stats"]["rounds"] == r.stats.rounds


def test_max_message_within_bandwidth():
    g = gen_gnp(80, 0.1, 3)
    r = build_spanner(g, PairSet([(0, 9), (4, 70), (11, 33)]), AlgoConfig("4P", fallbacks=False))
    assert r.stats.max_message_bits <= r.stats.bandwidth
