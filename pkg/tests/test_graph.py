from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from momsparse import graph as gr
from momsparse.instances import EX1, EX4, edm

from lp_oracle import vertex_min


def brute_cliques(G):
    cl = [frozenset(s) for k in range(1, G.n + 1) for s in combinations(range(G.n), k)
          if G.is_clique(s)]
    # isolated vertices count as cliques only if maximal
    return sorted(tuple(sorted(c)) for c in cl if not any(c < d for d in cl) and len(c) > 1)


def brute_bicliques(B):
    U, W = range(B.m), range(B.m, B.m + B.n)
    out = []
    subsets = lambda S: [set(s) for k in range(1, len(S) + 1) for s in combinations(S, k)]
    cands = [(a, b) for a in subsets(U) for b in subsets(W)
             if all((i, j) in B.edges for i in a for j in b)]
    for a, b in cands:
        if not any(a <= a2 and b <= b2 and (a, b) != (a2, b2) for a2, b2 in cands):
            out.append(tuple(sorted(a | b)))
    return sorted(out)


def rip(cliques):
    sets = [set(c) for c in cliques]
    for k in range(1, len(sets)):
        inter = sets[k] & set().union(*sets[:k])
        if not any(inter <= sets[i] for i in range(k)):
            return False
    return True


graphs = st.integers(2, 8).flatmap(
    lambda n: st.builds(lambda es: gr.Graph(n, es),
                        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                 .filter(lambda e: e[0] != e[1]), max_size=20)))


def test_support_graph_of_ex1_is_five_cycle():
    G = gr.support_graph(np.array(EX1, float))
    assert G.edges == {(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)}


def test_support_graph_trivial_cases():
    assert not gr.support_graph(np.eye(3)).edges
    assert len(gr.support_graph(np.ones((4, 4))).edges) == 6


def test_support_graph_rejects_asymmetric():
    with pytest.raises(ValueError):
        gr.support_graph(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_maximal_cliques_examples():
    C5 = gr.support_graph(np.array(EX1, float))
    assert len(gr.maximal_cliques(C5)) == 5
    assert len(gr.maximal_cliques(gr.support_graph(np.array(EX4, float)))) == 64
    K5 = gr.Graph(5, combinations(range(5), 2))
    assert gr.maximal_cliques(K5) == [(0, 1, 2, 3, 4)]


@given(graphs)
def test_maximal_cliques_match_brute_force(G):
    cl = gr.maximal_cliques(G)
    assert sorted(c for c in cl if len(c) > 1) == brute_cliques(G)
    for i, j in G.edges:
        assert any(i in c and j in c for c in cl)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_crown_graph_bicliques(n):
    B = gr.bipartite_support(edm(n))
    bc = gr.maximal_bicliques(B)
    assert len(bc) == 2 ** n - 2
    assert all(len(c) == n for c in bc)
    assert sorted(bc) == brute_bicliques(B)


def test_biclique_trivial_cases():
    assert gr.maximal_bicliques(gr.bipartite_support(np.ones((2, 3)))) == [(0, 1, 2, 3, 4)]
    assert gr.maximal_bicliques(gr.BipartiteGraph(1, 1, [(0, 1)])) == [(0, 1)]


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_bicliques_match_brute_force(m, n, data):
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                                    min_size=m, max_size=m)), float)
    B = gr.bipartite_support(M)
    assert sorted(gr.maximal_bicliques(B)) == brute_bicliques(B)


def test_frac_cover_examples():
    # complete bipartite K_{3,3}: cliques are its edges
    K33 = [(i, j) for i in range(3) for j in range(3, 6)]
    assert gr.frac_cover(K33, K33)[0] == pytest.approx(9, abs=1e-7)
    assert gr.frac_cover([(0, 1, 2)], [(0, 1), (1, 2), (0, 2)])[0] == pytest.approx(1, abs=1e-7)
    C5 = [(i, (i + 1) % 5) for i in range(5)]
    assert gr.frac_cover(C5, C5)[0] == pytest.approx(5, abs=1e-7)


def test_frac_cover_crown_frozen():
    # values from scipy's HiGHS on the biclique covering LP
    for n, want in [(3, 3.0), (4, 3.0), (5, 10 / 3)]:
        B = gr.bipartite_support(edm(n))
        assert gr.frac_cover(gr.maximal_bicliques(B), B.edges)[0] == pytest.approx(want, abs=1e-7)


def test_frac_cover_uncovered_edge():
    with pytest.raises(ValueError):
        gr.frac_cover([(0, 1)], [(1, 2)])


@given(graphs)
def test_frac_cover_matches_vertex_oracle(G):
    cl = gr.maximal_cliques(G)
    cl = [c for c in cl if len(c) > 1]
    if not G.edges or len(cl) > 8:
        return
    edges = sorted(G.edges)
    A = [[1.0 if (i in c and j in c) else 0.0 for c in cl] for i, j in edges]
    val, w = gr.frac_cover(cl, edges)
    assert val == pytest.approx(vertex_min(np.ones(len(cl)), A, np.ones(len(edges))), abs=1e-7)
    assert val <= len(gr.greedy_edge_clique_cover(G, cl)) + 1e-9
    if all(len(c) == 2 for c in cl):                   # triangle-free
        assert val == pytest.approx(len(edges), abs=1e-7)


def test_greedy_cover_examples():
    K4 = gr.Graph(4, combinations(range(4), 2))
    assert gr.greedy_edge_clique_cover(K4, gr.maximal_cliques(K4)) == [(0, 1, 2, 3)]
    C5 = gr.Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    assert len(gr.greedy_edge_clique_cover(C5, gr.maximal_cliques(C5))) == 5
    B = gr.bipartite_support(np.ones((2, 2)))
    G = gr.Graph(B.size, B.edges)
    assert gr.greedy_edge_clique_cover(G, gr.maximal_bicliques(B)) == [(0, 1, 2, 3)]


def test_greedy_ties_prefer_lowest_index():
    G = gr.Graph(3, [(0, 1), (1, 2)])
    assert gr.greedy_edge_clique_cover(G, [(1, 2), (0, 1)]) == [(1, 2), (0, 1)]


def test_chordal_extension_examples():
    tree = gr.Graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    H, _ = gr.chordal_extension(tree)
    assert H.edges == tree.edges
    K4 = gr.Graph(4, combinations(range(4), 2))
    assert gr.chordal_extension(K4)[0].edges == K4.edges
    H, cl = gr.chordal_extension(gr.Graph(5, [(i, (i + 1) % 5) for i in range(5)]))
    assert len(H.edges) == 7 and len(cl) <= 3 and all(len(c) == 3 for c in cl)
    H, cl = gr.chordal_extension(gr.Graph(4, [(i, (i + 1) % 4) for i in range(4)]))
    assert len(H.edges) == 5 and len(cl) == 2 and rip(cl)


@given(graphs)
def test_chordal_extension_properties(G):
    H, cl = gr.chordal_extension(G)
    assert G.edges <= H.edges
    assert gr.is_chordal(H)
    order, fill = gr.min_fill_order(H)
    assert not fill and gr.is_perfect_elimination_order(H, order)
    assert rip(cl) and gr.satisfies_rip(cl)
    assert len(cl) <= G.n
