import numpy as np
import pytest

from momsparse import graph as gr
from momsparse.instances import builtin, edm, identity, nested_rectangles
from momsparse.nnrank import nn_bound, nn_combinatorial, nn_instance, nn_spec

from corpus import corpus

SMALL = corpus()[:10]


def test_spec_one_by_one():
    spec = nn_spec([[1.0]])
    assert spec.n == 2
    assert spec.equalities == [({(1, 1): 1.0}, 1.0)]


def test_spec_identity_support():
    spec = nn_spec(np.eye(4))
    assert len(spec.nonedges) == 12
    inst = nn_instance(np.eye(4))
    assert len(inst.bigraph.edges) == 4


def test_spec_nested_rectangles_support():
    # every row of S(1, 1) has two zero entries
    inst = nn_instance(nested_rectangles(1, 1))
    assert len(inst.bigraph.edges) == 8
    assert len(nn_spec(nested_rectangles(1, 1)).nonedges) == 8


def test_instance_validation():
    with pytest.raises(ValueError):
        nn_instance([[1.0, -1.0]])
    with pytest.raises(ValueError):
        nn_instance(np.zeros((2, 2)))


def test_bound_examples():
    assert nn_bound(edm(4), 1, "dense", "dagger").value == pytest.approx(2.0, abs=0.02)
    assert nn_bound(edm(5), 1, "isp", "dagger").value == pytest.approx(3.35, abs=0.02)
    assert nn_bound(identity(6), 1, "isp").value == pytest.approx(6, abs=1e-4)
    assert nn_bound(identity(6), 1, "dense").value <= 8 * 4 / 6 + 1e-4


def test_weak_mode_rejected():
    with pytest.raises(ValueError):
        nn_bound(np.eye(2), 1, "wisp")


def test_combinatorial_examples():
    c = nn_combinatorial(edm(4))
    assert c["rank"] == 3 and c["bc_greedy"] >= c["bc_frac"] - 1e-9
    assert c["bc_frac"] == pytest.approx(3.0, abs=1e-7)     # HiGHS on the covering LP
    assert nn_combinatorial(identity(5))["bc_frac"] == pytest.approx(5, abs=1e-7)
    assert nn_combinatorial(np.ones((3, 4)))["bc_frac"] == pytest.approx(1, abs=1e-7)


@pytest.mark.parametrize("n", range(3, 8))
def test_edm_support_is_crown(n):
    B = gr.bipartite_support(edm(n))
    assert B.edges == {(i, n + j) for i in range(n) for j in range(n) if i != j}
    assert len(gr.maximal_bicliques(B)) == 2 ** n - 2


@pytest.mark.parametrize("rc", SMALL, ids=lambda rc: f"s{rc.config.seed}")
def test_orderings_and_lower_bound(rc):
    M = rc.A
    val = {}
    for md in ("dense", "isp"):
        for s in ("plain", "dagger", "ddagger"):
            r = nn_bound(M, 1, md, s)
            assert r.status == "Optimal"
            val[md, s] = r.value
    for s in ("plain", "dagger", "ddagger"):
        assert val["dense", s] <= val["isp", s] + 1e-6
    for md in ("dense", "isp"):
        assert val[md, "plain"] <= val[md, "dagger"] + 1e-6 <= val[md, "ddagger"] + 2e-6
    assert val["isp", "plain"] >= nn_combinatorial(M)["bc_frac"] - 1e-6


@pytest.mark.parametrize("M", [edm(4), nested_rectangles(0.3, 0.8),
                               np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]])],
                         ids=["edm4", "S", "rect"])
def test_transpose_invariance(M):
    for md in ("dense", "isp"):
        a = nn_bound(M, 1, md, "dagger").value
        b = nn_bound(M.T, 1, md, "dagger").value
        assert a == pytest.approx(b, abs=1e-6)


def test_rectangular_input_moments():
    M = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]])
    res = nn_bound(M, 1, "isp")
    assert res.status == "Optimal"
    # L(x_i x_{m+j}) sums to M over the bicliques
    total = np.zeros_like(M)
    for pm in res.pseudo_moments:
        for i in range(2):
            for j in range(3):
                if i in pm.clique and 2 + j in pm.clique:
                    e = [0] * 5
                    e[i] = e[2 + j] = 1
                    total[i, j] += pm[tuple(e)]
    assert np.allclose(total, M, atol=1e-6)
