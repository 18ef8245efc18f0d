import numpy as np
import pytest
from hypothesis import given, strategies as st

from momsparse.conic import (ProgramBuilder, SolverOptions, export_sdpa, lp_solve, parse_sdpa,
                             solve, verify_certificate)
from momsparse.cprank import cp_program
from momsparse.instances import EX1, EX3

from kkt import check_certificate, check_optimal
from lp_oracle import vertex_min


def one_by_one(rhs):
    pb = ProgramBuilder()
    k = pb.add_block("X", 1)
    pb.add_equality({(k, 0, 0): 1.0}, rhs)
    pb.set_objective({(k, 0, 0): 1.0})
    return pb.build()


def random_sdp(rng, dims, m, nonneg=0):
    """Feasible and bounded: b = A(X0) with X0 interior, C = A^T y0 + S0 with S0 interior."""
    pb = ProgramBuilder()
    blks = [pb.add_block(f"B{k}", d) for k, d in enumerate(dims)]
    lps = [pb.add_nonneg() for _ in range(nonneg)]
    X0 = []
    for d in dims:
        G = rng.standard_normal((d, d))
        X0.append(G @ G.T + 0.5 * np.eye(d))
    x0 = rng.uniform(0.5, 2.0, nonneg)
    y0 = rng.standard_normal(m)
    C = [np.zeros((d, d)) for d in dims]
    c = np.zeros(nonneg)
    for r in range(m):
        expr, rhs = {}, 0.0
        for k, d in zip(blks, dims):
            A = rng.standard_normal((d, d))
            A = A + A.T
            for i in range(d):
                for j in range(i, d):
                    expr[(k, i, j)] = A[i, j] if i == j else 2 * A[i, j]
            rhs += float(np.sum(A * X0[k]))
            C[k] += y0[r] * A
        a = rng.standard_normal(nonneg)
        for q, v in zip(lps, a):
            expr[(pb.NONNEG, q, q)] = v
        rhs += float(a @ x0)
        c += y0[r] * a
        pb.add_equality(expr, rhs)
    obj = {}
    for k, d in zip(blks, dims):
        G = rng.standard_normal((d, d))
        S = C[k] + G @ G.T + 0.5 * np.eye(d)
        for i in range(d):
            for j in range(i, d):
                obj[(k, i, j)] = S[i, j] if i == j else 2 * S[i, j]
    for q in lps:
        obj[(pb.NONNEG, q, q)] = c[q] + rng.uniform(0.5, 2.0)
    pb.set_objective(obj)
    return pb.build()


def test_trivial_optimal():
    sol = solve(one_by_one(1.0))
    assert sol.status == "Optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-8)


def test_trivial_infeasible_certificate():
    p = one_by_one(-1.0)
    sol = solve(p)
    assert sol.status == "PrimalInfeasible"
    y = sol.certificate / abs(sol.certificate[0])
    assert y[0] == pytest.approx(-1.0)
    assert verify_certificate(p, sol.certificate, 1e-8)
    check_certificate(p, sol.certificate)


def test_dual_infeasible():
    pb = ProgramBuilder()
    k = pb.add_block("X", 2)
    pb.add_equality({(k, 0, 0): 1.0}, 1.0)
    pb.set_objective({(k, 0, 1): 1.0})          # X_12 can go to minus infinity
    assert solve(pb.build()).status == "DualInfeasible"


def test_unknown_on_iteration_cap():
    p = random_sdp(np.random.default_rng(0), [4], 5)
    assert solve(p, SolverOptions(max_iters=2)).status == "Unknown"


def test_c5_cover_lp():
    A = np.zeros((5, 5))
    for e in range(5):
        A[e, e] = 1.0
    sol = lp_solve(np.ones(5), A, np.ones(5))
    assert sol.status == "Optimal" and sol.value == pytest.approx(5.0, abs=1e-7)


def test_lp_trivial_examples():
    assert lp_solve([1.0], [[1.0]], [1.0]).value == pytest.approx(1.0, abs=1e-7)
    # K_3 covered by its single triangle
    assert lp_solve([1.0], [[1.0], [1.0], [1.0]], [1, 1, 1]).value == pytest.approx(1.0, abs=1e-7)
    assert lp_solve([1.0], [[1.0]], [2.0], sense="le", maximize=True).value == pytest.approx(2.0)


@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_lp_matches_vertex_oracle(n, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-2, 4, size=(m, n)).astype(float)
    b = rng.integers(-1, 4, size=m).astype(float)
    c = rng.integers(0, 4, size=n).astype(float) + 0.5
    want = vertex_min(c, A, b)
    sol = lp_solve(c, A, b)
    if np.isinf(want):
        assert sol.status == "PrimalInfeasible"
    else:
        assert sol.status == "Optimal"
        assert sol.value == pytest.approx(want, abs=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_random_sdp_against_clarabel(seed):
    cvx_oracle = pytest.importorskip("cvx_oracle")
    rng = np.random.default_rng(seed)
    p = random_sdp(rng, [3, 2, 4][: 1 + seed % 3], 4 + seed, nonneg=seed % 3)
    sol = solve(p)
    assert sol.status == "Optimal"
    check_optimal(p, sol)
    prob, _, _ = cvx_oracle.to_cvxpy(p)
    ref = prob.solve(solver="CLARABEL", tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    assert sol.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_solve_is_deterministic():
    p = random_sdp(np.random.default_rng(7), [3, 3], 6, nonneg=2)
    a, b = solve(p), solve(p)
    assert a.objective == b.objective and a.iterations == b.iterations
    assert all(np.array_equal(x, y) for x, y in zip(a.primal, b.primal))


@pytest.mark.parametrize("seed", range(3))
def test_row_scaling_keeps_status_and_value(seed):
    p = random_sdp(np.random.default_rng(100 + seed), [3], 4, nonneg=1)
    q = parse_sdpa(export_sdpa(p))
    keep = q.mat > 0
    q.val = np.where(keep, 10 * q.val, q.val)
    q.b = 10 * q.b
    a, b = solve(p), solve(q)
    assert a.status == b.status == "Optimal"
    tol = 10 * 1e-8 * (1 + abs(a.objective))
    assert -b.objective == pytest.approx(a.objective, abs=max(tol, 1e-7))


def test_nt_and_hkm_agree():
    p = random_sdp(np.random.default_rng(3), [4, 2], 7)
    a = solve(p, SolverOptions(scaling="nt"))
    b = solve(p, SolverOptions(scaling="hkm"))
    assert a.objective == pytest.approx(b.objective, abs=1e-6)


def test_options_from_env(monkeypatch):
    monkeypatch.setenv("MS_TOL_GAP", "1e-5")
    monkeypatch.setenv("MS_MAX_ITERS", "17")
    o = SolverOptions.from_env(tol_feas=1e-4)
    assert (o.tol_gap, o.tol_feas, o.max_iters) == (1e-5, 1e-4, 17)


# -- SDPA -------------------------------------------------------------------

def test_sdpa_trivial_file():
    assert export_sdpa(one_by_one(1.0)) == "1\n1\n1\n1\n0 1 1 1 -1\n1 1 1 1 1\n"


@pytest.mark.parametrize("seed", range(4))
def test_sdpa_round_trip(seed):
    p = random_sdp(np.random.default_rng(seed), [3, 1, 2], 5, nonneg=seed)
    text = export_sdpa(p)
    q = parse_sdpa(text)
    assert p.same_as(q)
    assert export_sdpa(q) == text
    assert solve(q).objective == pytest.approx(-solve(p).objective, abs=1e-7)


def test_sdpa_relaxation_export():
    prog, _, _ = cp_program(np.array(EX1, float), 1, "dense")
    head = export_sdpa(prog).splitlines()
    assert 6 in [int(s) for s in head[2].split()]
    assert parse_sdpa("\n".join(head) + "\n").same_as(prog)


def test_sdpa_ex3_dense_level_two():
    # 13 choose 2 = 78 monomials before pruning; the 11 products x_i x_j on
    # nonedges vanish on the support, which leaves 67
    prog, _, _ = cp_program(np.array(EX3, float), 2, "dense")
    text = export_sdpa(prog)
    sizes = [int(s) for s in text.splitlines()[2].split()]
    assert sizes[0] == 67                      # the moment matrix comes first
    assert parse_sdpa(text).same_as(prog)


def test_sdpa_parser_tolerates_punctuation():
    text = '"comment\n1 =m\n1\n{1}\n(1.0)\n0 1 1 1 -1\n1 1 1 1 1\n'
    assert parse_sdpa(text).same_as(one_by_one(1.0))
