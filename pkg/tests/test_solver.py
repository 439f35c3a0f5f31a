import numpy as np
import pytest

from oracles import connected, exhaustive_minimum, pairs
from sparselap.datagen import GroundTruthGraph, erdos_renyi_weighted, sample_covariance, sample_lggm
from sparselap.laplacian_ops import num_edges
from sparselap.metrics import edge_set_from_weights, f_score
from sparselap.objective import evaluate, gradient
from sparselap.solver import (
    CONVERGED,
    LINE_SEARCH_STALLED,
    MAX_ITERATIONS,
    SolverConfig,
    check_budget,
    gradient_mapping,
    line_search,
    solve,
    trial_point,
)


def wishart(p, n, rng):
    Y = rng.standard_normal((n, p))
    S = Y.T @ Y / n
    return 0.5 * (S + S.T)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(sigma=0), dict(beta=1.0), dict(beta=0), dict(alpha=1.0), dict(tol=0), dict(max_iter=-1), dict(m_max=0), dict(s=-1)],
    )
    def test_rejects(self, kwargs):
        base = dict(s=3)
        base.update(kwargs)
        with pytest.raises(ValueError):
            SolverConfig(**base)

    def test_budget(self):
        check_budget(3, 4)
        check_budget(6, 4)
        with pytest.raises(ValueError, match="below"):
            check_budget(2, 4)
        with pytest.raises(ValueError, match="exceeds"):
            check_budget(7, 4)
        with pytest.raises(ValueError):
            solve(np.eye(4), SolverConfig(s=2))


class TestPieces:
    def test_trial_point_respects_budget(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(trial_point(x, 1.0, [0.5, -1.0, 4.0], 2), [0.5, 3.0, 0.0])

    def test_gradient_mapping_unconstrained(self):
        x, g = np.array([1.0, 2.0]), np.array([0.1, -0.3])
        np.testing.assert_allclose(gradient_mapping(x, x - 0.5 * g, 0.5), g)

    def test_line_search_decrease(self):
        rng = np.random.default_rng(0)
        S = wishart(5, 50, rng)
        cfg = SolverConfig(s=10)
        x = np.full(10, 0.5)
        ev = evaluate(x, S)
        step = line_search(x, ev.value, gradient(x, S, ev.factor), S, cfg)
        assert step is not None
        assert step.eta == cfg.sigma * cfg.beta ** step.backtracks
        assert step.value <= ev.value - cfg.alpha * step.eta * step.mapping_norm ** 2

    def test_line_search_returns_none_when_exhausted(self):
        # all step sizes leave the PD cone: the only edge is pushed to zero
        cfg = SolverConfig(s=1, sigma=1e6, beta=0.9, m_max=3)
        x = np.array([1.0])
        S = np.array([[10.0, 0.0], [0.0, 10.0]])
        ev = evaluate(x, S)
        assert line_search(x, ev.value, gradient(x, S, ev.factor), S, cfg) is None


class TestSolve:
    @pytest.mark.parametrize("S", [np.eye(2), np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([[0.3, -0.1], [-0.1, 0.2]])])
    def test_two_by_two(self, S):
        res = solve(S, SolverConfig(s=1, tol=1e-10))
        assert res.status == CONVERGED
        assert res.x[0] == pytest.approx(1.0 / (S[0, 0] - 2 * S[0, 1] + S[1, 1]), abs=1e-6)

    def test_tree_budget_gives_spanning_tree(self):
        rng = np.random.default_rng(1)
        S = wishart(8, 80, rng)
        res = solve(S, SolverConfig(s=7))
        edges = [pairs(8)[k] for k in np.flatnonzero(res.x > 0)]
        assert len(edges) == 7 and connected(edges, 8)

    @pytest.mark.parametrize("p, s, seed", [(4, 3, 0), (4, 4, 1), (5, 4, 2), (5, 5, 3)])
    def test_matches_exhaustive_oracle(self, p, s, seed):
        rng = np.random.default_rng(seed)
        truth = np.zeros(num_edges(p))
        truth[rng.choice(num_edges(p), s, replace=False)] = rng.uniform(1, 3, s)
        truth[: p - 1] += 1.0
        samples = sample_lggm(GroundTruthGraph(truth), 10 * p, seed=seed)
        S = sample_covariance(samples)
        res = solve(S, SolverConfig(s=s, tol=1e-10))
        assert res.objective <= exhaustive_minimum(S.matrix, s) + 1e-6

    def test_descent_and_feasibility(self):
        rng = np.random.default_rng(4)
        S = wishart(7, 70, rng)
        cfg = SolverConfig(s=9)
        seen = []
        res = solve(S, cfg, callback=lambda k, x, f: seen.append((k, x.copy(), f)))
        assert seen
        for k, x, f in seen:
            assert np.count_nonzero(x) <= cfg.s and np.all(x >= 0)
            assert evaluate(x, S).is_positive_definite
        for trace in (res.objective_trace,):
            assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_converged_point_is_fixed(self):
        rng = np.random.default_rng(5)
        S = wishart(6, 60, rng)
        cfg = SolverConfig(s=7, tol=1e-8)
        res = solve(S, cfg)
        assert res.converged
        assert res.final_gradient_mapping_norm <= cfg.tol * (1 + np.linalg.norm(res.x))
        ev = evaluate(res.x, S)
        assert ev.value == pytest.approx(res.objective, abs=1e-12)

    def test_x0_projected_to_budget(self):
        rng = np.random.default_rng(6)
        S = wishart(5, 50, rng)
        res = solve(S, SolverConfig(s=5), x0=np.full(10, 0.2) + np.arange(10)[::-1] * 0.01)
        assert res.start == "x0"
        assert np.count_nonzero(res.x) <= 5

    def test_x0_infeasible(self):
        with pytest.raises(ValueError, match="infeasible"):
            solve(np.eye(4), SolverConfig(s=6), x0=np.zeros(6))
        with pytest.raises(ValueError, match="negative"):
            solve(np.eye(3), SolverConfig(s=3), x0=[-1.0, 1.0, 1.0])
        with pytest.raises(ValueError, match="shape"):
            solve(np.eye(3), SolverConfig(s=3), x0=np.ones(4))

    def test_max_iterations_status(self):
        rng = np.random.default_rng(7)
        S = wishart(6, 60, rng)
        res = solve(S, SolverConfig(s=8, max_iter=1, tol=1e-14), starts=("dense",))
        assert res.status == MAX_ITERATIONS
        assert res.iterations == 1

    def test_stalled_status(self):
        S = np.array([[10.0, 0.0], [0.0, 10.0]])
        res = solve(S, SolverConfig(s=1, sigma=1e6, beta=0.9, m_max=3), x0=[1.0])
        assert res.status == LINE_SEARCH_STALLED

    def test_unknown_start(self):
        with pytest.raises(ValueError, match="unknown"):
            solve(np.eye(3), SolverConfig(s=2), starts=("nope",))

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        S = wishart(8, 80, rng)
        a = solve(S, SolverConfig(s=10))
        b = solve(S, SolverConfig(s=10))
        assert np.array_equal(a.x, b.x) and a.objective_trace == b.objective_trace

    def test_recovers_er_graph(self):
        g = erdos_renyi_weighted(15, 0.3, seed=9)
        S = sample_covariance(sample_lggm(g, 3000, seed=10))
        res = solve(S, SolverConfig(s=g.num_edges))
        assert f_score(edge_set_from_weights(g.weights), edge_set_from_weights(res.x)) >= 0.9
