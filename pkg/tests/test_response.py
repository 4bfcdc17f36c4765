import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lirgomax import oracle
from lirgomax.gmatrix import ConvergenceError, GoogleOperator, pagerank
from lirgomax.response import (PumpSpec, PumpSpecWarning, ShortBlockWarning, load_pump_spec,
                               project, pump_general_v0, pump_pair_v0, select_pathway_subset,
                               sensitivity_v0, sensitivity_values, solve_linear_response,
                               solve_perturbed_pump)
from lirgomax.synthetic import random_graph

from conftest import cycle3, random_instances

# exact solution of (1 - G0) P1 = V0 for the 3-cycle, alpha = 17/20, pump 0 -> 1:
# P1 = (1 - 0.85 C)^-1 (0, 0.85, -0.85) with C the cyclic shift
CYCLE_P1 = np.array([-289.0, 629.0, -340.0]) / 1029.0


@pytest.fixture
def setup(rng):
    g = random_graph(60, 5.0, rng)
    op = GoogleOperator(g, 0.85)
    return op, pagerank(op), oracle.dense_google(g, 0.85)


class TestProject:
    def test_kills_pagerank(self, setup):
        op, p0, _ = setup
        np.testing.assert_allclose(project(p0, p0), 0.0, atol=1e-16)

    def test_fixed_on_sum_zero(self):
        p0 = np.array([0.35, 0.65])
        x = np.array([0.3, -0.3])
        np.testing.assert_array_equal(project(x, p0), x)

    def test_two_node(self):
        np.testing.assert_allclose(project([1.0, 0.0], np.array([0.35, 0.65])), [0.65, -0.65])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            project(np.ones(3), np.ones(2) / 2)

    @settings(max_examples=40)
    @given(st.lists(st.floats(-10, 10), min_size=5, max_size=5))
    def test_idempotent(self, xs):
        p0 = np.array([0.1, 0.2, 0.3, 0.15, 0.25])
        once = project(xs, p0)
        assert abs(once.sum()) <= 1e-12
        np.testing.assert_allclose(project(once, p0), once, atol=1e-13)

    def test_commutes_with_google(self, setup):
        op, p0, _ = setup
        x = np.random.default_rng(3).standard_normal(op.n)
        np.testing.assert_allclose(project(op.apply(project(x, p0)), p0),
                                   project(op.apply(x), p0), atol=1e-13)


class TestPumpV0:
    def test_same_node_is_zero(self, setup):
        op, p0, _ = setup
        np.testing.assert_array_equal(pump_pair_v0(op, p0, 4, 4), 0.0)

    def test_cycle(self):
        op = GoogleOperator(cycle3(), 0.85)
        p0 = pagerank(op)
        np.testing.assert_allclose(pump_pair_v0(op, p0, 0, 1), [0.0, 0.85, -0.85], atol=1e-15)

    def test_column_difference(self, setup):
        op, p0, G = setup
        v0 = pump_pair_v0(op, p0, 3, 11)
        np.testing.assert_allclose(v0, G[:, 3] - G[:, 11], atol=1e-15)
        assert abs(v0.sum()) <= 1e-15

    def test_out_of_range(self, setup):
        op, p0, _ = setup
        with pytest.raises(IndexError):
            pump_pair_v0(op, p0, 0, op.n)

    def test_general_matches_pair(self, setup):
        op, p0, _ = setup
        spec = PumpSpec.balanced_pair(p0, 3, 11)
        np.testing.assert_allclose(pump_general_v0(op, p0, spec), pump_pair_v0(op, p0, 3, 11),
                                   atol=1e-15)

    def test_general_linear(self, setup):
        op, p0, _ = setup
        spec = PumpSpec({2: 3.0, 9: -1.5, 20: 0.7})
        np.testing.assert_allclose(pump_general_v0(op, p0, spec.scaled(2.5)),
                                   2.5 * pump_general_v0(op, p0, spec), atol=1e-14)

    def test_projection_before_or_after(self, setup):
        op, p0, _ = setup
        spec = PumpSpec({2: 3.0, 9: -1.5, 20: 0.7})
        dp = spec.diag_times(p0)
        np.testing.assert_allclose(op.apply(project(dp, p0)), project(op.apply(dp), p0),
                                   atol=1e-15)
        np.testing.assert_allclose(pump_general_v0(op, p0, spec), op.apply(project(dp, p0)),
                                   atol=1e-15)

    def test_single_entry_dense(self):
        rng = np.random.default_rng(10)
        g = random_graph(10, 3.0, rng)
        op = GoogleOperator(g)
        p0 = pagerank(op)
        G = oracle.dense_google(g)
        with pytest.warns(PumpSpecWarning):
            spec = PumpSpec({4: 1.0 / p0[4]})
        v0 = pump_general_v0(op, p0, spec)
        e4 = np.eye(10)[4]
        np.testing.assert_allclose(v0, G @ e4 - (G @ e4).sum() * p0, atol=1e-15)
        assert abs(v0.sum()) <= 1e-15

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            PumpSpec({})
        with pytest.raises(ValueError):
            PumpSpec({1: 0.0, 2: -1.0})

    def test_load_pump_spec(self):
        spec = load_pump_spec(io.StringIO("# pump\n3\t2.5\n7\t-1.25\n"))
        assert spec.entries == {3: 2.5, 7: -1.25}
        with pytest.raises(ValueError, match="line 1"):
            load_pump_spec(io.StringIO("3\n"))


class TestSensitivityV0:
    def test_matches_dense_g1(self, setup):
        op, p0, G = setup
        for i, j in [(0, 1), (5, 5), (17, 42), (59, 3)]:
            v0 = sensitivity_v0(op, p0, i, j)
            np.testing.assert_allclose(v0, oracle.dense_sensitivity_g1(G, i, j) @ p0, atol=1e-16)

    def test_sum_zero(self):
        for g, alpha, rng in random_instances(10, seed=5):
            op = GoogleOperator(g, alpha)
            p0 = pagerank(op)
            i, j = rng.integers(0, g.n_nodes, 2)
            assert abs(sensitivity_v0(op, p0, i, j).sum()) <= 1e-12

    def test_column_concentrated_on_target(self):
        # alpha = 1 internals: node 0 has the single out-link 0 -> 1, so G[1, 0] = 1
        op = GoogleOperator(cycle3(), 0.5)
        op.alpha = 1.0
        p0 = np.full(3, 1 / 3)
        assert op.column(0)[1] == 1.0
        np.testing.assert_array_equal(sensitivity_v0(op, p0, 1, 0), 0.0)

    def test_finite_difference(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            g = random_graph(20, 4.0, rng)
            op = GoogleOperator(g)
            G = oracle.dense_google(g)
            p0 = oracle.dense_pagerank(G)
            i, j = rng.integers(0, 20, 2)
            eps = 1e-6
            fd = (oracle.dense_perturbed_google(G, i, j, eps) @ p0 - G @ p0) / eps
            np.testing.assert_allclose(sensitivity_v0(op, p0, i, j), fd, atol=10 * eps)


class TestSolveLinearResponse:
    def test_zero_source(self, setup):
        op, p0, _ = setup
        np.testing.assert_array_equal(solve_linear_response(op, p0, np.zeros(op.n)), 0.0)

    def test_cycle(self):
        op = GoogleOperator(cycle3(), 0.85)
        p0 = pagerank(op)
        p1 = solve_linear_response(op, p0, pump_pair_v0(op, p0, 0, 1))
        np.testing.assert_allclose(p1, CYCLE_P1, atol=1e-12)
        np.testing.assert_allclose(p1, [-0.280855, 0.611273, -0.330418], atol=1e-6)

    def test_residual_and_conservation(self, setup):
        op, p0, _ = setup
        v0 = pump_pair_v0(op, p0, 0, 9)
        p1 = solve_linear_response(op, p0, v0, tol=1e-12)
        assert np.abs(p1 - op.apply(p1) - v0).sum() <= 1e-12
        assert abs(p1.sum()) <= 1e-12

    def test_oracle_n100(self):
        rng = np.random.default_rng(100)
        g = random_graph(100, 6.0, rng)
        op = GoogleOperator(g)
        p0 = pagerank(op)
        v0 = pump_pair_v0(op, p0, 1, 2)
        G = oracle.dense_google(g)
        np.testing.assert_allclose(solve_linear_response(op, p0, v0),
                                   oracle.dense_linear_response(G, p0, v0), rtol=0, atol=1e-10)

    def test_unprojected_still_converges(self, setup):
        op, p0, G = setup
        v0 = pump_pair_v0(op, p0, 0, 9)
        p1 = solve_linear_response(op, p0, v0, projected=False)
        np.testing.assert_allclose(p1, oracle.dense_linear_response(G, p0, v0), atol=1e-9)

    def test_rejects_nonzero_sum(self, setup):
        op, p0, _ = setup
        with pytest.raises(ValueError, match="zero sum"):
            solve_linear_response(op, p0, p0)

    def test_max_iter(self, setup):
        op, p0, _ = setup
        with pytest.raises(ConvergenceError):
            solve_linear_response(op, p0, pump_pair_v0(op, p0, 0, 9), max_iter=2)

    def test_converges_at_pagerank_rate(self, setup):
        op, p0, _ = setup
        history = []
        solve_linear_response(op, p0, pump_pair_v0(op, p0, 0, 9), tol=1e-13, history=history)
        h = np.array(history)
        assert np.all(h[5:] <= h[0] * 10 * 0.85 ** np.arange(5, h.size))


class TestPerturbedPump:
    def test_zero_epsilon_is_pagerank(self, setup):
        op, p0, _ = setup
        spec = PumpSpec.balanced_pair(p0, 1, 2)
        np.testing.assert_array_equal(solve_perturbed_pump(op, spec, 0.0), p0)

    def test_balanced_pair_denominator(self, setup):
        op, p0, _ = setup
        spec = PumpSpec.balanced_pair(p0, 1, 2)
        nodes, d = spec.nodes(), spec.values()
        assert abs(np.sum(d * p0[nodes])) <= 1e-15

    def test_fixed_point(self, setup):
        op, p0, _ = setup
        spec = PumpSpec.balanced_pair(p0, 1, 2)
        eps = 1e-3
        p = solve_perturbed_pump(op, spec, eps, tol=1e-14)
        f = p.copy()
        f[spec.nodes()] *= 1 + eps * spec.values()
        f /= 1 + eps * np.sum(spec.values() * p[spec.nodes()])
        np.testing.assert_allclose(op.apply(f), p, atol=1e-13)
        assert abs(p.sum() - 1) <= 1e-12

    def test_limit(self):
        rng = np.random.default_rng(50)
        for _ in range(3):
            g = random_graph(50, 5.0, rng)
            op = GoogleOperator(g)
            p0 = pagerank(op, tol=1e-15)
            i, j = rng.choice(50, 2, replace=False)
            p1 = solve_linear_response(op, p0, pump_pair_v0(op, p0, i, j))
            eps = 1e-4
            pe = solve_perturbed_pump(op, PumpSpec.balanced_pair(p0, i, j), eps, tol=1e-15)
            assert np.abs((pe - p0) / eps - p1).max() <= 100 * eps

    def test_negative_denominator(self, setup):
        op, p0, _ = setup
        with pytest.warns(PumpSpecWarning):
            spec = PumpSpec({1: -50.0, 2: -50.0})
        with pytest.raises(ValueError, match="epsilon=1.0"):
            solve_perturbed_pump(op, spec, 1.0)


class TestSensitivityValues:
    def test_zero(self):
        np.testing.assert_array_equal(sensitivity_values(np.zeros(4), np.full(4, 0.25)), 0.0)

    def test_ratio_and_weighted_sum(self, setup):
        op, p0, _ = setup
        p1 = solve_linear_response(op, p0, sensitivity_v0(op, p0, 3, 8))
        d = sensitivity_values(p1, p0)
        np.testing.assert_allclose(d * p0, p1, atol=1e-17)
        assert abs(np.sum(d * p0)) <= 1e-12


class TestPathwaySubset:
    def test_cycle(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sub = select_pathway_subset(CYCLE_P1, m=1, p0=np.full(3, 1 / 3))
        assert sub.negative.tolist() == [2]
        assert sub.positive.tolist() == [1]
        assert sub.kl.tolist() == [2, 1]
        assert sub.block_of() == ["negative", "positive"]

    def test_zero_vector(self):
        with pytest.warns(ShortBlockWarning):
            sub = select_pathway_subset(np.zeros(5), m=2)
        assert len(sub) == 0
        assert len(sub.warnings) == 2

    def test_truncated(self):
        with pytest.warns(ShortBlockWarning):
            sub = select_pathway_subset(CYCLE_P1, m=5)
        assert sub.negative.tolist() == [2, 0]
        assert sub.positive.tolist() == [1]

    def test_order_and_annotation(self):
        p1 = np.array([0.1, -0.4, 0.3, -0.05, 0.0, -0.4, 0.2])
        p0 = np.array([0.1, 0.2, 0.05, 0.3, 0.15, 0.1, 0.1])
        sub = select_pathway_subset(p1, m=2, p0=p0)
        assert sub.nodes.tolist() == [1, 5, 2, 6]
        assert sub.values.tolist() == [-0.4, -0.4, 0.3, 0.2]
        assert sub.kl.tolist() == [1, 2, 3, 4]
        # P0 order: 3, 1, 4, 0, 5, 6, 2
        assert sub.k.tolist() == [2, 5, 7, 6]
