import numpy as np
import pytest

from flola_voronoi import (
    BudgetExhaustedError,
    ConfigError,
    Design,
    DesignSpace,
    EvaluatedPoint,
    EvaluationError,
    MonteCarloPool,
    RunState,
    SamplerConfig,
    ScoreTable,
    aggregate_scores,
    assign_owners,
    make_evaluator,
    min_distance,
    propose,
    propose_next,
    rank,
    run,
    step,
)
from flola_voronoi.persistence import state_from_dict, state_to_dict

from test_design import make_design

UNIT_1D = DesignSpace(0, 1)


class TestAggregateScores:
    def test_symmetric_case(self):
        h = aggregate_scores([0.25] * 4, [2.0] * 4)
        np.testing.assert_allclose(h, [0.5] * 4, rtol=1e-15)

    def test_zero_exploitation_falls_back_to_exploration(self):
        v = np.array([0.4, 0.6])
        np.testing.assert_array_equal(aggregate_scores(v, [0.0, 0.0]), v)
        np.testing.assert_array_equal(aggregate_scores(v, [1e-13, 1e-13]), v)

    def test_direct_arithmetic(self):
        h = aggregate_scores([0.5, 0.3, 0.2], [1.0, 3.0, 0.0])
        np.testing.assert_allclose(h, [0.75, 1.05, 0.2], rtol=1e-15)

    def test_validation(self):
        with pytest.raises(ConfigError):
            aggregate_scores([0.5, 0.5], [1.0])
        with pytest.raises(ConfigError):
            aggregate_scores([0.5, 0.5], [1.0, -1.0])
        with pytest.raises(ConfigError):
            aggregate_scores([0.5, 0.7], [1.0, 1.0])


class TestRank:
    def test_sorts_by_h_descending(self):
        assert rank([0.2, 0.9, 0.5], [0.0, 0.0, 0.0]).tolist() == [1, 2, 0]

    def test_ties_break_by_v(self):
        assert rank([1.0, 1.0, 1.0], [0.1, 0.6, 0.3]).tolist() == [1, 2, 0]

    def test_full_ties_break_by_index(self):
        assert rank([1.0, 1.0, 1.0], [0.2, 0.2, 0.2]).tolist() == [0, 1, 2]


def owned_pool(points, design):
    pool = MonteCarloPool(points=np.atleast_2d(points), seed=0)
    return assign_owners(pool, design)


class TestProposeNext:
    def test_maximin_within_top_cell(self):
        design = make_design(UNIT_1D, [[0.0], [1.0]])
        pool = owned_pool(np.array([[0.1], [0.3], [0.45]]), design)
        table = ScoreTable(1, v=np.array([0.5, 0.5]), e=np.zeros(2),
                           h=np.array([1.0, 0.0]))
        candidate = propose_next(design, pool, table)
        assert candidate.ravel() == pytest.approx(0.45)

    def test_empty_top_cell_falls_back(self):
        design = make_design(UNIT_1D, [[0.0], [1.0]])
        pool = owned_pool(np.array([[0.8]]), design)  # owned by point 1
        table = ScoreTable(1, v=np.array([0.5, 0.5]), e=np.zeros(2),
                           h=np.array([1.0, 0.0]))
        assert propose_next(design, pool, table).ravel() == pytest.approx(0.8)

    def test_single_point_design_global_maximin(self):
        design = make_design(UNIT_1D, [[0.2]])
        pool = owned_pool(np.array([[0.1], [0.5], [0.9]]), design)
        table = ScoreTable(1, v=np.array([1.0]), e=np.zeros(1), h=np.array([1.0]))
        assert propose_next(design, pool, table).ravel() == pytest.approx(0.9)

    def test_requires_ownership_and_nonempty_pool(self):
        design = make_design(UNIT_1D, [[0.0], [1.0]])
        table = ScoreTable(1, v=np.array([0.5, 0.5]), e=np.zeros(2),
                           h=np.array([1.0, 0.0]))
        with pytest.raises(ConfigError):
            propose_next(design, MonteCarloPool(np.array([[0.5]]), 0), table)

    def test_maximin_contract(self):
        # The winner's distance to the design dominates its whole cell.
        rng = np.random.default_rng(4)
        space = DesignSpace((0, 0), (1, 1))
        design = make_design(space, rng.random((6, 2)))
        pool = owned_pool(rng.random((500, 2)), design)
        v = np.bincount(pool.owner, minlength=6) / 500
        table = ScoreTable(1, v=v, e=np.zeros(6), h=v)
        candidate = propose_next(design, pool, table)
        top = rank(table.h, table.v)[0]
        cand_dist = min_distance(space.denormalize(candidate), design)
        for member in np.flatnonzero(pool.owner == top):
            assert cand_dist >= min_distance(
                space.denormalize(pool.points[member]), design
            ) - 1e-12


def linear_config(budget=12, seed=3, **kw):
    ev = make_evaluator("linear", 0.0, seed=0, dim=2)
    return ev, SamplerConfig(space=ev.space, budget=budget, master_seed=seed, **kw)


class TestStepAndRun:
    def test_budget_exhausted(self):
        ev, config = linear_config(budget=5)
        result = run(config, ev)
        with pytest.raises(BudgetExhaustedError):
            step(result.state, ev)

    def test_budget_equals_initial_size(self):
        ev, config = linear_config(budget=5)  # corners_center in d=2
        result = run(config, ev)
        assert len(result.design) == 5
        assert result.tables == ()
        assert np.all(result.design.iterations == 0)

    def test_budget_smaller_than_initial_rejected(self):
        ev, config = linear_config(budget=3)
        with pytest.raises(ConfigError):
            run(config, ev)

    def test_evaluator_call_count_equals_budget(self):
        ev, config = linear_config(budget=14)
        result = run(config, ev)
        assert ev.calls == 14 == len(result.design)

    def test_evaluator_failure_preserves_state_and_point(self):
        ev, config = linear_config(budget=8)
        state = RunState.fresh(config)

        calls = []

        def flaky(coords):
            calls.append(np.array(coords))
            if len(calls) == 3:
                raise RuntimeError("simulator crashed")
            return float(np.sum(coords))

        state, _ = step(state, flaky)
        state, _ = step(state, flaky)
        with pytest.raises(EvaluationError) as err:
            step(state, flaky)
        assert len(state.design) == 2  # untouched snapshot
        np.testing.assert_allclose(err.value.point, calls[2])
        retried, _ = step(state, lambda c: float(np.sum(c)))
        np.testing.assert_allclose(retried.design.x[-1], calls[2])

    def test_non_finite_response_rejected(self):
        ev, config = linear_config(budget=8)
        state = RunState.fresh(config)
        with pytest.raises(EvaluationError):
            step(state, lambda c: float("nan"))

    def test_deterministic_reruns(self):
        ev1, config = linear_config(budget=15, seed=21)
        res1 = run(config, ev1)
        ev2 = make_evaluator("linear", 0.0, seed=0, dim=2)
        res2 = run(config, ev2)
        assert np.array_equal(res1.design.x, res2.design.x)
        assert np.array_equal(res1.design.y, res2.design.y)

    def test_linear_function_runs_pure_exploration(self):
        # Affine responses zero out exploitation, so the hybrid run must
        # equal an exploration-only run with the same seed, point for point.
        ev, config = linear_config(budget=18, seed=5)
        hybrid = run(config, ev)
        ev2 = make_evaluator("linear", 0.0, seed=0, dim=2)
        pure = run(SamplerConfig(space=ev2.space, budget=18, master_seed=5,
                                 exploration_only=True), ev2)
        assert np.array_equal(hybrid.design.x, pure.design.x)
        for table in hybrid.tables:
            np.testing.assert_array_equal(table.h, table.v)

    def test_iteration_tags(self):
        ev, config = linear_config(budget=9)
        result = run(config, ev)
        assert result.design.iterations.tolist() == [0] * 5 + [1, 2, 3, 4]
        assert [t.iteration for t in result.tables] == [1, 2, 3, 4]

    def test_score_tables_are_consistent(self):
        ev = make_evaluator("peaks", 0.0, seed=0)
        config = SamplerConfig(space=ev.space, budget=12, master_seed=77)
        result = run(config, ev)
        for k, table in enumerate(result.tables):
            n = 5 + k
            assert len(table.v) == len(table.e) == len(table.h) == n
            assert table.v.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(table.e >= 0)

    def test_latin_hypercube_initial_phase(self):
        space = DesignSpace((0,) * 5, (1,) * 5)
        ev = make_evaluator("linear", 0.0, seed=0, dim=5)
        config = SamplerConfig(space=space, budget=27, master_seed=2)
        result = run(config, ev)  # auto scheme: LHS of 25 in d=5
        assert (result.design.iterations == 0).sum() == 25
        assert len(result.design) == 27


class TestReplay:
    def test_state_roundtrip_resumes_identically(self):
        ev, config = linear_config(budget=16, seed=13)
        full = run(config, ev)

        ev2 = make_evaluator("linear", 0.0, seed=0, dim=2)
        state = RunState.fresh(config)
        for _ in range(9):
            state, _ = step(state, ev2)
        state = state_from_dict(state_to_dict(state))
        while len(state.design) < config.budget:
            state, _ = step(state, ev2)
        assert np.array_equal(state.design.x, full.design.x)
        assert np.array_equal(state.design.y, full.design.y)


class TestAffineRankingInvariance:
    def test_transformed_responses_keep_ranking_and_proposal(self):
        ev = make_evaluator("peaks", 0.0, seed=0)
        config = SamplerConfig(space=ev.space, budget=24, master_seed=31)
        result = run(config, ev)
        for n in (6, 12, 20):
            prefix = Design(config.space, result.design.points[:n])
            transformed = Design(config.space, tuple(
                EvaluatedPoint(p.coords, 3.0 * p.response + 7.0, p.iteration)
                for p in prefix.points))
            base_coords, base_table = propose(RunState(config, prefix))
            new_coords, new_table = propose(RunState(config, transformed))
            assert np.array_equal(
                rank(base_table.h, base_table.v),
                rank(new_table.h, new_table.v),
            )
            assert np.array_equal(base_coords, new_coords)
            np.testing.assert_allclose(new_table.h, base_table.h, atol=1e-9)
