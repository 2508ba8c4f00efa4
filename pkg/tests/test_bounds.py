"""Tests for per-feature relevance-interval computation."""

import json

import numpy as np
import pytest

from relint.baseline import fit_l1_svm
from relint.bounds import (
    ConstraintSet,
    RelevanceIntervals,
    compute_all,
    max_rel,
    min_rel,
)
from relint.data import Dataset, SimulationSpec, simulate, standardize
from relint.errors import InfeasibleConstraints, MalformedProblem

from conftest import random_instance, random_instances, witness_points
from grid_oracle import grid_search_bounds


def _duplicated_pair_instance(seed=3, n=40):
    """Columns 0 and 1 identical and informative, column 2 pure noise."""
    rng = np.random.default_rng(seed)
    driver = rng.normal(size=n)
    y = np.where(driver + 0.3 * rng.normal(size=n) > 0, 1.0, -1.0)
    x = np.column_stack([driver, driver, rng.normal(size=n)])
    z, _ = standardize(Dataset(x, y, ("a", "b", "c")))
    model = fit_l1_svm(z, 1.0)
    assert model.mu > 0
    return z, model


def _sole_predictor_instance(seed=11, n=40):
    """Column 0 separates the labels; columns 1-2 are noise."""
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) > 0.5, 1.0, -1.0)
    x = np.column_stack(
        [y * (0.5 + rng.random(n)), rng.normal(size=n), rng.normal(size=n)]
    )
    z, _ = standardize(Dataset(x, y, ("a", "b", "c")))
    model = fit_l1_svm(z, 1.0)
    assert model.mu > 0
    return z, model


class TestGridOracleAgreement:
    def test_single_feature_analytic_case(self):
        # two separable points need w >= 1; mass budget caps |w| at 1.2
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        lower, upper, n_feasible = grid_search_bounds(x, y, budget=1.2, rho=0.0)
        assert n_feasible > 0
        assert lower[0] == pytest.approx(1.0, abs=1e-9)
        assert upper[0] == pytest.approx(1.2, abs=1e-9)

    def test_random_instances_match_grid(self):
        delta = 0.2
        for seed, (dataset, model) in random_instances(6):
            intervals = compute_all(dataset, model, delta=delta)
            budget = (1 + delta) * model.mu
            focus = witness_points(dataset, model, delta)
            grid_lower, grid_upper, n_feasible = grid_search_bounds(
                dataset.samples, dataset.labels, budget, model.rho, focus=focus
            )
            assert n_feasible > 0, f"seed {seed}: no feasible grid points"
            np.testing.assert_allclose(intervals.lower, grid_lower, atol=0.01)
            np.testing.assert_allclose(intervals.upper, grid_upper, atol=0.01)

    def test_default_delta_instances_match_grid(self):
        delta = 0.001
        for seed, (dataset, model) in random_instances(3):
            intervals = compute_all(dataset, model, delta=delta)
            budget = (1 + delta) * model.mu
            focus = witness_points(dataset, model, delta)
            grid_lower, grid_upper, n_feasible = grid_search_bounds(
                dataset.samples, dataset.labels, budget, model.rho, focus=focus
            )
            assert n_feasible > 0, f"seed {seed}: no feasible grid points"
            np.testing.assert_allclose(intervals.lower, grid_lower, atol=0.01)
            np.testing.assert_allclose(intervals.upper, grid_upper, atol=0.01)

    def test_focus_hints_cannot_inflate_grid_result(self):
        # hint points outside the feasible set must not widen the oracle's
        # answer beyond what the LP (already verified above) can achieve
        delta = 0.2
        _, (dataset, model) = random_instances(1)[0]
        intervals = compute_all(dataset, model, delta=delta)
        budget = (1 + delta) * model.mu
        bogus = [w * 1.7 for w in witness_points(dataset, model, delta)]
        grid_lower, grid_upper, _ = grid_search_bounds(
            dataset.samples, dataset.labels, budget, model.rho, focus=bogus
        )
        assert np.all(grid_upper <= intervals.upper + 1e-6)
        assert np.all(grid_lower >= intervals.lower - 1e-6)


class TestIntervalInvariants:
    def test_sandwich_and_budget(self):
        for seed, (dataset, model) in random_instances(5):
            intervals = compute_all(dataset, model)
            budget = (1 + intervals.delta) * model.mu
            assert np.all(intervals.lower >= 0)
            assert np.all(intervals.lower <= intervals.upper + 1e-9)
            assert np.all(intervals.upper <= budget + 1e-9)
            magnitude = np.abs(model.weights)
            assert np.all(magnitude >= intervals.lower - 1e-6), f"seed {seed}"
            assert np.all(magnitude <= intervals.upper + 1e-6), f"seed {seed}"

    def test_delta_monotonicity(self):
        _, (dataset, model) = random_instances(1)[0]
        deltas = (0.001, 0.01, 0.1, 0.3)
        results = [compute_all(dataset, model, delta=d) for d in deltas]
        for tight, loose in zip(results, results[1:]):
            assert np.all(loose.lower <= tight.lower + 1e-9)
            assert np.all(loose.upper >= tight.upper - 1e-9)

    def test_compute_all_matches_single_calls(self):
        _, (dataset, model) = random_instances(1)[0]
        intervals = compute_all(dataset, model)
        for j in range(dataset.n_features):
            low, _ = min_rel(dataset, model, j)
            high, _ = max_rel(dataset, model, j)
            assert intervals.lower[j] == pytest.approx(low, abs=1e-9)
            assert intervals.upper[j] == pytest.approx(min(high, (1 + intervals.delta) * model.mu), abs=1e-9)


class TestKnownStructures:
    def test_sole_predictor_has_positive_lower(self):
        dataset, model = _sole_predictor_instance()
        intervals = compute_all(dataset, model)
        # the separating column cannot be zeroed out; at the tight default
        # budget even tiny fitted noise weights resist being zeroed, so only
        # require them to stay marginal there and vanish once delta loosens
        assert intervals.lower[0] > 1.0
        assert intervals.lower[1] < 0.05 * intervals.lower[0]
        assert intervals.lower[2] < 0.05 * intervals.lower[0]
        loose = compute_all(dataset, model, delta=0.1)
        assert loose.lower[0] > 1.0
        assert loose.lower[1] == pytest.approx(0.0, abs=1e-8)
        assert loose.lower[2] == pytest.approx(0.0, abs=1e-8)

    def test_duplicated_pair_shares_bounds(self):
        dataset, model = _duplicated_pair_instance()
        intervals = compute_all(dataset, model)
        assert intervals.lower[0] == pytest.approx(0.0, abs=1e-9)
        assert intervals.lower[1] == pytest.approx(0.0, abs=1e-9)
        assert abs(intervals.upper[0] - intervals.upper[1]) < 1e-6
        # either twin alone can carry at least the combined fitted mass
        combined = abs(model.weights[0]) + abs(model.weights[1])
        assert intervals.upper[0] >= combined - 1e-6

    def test_noise_upper_positive_but_below_budget(self):
        # delta = 0: the mass budget is exactly mu and the informative
        # columns need most of it, yet slack in the error budget still lets
        # the noise column take on a little weight (it sits between two
        # models of equal cost), so its upper bound is positive
        dataset, model = _duplicated_pair_instance()
        assert model.rho > 1e-6, "instance must have hinge slack to trade"
        high, _ = max_rel(dataset, model, 2, delta=0.0)
        assert high > 1e-9
        assert high < model.mu - 1e-6


class TestWitnessFeasibility:
    @staticmethod
    def _check_witness(dataset, model, delta, value, witness, j, kind):
        weights, bias, slacks = witness
        budget = (1 + delta) * model.mu
        margins = dataset.labels * (dataset.samples @ weights - bias)
        assert np.all(margins >= 1.0 - slacks - 1e-6), kind
        assert np.all(slacks >= -1e-12), kind
        assert slacks.sum() <= model.rho + 1e-6, kind
        assert np.abs(weights).sum() <= budget + 1e-6, kind
        assert abs(abs(weights[j]) - value) < 1e-9, kind

    def test_witnesses_satisfy_constraints(self):
        for _, (dataset, model) in random_instances(3):
            for delta in (0.001, 0.2):
                for j in range(dataset.n_features):
                    low, witness = min_rel(dataset, model, j, delta=delta)
                    self._check_witness(
                        dataset, model, delta, low, witness, j, "min"
                    )
                    high, witness = max_rel(dataset, model, j, delta=delta)
                    self._check_witness(
                        dataset, model, delta, high, witness, j, "max"
                    )


class TestUserConstraints:
    def test_pinned_feature_echoes_range(self):
        _, (dataset, model) = random_instances(1)[0]
        budget = (1 + 0.001) * model.mu
        pins = ConstraintSet.from_mapping({1: (0.0, 0.01)})
        intervals = compute_all(dataset, model, constraints=pins)
        assert intervals.lower[1] == pytest.approx(0.0, abs=1e-12)
        assert intervals.upper[1] == pytest.approx(0.01, abs=1e-12)
        wide = ConstraintSet.from_mapping({1: (0.0, 10.0 * budget)})
        intervals = compute_all(dataset, model, constraints=wide)
        assert intervals.upper[1] == pytest.approx(budget, abs=1e-12)

    def test_redundant_pin_leaves_others(self):
        for _, (dataset, model) in random_instances(3):
            base = compute_all(dataset, model)
            for pinned in range(dataset.n_features):
                pins = ConstraintSet.from_mapping(
                    {pinned: (base.lower[pinned], base.upper[pinned])}
                )
                constrained = compute_all(dataset, model, constraints=pins)
                for j in range(dataset.n_features):
                    if j == pinned:
                        continue
                    assert abs(constrained.lower[j] - base.lower[j]) < 1e-6
                    assert abs(constrained.upper[j] - base.upper[j]) < 1e-6

    def test_pin_twin_to_zero_forces_partner(self):
        # with only two substitutable columns, zeroing one leaves the other
        # no choice: it must carry the whole shared weight by itself
        dataset, model = _duplicated_pair_instance()
        base = compute_all(dataset, model)
        assert base.lower[0] == pytest.approx(0.0, abs=1e-9)
        pins = ConstraintSet.from_mapping({0: (0.0, 0.0)})
        constrained = compute_all(dataset, model, constraints=pins)
        combined = abs(model.weights[0]) + abs(model.weights[1])
        assert constrained.lower[1] >= combined - 1e-6
        assert constrained.upper[1] >= constrained.lower[1] - 1e-9

    def test_pin_to_max_rel_collapses_duplicate_partner(self):
        dataset, model = _duplicated_pair_instance()
        base = compute_all(dataset, model)
        pins = ConstraintSet.from_mapping({0: (base.upper[0], base.upper[0])})
        constrained = compute_all(dataset, model, constraints=pins)
        assert constrained.upper[1] / model.mu < 1e-3

    def test_infeasible_pin_raises(self):
        dataset, model = _sole_predictor_instance()
        budget = (1 + 0.001) * model.mu
        pins = ConstraintSet.from_mapping({2: (0.95 * budget, budget)})
        with pytest.raises(InfeasibleConstraints):
            compute_all(dataset, model, constraints=pins)
        with pytest.raises(InfeasibleConstraints):
            min_rel(dataset, model, 0, constraints=pins)

    def test_pin_on_zero_weight_feature_tries_both_signs(self):
        dataset, model = _sole_predictor_instance()
        zero_features = [j for j in range(3) if model.weights[j] == 0.0]
        assert zero_features, "expected the L1 fit to zero out a noise column"
        target = zero_features[0]
        free = [j for j in range(3) if j != target][0]
        pins = ConstraintSet.from_mapping({target: (0.001, 0.01)})
        intervals = compute_all(dataset, model, constraints=pins)
        assert intervals.lower[target] == pytest.approx(0.001)
        assert np.isfinite(intervals.lower[free])
        assert intervals.lower[free] <= intervals.upper[free] + 1e-9

    def test_constraint_validation(self):
        with pytest.raises(MalformedProblem):
            ConstraintSet.from_mapping({0: (-0.1, 0.2)})
        with pytest.raises(MalformedProblem):
            ConstraintSet.from_mapping({0: (0.3, 0.2)})
        with pytest.raises(MalformedProblem):
            ConstraintSet.from_mapping({0: (0.0, np.inf)})
        with pytest.raises(MalformedProblem):
            ConstraintSet(((0, 0.0, 0.1), (0, 0.0, 0.2)))
        with pytest.raises(MalformedProblem):
            ConstraintSet.from_mapping({-1: (0.0, 0.1)})

    def test_queried_feature_may_not_be_pinned(self):
        _, (dataset, model) = random_instances(1)[0]
        pins = ConstraintSet.from_mapping({0: (0.0, 0.1)})
        with pytest.raises(MalformedProblem):
            min_rel(dataset, model, 0, constraints=pins)
        with pytest.raises(MalformedProblem):
            max_rel(dataset, model, 0, constraints=pins)

    def test_cannot_pin_every_feature(self):
        _, (dataset, model) = random_instances(1)[0]
        pins = ConstraintSet.from_mapping(
            {j: (0.0, 0.1) for j in range(dataset.n_features)}
        )
        with pytest.raises(MalformedProblem):
            compute_all(dataset, model, constraints=pins)

    def test_out_of_range_constraint_index(self):
        _, (dataset, model) = random_instances(1)[0]
        pins = ConstraintSet.from_mapping({7: (0.0, 0.1)})
        with pytest.raises(MalformedProblem):
            compute_all(dataset, model, constraints=pins)


class TestValidation:
    def test_requires_standardized_dataset(self):
        rng = np.random.default_rng(0)
        raw = Dataset(
            rng.normal(size=(20, 3)) + 5.0,
            np.where(rng.random(20) > 0.5, 1.0, -1.0),
            ("a", "b", "c"),
        )
        z, _ = standardize(raw)
        model = fit_l1_svm(z, 0.5)
        with pytest.raises(MalformedProblem):
            compute_all(raw, model)
        with pytest.raises(MalformedProblem):
            min_rel(raw, model, 0)

    def test_rejects_negative_delta(self):
        _, (dataset, model) = random_instances(1)[0]
        with pytest.raises(MalformedProblem):
            compute_all(dataset, model, delta=-0.1)
        with pytest.raises(MalformedProblem):
            max_rel(dataset, model, 0, delta=-1e-9)

    def test_rejects_feature_index_out_of_range(self):
        _, (dataset, model) = random_instances(1)[0]
        with pytest.raises(MalformedProblem):
            min_rel(dataset, model, 3)
        with pytest.raises(MalformedProblem):
            max_rel(dataset, model, -1)

    def test_intervals_type_validation(self):
        with pytest.raises(MalformedProblem):
            RelevanceIntervals(
                np.array([0.2]), np.array([0.1]), 0.001, 1.0
            )
        with pytest.raises(MalformedProblem):
            RelevanceIntervals(
                np.array([-0.2]), np.array([0.1]), 0.001, 1.0
            )
        with pytest.raises(MalformedProblem):
            RelevanceIntervals(
                np.array([0.0]), np.array([5.0]), 0.001, 1.0
            )


class TestParallelExecution:
    def test_worker_count_does_not_change_results(self):
        _, (dataset, model) = random_instances(1)[0]
        sequential = compute_all(dataset, model, workers=1)
        parallel = compute_all(dataset, model, workers=3)
        assert np.array_equal(sequential.lower, parallel.lower)
        assert np.array_equal(sequential.upper, parallel.upper)
        names = dataset.feature_names
        assert json.dumps(sequential.to_payload(names)) == json.dumps(
            parallel.to_payload(names)
        )

    def test_repeat_runs_are_identical(self):
        _, (dataset, model) = random_instances(1)[0]
        first = compute_all(dataset, model)
        second = compute_all(dataset, model)
        assert np.array_equal(first.lower, second.lower)
        assert np.array_equal(first.upper, second.upper)

    def test_failed_feature_reported_as_marker(self, monkeypatch):
        import relint.bounds as bounds_module

        _, (dataset, model) = random_instances(1)[0]
        real_task = bounds_module._feature_task

        def flaky(x, y, budget, rho, j, branches):
            if j == 1:
                return j, np.nan, np.nan, "solver exploded"
            return real_task(x, y, budget, rho, j, branches)

        monkeypatch.setattr(bounds_module, "_feature_task", flaky)
        intervals = compute_all(dataset, model, workers=1)
        assert np.isnan(intervals.lower[1]) and np.isnan(intervals.upper[1])
        assert dict(intervals.feature_errors)[1] == "solver exploded"
        payload = intervals.to_payload(dataset.feature_names)
        assert payload["features"][1]["error"] == "solver exploded"
        assert payload["features"][1]["lower"] is None
        assert payload["features"][0].get("error") is None


class TestPayload:
    def test_payload_structure_and_normalization(self):
        _, (dataset, model) = random_instances(1)[0]
        intervals = compute_all(dataset, model)
        payload = intervals.to_payload(dataset.feature_names)
        assert payload["delta"] == intervals.delta
        assert payload["mu"] == model.mu
        assert len(payload["features"]) == dataset.n_features
        for j, entry in enumerate(payload["features"]):
            assert entry["feature"] == dataset.feature_names[j]
            assert entry["lower"] == pytest.approx(intervals.lower[j])
            assert entry["upper"] == pytest.approx(intervals.upper[j])
            assert entry["lower_norm"] == pytest.approx(
                intervals.lower[j] / model.mu
            )
            assert entry["upper_norm"] == pytest.approx(
                intervals.upper[j] / model.mu
            )
        json.dumps(payload)  # must be serializable as-is


class TestEightFeatureScenario:
    def test_strong_weak_noise_interval_structure(self):
        spec = SimulationSpec(
            n_strong=4, n_weak=3, n_irrelevant=1, n_samples=200, random_seed=5
        )
        dataset, truth = simulate(spec)
        standardized, _ = standardize(dataset)
        model = fit_l1_svm(standardized, 1.0)
        intervals = compute_all(standardized, model)
        strong = range(4)
        weak = range(4, 7)
        noise = 7
        for j in strong:
            assert intervals.lower[j] > 0.01, f"strong feature {j}"
        for j in weak:
            assert intervals.lower[j] == pytest.approx(0.0, abs=1e-9)
        uppers = [intervals.upper[j] for j in weak]
        assert max(uppers) - min(uppers) < 1e-6
        assert intervals.upper[noise] < 0.5 * min(uppers)

    def test_pinning_one_weak_twin_collapses_the_others(self):
        spec = SimulationSpec(
            n_strong=4, n_weak=3, n_irrelevant=1, n_samples=200, random_seed=5
        )
        dataset, _ = simulate(spec)
        standardized, _ = standardize(dataset)
        model = fit_l1_svm(standardized, 1.0)
        base = compute_all(standardized, model)
        pin_high = ConstraintSet.from_mapping({4: (base.upper[4], base.upper[4])})
        collapsed = compute_all(standardized, model, constraints=pin_high)
        assert collapsed.upper[5] / model.mu < 1e-3
        assert collapsed.upper[6] / model.mu < 1e-3
        pin_low = ConstraintSet.from_mapping({4: (base.lower[4], base.lower[4])})
        unchanged = compute_all(standardized, model, constraints=pin_low)
        for j in (5, 6):
            assert abs(unchanged.lower[j] - base.lower[j]) < 1e-6
            assert abs(unchanged.upper[j] - base.upper[j]) < 1e-6
