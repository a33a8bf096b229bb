"""Tests for QO-ES / QDO-ES: variation operators, populations and behavior-space coverage."""

import numpy as np
import pytest

from ensembles.archive import BehaviorSpec, BehaviorVariant
from ensembles.ensemble import Ensemble, model_val_aucs, single_best
from ensembles.evolution import (
    EvoConfig,
    crossover,
    evolve_archive,
    mutate,
    run_qdoes,
    run_qoes,
    solution_set,
)

# =============================================================================
# Variation operators
# =============================================================================


class TestOperators:
    def test_mutation_stays_valid(self):
        rng = np.random.default_rng(0)
        ensemble = Ensemble.singleton(3)
        for _ in range(500):
            mutated = mutate(ensemble, 6, rng)
            mutated.check(6)
            assert mutated.total_count >= 1
            assert abs(mutated.total_count - ensemble.total_count) <= 1
            ensemble = mutated

    def test_mutation_never_empties_a_singleton(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            assert mutate(Ensemble.singleton(0), 1, rng) == Ensemble.from_counts({0: 2})

    def test_crossover_draws_counts_from_parents(self):
        rng = np.random.default_rng(2)
        a = Ensemble.from_counts({0: 2, 1: 1, 4: 3})
        b = Ensemble.from_counts({1: 5, 2: 1})
        for _ in range(200):
            child = crossover(a, b, rng)
            for index, count in child.items:
                assert count in (a.counts.get(index), b.counts.get(index))

    def test_crossover_with_itself(self):
        rng = np.random.default_rng(3)
        a = Ensemble.from_counts({0: 2, 5: 1})
        assert crossover(a, a, rng) == a

    @pytest.mark.parametrize(
        "overrides",
        [{"capacity": 0}, {"batch_size": 0}, {"budget": -1}, {"mutation_prob": 1.5}],
    )
    def test_invalid_config(self, overrides):
        with pytest.raises(ValueError):
            EvoConfig(**overrides)


# =============================================================================
# QO-ES
# =============================================================================


class TestQoes:
    def test_deterministic_for_a_seed(self, make_repo):
        repo = make_repo()
        config = EvoConfig(capacity=8, budget=120, batch_size=10, seed=11)
        first = [e.ensemble for e in run_qoes(repo, config)]
        second = [e.ensemble for e in run_qoes(repo, config)]
        assert first == second

    def test_population_is_distinct_top_capacity(self, make_repo):
        repo = make_repo()
        population = run_qoes(repo, EvoConfig(capacity=8, budget=150, batch_size=10, seed=0))
        assert len(population) == 8
        assert len({e.ensemble for e in population}) == 8
        scores = [e.val_auc for e in population]
        assert scores == sorted(scores, reverse=True)
        assert scores[0] >= model_val_aucs(repo).max()

    def test_worst_member_never_gets_worse(self, make_repo):
        """A run with a larger budget continues the smaller run, so budget prefixes replay its generations."""
        repo = make_repo()
        worst = []
        for generation in range(15):
            config = EvoConfig(capacity=8, budget=10 * generation, batch_size=10, seed=4)
            worst.append(min(e.val_auc for e in run_qoes(repo, config)))
        assert worst == sorted(worst)

    def test_zero_budget_keeps_best_singletons(self, make_repo):
        repo = make_repo()
        population = run_qoes(repo, EvoConfig(capacity=3, budget=0))
        expected = np.argsort(-model_val_aucs(repo), kind="stable")[:3]
        assert [e.ensemble for e in population] == [Ensemble.singleton(int(m)) for m in expected]

    def test_capacity_larger_than_pool(self, make_repo):
        repo = make_repo(n_models=5)
        population = run_qoes(repo, EvoConfig(capacity=50, budget=0))
        assert sorted(e.ensemble for e in population) == [Ensemble.singleton(m) for m in range(5)]

    def test_solution_set_adds_single_best(self, make_repo):
        repo = make_repo()
        population = run_qoes(repo, EvoConfig(capacity=5, budget=60, batch_size=10, seed=2))
        solutions = solution_set(population, repo)
        assert single_best(repo) in {s.ensemble for s in solutions}
        assert len({s.ensemble for s in solutions}) == len(solutions)


# =============================================================================
# QDO-ES
# =============================================================================


class TestQdoes:
    @pytest.mark.parametrize("variant", list(BehaviorVariant))
    def test_deterministic_for_a_seed(self, variant, make_repo):
        repo = make_repo()
        spec = BehaviorSpec(variant, bins=(6, 6))
        config = EvoConfig(capacity=10, budget=100, batch_size=10, seed=5)
        first = [e.ensemble for e in run_qdoes(repo, config, spec)]
        second = [e.ensemble for e in run_qdoes(repo, config, spec)]
        assert first == second

    def test_budget_is_charged_per_offspring(self, make_repo):
        repo = make_repo(n_models=12)
        spec = BehaviorSpec(BehaviorVariant.INFER_QDO, bins=(5, 5))
        archive = evolve_archive(repo, EvoConfig(capacity=12, budget=45, batch_size=20), spec,
                                 spec.new_archive(repo))
        assert len(archive.log) == 12 + 45

    @pytest.mark.parametrize("variant", list(BehaviorVariant))
    def test_archive_only_grows_and_improves(self, variant, make_repo):
        repo = make_repo()
        spec = BehaviorSpec(variant, bins=(6, 6))
        previous = {}
        for generation in range(12):
            config = EvoConfig(capacity=10, budget=10 * generation, batch_size=10, seed=6)
            grid = evolve_archive(repo, config, spec, spec.new_archive(repo)).grid
            assert set(previous) <= set(grid)
            for cell, elite in previous.items():
                assert grid[cell].val_auc >= elite.val_auc
            previous = dict(grid)

    def test_zero_budget_archives_singletons(self, make_repo):
        repo = make_repo(n_models=8)
        spec = BehaviorSpec(BehaviorVariant.INFER_QDO, bins=(10, 10))
        elites = run_qdoes(repo, EvoConfig(capacity=8, budget=0), spec)
        assert all(e.size == 1 for e in elites)
        assert single_best(repo) in {e.ensemble for e in elites}

    def test_elites_carry_variant_descriptor(self, make_repo):
        repo = make_repo()
        spec = BehaviorSpec(BehaviorVariant.SIZE_QDO, bins=(6, 6))
        for elite in run_qdoes(repo, EvoConfig(capacity=10, budget=80, batch_size=10, seed=3), spec):
            assert elite.behavior[0] == float(elite.size)

    @pytest.mark.parametrize(
        "variant",
        [BehaviorVariant.INFER_QDO, BehaviorVariant.SIZE_QDO],
    )
    def test_hardware_dimension_is_spread(self, variant, make_repo):
        """The final archive covers at least three bins of the hardware dimension for nearly every seed."""
        spread = 0
        for seed in range(20):
            repo = make_repo(n_models=20, n_val=200, n_test=100, time_range_s=(1e-3, 1.0), seed=seed)
            spec = BehaviorSpec(variant, bins=(10, 10))
            archive = evolve_archive(
                repo, EvoConfig(capacity=50, budget=1000, batch_size=20, seed=seed), spec, spec.new_archive(repo)
            )
            if len({cell[0] for cell in archive.grid}) >= 3:
                spread += 1
        assert spread >= 18
