"""Greedy edge-colored search: moves, invariants, and the baseline climber."""

import numpy as np
import pytest

from cdag.coloring import ColoredDag, uncolored
from cdag.dag import Dag, markov_equivalent
from cdag.errors import CdagError, SearchBudgetError
from cdag.fit import Dataset, bic_score
from cdag.gecs import (BaselineSearch, GecsConfig, GecsSearch,
                       baseline_greedy, gecs, move_add_color, move_add_edge,
                       move_merge_colors, move_move_edge, move_remove_color,
                       move_remove_edge, move_reverse_edge, move_split_color)
from cdag.params import ModelParams
from cdag.bench import random_bpec, sample

ALL_MOVES = (move_add_color, move_split_color, move_add_edge, move_move_edge,
             move_reverse_edge, move_remove_edge, move_merge_colors,
             move_remove_color)


class _CheckedSearch(GecsSearch):
    """Asserts the closure invariant on every accepted move."""

    def _accept(self, phase, move_name, new_state):
        assert new_state.current.is_bpec()
        assert new_state.score > self.state.score
        super()._accept(phase, move_name, new_state)


def _collider_data(n=2000, seed=42):
    g = Dag(3, [(0, 2), (1, 2)])
    cd = ColoredDag(g, edge_classes=[[(0, 2), (1, 2)]])
    theta = ModelParams((1.0, 1.0, 1.0), (0.8,))
    return cd, sample(cd, theta, n, seed)


class TestMoves:
    def test_add_color_finds_strong_collider(self):
        truth, data = _collider_data()
        search = GecsSearch(data)
        new = move_add_color(search.state, data, search.scorer)
        assert new.current.graph.edges == {(0, 2), (1, 2)}
        assert new.current.is_bpec()

    def test_local_maximum_is_fixed_point_of_every_move(self):
        _, data = _collider_data(n=500, seed=7)
        search = GecsSearch(data)
        search.run()
        converged = search.state
        for move in ALL_MOVES:
            after = move(converged, data, search.scorer)
            assert after.current == converged.current
            assert after.score == converged.score

    def test_remove_edge_has_no_candidates_on_pairs(self):
        # all classes have size two, below the removal threshold
        g = Dag(5, [(0, 2), (1, 2), (0, 3), (1, 3), (2, 4), (3, 4)])
        truth = ColoredDag(g, edge_classes=[[(0, 2), (1, 2)], [(0, 3), (1, 3)],
                                            [(2, 4), (3, 4)]])
        assert all(len(grp) == 2 for grp in truth.edge_classes)
        theta = ModelParams((1.0,) * 5, (0.5, -0.6, 0.7))
        data = sample(truth, theta, 300, 4)
        search = GecsSearch(data)
        state = search.scorer.state_from(_families_from(truth), truth.p, 0)
        assert move_remove_edge(state, data, search.scorer).current == state.current

    def test_reverse_edge_never_leaves_singleton_donor(self):
        rng = np.random.default_rng(5)
        for seed in range(6):
            truth, theta = random_bpec(6, 0.7, 2, seed=seed)
            data = sample(truth, theta, 400, seed + 50)
            search = GecsSearch(data)
            state = search.scorer.state_from(
                _families_from(truth), truth.p, 0)
            after = move_reverse_edge(state, data, search.scorer)
            assert after.current.is_bpec()


def _families_from(cd):
    by_node = [{} for _ in range(cd.p)]
    for e in sorted(cd.graph.edges):
        by_node[e[1]].setdefault(cd.edge_color(e), []).append(e[0])
    return tuple(tuple(sorted(tuple(sorted(v)) for v in groups.values()))
                 for groups in by_node)


class TestGecs:
    def test_trace_is_monotone_and_output_bpec(self):
        for seed in range(5):
            truth, theta = random_bpec(6, 0.5, 2, seed=seed)
            data = sample(truth, theta, 400, seed + 10)
            search = _CheckedSearch(data, GecsConfig(seed=seed))
            result = search.run()
            scores = [row.score for row in search.trace]
            assert all(b > a for a, b in zip(scores, scores[1:]))
            assert result.is_bpec()

    def test_deterministic_under_fixed_seed(self):
        truth, theta = random_bpec(6, 0.6, 2, seed=9)
        data = sample(truth, theta, 500, 11)
        assert gecs(data, GecsConfig(seed=1)) == gecs(data, GecsConfig(seed=1))

    def test_state_score_matches_scorer(self):
        truth, theta = random_bpec(5, 0.5, 2, seed=2)
        data = sample(truth, theta, 300, 3)
        search = GecsSearch(data)
        result = search.run()
        assert search.state.score == pytest.approx(bic_score(result, data),
                                                   abs=1e-9)
        assert search.state.score == pytest.approx(
            sum(search.state.family_cache), abs=1e-9)

    def test_two_variables_stay_empty(self):
        rng = np.random.default_rng(12)
        data = Dataset(rng.standard_normal((200, 2)))
        result = gecs(data)
        assert not result.graph.edges

    def test_score_dominates_start_point(self):
        # the chain itself is outside the search space, so the guarantee is
        # dominance over the empty start, not truth recovery
        chain = ColoredDag(Dag(4, [(0, 1), (1, 2), (2, 3)]),
                           vertex_classes=[[0, 2]],
                           edge_classes=[[(0, 1), (2, 3)]])
        theta = ModelParams((1.0, 2.0, 3.0), (0.5, 0.7))
        data = sample(chain, theta, 1000, 99)
        search = GecsSearch(data, GecsConfig(seed=1))
        search.run()
        assert search.state.score >= search.trace[0].score

    def test_budget_exceeded_raises(self):
        truth, theta = random_bpec(6, 0.6, 2, seed=21)
        data = sample(truth, theta, 400, 22)
        with pytest.raises(SearchBudgetError):
            gecs(data, GecsConfig(move_budget=1))

    def test_preconditions(self):
        rng = np.random.default_rng(13)
        with pytest.raises(CdagError):
            gecs(Dataset(rng.standard_normal((1, 3))))
        with pytest.raises(CdagError):
            gecs(Dataset(rng.standard_normal((50, 1))))


class TestBaseline:
    def test_recovers_chain_equivalence_class(self):
        cd = uncolored(Dag(4, [(0, 1), (1, 2), (2, 3)]))
        theta = ModelParams((1.0, 2.0, 1.0, 3.0), (0.5, 0.7, 0.5))
        data = sample(cd, theta, 5000, 11)
        result = baseline_greedy(data)
        assert markov_equivalent(result, cd.graph)

    def test_pure_noise_gives_empty_graph(self):
        cd = uncolored(Dag(4))
        theta = ModelParams((1.0, 0.5, 2.0, 1.5), ())
        data = sample(cd, theta, 5000, 13)
        assert not baseline_greedy(data).edges

    def test_single_variable(self):
        rng = np.random.default_rng(14)
        result = baseline_greedy(Dataset(rng.standard_normal((100, 1))))
        assert result.p == 1 and not result.edges

    def test_monotone_trace(self):
        truth, theta = random_bpec(5, 0.6, 2, seed=31)
        data = sample(truth, theta, 400, 32)
        search = BaselineSearch(data)
        search.run()
        scores = [row.score for row in search.trace]
        assert all(b > a for a, b in zip(scores, scores[1:]))
