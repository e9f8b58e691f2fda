from itertools import combinations

import numpy as np
import pytest

from twoortho.graphs import (
    GraphTuple,
    _binary_tuples,
    binary_labels_to_graphs,
    complete_bipartite_components,
    conjecture_scan,
    expected_dimension_binary,
    graphical_description,
    is_valid_graphical_description,
    leq_order,
)
from twoortho.latin import maximal_two_orthogonal_decomposition
from twoortho.tensor_core import Decomposition, TensorError

from .helpers import E0, E1, term

# Rows of the (R^2)^{⊗3} table, vertices 0-based.
TABLE = {
    "W1": GraphTuple.from_edges(1, [[], [], []]),
    "odeco": GraphTuple.from_edges(2, [[(0, 1)]] * 3),
    "W2_23": GraphTuple.from_edges(2, [[], [(0, 1)], [(0, 1)]]),
    "W2_13": GraphTuple.from_edges(2, [[(0, 1)], [], [(0, 1)]]),
    "W2_12": GraphTuple.from_edges(2, [[(0, 1)], [(0, 1)], []]),
    "W3": GraphTuple.from_edges(3, [[(0, 2), (0, 1)], [(0, 1), (1, 2)], [(0, 2), (1, 2)]]),
    "W4": GraphTuple.from_edges(4, [[(0, 1), (0, 2), (1, 3), (2, 3)],
                                    [(0, 1), (0, 3), (1, 2), (2, 3)],
                                    [(0, 2), (0, 3), (1, 2), (1, 3)]]),
}


def test_graph_tuple_validation():
    with pytest.raises(TensorError):
        GraphTuple(2, np.array([[[False, True], [False, False]]]))
    with pytest.raises(TensorError):
        GraphTuple(2, np.array([[[True, False], [False, False]]]))
    with pytest.raises(TensorError):
        GraphTuple.from_edges(2, [[(0, 2)]])


def test_json_round_trip():
    gt = TABLE["W4"]
    back = GraphTuple.from_json(gt.to_json())
    assert np.array_equal(back.adjacency, gt.adjacency)
    assert gt.to_json()["r"] == 4


def test_description_odeco():
    d = Decomposition((2, 2, 2), [term(E0, E0, E0), term(E1, E1, E1)])
    assert np.array_equal(graphical_description(d).adjacency, TABLE["odeco"].adjacency)


def test_description_worked_example():
    e = np.eye(3)
    d = Decomposition((2, 3, 3), [term(E0, e[0], e[0]), term(E1, e[0] + e[1], e[1]), term(E0 - E1, e[2], e[2])])
    gt = graphical_description(d)
    assert gt.edges(0) == [(0, 1)]
    assert gt.edges(1) == [(0, 2), (1, 2)]
    assert gt.edges(2) == [(0, 1), (0, 2), (1, 2)]


def test_description_maximal_binary_is_four_cycles():
    gt = graphical_description(maximal_two_orthogonal_decomposition((2, 2, 2)))
    for k in range(3):
        assert len(gt.edges(k)) == 4
        assert complete_bipartite_components(gt.adjacency[k]) == 1
        assert np.all(gt.adjacency[k].sum(axis=1) == 2)


@pytest.mark.parametrize("row", sorted(TABLE))
def test_table_rows_valid(row):
    assert is_valid_graphical_description(TABLE[row], (2, 2, 2))


@pytest.mark.parametrize("row,dim", [("W1", 4), ("odeco", 5), ("W2_23", 6), ("W2_13", 6), ("W2_12", 6),
                                     ("W3", 6), ("W4", 7)])
def test_expected_dimensions(row, dim):
    assert expected_dimension_binary(TABLE[row]) == dim


def test_expected_dimension_rejects_non_bipartite():
    tri = [(0, 1), (0, 2), (1, 2)]
    with pytest.raises(TensorError):
        expected_dimension_binary(GraphTuple.from_edges(3, [tri, tri, tri]))


def test_r5_binary_invalid():
    full = list(combinations(range(5), 2))
    for graphs in ([full] * 3, [[], full, full], [[(0, 1)], [], []]):
        verdict = is_valid_graphical_description(GraphTuple.from_edges(5, graphs), (2, 2, 2))
        assert verdict.status == "invalid"


def test_k3_on_three_dimensional_factors_valid():
    tri = [(0, 1), (0, 2), (1, 2)]
    gt = GraphTuple.from_edges(3, [tri] * 3)
    assert is_valid_graphical_description(gt, (3, 3, 3)).status == "valid"
    assert is_valid_graphical_description(gt, (2, 2, 2)).status == "invalid"


def test_k4_on_three_dimensional_factor_inconclusive():
    k4 = list(combinations(range(4), 2))
    verdict = is_valid_graphical_description(GraphTuple.from_edges(4, [k4, k4, k4]), (3, 3, 3))
    assert verdict.status == "inconclusive"
    assert not verdict


def test_validity_shape_mismatch():
    with pytest.raises(TensorError):
        is_valid_graphical_description(TABLE["W4"], (2, 2))


def test_verified_decompositions_never_invalid(rng):
    for shape in [(2, 2, 2), (2, 3, 3), (3, 3, 3), (2, 2, 2, 2)]:
        d = maximal_two_orthogonal_decomposition(shape, rng_seed=int(rng.integers(100)))
        assert is_valid_graphical_description(graphical_description(d), shape).status != "invalid"


def test_leq_order_examples():
    assert leq_order(TABLE["odeco"], TABLE["W2_23"])
    assert not leq_order(TABLE["W2_23"], TABLE["odeco"])
    assert leq_order(TABLE["W3"], TABLE["W4"])
    assert not leq_order(TABLE["W4"], TABLE["W3"])
    assert leq_order(TABLE["W1"], TABLE["odeco"])
    for gt in TABLE.values():
        assert leq_order(gt, gt)
    with pytest.raises(TensorError):
        leq_order(TABLE["W1"], GraphTuple.from_edges(1, [[], []]))


def test_leq_order_labeled_only():
    a = GraphTuple.from_edges(3, [[(0, 1)], [], []])
    b = GraphTuple.from_edges(3, [[(1, 2)], [], []])
    assert not leq_order(a, b, up_to_isomorphism=False)
    assert leq_order(a, b)


def test_conjecture_scan_d3():
    scan = conjecture_scan(3)
    assert scan.max_dimension == {1: 4, 2: 6, 3: 6, 4: 7}
    assert scan.counts[5] == 0
    assert scan.violations() == []
    for r, gt in scan.witnesses.items():
        assert is_valid_graphical_description(gt, (2, 2, 2))
        assert expected_dimension_binary(gt) == scan.max_dimension[r]


def test_maximal_r_graphs_are_balanced_complete_bipartite():
    for d in (3, 4):
        r = 2 ** (d - 1)
        n = 0
        for labels in _binary_tuples(r, d):
            gt = binary_labels_to_graphs(r, labels)
            for k in range(d):
                assert complete_bipartite_components(gt.adjacency[k]) == 1
                assert np.all(gt.adjacency[k].sum(axis=1) == r // 2)
            n += 1
        assert n > 0
