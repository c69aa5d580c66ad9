import itertools
from fractions import Fraction

import numpy as np
import pytest

from polycert.libs.hardness import (
    NOT_ARCHIMEDEAN_STR,
    NOT_STABLY_COMPACT_STR,
    Constraint,
    Graph,
    InstanceArgumentError,
    InstanceSizeError,
    SatInstance,
    UnknownVariantError,
    clique_number,
    find_cut,
    gen_cubic_with_irrational_minimum,
    gen_exponential_bitsize,
    gen_irrational_spectrahedron,
    gen_maxcut_instance,
    gen_sat_attainment,
    gen_set_counterexample,
    gen_spectrahedron_cubic,
    gen_stableset_family,
    generate_batch,
    max_cut,
    motzkin_straus_value,
    one_in_three_solutions,
    reduce_pencil,
    simplex_grid_max,
    sphere_probe_min,
    stability_number,
    stable_compactness_probe,
    stable_compactness_value,
)
from polycert.utils.constants import CRITICAL_CUBIC_STR, SAT_VARIANTS, SECOND_ORDER_QUARTIC_STR
from tests.conftest import poly

TRIANGLE = Graph.complete(n=3)
PATH = Graph.from_edges(n=3, edges=[(0, 1), (1, 2)])
ONE_CLAUSE = SatInstance.of(nvars=3, clauses=[(1, 2, 3)])
# all three literals agree, so the true count is 0 or 3
UNSATISFIABLE = SatInstance.of(nvars=1, clauses=[(1, 1, 1)])


def _y_block_min_eigenvalue(instance, x):
    """Smallest eigenvalue of the y-Hessian of yᵀA(x)y, i.e. of 2A(x)."""
    n = len(x)
    p = instance.polynomial
    point = [*x, *([0.0] * (p.nvars - n))]
    hessian = np.array([[float(entry.evaluate(point)) for entry in row[n:]] for row in p.hessian()[n:]])
    return float(np.min(np.linalg.eigvalsh(hessian)))


@pytest.mark.parametrize(
    "adjacency",
    [
        ((0, 1), (0, 0)),
        ((1, 0), (0, 0)),
        ((0, 2), (2, 0)),
        ((0, 1),),
    ],
)
def test_graph_validation(adjacency):
    with pytest.raises(ValueError):
        Graph(n=2, adjacency=adjacency)


def test_sat_instance_validation():
    with pytest.raises(ValueError):
        SatInstance.of(nvars=2, clauses=[(1, 2)])
    with pytest.raises(ValueError):
        SatInstance.of(nvars=2, clauses=[(1, 2, 3)])
    with pytest.raises(ValueError):
        SatInstance.of(nvars=2, clauses=[(1, 0, 2)])


def test_constraint_relation_checked():
    with pytest.raises(ValueError):
        Constraint(polynomial=poly(1, {(1,): 1}), relation="<")


def test_brute_force_graph_numbers():
    assert max_cut(TRIANGLE)[0] == 2
    assert find_cut(G=TRIANGLE, k=3) is None
    assert find_cut(G=TRIANGLE, k=2) is not None
    assert stability_number(Graph.empty(n=3)) == 3
    assert stability_number(PATH) == 2
    assert clique_number(Graph.complete(n=4)) == 4


def test_brute_force_is_capped():
    with pytest.raises(InstanceSizeError):
        max_cut(Graph.empty(n=21))


@pytest.mark.parametrize("variant", [CRITICAL_CUBIC_STR, SECOND_ORDER_QUARTIC_STR])
def test_maxcut_witness_is_critical(variant):
    instance = gen_maxcut_instance(G=TRIANGLE, k=2, variant=variant)
    assert instance.ground_truth == {"has_cut": True, "has_point": True, "max_cut": 2}
    assert len(instance.variables) == instance.polynomial.nvars
    gradient = [entry.evaluate(instance.witness) for entry in instance.polynomial.gradient()]
    assert gradient == [0] * instance.polynomial.nvars


def test_maxcut_critical_cubic_layout():
    instance = gen_maxcut_instance(G=TRIANGLE, k=2)
    assert instance.polynomial.nvars == 2 * 3 + 2
    assert instance.polynomial.degree() == 3
    cut = instance.metadata["cut"]
    assert instance.witness.coords[:3] == tuple(cut)
    assert sum(1 for i, j in TRIANGLE.edges() if cut[i] != cut[j]) == 2


def test_maxcut_without_cut_has_no_witness():
    instance = gen_maxcut_instance(G=TRIANGLE, k=3)
    assert instance.ground_truth["has_cut"] is False
    assert instance.witness is None
    assert instance.to_json()["witness"] is None


def test_maxcut_cut_size_bounded_by_vertices():
    path = Graph.from_edges(n=4, edges=[(0, 1), (1, 2), (2, 3)])
    instance = gen_maxcut_instance(G=path, k=4)
    assert instance.ground_truth["has_cut"] is False
    assert instance.ground_truth["max_cut"] == 3
    assert instance.witness is None
    with pytest.raises(InstanceArgumentError):
        gen_maxcut_instance(G=Graph.complete(n=5), k=6)


def test_maxcut_rejects_bad_arguments():
    with pytest.raises(InstanceArgumentError):
        gen_maxcut_instance(G=TRIANGLE, k=4)
    with pytest.raises(InstanceArgumentError):
        gen_maxcut_instance(G=TRIANGLE, k=-1)
    with pytest.raises(UnknownVariantError):
        gen_maxcut_instance(G=TRIANGLE, k=1, variant="quintic")


@pytest.mark.parametrize("r, has_local_min", [(2, False), (3, True)])
def test_stableset_ground_truth(r, has_local_min):
    instance = gen_stableset_family(G=PATH, r=r)
    truth = instance.ground_truth
    assert truth["alpha"] == 2
    assert truth["k"] == str(Fraction(2 * r - 1, 2))
    assert truth["has_local_min"] is has_local_min
    assert instance.metadata["bound_squared"] == "27"
    assert instance.polynomial.degree() == 4


def test_stableset_matrix_entries():
    instance = gen_stableset_family(G=PATH, r=2)
    M = instance.payload["M"]
    k = Fraction(3, 2)
    assert M[0][0] == k - 1
    assert M[0][1] == k - 1
    assert M[0][2] == -1
    assert instance.payload["orthant_qp"].feasible([0, 0, 0])
    assert not instance.payload["bounded_qp"].feasible([10, 0, 0])


def test_stableset_exact_bound_scales_with_c():
    instance = gen_stableset_family(G=PATH, r=1, c=2, exact_bound=True)
    assert instance.metadata["bound_squared"] == str(9 * 2**6 * 3)


def test_stableset_r_range():
    with pytest.raises(ValueError):
        gen_stableset_family(G=PATH, r=0)
    with pytest.raises(ValueError):
        gen_stableset_family(G=PATH, r=4)


def test_motzkin_straus_on_small_graphs():
    # mesh 12 hits 1/ω exactly for ω ≤ 4
    for n in range(1, 5):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(2 ** len(pairs)):
            G = Graph.from_edges(n=n, edges=[pair for bit, pair in enumerate(pairs) if mask >> bit & 1])
            grid = simplex_grid_max(matrix=G.adjacency, mesh=12)
            assert grid == pytest.approx(float(motzkin_straus_value(G)), abs=2e-2)


def test_motzkin_straus_triangle():
    assert motzkin_straus_value(TRIANGLE) == Fraction(2, 3)


def test_one_in_three_solutions():
    solutions = one_in_three_solutions(ONE_CLAUSE)
    assert len(solutions) == 3
    assert all(sorted(signs) == [-1, -1, 1] for signs in solutions)
    assert one_in_three_solutions(UNSATISFIABLE) == []


@pytest.mark.parametrize("variant", SAT_VARIANTS)
def test_sat_witness_attains(variant):
    instance = gen_sat_attainment(phi=ONE_CLAUSE, variant=variant)
    assert instance.ground_truth["satisfiable"] is True
    assert len(instance.witness) == len(instance.variables)
    payload = instance.payload
    if "polynomial" in payload:
        assert payload["polynomial"].evaluate(instance.witness) == 0
    elif "pop" in payload:
        pop = payload["pop"]
        assert pop.feasible(instance.witness)
        assert pop.objective.evaluate(instance.witness) == 0
    else:
        assert payload["set"].feasible(instance.witness)


@pytest.mark.parametrize("variant", SAT_VARIANTS)
def test_sat_unsatisfiable_has_no_witness(variant):
    instance = gen_sat_attainment(phi=UNSATISFIABLE, variant=variant)
    assert instance.ground_truth["satisfiable"] is False
    assert instance.witness is None


@pytest.mark.parametrize(
    "variant, key, satisfiable_value",
    [
        ("sphi", "has_zero", True),
        ("sphih-coercivity", "coercive", False),
        ("closedness-Sphi", "closed", False),
        ("boundedness-S", "bounded", False),
        ("stable-compactness-Tphi", "stably_compact", False),
    ],
)
def test_sat_variant_ground_truth(variant, key, satisfiable_value):
    assert gen_sat_attainment(phi=ONE_CLAUSE, variant=variant).ground_truth[key] is satisfiable_value
    assert gen_sat_attainment(phi=UNSATISFIABLE, variant=variant).ground_truth[key] is not satisfiable_value


def test_sat_unknown_variant():
    with pytest.raises(UnknownVariantError):
        gen_sat_attainment(phi=ONE_CLAUSE, variant="three-sat")


def test_sat_json_carries_provenance():
    data = gen_sat_attainment(phi=ONE_CLAUSE, variant="sphi").to_json()
    assert data["provenance"] == {
        "reduction": "sat-sphi",
        "formula": {"nvars": 3, "clauses": [[1, 2, 3]]},
        "variant": "sphi",
    }
    assert data["witness"] == [str(val) for val in data["metadata"]["assignment"]]


def test_exponential_bitsize_bounds():
    instance = gen_exponential_bitsize(n=2)
    assert instance.ground_truth["lower_bounds"] == [4, 16]
    assert _y_block_min_eigenvalue(instance, x=[4.0, 16.0]) >= -1e-9
    assert _y_block_min_eigenvalue(instance, x=[3.9, 16.0]) < 0
    assert _y_block_min_eigenvalue(instance, x=[4.0, 15.9]) < 0


def test_exponential_bitsize_limits():
    with pytest.raises(InstanceSizeError):
        gen_exponential_bitsize(n=7)
    with pytest.raises(ValueError):
        gen_exponential_bitsize(n=0)


def test_irrational_spectrahedron_is_a_single_point():
    instance = gen_irrational_spectrahedron()
    assert instance.ground_truth["reduced_size"] == 4
    assert _y_block_min_eigenvalue(instance, x=[2**0.5]) >= -1e-9
    assert _y_block_min_eigenvalue(instance, x=[1.4]) < 0
    assert _y_block_min_eigenvalue(instance, x=[1.5]) < 0


def test_reduce_pencil_drops_common_kernel():
    reduced, V = reduce_pencil([[[1, 0], [0, 0]], [[0, 0], [0, 0]]])
    assert V is not None
    assert [len(mat) for mat in reduced] == [1, 1]
    assert reduced[0] != [[0]]
    instance = gen_spectrahedron_cubic([[[1, 0], [0, 0]], [[0, 0], [0, 0]]])
    assert instance.ground_truth == {"pencil_size": 2, "reduced_size": 1}


def test_reduce_pencil_rejects_asymmetric():
    with pytest.raises(ValueError):
        reduce_pencil([[[1, 1], [0, 1]]])


def test_cubic_with_irrational_minimum():
    instance = gen_cubic_with_irrational_minimum()
    assert instance.polynomial == poly(1, {(3,): 1, (1,): -6})
    assert instance.canonical().b == (Fraction(-6),)


def test_not_stably_compact_counterexample():
    instance = gen_set_counterexample(kind=NOT_STABLY_COMPACT_STR)
    constraints = instance.payload["set"].constraints
    assert instance.payload["set"].feasible(instance.witness)
    # (x1 − x2)⁴ vanishes along the diagonal direction
    assert stable_compactness_value(constraints=constraints, point=[1, 1]) == 0
    assert stable_compactness_probe(constraints=constraints) <= 1e-6


def test_unit_disk_is_stably_compact():
    constraints = [Constraint(polynomial=poly(2, {(0, 0): 1, (2, 0): -1, (0, 2): -1}))]
    assert stable_compactness_probe(constraints=constraints) == pytest.approx(1.0)


def test_not_archimedean_counterexample():
    instance = gen_set_counterexample(kind=NOT_ARCHIMEDEAN_STR, n=3)
    assert instance.ground_truth == {"compact": True, "archimedean": False}
    assert instance.payload["set"].feasible(instance.witness)
    assert not instance.payload["set"].feasible([2, 2, 2])
    with pytest.raises(ValueError):
        gen_set_counterexample(kind=NOT_ARCHIMEDEAN_STR, n=1)
    with pytest.raises(UnknownVariantError):
        gen_set_counterexample(kind="unbounded")


def test_sphere_probe_min():
    assert sphere_probe_min(poly(2, {(2, 0): 1, (0, 2): 1})) == pytest.approx(1.0)
    assert sphere_probe_min(poly(2, {(2, 0): 1}), samples=5000) <= 1e-4


def test_generate_batch_keeps_order_and_drops_failures():
    results = generate_batch(
        builders=[gen_cubic_with_irrational_minimum, lambda: gen_exponential_bitsize(n=7)], jobs=2
    )
    assert results[0].name == "irrational-minimum"
    assert results[1] is None
