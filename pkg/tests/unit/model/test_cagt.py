"""Unit tests for aggregation, generation and transformation."""
import numpy as np
import pytest
from scipy import sparse

from icdm.common.enums import NodeClass, Relation
from icdm.common.exceptions.exceptions import UsageException
from icdm.common.schemas import AggregationConfig
from icdm.diffcore.store import ParameterStore
from icdm.diffcore.tensor import constant
from icdm.graph.adjacency import Adjacency
from icdm.graph.scg import build_involvement, build_scg
from icdm.model import cagt


def graph_of(dataset, desired_edges=True):
    R = dataset.rating_matrix()
    Q = dataset.q_sparse()
    return build_scg(R, Q, build_involvement(R, Q), desired_edges=desired_edges)


def initialized_store(graph, d=4, seed=0, transform=True):
    store = ParameterStore()
    cagt.init_parameters(
        store, graph.n_students, graph.n_exercises, graph.n_concepts, d, np.random.default_rng(seed), transform
    )
    return store


class TestAggregation:
    """Test suite for aggregate."""

    def test_single_student_two_right_exercises(self):
        """Test the R->S view with K = 1 by hand."""
        R = sparse.csr_array(np.array([[1, 1]], dtype=np.int8))
        Q = sparse.csr_array(np.array([[1], [1]]))
        graph = build_scg(R, Q, build_involvement(R, Q))
        store = initialized_store(graph)

        bundle = cagt.aggregate(graph, store, AggregationConfig(k=1))

        student = store["embedding.student"].value[0]
        exercises = store["embedding.right"].value
        expected = student + 0.5 * exercises.mean(axis=0)
        assert bundle.views[NodeClass.STUDENT][0].value[0] == pytest.approx(expected, abs=1e-12)

    def test_view_layout(self, toy_dataset):
        """Test every node class receives its views."""
        bundle = cagt.aggregate(graph_of(toy_dataset), initialized_store(graph_of(toy_dataset)), AggregationConfig(k=2))

        assert [len(bundle.views[node_class]) for node_class in cagt.VIEW_LAYOUT] == [3, 2, 2, 3]
        assert bundle.views[NodeClass.STUDENT][0].shape == (4, 4)
        assert bundle.views[NodeClass.CONCEPT][2].shape == (2, 4)

    def test_without_desired_edges(self, toy_dataset):
        """Test dropping Desired edges removes the C->S and S->C views."""
        graph = graph_of(toy_dataset, desired_edges=False)

        bundle = cagt.aggregate(graph, initialized_store(graph), AggregationConfig(k=2, desired_edges=False))

        assert len(bundle.views[NodeClass.STUDENT]) == 2
        assert len(bundle.views[NodeClass.CONCEPT]) == 2

    def test_targets_match_full_pass(self, toy_dataset):
        """Test a target-restricted pass reproduces the full-graph rows."""
        graph = graph_of(toy_dataset)
        store = initialized_store(graph)
        config = AggregationConfig(k=3)
        targets = cagt.NodeTargets(students=np.array([1, 3]), exercises=np.array([2]), concepts=np.array([0]))

        full = cagt.aggregate(graph, store, config)
        partial = cagt.aggregate(graph, store, config, targets)

        for node_class, views in partial.views.items():
            rows = targets.of(node_class)
            for index, view in enumerate(views):
                assert np.allclose(view.value, full.views[node_class][index].value[rows], atol=1e-12)

    def test_keep_depths(self, toy_dataset):
        """Test the frozen depth tables kept for inductive inference."""
        graph = graph_of(toy_dataset)

        bundle = cagt.aggregate(graph, initialized_store(graph), AggregationConfig(k=3), keep_depths=True)

        assert set(bundle.student_chain_depths) == {Relation.RIGHT, Relation.WRONG, Relation.DESIRED}
        assert len(bundle.student_chain_depths[Relation.RIGHT]) == 3
        assert bundle.student_chain_depths[Relation.DESIRED][0].shape == (2, 4)

    def test_training_mode_needs_rng(self, toy_dataset):
        """Test dropout without a generator."""
        graph = graph_of(toy_dataset)

        with pytest.raises(UsageException):
            cagt.aggregate(graph, initialized_store(graph), AggregationConfig(training_mode=True))

    def test_dropout_all_edges(self, toy_dataset):
        """Test dropping every edge leaves only the self term."""
        graph = graph_of(toy_dataset)
        store = initialized_store(graph)
        config = AggregationConfig(k=2, alpha=1.0, beta=0.0, training_mode=True)

        bundle = cagt.aggregate(graph, store, config, rng=np.random.default_rng(0))

        for view in bundle.views[NodeClass.STUDENT]:
            assert np.allclose(view.value, store["embedding.student"].value, atol=1e-12)

    def test_aggregate_unseen_zero_self_term(self, toy_dataset):
        """Test unseen student views average frozen tables without a self term."""
        graph = graph_of(toy_dataset)
        store = initialized_store(graph)
        config = AggregationConfig(k=1, desired_edges=False)
        bundle = cagt.aggregate(graph_of(toy_dataset, False), store, config, keep_depths=True)
        adjacency = {
            Relation.RIGHT: graph.adj(NodeClass.STUDENT, Relation.RIGHT),
            Relation.WRONG: graph.adj(NodeClass.STUDENT, Relation.WRONG),
        }

        views = cagt.aggregate_unseen(adjacency, bundle.student_chain_depths, config)

        right = store["embedding.right"].value
        assert views[0].value[1] == pytest.approx(0.5 * right[0], abs=1e-12)
        assert views[0].value[0] == pytest.approx(0.5 * right.mean(axis=0), abs=1e-12)


    def test_mean_step_ignores_neighbor_order(self):
        """Test relabelling neighbors, values included, leaves the mean unchanged."""
        sources, neighbors = np.array([0, 0, 0, 1]), np.array([0, 1, 2, 2])
        values = np.random.default_rng(3).normal(size=(3, 4))
        perm = np.array([2, 0, 1])
        relabelled = np.empty_like(values)
        relabelled[perm] = values
        nodes, rows = np.arange(2), np.arange(3)

        original = cagt.mean_step(Adjacency.from_pairs(sources, neighbors, 2, 3), nodes, constant(values), rows)
        permuted = cagt.mean_step(Adjacency.from_pairs(sources, perm[neighbors], 2, 3), nodes,
                                  constant(relabelled), rows)

        assert np.allclose(original.value, permuted.value, atol=1e-12)

    def test_mean_step_is_linear(self):
        """Test a*x + b*y aggregates to a*agg(x) + b*agg(y)."""
        adj = Adjacency.from_pairs(np.array([0, 0, 1, 2]), np.array([0, 1, 1, 2]), 3, 3)
        rng = np.random.default_rng(4)
        x, y = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
        nodes = rows = np.arange(3)

        combined = cagt.mean_step(adj, nodes, constant(2.0 * x - 3.0 * y), rows).value
        separate = (2.0 * cagt.mean_step(adj, nodes, constant(x), rows).value
                    - 3.0 * cagt.mean_step(adj, nodes, constant(y), rows).value)

        assert np.allclose(combined, separate, atol=1e-12)

    def test_aggregate_scales_with_embeddings(self, toy_dataset):
        """Test doubling every embedding doubles every accumulated view."""
        graph = graph_of(toy_dataset)
        store = initialized_store(graph)
        config = AggregationConfig(k=3)
        before = cagt.aggregate(graph, store, config)

        for name in cagt.EMBEDDINGS.values():
            store[name].value = 2.0 * store[name].value
        after = cagt.aggregate(graph, store, config)

        for node_class, views in before.views.items():
            for index, view in enumerate(views):
                assert np.allclose(after.views[node_class][index].value, 2.0 * view.value, atol=1e-12)


class TestGeneration:
    """Test suite for generate."""

    @pytest.fixture
    def bundle_and_store(self, toy_dataset):
        """Return the views and parameters of the toy graph."""
        graph = graph_of(toy_dataset)
        store = initialized_store(graph)
        return cagt.aggregate(graph, store, AggregationConfig(k=2)), store

    def test_equal_scores_give_uniform_weights(self, bundle_and_store):
        """Test zero attention vectors give uniform weights."""
        bundle, store = bundle_and_store
        for node_class in cagt.VIEW_LAYOUT:
            store[f"generation.{node_class.value}.attention"].value = np.zeros_like(
                store[f"generation.{node_class.value}.attention"].value
            )

        student = cagt.generation_weights(bundle.views[NodeClass.STUDENT], store, NodeClass.STUDENT)
        right = cagt.generation_weights(bundle.views[NodeClass.RIGHT], store, NodeClass.RIGHT)

        assert np.allclose(student, 1 / 3)
        assert np.allclose(right, 1 / 2)

    def test_weights_sum_to_one(self, bundle_and_store):
        """Test every node's weights are normalized."""
        bundle, store = bundle_and_store

        weights = cagt.generation_weights(bundle.views[NodeClass.CONCEPT], store, NodeClass.CONCEPT)

        assert np.max(np.abs(weights.sum(axis=1) - 1.0)) < 1e-12

    def test_generate_is_weighted_sum(self, bundle_and_store):
        """Test the fused latent equals the weighted sum of views."""
        bundle, store = bundle_and_store
        views = bundle.views[NodeClass.STUDENT]

        fused = cagt.generate(bundle, store)[NodeClass.STUDENT].value
        weights = cagt.generation_weights(views, store, NodeClass.STUDENT)

        expected = sum(weights[:, [index]] * view.value for index, view in enumerate(views))
        assert np.allclose(fused, expected, atol=1e-12)


class TestTransformation:
    """Test suite for project, project_per_concept and transform."""

    @pytest.fixture
    def store(self):
        """Return transformation parameters for d = 4 and Z = 3."""
        rng = np.random.default_rng(5)
        store = ParameterStore()
        for role in cagt.TRANSFORM_ROLES:
            store.register(f"transform.{role}.weight", rng.normal(size=(4, 3)))
            store.register(f"transform.{role}.bias", rng.normal(size=(1, 3)))
        return store

    def test_degenerate_affine(self, store):
        """Test a zero weight outputs the bias for any input."""
        store["transform.student.weight"].value = np.zeros((4, 3))
        bias = store["transform.student.bias"].value

        out = cagt.project(constant(np.random.default_rng(0).normal(size=(5, 4))), store, "student")

        assert np.array_equal(out.value, np.repeat(bias, 5, axis=0))

    def test_zero_right_latent(self, store):
        """Test h_r = 0 annihilates the exercise pre-image."""
        h_w = constant(np.ones((2, 4)))

        _, exercise = cagt.transform(constant(np.ones((2, 4))), constant(np.zeros((2, 4))), h_w, store)

        assert np.array_equal(exercise.value, np.repeat(store["transform.exercise.bias"].value, 2, axis=0))

    def test_matches_numpy(self, store):
        """Test the affine maps against direct matrix arithmetic."""
        rng = np.random.default_rng(9)
        h_s, h_r, h_w = (rng.normal(size=(2, 4)) for _ in range(3))

        out_s, out_e = cagt.transform(constant(h_s), constant(h_r), constant(h_w), store)

        assert np.allclose(out_s.value, h_s @ store["transform.student.weight"].value
                           + store["transform.student.bias"].value)
        assert np.allclose(out_e.value, (h_r * h_w) @ store["transform.exercise.weight"].value
                           + store["transform.exercise.bias"].value)

    def test_no_concept_parameters(self, toy_dataset):
        """Test only the student and exercise maps are registered."""
        store = initialized_store(graph_of(toy_dataset))

        assert sorted(name for name in store if name.startswith("transform.")) == [
            "transform.exercise.bias",
            "transform.exercise.weight",
            "transform.student.bias",
            "transform.student.weight",
        ]

    def test_project_per_concept(self, store):
        """Test column z uses concept z as the Hadamard context."""
        rng = np.random.default_rng(2)
        x, concepts = rng.normal(size=(5, 4)), rng.normal(size=(3, 4))

        out = cagt.project_per_concept(constant(x), constant(concepts), store, "student").value

        for z in range(3):
            column = cagt.project(constant(x * concepts[z]), store, "student").value[:, z]
            assert np.allclose(out[:, z], column, atol=1e-12)

    def test_project_per_concept_without_transform(self):
        """Test the identity map keeps the diagonal of the concept rows."""
        x, concepts = np.arange(6.0).reshape(2, 3), np.arange(9.0).reshape(3, 3)

        out = cagt.project_per_concept(constant(x), constant(concepts), ParameterStore(), "student").value

        assert np.allclose(out, x * np.diag(concepts))

    def test_identity_without_transform(self):
        """Test project passes latents through when transforms are disabled."""
        x = constant(np.ones((2, 3)))

        assert cagt.project(x, ParameterStore(), "student") is x
