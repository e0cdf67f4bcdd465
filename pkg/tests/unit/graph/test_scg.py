"""Unit tests for the student-centered graph."""
import numpy as np
import pytest
from scipy import sparse

from icdm.common.enums import NodeClass, Relation
from icdm.common.exceptions.exceptions import DataValidationException, UsageException
from icdm.graph.adjacency import Adjacency
from icdm.graph.bipartite import BipartiteGraph
from icdm.graph.scg import build_involvement, build_scg, neighbors


def ratings(rows):
    return sparse.csr_array(np.asarray(rows, dtype=np.int8))


class TestInvolvement:
    """Test suite for build_involvement."""

    def test_practiced_concept_is_involved(self):
        """Test a student answering an exercise involves its concept."""
        R = ratings([[0, 0, 0], [0, 0, -1]])
        Q = sparse.csr_array(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))

        involvement = build_involvement(R, Q).toarray()

        assert involvement[1, 3] == 1
        assert involvement.sum() == 1

    def test_no_interactions(self):
        """Test an all-zero rating matrix."""
        involvement = build_involvement(ratings([[0, 0]]), sparse.csr_array(np.eye(2)))

        assert involvement.nnz == 0

    def test_involvement_is_binary(self):
        """Test two exercises sharing a concept still give 1."""
        Q = sparse.csr_array(np.array([[1], [1]]))

        involvement = build_involvement(ratings([[1, -1]]), Q).toarray()

        assert involvement.tolist() == [[1]]

    def test_shape_mismatch(self):
        """Test rating columns must equal Q rows."""
        with pytest.raises(DataValidationException):
            build_involvement(ratings([[1, 1]]), sparse.csr_array(np.eye(3)))


class TestStudentCenteredGraph:
    """Test suite for build_scg and neighbors."""

    @pytest.fixture
    def toy_graph(self, toy_dataset):
        """Return the graph of the toy dataset."""
        R = toy_dataset.rating_matrix()
        Q = toy_dataset.q_sparse()
        return build_scg(R, Q, build_involvement(R, Q))

    def test_right_and_wrong_edges(self):
        """Test one +1 and one -1 entry give one edge each."""
        R = ratings([[1, 0], [0, -1]])
        Q = sparse.csr_array(np.array([[1], [1]]))

        graph = build_scg(R, Q, build_involvement(R, Q))

        assert graph.edge_count(Relation.RIGHT) == 1
        assert graph.edge_count(Relation.WRONG) == 1

    def test_related_edges_duplicated(self):
        """Test Q nonzeros link both exercise patterns."""
        Q = sparse.csr_array(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 0]]))
        R = ratings([[1, -1, 1]])

        graph = build_scg(R, Q, build_involvement(R, Q))

        assert graph.adj(NodeClass.RIGHT, Relation.RELATED).nnz == 5
        assert graph.adj(NodeClass.WRONG, Relation.RELATED).nnz == 5
        assert graph.edge_count(Relation.RELATED) == 10

    def test_edge_total_matches_logs(self, toy_dataset, toy_graph):
        """Test Right plus Wrong edges equal the number of logs."""
        total = toy_graph.edge_count(Relation.RIGHT) + toy_graph.edge_count(Relation.WRONG)

        assert total == toy_dataset.n_logs

    def test_neighbors_of_student(self, toy_graph):
        """Test right, wrong and desired neighbors of a student."""
        assert neighbors(toy_graph, (NodeClass.STUDENT, 1), Relation.RIGHT).tolist() == [0]
        assert neighbors(toy_graph, (NodeClass.STUDENT, 1), Relation.WRONG).tolist() == [1, 2]
        assert neighbors(toy_graph, (NodeClass.STUDENT, 3), Relation.DESIRED).tolist() == [0, 1]

    def test_student_without_wrong_answers(self, toy_graph):
        """Test an empty Wrong neighborhood."""
        assert neighbors(toy_graph, (NodeClass.STUDENT, 0), Relation.WRONG).tolist() == []

    def test_exercise_related_concepts(self, toy_graph):
        """Test Related neighbors of an exercise are its Q row."""
        assert neighbors(toy_graph, (NodeClass.RIGHT, 2), Relation.RELATED).tolist() == [0, 1]
        assert neighbors(toy_graph, (NodeClass.WRONG, 0), Relation.RELATED).tolist() == [0]

    def test_reverse_direction(self, toy_graph):
        """Test exercise-to-student adjacency mirrors student-to-exercise."""
        assert neighbors(toy_graph, (NodeClass.RIGHT, 0), Relation.RIGHT).tolist() == [0, 1]
        assert neighbors(toy_graph, (NodeClass.CONCEPT, 1), Relation.DESIRED).tolist() == [0, 1, 2, 3]

    def test_two_hop_right_neighborhood(self, toy_graph):
        """Test a 2-hop Right walk against a hand enumeration."""
        right = toy_graph.adj(NodeClass.STUDENT, Relation.RIGHT)
        back = toy_graph.adj(NodeClass.RIGHT, Relation.RIGHT)

        exercises = right.neighbor_union(np.array([2]))
        students = back.neighbor_union(exercises)

        assert exercises.tolist() == [1]
        assert students.tolist() == [0, 2]

    def test_invalid_relation(self, toy_graph):
        """Test a relation undefined for the node class."""
        with pytest.raises(UsageException):
            neighbors(toy_graph, (NodeClass.STUDENT, 0), Relation.RELATED)

    def test_index_out_of_range(self, toy_graph):
        """Test a node index past the class size."""
        with pytest.raises(UsageException):
            neighbors(toy_graph, (NodeClass.CONCEPT, 2), Relation.RELATED)

    def test_without_desired_edges(self, toy_dataset):
        """Test disabling Desired edges leaves empty neighborhoods."""
        R = toy_dataset.rating_matrix()
        Q = toy_dataset.q_sparse()

        graph = build_scg(R, Q, build_involvement(R, Q), desired_edges=False)

        assert not graph.has_relation(NodeClass.STUDENT, Relation.DESIRED)
        assert neighbors(graph, (NodeClass.STUDENT, 0), Relation.DESIRED).tolist() == []
        assert graph.edge_count(Relation.DESIRED) == 0

    def test_edge_lists(self, toy_graph):
        """Test every relation appears in the edge dump."""
        names = [name for name, *_ in toy_graph.edge_lists()]

        assert names == ["right", "wrong", "related_right", "related_wrong", "desired"]


class TestAdjacency:
    """Test suite for Adjacency class."""

    @pytest.fixture
    def adjacency(self):
        """Return a 3 x 4 adjacency."""
        return Adjacency.from_pairs(np.array([0, 0, 2, 2, 2]), np.array([3, 1, 0, 1, 3]), 3, 4)

    def test_neighbors_sorted(self, adjacency):
        """Test neighbor lists are sorted."""
        assert adjacency.neighbors(0).tolist() == [1, 3]
        assert adjacency.neighbors(1).tolist() == []
        assert adjacency.degrees.tolist() == [2, 0, 3]

    def test_expand(self, adjacency):
        """Test flattening neighbor lists in the order of the requested nodes."""
        segments, targets = adjacency.expand(np.array([2, 1, 0]))

        assert segments.tolist() == [0, 0, 0, 2, 2]
        assert targets.tolist() == [0, 1, 3, 1, 3]

    def test_transpose(self, adjacency):
        """Test the reverse direction."""
        reverse = adjacency.transpose()

        assert reverse.shape == (4, 3)
        assert reverse.neighbors(3).tolist() == [0, 2]


class TestBipartiteGraph:
    """Test suite for BipartiteGraph class."""

    def test_degree_one_weight(self):
        """Test a single edge between degree-1 nodes has weight 1."""
        graph = BipartiteGraph.from_ratings(ratings([[1]]))

        assert graph.edge_weights(np.array([0]), np.array([0])).tolist() == [1.0]

    def test_edge_weights(self):
        """Test 1 / sqrt(|N_s| |N_e|)."""
        graph = BipartiteGraph.from_ratings(ratings([[1, -1], [1, 0]]))

        weights = graph.edge_weights(np.array([0, 0, 1]), np.array([0, 1, 0]))

        assert weights == pytest.approx([1 / 2, 1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_for_unseen_uses_trained_degrees(self):
        """Test unseen students read exercise degrees from training."""
        graph = BipartiteGraph.for_unseen(ratings([[1, 1]]), np.array([4, 1]))

        assert graph.exercise_adj is None
        assert graph.edge_weights(np.array([0, 0]), np.array([0, 1])) == pytest.approx(
            [1 / np.sqrt(8), 1 / np.sqrt(2)]
        )
