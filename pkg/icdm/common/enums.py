from enum import Enum


class SplitMode(str, Enum):
    """Evaluation protocols for partitioning response logs"""
    TRANSDUCTIVE = "transductive"
    INDUCTIVE = "inductive"


class NodeClass(str, Enum):
    """Node classes of the student-centered graph"""
    STUDENT = "student"
    RIGHT = "right"
    WRONG = "wrong"
    CONCEPT = "concept"


class Relation(str, Enum):
    """Edge relations of the student-centered graph"""
    RIGHT = "right"
    WRONG = "wrong"
    RELATED = "related"
    DESIRED = "desired"


class Aggregator(str, Enum):
    MEAN = "mean"


class IFKind(str, Enum):
    """Interaction functions mapping (Mas, Diff, q_mask) to a probability"""
    MIRT = "mirt"
    MONO_MLP = "mono_mlp"
    GLIF = "glif"


class EvalMetric(str, Enum):
    AUC = "auc"
