from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from icdm.common.enums import Aggregator, EvalMetric, IFKind, SplitMode


def _split_csv_ints(value):
    if isinstance(value, str):
        return [int(part) for part in value.split(",") if part.strip()]
    return value


class SplitSpec(BaseModel):
    """How to partition a dataset into train/test (and observed/unseen students)."""
    mode: SplitMode = SplitMode.TRANSDUCTIVE
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    p_n: Optional[float] = Field(None, gt=0.0, lt=1.0)
    seed: int = 0


class AggregationConfig(BaseModel):
    """Neighbor aggregation settings shared by training and inference."""
    k: int = Field(3, ge=1)
    alpha: float = Field(0.1, ge=0.0)
    beta: float = Field(0.2, ge=0.0)
    aggregator: Aggregator = Aggregator.MEAN
    training_mode: bool = False
    desired_edges: bool = True

    def drop_rate(self, k: int) -> float:
        """Layer-wise dropout rate p(k) = alpha + beta * k, clamped to [0, 1)."""
        rate = self.alpha + self.beta * k
        return min(max(rate, 0.0), 1.0 - 1e-12)

    def depth_weights(self) -> List[float]:
        """Descending accumulation coefficients 1/(k+1) for k = 0..K."""
        return [1.0 / (k + 1) for k in range(self.k + 1)]


class TrainConfig(BaseModel):
    """Hyperparameters for one training run."""
    batch_size: int = Field(256, ge=1)
    epochs: int = Field(50, ge=1)
    lr: float = Field(1e-3, gt=0.0)
    lambda_reg: float = Field(1e-3, ge=0.0, le=1.0)
    patience: int = Field(10, ge=1)
    eval_metric: EvalMetric = EvalMetric.AUC
    seed: int = 0
    valid_fraction: float = Field(0.1, gt=0.0, lt=1.0)

    # CAGT
    k: int = Field(3, ge=1)
    alpha: float = Field(0.1, ge=0.0)
    beta: float = Field(0.2, ge=0.0)
    aggregator: Aggregator = Aggregator.MEAN
    d: int = Field(64, ge=1)
    desired_edges: bool = True
    transform: bool = True

    # Interaction function
    if_kind: IFKind = IFKind.GLIF
    hidden_dims: List[int] = Field(default_factory=lambda: [512, 256])

    @field_validator("hidden_dims", mode="before")
    @classmethod
    def parse_hidden_dims(cls, value):
        return _split_csv_ints(value)

    @field_validator("hidden_dims")
    @classmethod
    def check_hidden_dims(cls, value: List[int]) -> List[int]:
        if not value or any(width < 1 for width in value):
            raise ValueError("hidden_dims must list at least one positive width")
        return value

    def aggregation(self, training: bool = False) -> AggregationConfig:
        return AggregationConfig(
            k=self.k,
            alpha=self.alpha,
            beta=self.beta,
            aggregator=self.aggregator,
            training_mode=training,
            desired_edges=self.desired_edges,
        )


class SynthConfig(BaseModel):
    """DINA generator settings."""
    n_students: int = Field(200, ge=1)
    n_exercises: int = Field(50, ge=1)
    n_concepts: int = Field(6, ge=1)
    q_density: float = Field(2.0, ge=1.0)
    guess: float = Field(0.0, ge=0.0, lt=0.5)
    slip: float = Field(0.0, ge=0.0, lt=0.5)
    logs_per_student: int = Field(50, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def check_density(self):
        if self.q_density > self.n_concepts:
            raise ValueError("q_density cannot exceed n_concepts")
        return self
