"""
Model commands: train, eval, infer, bench.
"""
from typing import Optional

import click
import numpy as np
import pandas as pd

from icdm.common.schemas import TrainConfig
from icdm.commands.output import emit_report, seeded
from icdm.core.config import load_config_file, parse_config
from icdm.data.new_students import NewStudentBatch
from icdm.repositories.dataset_repo import DatasetRepo, load_dataset
from icdm.repositories.snapshot_repo import SnapshotRepo
from icdm.schemas.reports import InferReport, TrainReport
from icdm.services.bench_service import BenchService
from icdm.services.evaluation_service import EvaluationService
from icdm.services.inductive_service import InductiveService
from icdm.services.training_service import TrainingService

PREDICTION_COLUMNS = ["student_id", "exercise_id", "probability"]


@click.command("train")
@click.option("--logs", "logs_path", required=True)
@click.option("--q", "q_path", required=True)
@click.option("--config", "config_path", default=None, help="TrainConfig key = value file.")
@click.option("--valid", "valid_path", default=None, help="Validation logs; carved from --logs when absent.")
@click.option("--out", required=True, help="Snapshot file to write.")
@click.option("--report", default=None, help="Write the JSON report here instead of stdout.")
@click.pass_context
def train(
        ctx: click.Context,
        logs_path: str,
        q_path: str,
        config_path: Optional[str],
        valid_path: Optional[str],
        out: str,
        report: Optional[str],
):
    """Train a model and save its snapshot."""
    config = load_config_file(config_path, TrainConfig) if config_path else parse_config({}, TrainConfig)
    config = seeded(config, ctx.obj["seed"])

    repo = DatasetRepo()
    dataset = load_dataset(logs_path, q_path)
    valid = None
    if valid_path is not None:
        valid = DatasetRepo.build(repo.read_logs(valid_path), dataset.q_frame())
        valid = valid.align_students(dataset)

    service = TrainingService(config)
    snapshot = service.train(dataset, valid)
    digest = SnapshotRepo().save(snapshot, out)
    emit_report(
        TrainReport(
            snapshot=out,
            sha256=digest,
            best_epoch=snapshot.meta["best_epoch"],
            best_valid_auc=snapshot.meta["best_valid_auc"],
            epochs_run=snapshot.meta["epochs_run"],
            history=service.history,
        ),
        report,
    )


@click.command("eval")
@click.option("--snapshot", "snapshot_path", required=True)
@click.option("--test", "test_path", required=True)
@click.option("--evidence", "evidence_path", default=None, help="Logs of students absent from the snapshot.")
@click.option("--doa", "with_doa", is_flag=True, help="Report DOA and DOA@10.")
@click.option("--inconsistency", "with_inconsistency", is_flag=True)
@click.option("--truth", "truth_path", default=None, help="True mastery CSV (student_id,concept_id,mastery) for oracle DOA.")
@click.option("--out", default=None)
def evaluate(
        snapshot_path: str,
        test_path: str,
        evidence_path: Optional[str],
        with_doa: bool,
        with_inconsistency: bool,
        truth_path: Optional[str],
        out: Optional[str],
):
    """Prediction and diagnosis quality on held-out logs."""
    repo = DatasetRepo()
    snapshot = SnapshotRepo().load(snapshot_path)
    test = repo.read_logs(test_path)
    evidence = repo.read_logs(evidence_path) if evidence_path else None
    truth = repo.read_truth(truth_path) if truth_path else None
    result = EvaluationService(snapshot).evaluate(test, evidence, with_doa, with_inconsistency, truth)
    emit_report(result, out)


@click.command("infer")
@click.option("--snapshot", "snapshot_path", required=True)
@click.option("--logs", "logs_path", required=True, help="Logs of new students.")
@click.option("--out", required=True, help="Mastery CSV (student_id,concept_id,mastery).")
@click.option("--targets", "targets_path", default=None, help="Pairs CSV (student_id,exercise_id) to score.")
@click.option("--out-predictions", default=None)
def infer(
        snapshot_path: str,
        logs_path: str,
        out: str,
        targets_path: Optional[str],
        out_predictions: Optional[str],
):
    """Diagnose new students without updating any parameter."""
    if (targets_path is None) != (out_predictions is None):
        raise click.UsageError("--targets and --out-predictions must be given together")

    repo = DatasetRepo()
    snapshot = SnapshotRepo().load(snapshot_path)
    batch = NewStudentBatch.from_logs(repo.read_logs(logs_path), snapshot.train)
    targets = repo.read_targets(targets_path) if targets_path is not None else None
    service = InductiveService(snapshot)
    mastery = service.infer_mastery(batch).to_frame()

    # Nothing is written until every input has been validated.
    predictions = None
    if targets is not None:
        probabilities = service.predict_new(
            batch, targets["student_id"].to_numpy(), targets["exercise_id"].to_numpy()
        )
        predictions = pd.DataFrame(
            {
                "student_id": targets["student_id"].to_numpy(dtype=np.int64),
                "exercise_id": targets["exercise_id"].to_numpy(dtype=np.int64),
                "probability": probabilities,
            },
            columns=PREDICTION_COLUMNS,
        )

    repo.write_frame(mastery, out)
    if predictions is not None:
        repo.write_frame(predictions, out_predictions)

    emit_report(
        InferReport(
            students=batch.n_students,
            logs=batch.n_logs,
            mastery_file=out,
            predictions_file=out_predictions,
            n_predictions=0 if predictions is None else len(predictions),
        )
    )


@click.command("bench")
@click.option("--snapshot", "snapshot_path", required=True)
@click.option("--logs", "logs_path", required=True, help="Logs of new students.")
@click.option("--repeats", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--sweep", is_flag=True, help="Also time four nested batch sizes.")
@click.option("--retrain-epochs", type=click.IntRange(min=1), default=None,
              help="Also time retraining from scratch for this many epochs.")
@click.option("--out", default=None)
def bench(
        snapshot_path: str,
        logs_path: str,
        repeats: int,
        sweep: bool,
        retrain_epochs: Optional[int],
        out: Optional[str],
):
    """Inductive inference latency."""
    snapshot = SnapshotRepo().load(snapshot_path)
    batch = NewStudentBatch.from_logs(DatasetRepo().read_logs(logs_path), snapshot.train)
    emit_report(BenchService(snapshot).run(batch, repeats, sweep, retrain_epochs), out)
