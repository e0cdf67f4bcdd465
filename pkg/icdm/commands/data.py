"""
Dataset commands: stats, synth, split, dump-graph.
"""
from pathlib import Path
from typing import Optional

import click
import numpy as np
import pandas as pd

from icdm.common.enums import SplitMode
from icdm.common.schemas import SplitSpec, SynthConfig
from icdm.commands.output import emit_report, seeded
from icdm.core.config import load_config_file, parse_config
from icdm.data.splits import split_inductive, split_transductive
from icdm.graph.scg import build_involvement, build_scg
from icdm.repositories.dataset_repo import DatasetRepo, load_dataset
from icdm.schemas.reports import GraphReport, SplitReport
from icdm.synth.dina import generate, truth_frame

EDGE_COLUMNS = ["source_class", "source_id", "target_class", "target_id"]


@click.command("stats")
@click.option("--logs", "logs_path", required=True, help="Response logs CSV (student_id,exercise_id,score).")
@click.option("--q", "q_path", required=True, help="Q-matrix CSV (exercise_id,concept_id).")
@click.option("--out", default=None, help="Write the JSON report here instead of stdout.")
def stats(logs_path: str, q_path: str, out: Optional[str]):
    """Summary statistics of a dataset."""
    emit_report(load_dataset(logs_path, q_path).stats(), out)


@click.command("synth")
@click.option("--config", "config_path", default=None, help="SynthConfig key = value file.")
@click.option("--out-logs", required=True)
@click.option("--out-q", required=True)
@click.option("--out-truth", required=True, help="Hidden mastery CSV (student_id,concept_id,mastery).")
@click.pass_context
def synth(ctx: click.Context, config_path: Optional[str], out_logs: str, out_q: str, out_truth: str):
    """Generate a DINA dataset with known mastery."""
    config = load_config_file(config_path, SynthConfig) if config_path else parse_config({}, SynthConfig)
    config = seeded(config, ctx.obj["seed"])
    dataset, true_mastery = generate(config)

    repo = DatasetRepo()
    repo.save(dataset, out_logs, out_q)
    repo.write_frame(truth_frame(dataset, true_mastery), out_truth)
    emit_report(dataset.stats())


@click.command("split")
@click.option("--logs", "logs_path", required=True)
@click.option("--q", "q_path", required=True)
@click.option("--mode", type=click.Choice([mode.value for mode in SplitMode]), default=SplitMode.TRANSDUCTIVE.value)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--p-n", "p_n", type=float, default=None, help="Share of students held out as unseen (inductive).")
@click.option("--out-dir", required=True)
@click.pass_context
def split(
        ctx: click.Context,
        logs_path: str,
        q_path: str,
        mode: str,
        test_fraction: float,
        p_n: Optional[float],
        out_dir: str,
):
    """Write train/test partitions for either evaluation protocol."""
    spec = parse_config({"mode": mode, "test_fraction": test_fraction, "p_n": p_n}, SplitSpec)
    spec = seeded(spec, ctx.obj["seed"])
    dataset = load_dataset(logs_path, q_path)

    if spec.mode is SplitMode.TRANSDUCTIVE:
        parts = dict(zip(("train.csv", "test.csv"), split_transductive(dataset, spec)))
        unseen = None
    else:
        parts = dict(zip(("train_observed.csv", "train_unseen.csv", "test.csv"), split_inductive(dataset, spec)))
        unseen = int(np.unique(parts["train_unseen.csv"].students).size)

    repo = DatasetRepo()
    files = []
    for name, part in parts.items():
        path = str(Path(out_dir) / name)
        repo.write_frame(part.logs_frame(), path)
        files.append(path)
    emit_report(
        SplitReport(
            mode=spec.mode.value,
            files=files,
            logs=[part.n_logs for part in parts.values()],
            unseen_students=unseen,
        )
    )


@click.command("dump-graph")
@click.option("--logs", "logs_path", required=True)
@click.option("--q", "q_path", required=True)
@click.option("--out-dir", required=True, help="Directory receiving one <relation>.csv edge list per relation.")
@click.option("--no-desired", is_flag=True, help="Omit student-concept Desired edges.")
def dump_graph(logs_path: str, q_path: str, out_dir: str, no_desired: bool):
    """Write the student-centered graph as per-relation edge lists with raw ids."""
    dataset = load_dataset(logs_path, q_path)
    ratings = dataset.rating_matrix()
    q = dataset.q_sparse()
    graph = build_scg(ratings, q, build_involvement(ratings, q), desired_edges=not no_desired)

    raw_ids = {
        "student": dataset.student_ids,
        "right": dataset.exercise_ids,
        "wrong": dataset.exercise_ids,
        "concept": dataset.concept_ids,
    }
    repo = DatasetRepo()
    counts, files = {}, []
    for name, source_class, target_class, sources, targets in graph.edge_lists():
        frame = pd.DataFrame(
            {
                "source_class": source_class.value,
                "source_id": raw_ids[source_class.value][sources],
                "target_class": target_class.value,
                "target_id": raw_ids[target_class.value][targets],
            },
            columns=EDGE_COLUMNS,
        )
        path = str(Path(out_dir) / f"{name}.csv")
        repo.write_frame(frame, path)
        counts[name] = len(frame)
        files.append(path)
    emit_report(
        GraphReport(
            students=graph.n_students,
            exercises=graph.n_exercises,
            concepts=graph.n_concepts,
            edges=counts,
            files=files,
        )
    )
