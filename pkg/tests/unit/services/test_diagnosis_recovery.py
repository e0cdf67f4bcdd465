"""Diagnosis quality of models trained on noiseless DINA data."""
import numpy as np
import pandas as pd
import pytest
from sklearn.metrics.pairwise import cosine_similarity

from icdm.common.enums import IFKind
from icdm.data.new_students import NewStudentBatch
from icdm.metrics.diagnosis import inconsistency, oracle_doa
from icdm.services.inductive_service import InductiveService


class TestDiagnosisRecovery:
    """Test suite for mastery recovered by trained models."""

    @pytest.mark.parametrize("kind", list(IFKind))
    def test_trained_students_recover_true_mastery(self, trained_snapshots, recovery, kind):
        """Test trained profiles rank masters above non-masters."""
        _, true_mastery = recovery
        snapshot = trained_snapshots[kind]

        mastery = snapshot.build_model().mastery_profile()

        assert oracle_doa(mastery, true_mastery[snapshot.train.student_ids]) > 0.75

    @pytest.mark.parametrize("kind", list(IFKind))
    def test_unseen_students_recover_true_mastery(self, trained_snapshots, recovery, recovery_unseen_logs, kind):
        """Test inferred profiles of unseen students rank masters above non-masters."""
        _, true_mastery = recovery
        snapshot = trained_snapshots[kind]
        batch = NewStudentBatch.from_logs(recovery_unseen_logs, snapshot.train)

        profile = InductiveService(snapshot).infer_mastery(batch)

        assert oracle_doa(profile.mastery, true_mastery[profile.student_ids]) > 0.6

    def test_duplicate_of_trained_student(self, trained_snapshots):
        """Test a new student repeating a trained student's logs gets a matching profile."""
        snapshot = trained_snapshots[IFKind.GLIF]
        trained_logs = snapshot.train.logs_frame()
        chosen = snapshot.train.student_ids[:8]
        clones = trained_logs[trained_logs["student_id"].isin(chosen)].assign(
            student_id=lambda frame: frame["student_id"] + 1000
        )

        inferred = InductiveService(snapshot).infer_mastery(NewStudentBatch.from_logs(clones, snapshot.train))
        trained = snapshot.build_model().mastery_profile()[:8]

        similarity = np.diag(cosine_similarity(trained, inferred.mastery))
        assert similarity.mean() >= 0.9

    def test_flipping_right_to_wrong(self, trained_snapshots, recovery_unseen_logs):
        """Test turning a right answer wrong lowers mastery on its concept."""
        snapshot = trained_snapshots[IFKind.MONO_MLP]
        service = InductiveService(snapshot)
        exercise_index = {int(raw): index for index, raw in enumerate(snapshot.train.exercise_ids)}
        base = service.infer_mastery(NewStudentBatch.from_logs(recovery_unseen_logs, snapshot.train))

        changes = []
        for row, student_id in enumerate(base.student_ids):
            logs = recovery_unseen_logs[recovery_unseen_logs["student_id"] == student_id]
            right = logs.index[logs["score"] == 1]
            if len(right) == 0:
                continue
            flipped = logs.copy()
            flipped.loc[right[0], "score"] = 0
            concepts = np.flatnonzero(snapshot.train.q_matrix[exercise_index[int(logs.loc[right[0], "exercise_id"])]])
            after = service.infer_mastery(NewStudentBatch.from_logs(flipped, snapshot.train)).mastery[0]
            changes.extend(after[concepts] - base.mastery[row, concepts])

        assert len(changes) > 0
        assert np.mean(changes) < 0.0

    def test_duplicated_logs_are_fully_consistent(self, trained_snapshots, recovery_unseen_logs):
        """Test each unseen student and its copy contribute no inconsistency."""
        snapshot = trained_snapshots[IFKind.GLIF]
        copies = recovery_unseen_logs.assign(student_id=recovery_unseen_logs["student_id"] + 1000)
        batch = NewStudentBatch.from_logs(pd.concat([recovery_unseen_logs, copies], ignore_index=True), snapshot.train)

        profile = InductiveService(snapshot).infer_mastery(batch)

        assert inconsistency(profile.mastery, batch.rating_matrix()) == 0.0
