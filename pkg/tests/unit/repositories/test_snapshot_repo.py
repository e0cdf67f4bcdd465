"""Unit tests for the SnapshotRepo class."""
import numpy as np
import pytest

from icdm.common.exceptions.exceptions import DataFileNotFoundException, SnapshotFormatException
from icdm.repositories.snapshot_repo import _PREAMBLE, MAGIC, SnapshotRepo


class TestSnapshotRepo:
    """Test suite for SnapshotRepo class."""

    @pytest.fixture
    def repo(self):
        """Return a SnapshotRepo instance."""
        return SnapshotRepo()

    @pytest.fixture
    def snapshot(self, snapshot_factory):
        """Return an untrained snapshot with run metadata."""
        snapshot = snapshot_factory()
        snapshot.meta = {"best_epoch": 2, "best_valid_auc": 0.75}
        return snapshot

    def test_to_bytes_deterministic(self, repo, snapshot):
        """Test the encoding is byte-stable."""
        assert repo.to_bytes(snapshot) == repo.to_bytes(snapshot)

    def test_round_trip(self, repo, snapshot):
        """Test parameters, logs and predictions survive encoding bit for bit."""
        restored = repo.from_bytes(repo.to_bytes(snapshot))

        assert list(restored.params) == list(snapshot.params)
        for name, value in snapshot.params.items():
            assert np.array_equal(restored.params[name], value)
        assert restored.params_digest() == snapshot.params_digest()
        assert restored.config == snapshot.config
        assert restored.meta == snapshot.meta
        assert np.array_equal(restored.train.q_matrix, snapshot.train.q_matrix)

        train = snapshot.train
        expected = snapshot.build_model().predict(train.students, train.exercises)
        assert np.array_equal(restored.build_model().predict(train.students, train.exercises), expected)

    def test_save_and_load(self, repo, snapshot, tmp_path):
        """Test the returned digest matches the file."""
        path = str(tmp_path / "model.snap")

        digest = repo.save(snapshot, path)

        assert digest == repo.file_digest(path)
        assert repo.load(path).params_digest() == snapshot.params_digest()

    def test_load_missing(self, repo, tmp_path):
        """Test loading a path that does not exist."""
        with pytest.raises(DataFileNotFoundException):
            repo.load(str(tmp_path / "absent.snap"))

    def test_bad_magic(self, repo, snapshot):
        """Test a file with foreign leading bytes."""
        payload = repo.to_bytes(snapshot)

        with pytest.raises(SnapshotFormatException):
            repo.from_bytes(b"NOTASNAP" + payload[8:])

    def test_truncated_payload(self, repo, snapshot):
        """Test a file cut short inside the array section."""
        payload = repo.to_bytes(snapshot)

        with pytest.raises(SnapshotFormatException):
            repo.from_bytes(payload[:-16])

    def test_truncated_preamble(self, repo):
        """Test a file shorter than its preamble."""
        with pytest.raises(SnapshotFormatException):
            repo.from_bytes(MAGIC)

    def test_unsupported_version(self, repo, snapshot):
        """Test a newer format version is rejected."""
        payload = repo.to_bytes(snapshot)
        _, _, header_length = _PREAMBLE.unpack_from(payload)

        with pytest.raises(SnapshotFormatException) as exc_info:
            repo.from_bytes(_PREAMBLE.pack(MAGIC, 2, header_length) + payload[_PREAMBLE.size:])

        assert exc_info.value.details["version"] == 2
