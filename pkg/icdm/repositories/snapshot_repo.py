"""
Binary snapshot persistence.

Layout (little-endian): 8-byte magic, uint32 format version, uint64 header
length, UTF-8 JSON header with sorted keys, then the raw arrays listed in the
header's array table.
"""
import hashlib
import json
import struct
from typing import Any, Dict, List, Tuple

import numpy as np

from icdm.common.exceptions.exceptions import IcdmBaseException, SnapshotFormatException
from icdm.common.logger import get_logger
from icdm.common.schemas import TrainConfig
from icdm.data.dataset import Dataset
from icdm.model.snapshot import ModelSnapshot
from icdm.repositories.base_repo import BaseRepo

logger = get_logger()

MAGIC = b"ICDMSNAP"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<8sIQ")
_DTYPES = {"f8": np.dtype("<f8"), "i8": np.dtype("<i8")}

PARAM_PREFIX = "param/"


class SnapshotRepo(BaseRepo):
    """Reads and writes ModelSnapshot files."""

    # --- Encoding ---

    @staticmethod
    def _arrays(snapshot: ModelSnapshot) -> List[Tuple[str, str, np.ndarray]]:
        train = snapshot.train
        q_rows, q_cols = np.nonzero(train.q_matrix)
        arrays = [(PARAM_PREFIX + name, "f8", value) for name, value in snapshot.params.items()]
        arrays += [
            ("train/students", "i8", train.students),
            ("train/exercises", "i8", train.exercises),
            ("train/scores", "i8", train.scores),
            ("q/exercises", "i8", q_rows),
            ("q/concepts", "i8", q_cols),
            ("ids/students", "i8", train.student_ids),
            ("ids/exercises", "i8", train.exercise_ids),
            ("ids/concepts", "i8", train.concept_ids),
        ]
        return arrays

    def to_bytes(self, snapshot: ModelSnapshot) -> bytes:
        table, blobs, offset = [], [], 0
        for name, dtype, value in self._arrays(snapshot):
            data = np.ascontiguousarray(value, dtype=_DTYPES[dtype])
            raw = data.tobytes()
            table.append({"name": name, "dtype": dtype, "shape": list(data.shape), "offset": offset})
            blobs.append(raw)
            offset += len(raw)

        train = snapshot.train
        header = {
            "arrays": table,
            "config": snapshot.config.model_dump(mode="json"),
            "counts": {
                "students": train.n_students,
                "exercises": train.n_exercises,
                "concepts": train.n_concepts,
                "logs": train.n_logs,
            },
            "meta": snapshot.meta,
        }
        header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + b"".join(blobs)

    # --- Decoding ---

    def from_bytes(self, payload: bytes) -> ModelSnapshot:
        """
        Raises:
            SnapshotFormatException: On a bad magic, version or truncated body.
        """
        if len(payload) < _PREAMBLE.size:
            raise SnapshotFormatException("Snapshot is shorter than its preamble")
        magic, version, header_length = _PREAMBLE.unpack_from(payload)
        if magic != MAGIC:
            raise SnapshotFormatException("Not a snapshot file (bad magic)")
        if version != FORMAT_VERSION:
            raise SnapshotFormatException(
                f"Unsupported snapshot version {version}",
                details={"version": version, "supported": FORMAT_VERSION},
            )
        body_start = _PREAMBLE.size + header_length
        if body_start > len(payload):
            raise SnapshotFormatException("Snapshot header is truncated")
        try:
            header = json.loads(payload[_PREAMBLE.size:body_start].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SnapshotFormatException(f"Snapshot header is not valid JSON: {exc}")

        try:
            return self._assemble(header, memoryview(payload)[body_start:])
        except (KeyError, IndexError, TypeError, ValueError, IcdmBaseException) as exc:
            if isinstance(exc, SnapshotFormatException):
                raise
            raise SnapshotFormatException(f"Snapshot content is inconsistent: {exc}")

    def _assemble(self, header: Dict[str, Any], body: memoryview) -> ModelSnapshot:
        arrays = self._decode_arrays(header, body)
        params = {
            name[len(PARAM_PREFIX):]: value
            for name, value in arrays.items()
            if name.startswith(PARAM_PREFIX)
        }
        counts = header["counts"]
        q_matrix = np.zeros((counts["exercises"], counts["concepts"]), dtype=np.int8)
        q_matrix[arrays["q/exercises"], arrays["q/concepts"]] = 1
        train = Dataset(
            students=arrays["train/students"],
            exercises=arrays["train/exercises"],
            scores=arrays["train/scores"],
            q_matrix=q_matrix,
            student_ids=arrays["ids/students"],
            exercise_ids=arrays["ids/exercises"],
            concept_ids=arrays["ids/concepts"],
        )
        return ModelSnapshot(
            params=params,
            train=train,
            config=TrainConfig.model_validate(header["config"]),
            meta=header.get("meta", {}),
        )

    @staticmethod
    def _decode_arrays(header: Dict[str, Any], body: memoryview) -> Dict[str, np.ndarray]:
        arrays: Dict[str, np.ndarray] = {}
        for entry in header.get("arrays", []):
            dtype = _DTYPES.get(entry.get("dtype"))
            if dtype is None:
                raise SnapshotFormatException(f"Unsupported array dtype {entry.get('dtype')!r}")
            shape = tuple(int(size) for size in entry["shape"])
            start = int(entry["offset"])
            end = start + int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
            if start < 0 or end > len(body):
                raise SnapshotFormatException(
                    f"Array '{entry['name']}' runs past the end of the snapshot",
                    details={"name": entry["name"]},
                )
            values = np.frombuffer(body[start:end], dtype=dtype).reshape(shape)
            arrays[entry["name"]] = values.astype(dtype.newbyteorder("="))
        for required in ("train/students", "train/exercises", "train/scores", "q/exercises", "q/concepts",
                         "ids/students", "ids/exercises", "ids/concepts"):
            if required not in arrays:
                raise SnapshotFormatException(f"Snapshot lacks array '{required}'")
        return arrays

    # --- Files ---

    def save(self, snapshot: ModelSnapshot, path: str) -> str:
        payload = self.to_bytes(snapshot)
        with self.atomic_write(path, mode="wb") as handle:
            handle.write(payload)
        digest = hashlib.sha256(payload).hexdigest()
        logger.info("snapshot_saved", path=path, bytes=len(payload), sha256=digest)
        return digest

    def load(self, path: str) -> ModelSnapshot:
        payload = self.require_file(path).read_bytes()
        snapshot = self.from_bytes(payload)
        logger.info("snapshot_loaded", path=path, parameters=len(snapshot.params), logs=snapshot.train.n_logs)
        return snapshot

    def file_digest(self, path: str) -> str:
        return hashlib.sha256(self.require_file(path).read_bytes()).hexdigest()
