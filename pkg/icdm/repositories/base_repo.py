import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator

from icdm.common.exceptions.exceptions import DataFileNotFoundException


class BaseRepo:
    """Base repository providing atomic write context for derived repositories."""

    @staticmethod
    def require_file(path: str) -> Path:
        file_path = Path(path)
        if not file_path.is_file():
            raise DataFileNotFoundException(str(file_path))
        return file_path

    @contextmanager
    def atomic_write(self, path: str, mode: str = "w") -> Iterator[IO]:
        """
        Write to a temporary sibling file, then rename over ``path``.
        The target is never left partially written.
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
        try:
            text_options = {} if "b" in mode else {"newline": "", "encoding": "utf-8"}
            with os.fdopen(fd, mode, **text_options) as handle:
                yield handle
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
