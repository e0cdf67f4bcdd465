import json
from typing import Optional, TypeVar

import click
from pydantic import BaseModel

from icdm.repositories.base_repo import BaseRepo

Report = TypeVar("Report", bound=BaseModel)


def emit_report(report: BaseModel, out: Optional[str] = None) -> None:
    """JSON report to ``out`` (atomically) or stdout."""
    text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)
    if out is None:
        click.echo(text)
        return
    with BaseRepo().atomic_write(out) as handle:
        handle.write(text + "\n")


def seeded(config: Report, seed: Optional[int]) -> Report:
    """Apply the global --seed override to a config model with a ``seed`` field."""
    if seed is None:
        return config
    return config.model_copy(update={"seed": seed})
