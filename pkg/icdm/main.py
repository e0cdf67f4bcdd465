import sys
from typing import List, Optional

import click
from threadpoolctl import threadpool_limits

from icdm.commands import COMMANDS
from icdm.common.exceptions.exceptions_handler import handle_exception
from icdm.common.logger import get_logger, setup_logging
from icdm.core.config import get_settings

"""
GLOBALS
"""
settings = get_settings()
logger = get_logger()


@click.group(name=settings.APP_NAME)
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
@click.option("--seed", type=int, default=None, help="Override the seed of every config.")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="BLAS/OpenMP thread limit.")
@click.option("--quiet", is_flag=True, help="Only log warnings and errors.")
@click.pass_context
def cli(ctx: click.Context, seed: Optional[int], threads: Optional[int], quiet: bool):
    """Inductive cognitive diagnosis: train, evaluate and diagnose new students."""
    setup_logging(settings.LOG_LEVEL, quiet=quiet)
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.with_resource(threadpool_limits(limits=threads or settings.NUM_THREADS))
    logger.info(
        "command_started",
        service=settings.APP_NAME,
        version=settings.APP_VERSION,
        environment=settings.ENVIRONMENT,
        command=ctx.invoked_subcommand,
    )


for command in COMMANDS:
    cli.add_command(command)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Execute the command line and return its exit code.

    Errors are reported as a JSON envelope on stderr.
    """
    try:
        cli.main(args=argv, prog_name=settings.APP_NAME, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except Exception as exc:
        return handle_exception(exc)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
