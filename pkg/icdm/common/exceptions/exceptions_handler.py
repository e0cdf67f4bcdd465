"""
Exception handlers for the command line.
"""
import json
import sys
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError as PydanticValidationError

from icdm.common.exceptions.exceptions import IcdmBaseException
from icdm.common.logger import get_logger
from icdm.core.config import format_validation_errors

logger = get_logger()

INTERNAL_ERROR_EXIT_CODE = 1
USAGE_EXIT_CODE = 2


def create_error_response(
        exit_code: int,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    error_response = {
        "error": {
            "code": error_code or "InternalError",
            "message": message,
            "exit_code": exit_code,
        }
    }

    if details is not None:
        error_response["error"]["details"] = details

    return error_response


def emit_error(error_response: Dict[str, Any]) -> int:
    """Write the JSON envelope to stderr and return its exit code."""
    sys.stderr.write(json.dumps(error_response, sort_keys=True, default=str) + "\n")
    return error_response["error"]["exit_code"]


def handle_app_exception(exc: IcdmBaseException) -> int:
    """Handle custom application exceptions."""
    logger.warning("command_failed", code=exc.__class__.__name__, message=exc.message)
    return emit_error(exc.to_dict())


def handle_pydantic_validation_error(exc: PydanticValidationError) -> int:
    """Handle Pydantic validation errors raised outside config parsing."""
    return emit_error(
        create_error_response(
            exit_code=INTERNAL_ERROR_EXIT_CODE,
            message="Validation error",
            error_code="ConfigException",
            details={"errors": format_validation_errors(exc)},
        )
    )


def handle_usage_error(exc: click.UsageError) -> int:
    """Handle unknown subcommands, flags and bad flag values."""
    return emit_error(
        create_error_response(
            exit_code=USAGE_EXIT_CODE,
            message=exc.format_message(),
            error_code="UsageException",
            details={"usage": exc.ctx.get_usage()} if exc.ctx is not None else None,
        )
    )


def handle_generic_exception(exc: Exception) -> int:
    """Handle anything not raised deliberately."""
    logger.error("unhandled_exception", error=str(exc), exc_info=True)
    return emit_error(
        create_error_response(
            exit_code=INTERNAL_ERROR_EXIT_CODE,
            message=f"Internal error: {exc}",
            error_code=exc.__class__.__name__,
        )
    )


def handle_exception(exc: BaseException) -> int:
    """Map an exception to an exit code, most specific handler first."""
    if isinstance(exc, IcdmBaseException):
        return handle_app_exception(exc)
    if isinstance(exc, click.UsageError):
        return handle_usage_error(exc)
    if isinstance(exc, PydanticValidationError):
        return handle_pydantic_validation_error(exc)
    return handle_generic_exception(exc)
