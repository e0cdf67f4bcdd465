from functools import lru_cache
from pathlib import Path
from typing import Dict, Type, TypeVar

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from icdm.common.exceptions.exceptions import ConfigException, DataFileNotFoundException

"""
Load environment variables from .env
"""
load_dotenv()

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


class Settings(BaseSettings):
    """
    Process-level configuration loaded from environment variables.
    """
    model_config = SettingsConfigDict(env_file=".env", env_prefix="ICDM_", extra="ignore")

    # Basic app metadata
    APP_NAME: str = "icdm"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "local"

    # Logging
    LOG_LEVEL: str = "INFO"

    # Threading
    NUM_THREADS: int = 1

    # Inference / evaluation batching
    PREDICT_CHUNK_SIZE: int = 8192


@lru_cache()
def get_settings() -> Settings:
    """
    Returns a cached singleton instance of Settings.
    """
    return Settings()


def read_config_file(path: str) -> Dict[str, str]:
    """
    Read a flat ``key = value`` file.

    Raises:
        DataFileNotFoundException: If the file does not exist.
        ConfigException: If a key carries no value.
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise DataFileNotFoundException(str(config_path))

    raw = dotenv_values(config_path)
    values: Dict[str, str] = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigException(
                f"Config key '{key}' has no value",
                details={"path": str(config_path), "key": key},
            )
        values[key.strip().lower()] = value.strip()
    return values


def parse_config(values: Dict[str, object], model: Type[ConfigModel]) -> ConfigModel:
    """
    Validate raw key/value pairs against a config model.

    Raises:
        ConfigException: On unknown keys or values failing validation.
    """
    unknown = sorted(set(values) - set(model.model_fields))
    if unknown:
        raise ConfigException(
            f"Unknown config keys: {', '.join(unknown)}",
            details={"unknown_keys": unknown},
        )
    try:
        return model.model_validate(values)
    except ValidationError as exc:
        raise ConfigException("Invalid configuration", details={"errors": format_validation_errors(exc)}) from exc


def load_config_file(path: str, model: Type[ConfigModel]) -> ConfigModel:
    return parse_config(read_config_file(path), model)


def format_validation_errors(exc: ValidationError):
    errors = []
    for error in exc.errors():
        field = ".".join(str(loc) for loc in error["loc"])
        errors.append(
            {
                "field": field,
                "message": error["msg"],
                "type": error["type"],
            }
        )
    return errors
