"""Application settings and run-configuration loading."""
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings

from stereogan.exceptions import ConfigError
from stereogan.schemas.config import RunConfig

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process settings loaded from environment variables (prefix ``STEREOGAN_``)."""

    # Application
    APP_NAME: str = "stereogan"
    APP_VERSION: str = "0.1.0"
    LOG_LEVEL: str = "INFO"

    # Runtime
    DEVICE: str = "cpu"
    NUM_THREADS: int = 0
    DETERMINISTIC: bool = True

    class Config:
        """Pydantic configuration."""
        env_file = ".env"
        env_prefix = "STEREOGAN_"
        case_sensitive = True


settings = Settings()


def _set_dotted(target: Dict[str, Any], key: str, value: Any) -> None:
    node = target
    *parents, leaf = key.split(".")
    for part in parents:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError([f"{key}: '{part}' is not a section"])
        node = child
    node[leaf] = value


def deep_merge(base: Mapping[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``; ``update`` wins."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _format_errors(error: ValidationError) -> list:
    return [
        f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()
    ]


def load_run_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """Load a YAML run config and apply dotted-key overrides (``training.seed``).

    Values left as ``None`` in ``overrides`` are ignored, so unset CLI flags
    never mask the file. Every validation error is reported at once.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError([f"config file {path} does not exist"])
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError([f"{path}: {e}"]) from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError([f"{path}: top level must be a mapping"])
        raw = loaded or {}

    flags: Dict[str, Any] = {}
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(flags, key, value)
    try:
        config = RunConfig.model_validate(deep_merge(raw, flags))
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from e
    logger.debug(f"Resolved run config: {config.model_dump(mode='json')}")
    return config


def dump_run_config(config: RunConfig, path: Union[str, Path]) -> Path:
    """Write the resolved config as YAML; loading it back reproduces ``config``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False), encoding="utf-8"
    )
    return path
