"""Load the computational caps and solver defaults of the main program."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from maison.config import ProjectConfig
from pydantic import ValidationError

from shrinklab.exceptions import ConfigError
from shrinklab.model import ShrinklabConfig

log = logging.getLogger(__name__)


def _starting_path(overrides: Dict[str, str]) -> Optional[Path]:
    config_path = overrides.get("config_path")
    return Path(config_path) if config_path else None


def configure_shrinklab(
    shrinklab_config: ShrinklabConfig,
    config_files: Optional[List[str]] = None,
    additional_config: Optional[Dict[str, str]] = None,
) -> None:
    """Fill the caps from .toml/.ini files, then apply the overrides on top.

    Every value goes through the ShrinklabConfig validators, so a cap below one
    or a shift range that misses the degrees -2..2 is rejected before any
    computation starts.

    Raises:
        ConfigError: if a merged value is out of range or has the wrong type.
    """
    overrides = dict(additional_config or {})
    config: ProjectConfig = ProjectConfig(
        config_schema=ShrinklabConfig,
        merge_configs=True,
        project_name="shrinklab",
        source_files=config_files,
        starting_path=_starting_path(overrides),
    )
    config_dict: Dict[str, Any] = config.to_dict()
    config_dict.update(overrides)

    try:
        config.validate()
    except ValidationError as error:
        raise ConfigError(f"Invalid shrinklab configuration: {error}") from error

    for config_key, config_val in config.to_dict().items():
        setattr(shrinklab_config, config_key, config_val)
    log.debug(
        "Caps: max_weight=%s max_generators=%s max_layer_tensor=%s workers=%s",
        shrinklab_config.max_weight,
        shrinklab_config.max_generators,
        shrinklab_config.max_layer_tensor,
        shrinklab_config.workers,
    )
