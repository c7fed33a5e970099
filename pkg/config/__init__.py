from config.loader import (
    ConfigError,
    apply_overrides,
    build_train_config,
    canonical_json,
    config_hash,
    load_config_file,
    parse_override,
    resolve_config_path,
    resolve_train_config,
)
from config.settings import Settings, settings

__all__ = [
    "settings",
    "Settings",
    "ConfigError",
    "resolve_config_path",
    "load_config_file",
    "parse_override",
    "apply_overrides",
    "build_train_config",
    "resolve_train_config",
    "canonical_json",
    "config_hash",
]
