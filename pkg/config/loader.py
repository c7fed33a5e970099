"""YAML run configs: lookup by name, dotted overrides, validation, hashing."""

import copy
import hashlib
import json
import typing
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Type, Union

import yaml
from pydantic import BaseModel, ValidationError

from config.settings import settings
from models.schemas import TrainConfig
from tensor_core import GHLError


class ConfigError(GHLError, ValueError):
    """Unreadable config file, unknown key or invalid value."""


def resolve_config_path(name_or_path: Union[str, Path], config_dir: Union[str, Path, None] = None) -> Path:
    """A path to an existing file, or a config name looked up in the config directory."""
    candidate = Path(name_or_path)
    if candidate.is_file():
        return candidate
    directory = Path(config_dir or settings.config_dir)
    for suffix in (".yaml", ".yml"):
        named = directory / f"{name_or_path}{suffix}"
        if named.is_file():
            return named
    available = sorted(p.stem for p in directory.glob("*.y*ml")) if directory.is_dir() else []
    raise ConfigError(f"config {str(name_or_path)!r} not found; available in {directory}: {available}")


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level, got {type(data).__name__}")
    return data


def parse_override(item: str) -> Tuple[str, Any]:
    """`key.subkey=value`; the value is read as YAML (numbers, booleans, lists)."""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} must look like key.subkey=value")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key.strip(), value


def apply_overrides(data: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Deep copy of `data` with dotted-key overrides set; None values are skipped."""
    merged = copy.deepcopy(dict(data))
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = value
    return merged


def _nested_model(annotation: Any) -> Optional[Type[BaseModel]]:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return annotation
    for arg in typing.get_args(annotation):
        found = _nested_model(arg)
        if found is not None:
            return found
    return None


def _accepted_keys(loc: Iterable[Union[str, int]]) -> List[str]:
    model: Optional[Type[BaseModel]] = TrainConfig
    for part in loc:
        if model is None:
            break
        if isinstance(part, int) or part not in model.model_fields:
            # list index or union member tag
            continue
        model = _nested_model(model.model_fields[part].annotation)
    return sorted(model.model_fields) if model is not None else []


def build_train_config(data: Mapping[str, Any]) -> TrainConfig:
    try:
        return TrainConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = [part for part in err["loc"]]
        key = ".".join(str(part) for part in loc)
        if err["type"] == "extra_forbidden":
            raise ConfigError(f"unknown config key {key!r}; accepted: {_accepted_keys(loc[:-1])}") from None
        raise ConfigError(f"invalid value for {key!r}: {err['msg']}") from None


def resolve_train_config(
    name_or_path: Union[str, Path, None] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    config_dir: Union[str, Path, None] = None,
) -> TrainConfig:
    """Model defaults < config file < overrides."""
    data: Dict[str, Any] = {}
    if name_or_path is not None:
        data = load_config_file(resolve_config_path(name_or_path, config_dir))
    return build_train_config(apply_overrides(data, overrides or {}))


def canonical_json(config: TrainConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(config: TrainConfig) -> str:
    """git-style blob hash of the canonical JSON."""
    payload = canonical_json(config).encode("utf-8")
    digest = hashlib.sha1(usedforsecurity=False)
    digest.update(b"blob %d\0" % len(payload))
    digest.update(payload)
    return digest.hexdigest()
