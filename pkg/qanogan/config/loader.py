"""YAML run files: loading, command-line overrides and the effective-config dump."""
import dataclasses
import logging
import typing
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Type, TypeVar, Union

import yaml

from ..exceptions import ConfigError
from .base import RunConfig, default_gradient_mode

T = TypeVar("T")


def _unwrap_optional(hint: Any) -> Tuple[Any, bool]:
    if typing.get_origin(hint) is Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return hint, False


def _convert(hint: Any, value: Any, key: str, errors: List[str]) -> Any:
    hint, optional = _unwrap_optional(hint)
    if value is None:
        if not optional:
            errors.append(key)
        return None
    if dataclasses.is_dataclass(hint):
        if not isinstance(value, Mapping):
            errors.append(key)
            return None
        return _build(hint, value, key, errors)
    if isinstance(hint, type) and issubclass(hint, Enum):
        if isinstance(value, hint):
            return value
        try:
            return hint[str(value).upper()]
        except KeyError:
            errors.append(key)
            return None
    if typing.get_origin(hint) in (list, List):
        (item_hint,) = typing.get_args(hint)
        if not isinstance(value, (list, tuple)):
            errors.append(key)
            return None
        return [_convert(item_hint, item, f"{key}[{i}]", errors) for i, item in enumerate(value)]
    if hint is bool:
        if not isinstance(value, bool):
            errors.append(key)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(key)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(key)
            return value
        return float(value)
    if hint is str:
        return str(value)
    return value


def _build(cls: Type[T], data: Mapping[str, Any], prefix: str, errors: List[str]) -> Optional[T]:
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for unknown in sorted(set(data) - names):
        errors.append(f"{prefix}.{unknown}" if prefix else unknown)
    kwargs: Dict[str, Any] = {}
    for name in names & set(data):
        key = f"{prefix}.{name}" if prefix else name
        kwargs[name] = _convert(hints[name], data[name], key, errors)
    if errors:
        return None
    try:
        return cls(**kwargs)
    except ConfigError as e:
        errors.extend(e.keys or [prefix or cls.__name__])
    except TypeError as e:
        errors.append(f"{prefix or cls.__name__} ({e})")
    return None


def config_from_dict(data: Mapping[str, Any]) -> RunConfig:
    errors: List[str] = []
    config = _build(RunConfig, data, "", errors)
    if errors or config is None:
        raise ConfigError("Invalid configuration keys", sorted(set(errors)))
    return config


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(config: RunConfig) -> Dict[str, Any]:
    """Plain YAML-ready form; a gradient mode that only follows `shots` is left null."""
    data = _plain(dataclasses.asdict(config))
    for name in ("train", "anomaly"):
        section = getattr(config, name)
        if section.gradient_mode == default_gradient_mode(section.shots):
            data[name]["gradient_mode"] = None
    return data


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply `section.key=value` strings; values are parsed as YAML scalars."""
    errors: List[str] = []
    for item in overrides:
        if "=" not in item:
            errors.append(item)
            continue
        dotted, raw = item.split("=", 1)
        parts = dotted.strip().split(".")
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                errors.append(dotted)
                break
            node = child
        else:
            node[parts[-1]] = yaml.safe_load(raw)
    if errors:
        raise ConfigError("Malformed overrides (expected section.key=value)", errors)
    return data


class ConfigLoader:
    """Loads run configurations from YAML files plus overrides."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def read(self, path: Union[str, Path, None], overrides: Sequence[str] = ()) -> RunConfig:
        data: Dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ConfigError("Configuration file not found", [str(path)])
            with open(path) as f:
                loaded = yaml.safe_load(f)
            if loaded is not None and not isinstance(loaded, dict):
                raise ConfigError("Configuration root must be a mapping", [str(path)])
            data = loaded or {}
            self.logger.debug(f"Loaded configuration from {path}")
        config = config_from_dict(apply_overrides(data, overrides))
        if overrides:
            self.logger.info(f"Applied overrides: {', '.join(overrides)}")
        return config

    def write(self, config: RunConfig, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(config_to_dict(config), f, sort_keys=False)
        return path
