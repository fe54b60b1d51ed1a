from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Protocol

import structlog
import yaml

from .blueprint import Blueprint
from .utils import coerce_to_dict

logger = structlog.get_logger(__name__)


class _Readable(Protocol):
    def read_text(self, encoding: str = ...) -> str: ...


def blueprint_to_dict(blueprint: Blueprint) -> dict[str, Any]:
    """
    Convert a Blueprint into a dictionary suitable for YAML export.

    Station functions are always stored as dotted import paths, see
    `StationConfig.to_dict`.

    Parameters
    ----------
    blueprint : Blueprint
        The blueprint to export.

    Returns
    -------
    dict[str, Any]
        Keys `entry_station`, `global_error_station` and `stations`.
    """
    data: dict[str, Any] = {
        "entry_station": blueprint.entry_station,
        "global_error_station": blueprint.global_error_station,
        "stations": {},
    }
    for st, st_cfg in blueprint.stations.items():
        data["stations"][st] = st_cfg.to_dict()
    return data


def blueprint_from_dict(data: dict[str, Any]) -> Blueprint:
    """
    Rebuild a Blueprint from a dictionary.

    Station functions are imported lazily, when the station first runs.

    Parameters
    ----------
    data : dict[str, Any]
        Must contain:
            - "entry_station": str
            - "stations": dict[str, dict]
                and for each station dict:
                    {
                        "function": str (import path),
                        "transitions": dict[str, str],
                        "finish_on": list,
                        "on_error": str or None,
                    }

    Returns
    -------
    Blueprint

    Raises
    ------
    ValueError
        If there is no entry station or a transition names an undefined
        station.
    """
    blueprint = Blueprint()
    for st, st_cfg_dict in (data.get("stations") or {}).items():
        blueprint.add_station(
            name=st,
            import_path=st_cfg_dict["function"],
            transitions={str(k): v for k, v in (st_cfg_dict.get("transitions") or {}).items()},
            finish_on=list(st_cfg_dict.get("finish_on") or []),
            on_error=st_cfg_dict.get("on_error"),
        )

    entry_st = data.get("entry_station")
    if entry_st is None:
        raise ValueError("No 'entry_station' found in blueprint data. Cannot restore Blueprint.")
    blueprint.set_entry_station(entry_st)
    if data.get("global_error_station"):
        blueprint.set_global_error_station(data["global_error_station"])
    blueprint.check()
    return blueprint


def blueprint_from_yaml(source: Path | _Readable) -> Blueprint:
    """
    Deserialize a Blueprint from a YAML file or package resource.

    Parameters
    ----------
    source : Path | Traversable
        Anything with `read_text`, such as a path or an
        `importlib.resources` handle.
    """
    data = yaml.safe_load(source.read_text(encoding="utf-8"))
    blueprint = blueprint_from_dict(data)
    logger.debug("blueprint_loaded", source=str(source), stations=len(blueprint.stations))
    return blueprint


def to_jsonable(obj: Any) -> Any:
    """
    JSON-ready builtins for analysis results, report documents and
    diagnostics.
    """
    return coerce_to_dict(obj)


def dump_json(obj: Any) -> str:
    """
    Stable JSON text: two-space indent, insertion-ordered keys, trailing
    newline.
    """
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


def write_json(obj: Any, path: Path) -> Path:
    path = Path(path)
    path.write_text(dump_json(obj), encoding="utf-8")
    logger.debug("json_written", path=str(path))
    return path
