"""
Station graph of the report assembly line.

A blueprint names each station, the coroutine it runs and where each of its
outputs leads. `vulncat.core.AssemblyLine` walks the graph; the report line
is declared in `vulncat/report/pipeline.yaml`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Awaitable, Callable, Iterator

import structlog

from .utils import import_function

logger = structlog.get_logger(__name__)

StationFunc = Callable[..., Awaitable[Any]]


@dataclass
class StationConfig:
    """
    One station: its coroutine and its outgoing edges.

    Attributes
    ----------
    name : str
        Key of the station in its blueprint.
    import_path : str | None
        Dotted path of the coroutine function, imported on first use
        (`vulncat.report.pipeline.render_station`).
    func : StationFunc | None
        The coroutine function itself. Wins over `import_path`.
    transitions : dict[str, str]
        Output to next station.
    finish_on : list[Any]
        Outputs that end the line after this station.
    on_error : str | None
        Station run when this one raises. Falls back to the blueprint's
        global error station.
    """

    name: str
    import_path: str | None = field(default=None, repr=False)
    func: StationFunc | None = field(default=None, repr=False)
    transitions: dict[str, str] = field(default_factory=dict)
    finish_on: list[Any] = field(default_factory=list)
    on_error: str | None = None

    def __post_init__(self) -> None:
        if self.func is None and not self.import_path:
            raise ValueError(f"Station '{self.name}' needs an import path or a function.")
        if self.func is not None and not callable(self.func):
            raise TypeError(f"Function of station '{self.name}' is not callable.")

    @property
    def function(self) -> StationFunc:
        """
        Raises
        ------
        TypeError
            If `import_path` names something that is not callable.
        """
        if self.func is not None:
            return self.func
        module_name, func_name = self.import_path.rsplit(".", 1)
        return import_function(module_name, func_name)

    @property
    def dotted_path(self) -> str:
        return self.import_path or f"{self.func.__module__}.{self.func.__name__}"

    def targets(self) -> Iterator[str]:
        """
        Every station this one can hand the load to, error station included.
        """
        yield from self.transitions.values()
        if self.on_error:
            yield self.on_error

    def to_dict(self) -> dict[str, Any]:
        return {
            "function": self.dotted_path,
            "transitions": dict(self.transitions),
            "finish_on": list(self.finish_on),
            "on_error": self.on_error,
        }


class Blueprint:
    """
    Stations by name, the entry station and an optional global error
    station.
    """

    def __init__(self) -> None:
        self._stations: dict[str, StationConfig] = {}
        self._entry_station: str | None = None
        self._global_error_station: str | None = None

    def add_station(
        self,
        name: str,
        *,
        import_path: str | None = None,
        func: StationFunc | None = None,
        transitions: dict[str, str] | None = None,
        finish_on: list[Any] | None = None,
        on_error: str | None = None,
        overwrite: bool = False,
    ) -> Blueprint:
        """
        Register a station and return the blueprint, so calls chain.

        Raises
        ------
        ValueError
            If `name` is taken and `overwrite` is False.
        """
        if name in self._stations and not overwrite:
            raise ValueError(f"Station '{name}' is already defined. Use overwrite=True to replace it.")
        self._stations[name] = StationConfig(
            name=name,
            import_path=import_path,
            func=func,
            transitions=dict(transitions or {}),
            finish_on=list(finish_on or []),
            on_error=on_error,
        )
        return self

    def _require(self, st: str, error: type[Exception] = KeyError) -> StationConfig:
        if st not in self._stations:
            raise error(f"Station '{st}' does not exist in this blueprint.")
        return self._stations[st]

    def reachable(self) -> set[str]:
        """
        Stations a load can visit from the entry station, through transitions
        or error handlers.
        """
        seen = {self.entry_station}
        if self._global_error_station:
            seen.add(self._global_error_station)
        frontier = list(seen)
        while frontier:
            for nxt in self._stations[frontier.pop()].targets():
                if nxt in self._stations and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    def check(self) -> None:
        """
        Raises
        ------
        ValueError
            If there is no entry station, if a transition or error handler
            names an undefined station, or if a station can never run.
        """
        for name, cfg in self._stations.items():
            for target in cfg.targets():
                if target not in self._stations:
                    raise ValueError(f"Station '{name}' points to undefined station '{target}'.")
        unreachable = sorted(set(self._stations) - self.reachable())
        if unreachable:
            raise ValueError(f"Stations never reached from the entry station: {', '.join(unreachable)}.")
        logger.debug("blueprint_checked", stations=len(self._stations))

    def set_entry_station(self, st: str) -> None:
        self._entry_station = self._require(st, ValueError).name

    def set_global_error_station(self, st: str) -> None:
        """
        Error station for stations without an `on_error` of their own.
        """
        self._global_error_station = self._require(st, ValueError).name

    @property
    def entry_station(self) -> str:
        if self._entry_station is None:
            raise ValueError("Entry station is not set. Call set_entry_station() first.")
        return self._entry_station

    @property
    def global_error_station(self) -> str | None:
        return self._global_error_station

    def get_station_config(self, st: str) -> StationConfig:
        return self._require(st)

    @property
    def stations(self) -> MappingProxyType:
        return MappingProxyType(self._stations)

    def __repr__(self) -> str:
        edges = "; ".join(
            f"{name} -> {{{', '.join(f'{out}: {nxt}' for out, nxt in cfg.transitions.items())}}}"
            for name, cfg in self._stations.items()
        )
        return f"Blueprint(entry={self._entry_station!r}, error={self._global_error_station!r}, {edges})"
