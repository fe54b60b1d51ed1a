from __future__ import annotations

import asyncio
import traceback
from typing import Any

import structlog

from .blueprint import Blueprint
from .exceptions import AssemblyLineError

logger = structlog.get_logger(__name__)


class AssemblyLine:
    """
    Runs loads through the stations of a Blueprint.

    A load is a mutable dict handed to every station in turn. A station is
    an async callable taking the load and returning an output; the output
    picks the next station through the station's transitions, or stops the
    line when it is in `finish_on` or has no transition.
    """

    def __init__(self, blueprint: Blueprint) -> None:
        self._blueprint = blueprint

    @property
    def blueprint(self) -> Blueprint:
        return self._blueprint

    async def _handle_unhandled_error(
        self,
        station: str,
        running_load: dict[str, Any],
        exception: Exception,
    ) -> None:
        """
        Fallback when neither the station nor the blueprint names an error
        station.

        Raises
        ------
        AssemblyLineError
            Always, chained to the original exception.
        """
        logger.warning("station_failed", station=station, error=repr(exception))
        raise AssemblyLineError(
            f"Unhandled error in station '{station}': {exception}"
        ) from exception

    async def run_one_load_async(self, initial_load: dict[str, Any] | None = None) -> dict[str, Any]:
        """
        Process a single load.

        Parameters
        ----------
        initial_load : dict[str, Any] | None
            The load passed to the entry station. Defaults to an empty dict.

        Returns
        -------
        dict[str, Any]
            The load after the last station ran. Its `station_outputs` key maps
            each station that ran to its output, in run order.

        Raises
        ------
        AssemblyLineError
            If a station raises and no error station is configured.
        """
        running_load = initial_load if initial_load is not None else {}
        station_outputs: dict[str, Any] = running_load.setdefault("station_outputs", {})

        current_station: str | None = self._blueprint.entry_station
        while current_station:
            station_cfg = self._blueprint.get_station_config(current_station)
            try:
                output = await station_cfg.function(running_load)
                station_outputs[current_station] = output
            except Exception as exc:
                err_station = station_cfg.on_error or self._blueprint.global_error_station
                if not err_station:
                    await self._handle_unhandled_error(current_station, running_load, exc)
                err_cfg = self._blueprint.get_station_config(err_station)
                output = await err_cfg.function(
                    running_load, exception=exc, traceback_str=traceback.format_exc()
                )
                station_outputs[err_station] = output
                station_cfg = err_cfg
            logger.debug("station_finished", station=station_cfg.name, output=output)

            if output in station_cfg.finish_on:
                break
            current_station = station_cfg.transitions.get(output)

        return running_load

    async def run_many_loads_async(self, loads: list[dict[str, Any]]) -> list[dict[str, Any]]:
        """
        Process several loads concurrently.

        Returns
        -------
        list[dict[str, Any]]
            The finished loads, in the order of `loads`.

        Raises
        ------
        AssemblyLineError
            If any load fails without an error station.
        """
        return list(await asyncio.gather(*(self.run_one_load_async(load) for load in loads)))
