from __future__ import annotations

import importlib
import re
from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Callable

from pydantic import BaseModel

_WHITESPACE = re.compile(r"\s+")


def normalize_whitespace(text: str) -> str:
    """
    Strip leading/trailing whitespace and collapse internal runs to one space.
    """
    return _WHITESPACE.sub(" ", text).strip()


def edit_distance(left: str, right: str) -> int:
    """
    Levenshtein distance between two strings (case-sensitive).

    Parameters
    ----------
    left : str
    right : str

    Returns
    -------
    int
        Minimal number of single-character insertions, deletions or
        substitutions turning `left` into `right`.
    """
    if len(left) < len(right):
        left, right = right, left
    previous = list(range(len(right) + 1))
    for i, lch in enumerate(left, start=1):
        current = [i]
        for j, rch in enumerate(right, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (lch != rch),
                )
            )
        previous = current
    return previous[-1]


def closest_match(
    text: str, candidates: list[str], max_distance: int = 3
) -> str | None:
    """
    Return the candidate nearest to `text` within `max_distance`.

    Ties go to the candidate listed first. An exact match is not a
    suggestion, so distance 0 is skipped.
    """
    best: str | None = None
    best_distance = max_distance + 1
    for candidate in candidates:
        if abs(len(candidate) - len(text)) > max_distance:
            continue
        distance = edit_distance(text, candidate)
        if 0 < distance < best_distance:
            best, best_distance = candidate, distance
    return best


def coerce_to_dict(obj: Any) -> Any:
    """
    Coerce an object into JSON-ready builtins. Handles:

    - Pydantic `BaseModel` instances (through `model_dump(mode="json")`).
    - Dataclasses, recursively.
    - Enums (their value), mappings, lists and tuples.

    Parameters
    ----------
    obj : Any
        The object to convert.

    Returns
    -------
    Any
        Dicts, lists, strings, numbers, booleans or None.
    """
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if is_dataclass(obj) and not isinstance(obj, type):
        return {key: coerce_to_dict(value) for key, value in asdict(obj).items()}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(coerce_to_dict(k)): coerce_to_dict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [coerce_to_dict(item) for item in obj]
    return obj


def import_function(module_name: str, func_name: str) -> Callable[..., Any]:
    """Dynamically import a function by module_name and func_name.

    Parameters
    ----------
    module_name : str
        The module where the function is located.
    func_name : str
        The function name.

    Returns
    -------
    Callable[..., Any]
        The imported function.

    Raises
    ------
    TypeError
        If the imported object is not a callable.
    """
    mod = importlib.import_module(module_name)
    fn = getattr(mod, func_name)
    if not callable(fn):
        raise TypeError(f"Object is imported but is not callable: {fn}")
    return fn
