"""Canonical file formats: instances, schedules, and byte-stable JSON emission.

The on-disk formats are JSON with a canonical rendering so that identical
objects always serialize to identical bytes: keys sorted, compact separators,
floats printed with 17 significant digits (enough to round-trip IEEE doubles),
a single trailing newline, UTF-8.

Instance file::

    {"links": [{"id": 0, "rx": ..., "ry": ..., "sx": ..., "sy": ..., "power": ...}, ...],
     "params": {"alpha": ..., "beta": ..., "default_power": ..., "noise": ...}}

(``power`` omitted means "use the default"). Schedule file::

    {"slots": [[link ids, ascending], ...]}
"""

from __future__ import annotations

import json
import math
import os
from typing import Any

from .core import Instance, Link, ModelParams, Point, Schedule, Slot


def format_float(x: float) -> str:
    """Canonical text for one float: 17 significant digits, -0 normalized."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    if x == 0.0:
        x = 0.0
    return f"{x:.17g}"


def canonical_dumps(obj: Any) -> str:
    """Serialize to canonical JSON (sorted keys, pinned float format)."""
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj: Any, parts: list[str]) -> None:
    if isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(repr(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif obj is None:
        parts.append("null")
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                parts.append(",")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _emit(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _emit(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_canonical(path: str | os.PathLike, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_dumps(obj))
        fh.write("\n")


def instance_to_obj(instance: Instance) -> dict:
    links = []
    for link in instance.links:
        entry: dict[str, Any] = {
            "id": link.id,
            "sx": link.sender.x,
            "sy": link.sender.y,
            "rx": link.receiver.x,
            "ry": link.receiver.y,
        }
        if link.power is not None:
            entry["power"] = link.power
        links.append(entry)
    p = instance.params
    return {
        "params": {
            "alpha": p.alpha,
            "beta": p.beta,
            "noise": p.noise,
            "default_power": p.default_power,
        },
        "links": links,
    }


def instance_from_obj(obj: Any) -> Instance:
    if not isinstance(obj, dict):
        raise ValueError("instance document must be a JSON object")
    unknown = set(obj) - {"params", "links"}
    if unknown:
        raise ValueError(f"unknown top-level keys in instance file: {sorted(unknown)}")
    try:
        raw_params = obj["params"]
        raw_links = obj["links"]
    except KeyError as exc:
        raise ValueError(f"instance file missing key {exc}") from None
    unknown = set(raw_params) - {"alpha", "beta", "noise", "default_power"}
    if unknown:
        raise ValueError(f"unknown params keys: {sorted(unknown)}")
    params = ModelParams(
        alpha=float(raw_params["alpha"]),
        beta=float(raw_params["beta"]),
        noise=float(raw_params.get("noise", 0.0)),
        default_power=float(raw_params.get("default_power", 1.0)),
    )
    links = []
    for raw in raw_links:
        unknown = set(raw) - {"id", "sx", "sy", "rx", "ry", "power"}
        if unknown:
            raise ValueError(f"unknown link keys: {sorted(unknown)}")
        links.append(
            Link(
                id=int(raw["id"]),
                sender=Point(float(raw["sx"]), float(raw["sy"])),
                receiver=Point(float(raw["rx"]), float(raw["ry"])),
                power=float(raw["power"]) if "power" in raw else None,
            )
        )
    return Instance(params=params, links=tuple(links))


def schedule_to_obj(schedule: Schedule) -> dict:
    return {"slots": [list(slot.sorted_members) for slot in schedule.slots]}


def schedule_from_obj(obj: Any) -> Schedule:
    if not isinstance(obj, dict) or "slots" not in obj:
        raise ValueError("schedule document must be a JSON object with a 'slots' key")
    unknown = set(obj) - {"slots"}
    if unknown:
        raise ValueError(f"unknown top-level keys in schedule file: {sorted(unknown)}")
    slots = []
    for raw in obj["slots"]:
        members = [int(i) for i in raw]
        if len(set(members)) != len(members):
            raise ValueError(f"slot contains duplicate ids: {raw}")
        slots.append(Slot(frozenset(members)))
    return Schedule(tuple(slots))


def save_instance(instance: Instance, path: str | os.PathLike) -> None:
    write_canonical(path, instance_to_obj(instance))


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_obj(json.load(fh))


def save_schedule(schedule: Schedule, path: str | os.PathLike) -> None:
    write_canonical(path, schedule_to_obj(schedule))


def load_schedule(path: str | os.PathLike) -> Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return schedule_from_obj(json.load(fh))
