"""Shared fixtures: randomized home documents plus independent brute-force
oracles that the implementation under test must agree with."""

from __future__ import annotations

import random
from typing import Any, Mapping

import pytest

from homegate.actions import Call, ERROR_TOKEN, AtomicAction, ErrorToken

ROOMS = [
    "attic", "balcony", "basement", "bathroom", "bedroom", "corridor",
    "dining_room", "entrance", "garage", "kitchen", "living_room",
    "nursery", "office", "store_room", "study_room",
]
TYPES = ["lamp", "oven", "fan", "heater", "tv", "lock", "blinds", "speaker"]
METHOD_NAMES = ["turn_on", "turn_off", "set_level", "set_mode", "toggle", "open", "close"]
ENUM_VALUES = ["auto", "low", "medium", "high", "sleep"]


def random_home_document(rng: random.Random) -> dict[str, Any]:
    """A structurally valid snapshot with varied parameter shapes."""
    rooms: dict[str, Any] = {}
    for room in rng.sample(ROOMS, rng.randint(1, 5)):
        devices: dict[str, Any] = {}
        for _ in range(rng.randint(1, 4)):
            device_type = rng.choice(TYPES)
            device_id = device_type if device_type not in devices else f"{device_type}_{rng.randint(2, 9)}"
            if device_id in devices:
                continue
            methods = []
            attributes: dict[str, Any] = {"power": rng.choice(["OFF", "ON"])}
            for name in rng.sample(METHOD_NAMES, rng.randint(1, 3)):
                params = []
                writes: dict[str, Any] = {}
                shape = rng.random()
                if shape < 0.4:
                    writes = {"power": rng.choice(["ON", "OFF"])}
                elif shape < 0.7:
                    lo = rng.randint(0, 5)
                    hi = lo + rng.randint(0, 100)
                    params = [{"name": "value", "kind": "integer", "min": lo, "max": hi}]
                    attributes["value"] = lo
                    writes = {"value": "param:value"}
                elif shape < 0.85:
                    params = [{"name": "mode", "kind": "enum", "values": rng.sample(ENUM_VALUES, rng.randint(1, 3))}]
                    attributes["mode"] = "auto"
                    writes = {"mode": "param:mode"}
                else:
                    params = [{"name": "label", "kind": "string"}]
                    attributes["label"] = ""
                    writes = {"label": "param:label"}
                methods.append({"name": name, "params": params, "writes": writes})
            devices[device_id] = {
                "type": device_type,
                "attributes": attributes,
                "methods": methods,
            }
        rooms[room] = devices
    return {"home_id": f"rand{rng.randint(0, 10**6)}", "catalog": list(TYPES), "rooms": rooms}


def random_action(document: Mapping[str, Any], rng: random.Random) -> AtomicAction:
    """Actions biased to exercise every cascade level, pass and fail alike."""
    roll = rng.random()
    if roll < 0.05:
        return ERROR_TOKEN
    rooms = list(document["rooms"])
    if not rooms or roll < 0.15:
        return Call(room=rng.choice(ROOMS), device=rng.choice(TYPES), capability="turn_on")
    room = rng.choice(rooms)
    devices = list(document["rooms"][room])
    if not devices or roll < 0.25:
        return Call(room=room, device=rng.choice(TYPES) + "_missing", capability="turn_on")
    device = rng.choice(devices)
    methods = document["rooms"][room][device]["methods"]
    if roll < 0.35 or not methods:
        return Call(room=room, device=device, capability="no_such_method")
    method = rng.choice(methods)
    spec = method["params"]
    params: tuple[Any, ...]
    sub = rng.random()
    if sub < 0.55:
        params = tuple(_valid_param(p, rng) for p in spec)
    elif sub < 0.75:
        params = tuple(_invalid_param(p, rng) for p in spec) or (99,)
    else:
        params = tuple(_valid_param(p, rng) for p in spec) + (1,)
    return Call(room=room, device=device, capability=method["name"], params=params)


def _valid_param(param: Mapping[str, Any], rng: random.Random) -> Any:
    if param["kind"] == "integer":
        return rng.randint(param["min"], param["max"])
    if param["kind"] == "enum":
        return rng.choice(list(param["values"]))
    return "text_value"


def _invalid_param(param: Mapping[str, Any], rng: random.Random) -> Any:
    if param["kind"] == "integer":
        return param["max"] + 1 + rng.randint(0, 5)
    if param["kind"] == "enum":
        return "not_a_value"
    return 123  # wrong kind for string


# --- independent brute-force grounding oracle --------------------------------


def oracle_triples(document: Mapping[str, Any]) -> set[tuple[str, str, str]]:
    triples = set()
    for room, devices in document["rooms"].items():
        for device_id, device in devices.items():
            for method in device["methods"]:
                triples.add((room, device_id, method["name"]))
    return triples


def oracle_params_ok(document: Mapping[str, Any], action: Call) -> bool:
    device = document["rooms"][action.room][action.device]
    spec = next(m for m in device["methods"] if m["name"] == action.capability)["params"]
    if len(spec) != len(action.params):
        return False
    for param, value in zip(spec, action.params):
        kind = param["kind"]
        if kind == "integer":
            if isinstance(value, bool):
                return False
            if isinstance(value, float):
                if value != int(value):
                    return False
                value = int(value)
            if not isinstance(value, int):
                return False
            if "min" in param and param["min"] is not None and value < param["min"]:
                return False
            if "max" in param and param["max"] is not None and value > param["max"]:
                return False
        elif kind == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            if "min" in param and param["min"] is not None and value < param["min"]:
                return False
            if "max" in param and param["max"] is not None and value > param["max"]:
                return False
        elif kind == "string":
            if not isinstance(value, str):
                return False
        elif kind == "boolean":
            if not isinstance(value, bool):
                return False
        elif kind == "enum":
            if value not in param["values"]:
                return False
        else:
            return False
    return True


def oracle_grounded(document: Mapping[str, Any], action: AtomicAction) -> bool:
    """Exhaustive membership + parameter check straight off the document."""
    if isinstance(action, ErrorToken):
        return False
    if (action.room, action.device, action.capability) not in oracle_triples(document):
        return False
    return oracle_params_ok(document, action)


# --- independent brute-force metric oracle -----------------------------------


def _atom_key(action: AtomicAction) -> str:
    from homegate.actions import normalize_action

    return "<err>" if isinstance(action, ErrorToken) else str(normalize_action(action))


def oracle_exact_match(pred, gold) -> int:
    return int(sorted(_atom_key(a) for a in pred) == sorted(_atom_key(a) for a in gold))


def oracle_f1(pred, gold) -> float:
    pk = sorted(_atom_key(a) for a in pred)
    gk = sorted(_atom_key(a) for a in gold)
    if not pk and not gk:
        return 1.0
    if not pk or not gk:
        return 0.0
    i = j = inter = 0
    while i < len(pk) and j < len(gk):
        if pk[i] == gk[j]:
            inter += 1
            i += 1
            j += 1
        elif pk[i] < gk[j]:
            i += 1
        else:
            j += 1
    if inter == 0:
        return 0.0
    precision = inter / len(pk)
    recall = inter / len(gk)
    return 2 * precision * recall / (precision + recall)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260810)
