"""Hand-built demo homes and instructions used by tests, demos, and the REPL.

The instructions carry the embedded-intent suffix so they work against the
rule-oracle backend out of the box.
"""

from __future__ import annotations

from typing import Any

from .backends import embed_intent

_LAMP_METHODS = [
    {"name": "turn_on", "params": [], "writes": {"power": "ON"}},
    {"name": "turn_off", "params": [], "writes": {"power": "OFF"}},
]
_LOCK_METHODS = [
    {"name": "lock", "params": [], "writes": {"lock_state": "LOCKED"}},
    {"name": "unlock", "params": [], "writes": {"lock_state": "UNLOCKED"}},
]
_OVEN_METHODS = [
    {"name": "turn_on", "params": [], "writes": {"power": "ON"}},
    {"name": "turn_off", "params": [], "writes": {"power": "OFF"}},
    {
        "name": "set_temperature",
        "params": [{"name": "temperature", "kind": "integer", "min": 50, "max": 250}],
        "writes": {"temperature": "param:temperature"},
    },
]
_FRIDGE_METHODS = [
    {
        "name": "set_temperature",
        "params": [{"name": "temperature", "kind": "integer", "min": 1, "max": 8}],
        "writes": {"temperature": "param:temperature"},
    },
]
_DEHUMIDIFIER_METHODS = [
    {"name": "turn_on", "params": [], "writes": {"power": "ON"}},
    {"name": "turn_off", "params": [], "writes": {"power": "OFF"}},
    {
        "name": "set_intensity",
        "params": [{"name": "intensity", "kind": "integer", "min": 0, "max": 5}],
        "writes": {"intensity": "param:intensity"},
    },
    {
        "name": "set_humidity",
        "params": [{"name": "humidity", "kind": "integer", "min": 30, "max": 80}],
        "writes": {"humidity": "param:humidity"},
    },
]

_CATALOG = ["dehumidifier", "fridge", "heater", "lamp", "oven", "smart_lock"]


def four_room_home() -> dict[str, Any]:
    """Two lamps, a kitchen without a dehumidifier, and an unlocked front door."""
    return {
        "home_id": "four_room_home",
        "catalog": list(_CATALOG),
        "rooms": {
            "living_room": {
                "reading_lamp": {
                    "type": "lamp",
                    "attributes": {"power": "ON"},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
            },
            "bedroom": {
                "reading_lamp": {
                    "type": "lamp",
                    "attributes": {"power": "OFF"},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
            },
            "kitchen": {
                "oven": {
                    "type": "oven",
                    "attributes": {"power": "OFF", "temperature": 180},
                    "methods": [dict(m) for m in _OVEN_METHODS],
                },
                "fridge": {
                    "type": "fridge",
                    "attributes": {"temperature": 4},
                    "methods": [dict(m) for m in _FRIDGE_METHODS],
                },
            },
            "entrance": {
                "smart_lock": {
                    "type": "smart_lock",
                    "attributes": {"lock_state": "UNLOCKED"},
                    "methods": [dict(m) for m in _LOCK_METHODS],
                },
            },
        },
    }


def mixed_command() -> str:
    """Three-part command against :func:`four_room_home`; the middle part is impossible."""
    text = (
        "Turn on the bedroom reading lamp, set the kitchen dehumidifier to 50%,"
        " and lock the front door."
    )
    channel = {
        "ops": [
            {
                "desc": "turn_on bedroom.reading_lamp",
                "valid": True,
                "reason": "reading_lamp exists in bedroom",
                "call": "bedroom.reading_lamp.turn_on()",
            },
            {
                "desc": "set_humidity kitchen.dehumidifier",
                "valid": False,
                "reason": "no dehumidifier in kitchen",
                "call": "kitchen.dehumidifier.set_humidity(50)",
            },
            {
                "desc": "lock entrance.smart_lock",
                "valid": True,
                "reason": "smart_lock exists in entrance",
                "call": "entrance.smart_lock.lock()",
            },
        ],
        "absent_devices": ["dehumidifier", "heater"],
        "absent_rooms": ["store_room", "study_room"],
    }
    return embed_intent(text, channel)


def storeroom_home() -> dict[str, Any]:
    """A home whose dehumidifier lives in the study; there is no store room."""
    return {
        "home_id": "storeroom_home",
        "catalog": list(_CATALOG),
        "rooms": {
            "study_room": {
                "dehumidifiers": {
                    "type": "dehumidifier",
                    "attributes": {"power": "ON", "intensity": 3, "humidity": 55},
                    "methods": [dict(m) for m in _DEHUMIDIFIER_METHODS],
                },
            },
            "bedroom": {
                "lamp": {
                    "type": "lamp",
                    "attributes": {"power": "OFF"},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
            },
        },
    }


def storeroom_command() -> str:
    """Names a room the home does not have; must be rejected outright."""
    text = "Set the intensity of the dehumidifiers to 0 in the store room."
    channel = {
        "ops": [
            {
                "desc": "set_intensity store_room.dehumidifiers",
                "valid": False,
                "reason": "no room store_room",
                "call": "store_room.dehumidifiers.set_intensity(0)",
                "grounded": "study_room.dehumidifiers.set_intensity(0)",
                "fg": True,
            },
        ],
        "absent_devices": ["heater", "oven"],
        "absent_rooms": ["store_room", "kitchen"],
    }
    return embed_intent(text, channel)


def two_lamp_home(lamp_a_power: str = "ON", lamp_b_power: str = "OFF") -> dict[str, Any]:
    """Bedroom with two lamps whose states drive the disambiguation demos."""
    return {
        "home_id": "two_lamp_home",
        "catalog": list(_CATALOG),
        "rooms": {
            "bedroom": {
                "lamp_a": {
                    "type": "lamp",
                    "attributes": {"power": lamp_a_power},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
                "lamp_b": {
                    "type": "lamp",
                    "attributes": {"power": lamp_b_power},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
            },
        },
    }


def lamp_command_resolvable() -> str:
    """'Turn on the lamp.' when exactly one lamp is off: resolves silently."""
    text = "Turn on the lamp."
    channel = {
        "ops": [
            {
                "desc": "turn_on the one lamp that is off: bedroom.lamp_b",
                "valid": True,
                "reason": "exactly one lamp is off: bedroom.lamp_b",
                "call": "bedroom.lamp_b.turn_on()",
            },
        ],
        "absent_devices": ["heater", "oven"],
        "absent_rooms": ["store_room"],
    }
    return embed_intent(text, channel)


def lamp_command_ambiguous() -> str:
    """'Turn on the lamp.' when both lamps are off: the agent must ask."""
    text = "Turn on the lamp."
    channel = {
        "ops": [
            {
                "desc": "turn_on an unspecified lamp",
                "valid": True,
                "amb": True,
                "reason": "multiple lamps in bedroom could be meant",
                "cands": ["bedroom.lamp_a", "bedroom.lamp_b"],
                "call": "bedroom.lamp_a.turn_on()",
            },
        ],
        "clar": {
            "bedroom.lamp_a": {
                "ops": [
                    {
                        "desc": "turn_on bedroom.lamp_a",
                        "valid": True,
                        "reason": "user chose bedroom.lamp_a",
                        "call": "bedroom.lamp_a.turn_on()",
                    }
                ]
            },
            "bedroom.lamp_b": {
                "ops": [
                    {
                        "desc": "turn_on bedroom.lamp_b",
                        "valid": True,
                        "reason": "user chose bedroom.lamp_b",
                        "call": "bedroom.lamp_b.turn_on()",
                    }
                ]
            },
            "the garage one": {
                "ops": [
                    {
                        "desc": "turn_on garage.lamp",
                        "valid": False,
                        "reason": "no lamp in garage",
                        "call": "garage.lamp.turn_on()",
                    }
                ]
            },
        },
        "absent_devices": ["heater", "oven"],
        "absent_rooms": ["garage", "store_room"],
    }
    return embed_intent(text, channel)


def kitchen_light_home() -> dict[str, Any]:
    """Single kitchen light; used for the mixed light-and-oven demo."""
    return {
        "home_id": "kitchen_light_home",
        "catalog": ["lamp", "light", "oven"],
        "rooms": {
            "kitchen": {
                "light": {
                    "type": "light",
                    "attributes": {"power": "OFF"},
                    "methods": [dict(m) for m in _LAMP_METHODS],
                },
            },
        },
    }


def kitchen_light_and_oven_command() -> str:
    """Valid light command plus an oven the kitchen does not have."""
    text = "Turn on the kitchen light and the oven."
    channel = {
        "ops": [
            {
                "desc": "turn_on kitchen.light",
                "valid": True,
                "reason": "light exists in kitchen",
                "call": "kitchen.light.turn_on()",
            },
            {
                "desc": "turn_on kitchen.oven",
                "valid": False,
                "reason": "no oven in kitchen",
                "call": "kitchen.oven.turn_on()",
            },
        ],
        "absent_devices": ["oven"],
        "absent_rooms": ["bedroom"],
    }
    return embed_intent(text, channel)
