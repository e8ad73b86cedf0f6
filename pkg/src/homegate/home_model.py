"""Smart-home environment snapshots: rooms, devices, capabilities, mutation.

A snapshot is an immutable value; executing a command produces a new
snapshot with the version counter bumped.  Everything is catalog-driven:
which attributes a method writes is declared in the snapshot document, not
hardcoded per device type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Mapping

from .actions import Call, ErrorToken, AtomicAction, normalize_identifier, render_literal

PARAM_KINDS = ("integer", "number", "string", "boolean", "enum")


class SnapshotError(ValueError):
    """Snapshot document violates the schema; ``path`` names the offending node."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    values: tuple[Any, ...] = ()
    min: float | None = None
    max: float | None = None

    def accepts(self, value: Any) -> bool:
        if self.kind == "integer":
            if isinstance(value, bool):
                return False
            if isinstance(value, float):
                if not value.is_integer():
                    return False
                value = int(value)
            if not isinstance(value, int):
                return False
            return self._in_range(value)
        if self.kind == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            return self._in_range(value)
        if self.kind == "string":
            return isinstance(value, str)
        if self.kind == "boolean":
            return isinstance(value, bool)
        if self.kind == "enum":
            return value in self.values
        return False

    def _in_range(self, value: float) -> bool:
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value > self.max:
            return False
        return True

    def describe(self) -> str:
        if self.kind == "enum":
            return f"{self.name}: enum[{'|'.join(str(v) for v in self.values)}]"
        if self.kind in ("integer", "number") and (self.min is not None or self.max is not None):
            lo = "" if self.min is None else render_literal(self.min)
            hi = "" if self.max is None else render_literal(self.max)
            return f"{self.name}: {self.kind} {lo}..{hi}"
        return f"{self.name}: {self.kind}"


@dataclass(frozen=True)
class Capability:
    """A callable device method plus the attribute writes it performs."""

    name: str
    parameter_spec: tuple[ParamSpec, ...] = ()
    writes: Mapping[str, Any] = field(default_factory=dict)  # attr -> "param:<name>" or literal

    def validate_params(self, params: tuple[Any, ...]) -> bool:
        if len(params) != len(self.parameter_spec):
            return False
        return all(spec.accepts(value) for spec, value in zip(self.parameter_spec, params))

    def signature(self) -> str:
        return f"{self.name}({', '.join(p.describe() for p in self.parameter_spec)})"


@dataclass(frozen=True)
class Device:
    id: str
    device_type: str
    capabilities: tuple[Capability, ...]
    attributes: Mapping[str, Any]

    def capability(self, name: str) -> Capability | None:
        for cap in self.capabilities:
            if cap.name == name:
                return cap
        return None


@dataclass(frozen=True)
class Room:
    name: str
    devices: Mapping[str, Device]


@dataclass(frozen=True)
class HomeState:
    home_id: str
    rooms: Mapping[str, Room]
    catalog: frozenset[str]
    timestamp: int = 0

    def iter_devices(self) -> Iterator[tuple[str, Device]]:
        """Yield (room_name, device) in room-name then device-id order."""
        for room_name in sorted(self.rooms):
            room = self.rooms[room_name]
            for device_id in sorted(room.devices):
                yield room_name, room.devices[device_id]


def load_snapshot(source: Mapping[str, Any] | str) -> HomeState:
    """Build a validated :class:`HomeState` from a snapshot document.

    ``source`` is the parsed JSON document or its text.  Identifiers are
    normalized to lowercase underscore form on the way in.
    """
    if isinstance(source, str):
        try:
            document = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SnapshotError("$", f"not valid JSON: {exc}") from None
    else:
        document = source
    if not isinstance(document, Mapping):
        raise SnapshotError("$", "document must be an object")

    home_id = document.get("home_id", "")
    if not isinstance(home_id, str):
        raise SnapshotError("home_id", "must be a string")

    raw_catalog = document.get("catalog", [])
    if not isinstance(raw_catalog, list) or not all(isinstance(t, str) for t in raw_catalog):
        raise SnapshotError("catalog", "must be a list of device type strings")
    catalog = frozenset(normalize_identifier(t) for t in raw_catalog)

    raw_rooms = document.get("rooms", {})
    if not isinstance(raw_rooms, Mapping):
        raise SnapshotError("rooms", "must be an object")

    rooms: dict[str, Room] = {}
    for raw_room_name, raw_devices in raw_rooms.items():
        room_name = normalize_identifier(str(raw_room_name))
        room_path = f"rooms.{room_name}"
        if not room_name:
            raise SnapshotError(room_path, "empty room name")
        if room_name in rooms:
            raise SnapshotError(room_path, "duplicate room id")
        if not isinstance(raw_devices, Mapping):
            raise SnapshotError(room_path, "must be an object of devices")
        devices: dict[str, Device] = {}
        for raw_device_id, raw_device in raw_devices.items():
            device_id = normalize_identifier(str(raw_device_id))
            device_path = f"{room_path}.{device_id}"
            if not device_id:
                raise SnapshotError(device_path, "empty device id")
            if device_id in devices:
                raise SnapshotError(device_path, "duplicate device id")
            devices[device_id] = _load_device(device_id, raw_device, catalog, device_path)
        rooms[room_name] = Room(name=room_name, devices=devices)

    return HomeState(home_id=home_id, rooms=rooms, catalog=catalog, timestamp=0)


def _load_device(
    device_id: str, raw: Any, catalog: frozenset[str], path: str
) -> Device:
    if not isinstance(raw, Mapping):
        raise SnapshotError(path, "must be an object")
    device_type = raw.get("type")
    if not isinstance(device_type, str) or not device_type:
        raise SnapshotError(f"{path}.type", "missing device type")
    device_type = normalize_identifier(device_type)
    if device_type not in catalog:
        raise SnapshotError(f"{path}.type", f"unknown device type {device_type!r}")

    attributes = raw.get("attributes", {})
    if not isinstance(attributes, Mapping):
        raise SnapshotError(f"{path}.attributes", "must be an object")
    attributes = {str(k): v for k, v in attributes.items()}

    raw_methods = raw.get("methods", [])
    if not isinstance(raw_methods, list):
        raise SnapshotError(f"{path}.methods", "must be a list")
    capabilities: list[Capability] = []
    seen: set[str] = set()
    for index, raw_method in enumerate(raw_methods):
        method_path = f"{path}.methods[{index}]"
        cap = _load_capability(raw_method, method_path)
        if cap.name in seen:
            raise SnapshotError(method_path, f"duplicate method {cap.name!r}")
        seen.add(cap.name)
        param_names = {p.name for p in cap.parameter_spec}
        for attr, target in cap.writes.items():
            if attr not in attributes:
                raise SnapshotError(
                    f"{method_path}.writes.{attr}", "written attribute not declared"
                )
            if isinstance(target, str) and target.startswith("param:"):
                if target[len("param:") :] not in param_names:
                    raise SnapshotError(
                        f"{method_path}.writes.{attr}", f"unknown parameter in {target!r}"
                    )
        capabilities.append(cap)

    return Device(
        id=device_id,
        device_type=device_type,
        capabilities=tuple(capabilities),
        attributes=attributes,
    )


def _load_capability(raw: Any, path: str) -> Capability:
    if not isinstance(raw, Mapping):
        raise SnapshotError(path, "must be an object")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise SnapshotError(f"{path}.name", "missing method name")
    name = normalize_identifier(name)

    raw_params = raw.get("params", [])
    if not isinstance(raw_params, list):
        raise SnapshotError(f"{path}.params", "must be a list")
    params: list[ParamSpec] = []
    for index, raw_param in enumerate(raw_params):
        param_path = f"{path}.params[{index}]"
        if not isinstance(raw_param, Mapping):
            raise SnapshotError(param_path, "must be an object")
        pname = raw_param.get("name")
        if not isinstance(pname, str) or not pname:
            raise SnapshotError(f"{param_path}.name", "missing parameter name")
        kind = raw_param.get("kind")
        if kind not in PARAM_KINDS:
            raise SnapshotError(f"{param_path}.kind", f"kind must be one of {PARAM_KINDS}")
        values = tuple(raw_param.get("values", ()))
        if kind == "enum" and not values:
            raise SnapshotError(f"{param_path}.values", "enum needs at least one value")
        pmin = raw_param.get("min")
        pmax = raw_param.get("max")
        if pmin is not None and pmax is not None and pmin > pmax:
            raise SnapshotError(f"{param_path}.min", "min exceeds max")
        params.append(ParamSpec(name=pname, kind=kind, values=values, min=pmin, max=pmax))

    writes = raw.get("writes", {})
    if not isinstance(writes, Mapping):
        raise SnapshotError(f"{path}.writes", "must be an object")
    return Capability(name=name, parameter_spec=tuple(params), writes=dict(writes))


def snapshot_document(state: HomeState) -> dict[str, Any]:
    """Serialize back to the snapshot document shape (loses the version counter)."""
    rooms: dict[str, Any] = {}
    for room_name in sorted(state.rooms):
        room = state.rooms[room_name]
        devices: dict[str, Any] = {}
        for device_id in sorted(room.devices):
            device = room.devices[device_id]
            devices[device_id] = {
                "type": device.device_type,
                "attributes": dict(device.attributes),
                "methods": [
                    {
                        "name": cap.name,
                        "params": [_param_doc(p) for p in cap.parameter_spec],
                        "writes": dict(cap.writes),
                    }
                    for cap in device.capabilities
                ],
            }
        rooms[room_name] = devices
    return {
        "home_id": state.home_id,
        "catalog": sorted(state.catalog),
        "rooms": rooms,
    }


def _param_doc(spec: ParamSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": spec.name, "kind": spec.kind}
    if spec.values:
        doc["values"] = list(spec.values)
    if spec.min is not None:
        doc["min"] = spec.min
    if spec.max is not None:
        doc["max"] = spec.max
    return doc


def lookup_device(state: HomeState, room: str, device: str) -> Device | None:
    """The (room, device) binding at the current version; absence is a value."""
    found = state.rooms.get(room)
    if found is None:
        return None
    return found.devices.get(device)


def capabilities_of(state: HomeState, room: str, device: str) -> tuple[Capability, ...] | None:
    found = lookup_device(state, room, device)
    if found is None:
        return None
    return found.capabilities


def apply_action(state: HomeState, action: AtomicAction) -> HomeState:
    """Execute one already-verified call, returning the next snapshot version.

    Callers must run the grounding checks first; an unverifiable action here
    means the filter was bypassed and raises ``ValueError("unverified action")``.
    """
    if isinstance(action, ErrorToken):
        raise ValueError("unverified action: error token is not executable")
    device = lookup_device(state, action.room, action.device)
    if device is None:
        raise ValueError(f"unverified action: no device {action.room}.{action.device}")
    cap = device.capability(action.capability)
    if cap is None or not cap.validate_params(action.params):
        raise ValueError(f"unverified action: {action}")

    by_name = {spec.name: value for spec, value in zip(cap.parameter_spec, action.params)}
    attributes = dict(device.attributes)
    for attr, target in cap.writes.items():
        if isinstance(target, str) and target.startswith("param:"):
            attributes[attr] = by_name[target[len("param:") :]]
        else:
            attributes[attr] = target

    new_device = replace(device, attributes=attributes)
    room = state.rooms[action.room]
    new_room = replace(room, devices={**room.devices, action.device: new_device})
    return replace(
        state,
        rooms={**state.rooms, action.room: new_room},
        timestamp=state.timestamp + 1,
    )


def render_state_text(state: HomeState) -> str:
    """Flatten the snapshot to one deterministic line per device."""
    lines = []
    for room_name, device in state.iter_devices():
        attrs = ", ".join(
            f"{k}={_render_attr(device.attributes[k])}" for k in sorted(device.attributes)
        )
        head = f"type={device.device_type}; {attrs}" if attrs else f"type={device.device_type}"
        methods = ", ".join(cap.signature() for cap in device.capabilities)
        lines.append(f"{room_name}: {device.id} ({head}) methods: [{methods}]")
    return "\n".join(lines)


def render_methods_text(state: HomeState) -> str:
    """Methods-only rendering (no attribute values)."""
    lines = []
    for room_name, device in state.iter_devices():
        methods = ", ".join(cap.signature() for cap in device.capabilities)
        lines.append(f"{room_name}: {device.id} methods: [{methods}]")
    return "\n".join(lines)


def _render_attr(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
