"""Benchmark harness: task corpora, scoring, and seeded synthetic generation.

Tasks come in six shapes: single and multi valid commands (VS, VM), single
and multi impossible commands (IS, IM), mixed commands (MM), and
underspecified commands that may need a clarification turn (INTERACTIVE).
Scoring is exact match and F1 over normalized action multisets, with the
invalid slice of exact match doubling as the rejection rate.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .actions import ActionSequence, normalize_sequence, parse_sequence
from .backends import embed_intent
from .home_model import load_snapshot
from .pipeline import Outcome, Pipeline, PipelineResult, Session, StageUsage

CATEGORIES = ("VS", "IS", "VM", "IM", "MM", "INTERACTIVE")
INVALID_CATEGORIES = ("IS", "IM")
ERROR_GOLD = "{error_input}"


class CorpusError(ValueError):
    """Raised for infeasible or inconsistent corpus parameters."""


# --- task records -----------------------------------------------------------


@dataclass(frozen=True)
class InteractionSpec:
    requires_clarification: bool
    simulated_answer: str = ""
    gold_after_answer: str = ""


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    home: str | Mapping[str, Any]  # home id reference or inline snapshot document
    instruction: str
    gold: str
    category: str
    interaction: InteractionSpec | None = None

    def expected_gold(self) -> str:
        if (
            self.category == "INTERACTIVE"
            and self.interaction is not None
            and self.interaction.requires_clarification
        ):
            return self.interaction.gold_after_answer
        return self.gold

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "home": self.home if isinstance(self.home, str) else dict(self.home),
            "instruction": self.instruction,
            "gold": self.gold,
            "category": self.category,
            "interaction": None
            if self.interaction is None
            else {
                "requires_clarification": self.interaction.requires_clarification,
                "simulated_answer": self.interaction.simulated_answer,
                "gold_after_answer": self.interaction.gold_after_answer,
            },
        }

    @staticmethod
    def from_json_dict(raw: Mapping[str, Any]) -> "TaskRecord":
        interaction = None
        if raw.get("interaction"):
            block = raw["interaction"]
            interaction = InteractionSpec(
                requires_clarification=bool(block["requires_clarification"]),
                simulated_answer=str(block.get("simulated_answer", "")),
                gold_after_answer=str(block.get("gold_after_answer", "")),
            )
        return TaskRecord(
            task_id=str(raw["task_id"]),
            home=raw["home"],
            instruction=str(raw["instruction"]),
            gold=str(raw["gold"]),
            category=str(raw["category"]),
            interaction=interaction,
        )


@dataclass
class Corpus:
    tasks: list[TaskRecord]
    homes: dict[str, dict[str, Any]]

    def home_document(self, task: TaskRecord) -> Mapping[str, Any]:
        if isinstance(task.home, str):
            try:
                return self.homes[task.home]
            except KeyError:
                raise CorpusError(f"task {task.task_id}: unknown home {task.home!r}") from None
        return task.home


def write_corpus(corpus: Corpus, directory: str | Path) -> Path:
    """Write ``dataset.jsonl`` plus one snapshot file per home; returns the dataset path."""
    directory = Path(directory)
    homes_dir = directory / "homes"
    homes_dir.mkdir(parents=True, exist_ok=True)
    for home_id in sorted(corpus.homes):
        path = homes_dir / f"{home_id}.json"
        path.write_text(
            json.dumps(corpus.homes[home_id], sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    dataset = directory / "dataset.jsonl"
    with open(dataset, "w", encoding="utf-8") as handle:
        for task in corpus.tasks:
            handle.write(json.dumps(task.to_json_dict(), sort_keys=True) + "\n")
    return dataset


def load_corpus(dataset: str | Path, homes_dir: str | Path | None = None) -> Corpus:
    dataset = Path(dataset)
    if homes_dir is None:
        homes_dir = dataset.parent / "homes"
    homes_dir = Path(homes_dir)
    tasks = []
    with open(dataset, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                tasks.append(TaskRecord.from_json_dict(json.loads(line)))
    homes: dict[str, dict[str, Any]] = {}
    if homes_dir.is_dir():
        for path in sorted(homes_dir.glob("*.json")):
            homes[path.stem] = json.loads(path.read_text(encoding="utf-8"))
    return Corpus(tasks=tasks, homes=homes)


# --- metrics ----------------------------------------------------------------


def exact_match(pred: ActionSequence, gold: ActionSequence, *, order_sensitive: bool = False) -> int:
    """All-or-nothing agreement over normalized atoms (error tokens included)."""
    pred_n = normalize_sequence(pred)
    gold_n = normalize_sequence(gold)
    if order_sensitive:
        return int(list(pred_n) == list(gold_n))
    return int(Counter(pred_n) == Counter(gold_n))


def f1_score(pred: ActionSequence, gold: ActionSequence, *, order_sensitive: bool = False) -> float:
    """Multiset precision/recall harmonic mean over full normalized atoms."""
    pred_n = normalize_sequence(pred)
    gold_n = normalize_sequence(gold)
    if not pred_n and not gold_n:
        return 1.0
    if not pred_n or not gold_n:
        return 0.0
    if order_sensitive:
        matched = sum(1 for p, g in zip(pred_n, gold_n) if p == g)
    else:
        matched = sum((Counter(pred_n) & Counter(gold_n)).values())
    precision = matched / len(pred_n)
    recall = matched / len(gold_n)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class CategoryScore:
    em: float
    f1: float
    n: int


@dataclass(frozen=True)
class MetricsReport:
    per_category: Mapping[str, CategoryScore]
    overall_em: float
    overall_f1: float
    rejection_rate: float | None
    autonomous_success: float | None
    clarification_success: float | None
    usage: StageUsage
    n_tasks: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "per_category": {
                name: {"em": score.em, "f1": score.f1, "n": score.n}
                for name, score in sorted(self.per_category.items())
            },
            "overall": {"em": self.overall_em, "f1": self.overall_f1},
            "rejection_rate": self.rejection_rate,
            "autonomous_success": self.autonomous_success,
            "clarification_success": self.clarification_success,
            "usage": self.usage.to_json_dict(),
            "n_tasks": self.n_tasks,
        }


# --- corpus execution -------------------------------------------------------


@dataclass
class TaskRun:
    """Everything observed while executing one task, including clarification turns."""

    task: TaskRecord
    results: list[PipelineResult]
    clarification_turns: int = 0

    @property
    def final(self) -> PipelineResult:
        return self.results[-1]

    @property
    def usage(self) -> StageUsage:
        total = StageUsage()
        for result in self.results:
            total.merge(result.usage)
        return total

    @staticmethod
    def from_result(task: TaskRecord, result: PipelineResult) -> "TaskRun":
        turns = 1 if result.outcome is Outcome.CLARIFICATION_NEEDED else 0
        return TaskRun(task=task, results=[result], clarification_turns=turns)


def run_corpus(
    corpus: Corpus,
    pipeline: Pipeline,
    *,
    workers: int = 1,
) -> list[TaskRun]:
    """Execute every task in its own session; the answer to at most one
    clarification comes from the record's simulated user."""
    snapshots = {
        home_id: load_snapshot(document) for home_id, document in corpus.homes.items()
    }

    def run_one(task: TaskRecord) -> TaskRun:
        if isinstance(task.home, str) and task.home in snapshots:
            home = snapshots[task.home]
        else:
            home = load_snapshot(corpus.home_document(task))
        session = Session(home=home, id=task.task_id)
        results = [pipeline.execute_instruction(session, task.instruction)]
        turns = 0
        if results[-1].outcome is Outcome.CLARIFICATION_NEEDED:
            turns = 1
            answer = task.interaction.simulated_answer if task.interaction else ""
            if answer:
                results.append(pipeline.answer_clarification(session, answer))
                if results[-1].outcome is Outcome.CLARIFICATION_NEEDED:
                    turns += 1  # the simulated user refuses a second round
        return TaskRun(task=task, results=results, clarification_turns=turns)

    if workers <= 1:
        return [run_one(task) for task in corpus.tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, corpus.tasks))


def score_corpus(
    tasks: Sequence[TaskRecord],
    runs: Sequence[TaskRun | PipelineResult],
    *,
    order_sensitive: bool = False,
) -> MetricsReport:
    if len(tasks) != len(runs):
        raise ValueError(f"{len(tasks)} tasks but {len(runs)} results")
    normalized_runs = [
        run if isinstance(run, TaskRun) else TaskRun.from_result(task, run)
        for task, run in zip(tasks, runs)
    ]

    ems: list[int] = []
    f1s: list[float] = []
    by_category: dict[str, list[int]] = {}
    by_category_f1: dict[str, list[float]] = {}
    usage = StageUsage()
    autonomous: list[int] = []
    clarified: list[int] = []

    for task, run in zip(tasks, normalized_runs):
        gold = parse_sequence(task.expected_gold())
        em = exact_match(run.final.final, gold, order_sensitive=order_sensitive)
        f1 = f1_score(run.final.final, gold, order_sensitive=order_sensitive)
        ems.append(em)
        f1s.append(f1)
        by_category.setdefault(task.category, []).append(em)
        by_category_f1.setdefault(task.category, []).append(f1)
        usage.merge(run.usage)
        if task.category == "INTERACTIVE" and task.interaction is not None:
            if task.interaction.requires_clarification:
                clarified.append(int(run.clarification_turns >= 1 and em == 1))
            else:
                autonomous.append(int(run.clarification_turns == 0 and em == 1))

    per_category = {
        name: CategoryScore(
            em=_mean(by_category[name]), f1=_mean(by_category_f1[name]), n=len(by_category[name])
        )
        for name in by_category
    }
    invalid_ems = [
        em
        for task, em in zip(tasks, ems)
        if task.category in INVALID_CATEGORIES
    ]
    return MetricsReport(
        per_category=per_category,
        overall_em=_mean(ems),
        overall_f1=_mean(f1s),
        rejection_rate=_mean(invalid_ems) if invalid_ems else None,
        autonomous_success=_mean(autonomous) if autonomous else None,
        clarification_success=_mean(clarified) if clarified else None,
        usage=usage,
        n_tasks=len(tasks),
    )


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


# --- report formatting ------------------------------------------------------


def write_report(reports: Mapping[str, MetricsReport], path: str | Path) -> None:
    """Machine-readable report; deterministic bytes for identical inputs."""
    payload = {label: report.to_json_dict() for label, report in sorted(reports.items())}
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def format_table(reports: Mapping[str, MetricsReport]) -> str:
    """Human table: one row per labelled run, EM/F1 per category plus overall."""
    categories = [
        c
        for c in CATEGORIES
        if any(c in report.per_category for report in reports.values())
    ]
    header = ["Method"] + [f"{c} EM/F1" for c in categories] + ["Overall EM/F1"]
    rows = [header]
    for label, report in reports.items():
        row = [label]
        for category in categories:
            score = report.per_category.get(category)
            row.append("-" if score is None else f"{score.em:.2%}/{score.f1:.2%}")
        row.append(f"{report.overall_em:.2%}/{report.overall_f1:.2%}")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if index == 0:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    for label, report in reports.items():
        extras = [f"usage[{label}]: {report.usage.to_json_dict()}"]
        if report.rejection_rate is not None:
            extras.append(f"rejection_rate[{label}]: {report.rejection_rate:.2%}")
        if report.autonomous_success is not None:
            extras.append(f"autonomous_success[{label}]: {report.autonomous_success:.2%}")
        if report.clarification_success is not None:
            extras.append(f"clarification_success[{label}]: {report.clarification_success:.2%}")
        lines.extend(extras)
    return "\n".join(lines)


# --- synthetic corpus generation --------------------------------------------

ROOM_POOL = (
    "attic",
    "balcony",
    "basement",
    "bathroom",
    "bedroom",
    "corridor",
    "dining_room",
    "entrance",
    "foyer",
    "garage",
    "guest_bedroom",
    "hallway",
    "kitchen",
    "laundry_room",
    "living_room",
    "master_bedroom",
    "nursery",
    "office",
    "store_room",
    "study_room",
)

# Each device type declares attribute initializers, methods (name, params,
# writes) and an instruction phrase per method.  The corpus stays entirely
# catalog-driven: nothing below is hardcoded elsewhere.
DEVICE_CATALOG: dict[str, dict[str, Any]] = {
    "lamp": {
        "attributes": {"power": ["OFF", "ON"]},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
        ],
    },
    "light": {
        "attributes": {"power": ["OFF", "ON"], "brightness": (0, 100)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_brightness",
                "params": [{"name": "level", "kind": "integer", "min": 0, "max": 100}],
                "writes": {"brightness": "param:level"},
                "phrase": "Set the brightness of the {device} in the {room} to {value}.",
            },
        ],
    },
    "oven": {
        "attributes": {"power": ["OFF", "ON"], "temperature": (50, 250)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_temperature",
                "params": [{"name": "temperature", "kind": "integer", "min": 50, "max": 250}],
                "writes": {"temperature": "param:temperature"},
                "phrase": "Set the {device} in the {room} to {value} degrees.",
            },
        ],
    },
    "fridge": {
        "attributes": {"temperature": (1, 8)},
        "methods": [
            {
                "name": "set_temperature",
                "params": [{"name": "temperature", "kind": "integer", "min": 1, "max": 8}],
                "writes": {"temperature": "param:temperature"},
                "phrase": "Set the {device} in the {room} to {value} degrees.",
            },
        ],
    },
    "smart_lock": {
        "attributes": {"lock_state": ["UNLOCKED", "LOCKED"]},
        "methods": [
            {"name": "lock", "writes": {"lock_state": "LOCKED"}, "phrase": "Lock the {device} in the {room}."},
            {"name": "unlock", "writes": {"lock_state": "UNLOCKED"}, "phrase": "Unlock the {device} in the {room}."},
        ],
    },
    "dehumidifier": {
        "attributes": {"power": ["OFF", "ON"], "intensity": (0, 5), "humidity": (30, 80)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_intensity",
                "params": [{"name": "intensity", "kind": "integer", "min": 0, "max": 5}],
                "writes": {"intensity": "param:intensity"},
                "phrase": "Set the intensity of the {device} to {value} in the {room}.",
            },
            {
                "name": "set_humidity",
                "params": [{"name": "humidity", "kind": "integer", "min": 30, "max": 80}],
                "writes": {"humidity": "param:humidity"},
                "phrase": "Set the {device} in the {room} to {value} percent humidity.",
            },
        ],
    },
    "heater": {
        "attributes": {"power": ["OFF", "ON"], "temperature": (10, 35)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_temperature",
                "params": [{"name": "temperature", "kind": "integer", "min": 10, "max": 35}],
                "writes": {"temperature": "param:temperature"},
                "phrase": "Set the {device} in the {room} to {value} degrees.",
            },
        ],
    },
    "fan": {
        "attributes": {"power": ["OFF", "ON"], "speed": ["low", "medium", "high"]},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_speed",
                "params": [{"name": "speed", "kind": "enum", "values": ["low", "medium", "high"]}],
                "writes": {"speed": "param:speed"},
                "phrase": "Set the {device} in the {room} to {value} speed.",
            },
        ],
    },
    "tv": {
        "attributes": {"power": ["OFF", "ON"], "volume": (0, 100)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_volume",
                "params": [{"name": "volume", "kind": "integer", "min": 0, "max": 100}],
                "writes": {"volume": "param:volume"},
                "phrase": "Set the volume of the {device} in the {room} to {value}.",
            },
        ],
    },
    "curtain": {
        "attributes": {"position": ["OPEN", "CLOSED"]},
        "methods": [
            {"name": "open", "writes": {"position": "OPEN"}, "phrase": "Open the {device} in the {room}."},
            {"name": "close", "writes": {"position": "CLOSED"}, "phrase": "Close the {device} in the {room}."},
        ],
    },
    "air_purifier": {
        "attributes": {"power": ["OFF", "ON"], "mode": ["auto", "sleep"]},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_mode",
                "params": [{"name": "mode", "kind": "enum", "values": ["auto", "sleep"]}],
                "writes": {"mode": "param:mode"},
                "phrase": "Set the {device} in the {room} to {value} mode.",
            },
        ],
    },
    "humidifier": {
        "attributes": {"power": ["OFF", "ON"], "intensity": (0, 100)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_intensity",
                "params": [{"name": "intensity", "kind": "integer", "min": 0, "max": 100}],
                "writes": {"intensity": "param:intensity"},
                "phrase": "Set the intensity of the {device} to {value} in the {room}.",
            },
        ],
    },
    "media_player": {
        "attributes": {"state": ["stopped", "playing", "paused"], "volume": (0, 100)},
        "methods": [
            {"name": "play", "writes": {"state": "playing"}, "phrase": "Start playback on the {device} in the {room}."},
            {"name": "pause", "writes": {"state": "paused"}, "phrase": "Pause the {device} in the {room}."},
            {"name": "stop", "writes": {"state": "stopped"}, "phrase": "Stop the {device} in the {room}."},
            {
                "name": "set_volume",
                "params": [{"name": "volume", "kind": "integer", "min": 0, "max": 100}],
                "writes": {"volume": "param:volume"},
                "phrase": "Set the volume of the {device} in the {room} to {value}.",
            },
        ],
    },
    "vacuum_robot": {
        "attributes": {"state": ["stopped", "cleaning", "charging"]},
        "methods": [
            {"name": "start", "writes": {"state": "cleaning"}, "phrase": "Start the {device} in the {room}."},
            {"name": "stop", "writes": {"state": "stopped"}, "phrase": "Stop the {device} in the {room}."},
            {"name": "charge", "writes": {"state": "charging"}, "phrase": "Send the {device} in the {room} to charge."},
        ],
    },
    "aromatherapy": {
        "attributes": {"power": ["OFF", "ON"], "interval": (10, 60)},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {
                "name": "set_interval",
                "params": [{"name": "interval", "kind": "integer", "min": 10, "max": 60}],
                "writes": {"interval": "param:interval"},
                "phrase": "Set the interval of the {device} in the {room} to {value} minutes.",
            },
        ],
    },
    "pet_feeder": {
        "attributes": {"power": ["OFF", "ON"]},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {"name": "feed", "writes": {}, "phrase": "Feed the pet with the {device} in the {room}."},
        ],
    },
    "garage_door": {
        "attributes": {"position": ["OPEN", "CLOSED"]},
        "methods": [
            {"name": "open", "writes": {"position": "OPEN"}, "phrase": "Open the {device} in the {room}."},
            {"name": "close", "writes": {"position": "CLOSED"}, "phrase": "Close the {device} in the {room}."},
        ],
    },
    "blinds": {
        "attributes": {"position": ["OPEN", "CLOSED"]},
        "methods": [
            {"name": "open", "writes": {"position": "OPEN"}, "phrase": "Open the {device} in the {room}."},
            {"name": "close", "writes": {"position": "CLOSED"}, "phrase": "Close the {device} in the {room}."},
        ],
    },
    "coffee_maker": {
        "attributes": {"power": ["OFF", "ON"]},
        "methods": [
            {"name": "turn_on", "writes": {"power": "ON"}, "phrase": "Turn on the {device} in the {room}."},
            {"name": "turn_off", "writes": {"power": "OFF"}, "phrase": "Turn off the {device} in the {room}."},
            {"name": "brew", "writes": {}, "phrase": "Brew a coffee with the {device} in the {room}."},
        ],
    },
    "thermostat": {
        "attributes": {"temperature": (10, 35)},
        "methods": [
            {
                "name": "set_temperature",
                "params": [{"name": "temperature", "kind": "integer", "min": 10, "max": 35}],
                "writes": {"temperature": "param:temperature"},
                "phrase": "Set the {device} in the {room} to {value} degrees.",
            },
        ],
    },
}

DEFAULT_MIX: dict[str, float] = {"VS": 0.25, "IS": 0.231, "VM": 0.15, "IM": 0.155, "MM": 0.214}
# Share of impossible operations an un-warned generator maps onto a nearby
# existing entity instead of attempting faithfully (only room-mismatch
# operations have such a nearby entity).
DEFAULT_FORCED_GROUNDING_RATE = 1 / 3
_MIN_ABSENT_TYPES = 4
_MIN_ABSENT_ROOMS = 2


@dataclass(frozen=True)
class _Op:
    """One sub-operation of a task, with everything the side channel needs."""

    desc: str
    valid: bool
    reason: str
    call: str
    phrase: str
    device: str
    ambiguous: bool = False
    candidates: tuple[str, ...] = ()
    grounded: str | None = None
    force_ground: bool = False

    def channel_dict(self) -> dict[str, Any]:
        entry: dict[str, Any] = {
            "desc": self.desc,
            "valid": self.valid,
            "reason": self.reason,
            "call": self.call,
        }
        if self.ambiguous:
            entry["amb"] = True
        if self.candidates:
            entry["cands"] = list(self.candidates)
        if self.grounded:
            entry["grounded"] = self.grounded
        if self.force_ground:
            entry["fg"] = True
        return entry


def category_counts(n_tasks: int, mix: Mapping[str, float]) -> dict[str, int]:
    """Largest-remainder allocation of ``n_tasks`` across the mix."""
    total = sum(mix.values())
    if abs(total - 1.0) > 1e-9:
        raise CorpusError(f"category mix must sum to 1, got {total}")
    for category in mix:
        if category not in CATEGORIES:
            raise CorpusError(f"unknown category {category!r}")
    floors = {c: int(n_tasks * fraction) for c, fraction in mix.items()}
    remainder = n_tasks - sum(floors.values())
    by_fraction = sorted(
        mix,
        key=lambda c: (n_tasks * mix[c]) - floors[c],
        reverse=True,
    )
    for category in by_fraction[:remainder]:
        floors[category] += 1
    return floors


def generate_corpus(
    n_tasks: int,
    *,
    n_homes: int = 20,
    rooms_per_home: tuple[int, int] = (3, 6),
    devices_per_room: tuple[int, int] = (1, 4),
    mix: Mapping[str, float] | None = None,
    seed: int = 0,
    forced_grounding_rate: float = DEFAULT_FORCED_GROUNDING_RATE,
) -> Corpus:
    """Deterministic synthetic corpus; identical parameters give identical bytes."""
    if n_tasks < 0:
        raise CorpusError("n_tasks must be non-negative")
    if not (0 <= forced_grounding_rate <= 1):
        raise CorpusError("forced_grounding_rate must be within [0, 1]")
    lo, hi = rooms_per_home
    if not (1 <= lo <= hi <= len(ROOM_POOL) - _MIN_ABSENT_ROOMS):
        raise CorpusError(f"rooms_per_home must fit 1..{len(ROOM_POOL) - _MIN_ABSENT_ROOMS}")
    dlo, dhi = devices_per_room
    if not (1 <= dlo <= dhi):
        raise CorpusError("devices_per_room range is empty")
    mix = dict(mix) if mix is not None else dict(DEFAULT_MIX)
    counts = category_counts(n_tasks, mix)

    rng = random.Random(seed)
    homes: dict[str, dict[str, Any]] = {}
    home_ids = [f"home{i:03d}" for i in range(n_homes)]
    for home_id in home_ids:
        homes[home_id] = _generate_home(home_id, rng, rooms_per_home, devices_per_room)

    categories: list[str] = []
    for category in CATEGORIES:
        categories.extend([category] * counts.get(category, 0))
    rng.shuffle(categories)

    tasks: list[TaskRecord] = []
    interactive_index = 0
    for index, category in enumerate(categories):
        task_id = f"task{index:05d}_{category.lower()}"
        if category == "INTERACTIVE":
            home_id = f"ihome{interactive_index:04d}"
            interactive_index += 1
            document, task = _generate_interactive_task(task_id, home_id, rng)
            homes[home_id] = document
            tasks.append(task)
            continue
        home_id = rng.choice(home_ids) if home_ids else ""
        if not home_id:
            raise CorpusError("non-interactive tasks need n_homes >= 1")
        tasks.append(
            _generate_task(task_id, home_id, homes[home_id], category, rng, forced_grounding_rate)
        )
    return Corpus(tasks=tasks, homes=homes)


def _generate_home(
    home_id: str,
    rng: random.Random,
    rooms_per_home: tuple[int, int],
    devices_per_room: tuple[int, int],
) -> dict[str, Any]:
    n_rooms = rng.randint(*rooms_per_home)
    room_names = sorted(rng.sample(ROOM_POOL, n_rooms))
    # Keep a healthy slice of the catalog out of every home so impossible
    # commands always have something to point at.
    placeable = sorted(
        rng.sample(sorted(DEVICE_CATALOG), len(DEVICE_CATALOG) - _MIN_ABSENT_TYPES)
    )
    rooms: dict[str, Any] = {}
    for room_name in room_names:
        n_devices = rng.randint(*devices_per_room)
        types = [rng.choice(placeable) for _ in range(n_devices)]
        devices: dict[str, Any] = {}
        for device_type in types:
            device_id = device_type
            suffix = 2
            while device_id in devices:
                device_id = f"{device_type}_{suffix}"
                suffix += 1
            devices[device_id] = _instantiate_device(device_type, rng)
        rooms[room_name] = devices
    return {
        "home_id": home_id,
        "catalog": sorted(DEVICE_CATALOG),
        "rooms": rooms,
    }


def _instantiate_device(device_type: str, rng: random.Random) -> dict[str, Any]:
    template = DEVICE_CATALOG[device_type]
    attributes = {}
    for attr, initializer in template["attributes"].items():
        if isinstance(initializer, list):
            attributes[attr] = rng.choice(initializer)
        else:
            attributes[attr] = rng.randint(*initializer)
    return {
        "type": device_type,
        "attributes": attributes,
        "methods": [
            {
                "name": method["name"],
                "params": [dict(p) for p in method.get("params", [])],
                "writes": dict(method["writes"]),
            }
            for method in template["methods"]
        ],
    }


def _home_inventory(document: Mapping[str, Any]) -> list[tuple[str, str, str]]:
    """(room, device_id, device_type) triples of a snapshot document."""
    out = []
    for room, devices in document["rooms"].items():
        for device_id, device in devices.items():
            out.append((room, device_id, device["type"]))
    return sorted(out)


def _absent_types(document: Mapping[str, Any]) -> list[str]:
    present = {entry[2] for entry in _home_inventory(document)}
    return sorted(set(DEVICE_CATALOG) - present)


def _absent_rooms(document: Mapping[str, Any]) -> list[str]:
    return sorted(set(ROOM_POOL) - set(document["rooms"]))


def _sample_param_value(param: Mapping[str, Any], rng: random.Random) -> Any:
    if param["kind"] == "enum":
        return rng.choice(list(param["values"]))
    return rng.randint(int(param["min"]), int(param["max"]))


def _phrase(method: Mapping[str, Any], room: str, device: str, value: Any) -> str:
    return method["phrase"].format(
        device=device.replace("_", " "),
        room=room.replace("_", " "),
        value=value,
    )


def _valid_op(document: Mapping[str, Any], rng: random.Random) -> _Op:
    room, device_id, device_type = rng.choice(_home_inventory(document))
    method = rng.choice(DEVICE_CATALOG[device_type]["methods"])
    params = [_sample_param_value(p, rng) for p in method.get("params", [])]
    args = ", ".join(json.dumps(v) if isinstance(v, str) else str(v) for v in params)
    call = f"{room}.{device_id}.{method['name']}({args})"
    value = params[0] if params else ""
    return _Op(
        desc=f"{method['name']} {room}.{device_id}",
        valid=True,
        reason=f"{device_id} exists in {room}",
        call=call,
        phrase=_phrase(method, room, device_id, value),
        device=device_id,
    )


def _invalid_op(
    document: Mapping[str, Any], rng: random.Random, forced_grounding_rate: float
) -> _Op:
    absent_types = _absent_types(document)
    absent_rooms = _absent_rooms(document)
    inventory = _home_inventory(document)
    use_absent_room = bool(absent_rooms and inventory) and (
        not absent_types or rng.random() < 0.5
    )
    if use_absent_room:
        # A real device named in a room that does not exist; the nearest
        # existing entity makes a plausible wrong mapping.
        room = rng.choice(absent_rooms)
        true_room, device_id, device_type = rng.choice(inventory)
        method = rng.choice(DEVICE_CATALOG[device_type]["methods"])
        params = [_sample_param_value(p, rng) for p in method.get("params", [])]
        args = ", ".join(json.dumps(v) if isinstance(v, str) else str(v) for v in params)
        call = f"{room}.{device_id}.{method['name']}({args})"
        grounded = f"{true_room}.{device_id}.{method['name']}({args})"
        value = params[0] if params else ""
        return _Op(
            desc=f"{method['name']} {room}.{device_id}",
            valid=False,
            reason=f"no room {room}",
            call=call,
            phrase=_phrase(method, room, device_id, value),
            device=device_id,
            grounded=grounded,
            force_ground=rng.random() < forced_grounding_rate,
        )
    if not absent_types:
        raise CorpusError("cannot build an impossible command: home owns every type and room")
    device_type = rng.choice(absent_types)
    room = rng.choice(sorted(document["rooms"])) if document["rooms"] else rng.choice(ROOM_POOL)
    method = rng.choice(DEVICE_CATALOG[device_type]["methods"])
    params = [_sample_param_value(p, rng) for p in method.get("params", [])]
    args = ", ".join(json.dumps(v) if isinstance(v, str) else str(v) for v in params)
    call = f"{room}.{device_type}.{method['name']}({args})"
    value = params[0] if params else ""
    return _Op(
        desc=f"{method['name']} {room}.{device_type}",
        valid=False,
        reason=f"no {device_type} in {room}",
        call=call,
        phrase=_phrase(method, room, device_type, value),
        device=device_type,
    )


def _task_from_ops(
    task_id: str,
    home_id: str,
    document: Mapping[str, Any],
    category: str,
    ops: list[_Op],
) -> TaskRecord:
    phrases = [op.phrase.rstrip(".") for op in ops]
    text = ". ".join(phrases) + "." if phrases else ""
    if category in INVALID_CATEGORIES:
        gold = ERROR_GOLD
    else:
        gold = "{" + ", ".join(op.call if op.valid else "error_input" for op in ops) + "}"
    channel = {
        "ops": [op.channel_dict() for op in ops],
        "absent_devices": _absent_types(document),
        "absent_rooms": _absent_rooms(document),
    }
    return TaskRecord(
        task_id=task_id,
        home=home_id,
        instruction=embed_intent(text, channel),
        gold=gold,
        category=category,
    )


def _generate_task(
    task_id: str,
    home_id: str,
    document: Mapping[str, Any],
    category: str,
    rng: random.Random,
    forced_grounding_rate: float,
) -> TaskRecord:
    if category == "VS":
        ops = [_valid_op(document, rng)]
    elif category == "VM":
        ops = [_valid_op(document, rng) for _ in range(rng.randint(2, 3))]
    elif category == "IS":
        ops = [_invalid_op(document, rng, forced_grounding_rate)]
    elif category == "IM":
        ops = [
            _invalid_op(document, rng, forced_grounding_rate)
            for _ in range(rng.randint(2, 3))
        ]
    elif category == "MM":
        ops = [_valid_op(document, rng), _invalid_op(document, rng, forced_grounding_rate)]
        rng.shuffle(ops)
    else:
        raise CorpusError(f"unsupported category {category!r}")
    return _task_from_ops(task_id, home_id, document, category, ops)


def _generate_interactive_task(
    task_id: str, home_id: str, rng: random.Random
) -> tuple[dict[str, Any], TaskRecord]:
    """Underspecified device reference resolved by state or by asking.

    The dedicated home hosts two same-type devices; their power states decide
    whether exactly one target qualifies (silent resolution) or the agent
    must ask which one is meant.
    """
    room = rng.choice(ROOM_POOL)
    action = rng.choice(["turn_on", "turn_off"])
    idle, active = ("OFF", "ON") if action == "turn_on" else ("ON", "OFF")
    requires_clarification = rng.random() < 0.5

    if requires_clarification:
        states = {"lamp_a": idle, "lamp_b": idle}
    else:
        target = rng.choice(["lamp_a", "lamp_b"])
        states = {
            device: (idle if device == target else active) for device in ("lamp_a", "lamp_b")
        }

    devices = {}
    for device_id, power in states.items():
        device = _instantiate_device("lamp", rng)
        device["attributes"]["power"] = power
        devices[device_id] = device
    document = {
        "home_id": home_id,
        "catalog": sorted(DEVICE_CATALOG),
        "rooms": {room: devices},
    }

    verb = action.replace("_", " ").capitalize()
    text = f"{verb} the lamp."
    candidates = tuple(f"{room}.{d}" for d in sorted(states))

    if requires_clarification:
        answer = rng.choice(candidates)
        resolved_call = f"{answer}.{action}()"
        channel = {
            "ops": [
                {
                    "desc": f"{action} an unspecified lamp",
                    "valid": True,
                    "amb": True,
                    "reason": f"multiple lamps in {room} could be meant",
                    "cands": list(candidates),
                    "call": f"{candidates[0]}.{action}()",
                }
            ],
            "clar": {
                answer: {
                    "ops": [
                        {
                            "desc": f"{action} {answer}",
                            "valid": True,
                            "reason": f"user chose {answer}",
                            "call": resolved_call,
                        }
                    ]
                }
            },
            "absent_devices": _absent_types(document),
            "absent_rooms": _absent_rooms(document),
        }
        gold = "{" + resolved_call + "}"
        interaction = InteractionSpec(
            requires_clarification=True,
            simulated_answer=answer,
            gold_after_answer=gold,
        )
    else:
        target = next(d for d, power in states.items() if power == idle)
        call = f"{room}.{target}.{action}()"
        channel = {
            "ops": [
                {
                    "desc": f"{action} the one lamp whose state fits: {room}.{target}",
                    "valid": True,
                    "reason": f"exactly one lamp qualifies: {room}.{target}",
                    "call": call,
                }
            ],
            "absent_devices": _absent_types(document),
            "absent_rooms": _absent_rooms(document),
        }
        gold = "{" + call + "}"
        interaction = InteractionSpec(
            requires_clarification=False, simulated_answer="", gold_after_answer=gold
        )

    task = TaskRecord(
        task_id=task_id,
        home=home_id,
        instruction=embed_intent(text, channel),
        gold=gold,
        category="INTERACTIVE",
        interaction=interaction,
    )
    return document, task
