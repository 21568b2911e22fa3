"""Transport task specifications and the built-in five-task suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli


class TaskSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ContainerSpec:
    id: str
    room: str


@dataclass(frozen=True)
class ObjectSupply:
    class_name: str
    count: int
    hint: tuple[str, ...] = ()


@dataclass(frozen=True)
class VariationSpec:
    id: str
    counts: dict[str, int]


@dataclass(frozen=True)
class TaskSpec:
    id: str
    description: str
    rooms: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...]
    start_room: str
    containers: tuple[ContainerSpec, ...]
    target: str
    objects: tuple[ObjectSupply, ...]
    variations: tuple[VariationSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.variations:
            raise TaskSpecError(f"task {self.id}: at least one variation is required")
        ids = [v.id for v in self.variations]
        if len(set(ids)) != len(ids):
            raise TaskSpecError(f"task {self.id}: duplicate variation ids")

    def variation(self, variation_id: str | None = None) -> VariationSpec:
        if variation_id is None:
            return self.variations[0]
        for v in self.variations:
            if v.id == variation_id:
                return v
        raise TaskSpecError(f"task {self.id}: unknown variation {variation_id!r}")


def task_from_dict(data: dict[str, Any]) -> TaskSpec:
    try:
        return TaskSpec(
            id=str(data["id"]),
            description=str(data["description"]),
            rooms=tuple(data["rooms"]),
            edges=tuple((str(a), str(b), int(n)) for a, b, n in data["edges"]),
            start_room=str(data["start_room"]),
            containers=tuple(ContainerSpec(c["id"], c["room"]) for c in data["containers"]),
            target=str(data["target"]),
            objects=tuple(
                ObjectSupply(o["class"], int(o["count"]), tuple(o.get("hint", ()))) for o in data["objects"]
            ),
            variations=tuple(
                VariationSpec(str(v["id"]), {k: int(n) for k, n in v["counts"].items()})
                for v in data["variations"]
            ),
        )
    except KeyError as exc:
        raise TaskSpecError(f"task spec is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise TaskSpecError(f"malformed task spec: {exc}") from None


def load_tasks(path: str | Path) -> list[TaskSpec]:
    """Read a TOML file holding one or more ``[[task]]`` tables."""
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    return [task_from_dict(t) for t in data.get("task", [])]


def _task(id, description, rooms, edges, start, containers, target, objects, variations) -> TaskSpec:
    return TaskSpec(
        id,
        description,
        tuple(rooms),
        tuple(edges),
        start,
        tuple(ContainerSpec(c, r) for c, r in containers),
        target,
        tuple(ObjectSupply(cls, n, tuple(hint)) for cls, n, hint in objects),
        tuple(VariationSpec(vid, counts) for vid, counts in variations),
    )


BUILTIN_TASKS: tuple[TaskSpec, ...] = (
    _task(
        "clear_table",
        "Clear the dining things into the dishwasher.",
        ["bedroom", "dining_room", "hallway", "kitchen", "living_room"],
        [
            ("hallway", "kitchen", 2),
            ("hallway", "living_room", 1),
            ("hallway", "bedroom", 3),
            ("kitchen", "dining_room", 1),
            ("living_room", "dining_room", 2),
        ],
        "hallway",
        [("dishwasher", "kitchen"), ("cabinet", "dining_room"), ("coffee_table", "living_room")],
        "dishwasher",
        [
            ("plate", 3, ["dining_room", "living_room", "coffee_table", "bedroom"]),
            ("fork", 4, ["dining_room", "cabinet", "living_room", "kitchen"]),
        ],
        [("a", {"plate": 2, "fork": 3}), ("b", {"plate": 1, "fork": 4})],
    ),
    _task(
        "store_fruit",
        "Put the fruit away in the fridge.",
        ["bathroom", "garden", "hallway", "kitchen", "living_room", "pantry"],
        [
            ("hallway", "kitchen", 1),
            ("hallway", "living_room", 2),
            ("hallway", "bathroom", 1),
            ("kitchen", "pantry", 2),
            ("living_room", "garden", 3),
            ("garden", "pantry", 4),
        ],
        "hallway",
        [("fridge", "kitchen"), ("basket", "garden"), ("shelf", "pantry")],
        "fridge",
        [
            ("apple", 4, ["garden", "basket", "pantry", "living_room"]),
            ("orange", 4, ["pantry", "shelf", "garden", "living_room"]),
        ],
        [("a", {"apple": 3, "orange": 2}), ("b", {"apple": 1, "orange": 4})],
    ),
    _task(
        "gather_laundry",
        "Collect the dirty clothes into the laundry basket.",
        ["bathroom", "bedroom", "guest_room", "hallway", "laundry_room", "living_room", "office"],
        [
            ("hallway", "bedroom", 2),
            ("hallway", "bathroom", 1),
            ("hallway", "living_room", 1),
            ("hallway", "laundry_room", 3),
            ("bedroom", "guest_room", 2),
            ("living_room", "office", 2),
            ("office", "guest_room", 4),
        ],
        "living_room",
        [("laundry_basket", "laundry_room"), ("wardrobe", "bedroom"), ("hamper", "bathroom")],
        "laundry_basket",
        [
            ("shirt", 4, ["bedroom", "wardrobe", "guest_room", "office"]),
            ("sock", 4, ["bathroom", "hamper", "bedroom", "living_room", "guest_room"]),
        ],
        [("a", {"shirt": 2, "sock": 3}), ("b", {"shirt": 4, "sock": 1})],
    ),
    _task(
        "tidy_study",
        "Return the books and pencils to the desk in the study.",
        ["bedroom", "hallway", "kitchen", "library", "living_room", "study"],
        [
            ("hallway", "study", 2),
            ("hallway", "kitchen", 1),
            ("hallway", "living_room", 2),
            ("living_room", "library", 1),
            ("library", "study", 3),
            ("kitchen", "bedroom", 4),
        ],
        "kitchen",
        [("desk", "study"), ("bookcase", "library"), ("nightstand", "bedroom")],
        "desk",
        [
            ("book", 4, ["library", "bookcase", "bedroom", "nightstand", "living_room"]),
            ("pencil", 3, ["kitchen", "living_room", "bedroom", "library"]),
        ],
        [("a", {"book": 3, "pencil": 2}), ("b", {"book": 2, "pencil": 3})],
    ),
    _task(
        "pack_toys",
        "Pack the scattered toys into the toy box.",
        ["attic", "bathroom", "bedroom", "garden", "hallway", "kids_room", "kitchen", "living_room"],
        [
            ("hallway", "kids_room", 1),
            ("hallway", "living_room", 2),
            ("hallway", "kitchen", 2),
            ("hallway", "bathroom", 1),
            ("kids_room", "bedroom", 1),
            ("bedroom", "attic", 3),
            ("living_room", "garden", 2),
            ("kitchen", "garden", 3),
        ],
        "hallway",
        [("toy_box", "kids_room"), ("bench", "garden"), ("chest", "attic")],
        "toy_box",
        [
            ("ball", 4, ["garden", "bench", "living_room", "bathroom", "attic"]),
            ("block", 4, ["living_room", "bedroom", "chest", "kitchen", "kids_room"]),
        ],
        [("a", {"ball": 2, "block": 3}), ("b", {"ball": 3, "block": 3})],
    ),
)


def builtin_suite() -> list[TaskSpec]:
    return list(BUILTIN_TASKS)
