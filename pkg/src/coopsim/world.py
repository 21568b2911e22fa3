"""Turn-based symbolic household world.

Agents move between rooms over weighted edges, grab target objects (two hands
each) and deposit them in goal containers. Every primitive costs one tick and
all agents act simultaneously.
"""

from __future__ import annotations

import copy
import heapq
import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from coopsim.rng import Lcg64

HANDS = 2
DEFAULT_MAX_TICKS = 250


class WorldError(ValueError):
    """Invalid world construction or an invalid request against a world."""


class InvalidAction(WorldError):
    pass


class TickBudgetExhausted(WorldError):
    pass


@dataclass(frozen=True)
class Location:
    kind: str  # "room" | "container" | "hand"
    ref: str
    slot: int | None = None

    @classmethod
    def room(cls, room_id: str) -> Location:
        return cls("room", room_id)

    @classmethod
    def container(cls, container_id: str) -> Location:
        return cls("container", container_id)

    @classmethod
    def hand(cls, agent_id: str, slot: int) -> Location:
        return cls("hand", agent_id, slot)


@dataclass
class ObjectInstance:
    id: str
    class_name: str
    location: Location


@dataclass(frozen=True)
class Container:
    id: str
    room: str


@dataclass
class AgentBody:
    id: str
    name: str
    room: str
    hands: list[str | None] = field(default_factory=lambda: [None] * HANDS)
    in_transit: tuple[str, int] | None = None

    @property
    def held(self) -> list[str]:
        return [h for h in self.hands if h is not None]


@dataclass(frozen=True)
class Requirement:
    class_name: str
    count: int
    container: str


@dataclass(frozen=True)
class GoalSpec:
    requirements: tuple[Requirement, ...]
    description: str


class ActionKind(Enum):
    # declaration order is the sort order of available action lists
    EXPLORE = "explore"
    GO_GRAB = "go_grab"
    GO_PUT = "go_put"
    SEND_MESSAGE = "send_message"
    WAIT = "wait"

    @property
    def rank(self) -> int:
        return list(ActionKind).index(self)


@dataclass(frozen=True)
class HighLevelAction:
    kind: ActionKind
    target: str | None
    display_text: str

    @classmethod
    def explore(cls, room: str) -> HighLevelAction:
        return cls(ActionKind.EXPLORE, room, f"go explore the {pretty(room)}")

    @classmethod
    def go_grab(cls, object_id: str, class_name: str) -> HighLevelAction:
        return cls(ActionKind.GO_GRAB, object_id, f"go grab the {pretty(class_name)} ({object_id})")

    @classmethod
    def go_put(cls, container: str) -> HighLevelAction:
        return cls(ActionKind.GO_PUT, container, f"go put the held objects into the {pretty(container)}")

    @classmethod
    def send_message(cls) -> HighLevelAction:
        return cls(ActionKind.SEND_MESSAGE, None, "send a message")

    @classmethod
    def wait(cls) -> HighLevelAction:
        return cls(ActionKind.WAIT, None, "wait")

    def sort_key(self) -> tuple[int, str]:
        return (self.kind.rank, self.target or "")


class PrimitiveKind(Enum):
    TRAVERSE = "traverse"
    GRAB = "grab"
    PUT = "put"
    SPEAK = "speak"
    IDLE = "idle"


@dataclass(frozen=True)
class Primitive:
    kind: PrimitiveKind
    target: str | None = None
    text: str | None = None

    @classmethod
    def traverse(cls, room: str) -> Primitive:
        return cls(PrimitiveKind.TRAVERSE, room)

    @classmethod
    def grab(cls, object_id: str) -> Primitive:
        return cls(PrimitiveKind.GRAB, object_id)

    @classmethod
    def put(cls, container: str) -> Primitive:
        return cls(PrimitiveKind.PUT, container)

    @classmethod
    def speak(cls, text: str = "") -> Primitive:
        return cls(PrimitiveKind.SPEAK, None, text)

    @classmethod
    def idle(cls) -> Primitive:
        return cls(PrimitiveKind.IDLE)


@dataclass(frozen=True)
class Event:
    tick: int
    agent: str | None
    event_kind: str
    payload: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Progress:
    satisfied: int
    required: int
    text: str


@dataclass
class World:
    rooms: dict[str, dict[str, int]]
    objects: dict[str, ObjectInstance]
    containers: dict[str, Container]
    agents: dict[str, AgentBody]
    goal: GoalSpec
    tick: int = 0
    seed: int = 0
    max_ticks: int = DEFAULT_MAX_TICKS

    def clone(self) -> World:
        return copy.deepcopy(self)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default)

    def agent(self, agent_id: str) -> AgentBody:
        try:
            return self.agents[agent_id]
        except KeyError:
            raise WorldError(f"unknown agent {agent_id!r}") from None

    def room_of(self, loc: Location) -> str:
        if loc.kind == "room":
            return loc.ref
        if loc.kind == "container":
            return self.containers[loc.ref].room
        return self.agents[loc.ref].room

    def goal_containers(self) -> list[str]:
        return sorted({r.container for r in self.goal.requirements})

    def target_classes(self) -> set[str]:
        return {r.class_name for r in self.goal.requirements}


def _json_default(obj: Any) -> Any:
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def pretty(token: str) -> str:
    return token.replace("_", " ")


def plural(class_name: str, count: int) -> str:
    word = pretty(class_name)
    return word if count == 1 else word + "s"


def describe_requirements(requirements: Iterable[Requirement]) -> str:
    by_container: dict[str, list[str]] = {}
    for req in requirements:
        by_container.setdefault(req.container, []).append(f"{req.count} {plural(req.class_name, req.count)}")
    parts = [f"{_join(items)} to the {pretty(c)}" for c, items in by_container.items()]
    return "Transport " + "; ".join(parts) + "."


def _join(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


# --- construction ----------------------------------------------------------


def check_connected(rooms: Mapping[str, Mapping[str, int]]) -> bool:
    if not rooms:
        return False
    start = min(rooms)
    seen = {start}
    stack = [start]
    while stack:
        for nxt in rooms[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(rooms)


def build_world(task, seed: int, variation: str | None = None, agents: Iterable[str] = ("Alice", "Bob"),
                max_ticks: int = DEFAULT_MAX_TICKS) -> World:
    """Instantiate a world for one task variation.

    Object placement depends only on ``(task, variation, seed)``: objects are
    created class by class in task order and each draws its location from
    its placement hint with a 64-bit LCG seeded by ``seed``.
    """
    if max_ticks < 1:
        raise WorldError("max_ticks must be positive")
    var = task.variation(variation)

    rooms: dict[str, dict[str, int]] = {r: {} for r in task.rooms}
    if len(rooms) != len(task.rooms):
        raise WorldError(f"task {task.id}: duplicate room ids")
    for a, b, length in task.edges:
        if a not in rooms or b not in rooms:
            raise WorldError(f"task {task.id}: edge references unknown room ({a}, {b})")
        if int(length) < 1:
            raise WorldError(f"task {task.id}: edge ({a}, {b}) must have length >= 1")
        rooms[a][b] = rooms[b][a] = int(length)
    rooms = {r: dict(sorted(adj.items())) for r, adj in sorted(rooms.items())}
    if not check_connected(rooms):
        raise WorldError(f"task {task.id}: room graph is not connected")
    if task.start_room not in rooms:
        raise WorldError(f"task {task.id}: unknown start room {task.start_room!r}")

    containers: dict[str, Container] = {}
    for c in task.containers:
        if c.room not in rooms:
            raise WorldError(f"task {task.id}: container {c.id} is in unknown room {c.room!r}")
        containers[c.id] = Container(c.id, c.room)
    if task.target not in containers:
        raise WorldError(f"task {task.id}: unknown target container {task.target!r}")

    supply = {o.class_name: o for o in task.objects}
    requirements = []
    for class_name, count in var.counts.items():
        if class_name not in supply:
            raise WorldError(f"task {task.id}/{var.id}: no supply of {class_name!r}")
        if count < 1:
            raise WorldError(f"task {task.id}/{var.id}: count for {class_name!r} must be >= 1")
        if count > supply[class_name].count:
            raise WorldError(
                f"task {task.id}/{var.id}: requires {count} {class_name} but supply is {supply[class_name].count}"
            )
        requirements.append(Requirement(class_name, count, task.target))

    rng = Lcg64(seed)
    objects: dict[str, ObjectInstance] = {}
    for obj in task.objects:
        hint = list(obj.hint) or list(rooms)
        for ref in hint:
            if ref not in rooms and ref not in containers:
                raise WorldError(f"task {task.id}: placement hint {ref!r} is not a room or container")
            if ref == task.target:
                raise WorldError(f"task {task.id}: objects may not start inside the goal container")
        for k in range(1, var.counts.get(obj.class_name, 0) + 1):
            ref = hint[rng.randrange(len(hint))]
            loc = Location.room(ref) if ref in rooms else Location.container(ref)
            oid = f"{obj.class_name}_{k}"
            objects[oid] = ObjectInstance(oid, obj.class_name, loc)
    objects = dict(sorted(objects.items()))

    bodies = {}
    for name in agents:
        aid = name.lower()
        bodies[aid] = AgentBody(aid, name, task.start_room)
    if not bodies:
        raise WorldError("at least one agent is required")

    goal = GoalSpec(tuple(requirements), describe_requirements(requirements))
    return World(rooms, objects, dict(sorted(containers.items())), bodies, goal, 0, seed, max_ticks)


# --- queries ---------------------------------------------------------------


def _grabbable(world: World, obj: ObjectInstance) -> bool:
    if obj.class_name not in world.target_classes():
        return False
    if obj.location.kind == "hand":
        return False
    return not (obj.location.kind == "container" and obj.location.ref in world.goal_containers())


def available_actions(world: World, agent_id: str, allow_messages: bool = True) -> list[HighLevelAction]:
    """Every high-level action open to an agent, judged against ground truth.

    The agent layer narrows GoGrab options down to the objects it remembers.
    GoGrab is omitted while both hands are full; SendMessage is omitted when
    messaging is disabled (single-agent runs).
    """
    body = world.agent(agent_id)
    if body.in_transit is not None:
        raise WorldError(f"agent {agent_id!r} is in transit")
    actions = [HighLevelAction.explore(r) for r in world.rooms]
    if len(body.held) < HANDS:
        actions += [HighLevelAction.go_grab(o.id, o.class_name) for o in world.objects.values() if _grabbable(world, o)]
    if body.held:
        actions += [HighLevelAction.go_put(c) for c in world.goal_containers()]
    if allow_messages:
        actions.append(HighLevelAction.send_message())
    actions.append(HighLevelAction.wait())
    return sorted(actions, key=HighLevelAction.sort_key)


def shortest_path(world: World, source: str, target: str) -> list[str]:
    """Rooms visited after ``source`` on the lexicographically smallest shortest path."""
    dist = {target: 0}
    heap = [(0, target)]
    while heap:
        d, room = heapq.heappop(heap)
        if d > dist[room]:
            continue
        for nxt, w in world.rooms[room].items():
            nd = d + w
            if nd < dist.get(nxt, nd + 1):
                dist[nxt] = nd
                heapq.heappush(heap, (nd, nxt))
    if source not in dist:
        raise WorldError(f"no path from {source!r} to {target!r}")
    path, cur = [], source
    while cur != target:
        cur = min(n for n, w in world.rooms[cur].items() if n in dist and dist[n] + w == dist[cur])
        path.append(cur)
    return path


def _walk(world: World, source: str, target: str) -> list[Primitive]:
    steps, cur = [], source
    for room in shortest_path(world, source, target):
        steps += [Primitive.traverse(room)] * world.rooms[cur][room]
        cur = room
    return steps


def expand_action(world: World, agent_id: str, action: HighLevelAction) -> list[Primitive]:
    """Procedural script for a high-level action: one primitive per tick."""
    body = world.agent(agent_id)
    if body.in_transit is not None:
        raise InvalidAction(f"agent {agent_id!r} is in transit")
    kind = action.kind
    if kind is ActionKind.WAIT:
        return [Primitive.idle()]
    if kind is ActionKind.SEND_MESSAGE:
        return [Primitive.speak()]
    if kind is ActionKind.EXPLORE:
        if action.target not in world.rooms:
            raise InvalidAction(f"unknown room {action.target!r}")
        return _walk(world, body.room, action.target) + [Primitive.idle()]
    if kind is ActionKind.GO_GRAB:
        obj = world.objects.get(action.target or "")
        if obj is None:
            raise InvalidAction(f"unknown object {action.target!r}")
        if not _grabbable(world, obj):
            raise InvalidAction(f"object {obj.id} cannot be grabbed (at {obj.location.kind} {obj.location.ref})")
        if len(body.held) >= HANDS:
            raise InvalidAction(f"agent {agent_id!r} has both hands full")
        return _walk(world, body.room, world.room_of(obj.location)) + [Primitive.grab(obj.id)]
    if kind is ActionKind.GO_PUT:
        if action.target not in world.containers:
            raise InvalidAction(f"unknown container {action.target!r}")
        if not body.held:
            raise InvalidAction(f"agent {agent_id!r} holds nothing")
        return _walk(world, body.room, world.containers[action.target].room) + [Primitive.put(action.target)]
    raise InvalidAction(f"unsupported action {action!r}")


# --- simulation ------------------------------------------------------------


def step(world: World, moves: Mapping[str, Primitive]) -> tuple[World, list[Event]]:
    """Advance one tick, applying every agent's primitive simultaneously.

    Concurrent grabs of one object go to the lexicographically smaller
    agent id; the others get a ``grab_failed`` event.
    """
    if set(moves) != set(world.agents):
        raise WorldError(f"expected one primitive per agent {sorted(world.agents)}, got {sorted(moves)}")
    if world.tick >= world.max_ticks:
        raise TickBudgetExhausted(f"tick budget of {world.max_ticks} exhausted")

    new = world.clone()
    new.tick += 1
    t = new.tick
    events: list[Event] = []
    grabs: dict[str, list[str]] = {}

    for aid in sorted(moves):
        prim = moves[aid]
        body = new.agents[aid]
        if body.in_transit is not None and prim.kind is not PrimitiveKind.TRAVERSE:
            raise WorldError(f"agent {aid!r} is in transit and can only traverse")
        if prim.kind is PrimitiveKind.TRAVERSE:
            _traverse(new, body, prim.target, events)
        elif prim.kind is PrimitiveKind.GRAB:
            grabs.setdefault(prim.target, []).append(aid)
        elif prim.kind is PrimitiveKind.PUT:
            _put(new, body, prim.target, events)
        elif prim.kind is PrimitiveKind.SPEAK:
            events.append(Event(t, aid, "spoke", {"text": prim.text or ""}))
        else:
            events.append(Event(t, aid, "idled", {}))

    for oid in sorted(grabs):
        contenders = sorted(grabs[oid])
        obj = world.objects.get(oid)
        winner = None
        for aid in contenders:
            before = world.agents[aid]
            ok = (
                obj is not None
                and _grabbable(world, obj)
                and world.room_of(obj.location) == before.room
                and len(before.held) < HANDS
            )
            if ok and winner is None:
                winner = aid
                body = new.agents[aid]
                slot = body.hands.index(None)
                body.hands[slot] = oid
                new.objects[oid].location = Location.hand(aid, slot)
                events.append(Event(t, aid, "grabbed", {"object": oid, "slot": slot}))
            else:
                reason = "lost_conflict" if ok else "unavailable"
                events.append(Event(t, aid, "grab_failed", {"object": oid, "reason": reason}))

    events.sort(key=lambda e: (e.agent or "", e.event_kind))
    return new, events


def _traverse(world: World, body: AgentBody, target: str | None, events: list[Event]) -> None:
    t = world.tick
    if body.in_transit is not None:
        dest, remaining = body.in_transit
        if target != dest:
            raise WorldError(f"agent {body.id!r} is travelling to {dest!r}, not {target!r}")
        remaining -= 1
    else:
        if target not in world.rooms.get(body.room, {}):
            raise WorldError(f"no edge from {body.room!r} to {target!r}")
        dest, remaining = target, world.rooms[body.room][target] - 1
    if remaining == 0:
        body.in_transit = None
        origin, body.room = body.room, dest
        events.append(Event(t, body.id, "arrived", {"from": origin, "room": dest}))
    else:
        body.in_transit = (dest, remaining)
        events.append(Event(t, body.id, "moving", {"to": dest, "remaining": remaining}))


def _put(world: World, body: AgentBody, container: str | None, events: list[Event]) -> None:
    t = world.tick
    box = world.containers.get(container or "")
    if box is None or box.room != body.room or not body.held:
        events.append(Event(t, body.id, "put_failed", {"container": container}))
        return
    before = goal_progress(world).satisfied
    for slot, oid in enumerate(body.hands):
        if oid is None:
            continue
        world.objects[oid].location = Location.container(box.id)
        body.hands[slot] = None
        events.append(Event(t, body.id, "deposited", {"object": oid, "container": box.id}))
    after = goal_progress(world)
    if after.satisfied > before:
        events.append(Event(t, body.id, "progress", {"satisfied": after.satisfied, "required": after.required}))


def goal_progress(world: World) -> Progress:
    satisfied = required = 0
    remaining = []
    for req in world.goal.requirements:
        inside = sum(
            1
            for o in world.objects.values()
            if o.class_name == req.class_name and o.location == Location.container(req.container)
        )
        done = min(inside, req.count)
        satisfied += done
        required += req.count
        if req.count > done:
            remaining.append(f"{req.count - done} {plural(req.class_name, req.count - done)}")
    tail = _join(remaining) + " remaining" if remaining else "nothing remaining"
    return Progress(satisfied, required, f"Transported {satisfied} of {required} target objects; {tail}.")


def is_complete(world: World) -> bool:
    progress = goal_progress(world)
    return progress.satisfied == progress.required
