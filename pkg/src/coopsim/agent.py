"""Perception, memory, LLM-driven decisions and action parsing for one agent."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from coopsim import llm
from coopsim.llm import Backend, LlmRequest
from coopsim.prompts import PromptContext, PromptPack, StrategyCombo, DEFAULT_PACK, option_label
from coopsim.transcript import clean_text
from coopsim.world import ActionKind, GoalSpec, HighLevelAction, Location, Progress, World

FUZZY_THRESHOLD = 0.5


@dataclass(frozen=True)
class Observation:
    room: str
    visible_objects: tuple[tuple[str, str], ...]
    visible_containers: tuple[str, ...]
    other_agent_present: bool
    tick: int


@dataclass(frozen=True)
class SemanticEntry:
    location: Location
    tick: int
    class_name: str


@dataclass(frozen=True)
class EpisodeEvent:
    tick: int
    kind: str  # observation | message | action
    data: dict[str, Any]


@dataclass(frozen=True)
class Message:
    sender: str
    recipient: str
    tick: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("message text must be non-empty")
        if self.sender == self.recipient:
            raise ValueError("sender and recipient must differ")

    def log_line(self) -> str:
        return f"{self.tick} {self.sender}: {self.text}"


@dataclass
class Memory:
    semantic: dict[str, SemanticEntry] = field(default_factory=dict)
    episodic: list[EpisodeEvent] = field(default_factory=list)

    @property
    def last_tick(self) -> int:
        return self.episodic[-1].tick if self.episodic else -1

    def _append(self, event: EpisodeEvent) -> None:
        if event.tick < self.last_tick:
            raise ValueError(f"episodic event at tick {event.tick} precedes tick {self.last_tick}")
        self.episodic.append(event)

    def record_action(self, tick: int, action: HighLevelAction) -> None:
        self._append(EpisodeEvent(tick, "action", {"display_text": action.display_text}))

    def record_sent(self, msg: Message) -> None:
        self._append(EpisodeEvent(msg.tick, "message", {"speaker": msg.sender, "text": msg.text}))

    def dialogue(self) -> list[tuple[str, str]]:
        return [(e.data["speaker"], e.data["text"]) for e in self.episodic if e.kind == "message"]

    def actions(self) -> list[str]:
        return [e.data["display_text"] for e in self.episodic if e.kind == "action"]


class MatchKind(Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class MatchResult:
    chosen: HighLevelAction
    kind: MatchKind
    score: float


@dataclass
class DecisionTrace:
    tick: int
    agent: str
    planning_prompt: str
    planning_raw: str
    match: MatchResult | None = None
    comm_prompt: str | None = None
    comm_raw: str | None = None
    message: str | None = None


class DecisionError(RuntimeError):
    """A backend failure during ``decide``; carries the partial trace."""

    def __init__(self, cause: llm.LlmError, trace: DecisionTrace):
        super().__init__(str(cause))
        self.cause = cause
        self.trace = trace


def perceive(world: World, agent_id: str) -> Observation:
    body = world.agent(agent_id)
    room = body.room
    objects = tuple(
        (o.id, o.class_name)
        for o in world.objects.values()
        if o.location.kind != "hand" and world.room_of(o.location) == room
    )
    containers = tuple(c.id for c in world.containers.values() if c.room == room)
    others = any(a.room == room and a.in_transit is None for aid, a in world.agents.items() if aid != agent_id)
    return Observation(room, objects, containers, others, world.tick)


def update_memory(memory: Memory, obs: Observation, inbox: list[Message] | tuple[Message, ...] = (),
                  world: World | None = None) -> Memory:
    """Fold an observation and received messages into ``memory`` (in place).

    Message text is stored verbatim in episodic memory only; it never edits
    the semantic map. ``world`` resolves whether a visible object sits in a
    container; without it objects are recorded as lying in the room.
    """
    if obs.tick < memory.last_tick:
        raise ValueError(f"observation at tick {obs.tick} is older than memory (tick {memory.last_tick})")
    for oid, class_name in obs.visible_objects:
        loc = world.objects[oid].location if world is not None else Location.room(obs.room)
        known = memory.semantic.get(oid)
        if known is None or obs.tick >= known.tick:
            memory.semantic[oid] = SemanticEntry(loc, obs.tick, class_name)
    memory._append(EpisodeEvent(obs.tick, "observation", {
        "room": obs.room,
        "objects": [oid for oid, _ in obs.visible_objects],
        "other_agent_present": obs.other_agent_present,
    }))
    for msg in sorted(inbox, key=lambda m: (m.sender, m.tick)):
        memory._append(EpisodeEvent(max(msg.tick, memory.last_tick), "message",
                                    {"speaker": msg.sender, "text": msg.text}))
    return memory


def known_actions(actions: list[HighLevelAction], memory: Memory) -> list[HighLevelAction]:
    """Drop GoGrab options for objects the agent has never seen."""
    return [a for a in actions if a.kind is not ActionKind.GO_GRAB or a.target in memory.semantic]


def build_context(memory: Memory, goal: GoalSpec, progress: Progress, actions: list[HighLevelAction],
                  self_name: str, oppo_name: str) -> PromptContext:
    if not actions:
        raise ValueError("at least one available action is required")
    return PromptContext(
        agent_name=self_name,
        oppo_name=oppo_name,
        goal_text=goal.description,
        progress_text=progress.text,
        dialogue_history=tuple(memory.dialogue()),
        action_history=tuple(memory.actions()),
        available_actions=tuple((option_label(i), a.display_text) for i, a in enumerate(actions)),
    )


# --- parsing the model's choice ----------------------------------------------

_PUNCT = re.compile(r"[^\w\s]")
_LETTER_ANSWER = re.compile(
    r"^(?:.*\b(?i:answer|option|choice|choose|select|pick|action)\b(?i:\s*is)?\s*[:\-]?\s*)?"
    r"\(?([A-Z]{1,2})\)?[.:)!]?$"
)


def _norm(text: str) -> str:
    return " ".join(_PUNCT.sub(" ", text.lower()).split())


def _tokens(text: str) -> set[str]:
    return set(_norm(text).split())


def jaccard(a: str, b: str) -> float:
    ta, tb = _tokens(a), _tokens(b)
    if not ta and not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def _candidates(raw: str) -> list[str]:
    """The whole reply (minus reasoning blocks), then its lines and sentences, last first."""
    text = re.sub(r"<think>.*?(</think>|$)", " ", raw, flags=re.DOTALL | re.IGNORECASE)
    whole = text.strip()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    pieces = []
    for ln in reversed(lines):
        pieces.append(ln)
        parts = [p.strip() for p in re.split(r"(?<=[.!?])\s+", ln) if p.strip()]
        if len(parts) > 1:
            pieces.extend(reversed(parts))
    out = []
    for c in [whole, *pieces]:
        if c and c not in out:
            out.append(c)
    return out


def parse_action_choice(raw: str, actions: list[HighLevelAction]) -> MatchResult:
    """Resolve a free-form reply to one of ``actions``; never fails.

    Exact: a candidate (the whole reply, or one of its lines/sentences) is an
    option letter, a display text, or the kind name of the only option of that
    kind, after lowercasing and punctuation removal.
    Fuzzy: best token-set Jaccard score against display texts, if >= 0.5;
    ties go to the earlier option. Otherwise fall back to Wait.
    """
    if not actions:
        raise ValueError("actions must be non-empty")
    labels = {option_label(i).lower(): a for i, a in enumerate(actions)}
    displays = {_norm(a.display_text): a for a in actions}
    by_kind: dict[str, list[HighLevelAction]] = {}
    for a in actions:
        by_kind.setdefault(a.kind.value.replace("_", ""), []).append(a)
    # "SendMessage", "send_message", "Wait": kind names, when only one option has that kind
    kind_names = {k: v[0] for k, v in by_kind.items() if len(v) == 1}

    candidates = _candidates(raw)
    for cand in candidates:
        norm = _norm(cand)
        if norm in labels:
            return MatchResult(labels[norm], MatchKind.EXACT, 1.0)
        if norm in displays:
            return MatchResult(displays[norm], MatchKind.EXACT, 1.0)
        squashed = re.sub(r"[\s_]", "", norm)
        if squashed in kind_names:
            return MatchResult(kind_names[squashed], MatchKind.EXACT, 1.0)
        m = _LETTER_ANSWER.match(cand.strip())
        if m and m.group(1).lower() in labels:
            return MatchResult(labels[m.group(1).lower()], MatchKind.EXACT, 1.0)

    best, best_score = None, 0.0
    for cand in candidates:
        for action in actions:
            score = jaccard(cand, action.display_text)
            if score > best_score:
                best, best_score = action, score
    if best is not None and best_score >= FUZZY_THRESHOLD:
        return MatchResult(best, MatchKind.FUZZY, best_score)

    wait = next((a for a in actions if a.kind is ActionKind.WAIT), HighLevelAction.wait())
    return MatchResult(wait, MatchKind.FALLBACK, best_score)


# --- deciding ----------------------------------------------------------------


@dataclass(frozen=True)
class LlmSettings:
    model: str = "scripted"
    temperature: float = llm.DEFAULT_TEMPERATURE
    max_tokens: int = llm.DEFAULT_MAX_TOKENS


def decide(context: PromptContext, actions: list[HighLevelAction], strategies: StrategyCombo, backend: Backend,
           settings: LlmSettings = LlmSettings(), pack: PromptPack = DEFAULT_PACK, tick: int = 0,
           ) -> tuple[HighLevelAction, str | None, DecisionTrace]:
    """Ask the backend for the next action and, for SendMessage, the message.

    Returns the action, the cleaned message text (None unless SendMessage)
    and the trace. A SendMessage whose cleaned text is empty degrades to Wait.
    """
    prompt = pack.render_decision(strategies, context)
    trace = DecisionTrace(tick, context.agent_name, prompt, "")
    try:
        raw = llm.generate(backend, _request(settings, prompt)).text
    except llm.LlmError as exc:
        raise DecisionError(exc, trace) from exc
    trace.planning_raw = raw
    trace.match = parse_action_choice(raw, actions)
    action = trace.match.chosen
    if action.kind is not ActionKind.SEND_MESSAGE:
        return action, None, trace

    comm_prompt = pack.render_comm(strategies.comm, context)
    trace.comm_prompt = comm_prompt
    try:
        comm_raw = llm.generate(backend, _request(settings, comm_prompt)).text
    except llm.LlmError as exc:
        raise DecisionError(exc, trace) from exc
    trace.comm_raw = comm_raw
    text = clean_text(comm_raw)
    if not text:
        wait = next((a for a in actions if a.kind is ActionKind.WAIT), HighLevelAction.wait())
        return wait, None, trace
    trace.message = text
    return action, text, trace


def _request(settings: LlmSettings, prompt: str) -> LlmRequest:
    return LlmRequest(settings.model, prompt, settings.temperature, settings.max_tokens)
