"""Prompt templates for planning, communication and action selection.

Templates are plain UTF-8 files using ``$UPPER_SNAKE$`` placeholders. The
defaults ship in ``pack/``; a directory with the same file names can replace
any subset of them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

PLACEHOLDER = re.compile(r"\$([A-Z][A-Z0-9_]*)\$")
EXAMPLES_SLOT = "$EXAMPLES$\n"
NONE_TEXT = "(none)"


class PromptError(ValueError):
    pass


class Planning(Enum):
    BASE = "Base"
    IMPROVED_BASE = "ImprovedBase"
    STRUCTURED_REASONING = "StructuredReasoning"


class Comm(Enum):
    BASE = "Base"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"


class ActionStyle(Enum):
    BASE = "Base"
    ONE_SHOT = "OneShot"


_COMBO_WORDS = {
    Planning.BASE: "Base",
    Planning.IMPROVED_BASE: "Improved Base",
    Planning.STRUCTURED_REASONING: "Structured Reasoning",
}


@dataclass(frozen=True)
class StrategyCombo:
    planning: Planning = Planning.BASE
    comm: Comm = Comm.BASE
    action: ActionStyle = ActionStyle.BASE

    @property
    def label(self) -> str:
        """Human-readable row label, e.g. ``Improved Base + Cprompt4``."""
        parts = [_COMBO_WORDS[self.planning]]
        if self.comm is not Comm.BASE:
            parts.append("Cprompt" + self.comm.value[1:])
        if self.action is ActionStyle.ONE_SHOT:
            parts.append("action one shot")
        return " + ".join(parts)

    @classmethod
    def parse(cls, label: str) -> StrategyCombo:
        """Inverse of :attr:`label`; also accepts ``ImprovedBase+C4+OneShot``."""
        parts = [p.strip().lower().replace(" ", "") for p in label.split("+")]
        if not parts or not parts[0]:
            raise ValueError(f"empty strategy combo {label!r}")
        planning = {
            "base": Planning.BASE,
            "improvedbase": Planning.IMPROVED_BASE,
            "structuredreasoning": Planning.STRUCTURED_REASONING,
        }.get(parts[0])
        if planning is None:
            raise ValueError(f"unknown planning strategy in {label!r}")
        comm, action = Comm.BASE, ActionStyle.BASE
        for part in parts[1:]:
            if part in ("c1", "c2", "c3", "c4", "cprompt1", "cprompt2", "cprompt3", "cprompt4"):
                comm = Comm("C" + part[-1])
            elif part in ("oneshot", "actiononeshot"):
                action = ActionStyle.ONE_SHOT
            else:
                raise ValueError(f"unknown strategy component {part!r} in {label!r}")
        return cls(planning, comm, action)


# The nine prompt combinations, in results-table row order.
DEFAULT_COMBOS: tuple[StrategyCombo, ...] = (
    StrategyCombo(),
    StrategyCombo(comm=Comm.C1),
    StrategyCombo(comm=Comm.C2),
    StrategyCombo(comm=Comm.C3),
    StrategyCombo(comm=Comm.C4),
    StrategyCombo(Planning.IMPROVED_BASE),
    StrategyCombo(Planning.IMPROVED_BASE, Comm.C1),
    StrategyCombo(Planning.IMPROVED_BASE, Comm.C4),
    StrategyCombo(Planning.BASE, Comm.C4, ActionStyle.ONE_SHOT),
)


@dataclass(frozen=True)
class PromptContext:
    agent_name: str
    oppo_name: str
    goal_text: str
    progress_text: str
    dialogue_history: tuple[tuple[str, str], ...] = ()
    action_history: tuple[str, ...] = ()
    available_actions: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        labels = [label for label, _ in self.available_actions]
        if len(set(labels)) != len(labels):
            raise PromptError("available action labels must be unique")

    def values(self) -> dict[str, str]:
        return {
            "AGENT_NAME": self.agent_name,
            "OPPO_NAME": self.oppo_name,
            "GOAL": self.goal_text,
            "PROGRESS": self.progress_text,
            "DIALOGUE_HISTORY": "\n".join(f"{who}: {text}" for who, text in self.dialogue_history) or NONE_TEXT,
            "ACTION_HISTORY": "\n".join(self.action_history) or NONE_TEXT,
            "AVAILABLE_ACTIONS": format_options(self.available_actions) or NONE_TEXT,
        }


def option_label(index: int) -> str:
    """0 -> A, 25 -> Z, 26 -> AA, 27 -> AB (spreadsheet column style)."""
    if index < 0:
        raise ValueError("index must be non-negative")
    label = ""
    n = index + 1
    while n:
        n, rem = divmod(n - 1, 26)
        label = chr(ord("A") + rem) + label
    return label


def format_options(options) -> str:
    return "\n".join(f"{label}. {text}" for label, text in options)


def _neutralize(value: str) -> str:
    # context values are data: a literal "$" in them must never read as a token
    return value.replace("$", "＄")


def fill(template: str, values: Mapping[str, str]) -> str:
    """Substitute every ``$NAME$`` token in one pass; unknown tokens are an error."""

    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in values:
            raise PromptError(f"unresolved placeholder ${name}$")
        return _neutralize(values[name])

    return PLACEHOLDER.sub(sub, template)


PACK_FILES = {
    ("planning", Planning.BASE): "planning_base.txt",
    ("planning", Planning.IMPROVED_BASE): "planning_improved.txt",
    ("planning", Planning.STRUCTURED_REASONING): "planning_structured.txt",
    ("comm", Comm.BASE): "comm_base.txt",
    ("comm", Comm.C1): "comm_c1.txt",
    ("comm", Comm.C2): "comm_c2.txt",
    ("comm", Comm.C3): "comm_c3.txt",
    ("action", ActionStyle.BASE): "action_base.txt",
    ("action", ActionStyle.ONE_SHOT): "action_oneshot.txt",
}


def _default_texts() -> dict[str, str]:
    root = resources.files("coopsim.prompts") / "pack"
    return {name: (root / name).read_text(encoding="utf-8") for name in PACK_FILES.values()}


@dataclass(frozen=True)
class PromptPack:
    """Template texts keyed by pack file name.

    ``comm_c2.txt`` and ``comm_c3.txt`` hold example blocks that are inserted
    into the base frame's ``$EXAMPLES$`` slot; C4 has no file of its own and is
    the C1 frame carrying the C2 example block.
    """

    texts: dict[str, str] = field(default_factory=_default_texts)

    @classmethod
    def load(cls, directory: str | Path) -> PromptPack:
        texts = _default_texts()
        directory = Path(directory)
        for name in texts:
            path = directory / name
            if path.exists():
                texts[name] = path.read_text(encoding="utf-8")
        return cls(texts)

    def template(self, module: str, strategy: Enum) -> str:
        return self.texts[PACK_FILES[(module, strategy)]]

    def comm_template(self, strategy: Comm) -> str:
        frame, block = {
            Comm.BASE: ("comm_base.txt", None),
            Comm.C1: ("comm_c1.txt", None),
            Comm.C2: ("comm_base.txt", "comm_c2.txt"),
            Comm.C3: ("comm_base.txt", "comm_c3.txt"),
            Comm.C4: ("comm_c1.txt", "comm_c2.txt"),
        }[strategy]
        return merge_examples(self.texts[frame], self.texts[block] if block else "")

    def render_planning(self, strategy: Planning, ctx: PromptContext) -> str:
        return fill(self.template("planning", strategy), ctx.values())

    def render_comm(self, strategy: Comm, ctx: PromptContext) -> str:
        return fill(self.comm_template(strategy), ctx.values())

    def render_action(self, strategy: ActionStyle, ctx: PromptContext) -> str:
        values = ctx.values()
        head = f"Available actions:\n{_neutralize(values['AVAILABLE_ACTIONS'])}\n\n"
        return head + fill(self.template("action", strategy), values)

    def render_decision(self, combo: StrategyCombo, ctx: PromptContext) -> str:
        """Planning prompt followed by the answer-format block of the action strategy."""
        planning = self.render_planning(combo.planning, ctx)
        return planning + "\n" + fill(self.template("action", combo.action), ctx.values())


def merge_examples(frame: str, block: str) -> str:
    if EXAMPLES_SLOT not in frame:
        raise PromptError("communication frame has no $EXAMPLES$ slot")
    return frame.replace(EXAMPLES_SLOT, block)


def unresolved_tokens(text: str) -> list[str]:
    return PLACEHOLDER.findall(text)


def example_turns(text: str, names: tuple[str, str]) -> list[str]:
    """Lines of the ``Example dialogue:`` block spoken by either name."""
    lines = text.splitlines()
    try:
        start = lines.index("Example dialogue:")
    except ValueError:
        return []
    turns = []
    for line in lines[start + 1:]:
        if not line.strip():
            break
        if any(line.startswith(f"{n}: ") for n in names):
            turns.append(line)
    return turns


DEFAULT_PACK = PromptPack()


def render_planning(strategy: Planning, ctx: PromptContext) -> str:
    return DEFAULT_PACK.render_planning(strategy, ctx)


def render_comm(strategy: Comm, ctx: PromptContext) -> str:
    return DEFAULT_PACK.render_comm(strategy, ctx)


def render_action(strategy: ActionStyle, ctx: PromptContext) -> str:
    return DEFAULT_PACK.render_action(strategy, ctx)


def render_decision(combo: StrategyCombo, ctx: PromptContext) -> str:
    return DEFAULT_PACK.render_decision(combo, ctx)
