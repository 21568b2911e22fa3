"""Experiment orchestration: run configs, the episode loop, the strategy x
model x mode matrix and the exported results tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from decimal import ROUND_DOWN, Decimal
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

import tomli
import tomli_w

from coopsim import llm
from coopsim.agent import (
    DecisionError, DecisionTrace, LlmSettings, MatchKind, Memory, Message, build_context, decide,
    known_actions, perceive, update_memory,
)
from coopsim.metrics import (
    CellStats, EpisodeMetrics, MetricsError, efficiency_1, efficiency_2, summarize, welch_t,
)
from coopsim.prompts import DEFAULT_PACK, PromptPack, StrategyCombo
from coopsim.tasks import TaskSpec, builtin_suite, load_tasks
from coopsim.world import (
    DEFAULT_MAX_TICKS, ActionKind, Primitive, available_actions, build_world, expand_action, goal_progress,
    is_complete, step,
)

log = logging.getLogger(__name__)

ALONE = "(none, I am working alone)"
BASE_COMBO = StrategyCombo()
BEST_COMBO = StrategyCombo.parse("Improved Base + Cprompt4")
DEFAULT_SEEDS = (7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class Mode(Enum):
    COLLABORATIVE = "collaborative"
    SINGLE = "single"


class ConfigError(ValueError):
    """Invalid run configuration. ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class AggregationError(RuntimeError):
    """A cell cannot be aggregated; ``backend_failures`` counts aborted episodes."""

    def __init__(self, message: str, backend_failures: int = 0):
        super().__init__(message)
        self.backend_failures = backend_failures


# --- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "scripted"  # scripted | http | replay
    policy: str = "greedy"
    url: str | None = None
    cache_dir: str | None = None
    fallback: str | None = None  # replay only: "http" | "scripted"
    timeout: float = llm.DEFAULT_TIMEOUT
    temperature: float = llm.DEFAULT_TEMPERATURE
    max_tokens: int = llm.DEFAULT_MAX_TOKENS

    def build(self) -> llm.Backend:
        if self.kind == "scripted":
            return llm.ScriptedBackend(self.policy)
        if self.kind == "http":
            return llm.HttpBackend(self.url, self.timeout)
        if self.kind == "replay":
            if not self.cache_dir:
                raise ConfigError("replay backend needs cache_dir", "backend.cache_dir")
            fallback = None
            if self.fallback:
                fallback = replace(self, kind=self.fallback, fallback=None).build()
            return llm.ReplayBackend(self.cache_dir, fallback)
        raise ConfigError(f"unknown backend kind {self.kind!r}", "backend.kind")


@dataclass(frozen=True)
class RunMatrix:
    combos: tuple[StrategyCombo, ...]
    models: dict[str, str]  # column label -> model name
    modes: tuple[Mode, ...]
    seeds: tuple[int, ...]
    backend: BackendConfig = BackendConfig()
    output_dir: str = "results"
    max_ticks: int = DEFAULT_MAX_TICKS
    tasks: str = "builtin"
    ttests: tuple[tuple[StrategyCombo, StrategyCombo], ...] = ((BASE_COMBO, BEST_COMBO),)

    def task_suite(self) -> list[TaskSpec]:
        return builtin_suite() if self.tasks == "builtin" else load_tasks(self.tasks)

    def episodes(self) -> list[tuple[TaskSpec, str, int]]:
        """(task, variation, seed) triples; seeds pair up with variations in suite order."""
        pairs = [(t, v.id) for t in self.task_suite() for v in t.variations]
        if len(pairs) != len(self.seeds):
            raise ConfigError(f"{len(self.seeds)} seeds given for {len(pairs)} task variations", "seeds")
        return [(t, v, s) for (t, v), s in zip(pairs, self.seeds)]


_TOP_KEYS = {"combos", "models", "modes", "seeds", "backend", "output_dir", "max_ticks", "tasks", "ttest"}
_BACKEND_KEYS = set(BackendConfig.__dataclass_fields__)


def _require(cond: bool, message: str, field: str) -> None:
    if not cond:
        raise ConfigError(message, field)


def matrix_from_dict(data: dict[str, Any]) -> RunMatrix:
    unknown = sorted(set(data) - _TOP_KEYS)
    _require(not unknown, f"unknown key(s) {unknown}", unknown[0] if unknown else "")
    for key in ("combos", "models", "modes", "seeds"):
        _require(key in data, "missing required key", key)

    _require(isinstance(data["combos"], list) and data["combos"], "must be a non-empty list", "combos")
    try:
        combos = tuple(StrategyCombo.parse(c) for c in data["combos"])
    except (ValueError, AttributeError) as exc:
        raise ConfigError(str(exc), "combos") from None
    _require(len(set(combos)) == len(combos), "duplicate strategy combos", "combos")

    models = data["models"]
    _require(isinstance(models, dict) and models, "must be a non-empty table of label = model name", "models")
    _require(all(isinstance(v, str) and v for v in models.values()), "model names must be strings", "models")

    _require(isinstance(data["modes"], list) and data["modes"], "must be a non-empty list", "modes")
    try:
        modes = tuple(Mode(m) for m in data["modes"])
    except ValueError as exc:
        raise ConfigError(str(exc), "modes") from None
    _require(len(set(modes)) == len(modes), "duplicate modes", "modes")

    seeds = data["seeds"]
    _require(isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds),
             "must be a non-empty list of integers", "seeds")

    backend_data = data.get("backend", {})
    _require(isinstance(backend_data, dict), "must be a table", "backend")
    unknown = sorted(set(backend_data) - _BACKEND_KEYS)
    _require(not unknown, f"unknown key(s) {unknown}", "backend." + (unknown[0] if unknown else ""))
    backend = BackendConfig(**backend_data)
    _require(backend.kind in ("scripted", "http", "replay"), f"unknown kind {backend.kind!r}", "backend.kind")
    _require(backend.fallback in (None, "http", "scripted"), "must be 'http' or 'scripted'", "backend.fallback")
    _require(backend.kind != "replay" or bool(backend.cache_dir), "required for replay", "backend.cache_dir")
    _require(backend.timeout > 0, "must be positive", "backend.timeout")
    _require(backend.temperature >= 0, "must be >= 0", "backend.temperature")
    _require(backend.max_tokens >= 1, "must be positive", "backend.max_tokens")

    max_ticks = data.get("max_ticks", DEFAULT_MAX_TICKS)
    _require(isinstance(max_ticks, int) and max_ticks >= 1, "must be a positive integer", "max_ticks")

    ttests = []
    for i, pair in enumerate(data.get("ttest", [{"a": BASE_COMBO.label, "b": BEST_COMBO.label}])):
        _require(isinstance(pair, dict) and set(pair) == {"a", "b"}, "each entry needs exactly keys a and b",
                 f"ttest[{i}]")
        try:
            ttests.append((StrategyCombo.parse(pair["a"]), StrategyCombo.parse(pair["b"])))
        except ValueError as exc:
            raise ConfigError(str(exc), f"ttest[{i}]") from None

    matrix = RunMatrix(
        combos=combos,
        models=dict(models),
        modes=modes,
        seeds=tuple(seeds),
        backend=backend,
        output_dir=str(data.get("output_dir", "results")),
        max_ticks=max_ticks,
        tasks=str(data.get("tasks", "builtin")),
        ttests=tuple(ttests),
    )
    try:
        matrix.episodes()
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc), getattr(exc, "field", None) or "tasks") from None
    return matrix


def parse_run_config(text: str) -> RunMatrix:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    return matrix_from_dict(data)


def load_run_config(path: str | Path) -> RunMatrix:
    return parse_run_config(Path(path).read_text(encoding="utf-8"))


def matrix_to_dict(matrix: RunMatrix) -> dict[str, Any]:
    backend = {k: v for k, v in asdict(matrix.backend).items() if v is not None}
    return {
        "output_dir": matrix.output_dir,
        "max_ticks": matrix.max_ticks,
        "tasks": matrix.tasks,
        "combos": [c.label for c in matrix.combos],
        "modes": [m.value for m in matrix.modes],
        "seeds": list(matrix.seeds),
        "models": dict(matrix.models),
        "backend": backend,
        "ttest": [{"a": a.label, "b": b.label} for a, b in matrix.ttests],
    }


def dump_run_config(matrix: RunMatrix) -> str:
    return tomli_w.dumps(matrix_to_dict(matrix))


def default_config_text() -> str:
    from importlib import resources

    return (resources.files("coopsim") / "data" / "default_run.toml").read_text(encoding="utf-8")


# --- episodes ----------------------------------------------------------------


@dataclass
class EpisodeRecord:
    task: str
    variation: str
    seed: int
    combo: str
    model: str
    mode: str
    final_tick: int
    metrics: EpisodeMetrics
    decisions: list[dict[str, Any]] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)
    dialogue: list[dict[str, Any]] = field(default_factory=list)
    error: dict[str, str] | None = None
    model_label: str = ""

    @property
    def key(self) -> str:
        return f"{self.combo}|{self.model_label or self.model}|{self.mode}|{self.task}|{self.variation}"

    def check(self, max_ticks: int) -> None:
        """Metrics must be recomputable from the trace."""
        m = self.metrics
        spoken = sum(1 for e in self.events if e["event_kind"] == "spoke")
        assert m.turn_count == len(self.dialogue) == spoken, self.key
        kinds = [d["match"]["kind"] for d in self.decisions if d["match"]]
        assert m.fuzzy_count == kinds.count("fuzzy") and m.fallback_count == kinds.count("fallback"), self.key
        if self.error is None:
            assert m.step_count == self.final_tick, self.key
        if not m.completed:
            assert m.step_count == max_ticks, self.key

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EpisodeRecord:
        data = dict(data)
        data["metrics"] = EpisodeMetrics(**data["metrics"])
        return cls(**data)

    def dialogue_log(self) -> str:
        return "".join(f"{d['tick']} {d['speaker']}: {d['text']}\n" for d in self.dialogue)


def _sha(text: str | None) -> str | None:
    return hashlib.sha256(text.encode("utf-8")).hexdigest() if text is not None else None


def _trace_dict(trace: DecisionTrace) -> dict[str, Any]:
    match = None
    if trace.match is not None:
        match = {"kind": trace.match.kind.value, "score": trace.match.score,
                 "chosen": trace.match.chosen.display_text}
    return {
        "tick": trace.tick,
        "agent": trace.agent,
        "planning_prompt_sha256": _sha(trace.planning_prompt),
        "planning_raw": trace.planning_raw,
        "match": match,
        "comm_prompt_sha256": _sha(trace.comm_prompt),
        "comm_raw": trace.comm_raw,
        "message": trace.message,
    }


@dataclass
class _AgentState:
    id: str
    name: str
    memory: Memory = field(default_factory=Memory)
    script: list[Primitive] = field(default_factory=list)
    inbox: list[Message] = field(default_factory=list)


def run_episode(task: TaskSpec, variation: str, combo: StrategyCombo, model: str, mode: Mode | str, seed: int,
                backend: llm.Backend, *, temperature: float = llm.DEFAULT_TEMPERATURE,
                max_tokens: int = llm.DEFAULT_MAX_TOKENS, max_ticks: int = DEFAULT_MAX_TICKS,
                pack: PromptPack = DEFAULT_PACK, model_label: str = "") -> EpisodeRecord:
    """Run one task variation to completion or to the tick cap.

    Each agent re-plans only when its current script is used up (or its grab
    failed). A backend failure aborts the episode; it is then recorded as
    failed with the request digest.
    """
    mode = Mode(mode)
    collab = mode is Mode.COLLABORATIVE
    names = ("Alice", "Bob") if collab else ("Alice",)
    world = build_world(task, seed, variation, names, max_ticks)
    states = {aid: _AgentState(aid, body.name) for aid, body in world.agents.items()}
    settings = LlmSettings(model, temperature, max_tokens)

    decisions: list[dict[str, Any]] = []
    events: list[dict[str, Any]] = []
    dialogue: list[Message] = []
    error = None

    while error is None and not is_complete(world) and world.tick < world.max_ticks:
        moves = {}
        for aid in sorted(states):
            st, body = states[aid], world.agents[aid]
            if body.in_transit is None:
                update_memory(st.memory, perceive(world, aid), st.inbox, world)
                st.inbox.clear()
            if not st.script:
                oppo = next((s.name for s in states.values() if s.id != aid), ALONE)
                actions = known_actions(available_actions(world, aid, allow_messages=collab), st.memory)
                ctx = build_context(st.memory, world.goal, goal_progress(world), actions, st.name, oppo)
                try:
                    action, text, trace = decide(ctx, actions, combo, backend, settings, pack, world.tick)
                except DecisionError as exc:
                    decisions.append(_trace_dict(exc.trace))
                    error = {"kind": type(exc.cause).__name__, "digest": exc.cause.digest, "message": str(exc)}
                    break
                decisions.append(_trace_dict(trace))
                st.memory.record_action(world.tick, action)
                if action.kind is ActionKind.SEND_MESSAGE:
                    st.script = [Primitive.speak(text)]
                else:
                    st.script = expand_action(world, aid, action)
            moves[aid] = st.script.pop(0)
        if error is not None:
            break
        world, tick_events = step(world, moves)
        for ev in tick_events:
            events.append(asdict(ev))
            st = states[ev.agent]
            if ev.event_kind in ("grab_failed", "put_failed"):
                st.script.clear()
            elif ev.event_kind == "spoke":
                for other in states.values():
                    if other.id == st.id:
                        continue
                    msg = Message(st.name, other.name, ev.tick, ev.payload["text"])
                    dialogue.append(msg)
                    other.inbox.append(msg)
                    st.memory.record_sent(msg)

    completed = error is None and is_complete(world)
    kinds = [d["match"]["kind"] for d in decisions if d["match"]]
    metrics = EpisodeMetrics(
        step_count=world.tick if error is None else max_ticks,
        turn_count=len(dialogue),
        fuzzy_count=kinds.count(MatchKind.FUZZY.value),
        fallback_count=kinds.count(MatchKind.FALLBACK.value),
        completed=completed,
    )
    record = EpisodeRecord(
        task=task.id,
        variation=variation,
        seed=seed,
        combo=combo.label,
        model=model,
        mode=mode.value,
        final_tick=world.tick,
        metrics=metrics,
        decisions=decisions,
        events=events,
        dialogue=[{"tick": m.tick, "speaker": m.sender, "recipient": m.recipient, "text": m.text} for m in dialogue],
        error=error,
        model_label=model_label,
    )
    record.check(max_ticks)
    return record


# --- matrix ------------------------------------------------------------------


@dataclass
class ResultsTable:
    combos: list[str]
    models: list[str]
    modes: list[str]
    cells: dict[tuple[str, str, str], CellStats]
    eff1: dict[tuple[str, str], float]
    eff2: dict[tuple[str, str], float]
    ttests: list[dict[str, Any]]
    records: list[EpisodeRecord] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def primary_mode(self) -> str:
        return Mode.COLLABORATIVE.value if Mode.COLLABORATIVE.value in self.modes else self.modes[0]

    @property
    def backend_failures(self) -> int:
        return sum(1 for r in self.records if r.error is not None)


def _episode_job(args) -> EpisodeRecord:
    task, variation, combo, label, model, mode, seed, backend_cfg, max_ticks = args
    backend = backend_cfg.build()
    return run_episode(task, variation, combo, model, mode, seed, backend, temperature=backend_cfg.temperature,
                       max_tokens=backend_cfg.max_tokens, max_ticks=max_ticks, model_label=label)


def run_matrix(matrix: RunMatrix, jobs: int = 1, allow_failed: bool = False,
               backend: llm.Backend | None = None) -> ResultsTable:
    """Run every (combo, model, mode, episode) and aggregate the cells.

    Episodes are independent, so ``jobs > 1`` fans them out to worker
    processes; results are collected in submission order. Passing
    ``backend`` forces in-process execution with that backend.
    """
    episodes = matrix.episodes()
    work = [
        (task, var, combo, label, model, mode, seed, matrix.backend, matrix.max_ticks)
        for combo in matrix.combos
        for label, model in matrix.models.items()
        for mode in matrix.modes
        for task, var, seed in episodes
    ]
    if backend is not None:
        records = [
            run_episode(t, v, c, m, mo, s, backend, temperature=cfg.temperature, max_tokens=cfg.max_tokens,
                        max_ticks=mt, model_label=lab)
            for t, v, c, lab, m, mo, s, cfg, mt in work
        ]
    elif jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_episode_job, work, chunksize=max(1, len(work) // (jobs * 8))))
    else:
        records = [_episode_job(w) for w in work]
    try:
        return aggregate(
            records,
            combos=[c.label for c in matrix.combos],
            models=list(matrix.models),
            modes=[m.value for m in matrix.modes],
            ttests=[(a.label, b.label) for a, b in matrix.ttests],
            allow_failed=allow_failed,
            config=matrix_to_dict(matrix),
        )
    except AggregationError as exc:
        raise AggregationError(str(exc), sum(1 for r in records if r.error is not None)) from None


def aggregate(records: list[EpisodeRecord], combos: list[str], models: list[str], modes: list[str],
              ttests: Iterable[tuple[str, str]] = (), allow_failed: bool = False,
              config: dict[str, Any] | None = None) -> ResultsTable:
    grouped: dict[tuple[str, str, str], list[EpisodeMetrics]] = {}
    for r in records:
        grouped.setdefault((r.combo, r.model_label or r.model, r.mode), []).append(r.metrics)
    cells = {}
    for combo in combos:
        for model in models:
            for mode in modes:
                key = (combo, model, mode)
                if key not in grouped:
                    continue
                stats = summarize(grouped[key])
                if stats.completed == 0 and not allow_failed:
                    raise AggregationError(
                        f"cell {combo} / {model} / {mode} has no completed episodes (use --allow-failed)"
                    )
                cells[key] = stats
    table = ResultsTable(combos, models, modes, cells, {}, {}, [], records, config or {})
    table.eff1 = efficiency_1_table(table)
    table.eff2 = efficiency_2_table(table)
    table.ttests = [_ttest(table, a, b, model) for a, b in ttests for model in models]
    return table


def efficiency_1_table(table: ResultsTable) -> dict[tuple[str, str], float]:
    out = {}
    for combo in table.combos:
        for model in table.models:
            single = table.cells.get((combo, model, Mode.SINGLE.value))
            collab = table.cells.get((combo, model, Mode.COLLABORATIVE.value))
            if single and collab:
                out[(combo, model)] = efficiency_1(single.mean_steps, collab.mean_steps)
    return out


def efficiency_2_table(table: ResultsTable) -> dict[tuple[str, str], float]:
    base_label = BASE_COMBO.label
    mode = table.primary_mode
    out = {}
    for model in table.models:
        base = table.cells.get((base_label, model, mode))
        if base is None:
            continue
        for combo in table.combos:
            cell = table.cells.get((combo, model, mode))
            if combo != base_label and cell is not None:
                out[(combo, model)] = efficiency_2(base.mean_steps, cell.mean_steps)
    return out


def _ttest(table: ResultsTable, a: str, b: str, model: str) -> dict[str, Any]:
    mode = table.primary_mode
    entry: dict[str, Any] = {"a": a, "b": b, "model": model, "mode": mode}
    ca, cb = table.cells.get((a, model, mode)), table.cells.get((b, model, mode))
    if ca is None or cb is None:
        entry["error"] = "combination not in this run"
        return entry
    try:
        res = welch_t(ca.steps, cb.steps)
    except MetricsError as exc:
        entry["error"] = str(exc)
        return entry
    entry.update(t=res.t, df=res.df, p=res.p_two_tailed)
    return entry


# --- export ------------------------------------------------------------------


def format_steps(x: float) -> str:
    return f"{x:.1f}"


def format_efficiency(x: float) -> str:
    """Two decimals, truncated toward zero (0.2267 -> 0.22)."""
    d = Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_DOWN)
    if d == 0:
        d = Decimal("0.00")
    return str(d)


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def table_csvs(results: ResultsTable) -> dict[str, str]:
    mode = results.primary_mode
    header = ["prompt", *results.models]

    def cell_rows(attr: str) -> list[list[str]]:
        rows = []
        for combo in results.combos:
            cells = [results.cells.get((combo, m, mode)) for m in results.models]
            if any(cells):
                rows.append([combo, *(format_steps(getattr(c, attr)) if c else "" for c in cells)])
        return rows

    def eff_rows(values: dict[tuple[str, str], float]) -> list[list[str]]:
        rows = []
        for combo in results.combos:
            if any((combo, m) in values for m in results.models):
                rows.append([combo, *(format_efficiency(values[(combo, m)]) if (combo, m) in values else ""
                                      for m in results.models)])
        return rows

    return {
        "steps.csv": _csv(header, cell_rows("mean_steps")),
        "turns.csv": _csv(header, cell_rows("mean_turns")),
        "eff1.csv": _csv(header, eff_rows(results.eff1)),
        "eff2.csv": _csv(header, eff_rows(results.eff2)),
    }


def results_json(results: ResultsTable) -> str:
    payload = {
        "config": results.config,
        "combos": results.combos,
        "models": results.models,
        "modes": results.modes,
        "cells": [
            {"combo": c, "model": m, "mode": mo, "mean_steps": s.mean_steps, "mean_turns": s.mean_turns, "n": s.n,
             "completed": s.completed}
            for (c, m, mo), s in results.cells.items()
        ],
        "eff1": [{"combo": c, "model": m, "value": v} for (c, m), v in results.eff1.items()],
        "eff2": [{"combo": c, "model": m, "value": v} for (c, m), v in results.eff2.items()],
        "ttests": results.ttests,
        "records": [r.to_dict() for r in results.records],
    }
    return json.dumps(payload, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-." else "_" for ch in name)


def export_tables(results: ResultsTable, directory: str | Path) -> list[Path]:
    """Write the four CSV tables, ``results.json`` and per-episode dialogue logs."""
    if not results.cells:
        raise AggregationError("nothing to export: results are empty")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"cannot write to {directory}")
    written = []
    for name, text in table_csvs(results).items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    path = directory / "results.json"
    path.write_text(results_json(results), encoding="utf-8")
    written.append(path)
    for r in results.records:
        if r.dialogue:
            path = directory / "dialogues" / (_safe(r.key) + ".log")
            path.parent.mkdir(exist_ok=True)
            path.write_text(r.dialogue_log(), encoding="utf-8")
            written.append(path)
    return written


def load_results(directory: str | Path, allow_failed: bool = True) -> ResultsTable:
    data = json.loads((Path(directory) / "results.json").read_text(encoding="utf-8"))
    records = [EpisodeRecord.from_dict(r) for r in data["records"]]
    ttests = [(t["a"], t["b"]) for t in data["ttests"]]
    return aggregate(records, data["combos"], data["models"], data["modes"], dict.fromkeys(ttests),
                     allow_failed=allow_failed, config=data["config"])


def render_text_tables(results: ResultsTable) -> str:
    titles = {
        "steps.csv": "Step count (lower is better)",
        "turns.csv": "Turn count (lower is better)",
        "eff1.csv": "Efficiency improvement due to collaboration",
        "eff2.csv": "Efficiency improvement due to new prompts",
    }
    out = []
    for name, text in table_csvs(results).items():
        rows = list(csv.reader(io.StringIO(text)))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        out.append(titles[name])
        for row in rows:
            out.append("  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in
                                 enumerate(zip(row, widths))))
        out.append("")
    for t in results.ttests:
        if "error" in t:
            out.append(f"t-test {t['a']} vs {t['b']} [{t['model']}]: {t['error']}")
        else:
            out.append(f"t-test {t['a']} vs {t['b']} [{t['model']}]: t={t['t']:.3f} df={t['df']:.2f} p={t['p']:.4f}")
    return "\n".join(out).rstrip() + "\n"
