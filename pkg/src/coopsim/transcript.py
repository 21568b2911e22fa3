"""Dialogue logs: parsing, cleaning and terminal replay with an optional
speech-synthesis hook."""

from __future__ import annotations

import logging
import re
import shlex
import subprocess
import sys
import time
import unicodedata
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, TextIO

log = logging.getLogger(__name__)

LINE = re.compile(r"^(?:(\d+) )?([A-Za-z][\w-]*): (.*)$")
THINK_BLOCK = re.compile(r"<think>.*?</think>", re.DOTALL | re.IGNORECASE)
THINK_TAG = re.compile(r"</?think>", re.IGNORECASE)
STAGE_DIRECTION = re.compile(r"\[[^\[\]]*\]")
EMPHASIS = re.compile(r"\*+|__+|`+|~~+")
QUOTE_PAIRS = {'"': '"', "'": "'", "“": "”", "‘": "’"}

DEFAULT_VOICES = {"Alice": "female", "Bob": "male"}
PALETTE = ("\033[35m", "\033[36m", "\033[33m", "\033[32m")
RESET = "\033[0m"


@dataclass(frozen=True)
class Utterance:
    speaker: str
    tick: int | None
    text: str


class Transcript(list):
    """A list of utterances that also remembers how many lines were skipped."""

    def __init__(self, items=(), skipped: int = 0):
        super().__init__(items)
        self.skipped = skipped


def _strip_controls(text: str) -> str:
    out = []
    for ch in text:
        if unicodedata.category(ch) == "Cc":
            out.append(" " if ch.isspace() else "")
        else:
            out.append(ch)
    return "".join(out)


def _strip_quotes(text: str) -> str:
    while len(text) >= 2 and QUOTE_PAIRS.get(text[0]) == text[-1]:
        text = text[1:-1].strip()
    return text


def _clean_once(text: str) -> str:
    text = THINK_BLOCK.sub(" ", text)
    text = THINK_TAG.sub(" ", text)
    text = _strip_controls(text)
    text = STAGE_DIRECTION.sub(" ", text)
    text = EMPHASIS.sub("", text)
    text = " ".join(text.split())
    return _strip_quotes(text)


def clean_text(raw: str) -> str:
    """Strip reasoning blocks, control characters, stage directions in square
    brackets, markdown emphasis and surrounding quotes; collapse whitespace.

    Applied to a fixpoint, so the result is idempotent.
    """
    text = raw
    while True:
        cleaned = _clean_once(text)
        if cleaned == text:
            return cleaned
        text = cleaned


def format_utterance(u: Utterance) -> str:
    prefix = f"{u.tick} " if u.tick is not None else ""
    return f"{prefix}{u.speaker}: {u.text}"


def parse_line(line: str) -> Utterance | None:
    m = LINE.match(line.rstrip("\r\n"))
    if not m:
        return None
    tick, speaker, text = m.groups()
    text = clean_text(text)
    if not text:
        return None
    return Utterance(speaker, int(tick) if tick is not None else None, text)


def parse_lines(lines: Iterable[str]) -> Transcript:
    out = Transcript()
    for line in lines:
        if not line.strip():
            continue
        u = parse_line(line)
        if u is None:
            out.skipped += 1
        else:
            out.append(u)
    return out


def parse_log(path: str | Path) -> Transcript:
    """Parse a ``<tick> <name>: <text>`` dialogue log; other lines are skipped."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        return parse_lines(fh)


def follow_log(path: str | Path, poll_interval: float = 0.2, idle_timeout: float | None = None,
               from_start: bool = True) -> Iterator[Utterance]:
    """Yield utterances from a growing log as lines are appended.

    Stops after ``idle_timeout`` seconds without new data (never, if None).
    """
    with open(path, encoding="utf-8", errors="replace") as fh:
        if not from_start:
            fh.seek(0, 2)
        partial = ""
        idle_since = time.monotonic()
        while True:
            chunk = fh.readline()
            if chunk:
                idle_since = time.monotonic()
                partial += chunk
                if not partial.endswith("\n"):
                    continue
                line, partial = partial, ""
                u = parse_line(line)
                if u is not None:
                    yield u
                continue
            if idle_timeout is not None and time.monotonic() - idle_since >= idle_timeout:
                if partial:
                    u = parse_line(partial)
                    if u is not None:
                        yield u
                return
            time.sleep(poll_interval)


def build_speech_args(template: str, u: Utterance, voices: dict[str, str] | None = None) -> list[str]:
    voices = DEFAULT_VOICES if voices is None else voices
    values = {"$TEXT$": u.text, "$SPEAKER$": u.speaker, "$VOICE$": voices.get(u.speaker, "default")}
    args = []
    for arg in shlex.split(template):
        for token, value in values.items():
            arg = arg.replace(token, value)
        args.append(arg)
    return args


def _speak(args: list[str], index: int) -> None:
    try:
        proc = subprocess.run(args, capture_output=True, text=True)
    except OSError as exc:
        log.warning("speech command failed for utterance %d: %s", index, exc)
        return
    if proc.returncode != 0:
        log.warning("speech command exited %d for utterance %d: %s", proc.returncode, index,
                    proc.stderr.strip()[:200])


def replay(utterances: Iterable[Utterance], delay_ms: int = 0, speech_command: str | None = None,
           out: TextIO | None = None, color: bool | None = None, voices: dict[str, str] | None = None) -> int:
    """Print utterances in order as ``Name: text``; optionally speak each one.

    Speech runs on one background lane so printing never waits for the
    synthesizer for more than one utterance. Returns the number printed.
    """
    out = sys.stdout if out is None else out
    if color is None:
        color = hasattr(out, "isatty") and out.isatty()
    colors: dict[str, str] = {}
    pending: deque[Future] = deque()
    count = 0
    with ThreadPoolExecutor(max_workers=1) as lane:
        for u in utterances:
            if speech_command:
                pending.append(lane.submit(_speak, build_speech_args(speech_command, u, voices), count))
            line = f"{u.speaker}: {u.text}"
            if color:
                code = colors.setdefault(u.speaker, PALETTE[len(colors) % len(PALETTE)])
                line = f"{code}{u.speaker}{RESET}: {u.text}"
            print(line, file=out, flush=True)
            count += 1
            while len(pending) > 1:
                pending.popleft().result()
            if delay_ms:
                time.sleep(delay_ms / 1000.0)
    return count
