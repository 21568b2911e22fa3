import io
import sys
import threading
import time

import pytest
from hypothesis import given, settings, strategies as st

from coopsim.transcript import (
    Utterance, build_speech_args, clean_text, follow_log, format_utterance, parse_line, parse_lines, parse_log,
    replay,
)


@pytest.mark.parametrize("raw,clean", [
    ("**Sure!** I'll take [the] kitchen.", "Sure! I'll take kitchen."),
    ('"I will check the bedroom."', "I will check the bedroom."),
    ("<think>should I go?</think>Going to the hallway.", "Going to the hallway."),
    ("  lots \t of\n\nspace ", "lots of space"),
    ("`code` and ~~strike~~ and __bold__", "code and strike and bold"),
    ("bell\x07 here", "bell here"),
    ("[smiles] [[nested]]", ""),
    ("", ""),
])
def test_clean_text(raw, clean):
    assert clean_text(raw) == clean


@settings(max_examples=500)
@given(st.text(alphabet=st.sampled_from(list("ab *_`~[]\"'<>/think\n\t\x00“”")), max_size=60))
def test_clean_idempotent_on_markup(s):
    once = clean_text(s)
    assert clean_text(once) == once


def test_parse_line():
    assert parse_line("12 Alice: I'll take the kitchen.") == Utterance("Alice", 12, "I'll take the kitchen.")
    assert parse_line("Bob: ok") == Utterance("Bob", None, "ok")
    assert parse_line("not a dialogue line") is None
    assert parse_line("3 Bob: [nods]") is None


def test_parse_counts_skipped(tmp_path):
    path = tmp_path / "d.log"
    path.write_bytes(b"1 Alice: hi\ngarbage\n\n2 Bob: \xff hello\n")
    t = parse_log(path)
    assert [u.speaker for u in t] == ["Alice", "Bob"] and t.skipped == 1


@given(st.lists(st.tuples(st.sampled_from(["Alice", "Bob", "Carol-2"]), st.integers(0, 10**6),
                          st.text(min_size=1, max_size=40))))
def test_round_trip(items):
    utterances = [Utterance(s, t, clean_text(x)) for s, t, x in items if clean_text(x) and "\n" not in x]
    text = "".join(format_utterance(u) + "\n" for u in utterances)
    assert list(parse_lines(text.splitlines(keepends=True))) == utterances


def test_speech_args():
    u = Utterance("Bob", 3, "it's done")
    assert build_speech_args("say -v $VOICE$ '$SPEAKER$ says $TEXT$'", u) == ["say", "-v", "male", "Bob says it's done"]
    assert build_speech_args("tts $VOICE$", Utterance("Zed", 1, "x")) == ["tts", "default"]


def test_replay_plain_output():
    out = io.StringIO()
    n = replay([Utterance("Alice", 1, "hi"), Utterance("Bob", 2, "hello")], out=out)
    assert n == 2 and out.getvalue() == "Alice: hi\nBob: hello\n"


def test_replay_color():
    out = io.StringIO()
    replay([Utterance("Alice", 1, "hi")], out=out, color=True)
    assert "\033[" in out.getvalue()


def test_slow_speech_keeps_order(tmp_path):
    spoken = tmp_path / "spoken.txt"
    script = tmp_path / "slow_say.py"
    script.write_text(
        "import sys, time\n"
        "time.sleep(0.15)\n"
        f"open({str(spoken)!r}, 'a').write(sys.argv[1] + '\\n')\n"
    )
    utterances = [Utterance("Alice" if i % 2 else "Bob", i, f"line {i}") for i in range(6)]
    out = io.StringIO()
    start = time.monotonic()
    replay(utterances, speech_command=f"{sys.executable} {script} $TEXT$", out=out)
    elapsed = time.monotonic() - start
    assert out.getvalue().splitlines() == [f"{u.speaker}: {u.text}" for u in utterances]
    assert spoken.read_text().splitlines() == [u.text for u in utterances]
    assert elapsed >= 6 * 0.15


def test_failing_speech_command_is_not_fatal(caplog):
    out = io.StringIO()
    replay([Utterance("Alice", 1, "hi")], speech_command="/nonexistent/speaker $TEXT$", out=out)
    assert out.getvalue() == "Alice: hi\n"
    assert "speech command failed" in caplog.text


def test_follow_picks_up_appended_lines(tmp_path):
    path = tmp_path / "live.log"
    path.write_text("1 Alice: first\n")

    def writer():
        time.sleep(0.2)
        with open(path, "a") as fh:
            fh.write("2 Bob: sec")
            fh.flush()
            time.sleep(0.1)
            fh.write("ond\n")

    thread = threading.Thread(target=writer)
    thread.start()
    got = list(follow_log(path, poll_interval=0.02, idle_timeout=0.6))
    thread.join()
    assert got == [Utterance("Alice", 1, "first"), Utterance("Bob", 2, "second")]
