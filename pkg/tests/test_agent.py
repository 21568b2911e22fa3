from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import line_task
from coopsim.agent import (
    FUZZY_THRESHOLD, DecisionError, LlmSettings, MatchKind, Memory, Message, Observation, build_context, decide,
    jaccard, known_actions, parse_action_choice, perceive, update_memory,
)
from coopsim.llm import BackendUnreachable, LlmResponse, ScriptedBackend
from coopsim.prompts import Comm, StrategyCombo, option_label, render_comm, render_decision
from coopsim.world import ActionKind, HighLevelAction, Location, available_actions, build_world, goal_progress

WAIT = HighLevelAction.wait()
GRAB = HighLevelAction.go_grab("plate_1", "plate")


class Canned:
    """Answers from a fixed list and records prompts."""

    def __init__(self, *replies):
        self.replies = list(replies)
        self.prompts = []

    def generate(self, req):
        self.prompts.append(req.prompt)
        return LlmResponse(self.replies.pop(0), req.model)


class Failing:
    def generate(self, req):
        raise BackendUnreachable("down", "0" * 64)


class TestPerceive:
    def test_alone_with_plate(self, task):
        world = build_world(task, 7)
        world.objects["plate_1"].location = Location.room("kitchen")
        world.agents["bob"].room = "hallway"
        obs = perceive(world, "alice")
        assert ("plate_1", "plate") in obs.visible_objects
        assert obs.other_agent_present is False
        assert obs.visible_containers == ("bin",)

    def test_together(self, task):
        assert perceive(build_world(task, 7), "alice").other_agent_present

    def test_container_contents_are_visible(self, task):
        world = build_world(task, 7)
        world.objects["fork_1"].location = Location.container("bin")
        assert ("fork_1", "fork") in perceive(world, "alice").visible_objects

    def test_held_objects_are_not_seen(self, task):
        world = build_world(task, 7)
        world.objects["plate_1"].location = Location.hand("bob", 0)
        world.agents["bob"].hands[0] = "plate_1"
        assert all(oid != "plate_1" for oid, _ in perceive(world, "alice").visible_objects)


class TestMemory:
    def test_newer_sighting_wins(self):
        mem = Memory()
        update_memory(mem, Observation("bedroom", (("plate_1", "plate"),), (), False, 2))
        update_memory(mem, Observation("kitchen", (("plate_1", "plate"),), (), False, 5))
        entry = mem.semantic["plate_1"]
        assert (entry.location, entry.tick) == (Location.room("kitchen"), 5)

    def test_one_event_per_observation(self):
        mem = Memory()
        update_memory(mem, Observation("kitchen", (), (), False, 0))
        assert len(mem.episodic) == 1

    def test_message_is_verbatim_and_does_not_touch_semantics(self):
        mem = Memory()
        msg = Message("bob", "alice", 3, "plate is in the bedroom")
        update_memory(mem, Observation("kitchen", (), (), False, 3), [msg])
        assert mem.semantic == {}
        assert mem.dialogue() == [("bob", "plate is in the bedroom")]

    def test_inbox_sorted_by_sender(self):
        mem = Memory()
        inbox = [Message("zed", "alice", 1, "z"), Message("bob", "alice", 1, "b")]
        update_memory(mem, Observation("kitchen", (), (), False, 1), inbox)
        assert [s for s, _ in mem.dialogue()] == ["bob", "zed"]

    def test_out_of_order(self):
        mem = Memory()
        update_memory(mem, Observation("kitchen", (), (), False, 4))
        with pytest.raises(ValueError):
            update_memory(mem, Observation("kitchen", (), (), False, 3))

    def test_message_validation(self):
        with pytest.raises(ValueError):
            Message("bob", "alice", 0, "")
        with pytest.raises(ValueError):
            Message("bob", "bob", 0, "hi")

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["a", "b", "c"])), max_size=20))
    def test_monotone(self, steps):
        mem = Memory()
        tick = 0
        for dt, oid in steps:
            tick += dt
            before = {k: v.tick for k, v in mem.semantic.items()}
            n = len(mem.episodic)
            update_memory(mem, Observation("r", ((oid, "thing"),), (), False, tick))
            assert len(mem.episodic) > n
            assert all(mem.semantic[k].tick >= t for k, t in before.items())


class TestContext:
    def test_fresh_memory(self, task):
        world = build_world(task, 7)
        acts = available_actions(world, "alice")
        c = build_context(Memory(), world.goal, goal_progress(world), acts, "Alice", "Bob")
        assert c.dialogue_history == () and c.action_history == ()
        assert [t for _, t in c.available_actions] == [a.display_text for a in acts]

    def test_histories(self, task):
        world = build_world(task, 7)
        mem = Memory()
        mem.record_action(0, HighLevelAction.explore("hallway"))
        mem.record_sent(Message("alice", "bob", 1, "I'll take the hallway."))
        mem.record_action(2, WAIT)
        c = build_context(mem, world.goal, goal_progress(world), [WAIT], "Alice", "Bob")
        assert c.action_history == ("go explore the hallway", "wait")
        assert c.dialogue_history == (("alice", "I'll take the hallway."),)

    def test_27_labels(self, task):
        world = build_world(task, 7)
        acts = [HighLevelAction.explore(f"room{i}") for i in range(27)]
        c = build_context(Memory(), world.goal, goal_progress(world), acts, "Alice", "Bob")
        assert [lbl for lbl, _ in c.available_actions][-2:] == ["Z", "AA"]

    def test_empty_actions(self, task):
        world = build_world(task, 7)
        with pytest.raises(ValueError):
            build_context(Memory(), world.goal, goal_progress(world), [], "Alice", "Bob")

    def test_known_actions_hides_unseen_objects(self):
        mem = Memory()
        update_memory(mem, Observation("kitchen", (("plate_1", "plate"),), (), False, 0))
        other = HighLevelAction.go_grab("fork_1", "fork")
        assert known_actions([GRAB, other, WAIT], mem) == [GRAB, WAIT]


class TestParse:
    def test_bare_letter(self):
        r = parse_action_choice("B", [WAIT, GRAB, HighLevelAction.explore("kitchen")])
        assert (r.chosen, r.kind, r.score) == (GRAB, MatchKind.EXACT, 1.0)

    def test_jaccard_on_partly_matching_tokens(self):
        # {grab, plate} / {go, goto, grab, the, plate, please}
        assert jaccard("go grab the plate please", "goto grab plate ") == pytest.approx(2 / 6)

    def test_fuzzy_against_real_display_text(self):
        r = parse_action_choice("go grab the plate please", [WAIT, GRAB])
        # {go, grab, the, plate} / {go, grab, the, plate, please, plate_1}
        assert r.kind is MatchKind.FUZZY and r.score == pytest.approx(4 / 6) and r.chosen == GRAB

    def test_unrelated_prose_falls_back(self):
        r = parse_action_choice("I think we should consider...", [WAIT, GRAB])
        assert r.kind is MatchKind.FALLBACK and r.chosen == WAIT and r.score < FUZZY_THRESHOLD

    def test_tie_goes_to_first_option(self):
        a, b = HighLevelAction.explore("red room"), HighLevelAction.explore("blue room")
        r = parse_action_choice("go explore the green room", [a, b, WAIT])
        assert r.kind is MatchKind.FUZZY and r.chosen == a

    def test_empty_actions(self):
        with pytest.raises(ValueError):
            parse_action_choice("A", [])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from(["kitchen", "bedroom", "hall", "bath", "study", "garage"]), unique=True,
                    min_size=1), st.lists(st.integers(1, 40), unique=True, max_size=30))
    def test_round_trip(self, rooms, ids):
        actions = ([HighLevelAction.explore(r) for r in rooms]
                   + [HighLevelAction.go_grab(f"cup_{i}", "cup") for i in ids] + [WAIT])
        for i, action in enumerate(actions):
            for raw in (option_label(i), action.display_text, f"{option_label(i)}.", action.display_text.upper()):
                r = parse_action_choice(raw, actions)
                assert (r.chosen, r.kind) == (action, MatchKind.EXACT), raw

    @given(st.text(max_size=300))
    def test_total(self, raw):
        r = parse_action_choice(raw, [WAIT, GRAB])
        assert r.chosen in (WAIT, GRAB)
        assert 0.0 <= r.score <= 1.0


class TestDecide:
    def test_letter_choice(self, ctx):
        acts = [WAIT, GRAB]
        c = replace(ctx, available_actions=(("A", "wait"), ("B", GRAB.display_text)))
        backend = Canned("B")
        action, msg, trace = decide(c, acts, StrategyCombo(), backend)
        assert (action, msg) == (GRAB, None)
        assert trace.match.kind is MatchKind.EXACT
        assert backend.prompts == [render_decision(StrategyCombo(), c)]

    def test_send_message(self, ctx):
        acts = [WAIT, HighLevelAction.send_message()]
        c = replace(ctx, available_actions=(("A", "wait"), ("B", "send a message")))
        combo = StrategyCombo(comm=Comm.C4)
        backend = Canned("SendMessage", "I'll take the kitchen.")
        action, msg, trace = decide(c, acts, combo, backend)
        assert action.kind is ActionKind.SEND_MESSAGE and msg == "I'll take the kitchen."
        assert trace.comm_prompt == render_comm(Comm.C4, c) == backend.prompts[1]
        assert trace.comm_raw == "I'll take the kitchen." and trace.message == msg

    def test_message_is_cleaned(self, ctx):
        acts = [WAIT, HighLevelAction.send_message()]
        c = replace(ctx, available_actions=(("A", "wait"), ("B", "send a message")))
        _, msg, _ = decide(c, acts, StrategyCombo(), Canned("B", '<think>hmm</think> "**On my way!**"'))
        assert msg == "On my way!"

    def test_empty_message_becomes_wait(self, ctx):
        acts = [WAIT, HighLevelAction.send_message()]
        c = replace(ctx, available_actions=(("A", "wait"), ("B", "send a message")))
        action, msg, trace = decide(c, acts, StrategyCombo(), Canned("B", "<think>...</think>"))
        assert (action, msg) == (WAIT, None)
        assert trace.message is None

    def test_empty_reply_falls_back(self, ctx):
        c = replace(ctx, available_actions=(("A", "wait"), ("B", GRAB.display_text)))
        action, _, trace = decide(c, [WAIT, GRAB], StrategyCombo(), Canned(""))
        assert action == WAIT and trace.match.kind is MatchKind.FALLBACK

    def test_backend_failure_carries_trace(self, ctx):
        with pytest.raises(DecisionError) as err:
            decide(ctx, [WAIT], StrategyCombo(), Failing(), tick=9)
        assert err.value.trace.tick == 9
        assert isinstance(err.value.cause, BackendUnreachable)

    def test_settings_reach_the_request(self, ctx):
        seen = []

        class Spy:
            def generate(self, req):
                seen.append(req)
                return LlmResponse("A", req.model)

        decide(ctx, [WAIT], StrategyCombo(), Spy(), LlmSettings("gemma3:4b", 0.1, 64))
        assert (seen[0].model, seen[0].temperature, seen[0].max_tokens) == ("gemma3:4b", 0.1, 64)

    def test_deterministic_with_scripted_backend(self):
        world = build_world(line_task(), 3)
        acts = available_actions(world, "alice")
        c = build_context(Memory(), world.goal, goal_progress(world), acts, "Alice", "Bob")
        runs = [decide(c, acts, StrategyCombo(), ScriptedBackend()) for _ in range(2)]
        assert runs[0][0] == runs[1][0]
        assert runs[0][2] == runs[1][2]
