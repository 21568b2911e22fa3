import pytest

from coopsim.prompts import PromptContext
from coopsim.tasks import ContainerSpec, ObjectSupply, TaskSpec, VariationSpec


def golden_context() -> PromptContext:
    return PromptContext(
        agent_name="Alice",
        oppo_name="Bob",
        goal_text="Transport 2 plates and 3 forks to the dishwasher.",
        progress_text="Transported 1 of 5 target objects; 1 plate and 3 forks remaining.",
        dialogue_history=(("Bob", "I'll check the bedroom for forks."), ("Alice", "OK, I have a plate.")),
        action_history=("go explore the kitchen", "go grab the plate (plate_1)"),
        available_actions=(
            ("A", "go explore the bedroom"),
            ("B", "go grab the plate (plate_2)"),
            ("C", "go put the held objects into the dishwasher"),
            ("D", "send a message"),
            ("E", "wait"),
        ),
    )


@pytest.fixture
def ctx() -> PromptContext:
    return golden_context()


def line_task(supply=(("plate", 2, ("bedroom",)), ("fork", 3, ("hallway",))), counts=None) -> TaskSpec:
    """kitchen -1- hallway -1- bedroom; goal bin in the kitchen."""
    counts = counts or {"plate": 1, "fork": 1}
    return TaskSpec(
        id="line",
        description="three rooms in a row",
        rooms=("bedroom", "hallway", "kitchen"),
        edges=(("kitchen", "hallway", 1), ("hallway", "bedroom", 1)),
        start_room="kitchen",
        containers=(ContainerSpec("bin", "kitchen"), ContainerSpec("box", "bedroom")),
        target="bin",
        objects=tuple(ObjectSupply(c, n, h) for c, n, h in supply),
        variations=(VariationSpec("a", counts),),
    )


@pytest.fixture
def task() -> TaskSpec:
    return line_task()


# --- acceptance summary: one line per criterion ---------------------------------

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and not report.skipped and report.passed):
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "failed": [], "skipped": [], "passed": 0})
    if report.skipped:
        entry["skipped"].append(item.name)
    elif report.failed:
        entry["failed"].append(item.name)
    elif report.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        if e["failed"]:
            status = "FAIL"
            detail = f" (failed: {', '.join(e['failed'])})"
        elif e["skipped"] and not e["passed"]:
            status, detail = "SKIP", ""
        else:
            status, detail = "PASS", ""
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}{detail}")
