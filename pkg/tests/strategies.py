"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from coopsim.prompts import PromptContext, option_label

# printable text that may include "$", braces and unicode
any_text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40)
names = st.from_regex(r"[A-Z][a-z]{1,8}", fullmatch=True)


@st.composite
def contexts(draw, text=any_text):
    n_opts = draw(st.integers(1, 30))
    return PromptContext(
        agent_name=draw(names),
        oppo_name=draw(names),
        goal_text=draw(text),
        progress_text=draw(text),
        dialogue_history=tuple(draw(st.lists(st.tuples(names, text), max_size=4))),
        action_history=tuple(draw(st.lists(text, max_size=4))),
        available_actions=tuple((option_label(i), draw(text)) for i in range(n_opts)),
    )
