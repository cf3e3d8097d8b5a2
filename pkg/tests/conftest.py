import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from rftsim.compiler import compile_tree
from rftsim.rft import parse_rft

CORPUS = pathlib.Path(__file__).parent / "corpus"


def corpus_files():
    return sorted(CORPUS.glob("*.rft"))


def corpus_text(name):
    return (CORPUS / name).read_text()


def load_tree(name):
    return parse_rft(corpus_text(name))


_compiled = {}


def load_compiled(name):
    if name not in _compiled:
        _compiled[name] = compile_tree(load_tree(name))
    return _compiled[name]


@pytest.fixture
def corpus():
    return corpus_files()


def drive(aut, actions, *, collect_prefixes=("f_", "u_"), start=None):
    """Feed input actions into an automaton and fire urgent outputs.

    After each injected input, enabled urgent outputs fire (smallest name
    first) until the state is stable.  Returns the fired output names that
    match the given prefixes, in order.  Only usable on automata whose
    input responses are deterministic.
    """
    state = aut.init_state if start is None else start
    emitted = []

    def respond(s, action):
        ts = aut.out_by_action(s, action)
        assert ts, f"no transition for {action} at {aut.state_labels[s]}"
        assert len({(t.resets, t.targets) for t in ts}) == 1
        assert not ts[0].probabilistic
        return ts[0].target

    def settle(s):
        while True:
            outs = aut.urgent_outputs_at(s)
            if not outs:
                return s
            a = outs[0]
            emitted.append(a)
            s = respond(s, a) if aut.actions[a].direction == "input" else \
                aut.out_by_action(s, a)[0].target
        return s

    state = settle(state)
    for a in actions:
        state = respond(state, a)
        state = settle(state)
    return [e for e in emitted if e.startswith(collect_prefixes)], state
