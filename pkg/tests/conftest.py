from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ocareach.automaton import OCA, Guard, Transition, parse_oca

# Three states on a positive loop, one disequality test each.  The
# running example for most golden expectations in this suite.
FIG_LOOP = """
states: q r s
guard q != 5
guard r != 30
guard s != 15
trans q +2 r
trans r +1 s
trans s +2 q
"""


@pytest.fixture
def loop3() -> OCA:
    return parse_oca(FIG_LOOP)


def random_oca(
    rng: random.Random,
    num_states: int = 4,
    max_update: int = 3,
    max_guard: int = 8,
    guard_density: float = 0.5,
    equality_fraction: float = 0.0,
    num_transitions: int | None = None,
) -> OCA:
    states = tuple(f"q{i}" for i in range(num_states))
    if num_transitions is None:
        num_transitions = rng.randint(num_states, 2 * num_states)
    transitions = tuple(
        Transition(
            rng.choice(states),
            rng.randint(-max_update, max_update),
            rng.choice(states),
        )
        for _ in range(num_transitions)
    )
    guards = {}
    for q in states:
        if rng.random() < guard_density:
            kind = "eq" if rng.random() < equality_fraction else "ne"
            guards[q] = Guard(kind, rng.randint(0, max_guard))
    return OCA(states, transitions, guards)


def random_walk(a: OCA, rng: random.Random, length: int, start: str | None = None):
    """A random transition-index walk; returns (start_state, path).

    May stop early at a dead end.  Ignores counter values entirely.
    """
    state = start if start is not None else rng.choice(a.states)
    origin = state
    path = []
    for _ in range(length):
        options = a.out_edges[state]
        if not options:
            break
        i = rng.choice(options)
        path.append(i)
        state = a.transitions[i].dst
    return origin, tuple(path)
