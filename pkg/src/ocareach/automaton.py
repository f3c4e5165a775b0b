"""One-counter automata with per-state counter tests.

A machine is a finite digraph whose edges carry integer counter updates.
Each control state carries at most one test, ``== k`` or ``!= k`` against
the counter; a configuration ``state:value`` is valid when the value is
nonnegative and passes the state's test.  Runs step along transitions
through valid configurations only.  Candidate runs relax both
requirements and live in plain integer semantics.

Paths are tuples of transition indices into ``OCA.transitions``; indices
are stable, survive duplicate transitions, and are what the evidence
file formats reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Literal

GuardKind = Literal["true", "eq", "ne"]

Path = tuple[int, ...]


@dataclass(frozen=True)
class Guard:
    kind: GuardKind = "true"
    value: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "true":
            if self.value is not None:
                raise ValueError("a trivial guard carries no test value")
        elif self.kind in ("eq", "ne"):
            if self.value is None or self.value < 0:
                raise ValueError("counter tests compare against a natural number")
        else:
            raise ValueError(f"unknown guard kind {self.kind!r}")

    def allows(self, value: int) -> bool:
        if self.kind == "eq":
            return value == self.value
        if self.kind == "ne":
            return value != self.value
        return True

    def __str__(self) -> str:
        if self.kind == "eq":
            return f"== {self.value}"
        if self.kind == "ne":
            return f"!= {self.value}"
        return "true"


TRUE_GUARD = Guard()


@dataclass(frozen=True)
class Transition:
    src: str
    update: int
    dst: str

    def __str__(self) -> str:
        return f"{self.src} {self.update:+d} {self.dst}"


@dataclass(frozen=True)
class Config:
    state: str
    value: int

    def __str__(self) -> str:
        return f"{self.state}:{self.value}"


@dataclass(eq=False)
class OCA:
    """Automaton container.

    Instances compare by identity on purpose: every derived analysis in
    this package is memoized per automaton object, so two parses of the
    same file are two cache keys, never a collision.
    """

    states: tuple[str, ...]
    transitions: tuple[Transition, ...]
    guards: dict[str, Guard]

    def __post_init__(self) -> None:
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state names")
        known = set(self.states)
        for t in self.transitions:
            if t.src not in known or t.dst not in known:
                raise ValueError(f"transition {t} uses an undeclared state")
        for q in self.guards:
            if q not in known:
                raise ValueError(f"guard on undeclared state {q!r}")
        for q in self.states:
            self.guards.setdefault(q, TRUE_GUARD)

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.states)}

    @cached_property
    def out_edges(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {q: [] for q in self.states}
        for i, t in enumerate(self.transitions):
            out[t.src].append(i)
        return {q: tuple(v) for q, v in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[int, ...]]:
        inc: dict[str, list[int]] = {q: [] for q in self.states}
        for i, t in enumerate(self.transitions):
            inc[t.dst].append(i)
        return {q: tuple(v) for q, v in inc.items()}

    @cached_property
    def max_update(self) -> int:
        return max((abs(t.update) for t in self.transitions), default=0)

    @cached_property
    def max_test(self) -> int:
        return max(
            (g.value for g in self.guards.values() if g.value is not None),
            default=0,
        )

    def guard(self, state: str) -> Guard:
        return self.guards[state]

    def is_valid(self, c: Config) -> bool:
        return c.value >= 0 and self.guards[c.state].allows(c.value)

    def has_equality_tests(self) -> bool:
        return any(g.kind == "eq" for g in self.guards.values())


class ReplayError(ValueError):
    """A path failed to replay; ``index`` points at the first bad spot.

    ``index`` counts configurations (0 is the start), and for a
    transition whose source state does not match it is the position of
    the offending step.
    """

    def __init__(self, reason: str, index: int, config: Config | None = None):
        super().__init__(f"{reason} at index {index}" + (f" ({config})" if config else ""))
        self.reason = reason
        self.index = index
        self.config = config


def parse_config(text: str) -> Config:
    """Parse a ``state:value`` literal such as ``q:0``."""
    state, sep, value = text.rpartition(":")
    if not sep or not state:
        raise ValueError(f"bad configuration literal {text!r}, expected state:value")
    return Config(state, int(value))


def parse_oca(text: str) -> OCA:
    """Parse the plain-text automaton format.

    ::

        # comment
        states: q r s
        guard q != 5
        guard r == 7
        trans q +2 r
    """
    states: tuple[str, ...] | None = None
    guards: dict[str, Guard] = {}
    transitions: list[Transition] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "states:":
                if states is not None:
                    raise ValueError("states declared twice")
                if len(tokens) == 1:
                    raise ValueError("empty states declaration")
                states = tuple(tokens[1:])
            elif tokens[0] == "guard":
                if len(tokens) != 4 or tokens[2] not in ("!=", "=="):
                    raise ValueError("expected: guard STATE !=|== VALUE")
                state, op, value = tokens[1], tokens[2], int(tokens[3])
                if state in guards:
                    raise ValueError(f"second guard for state {state!r}")
                guards[state] = Guard("eq" if op == "==" else "ne", value)
            elif tokens[0] == "trans":
                if len(tokens) != 4:
                    raise ValueError("expected: trans SRC UPDATE DST")
                transitions.append(Transition(tokens[1], int(tokens[2]), tokens[3]))
            else:
                raise ValueError(f"unknown directive {tokens[0]!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if states is None:
        raise ValueError("missing states: declaration")
    return OCA(states, tuple(transitions), guards)


def format_oca(a: OCA) -> str:
    lines = ["states: " + " ".join(a.states)]
    for q in a.states:
        g = a.guards[q]
        if g.kind != "true":
            op = "==" if g.kind == "eq" else "!="
            lines.append(f"guard {q} {op} {g.value}")
    for t in a.transitions:
        lines.append(f"trans {t.src} {t.update:+d} {t.dst}")
    return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def reverse(a: OCA) -> OCA:
    """The reversed automaton: arrows flipped, updates negated, tests kept.

    Transition ``i`` of the result mirrors transition ``i`` of ``a``, so
    a path reversed index-wise replays there.
    """
    flipped = tuple(Transition(t.dst, -t.update, t.src) for t in a.transitions)
    return OCA(a.states, flipped, dict(a.guards))


@lru_cache(maxsize=None)
def restrict(a: OCA, states: frozenset[str]) -> tuple[OCA, tuple[int, ...]]:
    """Sub-automaton induced by ``states``.

    Returns the restriction and the tuple mapping its transition indices
    back to indices in ``a``.
    """
    kept = tuple(q for q in a.states if q in states)
    indices = tuple(
        i for i, t in enumerate(a.transitions) if t.src in states and t.dst in states
    )
    sub = OCA(
        kept,
        tuple(a.transitions[i] for i in indices),
        {q: a.guards[q] for q in kept},
    )
    return sub, indices


def scc_decompose(a: OCA) -> tuple[frozenset[str], ...]:
    """Strongly connected components, topologically ordered, sources first.

    Iterative Tarjan; single states without a self-loop still form their
    own (trivial) component.
    """
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[frozenset[str]] = []
    counter = 0

    adjacency = {q: tuple(a.transitions[i].dst for i in a.out_edges[q]) for q in a.states}

    for root in a.states:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, child = work[-1]
            if child == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            neighbors = adjacency[node]
            while child < len(neighbors):
                succ = neighbors[child]
                child += 1
                if succ not in index:
                    work[-1] = (node, child)
                    work.append((succ, 0))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(frozenset(component))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    # Tarjan finishes sinks first; flip to put sources first.
    components.reverse()
    return tuple(components)


@lru_cache(maxsize=None)
def scc_of(a: OCA) -> dict[str, frozenset[str]]:
    """State -> its strongly connected component."""
    table: dict[str, frozenset[str]] = {}
    for component in scc_decompose(a):
        for q in component:
            table[q] = component
    return table


def path_states(a: OCA, start_state: str, path: Path) -> list[str]:
    """States visited by ``path`` from ``start_state`` (length + 1 entries)."""
    if start_state not in a.state_index:
        raise ValueError(f"unknown state {start_state!r}")
    states = [start_state]
    for pos, i in enumerate(path):
        t = a.transitions[i]
        if t.src != states[-1]:
            raise ReplayError("step source mismatch", pos)
        states.append(t.dst)
    return states


def path_effect_drop(a: OCA, path: Path) -> tuple[int, int]:
    """Total counter effect and drop of a path.

    The drop is the smallest start value keeping every prefix
    nonnegative; it composes as
    ``drop(p + q) = max(drop(p), drop(q) - effect(p))``.
    """
    effect = 0
    drop = 0
    for i in path:
        effect += a.transitions[i].update
        if -effect > drop:
            drop = -effect
    return effect, drop


def apply_path(a: OCA, start: Config, path: Path, mode: str = "valid") -> list[Config]:
    """Replay ``path`` from ``start`` and return every configuration.

    ``valid`` mode raises :class:`ReplayError` at the first configuration
    that is negative or fails its state's test (the start counts, at
    index 0).  ``candidate`` mode only checks that transitions chain.
    """
    if mode not in ("valid", "candidate"):
        raise ValueError(f"unknown replay mode {mode!r}")
    if start.state not in a.state_index:
        raise ValueError(f"unknown state {start.state!r}")
    check = mode == "valid"
    configs = [start]
    if check and not a.is_valid(start):
        raise ReplayError("invalid configuration", 0, start)
    for pos, i in enumerate(path):
        t = a.transitions[i]
        if t.src != configs[-1].state:
            raise ReplayError("step source mismatch", pos, configs[-1])
        nxt = Config(t.dst, configs[-1].value + t.update)
        if check and not a.is_valid(nxt):
            raise ReplayError("invalid configuration", pos + 1, nxt)
        configs.append(nxt)
    return configs
