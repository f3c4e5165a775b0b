"""Negative witnesses: core invariant sets and their verification.

A non-reachability witness is a pair of small configuration sets, one
around the source and one (in the reversed automaton) around the
target.  Each set lives inside the pumpable region, restricted to
locally bounded configurations, where membership along any run is
pinned down by bounded chains.  The forward set must absorb every
pumpable locally bounded configuration reachable from it by a locally
bounded pessimistic excursion plus one step; the backward set mirrors
that in reverse.  Finally the two closures, padded by one step, must
be separated: no single transition may cross between them, and no
locally unbounded pair may even be connected in candidate semantics.
Together these conditions hold exactly when the target is unreachable,
so checking them decides non-reachability with a replayable
counterexample on every failure.

The canonical witness is the pair of perfect cores: configurations
reachable by locally bounded runs, intersected with the pumpable
region.  Within each bounded chain those form a suffix, so each chain
compresses to one arithmetic progression.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .analysis import chain_of, climbing_cycles, in_pumpable_region
from .automaton import (
    OCA,
    Config,
    Guard,
    Transition,
    reverse,
    restrict,
    scc_decompose,
    scc_of,
)
from .exploration import (
    ResourceExceeded,
    candidate_reach,
    default_budget,
    is_bounded,
    is_locally_bounded,
    post_star,
)
from .pessimistic import _closure, pessimistic_post_star

__all__ = [
    "Progression",
    "APSet",
    "NonReachabilityWitness",
    "CheckResult",
    "WitnessReport",
    "perfect_cores",
    "strong_invariant_core",
    "check_strong_invariant",
    "check_inductive",
    "check_separator",
    "check_ap_domain",
    "verify_witness",
    "synthesize_witness",
    "format_witness",
    "parse_witness",
]


@dataclass(frozen=True)
class Progression:
    """Configurations ``(state, v)`` with ``low <= v <= high`` and
    ``v == start (mod period)``."""

    state: str
    start: int
    period: int
    low: int
    high: int

    def __post_init__(self) -> None:
        if self.period < 1:
            raise ValueError("progression period must be positive")
        if min(self.start, self.low, self.high) < 0:
            raise ValueError("progression bounds are natural numbers")

    def min_value(self) -> int | None:
        first = self.low + (self.start - self.low) % self.period
        return first if first <= self.high else None

    def max_value(self) -> int | None:
        if self.min_value() is None:
            return None
        return self.high - (self.high - self.start) % self.period

    def values(self) -> range:
        first = self.min_value()
        if first is None:
            return range(0)
        return range(first, self.high + 1, self.period)

    def contains(self, c: Config) -> bool:
        return (
            c.state == self.state
            and self.low <= c.value <= self.high
            and (c.value - self.start) % self.period == 0
        )


@dataclass(frozen=True)
class APSet:
    """Union of arithmetic progressions of configurations."""

    progressions: tuple[Progression, ...]

    def contains(self, c: Config) -> bool:
        return any(p.contains(c) for p in self.progressions)

    def members(self) -> Iterator[Config]:
        seen: set[Config] = set()
        for p in sorted(self.progressions, key=lambda p: (p.state, p.low)):
            for v in p.values():
                c = Config(p.state, v)
                if c not in seen:
                    seen.add(c)
                    yield c


@dataclass(frozen=True)
class NonReachabilityWitness:
    """Forward core (this automaton) and backward core (reversed one)."""

    fwd: APSet
    bwd: APSet


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    condition: str | None = None
    detail: object = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class WitnessReport:
    verified: bool
    reason: str | None = None
    detail: object = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.verified


def _reject_equality_tests(a: OCA, what: str) -> None:
    if a.has_equality_tests():
        raise ValueError(f"{what} supports disequality tests only")


def _materialize(aps: APSet, cap: int = 200_000) -> list[Config]:
    if sum(len(p.values()) for p in aps.progressions) > cap:
        raise ResourceExceeded(f"progression set describes more than {cap} configurations")
    return list(aps.members())


def _closed_post_star(a: OCA, root: Config, locally_bounded: bool) -> set[Config]:
    """Full forward closure, escalating value budgets until it closes."""
    pred = (lambda c: is_locally_bounded(a, c)) if locally_bounded else None
    for scale in (1, 4, 16, 64, 256, 1024):
        res = post_star(a, [root], default_budget(a, root.value, scale=scale), restrict=pred)
        if not res.cap_hit:
            return set(res.configs)
    raise ResourceExceeded(f"closure from {root} did not stabilize")


def _compress_core(a: OCA, core: set[Config]) -> APSet:
    """One progression per chain; core members must form chain suffixes.

    Anything else means the core was not produced by a locally bounded
    exploration, so fail loudly instead of emitting a wrong witness.
    """
    by_chain: dict[tuple[str, int], list[int]] = {}
    chains = {}
    for c in sorted(core, key=lambda c: (c.state, c.value)):
        chain = chain_of(a, c)
        assert chain is not None, f"core configuration {c} is outside every chain"
        assert chain.last is not None, f"core configuration {c} sits in an unbounded chain"
        key = (chain.state, chain.first)
        chains[key] = chain
        by_chain.setdefault(key, []).append(c.value)
    progressions = []
    for key, values in sorted(by_chain.items()):
        chain = chains[key]
        expected = list(range(min(values), chain.last + 1, chain.period))
        assert values == expected, f"core at {key} is not a chain suffix: {values}"
        progressions.append(
            Progression(chain.state, values[0], chain.period, values[0], chain.last)
        )
    return APSet(tuple(progressions))


def perfect_cores(a: OCA, src: Config, trg: Config) -> tuple[APSet, APSet]:
    """Smallest possible witness cores, one forward and one backward.

    Requires normalized endpoints: the source pumpable and locally
    bounded, the target likewise in the reversed automaton.
    """
    _reject_equality_tests(a, "perfect cores")
    rev = reverse(a)
    if not (in_pumpable_region(a, src) and is_locally_bounded(a, src)):
        raise ValueError(f"source {src} is not pumpable and locally bounded")
    if not (in_pumpable_region(rev, trg) and is_locally_bounded(rev, trg)):
        raise ValueError(f"target {trg} is not pumpable and locally bounded in reverse")
    fwd_reach = _closed_post_star(a, src, locally_bounded=True)
    bwd_reach = _closed_post_star(rev, trg, locally_bounded=True)
    fwd = _compress_core(a, {c for c in fwd_reach if in_pumpable_region(a, c)})
    bwd = _compress_core(rev, {c for c in bwd_reach if in_pumpable_region(rev, c)})
    return fwd, bwd


def strong_invariant_core(a: OCA, src: Config) -> APSet:
    """Reachable pumpable configurations plus the source itself.

    The strongly-connected-instance counterpart of a perfect core; the
    source must be bounded so the reachable set is finite.
    """
    _reject_equality_tests(a, "strong invariants")
    if not is_bounded(a, src):
        raise ValueError(f"source {src} is unbounded, no finite core exists")
    reached = _closed_post_star(a, src, locally_bounded=False)
    core = {c for c in reached if in_pumpable_region(a, c)}
    aps = _compress_core(a, core)
    if not aps.contains(src):
        extra = Progression(src.state, src.value, 1, src.value, src.value)
        aps = APSet(aps.progressions + (extra,))
    return aps


def _run_from_parents(parents, end: Config) -> tuple[Config, tuple[int, ...]]:
    steps: list[int] = []
    cur = end
    while (link := parents[cur]) is not None:
        cur, i = link
        steps.append(i)
    return cur, tuple(reversed(steps))


def check_strong_invariant(a: OCA, src: Config, trg: Config, core: APSet) -> CheckResult:
    """Three-condition invariant check for strongly connected automata.

    Holds iff ``core`` proves the target unreachable: the source is in
    the core, the pessimistic closure of the core misses the target,
    and one step out of that closure never lands on a pumpable
    configuration outside the core.
    """
    _reject_equality_tests(a, "strong invariants")
    if len(scc_decompose(a)) != 1:
        raise ValueError("strong invariants apply to strongly connected automata only")
    if not is_bounded(a, src):
        raise ValueError(f"source {src} is unbounded")
    members = _materialize(core)
    for c in members:
        if not a.is_valid(c):
            raise ValueError(f"core member {c} is not a valid configuration")
        if c != src and not in_pumpable_region(a, c):
            raise ValueError(f"core member {c} is neither pumpable nor the source")
    if not core.contains(src):
        return CheckResult(False, "Cond1", src)
    parents = _closure(a, members, locally_bounded=False)
    if trg in parents:
        return CheckResult(False, "Cond2", _run_from_parents(parents, trg))
    for c in sorted(parents, key=lambda c: (a.state_index[c.state], c.value)):
        for i in a.out_edges[c.state]:
            t = a.transitions[i]
            d = Config(t.dst, c.value + t.update)
            if a.is_valid(d) and in_pumpable_region(a, d) and not core.contains(d):
                return CheckResult(False, "Cond3", (c, i, d))
    return CheckResult(True)


def _inductive_escape(a: OCA, aps: APSet) -> tuple[Config, int, Config] | None:
    members = _materialize(aps)
    for c in members:
        if not a.is_valid(c):
            raise ValueError(f"core member {c} is not a valid configuration")
    closure = pessimistic_post_star(a, members, locally_bounded=True)
    for c in sorted(closure, key=lambda c: (a.state_index[c.state], c.value)):
        for i in a.out_edges[c.state]:
            t = a.transitions[i]
            d = Config(t.dst, c.value + t.update)
            if not a.is_valid(d) or aps.contains(d):
                continue
            if in_pumpable_region(a, d) and is_locally_bounded(a, d):
                return c, i, d
    return None


def check_inductive(a: OCA, w: NonReachabilityWitness) -> CheckResult:
    """Closure property of the cores under locally bounded pessimistic
    exploration plus one step, forward for ``fwd``, reversed for ``bwd``."""
    escape = _inductive_escape(a, w.fwd)
    if escape is not None:
        return CheckResult(False, "forward", escape)
    escape = _inductive_escape(reverse(a), w.bwd)
    if escape is not None:
        return CheckResult(False, "backward", escape)
    return CheckResult(True)


def _induced_set(a: OCA, aps: APSet) -> set[Config]:
    """Pessimistic closure of the core plus its one-step boundary."""
    closure = pessimistic_post_star(a, _materialize(aps))
    out = set(closure)
    for c in closure:
        for i in a.out_edges[c.state]:
            t = a.transitions[i]
            d = Config(t.dst, c.value + t.update)
            if a.is_valid(d):
                out.add(d)
    return out


def check_separator(a: OCA, w: NonReachabilityWitness) -> CheckResult:
    """No crossing between the induced sets.

    Sep1: no single transition from the forward side to the backward
    side.  Sep2: no candidate path between a locally unbounded forward
    member and a backward member locally unbounded in reverse.
    """
    rev = reverse(a)
    fwd_side = _induced_set(a, w.fwd)
    bwd_side = _induced_set(rev, w.bwd)
    order = lambda c: (a.state_index[c.state], c.value)
    for c in sorted(fwd_side, key=order):
        for i in a.out_edges[c.state]:
            t = a.transitions[i]
            d = Config(t.dst, c.value + t.update)
            if a.is_valid(d) and d in bwd_side:
                return CheckResult(False, "Sep1", (c, i, d))
    loose_fwd = [c for c in sorted(fwd_side, key=order) if not is_locally_bounded(a, c)]
    loose_bwd = [d for d in sorted(bwd_side, key=order) if not is_locally_bounded(rev, d)]
    for c in loose_fwd:
        for d in loose_bwd:
            path = candidate_reach(a, c, d)
            if path is not None:
                return CheckResult(False, "Sep2", (c, d, path))
    return CheckResult(True)


def _probe_automaton(a: OCA, p: Progression) -> tuple[OCA, str]:
    """Strongly connected slice around the progression's state, plus a
    probe state that can enter the slice at exactly the member values."""
    sub, _ = restrict(a, scc_of(a)[p.state])
    probe = p.state + "'"
    while probe in sub.states:
        probe += "'"
    top = p.max_value()
    assert top is not None
    return (
        OCA(
            sub.states + (probe,),
            sub.transitions
            + (Transition(probe, 0, p.state), Transition(probe, p.period, probe)),
            {**sub.guards, probe: Guard("ne", top + p.period)},
        ),
        probe,
    )


def check_ap_domain(a: OCA, p: Progression) -> CheckResult:
    """One progression's domain obligations: valid members, the least
    member pumpable, and every member locally bounded.

    Local boundedness is decided twice, through a probe automaton that
    feeds all members into the state's component and by checking the
    members one by one; the two must agree.
    """
    members = [Config(p.state, v) for v in p.values()]
    if not members or p.state not in a.state_index:
        return CheckResult(False, "malformed", p)
    for c in members:
        if not a.is_valid(c):
            return CheckResult(False, "invalid-member", c)
    cyc = climbing_cycles(a).get(p.state)
    if cyc is None or members[0].value < cyc.drop:
        return CheckResult(False, "outside-pumpable", members[0])
    loose = next((c for c in members if not is_locally_bounded(a, c)), None)
    gadget, probe = _probe_automaton(a, p)
    assert is_bounded(gadget, Config(probe, members[0].value)) == (loose is None), (
        "probe automaton and per-member scan disagree on local boundedness"
    )
    if loose is not None:
        return CheckResult(False, "locally-unbounded", loose)
    return CheckResult(True)


def _value_bound(a: OCA) -> int:
    return 2 * len(a.states) * a.max_update * a.max_test


def verify_witness(a: OCA, src: Config, trg: Config, w: NonReachabilityWitness) -> WitnessReport:
    """Full witness check; verified means the target is unreachable.

    Refutation reasons, in checking order: trivial (equal endpoints),
    domain (endpoint or progression outside its required region), size,
    value-bound, src-membership / trg-membership, inductive, separator.
    """
    _reject_equality_tests(a, "witnesses")
    if src == trg:
        return WitnessReport(False, "trivial", src)
    if not a.is_valid(src) or not a.is_valid(trg):
        return WitnessReport(False, "domain", (src, trg))
    limit = 2 * len(a.states) ** 2 + 1
    for side, aps in (("I", w.fwd), ("J", w.bwd)):
        if len(aps.progressions) > limit:
            return WitnessReport(False, "size", side)
    bound = _value_bound(a)
    for side, aps, pivot in (("I", w.fwd, src), ("J", w.bwd, trg)):
        for p in aps.progressions:
            top = p.max_value()
            if top is None:
                return WitnessReport(False, "malformed", (side, p))
            if top > bound and not (p.min_value() == top == pivot.value and p.state == pivot.state):
                return WitnessReport(False, "value-bound", (side, p))
    rev = reverse(a)
    for side, aps, machine in (("I", w.fwd, a), ("J", w.bwd, rev)):
        for p in aps.progressions:
            res = check_ap_domain(machine, p)
            if not res:
                return WitnessReport(False, "domain", (side, p, res))
    if not w.fwd.contains(src):
        return WitnessReport(False, "src-membership", src)
    if not w.bwd.contains(trg):
        return WitnessReport(False, "trg-membership", trg)
    res = check_inductive(a, w)
    if not res:
        return WitnessReport(False, "inductive", (res.condition, res.detail))
    res = check_separator(a, w)
    if not res:
        return WitnessReport(False, "separator", (res.condition, res.detail))
    return WitnessReport(True)


def synthesize_witness(a: OCA, src: Config, trg: Config) -> NonReachabilityWitness | None:
    """Perfect cores if they verify, else nothing.

    With normalized endpoints the outcome is decisive: a witness comes
    back exactly when the target is unreachable.
    """
    w = NonReachabilityWitness(*perfect_cores(a, src, trg))
    if verify_witness(a, src, trg, w):
        return w
    return None


def format_witness(w: NonReachabilityWitness, normalized: bool = False) -> str:
    lines = ["WITNESS", f"normalized {'yes' if normalized else 'no'}"]
    for tag, aps in (("I", w.fwd), ("J", w.bwd)):
        for p in aps.progressions:
            lines.append(f"{tag} {p.state} {p.period} {p.start} {p.low} {p.high}")
    return "\n".join(lines) + "\n"


def parse_witness(text: str) -> tuple[NonReachabilityWitness, bool]:
    lines = [
        line.split("#", 1)[0].strip()
        for line in text.splitlines()
    ]
    lines = [line for line in lines if line]
    if not lines or lines[0] != "WITNESS":
        raise ValueError("witness files start with a WITNESS line")
    normalized = False
    body = lines[1:]
    if body and body[0].startswith("normalized"):
        tokens = body[0].split()
        if len(tokens) != 2 or tokens[1] not in ("yes", "no"):
            raise ValueError("expected: normalized yes|no")
        normalized = tokens[1] == "yes"
        body = body[1:]
    sides: dict[str, list[Progression]] = {"I": [], "J": []}
    for line in body:
        tokens = line.split()
        if len(tokens) != 6 or tokens[0] not in sides:
            raise ValueError(f"expected 'I|J state period start low high', got {line!r}")
        state, period, start, low, high = tokens[1], *map(int, tokens[2:])
        sides[tokens[0]].append(Progression(state, start, period, low, high))
    witness = NonReachabilityWitness(APSet(tuple(sides["I"])), APSet(tuple(sides["J"])))
    return witness, normalized
