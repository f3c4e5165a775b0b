"""Top-level reachability decisions with self-certifying verdicts.

Glue layer over the structural machinery: endpoint normalization so the
invariant engine's preconditions always hold, a pumping shortcut when
both endpoints sit in locally unbounded components, and a finite graph
wrapper that reduces equality tests to disequality-only queries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import in_pumpable_region
from .automaton import (
    OCA,
    Config,
    Guard,
    Path,
    Transition,
    apply_path,
    path_effect_drop,
    restrict,
    reverse,
    scc_of,
)
from .exploration import (
    ExplorationBudget,
    ResourceExceeded,
    candidate_reach,
    default_budget,
    is_locally_bounded,
    post_star,
    reach_oracle,
)
from .invariants import NonReachabilityWitness, synthesize_witness

REACHABLE = "reachable"
UNREACHABLE = "unreachable"
RESOURCE_EXCEEDED = "resource-exceeded"

# Re-derive every decisive verdict through the exploration oracle and
# fail hard on disagreement.  The test suite flips this on; it roughly
# doubles the cost of a decision.
CROSS_CHECK = False


@dataclass(frozen=True)
class Verdict:
    """Outcome of a reachability query plus the evidence backing it.

    ``run`` is present on reachable verdicts and replays under valid
    semantics.  ``witness`` is present on unreachable verdicts decided
    by the invariant engine and is stated over ``certified``, the
    normalized instance it was synthesized for.  ``parts`` carries the
    per-edge refusals when the equality wrapper pieced the answer
    together from several disequality queries.
    """

    kind: str
    run: Path | None = None
    witness: NonReachabilityWitness | None = None
    certified: tuple[OCA, Config, Config] | None = None
    parts: tuple[tuple[Config, Config, "Verdict"], ...] = ()
    note: str = ""


def _fresh_state(taken: set[str], base: str) -> str:
    name = base + "'"
    while name in taken:
        name += "'"
    return name


def normalize_endpoints(a: OCA, src: Config, trg: Config) -> tuple[OCA, Config, Config]:
    """Extend ``a`` with fenced endpoint states; reachability is unchanged.

    The new source gets a +1 self-loop and the new target a -1
    self-loop, each fenced by a disequality test one above the endpoint
    value.  The fences block the loops at the endpoints themselves, so
    both new configurations are locally bounded while still owning a
    climbing cycle, which is exactly what the invariant engine needs.
    The only way out of the new source is a zero-effect step onto the
    old one, and the only way into the new target at its own value is a
    zero-effect step off the old one, so runs correspond one to one.
    """
    for c in (src, trg):
        if not a.is_valid(c):
            raise ValueError(f"configuration {c} is not valid")
    taken = set(a.states)
    sp = _fresh_state(taken, src.state)
    taken.add(sp)
    tp = _fresh_state(taken, trg.state)
    transitions = a.transitions + (
        Transition(sp, 0, src.state),
        Transition(sp, 1, sp),
        Transition(trg.state, 0, tp),
        Transition(tp, -1, tp),
    )
    guards = dict(a.guards)
    guards[sp] = Guard("ne", src.value + 1)
    guards[tp] = Guard("ne", trg.value + 1)
    n = OCA(a.states + (sp, tp), transitions, guards)
    src2 = Config(sp, src.value)
    trg2 = Config(tp, trg.value)
    assert in_pumpable_region(n, src2) and is_locally_bounded(n, src2)
    rev = reverse(n)
    assert in_pumpable_region(rev, trg2) and is_locally_bounded(rev, trg2)
    return n, src2, trg2


def _state_path(a: OCA, u: str, v: str) -> Path:
    """Shortest transition sequence from state ``u`` to state ``v``."""
    if u == v:
        return ()
    parents: dict[str, tuple[str, int]] = {}
    frontier = [u]
    seen = {u}
    while frontier:
        nxt: list[str] = []
        for q in frontier:
            for i in a.out_edges[q]:
                d = a.transitions[i].dst
                if d in seen:
                    continue
                seen.add(d)
                parents[d] = (q, i)
                if d == v:
                    rev: list[int] = []
                    while d != u:
                        d, j = parents[d]
                        rev.append(j)
                    return tuple(reversed(rev))
                nxt.append(d)
        frontier = nxt
    raise ValueError(f"no path from {u} to {v}")


def _pumping_cycle(a: OCA, c: Config) -> tuple[Path, int]:
    """Cycle on ``c.state`` that climbs from ``c`` and from anywhere above.

    Explores c's component until the counter clears every test plus the
    worst a return walk can drop, then closes the loop along a shortest
    path back.  The first lap is valid by construction and every later
    lap runs entirely above the tests, so the cycle pumps freely.
    Returns the cycle and its (positive) effect.
    """
    comp = scc_of(a)[c.state]
    sub, back = restrict(a, comp)
    goal = c.value + a.max_test + a.max_update * len(a.states) + 1
    high: Config | None = None
    res = None
    for k in range(4):
        budget = default_budget(sub, c.value, goal, scale=4**k)
        try:
            res = post_star(sub, [c], budget)
        except ResourceExceeded:
            continue
        above = [e for e in res.configs if e.value > goal]
        if above:
            high = min(above, key=lambda e: (e.value, sub.state_index[e.state]))
            break
        if not res.cap_hit:
            raise ValueError(f"{c} is locally bounded; nothing to pump")
    if high is None or res is None:
        raise ResourceExceeded(f"no climb above {goal} found from {c}")
    climb = res.run_to(high)
    cycle = tuple(back[i] for i in climb + _state_path(sub, high.state, c.state))
    configs = apply_path(a, c, cycle)
    effect = configs[-1].value - c.value
    assert configs[-1].state == c.state and effect > a.max_test
    return cycle, effect


def lift_candidate_run(a: OCA, c: Config, d: Config, p: Path) -> Path:
    """Turn a candidate path into a valid run by pumping at both ends.

    Requires ``c`` locally unbounded forwards and ``d`` locally
    unbounded backwards.  Climbs high enough at the source that the
    candidate path runs entirely above the tests, then descends at the
    target; the climb and descent repeat whole cycles so the heights
    cancel exactly.
    """
    if a.has_equality_tests():
        raise ValueError("lifting needs an automaton with disequality tests only")
    for e in (c, d):
        if not a.is_valid(e):
            raise ValueError(f"configuration {e} is not valid")
    if is_locally_bounded(a, c):
        raise ValueError(f"{c} is locally bounded; lifting does not apply")
    rev = reverse(a)
    if is_locally_bounded(rev, d):
        raise ValueError(f"{d} is locally bounded in reverse; lifting does not apply")
    if apply_path(a, c, p, mode="candidate")[-1] != d:
        raise ValueError(f"path does not lead from {c} to {d} over the integers")
    up, e_up = _pumping_cycle(a, c)
    down_rev, e_down = _pumping_cycle(rev, d)
    down = tuple(reversed(down_rev))
    _, drop = path_effect_drop(a, p)
    m = drop + a.max_test + 1
    run = up * (m * e_down) + p + down * (m * e_up)
    assert apply_path(a, c, run)[-1] == d
    return run


def _certify_run(a: OCA, src: Config, trg: Config, run: Path) -> Verdict:
    assert apply_path(a, src, run)[-1] == trg
    return Verdict(REACHABLE, run=run)


def _decide_disequality(
    a: OCA, src: Config, trg: Config, budget: ExplorationBudget | None
) -> Verdict:
    if src == trg:
        return Verdict(REACHABLE, run=())
    if not is_locally_bounded(a, src) and not is_locally_bounded(reverse(a), trg):
        p = candidate_reach(a, src, trg)
        if p is not None:
            return _certify_run(a, src, trg, lift_candidate_run(a, src, trg, p))
        # Definitely unreachable: no run over the integers, let alone a
        # valid one.  Still try for a checkable invariant certificate.
        n, s2, t2 = normalize_endpoints(a, src, trg)
        try:
            w = synthesize_witness(n, s2, t2)
        except ResourceExceeded:
            w = None
        if w is None:
            return Verdict(UNREACHABLE, note="no candidate run over the integers")
        return Verdict(UNREACHABLE, witness=w, certified=(n, s2, t2))
    n, s2, t2 = normalize_endpoints(a, src, trg)
    w = synthesize_witness(n, s2, t2)
    if w is not None:
        return Verdict(UNREACHABLE, witness=w, certified=(n, s2, t2))
    # No witness means the perfect cores failed verification, which only
    # happens on reachable instances; the oracle digs up the run.
    run = reach_oracle(a, src, trg, budget)
    assert run is not None, "witness synthesis and exploration disagree"
    return _certify_run(a, src, trg, run)


def decide_disequality(
    a: OCA, src: Config, trg: Config, budget: ExplorationBudget | None = None
) -> Verdict:
    """Decide src ->* trg in an automaton without equality tests.

    Both endpoints locally unbounded (forwards resp. backwards): decided
    at the candidate level and lifted.  Otherwise the endpoints are
    normalized and the invariant engine either synthesizes a witness or,
    by failing to, certifies reachability.  ``budget`` caps the
    exploration fallback that extracts the run; the structural legs
    manage their own escalation.  Raises :class:`ResourceExceeded` when
    a budget ran out undecided.
    """
    if a.has_equality_tests():
        raise ValueError("decide_disequality needs disequality tests only")
    for c in (src, trg):
        if not a.is_valid(c):
            raise ValueError(f"configuration {c} is not valid")
    verdict = _decide_disequality(a, src, trg, budget)
    if CROSS_CHECK:
        try:
            run = reach_oracle(a, src, trg)
        except ResourceExceeded:
            pass
        else:
            assert (run is not None) == (verdict.kind == REACHABLE), (
                f"oracle disagrees with {verdict.kind} for {src} -> {trg}"
            )
    return verdict


def _pinned_configs(a: OCA) -> list[Config]:
    """The single valid configuration of every equality-test state."""
    pins = []
    for q in a.states:
        g = a.guards.get(q)
        if g is not None and g.kind == "eq" and g.value >= 0:
            pins.append(Config(q, g.value))
    return pins


def decide_full(
    a: OCA, src: Config, trg: Config, budget: ExplorationBudget | None = None
) -> Verdict:
    """Decide src ->* trg with equality and disequality tests mixed.

    Every run decomposes at its visits to equality-test states, each of
    which admits exactly one valid configuration.  Those pins plus the
    endpoints form a finite graph whose edges are disequality-only
    queries in the automaton with the equality states deleted, plus the
    single steps that bridge into and out of the deleted states.  Depth
    first search then settles the instance.
    """
    for c in (src, trg):
        if not a.is_valid(c):
            raise ValueError(f"configuration {c} is not valid")
    if src == trg:
        return Verdict(REACHABLE, run=())
    eq_states = {q for q, g in a.guards.items() if g.kind == "eq"}
    if not eq_states:
        return decide_disequality(a, src, trg, budget)
    keep = frozenset(a.states) - eq_states
    sub, back = restrict(a, keep)

    vertices = [src]
    for pin in _pinned_configs(a):
        if pin not in (src, trg):
            vertices.append(pin)
    vertices.append(trg)

    def entries(u: Config) -> list[tuple[Path, Config]]:
        if u.state not in eq_states:
            return [((), u)]
        out = []
        for i in a.out_edges[u.state]:
            t = a.transitions[i]
            e = Config(t.dst, u.value + t.update)
            if t.dst not in eq_states and a.is_valid(e):
                out.append(((i,), e))
        return out

    def exits(v: Config) -> list[tuple[Config, Path]]:
        if v.state not in eq_states:
            return [(v, ())]
        out = []
        for i in a.in_edges[v.state]:
            t = a.transitions[i]
            e = Config(t.src, v.value - t.update)
            if t.src not in eq_states and a.is_valid(e):
                out.append((e, (i,)))
        return out

    refusals: list[tuple[Config, Config, Verdict]] = []
    blocked = 0

    def segment(u: Config, v: Config) -> Path | None:
        """A valid run u -> v meeting no equality state in between."""
        nonlocal blocked
        for i in a.out_edges[u.state]:
            t = a.transitions[i]
            if Config(t.dst, u.value + t.update) == v:
                return (i,)
        undecided = False
        for pre, e in entries(u):
            for x, post in exits(v):
                try:
                    got = decide_disequality(sub, e, x, budget)
                except ResourceExceeded:
                    undecided = True
                    continue
                if got.kind == REACHABLE:
                    assert got.run is not None
                    return pre + tuple(back[i] for i in got.run) + post
                refusals.append((e, x, got))
        if undecided:
            blocked += 1
            return None
        return None

    # Depth first search over the pinned-configuration graph, edges
    # queried on demand and each pair settled at most once.
    paths: dict[Config, Path] = {src: ()}
    stack = [src]
    while stack:
        u = stack.pop()
        for v in vertices:
            if v in paths or v == u:
                continue
            piece = segment(u, v)
            if piece is None:
                continue
            paths[v] = paths[u] + piece
            if v == trg:
                return _certify_run(a, src, trg, paths[v])
            stack.append(v)
    if blocked:
        raise ResourceExceeded(
            f"{blocked} segment queries undecided; reachability still open"
        )
    return Verdict(
        UNREACHABLE,
        parts=tuple(refusals),
        note=f"no path in the pinned-configuration graph over {len(vertices)} vertices",
    )
