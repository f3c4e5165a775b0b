"""Brute-force semantics: bounded exploration and exact candidate reachability.

Everything here is explicit-state.  :func:`post_star` runs a budgeted
breadth-first closure and keeps a parent map so witnesses can be read
back; :func:`reach_oracle` layers escalating budgets (forward, then
backward on the reversed automaton) on top of it and never answers
unless the answer is certain.  :func:`candidate_reach` decides
reachability under integer semantics (counter may go negative, tests
are ignored) exactly, by decomposing walks into a simple path plus
attached simple cycles.
"""

from __future__ import annotations

import heapq
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .analysis import climbing_cycles, definitely_unbounded
from .automaton import (
    OCA,
    Config,
    Path,
    apply_path,
    restrict,
    reverse,
    scc_of,
)
from .flows import Flow, path_from_flow


class ResourceExceeded(Exception):
    """A query needed more nodes or value range than its budget allows."""


@dataclass(frozen=True)
class ExplorationBudget:
    """Hard limits for one exploration: counter value, run length, node count."""

    value_cap: int
    length_cap: int
    node_cap: int

    def __post_init__(self) -> None:
        if self.value_cap <= 0 or self.length_cap <= 0 or self.node_cap <= 0:
            raise ValueError("budget caps must be positive")


def default_budget(a: OCA, *values: int, scale: int = 1) -> ExplorationBudget:
    """Budget that is decisive for desk-sized instances around ``values``."""
    base = a.max_test + sum(v for v in values if v > 0)
    base += (len(a.states) + 2) * (a.max_update + 1)
    return ExplorationBudget(
        value_cap=base * scale,
        length_cap=500_000,
        node_cap=500_000,
    )


@dataclass
class PostStarResult:
    configs: set[Config]
    parents: dict[Config, tuple[Config, int] | None]
    cap_hit: bool

    def run_to(self, c: Config) -> Path:
        """Transition indices of a shortest discovered run ending at ``c``."""
        if c not in self.parents:
            raise KeyError(f"{c} was not discovered")
        rev: list[int] = []
        link = self.parents[c]
        while link is not None:
            prev, i = link
            rev.append(i)
            link = self.parents[prev]
        return tuple(reversed(rev))


def post_star(a, start, budget, restrict=None, stop_at=None) -> PostStarResult:
    """Budgeted forward closure of ``start`` under valid steps.

    ``restrict`` filters which configurations may be traversed at all,
    start configurations included.  ``cap_hit`` is set when the value or
    length cap cut anything off; only then may the result be a strict
    subset of the true closure.  Exceeding ``node_cap`` raises
    :class:`ResourceExceeded` instead of returning something wrong.
    ``stop_at`` ends the search early once that configuration is found
    (the level in progress is finished first, keeping runs shortest).
    """
    order = a.state_index
    roots = sorted(set(start), key=lambda c: (order[c.state], c.value))
    for c in roots:
        if not a.is_valid(c):
            raise ValueError(f"start configuration {c} is not valid")
    parents: dict[Config, tuple[Config, int] | None] = {}
    frontier: list[Config] = []
    cap_hit = False
    for c in roots:
        if restrict is not None and not restrict(c):
            continue
        if c.value > budget.value_cap:
            cap_hit = True
            continue
        if c not in parents:
            parents[c] = None
            frontier.append(c)
    depth = 0
    while frontier:
        if stop_at is not None and stop_at in parents:
            break
        if depth >= budget.length_cap:
            cap_hit = True
            break
        nxt: list[Config] = []
        for c in frontier:
            for i in a.out_edges[c.state]:
                t = a.transitions[i]
                d = Config(t.dst, c.value + t.update)
                if d in parents or not a.is_valid(d):
                    continue
                if restrict is not None and not restrict(d):
                    continue
                if d.value > budget.value_cap:
                    cap_hit = True
                    continue
                if len(parents) >= budget.node_cap:
                    raise ResourceExceeded(
                        f"post_star exceeded {budget.node_cap} configurations"
                    )
                parents[d] = (c, i)
                nxt.append(d)
        nxt.sort(key=lambda c: (order[c.state], c.value))
        frontier = nxt
        depth += 1
    return PostStarResult(set(parents), parents, cap_hit)


def reach_oracle(a: OCA, src: Config, trg: Config, budget=None) -> Path | None:
    """Decide src ->* trg by exploration; never guesses.

    Returns a replayable run, or None when unreachability is certain
    (candidate reachability already fails, or a closure completed
    without hitting its cap).  Raises :class:`ResourceExceeded` when
    every budget rung was cut off undecided.
    """
    for c in (src, trg):
        if not a.is_valid(c):
            raise ValueError(f"configuration {c} is not valid")
    if candidate_reach(a, src, trg) is None:
        return None
    if budget is not None:
        rungs = [budget]
    else:
        rungs = [default_budget(a, src.value, trg.value, scale=4**k) for k in range(4)]
    rev = reverse(a)
    for rung in rungs:
        try:
            res = post_star(a, [src], rung, stop_at=trg)
        except ResourceExceeded:
            break
        if trg in res.configs:
            return res.run_to(trg)
        if not res.cap_hit:
            return None
        try:
            back = post_star(rev, [trg], rung, stop_at=src)
        except ResourceExceeded:
            break
        if src in back.configs:
            run = tuple(reversed(back.run_to(src)))
            assert apply_path(a, src, run)[-1] == trg
            return run
        if not back.cap_hit:
            return None
    raise ResourceExceeded(f"reach_oracle undecided for {src} -> {trg}")


# --------------------------------------------------------------- boundedness


def _bounded_probe(a: OCA, c: Config, value_cap: int, node_cap: int):
    """True = closure closed, False = unbounded chain reached, None = cap."""
    seen = {c}
    queue = deque([c])
    cap_hit = False
    while queue:
        cur = queue.popleft()
        if definitely_unbounded(a, cur):
            return False
        for i in a.out_edges[cur.state]:
            t = a.transitions[i]
            d = Config(t.dst, cur.value + t.update)
            if d in seen or not a.is_valid(d):
                continue
            if d.value > value_cap:
                cap_hit = True
                continue
            if len(seen) >= node_cap:
                raise ResourceExceeded(
                    f"boundedness probe exceeded {node_cap} configurations"
                )
            seen.add(d)
            queue.append(d)
    return None if cap_hit else True


@lru_cache(maxsize=None)
def is_bounded(a: OCA, c: Config) -> bool:
    """Is the set of configurations reachable from ``c`` finite?

    Explores under an escalating value cap.  A closure that completes
    proves bounded; touching a value known to sit in an endless chain
    (see :func:`ocareach.analysis.definitely_unbounded`) proves
    unbounded, which keeps escalation short on unbounded inputs.
    """
    if not a.is_valid(c):
        raise ValueError(f"configuration {c} is not valid")
    cap = a.max_test + c.value + (len(a.states) + 2) * (a.max_update + 1)
    for _ in range(12):
        verdict = _bounded_probe(a, c, cap, 2_000_000)
        if verdict is not None:
            return verdict
        cap *= 2
    raise ResourceExceeded(f"boundedness of {c} undecided at value cap {cap}")


@lru_cache(maxsize=None)
def is_locally_bounded(a: OCA, c: Config) -> bool:
    """is_bounded inside the sub-automaton of c's strongly connected component."""
    comp = scc_of(a)[c.state]
    sub, _ = restrict(a, frozenset(comp))
    if not sub.has_equality_tests():
        # High above every disequality test the component is a free
        # counter machine: bounded exactly when it has no climbing cycle.
        threshold = sub.max_test + (2 * len(sub.states) + 2) * (sub.max_update + 1)
        if c.value >= threshold:
            return not climbing_cycles(sub)
    return is_bounded(sub, c)


# ------------------------------------------------------ candidate semantics


def _walk_states(a: OCA, u: str, v: str) -> frozenset[str]:
    fwd = {u}
    stack = [u]
    while stack:
        for i in a.out_edges[stack.pop()]:
            d = a.transitions[i].dst
            if d not in fwd:
                fwd.add(d)
                stack.append(d)
    bwd = {v}
    stack = [v]
    while stack:
        for i in a.in_edges[stack.pop()]:
            s = a.transitions[i].src
            if s not in bwd:
                bwd.add(s)
                stack.append(s)
    return frozenset(fwd & bwd)


_ENUM_CAP = 500_000


def _simple_paths(a: OCA, u: str, v: str, rel: frozenset[str]):
    """One exemplar per (state set, effect) class of simple paths u -> v."""
    if u == v:
        return {(frozenset([u]), 0): ()}
    out: dict[tuple[frozenset[str], int], Path] = {}
    steps = 0

    def walk(state: str, visited: set[str], acc: list[int], eff: int) -> None:
        nonlocal steps
        for i in a.out_edges[state]:
            t = a.transitions[i]
            if t.dst not in rel or t.dst in visited:
                continue
            steps += 1
            if steps > _ENUM_CAP:
                raise ResourceExceeded("too many simple paths to enumerate")
            acc.append(i)
            if t.dst == v:
                key = (frozenset(visited | {v}), eff + t.update)
                out.setdefault(key, tuple(acc))
            else:
                visited.add(t.dst)
                walk(t.dst, visited, acc, eff + t.update)
                visited.discard(t.dst)
            acc.pop()

    walk(u, {u}, [], 0)
    return out


def _simple_cycles(a: OCA, rel: frozenset[str]):
    """One exemplar per (state set, effect) class of simple cycles in rel."""
    order = a.state_index
    out: dict[tuple[frozenset[str], int], Path] = {}
    steps = 0

    def walk(pivot: str, state: str, visited: set[str], acc: list[int], eff: int):
        nonlocal steps
        for i in a.out_edges[state]:
            t = a.transitions[i]
            if t.dst not in rel or order[t.dst] < order[pivot]:
                continue
            if t.dst in visited and t.dst != pivot:
                continue
            steps += 1
            if steps > _ENUM_CAP:
                raise ResourceExceeded("too many simple cycles to enumerate")
            acc.append(i)
            if t.dst == pivot:
                key = (frozenset(visited), eff + t.update)
                out.setdefault(key, tuple(acc))
            else:
                visited.add(t.dst)
                walk(pivot, t.dst, visited, acc, eff + t.update)
                visited.discard(t.dst)
            acc.pop()

    for pivot in sorted(rel, key=order.get):
        walk(pivot, pivot, {pivot}, [], 0)
    return out


def _ordkey(a: OCA, states: frozenset[str]) -> tuple[int, ...]:
    return tuple(sorted(a.state_index[s] for s in states))


@lru_cache(maxsize=None)
def _candidate_tables(a: OCA, u: str, v: str):
    """Skeleton table for candidate queries between two states.

    Every walk u -> v is a simple path plus simple cycles whose supports
    hang together.  Entries are (support, base effect) pairs reachable
    by a path class plus cycle classes that each widened the support;
    cycles lying inside the support may then repeat freely.  Each entry
    carries exemplars to materialize an actual path, plus the free
    cycle effects available inside its support.
    """
    rel = _walk_states(a, u, v)
    if u not in rel or v not in rel:
        return ()
    paths = _simple_paths(a, u, v, rel)
    cycles = _simple_cycles(a, rel)
    cycle_items = sorted(
        cycles.items(), key=lambda kv: (_ordkey(a, kv[0][0]), kv[0][1])
    )
    table: dict[tuple[frozenset[str], int], tuple[Path, tuple[Path, ...]]] = {}
    queue: deque[tuple[frozenset[str], int]] = deque()
    for (t0, b0), exemplar in sorted(
        paths.items(), key=lambda kv: (_ordkey(a, kv[0][0]), kv[0][1])
    ):
        if (t0, b0) not in table:
            table[(t0, b0)] = (exemplar, ())
            queue.append((t0, b0))
    while queue:
        key = queue.popleft()
        support, base = key
        path_ex, cycle_exs = table[key]
        for (states, eff), exemplar in cycle_items:
            if states <= support or not (states & support):
                continue
            grown = (support | states, base + eff)
            if grown not in table:
                table[grown] = (path_ex, cycle_exs + (exemplar,))
                queue.append(grown)
    free: dict[frozenset[str], tuple[tuple[int, ...], dict[int, Path]]] = {}
    entries = []
    for (support, base), (path_ex, cycle_exs) in table.items():
        if support not in free:
            by_effect: dict[int, Path] = {}
            for (states, eff), exemplar in cycle_items:
                if eff != 0 and states <= support:
                    by_effect.setdefault(eff, exemplar)
            free[support] = (tuple(sorted(by_effect)), by_effect)
        effects, by_effect = free[support]
        entries.append((support, base, path_ex, cycle_exs, effects, by_effect))
    return tuple(entries)


def _ext_gcd(x: int, y: int) -> tuple[int, int, int]:
    if y == 0:
        return x, 1, 0
    d, p, q = _ext_gcd(y, x % y)
    return d, q, p - (x // y) * q


def _ceil_div(x: int, y: int) -> int:
    return -(-x // y)


def _mixed_coeffs(effs: list[int], r: int) -> dict[int, int]:
    d = abs(effs[0])
    coeff = {effs[0]: 1 if effs[0] > 0 else -1}
    for e in effs[1:]:
        d2, x, y = _ext_gcd(d, abs(e))
        coeff = {f: c * x for f, c in coeff.items()}
        coeff[e] = coeff.get(e, 0) + (y if e > 0 else -y)
        d = d2
    scale = r // d
    k = {e: c * scale for e, c in coeff.items()}
    p = min(e for e in effs if e > 0)
    n = max(e for e in effs if e < 0)
    # Opposite-sign pairs admit all-positive zero combinations, so any
    # negative coefficient can be bought off without touching the sum.
    for e in sorted(k):
        if k[e] >= 0 or e in (p, n):
            continue
        if e > 0:
            d2 = gcd(e, -n)
            t = _ceil_div(-k[e], -n // d2)
            k[e] += t * (-n // d2)
            k[n] = k.get(n, 0) + t * (e // d2)
        else:
            d2 = gcd(-e, p)
            t = _ceil_div(-k[e], p // d2)
            k[e] += t * (p // d2)
            k[p] = k.get(p, 0) + t * (-e // d2)
    d2 = gcd(p, -n)
    cp, cn = -n // d2, p // d2
    t = max(0, _ceil_div(-k.get(p, 0), cp), _ceil_div(-k.get(n, 0), cn))
    k[p] = k.get(p, 0) + t * cp
    k[n] = k.get(n, 0) + t * cn
    assert all(c >= 0 for c in k.values())
    assert sum(e * c for e, c in k.items()) == r
    return {e: c for e, c in k.items() if c > 0}


def _positive_coeffs(pos: list[int], r: int, g: int) -> dict[int, int] | None:
    coins = sorted(e // g for e in pos)
    goal = r // g
    a0, top = coins[0], coins[-1]
    if goal < a0 * top:
        parent: list[int | None] = [None] * (goal + 1)
        reach = [False] * (goal + 1)
        reach[0] = True
        for s in range(1, goal + 1):
            for coin in coins:
                if coin <= s and reach[s - coin]:
                    reach[s] = True
                    parent[s] = coin
                    break
        if not reach[goal]:
            return None
        out: Counter[int] = Counter()
        s = goal
        while s:
            coin = parent[s]
            out[coin * g] += 1
            s -= coin
        return dict(out)
    # Large goals: walk residues mod the smallest coin for the cheapest
    # representative of each class, then pad with that coin.
    dist = {0: 0}
    parent_coin: dict[int, int] = {}
    heap = [(0, 0)]
    while heap:
        cost, res = heapq.heappop(heap)
        if cost > dist.get(res, cost):
            continue
        for coin in coins[1:]:
            nres, ncost = (res + coin) % a0, cost + coin
            if ncost < dist.get(nres, ncost + 1):
                dist[nres] = ncost
                parent_coin[nres] = coin
                heapq.heappush(heap, (ncost, nres))
    res = goal % a0
    if res not in dist or dist[res] > goal:
        return None
    out = Counter()
    while res:
        coin = parent_coin[res]
        out[coin * g] += 1
        res = (res - coin) % a0
    used = sum(coin * mult for coin, mult in out.items()) // g
    out[a0 * g] += (goal - used) // a0
    return {e: c for e, c in out.items() if c > 0}


def _semigroup_member(effects, r: int) -> dict[int, int] | None:
    """Nonnegative coefficients with sum(k_e * e) = r, or None."""
    effs = sorted({e for e in effects if e != 0})
    if r == 0:
        return {}
    if not effs:
        return None
    g = 0
    for e in effs:
        g = gcd(g, e)
    if r % g:
        return None
    pos = [e for e in effs if e > 0]
    neg = [e for e in effs if e < 0]
    if pos and neg:
        return _mixed_coeffs(effs, r)
    if pos:
        return _positive_coeffs(pos, r, g) if r > 0 else None
    if r > 0:
        return None
    flipped = _positive_coeffs([-e for e in neg], -r, g)
    if flipped is None:
        return None
    return {-e: c for e, c in flipped.items()}


def candidate_reach(a: OCA, src: Config, trg: Config) -> Path | None:
    """Exact reachability when the counter ranges over all integers.

    Tests and nonnegativity are ignored; only the additive structure
    matters.  Returns a path with effect trg.value - src.value, found
    by searching (support, base effect) skeletons and then solving for
    free cycle repetitions, or None when no such path exists.
    """
    target = trg.value - src.value
    for entry in _candidate_tables(a, src.state, trg.state):
        _, base, path_ex, cycle_exs, effects, by_effect = entry
        coeffs = _semigroup_member(effects, target - base)
        if coeffs is None:
            continue
        counts: Counter[int] = Counter(path_ex)
        for exemplar in cycle_exs:
            counts.update(exemplar)
        for eff, mult in coeffs.items():
            for i, m in Counter(by_effect[eff]).items():
                counts[i] += m * mult
        flow = Flow.make(counts, src.state, trg.state)
        path = path_from_flow(a, flow)
        assert apply_path(a, src, path, mode="candidate")[-1] == trg
        return path
    return None
