"""Cycle structure: pumpable states, canonical climbing cycles, chains.

A state is pumpable when it sits on a positive-effect cycle of length at
most the number of states (counter tests ignored, nonnegativity kept).
Each pumpable state gets one canonical such cycle: minimal drop, ties
broken by the lexicographically least transition-index tuple.  The
pumpable region collects configurations at pumpable states whose value
covers the canonical cycle's drop.

Iterating the canonical cycle from a value either climbs forever or gets
stuck on a test somewhere along the lap; the orbit segments are chains.
A value forbidden by the state's own test is quarantined as a singleton
chain flagged ``invalid_anchor``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ocareach.automaton import (
    OCA,
    Config,
    Path,
    path_effect_drop,
    path_states,
    restrict,
    scc_decompose,
)


@dataclass(frozen=True)
class CanonicalCycle:
    state: str
    path: Path
    effect: int
    drop: int


@dataclass(frozen=True)
class Chain:
    """One orbit segment of the canonical cycle at ``state``.

    Members are ``first, first + period, ...`` up to ``last`` inclusive;
    ``last is None`` means the chain climbs forever.
    """

    state: str
    period: int
    first: int
    last: int | None
    invalid_anchor: bool = False

    def contains_value(self, z: int) -> bool:
        if z < self.first or (z - self.first) % self.period:
            return False
        return self.last is None or z <= self.last

    def member_count(self) -> int | None:
        if self.last is None:
            return None
        return (self.last - self.first) // self.period + 1


def _max_value_layers(a: OCA, source: str, value: int, layers: int):
    """Best value per state for walks of exact length 1..layers, lazily."""
    vals = {source: value}
    for _ in range(layers):
        nxt: dict[str, int] = {}
        for state, v in vals.items():
            for i in a.out_edges[state]:
                t = a.transitions[i]
                v2 = v + t.update
                if v2 >= 0 and v2 > nxt.get(t.dst, -1):
                    nxt[t.dst] = v2
        yield nxt
        vals = nxt
        if not vals:
            return


def _short_positive_cycle_from(a: OCA, q: str, d: int) -> bool:
    """Is there a cycle at q, length <= |Q|, staying nonnegative from d,
    returning with a strictly higher value?"""
    for layer in _max_value_layers(a, q, d, len(a.states)):
        if layer.get(q, -1) > d:
            return True
    return False


def _completable(a: OCA, q: str, d: int, state: str, value: int, budget: int) -> bool:
    if state == q and value > d:
        return True
    for layer in _max_value_layers(a, state, value, budget):
        if layer.get(q, -1) > d:
            return True
    return False


def _lex_least_cycle(a: OCA, q: str, d: int) -> Path:
    """The canonical cycle at q for minimal drop d.

    Greedy: always take the smallest completable transition index, and
    stop the moment the walk is back at q with a gain (a proper prefix
    beats every extension in tuple order).
    """
    n = len(a.states)
    prefix: list[int] = []
    state, value = q, d
    while True:
        if prefix and state == q and value > d:
            return tuple(prefix)
        budget = n - len(prefix) - 1
        for i in a.out_edges[state]:
            t = a.transitions[i]
            v2 = value + t.update
            if v2 < 0:
                continue
            if _completable(a, q, d, t.dst, v2, budget):
                prefix.append(i)
                state, value = t.dst, v2
                break
        else:
            raise AssertionError("feasible climbing cycle vanished during reconstruction")


@lru_cache(maxsize=None)
def climbing_cycles(a: OCA) -> dict[str, CanonicalCycle]:
    """Canonical climbing cycle per pumpable state."""
    result: dict[str, CanonicalCycle] = {}
    cap = len(a.states) * a.max_update
    for q in a.states:
        if not _short_positive_cycle_from(a, q, cap):
            continue
        lo, hi = 0, cap
        while lo < hi:
            mid = (lo + hi) // 2
            if _short_positive_cycle_from(a, q, mid):
                hi = mid
            else:
                lo = mid + 1
        path = _lex_least_cycle(a, q, lo)
        effect, drop = path_effect_drop(a, path)
        assert effect > 0 and drop == lo, "canonical cycle disagrees with its search"
        result[q] = CanonicalCycle(q, path, effect, lo)
    return result


def in_pumpable_region(a: OCA, c: Config) -> bool:
    """Valid configuration at a pumpable state, at or above the cycle's drop."""
    cyc = climbing_cycles(a).get(c.state)
    return cyc is not None and c.value >= cyc.drop and a.is_valid(c)


class _ChainContext:
    """Pre-chewed data for orbit walks at one pumpable state."""

    def __init__(self, a: OCA, cyc: CanonicalCycle):
        self.a = a
        self.q = cyc.state
        self.period = cyc.effect
        self.drop = cyc.drop
        states = path_states(a, cyc.state, cyc.path)
        prefix = 0
        self.lap: list[tuple[str, int]] = []
        for i, st in zip(cyc.path, states[1:]):
            prefix += a.transitions[i].update
            self.lap.append((st, prefix))
        # Values where behavior differs from the high-value regime:
        # pulled-back test positions along the lap, plus the state's own
        # test value.
        exceptions: set[int] = set()
        eq_on_lap = False
        for st, eff in self.lap:
            g = a.guards[st]
            if g.kind == "ne":
                exceptions.add(g.value - eff)
            elif g.kind == "eq":
                eq_on_lap = True
                exceptions.add(g.value - eff)
        own = a.guards[self.q]
        if own.kind in ("ne", "eq"):
            exceptions.add(own.value)
        self.exceptions = {z for z in exceptions if z >= self.drop}
        # Beyond every exception: does a lap still pass every test, and
        # is the configuration itself still valid?
        self.generic_step = not eq_on_lap
        self.generic_member = own.kind != "eq"
        self.degenerate = not (self.generic_step and self.generic_member)

    def member_ok(self, z: int) -> bool:
        return self.a.is_valid(Config(self.q, z))

    def step_ok(self, z: int) -> bool:
        for st, eff in self.lap:
            if not self.a.guards[st].allows(z + eff):
                return False
        return True

    def residue_ceiling(self, z0: int) -> int:
        """Largest exception in z0's residue class (or below z0)."""
        cap = z0 - self.period
        for e in self.exceptions:
            if e >= z0 and (e - z0) % self.period == 0 and e > cap:
                cap = e
        return cap


@lru_cache(maxsize=None)
def _chain_context(a: OCA, q: str) -> _ChainContext | None:
    cyc = climbing_cycles(a).get(q)
    return _ChainContext(a, cyc) if cyc else None


def chain_enumeration_complete(a: OCA, q: str) -> bool:
    """False when every high value is stuck on an equality test, making
    the chain partition an infinite family of singletons."""
    ctx = _chain_context(a, q)
    return ctx is None or not ctx.degenerate


def chains_at(a: OCA, q: str) -> tuple[Chain, ...]:
    """Chains at q, sorted by first value.

    For states whose lap or own test is an equality, only chains up to
    one period past the last exceptional value are listed (everything
    beyond repeats the same stuck singleton pattern forever); see
    :func:`chain_enumeration_complete`.
    """
    ctx = _chain_context(a, q)
    if ctx is None:
        return ()
    chains: list[Chain] = []
    g = ctx.period
    for r in range(g):
        z0 = ctx.drop + r
        ceiling = ctx.residue_ceiling(z0)
        first: int | None = None
        z = z0
        while z <= ceiling + (g if ctx.degenerate else 0):
            if not ctx.member_ok(z):
                if first is not None:
                    chains.append(Chain(q, g, first, z - g))
                    first = None
                chains.append(Chain(q, g, z, z, invalid_anchor=True))
            else:
                if first is None:
                    first = z
                if not ctx.step_ok(z):
                    chains.append(Chain(q, g, first, z))
                    first = None
            z += g
        if not ctx.degenerate:
            chains.append(Chain(q, g, first if first is not None else z, None))
        elif first is not None:
            chains.append(Chain(q, g, first, z - g))
    chains.sort(key=lambda c: c.first)
    return tuple(chains)


def chain_of(a: OCA, c: Config) -> Chain | None:
    """The chain containing ``c`` (None outside the pumpable region).

    Unlike :func:`chains_at` this works at any value, including far
    beyond the exceptional window.
    """
    ctx = _chain_context(a, c.state)
    if ctx is None or c.value < ctx.drop:
        return None
    g = ctx.period
    z = c.value
    if not ctx.member_ok(z):
        return Chain(c.state, g, z, z, invalid_anchor=True)
    ceiling = ctx.residue_ceiling(ctx.drop + (z - ctx.drop) % g)
    if z > ceiling and not ctx.degenerate:
        first = ceiling + g if ceiling >= ctx.drop else ctx.drop + (z - ctx.drop) % g
        return Chain(c.state, g, first, None)
    first = z
    while (
        first - g >= ctx.drop
        and ctx.member_ok(first - g)
        and ctx.step_ok(first - g)
    ):
        first -= g
    last = z
    while ctx.step_ok(last) and ctx.member_ok(last + g):
        if last > ceiling and not ctx.degenerate:
            return Chain(c.state, g, first, None)
        last += g
    return Chain(c.state, g, first, last)


@lru_cache(maxsize=None)
def sure_unbounded_thresholds(a: OCA) -> dict[str, int]:
    """Per state: a value above which configurations certainly pump forever.

    Only cycles avoiding equality-test states count (an equality test
    would invalidate every high pass-through), which keeps the bound
    sound: at or above the threshold, the canonical cycle of the
    test-free restriction clears every remaining disequality, so its
    orbit never stops.
    """
    ne_states = frozenset(q for q in a.states if a.guards[q].kind != "eq")
    sub, _ = restrict(a, ne_states)
    out: dict[str, int] = {}
    for q in climbing_cycles(sub):
        ctx = _chain_context(sub, q)
        assert ctx is not None and not ctx.degenerate
        bound = max(ctx.exceptions) + 1 if ctx.exceptions else ctx.drop
        out[q] = max(ctx.drop, bound)
    return out


def definitely_unbounded(a: OCA, c: Config) -> bool:
    threshold = sure_unbounded_thresholds(a).get(c.state)
    return threshold is not None and c.value >= threshold and a.is_valid(c)


def structure_report(a: OCA) -> str:
    """Deterministic plain-text analysis report."""
    lines = [
        f"states: {len(a.states)}   transitions: {len(a.transitions)}",
        f"max update: {a.max_update}   max test: {a.max_test}",
        "sccs (topological):",
    ]
    for comp in scc_decompose(a):
        members = " ".join(sorted(comp, key=a.state_index.get))
        lines.append(f"  {{{members}}}")
    cycles = climbing_cycles(a)
    lines.append("pumpable states:")
    if not cycles:
        lines.append("  (none)")
    for q in a.states:
        if q in cycles:
            cyc = cycles[q]
            idx = " ".join(str(i) for i in cyc.path)
            lines.append(f"  {q}: cycle [{idx}]  effect +{cyc.effect}  drop {cyc.drop}")
    lines.append("chains:")
    for q in a.states:
        if q not in cycles:
            continue
        lines.append(f"  {q}  period {cycles[q].effect}:")
        for chain in chains_at(a, q):
            if chain.invalid_anchor:
                lines.append(f"    [{chain.first}]  forbidden anchor")
            elif chain.last is None:
                lines.append(f"    [{chain.first} ...]  unbounded")
            elif chain.first == chain.last:
                lines.append(f"    [{chain.first}]  bounded")
            else:
                lines.append(
                    f"    [{chain.first} .. {chain.last}]  bounded"
                    f" ({chain.member_count()} members)"
                )
        if not chain_enumeration_complete(a, q):
            lines.append("    ... every later value stuck on an equality test")
    return "\n".join(lines) + "\n"
