from __future__ import annotations

import itertools
import random

import pytest

from ocareach.automaton import format_oca
from ocareach.exploration import reach_oracle
from ocareach.generators import FuzzSpec, gen_subset_sum, instances, random_instance


def test_identical_specs_generate_identical_instances():
    spec = FuzzSpec(count=10, seed=99, equality_fraction=0.25)
    for index in range(spec.count):
        a1, s1, t1 = random_instance(spec, index)
        a2, s2, t2 = random_instance(spec, index)
        assert format_oca(a1) == format_oca(a2)
        assert (s1, t1) == (s2, t2)


def test_instances_are_well_formed():
    spec = FuzzSpec(num_states=5, max_update=4, max_guard=12, count=60, seed=5)
    produced = list(instances(spec))
    assert [i for i, _ in produced] == list(range(60))
    for _, (a, src, trg) in produced:
        assert len(a.states) == 5
        assert a.is_valid(src) and a.is_valid(trg)
        assert all(abs(t.update) <= 4 for t in a.transitions)
        tested = [g for g in a.guards.values() if g.kind != "true"]
        assert all(0 <= g.value <= 12 for g in tested)


def test_equality_fraction_controls_guard_kinds():
    def tested_kinds(spec):
        return {
            g.kind
            for _, (a, _, _) in instances(spec)
            for g in a.guards.values()
            if g.kind != "true"
        }

    assert tested_kinds(FuzzSpec(count=40, seed=7, equality_fraction=0.0)) == {"ne"}
    assert tested_kinds(FuzzSpec(count=40, seed=7, equality_fraction=0.5)) == {"ne", "eq"}


def test_guards_sit_near_visited_values():
    # with full density nearly every instance should carry at least one
    # guard that an actual run can trip over; uniform draws would not
    spec = FuzzSpec(guard_density=1.0, count=50, seed=21)
    guarded = sum(
        1
        for _, (a, _, _) in instances(spec)
        if any(g.kind != "true" for g in a.guards.values())
    )
    assert guarded == 50


def test_spec_validation():
    for bad in (
        dict(num_states=0),
        dict(max_update=0),
        dict(guard_density=1.5),
        dict(equality_fraction=-0.1),
        dict(count=-1),
    ):
        with pytest.raises(ValueError):
            FuzzSpec(**bad)


# ---------------------------------------------------------------- subset sum


def subset_sums(values: tuple[int, ...], target: int) -> bool:
    return any(
        sum(pick) == target
        for r in range(len(values) + 1)
        for pick in itertools.combinations(values, r)
    )


def test_subset_sum_gadget_shape():
    a, src, trg = gen_subset_sum((2, 3), 5)
    assert len(a.states) == 3 * 2 + 2
    assert len(a.transitions) == 4 * 2 + 1
    assert all(g.kind == "true" for g in a.guards.values())
    assert (src.value, trg.value) == (0, 0)


def test_subset_sum_goldens():
    a, src, trg = gen_subset_sum((2, 3), 5)
    assert reach_oracle(a, src, trg) is not None
    a, src, trg = gen_subset_sum((2, 4), 5)
    assert reach_oracle(a, src, trg) is None
    a, src, trg = gen_subset_sum((7, 1, 3), 0)  # empty subset
    run = reach_oracle(a, src, trg)
    assert run is not None and len(run) == 2 * 3 + 1


def test_subset_sum_rejects_negatives():
    with pytest.raises(ValueError):
        gen_subset_sum((2, -1), 3)
    with pytest.raises(ValueError):
        gen_subset_sum((2, 1), -3)


def test_subset_sum_matches_enumeration():
    rng = random.Random(123)
    for _ in range(60):
        values = tuple(rng.randint(0, 8) for _ in range(rng.randint(1, 5)))
        target = rng.randint(0, 12)
        a, src, trg = gen_subset_sum(values, target)
        assert (reach_oracle(a, src, trg) is not None) == subset_sums(values, target)
