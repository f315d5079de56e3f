import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secidx.model import INF, ModelError, StructuralModel, add_sensor, load_model, random_structure
from secidx.placement import (
    InfeasiblePlacement,
    PlacementInstance,
    brute_force_optimum,
    default_candidates,
    gain_protected,
    gain_unprotected,
    greedy_protected,
    greedy_unprotected,
    harmonic,
    load_request,
    x_set,
)
from secidx.robust_index import delta_r

from conftest import DATA


def model(name):
    return load_model(DATA / name)[0]


def disjoint(k=(1, 1)):
    return PlacementInstance(model("disjoint.json"), (0, 1), dict(enumerate(k)))


def shared(**kw):
    return PlacementInstance(model("shared.json"), (0, 1, 2), **kw)


def test_x_set_examples():
    assert x_set(model("example3.json"), 0).states == {0}
    assert x_set(model("example4.json"), 0).states == {0, 1}
    assert x_set(model("platoon.json"), 0).states == {0}
    assert x_set(model("platoon.json"), 1).label() == "{x2}"
    assert x_set(model("shared.json"), 0).states == {0, 1}
    assert x_set(model("shared.json"), 1).states == {1, 2}


def test_x_set_empty_when_every_state_is_taken():
    m = StructuralModel(2, (0, 1), (), (), frozenset({(1, 0), (0, 1)}))
    assert x_set(m, 0).states == {0}
    m = StructuralModel(1, (0,), (), (), frozenset())
    assert x_set(m, 0).states == {0}


def test_gain_examples():
    assert gain_unprotected(disjoint(), []) == 0
    assert gain_unprotected(disjoint(), [0]) == 1
    assert gain_unprotected(shared(k={0: 1, 1: 1}), [1]) == 2
    assert gain_unprotected(shared(k={0: 1, 1: 1}), [0, 1, 2]) == 2  # capped per actuator


def test_greedy_unprotected_examples():
    res = greedy_unprotected(disjoint())
    assert res.states == (0, 1) and res.certificate == 1.0
    assert brute_force_optimum(disjoint(), 7)[0] == 2
    res = greedy_unprotected(shared(k={0: 1, 1: 1}))
    assert res.states == (1,) and res.gain == 2
    assert brute_force_optimum(shared(k={0: 1, 1: 1}), 7)[0] == 1
    assert greedy_unprotected(disjoint((0, 0))).placement == ()


def test_infeasible_target():
    with pytest.raises(InfeasiblePlacement):
        greedy_unprotected(disjoint((2, 1)))
    with pytest.raises(InfeasiblePlacement):
        brute_force_optimum(disjoint((2, 1)), 7)


def test_greedy_protected_examples():
    assert greedy_protected(shared(u_p=(0, 1), k_max=1)) == ((1,), 2)
    assert brute_force_optimum(shared(u_p=(0, 1), k_max=1), 8)[0] == 2
    assert greedy_protected(shared(u_p=(0, 1), k_max=0)) == ((), 0)
    assert greedy_protected(shared(u_p=(), k_max=2)) == ((), 0)
    assert gain_protected(shared(u_p=(0, 1)), [0]) == 1


def test_instance_validation():
    with pytest.raises(ModelError):
        PlacementInstance(model("disjoint.json"), (5,), {0: 1})
    with pytest.raises(ModelError):
        PlacementInstance(model("disjoint.json"), (0,), {0: -1})
    with pytest.raises(ValueError):
        brute_force_optimum(disjoint(), 9)


def test_harmonic():
    assert harmonic(0) == 0 and harmonic(1) == 1 and harmonic(3) == pytest.approx(11 / 6)


def test_default_candidates():
    assert default_candidates(model("shared.json")) == (0, 1, 2)
    assert x_set(model("example3.json"), 1).states == {1, 2}
    assert default_candidates(model("example3.json")) == (0, 1, 2)


def test_load_request(tmp_path):
    inst, protected = load_request(DATA / "shared_protected_request.json", model("shared.json"))
    assert protected and inst.k_max == 1 and inst.u_p == (0, 1)
    inst, protected = load_request(DATA / "disjoint_request.json", model("disjoint.json"))
    assert not protected and inst.k == {0: 1, 1: 1}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"k": {"0": 1}, "budget": 3}))
    with pytest.raises(ModelError):
        load_request(bad, model("disjoint.json"))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 5), st.booleans())
def test_x_sets_unchanged_by_sensors(seed, state, protected):
    m = random_structure(seed)
    m2 = add_sensor(m, state % m.n_x, protected)
    assert [x_set(m, i) for i in range(m.n_u)] == [x_set(m2, i) for i in range(m.n_u)]


def test_placement_raises_robust_indices():
    checked = 0
    for seed in range(200):
        m = random_structure(seed)
        k = {i: 1 + seed % 2 for i in range(m.n_u)}
        inst = PlacementInstance(m, default_candidates(m) * 2, k)
        try:
            res = greedy_unprotected(inst)
        except InfeasiblePlacement:
            continue
        placed = m
        for s in res.states:
            placed = add_sensor(placed, s)
        for i in range(m.n_u):
            before, after = delta_r(m, i).value, delta_r(placed, i).value
            if before is INF:
                assert after is INF
            else:
                assert after >= before + k[i]
        checked += 1
    assert checked >= 100
