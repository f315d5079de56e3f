import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secidx.model import (
    INF,
    ComponentSet,
    ModelError,
    ParseError,
    Realization,
    StructuralModel,
    add_actuator,
    add_sensor,
    dumps_model,
    load_model,
    model_from_dict,
    random_realization,
    random_structure,
    remove_actuator,
    remove_sensor,
    u,
    value_to_json,
    y,
)
from secidx.robust_index import delta_r

from conftest import DATA

MODEL_FILES = ["example1.json", "example1_modified.json", "example3.json", "example4.json",
               "platoon.json", "ieee14.json", "disjoint.json", "shared.json"]


def ex4():
    return StructuralModel(2, (0,), (1,), (False,), frozenset({(1, 0), (1, 1)}))


def test_infinity_orders_above_integers():
    assert INF > 10**9 and not INF < 3
    assert 3 < INF and INF >= INF
    assert INF + 1 is INF
    assert str(INF) == "inf" and value_to_json(INF) == "inf" and value_to_json(4) == 4


def test_component_names():
    assert str(u(0)) == "u1" and str(y(2)) == "y3"
    cs = ComponentSet.of([u(1), y(0), u(0)])
    assert cs.label() == "{u1,u2,y1}"
    assert cs.columns(3) == [0, 1, 3]
    assert len(cs) == 3 and u(1) in cs and y(1) not in cs


@given(st.sets(st.integers(0, 7)), st.integers(0, 4))
def test_columns_round_trip(cols, n_u):
    cs = ComponentSet.from_columns(cols, n_u)
    assert cs.columns(n_u) == sorted(cols)


def test_example1_fixture():
    m, r = load_model(DATA / "example1.json")
    assert (m.n_x, m.n_u, m.c_target, m.protected) == (2, 1, (1,), (True,))
    np.testing.assert_array_equal(r.a, [[0.1, 0.0], [0.01, 0.1]])
    np.testing.assert_array_equal(r.b, [[1.0], [0.0]])
    np.testing.assert_array_equal(r.c, [[0.0, 1.0]])
    assert r.n_y == 0


def test_platoon_fixture():
    _, r = load_model(DATA / "platoon.json")
    np.testing.assert_array_equal(r.a, [[0.8, 0.1], [0.1, 0.8]])
    np.testing.assert_array_equal(r.b, np.eye(2))
    np.testing.assert_array_equal(r.c, [[0.0, 1.0]])


def test_duplicate_actuator_target_rejected(tmp_path):
    data = {"n_x": 2, "actuators": [{"target": 0}, {"target": 0}], "sensors": [], "a_pattern": []}
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ModelError, match="B not full column rank"):
        load_model(path)


def test_protected_sensors_must_come_last():
    with pytest.raises(ModelError):
        StructuralModel(2, (0,), (0, 1), (True, False))


@pytest.mark.parametrize("bad", [
    {"n_x": 2, "actuators": [], "a_pattern": [], "extra": 1},
    {"n_x": 2, "actuators": [{"target": 5}], "a_pattern": []},
    {"n_x": 2, "actuators": [{"target": 0}], "a_pattern": [[0, 9]]},
    {"n_x": 2, "actuators": [{"target": 0}], "a_pattern": [],
     "realization": {"a": [[1, 0], [0, 0]], "b": [[1], [0]], "c": []}},
])
def test_schema_violations(bad):
    with pytest.raises(ModelError):
        model_from_dict(bad)


def test_invalid_json_is_a_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_model(path)


@pytest.mark.parametrize("name", MODEL_FILES)
def test_canonical_files_round_trip(name):
    text = (DATA / name).read_text()
    assert dumps_model(*load_model(DATA / name)) == text


def test_random_realization_example4_seed7():
    r = random_realization(ex4(), 7)
    assert r.a[1, 0] != 0 and r.a[1, 1] != 0
    assert r.a[0, 0] == 0 and r.a[0, 1] == 0


def test_random_realization_deterministic():
    m = random_structure(3)
    r1, r2 = random_realization(m, 11), random_realization(m, 11)
    for attr in "abc":
        np.testing.assert_array_equal(getattr(r1, attr), getattr(r2, attr))


def test_random_realization_follows_pattern():
    m, _ = load_model(DATA / "example1.json")
    mask = m.a_matrix() == 1
    for seed in range(1000):
        r = random_realization(m, seed)
        assert np.all((r.a != 0) == mask)
        assert np.all(np.abs(r.a[mask]) >= 0.05) and np.all(np.abs(r.a) <= 1)
        assert abs(r.b[0, 0]) >= 0.05


@pytest.mark.parametrize("name", ["example3.json", "example4.json", "platoon.json", "ieee14.json"])
def test_random_realizations_are_valid(name):
    m, _ = load_model(DATA / name)
    for seed in range(1000):
        r = random_realization(m, seed)
        assert np.linalg.matrix_rank(r.b) == m.n_u
        assert r.pattern().a_pattern <= m.a_pattern


def test_spectral_radius_cap():
    m = StructuralModel(3, (0,), (2,), (False,), frozenset({(0, 0), (1, 0), (2, 1), (1, 1), (0, 2)}))
    for seed in range(50):
        r = random_realization(m, seed, max_spectral_radius=0.9)
        assert max(abs(np.linalg.eigvals(r.a))) <= 0.9 + 1e-12


def test_add_sensor():
    m, _ = load_model(DATA / "example3.json")
    m2 = add_sensor(m, 0)
    assert m2.n_y == 2 and m.n_y == 1
    assert remove_sensor(m2, 1) == m
    m3 = add_sensor(m, 0, protected=True)
    assert m3.n_e == 2
    assert delta_r(m3, 0).value is INF


def test_add_actuator():
    m = ex4()
    m2 = add_actuator(m, 1)
    assert m2.n_u == 2 and m.n_u == 1
    assert remove_actuator(m2, 1) == m
    with pytest.raises(ModelError, match="B not full column rank"):
        add_actuator(m2, 0)
    assert delta_r(m2, 0).value <= delta_r(m, 0).value


def test_realization_rejects_rank_deficient_b():
    with pytest.raises(ModelError):
        Realization(np.zeros((2, 2)), np.array([[1.0, 1.0], [0.0, 0.0]]), np.zeros((0, 2)))


def test_attack_matrices():
    _, r = load_model(DATA / "platoon.json")
    np.testing.assert_array_equal(r.b_attack(), [[1, 0, 0], [0, 1, 0]])
    np.testing.assert_array_equal(r.d_attack(), [[0, 0, 1]])
