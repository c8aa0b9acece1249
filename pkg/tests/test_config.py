import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neurospike.config import (
    ConfigError,
    bundled_scenarios,
    parse_overrides,
    parse_scenario,
    scenario_from_text,
    scenario_to_text,
)
from neurospike.dynamics import Harmonic, SignTracker, VanDerPolSource
from neurospike.fixtures import random_linear_scenario

TINY = """
[scenario]
k = 2
alpha = 0.5
t_end = 1

[graph]
nodes = 2
edges = 1-2

[agent 1]
kind = sign_tracker
c = 1
x0 = 0

[agent 2]
kind = linear
A = -1
b = 0.5
x0 = 1
"""


def test_bundled_list():
    assert bundled_scenarios() == ["lienard4.cfg", "median5.cfg"]


def test_median5_contents():
    sc = parse_scenario("median5.cfg")
    assert sc.n_agents == 5 and sc.graph.directed and sc.graph.n_edges == 5
    assert [a.c for a in sc.agents] == [3.23, 3.07, 8.21, 2.87, 2.98]
    assert all(isinstance(a, SignTracker) for a in sc.agents)
    assert (sc.k, sc.alpha, sc.t_end) == (15.0, 0.15, 3.0)
    assert sc.delta == pytest.approx(0.01)
    assert sc.report_window == (2.0, 3.0)


def test_lienard4_contents():
    sc = parse_scenario("lienard4")
    assert sc.n_agents == 4 and not sc.graph.directed
    assert sorted(sc.graph.receivers(2)) == [1, 3, 4]
    assert isinstance(sc.agents[0], VanDerPolSource) and sc.agents[0].nu == 5.0
    assert [(a.a1, a.a2) for a in sc.agents[1:]] == [(1, 2), (0.2, 4), (2.8, 0.1)]
    assert all(isinstance(a, Harmonic) for a in sc.agents[1:])
    assert (sc.k, sc.alpha, sc.coupling_start) == (25.0, 0.075, 15.0)


def test_defaults_filled():
    sc = scenario_from_text(TINY)
    assert sc.mu == 0.0 and sc.dt == 1e-4 and sc.sample_period == sc.dt
    assert sc.zeno_guard == 64 and not sc.initial_potentials.any()


def test_parse_from_path(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    assert parse_scenario(path).name == "tiny"


@pytest.mark.parametrize("name", ["median5", "lienard4"])
def test_bundled_round_trip(name):
    sc = parse_scenario(name)
    text = scenario_to_text(sc)
    again = scenario_from_text(text)
    assert again == sc
    assert scenario_to_text(again) == text


@settings(max_examples=30)
@given(st.integers(0, 2**31))
def test_random_round_trip(seed):
    sc = random_linear_scenario(seed)
    again = scenario_from_text(scenario_to_text(sc))
    assert scenario_to_text(again) == scenario_to_text(sc)
    np.testing.assert_array_equal(again.initial_potentials, sc.initial_potentials)
    assert again.agents == sc.agents and again.graph == sc.graph


def test_disconnected_graph_rejected():
    text = TINY.replace("nodes = 2", "nodes = 3").replace("edges = 1-2", "edges = 1-2") + \
        "\n[agent 3]\nkind = sign_tracker\nc = 0\nx0 = 0\n"
    with pytest.raises(ConfigError, match="not connected"):
        scenario_from_text(text)


@pytest.mark.parametrize("old, new, msg", [
    ("k = 2", "k = 2\nbogus = 1", "unknown keys"),
    ("[graph]", "[extra]\n[graph]", "unknown section"),
    ("kind = linear", "kind = spiral", "kind"),
    ("x0 = 1", "x0 = 1 2", "expected 1 values"),
    ("k = 2", "k = two", "k"),
    ("edges = 1-2", "edges = 1-3", "out of range"),
    ("k = 2", "k = 2\ndelta = 0.3", "conflicts"),
    ("t_end = 1", "t_end = 1\ndt = 0.3", "multiple"),
])
def test_config_errors_name_the_field(old, new, msg):
    with pytest.raises(ConfigError, match=msg):
        scenario_from_text(TINY.replace(old, new, 1))


def test_delta_instead_of_k():
    sc = scenario_from_text(TINY.replace("k = 2", "delta = 0.1"))
    assert sc.k == pytest.approx(5.0)


def test_alpha_override_keeps_k():
    sc = parse_scenario("median5", {"alpha": "0.5"})
    assert sc.k == 15.0 and sc.delta == pytest.approx(1 / 30)


def test_delta_override_drops_k():
    sc = parse_scenario("median5", {"delta": "0.05"})
    assert sc.k == pytest.approx(3.0)


def test_override_parsing():
    assert parse_overrides(["k=20", " alpha = 0.5 "]) == {"k": "20", "alpha": "0.5"}
    with pytest.raises(ConfigError, match="unknown override key"):
        parse_overrides(["gain=3"])
    with pytest.raises(ConfigError, match="KEY=VALUE"):
        parse_overrides(["k"])


def test_unknown_bundled_name():
    with pytest.raises(ConfigError, match="no bundled scenario"):
        parse_scenario("nope")


def test_digest_tracks_overrides():
    base = parse_scenario("median5")
    assert parse_scenario("median5", {"k": "15"}).digest() == base.digest()
    assert parse_scenario("median5", {"k": "16"}).digest() != base.digest()
