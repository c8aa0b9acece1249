import numpy as np
import pytest
from hypothesis import given, strategies as st

from neurospike.dynamics import (
    BlendedField,
    Harmonic,
    LinearAffine,
    SignTracker,
    VanDerPolSource,
    blended_eval,
    eval_field,
    eval_field_batch,
    lipschitz_probe,
    pack_agents,
)

MEDIAN_C = (3.23, 3.07, 8.21, 2.87, 2.98)
LIENARD = (VanDerPolSource(5.0), Harmonic(1, 2), Harmonic(0.2, 4), Harmonic(2.8, 0.1))


def test_eval_examples():
    assert eval_field(SignTracker(3.23), 0.0, 2.0).tolist() == [1.0]
    assert eval_field(VanDerPolSource(5), 0.0, [1, 7]).tolist() == [0.0, 0.0]
    assert eval_field(Harmonic(1, 2), 0.0, [1, 1]).tolist() == [1.0, -2.0]


def test_sign_of_zero_is_zero():
    assert eval_field(SignTracker(1.5), 0.0, 1.5).tolist() == [0.0]


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_field(Harmonic(1, 1), 0.0, [1.0])


@given(st.integers(0, 2**31))
def test_batch_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    specs = [SignTracker(rng.normal()), Harmonic(*rng.uniform(0.1, 3, 2)), VanDerPolSource(rng.uniform(1, 6)),
             LinearAffine.from_arrays(rng.normal(size=(3, 3)), rng.normal(size=3))]
    for spec in specs:
        X = rng.normal(size=(7, spec.state_dim))
        batch = eval_field_batch(spec, 0.0, X)
        for row, x in zip(batch, X):
            np.testing.assert_allclose(row, eval_field(spec, 0.0, x), rtol=1e-14, atol=1e-14)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_lienard_blend_formula(s1, s2):
    got = blended_eval(BlendedField(LIENARD), 0.0, [s1, s2])
    expect = [s2, 1.25 * (1 - s1 ** 2) * s2 - 1.525 * s1]
    np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-12)


def test_lienard_blend_second_component_at_one_one():
    assert blended_eval(BlendedField(LIENARD), 0.0, [1.0, 1.0])[1] == -1.525


def test_median_blend_below_all_references_is_one():
    bf = BlendedField(tuple(SignTracker(c) for c in MEDIAN_C))
    assert blended_eval(bf, 0.0, [1.0]).tolist() == [1.0]


def test_median_blend_unique_zero():
    bf = BlendedField(tuple(SignTracker(c) for c in MEDIAN_C))
    grid = np.union1d(np.linspace(0.0, 10.0, 20001), MEDIAN_C)
    values = np.array([blended_eval(bf, 0.0, [s])[0] for s in grid])
    assert grid[values == 0.0].tolist() == [3.07]
    assert (values[grid < 3.07] > 0).all() and (values[grid > 3.07] < 0).all()


@given(st.integers(0, 2**31), st.integers(1, 5), st.integers(1, 5))
def test_blend_is_weighted_average_of_sub_blends(seed, n1, n2):
    rng = np.random.default_rng(seed)
    specs = [LinearAffine.from_arrays(rng.normal(size=(2, 2)), rng.normal(size=2)) for _ in range(n1 + n2)]
    s = rng.normal(size=2)
    whole = blended_eval(BlendedField(tuple(specs)), 0.0, s)
    parts = (n1 * blended_eval(BlendedField(tuple(specs[:n1])), 0.0, s)
             + n2 * blended_eval(BlendedField(tuple(specs[n1:])), 0.0, s)) / (n1 + n2)
    np.testing.assert_allclose(whole, parts, rtol=1e-12, atol=1e-12)


def test_identical_agents_blend_to_their_field():
    spec = Harmonic(0.7, 1.9)
    bf = BlendedField((spec,) * 4)
    for s in ([0.3, -1.2], [2.0, 0.5]):
        np.testing.assert_allclose(blended_eval(bf, 0.0, s), eval_field(spec, 0.0, s), rtol=1e-15)


def test_blend_rejects_mixed_dimensions():
    with pytest.raises(ValueError):
        BlendedField((SignTracker(1.0), Harmonic(1, 1)))
    with pytest.raises(ValueError):
        BlendedField(())


@given(st.integers(0, 2**31))
def test_lipschitz_probe_approaches_matrix_norm(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2))
    spec = LinearAffine.from_arrays(A, rng.normal(size=2))
    norm = np.linalg.norm(A, 2)
    box = ([-1, -1], [1, 1])
    coarse = lipschitz_probe(spec, box, samples=20, seed=seed)
    fine = lipschitz_probe(spec, box, samples=20000, seed=seed)
    assert coarse <= norm * (1 + 1e-12) and fine <= norm * (1 + 1e-12)
    assert fine >= norm * (1 - 1e-3)


def test_lipschitz_probe_constant_field():
    spec = LinearAffine.from_arrays(np.zeros((2, 2)), [1.0, -2.0])
    assert lipschitz_probe(spec, ([-5, -5], [5, 5])) == 0.0


def test_lipschitz_probe_grows_near_sign_discontinuity():
    spec = SignTracker(3.0)
    few = lipschitz_probe(spec, ([2.0], [4.0]), samples=100)
    many = lipschitz_probe(spec, ([2.0], [4.0]), samples=100000)
    assert many > few > 1.0
    assert many > 100.0
    assert not SignTracker.lipschitz and LinearAffine.lipschitz


def test_pack_agents_pads_parameters():
    kinds, table = pack_agents([SignTracker(2.5), Harmonic(1, 2)])
    assert kinds.tolist() == [0, 1]
    assert table.tolist() == [[2.5, 0.0], [1.0, 2.0]]
