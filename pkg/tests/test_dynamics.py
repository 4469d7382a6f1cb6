import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equiopinion.dynamics import (HomogeneousModel, ModelParams, TensorModel, drift,
                                  homogeneous_tensor, index_class_masks, perturb, sigmoid_s1,
                                  sigmoid_s2, unprojected_field)
from equiopinion.errors import DimensionMismatch
from equiopinion.state import project_tangent
from equiopinion.symmetry import NotHomogeneous, check_tensor_homogeneity


def _model(na=4, no=3, lam=0.7, bias=None, params=(0.3, -0.8, 0.25, -0.1)):
    return HomogeneousModel(na, no, ModelParams(*params, lam=lam), bias)


def test_sigmoid_values():
    assert sigmoid_s1(0.0, 0.5) == 0.0 and sigmoid_s2(0.0, 0.5) == 0.0
    h = 1e-6
    assert (sigmoid_s1(h) - sigmoid_s1(-h)) / (2 * h) == pytest.approx(1.0, abs=1e-5)
    assert (sigmoid_s2(h) - sigmoid_s2(-h)) / (2 * h) == pytest.approx(1.0, abs=1e-5)
    assert 0.999 < sigmoid_s1(10.0, 0.5) < 1.0
    x = np.linspace(-50, 50, 1001)
    assert np.all(np.abs(sigmoid_s2(x)) <= 0.5)


def test_k_hto_must_be_nonzero():
    with pytest.raises(ValueError):
        ModelParams(0, 0, 0, 0, k_hto=0.0)


def test_neutral_point_is_equilibrium():
    m = _model(bias=0.3)
    np.testing.assert_allclose(drift(np.zeros((4, 3)), m), 0.0, atol=1e-15)


def test_drift_rows_sum_to_zero():
    m = perturb(_model(), 0.05, 3)
    z = project_tangent(np.random.default_rng(0).normal(size=(4, 3)))
    np.testing.assert_allclose(drift(z, m).sum(axis=1), 0.0, atol=1e-14)


def test_drift_rejects_wrong_shape():
    with pytest.raises(DimensionMismatch):
        drift(np.zeros((3, 3)), _model())


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(2, 5), st.integers(0, 10_000))
def test_homogeneous_and_tensor_paths_agree(na, no, seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(-2, 2, 4)
    m = HomogeneousModel(na, no, ModelParams(*p, lam=rng.uniform(-2, 2)), rng.uniform(-1, 1, (na, no)))
    t = m.to_tensor()
    for _ in range(5):
        z = project_tangent(rng.normal(size=(na, no)))
        assert np.abs(drift(z, m) - drift(z, t)).max() <= 1e-12


def test_homogeneous_tensor_entries():
    A = homogeneous_tensor(2, 2, 1, 2, 3, 4)
    assert A.size == 16
    assert A[0, 0, 0, 0] == A[1, 1, 1, 1] == 1
    assert A[0, 0, 0, 1] == 2 and A[0, 1, 1, 1] == 3 and A[1, 0, 0, 1] == 4
    assert np.all(homogeneous_tensor(3, 3, 0.5, 0.5, 0.5, 0.5) == 0.5)


def test_index_class_masks_partition():
    masks = index_class_masks(3, 4)
    total = sum(m.astype(int) for m in masks)
    assert np.all(total == 1)


def test_homogeneity_round_trip():
    res = check_tensor_homogeneity(homogeneous_tensor(3, 3, 0.1, 0.2, 0.3, 0.4))
    assert (res.alpha, res.beta, res.gamma, res.delta) == (0.1, 0.2, 0.3, 0.4)


def test_perturb_contract():
    m = _model()
    same = perturb(m, 0.0, 1)
    np.testing.assert_array_equal(same.tensor, m.to_tensor().tensor)
    np.testing.assert_array_equal(same.bias, m.bias)
    a, b = perturb(m, 0.01, 42), perturb(m, 0.01, 42)
    np.testing.assert_array_equal(a.tensor, b.tensor)
    np.testing.assert_array_equal(a.bias, b.bias)
    assert np.abs(a.tensor - m.to_tensor().tensor).max() <= 0.01
    assert isinstance(check_tensor_homogeneity(a.tensor, a.bias), NotHomogeneous)
    with pytest.raises(ValueError):
        perturb(m, -1.0, 0)


def test_delta_override_matches_rebuilt_model():
    m = perturb(_model(), 0.02, 5)
    z = project_tangent(np.random.default_rng(1).normal(size=(4, 3)))
    np.testing.assert_allclose(drift(z, m, delta=0.4), drift(z, m.with_delta(0.4)), atol=1e-14)
    h = _model()
    np.testing.assert_allclose(drift(z, h, delta=0.4), drift(z, h.with_delta(0.4)), atol=1e-15)


def test_tensor_model_validation():
    with pytest.raises(DimensionMismatch):
        TensorModel(np.zeros((2, 3, 2, 2)), None)
    with pytest.raises(ValueError):
        TensorModel(np.full((2, 2, 2, 2), np.inf), None)


def test_field_deviation_is_bounded():
    no = 4
    m = _model(no=no, lam=1.7, bias=0.2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = project_tangent(rng.normal(scale=5, size=(4, no)))
        dev = np.abs(unprojected_field(z, m) + z)
        assert dev.max() <= 1.7 * (1 + 0.5 * (no - 1)) + 0.2 + 1e-12


def test_linear_regime_decays():
    m = _model(lam=0.0)
    z = project_tangent(np.random.default_rng(3).normal(size=(4, 3)))
    for _ in range(2000):
        z = z + 0.01 * drift(z, m)
    assert np.abs(z).max() < np.exp(-19)
