import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equiopinion.axials import (CONSENSUS, DISSENSUS, POSSIBLY_INCOMPLETE, POTENTIALLY_STABLE, PROVEN,
                                UNSTABLE, canonical_class_key, catalog, consensus_axials,
                                constructive_axials, dissensus_axials_general, dissensus_axials_three,
                                dissensus_axials_two, isotropy_order, normalize_fix,
                                quadratic_equivariant, verify_record)
from equiopinion.state import project_consensus, project_dissensus, project_tangent
from equiopinion.symmetry import GroupElement, act, full_group_generators


def _proportional(a, b):
    a, b = normalize_fix(a), normalize_fix(b)
    return np.allclose(a, b, atol=1e-12)


def _by_label(records):
    return {r.label: r for r in records}


def test_consensus_records():
    (two,) = consensus_axials(3, 2)
    assert _proportional(two.fix, np.tile([1, -1], (3, 1)))
    p1 = consensus_axials(4, 3)[0]
    assert _proportional(p1.fix, np.tile([2, -1, -1], (4, 1)))
    four = consensus_axials(2, 4)
    assert len(four) == 2
    assert _proportional(four[0].fix, np.tile([3, -1, -1, -1], (2, 1)))
    assert _proportional(four[1].fix, np.tile([1, 1, -1, -1], (2, 1)))
    assert len(consensus_axials(4, 2)) == 1


def test_two_option_records():
    recs = _by_label(dissensus_axials_two(3))
    assert _proportional(recs["Sigma_k(k=1)"].fix[:, 0], [1, -0.5, -0.5])
    assert _proportional(recs["T_l(l=1)"].fix[:, 0], [1, -1, 0])
    (only,) = dissensus_axials_two(2)
    assert only.name == "T_l" and _proportional(only.fix[:, 0], [1, -1])


def test_aronson_stability_window():
    recs = _by_label(dissensus_axials_two(5))
    assert recs["Sigma_k(k=2)"].stable_hint == POTENTIALLY_STABLE
    for label in ("Sigma_k(k=1)", "T_l(l=1)", "T_l(l=2)"):
        assert recs[label].stable_hint == UNSTABLE


def test_three_option_records():
    v1, v2, v3 = [1, -0.5, -0.5], [-0.5, 1, -0.5], [-0.5, -0.5, 1]
    recs = _by_label(dissensus_axials_three(3))
    assert set(recs) == {"Sigma_x_m(m=1)", "Sigma_S3_m(m=1)"}
    assert _proportional(recs["Sigma_S3_m(m=1)"].fix, [v1, v2, v3])
    v3 = np.array(v3)
    assert _proportional(recs["Sigma_x_m(m=1)"].fix, [v3, -0.5 * v3, -0.5 * v3])
    assert all(r.stable_hint == UNSTABLE for r in recs.values())


def test_two_agent_three_option_reduces_to_small_case():
    recs = dissensus_axials_three(2)
    assert [r.name for r in recs] == ["Sigma_x_m", "Sigma_Z2"]
    # both lines lie in the 2-dimensional W_d of the 2 x 3 problem
    for r in recs:
        assert np.abs(project_consensus(r.fix)).max() < 1e-12


def test_seventeen_agents_three_options():
    recs = catalog(17, 3, DISSENSUS)
    names = [r.label for r in recs]
    assert [n for n in names if n.startswith("Sigma_x_m")] == [f"Sigma_x_m(m={m})" for m in range(1, 9)]
    assert [n for n in names if n.startswith("Sigma_S3_m")] == [f"Sigma_S3_m(m={m})" for m in range(1, 6)]
    assert "Sigma_Z2" not in names
    assert {r.completeness for r in recs} == {PROVEN}


def test_general_catalog_product_record():
    recs = dissensus_axials_general(4, 4)
    assert {r.completeness for r in recs} == {POSSIBLY_INCOMPLETE}
    v = np.array([1, 1, -1, -1])
    target = np.array([v, v, -v, -v])
    assert any(_proportional(r.fix, target) for r in recs)


@pytest.mark.parametrize("n,k", [(2, 5), (5, 2), (3, 6), (6, 3), (3, 3), (7, 2)])
def test_general_catalog_agrees_with_specialized(n, k):
    general = {r.class_key() for r in constructive_axials(n, k)}
    special = {r.class_key() for r in dissensus_axials_general(n, k)}
    assert general == special


def test_records_verify_small_sizes():
    for n in range(2, 6):
        for k in range(2, 5):
            for mode in (CONSENSUS, DISSENSUS):
                for rec in catalog(n, k, mode):
                    check = verify_record(rec)
                    assert check.ok, (n, k, rec.label, check)


def test_subspace_membership():
    for rec in catalog(6, 3, CONSENSUS):
        assert np.abs(project_dissensus(rec.fix)).max() < 1e-12
    for rec in catalog(6, 3, DISSENSUS):
        assert np.abs(project_consensus(rec.fix)).max() < 1e-12


def test_fix_normalization_and_keys():
    v = normalize_fix([[-2.0, 2.0], [1.0, -1.0], [1.0, -1.0]])
    assert np.linalg.norm(v) == pytest.approx(1.0) and v[0, 0] > 0
    z = np.array([[0.5, -0.5], [0.2, -0.2], [-0.7, 0.7]])
    g = GroupElement((2, 0, 1), (1, 0))
    assert canonical_class_key(z) == canonical_class_key(act(g, z)) == canonical_class_key(-3 * z)


def test_isotropy_order_counts():
    z = np.tile([1.0, -1.0], (4, 1))
    assert isotropy_order(z) == 24
    assert isotropy_order(np.array([[1.0, -1.0], [-1.0, 1.0]])) == 2


def test_json_export_fields():
    rec = catalog(4, 3, DISSENSUS)[0]
    js = rec.to_json()
    assert set(js) == {"name", "mode", "params", "generators", "fix_vector", "stable_hint", "completeness"}
    assert np.array(js["fix_vector"]).shape == (4, 3)
    assert all(min(g["sigma"]) == 1 for g in js["generators"])


def _random_tangent(rng, na, no):
    return project_tangent(rng.normal(size=(na, no)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_quadratic_equivariant_properties(na, no, seed):
    rng = np.random.default_rng(seed)
    z = _random_tangent(rng, na, no)
    fq = quadratic_equivariant(z)
    np.testing.assert_allclose(fq.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(fq.sum(axis=0), 0.0, atol=1e-12)
    t = rng.uniform(-3, 3)
    np.testing.assert_allclose(quadratic_equivariant(t * z), t * t * fq, atol=1e-12)
    for g in full_group_generators(na, no):
        np.testing.assert_allclose(act(g, fq), quadratic_equivariant(act(g, z)), atol=1e-12)


def test_quadratic_equivariant_trivial_inputs():
    np.testing.assert_array_equal(quadratic_equivariant(np.zeros((3, 3))), 0.0)
    row = np.array([0.4, -0.1, -0.3])
    np.testing.assert_allclose(quadratic_equivariant(np.tile(row, (4, 1))), 0.0, atol=1e-15)
