import json
import math

import numpy as np
import pytest

from conftest import random_complex
from ttstar import fixtures
from ttstar.errors import (
    EigenvalueOnWall,
    InvariantViolation,
    MissingRealStructure,
    NondegeneracyFailure,
    PositivityWarning,
    PreconditionViolated,
    SchemaError,
)
from ttstar.hodge import (
    exchange_kappa,
    load_vhs,
    polarization_signs,
    roundtrip_check,
    ttstar_to_vhs,
    vhs_to_dict,
    vhs_to_ttstar,
)
from ttstar.model import CVBundleData, full_report

RANK3 = [(1, 1), (0, 1), (-1, 1)]


def diag_bundle(qs, kappa=None):
    r = len(qs)
    Z = np.zeros((r, r))
    return CVBundleData.constant(np.eye(r), [Z], Z, np.diag(qs), kappa=kappa)


def test_vhs_trivial():
    B = vhs_to_ttstar([(0, 2)], np.eye(2))
    assert np.array_equal(B.Q.constant_part(), np.zeros((2, 2)))
    assert np.array_equal(B.metric.constant_part(), np.eye(2))


def test_vhs_rank3_signs():
    B = vhs_to_ttstar(RANK3, np.diag([-1.0, 1.0, -1.0]))
    assert np.array_equal(B.Q.constant_part(), np.diag([1.0, 0.0, -1.0]))
    assert np.array_equal(B.metric.constant_part(), np.eye(3))
    assert B.U.max_abs() == 0 and all(C.max_abs() == 0 for C in B.higgs)


def test_vhs_pairing_instance():
    B = vhs_to_ttstar([(1, 1), (-1, 1)], [-np.eye(1), -np.eye(1)], kappa=exchange_kappa([(1, 1), (-1, 1)]))
    assert np.array_equal(B.Q.constant_part(), np.diag([1.0, -1.0]))
    assert full_report(B).verdict


def test_vhs_non_positive_metric_warns_then_refuses():
    with pytest.warns(PositivityWarning):
        with pytest.raises(InvariantViolation) as info:
            vhs_to_ttstar([(1, 1), (0, 1)], np.eye(2))
    assert info.value.field == "metric"


def test_vhs_degenerate_or_mixed_k():
    with pytest.raises(NondegeneracyFailure):
        vhs_to_ttstar([(0, 2)], np.diag([1.0, 0.0]))
    with pytest.raises(NondegeneracyFailure):
        vhs_to_ttstar([(0, 1), (2, 1)], np.array([[1.0, 0.5], [0.5, 1.0]]))


def test_exchange_kappa_needs_symmetric_grading():
    with pytest.raises(PreconditionViolated):
        exchange_kappa([(1, 1), (0, 1)])


def test_to_vhs_rank3_filtration():
    V = ttstar_to_vhs(diag_bundle([1.0, 0.0, -1.0]), 0)
    assert V.grading == [(1, 1), (0, 1), (-1, 1)]
    assert [(p, len(rows)) for p, rows in V.filtration] == [(2, 0), (1, 1), (0, 2), (-1, 3)]
    assert np.abs(V.A - np.eye(3)).max() <= 1e-12


def test_to_vhs_zero_q():
    V = ttstar_to_vhs(diag_bundle([0.0] * 4), 0)
    assert V.grading == [(0, 4)] and np.allclose(V.A, np.eye(4))


def test_to_vhs_wall():
    with pytest.raises(EigenvalueOnWall) as info:
        ttstar_to_vhs(diag_bundle([0.5, -0.5]), 0)
    assert abs(info.value.eigenvalue) == 0.5


def test_to_vhs_refuses_nonzero_u():
    B = diag_bundle([0.0, 0.0]).replace(U=fixtures.perturbation("CU").U)
    with pytest.raises(PreconditionViolated):
        ttstar_to_vhs(B, 0)


@pytest.mark.parametrize("w", [0, 1, 2, -1])
def test_floor_rule_against_direct_arithmetic(rng, w):
    lam = rng.uniform(-3, 3, 6)
    V = ttstar_to_vhs(diag_bundle(lam), w)
    expected = {}
    for a in lam:
        p = math.floor(a + (w + 1) / 2)
        expected[p] = expected.get(p, 0) + 1
    assert dict(V.grading) == expected


def test_filtration_invariants(rng):
    for _ in range(10):
        lam = rng.uniform(-4, 4, int(rng.integers(1, 7)))
        w = int(rng.integers(-2, 3))
        V = ttstar_to_vhs(diag_bundle(lam), w)
        dims = [len(rows) for _, rows in V.filtration]
        assert dims == sorted(dims) and dims[0] == 0 and dims[-1] == len(lam)
        pieces = dict(V.grading)
        for (p, hi), (_, lo) in zip(V.filtration, V.filtration[1:]):
            assert lo.shape[0] - hi.shape[0] == pieces.get(p - 1, 0)
            assert np.linalg.matrix_rank(lo) == lo.shape[0]
        assert np.abs(np.abs(np.linalg.eigvals(V.A)) - 1).max() <= 1e-9


def test_polarization_rank3_matches_k_signs():
    B = fixtures.generate("vhs-weight0-r3")
    rep = polarization_signs(ttstar_to_vhs(B, 0))
    assert rep.verdict
    assert rep.data["signs"] == {"1": "-", "0": "+", "-1": "-"}


def test_polarization_rank1():
    B = diag_bundle([0.0], kappa=np.eye(1))
    V = ttstar_to_vhs(B, 0)
    assert np.allclose(V.S, np.eye(1))
    assert polarization_signs(V).verdict


def test_polarization_indefinite_k(rng):
    """Blocks of k with sign (-1)^p make h positive; the pairing reproduces those signs."""
    grading = [(2, 2), (1, 1), (0, 2), (-1, 1), (-2, 2)]
    blocks = []
    for p, n in grading:
        A = random_complex(rng, n, n)
        blocks.append((-1) ** (p % 2) * (A @ A.conj().T + np.eye(n)))
    B = vhs_to_ttstar(grading, blocks, kappa=np.eye(8)[::-1])
    V = ttstar_to_vhs(B, 0)
    rep = polarization_signs(V)
    assert rep.data["signs"] == {str(p): "+" if p % 2 == 0 else "-" for p, _ in grading}
    for p, block in zip([g[0] for g in grading], blocks):
        assert np.all(np.sign(np.linalg.eigvalsh(block)) == (-1) ** (p % 2))


def test_polarization_odd_weight_antisymmetric():
    B = diag_bundle([0.25, -0.25], kappa=np.eye(2)[::-1])
    V = ttstar_to_vhs(B, 1)
    assert np.abs(V.S.T + V.S).max() <= 1e-12
    assert polarization_signs(V).residuals["S-symmetry"].passed


def test_pairing_needs_kappa():
    with pytest.raises(MissingRealStructure):
        ttstar_to_vhs(diag_bundle([0.0]), 0).pairing()


def test_roundtrip_examples():
    rep = roundtrip_check(RANK3, np.diag([-1.0, 1.0, -1.0]))
    assert rep.verdict and rep.data["grading"] == [[1, 1], [0, 1], [-1, 1]]
    for r in (1, 3, 5):
        assert roundtrip_check([(0, r)], np.eye(r)).verdict


def test_roundtrip_merges_repeated_p():
    rep = roundtrip_check([(1, 1), (0, 2), (1, 1)], np.diag([-1.0, 1.0, 1.0, -1.0]))
    assert rep.verdict and rep.data["grading"] == [[1, 2], [0, 2]]


@pytest.mark.parametrize("grading", [[[0.5, 1]], [["1", 1]], [[0, -1]], [[0, 1, 2]]])
def test_schema_rejects_bad_grading(grading):
    raw = json.dumps({"weight": 0, "grading": grading, "k": [[1]]})
    with pytest.raises(SchemaError):
        load_vhs(raw)


def test_vhs_json_fields():
    V = ttstar_to_vhs(fixtures.generate("vhs-weight0-r3"), 0)
    d = vhs_to_dict(V)
    assert d["grading"] == [[1, 1], [0, 1], [-1, 1]]
    assert [f["p"] for f in d["filtration"]] == [2, 1, 0, -1]
    assert "S" in d and d["transversality"] == "vacuous"
