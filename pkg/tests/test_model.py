import json

import numpy as np
import pytest

from conftest import random_complex
from ttstar import fixtures
from ttstar.errors import InvariantViolation, MissingRealStructure, ParseError, SchemaError
from ttstar.hodge import exchange_kappa, vhs_to_ttstar
from ttstar.jets import Jet
from ttstar.model import (
    HARMONIC_IDENTITIES,
    INTEGRABLE_IDENTITIES,
    REAL_IDENTITIES,
    CVBundleData,
    check_harmonic,
    check_integrable,
    check_real,
    dump,
    full_report,
    load,
)

TOL = 1e-9


def doc(**over):
    base = {"rank": 1, "dim": 1, "metric": [[1]], "higgs": [[[0]]], "U": [[0]], "Q": [[0]]}
    base.update(over)
    return json.dumps(base)


def test_load_minimal():
    B = load(doc())
    assert (B.rank, B.dim, B.jet_degree) == (1, 1, 3)
    assert full_report(B).verdict


def test_load_takahashi_file():
    raw = json.dumps({"rank": 2, "dim": 1, "metric": [[1, 0], [0, 1]], "higgs": [[[0, 0], [0, 0]]],
                      "U": [[0, 0], [0, 0]], "Q": [[0.5, 0], [0, -0.5]]})
    B = load(raw)
    assert np.allclose(B.Q.constant_part(), np.diag([0.5, -0.5]))


def test_load_field_entries():
    entry = {"terms": [{"mono": {"t1": 1, "tb1": 1}, "c": [2, 0]}, {"mono": {}, "c": 1}]}
    B = load(doc(metric=[[entry]]))
    assert B.metric.coeff((1, 1)) == pytest.approx(2)
    assert B.metric.coeff((0, 0)) == pytest.approx(1)


@pytest.mark.parametrize("raw, kind, field", [
    (b"{not json", ParseError, None),
    (b"\xff\xfe", ParseError, None),
    (doc(extra=1), SchemaError, None),
    (doc(rank="1"), SchemaError, "rank"),
    (doc(Q=[[0, 0]]), SchemaError, "Q"),
    (doc(higgs=[]), SchemaError, "higgs"),
    (doc(metric=[[{"terms": [{"mono": {"t2": 1}, "c": 1}]}]]), SchemaError, "metric"),
    (doc(metric=[[-1]]), InvariantViolation, "metric"),
])
def test_load_errors(raw, kind, field):
    with pytest.raises(kind) as info:
        load(raw)
    if field is not None:
        assert info.value.field == field


def test_non_hermitian_metric_rejected():
    raw = json.dumps({"rank": 2, "dim": 1, "metric": [[1, 0.5], [0, 1]], "higgs": [[[0, 0], [0, 0]]],
                      "U": [[0, 0], [0, 0]], "Q": [[0, 0], [0, 0]]})
    with pytest.raises(InvariantViolation) as info:
        load(raw)
    assert info.value.field == "metric"


def test_harmonic_trivial_all_zero():
    B = fixtures.generate("trivial-r", 3)
    rep = check_harmonic(B, TOL)
    assert set(rep.residuals) == set(HARMONIC_IDENTITIES)
    assert all(r.value == 0 for r in rep.residuals.values())


def test_harmonic_vhs_rank3():
    assert check_harmonic(fixtures.generate("vhs-weight0-r3"), 1e-10).verdict


def test_harmonic_non_commuting_higgs():
    E12, E21 = np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])
    Z = np.zeros((2, 2))
    B = CVBundleData.constant(np.eye(2), [E12, E21], Z, Z)
    rep = check_harmonic(B, TOL)
    assert rep.residuals["Phi-wedge-Phi"].value > 0
    assert "Phi-wedge-Phi" in rep.failures


def test_harmonic_line_pair_is_harmonic_and_wrong_higgs_breaks_curvature():
    B = fixtures.harmonic_line_pair()
    assert full_report(B).verdict
    bad = B.replace(higgs=(B.higgs[0] * 2.0,))
    assert check_harmonic(bad).failures == ["curvature"]


def test_integrable_corollary_instance():
    Z = np.zeros((3, 3))
    B = CVBundleData.constant(np.eye(3), [Z], Z, np.diag([0.3, -1.2, 2.0]))
    rep = check_integrable(B, TOL)
    assert set(rep.residuals) == set(INTEGRABLE_IDENTITIES) and rep.verdict


def test_integrable_ucq_constructed_u(rng):
    m, r, d = 2, 3, 3
    Q = np.diag([2.0, 0.0, -2.0])
    Cs = [random_complex(rng, r, r) for _ in range(m)]
    U = Jet.zero(m, d, (r, r))
    for i, C in enumerate(Cs, start=1):
        U = U + Jet.variable(i, m, d) * (C @ Q - (Q - np.eye(r)) @ C)
    lift = lambda a: Jet.constant(a, m, d)  # noqa: E731
    B = CVBundleData(r, m, lift(np.eye(r)), tuple(lift(C) for C in Cs), U, lift(Q))
    assert check_integrable(B).residuals["UCQ"].value <= 1e-12


def test_integrable_non_real_q():
    Z = np.zeros((2, 2))
    B = CVBundleData.constant(np.eye(2), [Z], Z, np.diag([1j, 0.0]))
    rep = check_integrable(B, TOL)
    assert rep.residuals["QQ"].value > 0 and not rep.verdict


def test_real_exchange_example():
    Z = np.zeros((2, 2))
    B = CVBundleData.constant(np.eye(2), [Z], Z, np.diag([0.7, -0.7]), kappa=np.eye(2)[::-1])
    rep = check_real(B, TOL)
    assert set(rep.residuals) == set(REAL_IDENTITIES) and rep.verdict


def test_real_identity_kappa_breaks_antisymmetry():
    Z = np.zeros((2, 2))
    B = CVBundleData.constant(np.eye(2), [Z], Z, np.diag([1.0, -1.0]), kappa=np.eye(2))
    assert check_real(B, TOL).failures == ["Q-antisymmetry"]


def test_real_bad_involution_surfaced():
    Z = np.zeros((2, 2))
    B = CVBundleData.constant(np.eye(2), [Z], Z, Z, kappa=2 * np.eye(2))
    rep = check_real(B, TOL)
    assert rep.data["error"] == "InvalidRealStructure"
    assert "kappa-involution" in rep.failures
    assert rep.residuals["U-symmetry"].skipped


def test_real_requires_kappa():
    with pytest.raises(MissingRealStructure):
        check_real(fixtures.harmonic_line_pair())


def test_full_report_examples():
    assert full_report(fixtures.generate("trivial-r", 1)).verdict
    assert full_report(fixtures.generate("vhs-weight0-r3")).verdict
    rep = full_report(fixtures.perturbed_vhs())
    assert rep.failures == ["UCQ"]


def unitary_change(B, S):
    """Apply a constant frame change ``e' = S e`` to every field of ``B``."""
    m, d = B.dim, B.jet_degree
    Sf, Si = Jet.constant(S, m, d), Jet.constant(np.linalg.inv(S), m, d)
    conj = lambda P: Sf @ P @ Si  # noqa: E731
    K = None if B.kappa is None else np.conj(S) @ B.kappa @ np.linalg.inv(S)
    return B.replace(metric=Sf @ B.metric @ Sf.H, higgs=tuple(conj(C) for C in B.higgs),
                     U=conj(B.U), Q=conj(B.Q), kappa=K)


@pytest.mark.parametrize("make", [
    lambda: fixtures.harmonic_line_pair(),
    lambda: fixtures.perturbation("UCQ"),
    lambda: fixtures.perturbation("CU"),
    lambda: fixtures.perturbation("curvature"),
])
def test_residuals_invariant_under_unitary_frames(rng, make):
    B = make()
    S, _ = np.linalg.qr(random_complex(rng, B.rank, B.rank))
    a, b = full_report(B), full_report(unitary_change(B, S))
    for name, r in a.residuals.items():
        if not r.skipped:
            assert b.residuals[name].value == pytest.approx(r.value, rel=1e-8, abs=1e-12)


def test_real_residuals_covariant_under_unitary_frames(rng):
    B = fixtures.generate("rank3-halves")
    S, _ = np.linalg.qr(random_complex(rng, 3, 3))
    assert full_report(unitary_change(B, S)).verdict


def random_vhs_bundle(rng, r):
    dims = rng.multinomial(r - 1, np.ones(3) / 3) + np.array([1, 0, 0])
    ps = rng.choice(np.arange(-3, 4), size=3, replace=False)
    grading = [(int(p), int(n)) for p, n in zip(ps, dims) if n]
    blocks = []
    for p, n in grading:
        A = random_complex(rng, n, n)
        blocks.append((-1) ** p * (A @ A.conj().T + n * np.eye(n)))
    return vhs_to_ttstar(grading, blocks, weight=0)


@pytest.mark.parametrize("r", range(1, 7))
def test_integrable_on_random_constructed_instances(rng, r):
    for m in (1, 2, 3):
        B = random_vhs_bundle(rng, r)
        if m > 1:
            lift = lambda f: Jet.constant(f.constant_part(), m, B.jet_degree)  # noqa: E731
            B = CVBundleData(r, m, lift(B.metric), tuple(lift(B.higgs[0]) for _ in range(m)), lift(B.U), lift(B.Q))
        assert check_integrable(B, TOL).verdict
        assert check_harmonic(B, TOL).verdict
        qs = rng.normal(size=r)
        Z = np.zeros((r, r))
        C3 = CVBundleData.constant(np.eye(r), [Z] * m, Z, np.diag(qs))
        assert check_integrable(C3, TOL).verdict


def test_exchange_kappa_on_symmetric_grading():
    grading = [(1, 2), (0, 1), (-1, 2)]
    B = vhs_to_ttstar(grading, [-np.eye(2), np.eye(1), -np.eye(2)], kappa=exchange_kappa(grading))
    assert full_report(B).verdict


def test_json_round_trip():
    for B in [fixtures.harmonic_line_pair(), fixtures.generate("vhs-weight0-r3"), fixtures.perturbation("QCU")]:
        B2 = load(dump(B))
        assert B2.rank == B.rank and B2.weight == B.weight
        for f, g in [(B.metric, B2.metric), (B.U, B2.U), (B.Q, B2.Q), *zip(B.higgs, B2.higgs)]:
            assert (f - g).max_abs() == 0
        if B.kappa is not None:
            assert np.array_equal(B.kappa, B2.kappa)


def test_report_text_and_dict():
    rep = full_report(fixtures.perturbed_vhs())
    text = rep.to_text()
    assert "verdict: fail" in text and "UCQ" in text
    d = rep.to_dict()
    assert d["verdict"] == "fail"
    assert d["residuals"]["UCQ"]["value"] > d["tol"]
