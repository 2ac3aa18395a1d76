import numpy as np
import pytest

from qudit_cnc.field import SymplecticSpace
from qudit_cnc.pauli import (
    DenseCapExceeded,
    OutcomeAssignment,
    PhasedPauli,
    all_outcome_assignments,
    beta,
    dense_from_json,
    dense_to_json,
    omega,
    pauli_coefficients,
    pauli_matrix,
    projector,
)


def test_shift_and_clock_qutrit(e1):
    x = pauli_matrix(e1, (0, 1))
    z = pauli_matrix(e1, (1, 0))
    assert np.allclose(x, np.roll(np.eye(3), 1, axis=0))
    assert np.allclose(z, np.diag([1, omega(3), omega(3) ** 2]))


def test_symmetric_phase_convention(e1):
    # T_(1,1) = omega^{-1/2} Z X
    half = pow(2, -1, 3)
    zx = pauli_matrix(e1, (1, 0)) @ pauli_matrix(e1, (0, 1))
    assert np.allclose(pauli_matrix(e1, (1, 1)), omega(3) ** (-half) * zx)


def test_product_rule_n2_random(e2, rng):
    for _ in range(300):
        a, b = (tuple(int(x) for x in rng.integers(0, 3, 4)) for _ in range(2))
        pa, pb = PhasedPauli(e2, a), PhasedPauli(e2, b)
        assert np.allclose(pa.matrix() @ pb.matrix(), (pa * pb).matrix(), atol=1e-9)


def test_beta_zero_on_commuting_and_errors_otherwise(e1):
    assert beta(e1, (1, 0), (2, 0)) == 0
    with pytest.raises(ValueError):
        beta(e1, (1, 0), (0, 1))


def test_unitary_and_inverse(e2, rng):
    for _ in range(20):
        a = tuple(int(x) for x in rng.integers(0, 3, 4))
        t = pauli_matrix(e2, a)
        assert np.allclose(t @ t.conj().T, np.eye(9))
        assert np.allclose(t.conj().T, pauli_matrix(e2, e2.scale(-1, a)))


def test_projectors_resolve_identity(e2):
    sub = e2.span([e2.e(0), e2.f(1)])
    projs = [projector(r) for r in all_outcome_assignments(sub)]
    assert np.allclose(sum(projs), np.eye(9))
    for p in projs:
        assert np.allclose(p @ p, p, atol=1e-9)
        assert abs(np.trace(p).real - 1) < 1e-9


def test_outcome_assignment_requires_isotropic(e1):
    with pytest.raises(ValueError):
        OutcomeAssignment(e1.full(), (0, 0))


def test_outcome_assignment_from_vectors(e2):
    r = OutcomeAssignment.from_vectors(e2, [e2.e(0), e2.e(1)], [1, 2])
    assert r(e2.add(e2.e(0), e2.e(1))) == 0
    with pytest.raises(ValueError):
        OutcomeAssignment.from_vectors(e2, [e2.e(0), e2.scale(2, e2.e(0))], [1, 1])


def test_coefficients_reconstruct(e1, rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = pauli_coefficients(e1, m)
    rec = sum(v * pauli_matrix(e1, b) for b, v in c.items()) / 3
    assert np.allclose(rec, m)


def test_dense_cap():
    with pytest.raises(DenseCapExceeded):
        pauli_matrix(SymplecticSpace(6, 3), (0,) * 12)


def test_dense_json_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(dense_from_json(dense_to_json(m)), m)
    with pytest.raises(ValueError):
        dense_from_json([[1, 2], [3, 4]])


from hypothesis import given, settings
from hypothesis import strategies as st

labels2 = st.lists(st.integers(0, 2), min_size=4, max_size=4).map(tuple)


@settings(max_examples=150, deadline=None)
@given(labels2, labels2)
def test_commutation_phase_property(a, b):
    sp = SymplecticSpace(2, 3)
    ta, tb = pauli_matrix(sp, a), pauli_matrix(sp, b)
    assert np.allclose(ta @ tb, omega(3) ** sp.product(a, b) * tb @ ta, atol=1e-9)
    assert abs(np.trace(ta)) < 1e-9 or not any(a)
