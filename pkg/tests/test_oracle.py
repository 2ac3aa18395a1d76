import itertools

import numpy as np
import pytest

from qudit_cnc.circuit import MeasureOp, make_circuit, random_circuit
from qudit_cnc.cnc import enumerate_phase_points
from qudit_cnc.field import CapExceeded
from qudit_cnc.oracle import (
    DensityState,
    ZeroProbabilityBranch,
    evolve,
    joint_distribution,
    measurement_projector,
    named_state,
    pure_state,
    tv_distance,
)
from qudit_cnc.simulate import measure_update_single

from conftest import random_label, sample_points


def test_density_state_checks(e1):
    with pytest.raises(ValueError):
        DensityState(e1, np.eye(3))
    with pytest.raises(ValueError):
        DensityState(e1, np.diag([1.5, -0.5, 0]))
    with pytest.raises(ValueError):
        DensityState(e1, np.array([[0.5, 1j, 0], [0, 0.5, 0], [0, 0, 0]]))
    with pytest.raises(ValueError):
        DensityState(e1, np.eye(2) / 2)


def test_empty_circuit_unchanged(e1):
    rho = named_state(e1, "strange")
    prob, m = evolve(rho, make_circuit(e1, []), {})
    assert prob == pytest.approx(1)
    assert np.allclose(m, rho.matrix)


def test_zero_state_measure_z(e1):
    c = make_circuit(e1, [MeasureOp((1, 0), "m")])
    prob, _ = evolve(named_state(e1, "stabilizer-zero"), c, [0])
    assert prob == pytest.approx(1)
    with pytest.raises(ZeroProbabilityBranch):
        evolve(named_state(e1, "stabilizer-zero"), c, [1])
    assert evolve(named_state(e1, "stabilizer-zero"), c, [1], normalize=False)[0] == pytest.approx(0)


def test_branches_sum_to_one(e2, rng):
    for _ in range(10):
        c = random_circuit(e2, rng, length=6, max_measurements=3)
        rho = pure_state(e2, rng.normal(size=9) + 1j * rng.normal(size=9))
        total = 0.0
        for outs in itertools.product(range(3), repeat=c.num_measurements):
            prob, m = evolve(rho, c, outs, normalize=False)
            total += prob
            assert np.linalg.eigvalsh((m + m.conj().T) / 2).min() > -1e-9
        assert total == pytest.approx(1, abs=1e-9)
        assert sum(joint_distribution(rho, c).values()) == pytest.approx(1, abs=1e-9)


def test_joint_distribution_examples(e1, e2):
    c = make_circuit(e1, [MeasureOp((1, 0), "m")])
    dist = joint_distribution(named_state(e1, "maximally-mixed"), c)
    assert dist == pytest.approx({(0,): 1 / 3, (1,): 1 / 3, (2,): 1 / 3})
    c2 = make_circuit(e2, [MeasureOp(e2.e(0), "a"), MeasureOp(e2.e(1), "b")])
    dist = joint_distribution(named_state(e2, "stabilizer-zero"), c2)
    assert dist == pytest.approx({(0, 0): 1.0})


def test_branch_cap(e2):
    c = make_circuit(e2, [MeasureOp(e2.e(0), f"m{k}") for k in range(7)])
    with pytest.raises(CapExceeded):
        joint_distribution(named_state(e2, "maximally-mixed"), c)


def test_tv_distance_examples():
    p = {0: 0.5, 1: 0.5}
    assert tv_distance(p, p) == 0
    assert tv_distance({0: 1.0}, {1: 1.0}) == 1
    assert tv_distance(p, {0: 1.0, 1: 0.0}) == pytest.approx(0.5)
    assert tv_distance(p, {0: 0.2, 1: 0.8}) == tv_distance({0: 0.2, 1: 0.8}, p)
    with pytest.raises(KeyError):
        tv_distance({(0,): 1.0}, {(0, 1): 1.0}, strict=True)


def test_measurement_probabilities_match_update_rule_n1(e1):
    labels = list(e1.vectors())[1:]
    for p in enumerate_phase_points(e1):
        a_op = p.operator()
        for a in labels:
            probs = [np.trace(measurement_projector(e1, a, s) @ a_op).real for s in range(3)]
            if a in p:
                expect = [1.0 if s == p.value(a) else 0.0 for s in range(3)]
            else:
                expect = [1 / 3] * 3
            assert np.allclose(probs, expect, atol=1e-9)


def test_measurement_probabilities_match_update_rule_n2(e2, rng):
    for p in sample_points(e2, rng, 100):
        a = random_label(e2, rng)
        a_op = p.operator()
        s, _ = measure_update_single(p, a, rng=rng)
        prob = np.trace(measurement_projector(e2, a, s) @ a_op).real
        assert prob == pytest.approx(1.0 if a in p else 1 / 3, abs=1e-9)
