"""Tests for the small-register circuit model and the two- and three-body
gate syntheses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puboanneal.circuits import (
    Circuit,
    Gate,
    GateKind,
    circuit_from_text,
    cnot,
    equal_up_to_phase,
    expand_zzz_to_rzz,
    gate_unitary,
    global_phase,
    hadamard,
    overhead_ratio,
    phase_distance,
    rx,
    ry,
    rz,
    rzz,
    stats_of,
    synth_cnot_from_rzz,
    synth_zzz,
    unitary_of,
    verify_circuit,
    zzz_target,
)
from puboanneal.errors import FormatError, SizeLimitError

CNOT01 = np.eye(4)[:, [0, 1, 3, 2]]


def random_angles(seed, count):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2.0 * math.pi, 2.0 * math.pi, count)


# ---------------------------------------------------------------------------
# gates and circuits


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.RX, (0, 1), 0.3)  # single-qubit kind, two targets
    with pytest.raises(ValueError):
        Gate(GateKind.CNOT, (1, 1))  # duplicate targets
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0,), 0.5)  # H carries no angle
    with pytest.raises(ValueError):
        Gate(GateKind.RZZ, (0, 1))  # missing angle


def test_circuit_validation():
    with pytest.raises(SizeLimitError):
        Circuit(5, ())
    with pytest.raises(ValueError):
        Circuit(2, (rz(3, 0.1),))  # target beyond register
    c = Circuit(2, (hadamard(0), cnot(0, 1)))
    assert len(c) == 2
    assert c.then(rz(1, 0.25)).gates[-1] == rz(1, 0.25)


def test_rotation_gate_matrix():
    # R_z(theta) = exp(-i theta s_z) = diag(e^{-i theta/2}, e^{+i theta/2})
    theta = 0.7
    u = gate_unitary(rz(0, theta), 1)
    assert np.allclose(np.diag(u), [np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    ux = gate_unitary(rx(0, math.pi), 1)
    assert np.allclose(ux, [[0.0, -1.0j], [-1.0j, 0.0]])


def test_empty_circuit_is_identity():
    assert np.allclose(unitary_of(Circuit(2, ())), np.eye(4))


def test_cnot_permutation_and_order():
    c = Circuit(2, (cnot(0, 1),))
    assert np.allclose(unitary_of(c), CNOT01)
    # leftmost gate acts first: X on control, then CNOT, flips both
    c2 = Circuit(2, (rx(0, math.pi), cnot(0, 1)))
    u = unitary_of(c2)
    state = np.zeros(4)
    state[0] = 1.0  # |00>, qubit 0 most significant
    out = u @ state
    assert abs(out[3]) == pytest.approx(1.0)  # |11> up to phase


def test_rz_two_pi_is_minus_identity():
    u = unitary_of(Circuit(1, (rz(0, 2.0 * math.pi),)))
    assert np.allclose(u, -np.eye(2))


def test_rzz_is_diagonal_in_z_basis():
    theta = 1.1
    u = unitary_of(Circuit(2, (rzz(0, 1, theta),)))
    # exp(-2 i theta s_z s_z): phase e^{-i theta/2} on aligned bits
    want = np.diag(
        [
            np.exp(-0.5j * theta),
            np.exp(0.5j * theta),
            np.exp(0.5j * theta),
            np.exp(-0.5j * theta),
        ]
    )
    assert np.allclose(u, want)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_circuits_are_unitary(seed):
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(8):
        q = int(rng.integers(0, 3))
        r = (q + 1 + int(rng.integers(0, 2))) % 3
        pick = rng.integers(0, 5)
        angle = float(rng.uniform(-math.pi, math.pi))
        gates.append(
            [rx(q, angle), ry(q, angle), rz(q, angle), hadamard(q),
             rzz(min(q, r), max(q, r), angle)][pick]
        )
    u = unitary_of(Circuit(3, tuple(gates)))
    assert np.linalg.norm(u @ u.conj().T - np.eye(8)) < 1e-12


# ---------------------------------------------------------------------------
# phase-insensitive comparison


def test_equal_up_to_phase_cases():
    u = unitary_of(Circuit(2, (hadamard(0), cnot(0, 1))))
    same, phase = equal_up_to_phase(u, u)
    assert same and phase == pytest.approx(0.0)
    flipped, phase = equal_up_to_phase(u, -u)
    assert flipped and abs(phase) == pytest.approx(math.pi)
    different, _ = equal_up_to_phase(CNOT01, np.eye(4))
    assert not different


def test_phase_distance_resolution():
    u = unitary_of(Circuit(1, (rz(0, 0.4),)))
    d, phase = phase_distance(u, np.exp(0.25j) * u)
    assert d < 1e-12
    # U = e^{i phi} W with W = e^{0.25 i} U
    assert phase == pytest.approx(-0.25)


# ---------------------------------------------------------------------------
# three-body synthesis


def test_zzz_target_phases():
    theta = 0.9
    u = zzz_target(theta)
    # all-up state carries e^{-i theta/8}
    assert u[0, 0] == pytest.approx(np.exp(-1j * theta / 8.0))
    # single flip reverses the sign of the product
    assert u[1, 1] == pytest.approx(np.exp(1j * theta / 8.0))


def test_synth_zzz_matches_target():
    for theta in list(random_angles(3, 20)) + [0.0, math.pi, -math.pi]:
        report = verify_circuit(synth_zzz(theta), zzz_target(theta),
                                name="zzz")
        assert report.passed
        assert report.residual <= 1e-9


def test_synth_zzz_gate_budget():
    stats = stats_of(synth_zzz(0.5))
    assert stats.two_qubit_count == 4
    assert stats.single_qubit_count == 1
    assert stats.counts["CNOT"] == 4
    assert stats.counts["RZ"] == 1


def test_synth_cnot_from_rzz_verifies():
    synth = synth_cnot_from_rzz()
    assert any(r.passed for r in synth.reports)
    u = unitary_of(synth.circuit)
    ok, _ = equal_up_to_phase(u, CNOT01)
    assert ok
    stats = stats_of(synth.circuit)
    assert stats.two_qubit_count == 1
    assert stats.counts.get("RZZ") == 1
    assert stats.counts.get("CNOT", 0) == 0


def test_expand_zzz_to_rzz_counts_and_accuracy():
    for theta in random_angles(11, 20):
        circuit, stats = expand_zzz_to_rzz(theta)
        assert stats.counts["RZZ"] == 4
        assert stats.two_qubit_count == 4
        assert stats.single_qubit_count <= 29
        report = verify_circuit(circuit, zzz_target(theta), name="zzz")
        assert report.passed and report.residual <= 1e-9


def test_expand_overhead_ratio():
    _, stats = expand_zzz_to_rzz(0.8)
    assert overhead_ratio(stats) == pytest.approx(0.25)


def test_overhead_ratio_definition():
    c = Circuit(2, (rzz(0, 1, 0.3), rz(0, 0.1)))
    assert overhead_ratio(stats_of(c)) == pytest.approx(1.0)
    many = Circuit(2, tuple(rzz(0, 1, 0.2) for _ in range(15)))
    assert overhead_ratio(stats_of(many)) == pytest.approx(1.0 / 15.0)
    with pytest.raises(ValueError):
        overhead_ratio(stats_of(Circuit(1, (rz(0, 0.1),))))


# ---------------------------------------------------------------------------
# text format


def test_text_round_trip():
    c = Circuit(
        3,
        (
            hadamard(2),
            rzz(0, 2, math.pi / 2.0),
            rz(0, -0.5),
            global_phase(-math.pi / 4.0),
        ),
    )
    text = c.to_text()
    back = circuit_from_text(text, 3)
    assert back == c
    assert np.allclose(unitary_of(back), unitary_of(c))


def test_text_format_comments_and_errors():
    c = circuit_from_text("# prep\nh 0\ncnot 0 1\n", 2)
    assert c.gates == (hadamard(0), cnot(0, 1))
    with pytest.raises(FormatError, match="line 1"):
        circuit_from_text("warp 0\n", 2)
    with pytest.raises(FormatError, match="line 2"):
        circuit_from_text("h 0\nrz 0\n", 2)  # rz needs an angle
    with pytest.raises(FormatError):
        circuit_from_text("h zero\n", 2)
