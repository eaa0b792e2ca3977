import json
import math

import numpy as np
import pytest

from genqsvm import (CircuitSpec, Genome, circuit_from_dict, circuit_to_dict,
                     count_gates, decode_gene, decode_genome, random_genome)
from genqsvm.errors import DataError
from genqsvm.genome import GATE_TABLE, GENE_BITS, rotation_weight


def test_gene_000_is_identity():
    gate = decode_gene([0, 0, 0, 0, 0], 0, 2, 2, 2)
    assert gate.kind == "i"


def test_gene_001_is_hadamard():
    gate = decode_gene([0, 0, 1, 0, 0], 0, 2, 2, 2)
    assert gate.kind == "h"
    assert gate.theta is None and gate.feature is None


@pytest.mark.parametrize("s3, s4, expected", [
    # direct evaluation of (pi/4) * 2^(-2^s3 - 4^s4)
    (0, 0, math.pi / 16),
    (1, 0, math.pi / 32),
    (0, 1, math.pi / 128),
    (1, 1, math.pi / 256),
])
def test_fine_rotation_weights(s3, s4, expected):
    assert rotation_weight(s3, s4, "fine") == pytest.approx(expected,
                                                            rel=1e-15)
    gate = decode_gene([1, 0, 1, s3, s4], 0, 2, 2, 2, weight_scheme="fine")
    assert gate.kind == "ry"
    assert gate.theta == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("s3, s4, expected", [
    # direct evaluation of pi / (4 * 2^s3 * 4^s4)
    (0, 0, math.pi / 4),
    (1, 0, math.pi / 8),
    (0, 1, math.pi / 16),
    (1, 1, math.pi / 32),
])
def test_coarse_rotation_weights(s3, s4, expected):
    assert rotation_weight(s3, s4) == pytest.approx(expected, rel=1e-15)
    gate = decode_gene([1, 0, 1, s3, s4], 0, 2, 2, 2)
    assert gate.kind == "ry"
    assert gate.theta == pytest.approx(expected, rel=1e-15)


def test_gene_position_assignment():
    gate = decode_gene([1, 0, 0, 0, 0], 7, 6, 6, 2)
    assert gate.qubit == 1
    assert gate.layer == 1
    assert gate.feature == 1


def test_dont_care_bits_for_fixed_gates():
    for tail in ([0, 0], [0, 1], [1, 0], [1, 1]):
        assert decode_gene([0, 0, 1, *tail], 0, 2, 2, 2).kind == "h"
        assert decode_gene([0, 1, 0, *tail], 0, 2, 2, 2).kind == "cnot"


def test_cnot_on_single_qubit_register_is_identity():
    assert decode_gene([0, 1, 0, 0, 0], 0, 1, 3, 1).kind == "i"


def test_gate_table_covers_all_patterns():
    kinds = {GATE_TABLE[(a, b, c)] for a in (0, 1) for b in (0, 1)
             for c in (0, 1)}
    assert kinds == {"i", "h", "cnot", "rx", "ry", "rz"}


def test_decode_all_zero_genome_is_empty():
    genome = Genome(np.zeros(2 * 3 * GENE_BITS, dtype=bool), 2, 3, 2)
    circuit = decode_genome(genome)
    assert circuit.gates == ()
    assert count_gates(circuit) == (0, 0)


def test_decode_sequential_qubit_assignment():
    rng = np.random.default_rng(0)
    genome = random_genome(2, 3, 2, rng)
    circuit = decode_genome(genome)
    assert len(circuit.gates) <= 6
    for gate in circuit.gates:
        assert gate.qubit == (gate.layer * 2 + gate.qubit) % 2


def test_decode_is_deterministic_and_cnots_adjacent(rng):
    genome = random_genome(6, 6, 2, rng)
    first = decode_genome(genome)
    second = decode_genome(genome)
    assert first == second
    assert len(first.gates) <= 36
    for gate in first.gates:
        if gate.kind == "cnot":
            assert first.cnot_target(gate) == (gate.qubit + 1) % 6


def test_decode_gates_in_layer_qubit_order(rng):
    for _ in range(20):
        circuit = decode_genome(random_genome(4, 5, 3, rng))
        keys = [(g.layer, g.qubit) for g in circuit.gates]
        assert keys == sorted(keys)


def test_count_gates_mixed_circuit():
    gates = (
        decode_gene([1, 0, 1, 0, 0], 0, 3, 2, 2),
        decode_gene([1, 1, 0, 0, 0], 1, 3, 2, 2),
        decode_gene([1, 0, 0, 1, 1], 2, 3, 2, 2),
        decode_gene([0, 0, 1, 0, 0], 3, 3, 2, 2),
        decode_gene([0, 1, 0, 0, 0], 4, 3, 2, 2),
        decode_gene([0, 1, 0, 0, 0], 5, 3, 2, 2),
    )
    circuit = CircuitSpec(3, 2, gates)
    assert count_gates(circuit) == (4, 2)


def test_gene_locality(rng):
    for _ in range(20):
        genome = random_genome(3, 4, 2, rng)
        i = int(rng.integers(0, 12))
        bits = genome.bits.copy()
        bits[i * GENE_BITS:(i + 1) * GENE_BITS] ^= True
        other = Genome(bits, 3, 4, 2)
        slot = (i // 3, i % 3)
        before = {(g.layer, g.qubit): g for g in decode_genome(genome).gates}
        after = {(g.layer, g.qubit): g for g in decode_genome(other).gates}
        for key in set(before) | set(after):
            if key != slot:
                assert before.get(key) == after.get(key)


@pytest.mark.parametrize("scheme, allowed", [
    ("coarse", {math.pi / 4, math.pi / 8, math.pi / 16, math.pi / 32}),
    ("fine", {math.pi / 16, math.pi / 32, math.pi / 128, math.pi / 256}),
])
def test_theta_values_closed_set(rng, scheme, allowed):
    seen = set()
    for _ in range(50):
        circuit = decode_genome(random_genome(4, 4, 2, rng),
                                weight_scheme=scheme)
        for gate in circuit.gates:
            if gate.theta is not None:
                assert gate.theta in allowed
                seen.add(gate.theta)
    assert seen == allowed


def test_random_genome_reproducible_and_sized():
    a = random_genome(6, 6, 2, np.random.default_rng(42))
    b = random_genome(6, 6, 2, np.random.default_rng(42))
    assert a == b
    assert a.bits.shape == (180,)


def test_random_genome_bit_balance():
    rng = np.random.default_rng(7)
    total = np.zeros(180)
    n = 10_000
    for _ in range(n):
        total += random_genome(6, 6, 2, rng).bits
    assert 0.48 <= total.sum() / (n * 180) <= 0.52


def test_gate_budget_invariant(rng):
    for _ in range(50):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(1, 5))
        circuit = decode_genome(random_genome(m, n, 2, rng))
        n_local, n_cnot = count_gates(circuit)
        assert n_local + n_cnot <= m * n


def test_genome_validation():
    with pytest.raises(ValueError):
        Genome(np.zeros(10, dtype=bool), 2, 2, 2)
    with pytest.raises(ValueError):
        Genome(np.zeros(20, dtype=bool), 2, 2, 0)


def test_genome_string_round_trip(rng):
    genome = random_genome(3, 3, 2, rng)
    text = genome.to_string()
    assert set(text) <= {"0", "1"} and len(text) == 45
    assert Genome.from_string(text, 3, 3, 2) == genome
    assert Genome.from_dict(genome.to_dict()) == genome


def test_circuit_json_round_trip(rng):
    for _ in range(10):
        circuit = decode_genome(random_genome(4, 4, 3, rng))
        payload = json.loads(json.dumps(circuit_to_dict(circuit)))
        assert circuit_from_dict(payload) == circuit


def test_circuit_json_serialization_shape(rng):
    circuit = decode_genome(random_genome(4, 4, 3, rng))
    doc = circuit_to_dict(circuit)
    assert doc["num_qubits"] == 4 and doc["num_features"] == 3
    for entry in doc["gates"]:
        if entry["kind"] == "cnot":
            assert entry["target"] == (entry["control"] + 1) % 4
        elif entry["kind"] != "h":
            assert 0 <= entry["feature"] < 3


def test_circuit_json_rejects_bad_documents():
    with pytest.raises(DataError):
        circuit_from_dict({"num_qubits": 2, "gates": []})
    with pytest.raises(DataError):
        circuit_from_dict({"num_qubits": 2, "num_features": 1, "gates": [
            {"kind": "cnot", "control": 0, "target": 0, "layer": 0}]})
    with pytest.raises(DataError):
        circuit_from_dict({"num_qubits": 2, "num_features": 1, "gates": [
            {"kind": "swap", "qubit": 0, "layer": 0}]})
