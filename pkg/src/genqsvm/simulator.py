"""Exact statevector simulation of feature-map circuits and their kernels.

States are complex vectors of length ``2**num_qubits`` with qubit ``q``
mapped to bit ``q`` of the basis index (qubit 0 is the least significant
bit).  Gates act in place with stride-indexed views, so a local gate costs
O(2^M) and no full unitary is ever materialized.  All state routines are
batched over input rows: a Gram matrix costs one pass of gate applications
per point set, not one per pair.

Rotations use the full-angle convention ``R_a(t) = exp(-i * t * sigma_a)``
with ``t = theta * x[feature]``.
"""
from __future__ import annotations

import numpy as np

from .errors import CapacityError
from .genome import CircuitSpec

DEFAULT_MAX_QUBITS = 20

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _qubit_view(states: np.ndarray, num_qubits: int, qubit: int) -> np.ndarray:
    # (L, 2^M) -> (L, high, 2, low) with the size-2 axis holding `qubit`
    length = states.shape[0]
    low = 1 << qubit
    high = 1 << (num_qubits - qubit - 1)
    return states.reshape(length, high, 2, low)


def _apply_rotation(states: np.ndarray, num_qubits: int, qubit: int,
                    kind: str, angles: np.ndarray) -> None:
    view = _qubit_view(states, num_qubits, qubit)
    if kind == "rz":
        phase = np.exp(-1j * angles)[:, None, None]
        view[:, :, 0, :] *= phase
        view[:, :, 1, :] *= phase.conj()
        return
    cos = np.cos(angles)[:, None, None]
    sin = np.sin(angles)[:, None, None]
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :]
    if kind == "rx":
        view[:, :, 0, :] = cos * a0 - 1j * sin * a1
        view[:, :, 1, :] = -1j * sin * a0 + cos * a1
    else:  # ry
        view[:, :, 0, :] = cos * a0 - sin * a1
        view[:, :, 1, :] = sin * a0 + cos * a1


def _apply_hadamard(states: np.ndarray, num_qubits: int, qubit: int) -> None:
    view = _qubit_view(states, num_qubits, qubit)
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :]
    view[:, :, 0, :] = (a0 + a1) * _INV_SQRT2
    view[:, :, 1, :] = (a0 - a1) * _INV_SQRT2


def _apply_cnot(states: np.ndarray, num_qubits: int, control: int,
                target: int) -> None:
    view = states.reshape((states.shape[0],) + (2,) * num_qubits)
    axis_c = 1 + (num_qubits - 1 - control)
    axis_t = 1 + (num_qubits - 1 - target)
    sel = [slice(None)] * (num_qubits + 1)
    sel[axis_c] = 1
    sel = tuple(sel)
    flip_axis = axis_t - 1 if axis_t > axis_c else axis_t
    view[sel] = np.flip(view[sel], axis=flip_axis).copy()


def feature_states(circuit: CircuitSpec, X,
                   max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Map each row of ``X`` through the circuit, starting from |0...0>.

    Returns an array of shape ``(len(X), 2**num_qubits)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != circuit.num_features:
        raise ValueError(
            f"expected feature vectors of length {circuit.num_features}, "
            f"got {X.shape[1]}"
        )
    if circuit.num_qubits > max_qubits:
        raise CapacityError(
            f"simulating {circuit.num_qubits} qubits exceeds the cap of "
            f"{max_qubits}"
        )
    states = np.zeros((X.shape[0], 1 << circuit.num_qubits),
                      dtype=np.complex128)
    states[:, 0] = 1.0
    for gate in circuit.gates:
        if gate.kind == "h":
            _apply_hadamard(states, circuit.num_qubits, gate.qubit)
        elif gate.kind == "cnot":
            _apply_cnot(states, circuit.num_qubits, gate.qubit,
                        circuit.cnot_target(gate))
        else:
            _apply_rotation(states, circuit.num_qubits, gate.qubit, gate.kind,
                            gate.theta * X[:, gate.feature])
    return states


def feature_state(circuit: CircuitSpec, x,
                  max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """State vector for a single feature vector ``x``."""
    return feature_states(circuit, np.atleast_2d(x), max_qubits)[0]


def kernel(circuit: CircuitSpec, x, xp,
           max_qubits: int = DEFAULT_MAX_QUBITS) -> float:
    """Real part of the state overlap between two mapped points."""
    states = feature_states(circuit, np.vstack([np.atleast_1d(x),
                                                np.atleast_1d(xp)]), max_qubits)
    value = np.vdot(states[0], states[1]).real
    return float(np.clip(value, -1.0, 1.0))


def kernel_squared(circuit: CircuitSpec, x, xp,
                   max_qubits: int = DEFAULT_MAX_QUBITS) -> float:
    """Squared magnitude of the state overlap (comparison mode)."""
    states = feature_states(circuit, np.vstack([np.atleast_1d(x),
                                                np.atleast_1d(xp)]), max_qubits)
    value = np.abs(np.vdot(states[0], states[1])) ** 2
    return float(np.clip(value, -1.0, 1.0))


def gram_matrix(circuit: CircuitSpec, rows, cols=None, squared: bool = False,
                max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Kernel values between every row point and every column point.

    ``cols=None`` reuses the row states, giving the square training Gram.
    Each point is mapped through the circuit once regardless of how many
    pairs it participates in.
    """
    row_states = feature_states(circuit, rows, max_qubits)
    if cols is None:
        col_states = row_states
    else:
        col_states = feature_states(circuit, cols, max_qubits)
    overlaps = row_states.conj() @ col_states.T
    values = np.abs(overlaps) ** 2 if squared else overlaps.real
    return np.clip(values, -1.0, 1.0)


def write_gram_csv(gram: np.ndarray, path) -> None:
    """Dump a Gram matrix row-major at full precision, no header."""
    np.savetxt(path, np.asarray(gram, dtype=np.float64), fmt="%.17g",
               delimiter=",")
