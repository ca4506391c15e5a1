"""Ansatz templates, circuit evaluation with one slot replaced, light cones.

Three template families are provided (selectable by name):

* ``alternating`` -- per layer: a column of n single-qubit slots, brickwork
  CZ pairs (0,1),(2,3),..., a second slot column, CZ pairs (1,2),(3,4),...
  plus the wrap pair (n-1,0). 2nL slots total. Within the second column the
  slot on qubit 0 carries the layer's last id, so ascending slot id equals
  ascending position in the element list.
* ``cyclic`` -- per layer: n slots followed by the CZ chain
  (0,1),(1,2),...,(n-2,n-1),(n-1,0); one extra slot column after the last
  layer. n(L+1) slots.
* ``ladder`` -- same as cyclic without the wrap CZ. n(L+1) slots.

Update order of sequential optimizers is ascending slot id throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gatealg
from .simcore import StateVector, _apply_1q, _apply_cz, is_unitary

FAMILIES = ("alternating", "cyclic", "ladder")


class EvalCounter:
    """Counts circuit-expectation evaluations; one tick per cost evaluation."""

    def __init__(self):
        self.count = 0

    def increment(self, amount: int = 1):
        self.count += amount

    def __repr__(self):
        return f"EvalCounter({self.count})"


@dataclass(frozen=True)
class GateSlot:
    slot_id: int
    qubit: int
    layer: int


@dataclass(frozen=True)
class Entangler:
    """Fixed CZ between two qubits (symmetric, orientation irrelevant)."""

    a: int
    b: int


class CircuitTemplate:
    """Immutable gate skeleton: ordered slots and entanglers on n qubits."""

    def __init__(self, family: str, num_qubits: int, num_layers: int, elements):
        self.family = family
        self.num_qubits = num_qubits
        self.num_layers = num_layers
        self.elements = tuple(elements)
        slots = [e for e in self.elements if isinstance(e, GateSlot)]
        ids = sorted(s.slot_id for s in slots)
        if ids != list(range(len(slots))):
            raise ValueError("slot ids must cover 0..D-1 without gaps")
        self.num_slots = len(slots)
        self._slot_by_id = {s.slot_id: s for s in slots}
        self._pos_by_id = {
            e.slot_id: i for i, e in enumerate(self.elements) if isinstance(e, GateSlot)
        }
        if sorted(self._pos_by_id.values()) != [
            self._pos_by_id[d] for d in range(self.num_slots)
        ]:
            raise ValueError("element order must follow ascending slot id")

    def slot(self, slot_id: int) -> GateSlot:
        return self._slot_by_id[slot_id]

    def slot_position(self, slot_id: int) -> int:
        return self._pos_by_id[slot_id]

    def _check_params(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_slots, 4):
            raise ValueError(
                f"expected parameter array of shape ({self.num_slots}, 4), got {params.shape}"
            )
        norms = np.linalg.norm(params, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("slot quaternions must be unit vectors")
        return params

    # raw-amplitude engine -------------------------------------------------

    def _run_elements(self, amps, params, start: int, stop: int) -> np.ndarray:
        n = self.num_qubits
        for e in self.elements[start:stop]:
            if isinstance(e, GateSlot):
                amps = _apply_1q(amps, n, e.qubit, gatealg.to_matrix(params[e.slot_id]))
            else:
                amps = _apply_cz(amps, n, e.a, e.b)
        return amps

    def prefix_amplitudes(self, params, slot_id: int) -> np.ndarray:
        """Amplitudes after all elements strictly before the slot's position."""
        params = self._check_params(params)
        amps = np.zeros(2**self.num_qubits, dtype=complex)
        amps[0] = 1.0
        return self._run_elements(amps, params, 0, self.slot_position(slot_id))

    def prepare_state(self, params) -> StateVector:
        """Apply every element in order to the all-zeros state."""
        params = self._check_params(params)
        amps = np.zeros(2**self.num_qubits, dtype=complex)
        amps[0] = 1.0
        return StateVector(self.num_qubits, self._run_elements(amps, params, 0, len(self.elements)))

    def prepare_from_matrices(self, slot_matrices) -> StateVector:
        """Prepare with explicit 2x2 unitaries per slot (entanglers unchanged)."""
        mats = np.asarray(slot_matrices, dtype=complex)
        if mats.shape != (self.num_slots, 2, 2):
            raise ValueError("need one 2x2 matrix per slot")
        n = self.num_qubits
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
        for e in self.elements:
            if isinstance(e, GateSlot):
                amps = _apply_1q(amps, n, e.qubit, mats[e.slot_id])
            else:
                amps = _apply_cz(amps, n, e.a, e.b)
        return StateVector(n, amps)

    def __repr__(self):
        return (
            f"CircuitTemplate({self.family!r}, n={self.num_qubits}, "
            f"layers={self.num_layers}, slots={self.num_slots})"
        )


def build_template(family: str, num_qubits: int, num_layers: int) -> CircuitTemplate:
    """Construct one of the named ansatz families."""
    n, layers = num_qubits, num_layers
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if n < 2 or layers < 1:
        raise ValueError("templates need n >= 2 and at least one layer")
    elems: list = []
    if family == "alternating":
        for layer in range(layers):
            base = 2 * n * layer
            for q in range(n):
                elems.append(GateSlot(base + q, q, layer))
            for q in range(0, n - 1, 2):
                elems.append(Entangler(q, q + 1))
            for q in range(1, n):
                elems.append(GateSlot(base + n + q - 1, q, layer))
            elems.append(GateSlot(base + 2 * n - 1, 0, layer))
            for q in range(1, n - 1, 2):
                elems.append(Entangler(q, q + 1))
            elems.append(Entangler(n - 1, 0))
    else:
        for layer in range(layers):
            for q in range(n):
                elems.append(GateSlot(n * layer + q, q, layer))
            for q in range(n - 1):
                elems.append(Entangler(q, q + 1))
            if family == "cyclic":
                elems.append(Entangler(n - 1, 0))
        for q in range(n):
            elems.append(GateSlot(n * layers + q, q, layers))
    return CircuitTemplate(family, n, layers, elems)


def energy_with_replacement(
    template: CircuitTemplate,
    params,
    slot_id: int,
    replacement,
    cost,
    counter: EvalCounter,
    prefix: np.ndarray | None = None,
) -> float:
    """Cost of the circuit with one slot's gate substituted, all else fixed.

    Counts one evaluation. ``prefix`` may carry precomputed amplitudes of
    everything before the slot (for the same template and parameters); matrix
    builders use this to share the common part of their evaluation batches.
    """
    if slot_id not in template._pos_by_id:
        raise ValueError(f"slot {slot_id} not in template")
    u = np.asarray(replacement, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("replacement must be a 2x2 unitary")
    params = template._check_params(params)
    pos = template.slot_position(slot_id)
    if prefix is None:
        amps = np.zeros(2**template.num_qubits, dtype=complex)
        amps[0] = 1.0
        amps = template._run_elements(amps, params, 0, pos)
    else:
        amps = prefix
    amps = _apply_1q(amps, template.num_qubits, template.slot(slot_id).qubit, u)
    amps = template._run_elements(amps, params, pos + 1, len(template.elements))
    value = cost(StateVector(template.num_qubits, amps))
    counter.increment()
    return value


# --- light cones over the 2-qubit block structure of the alternating family ---


@dataclass(frozen=True)
class LightCones:
    """Causal structure of one block of the alternating brickwork.

    Columns are the brickwork half-layers (two per template layer); the final
    column's blocks define the subsystems S_k referenced by ``backward_pairs``.
    """

    slot_id: int
    column: int
    num_columns: int
    block: tuple[int, ...]
    forward_qubits: frozenset[int]
    backward_qubits: frozenset[int]
    subsystems: tuple[tuple[int, ...], ...]
    backward_pairs: tuple[tuple[int, int], ...]

    def subsystem_range_qubits(self, k: int, k_prime: int) -> tuple[int, ...]:
        """Qubits of the contiguous union S_k ... S_k'."""
        out: list[int] = []
        for j in range(k, k_prime + 1):
            out.extend(q for q in self.subsystems[j] if q not in out)
        return tuple(out)


def column_blocks(column: int, n: int) -> list[tuple[int, int]]:
    """2-qubit blocks of one brickwork column: even columns are aligned with
    the register, odd columns shifted by one qubit with the wrap block."""
    if column % 2 == 0:
        return [(q, q + 1) for q in range(0, n, 2)]
    return [(2 * k + 1, (2 * k + 2) % n) for k in range(n // 2)]


def brickwork_light_cones(
    num_qubits: int, num_columns: int, column: int, qubit: int, slot_id: int = -1
) -> LightCones:
    """Causal cones of the brickwork block in the given column holding a qubit."""
    n = num_qubits
    if n % 2:
        raise ValueError("block bookkeeping needs an even qubit count")
    if not 0 <= column < num_columns:
        raise ValueError("column out of range")

    def block_of(col: int, q: int) -> tuple[int, int]:
        if col % 2 == 0:
            return (q - q % 2, q - q % 2 + 1)
        if q == 0:
            return (n - 1, 0)
        k = (q - 1) // 2
        return (2 * k + 1, (2 * k + 2) % n)

    block = block_of(column, qubit)

    forward = set(block)
    for col in range(column + 1, num_columns):
        grown = set(forward)
        for blk in column_blocks(col, n):
            if forward & set(blk):
                grown |= set(blk)
        forward = grown

    backward = set(block)
    for col in range(column - 1, -1, -1):
        grown = set(backward)
        for blk in column_blocks(col, n):
            if backward & set(blk):
                grown |= set(blk)
        backward = grown

    subsystems = tuple(tuple(b) for b in column_blocks(num_columns - 1, n))
    in_cone = [k for k, blk in enumerate(subsystems) if backward & set(blk)]
    pairs = tuple((k, kp) for i, k in enumerate(in_cone) for kp in in_cone[i:])
    return LightCones(
        slot_id=slot_id,
        column=column,
        num_columns=num_columns,
        block=block,
        forward_qubits=frozenset(forward),
        backward_qubits=frozenset(backward),
        subsystems=subsystems,
        backward_pairs=pairs,
    )


def light_cones(template: CircuitTemplate, slot_id: int) -> LightCones:
    """Forward/backward light cones of the 2-qubit block holding a slot."""
    if template.family != "alternating":
        raise ValueError("light cones are defined for the alternating family")
    n = template.num_qubits
    slot = template.slot(slot_id)
    within = slot_id - 2 * n * slot.layer
    column = 2 * slot.layer + (0 if within < n else 1)
    return brickwork_light_cones(
        n, 2 * template.num_layers, column, slot.qubit, slot_id
    )
