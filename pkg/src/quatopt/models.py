"""Cost-function builders: mixed-field Ising chain, 1-local Z, infidelity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simcore import Observable, StateVector, expectation, fidelity

DEFAULT_TRANSVERSE_FIELD = 1.0 / np.sqrt(2.0)


def mixed_field_ising(
    num_qubits: int,
    j: float = 1.0,
    h: float = DEFAULT_TRANSVERSE_FIELD,
    periodic: bool = True,
) -> Observable:
    """1-d mixed-field Ising chain: j * sum_i Z_i Z_{i+1} + h * sum_i (Y_i + Z_i).

    Periodic chains include the wrap bond (n-1, 0); for n = 2 the two bonds
    coincide and merge into a single ZZ word with coefficient 2 j.
    """
    if num_qubits < 2:
        raise ValueError("the Ising chain needs at least 2 sites")
    terms = []
    bonds = num_qubits if periodic else num_qubits - 1
    for i in range(bonds):
        w = ["I"] * num_qubits
        w[i] = "Z"
        w[(i + 1) % num_qubits] = "Z"
        terms.append((j, "".join(w)))
    for i in range(num_qubits):
        for letter in "YZ":
            w = ["I"] * num_qubits
            w[i] = letter
            terms.append((h, "".join(w)))
    return Observable.build(0.0, terms)


def local_z_observable(num_qubits: int) -> Observable:
    """Z on qubit 0, identity elsewhere."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    return Observable.build(0.0, [(1.0, "Z" + "I" * (num_qubits - 1))])


class ObservableCost:
    """Cost functional <psi|H|psi> for a fixed observable."""

    def __init__(self, obs: Observable):
        self.observable = obs

    def __call__(self, state: StateVector) -> float:
        return expectation(state, self.observable)


class InfidelityCost:
    """Cost functional 1 - |<target|psi>|^2.

    Equals the expectation of the projector observable I - |target><target|,
    evaluated directly through the overlap instead of a Pauli expansion.
    """

    def __init__(self, target: StateVector):
        self.target = target

    def __call__(self, state: StateVector) -> float:
        return 1.0 - fidelity(state, self.target)


def infidelity_cost(target: StateVector) -> InfidelityCost:
    return InfidelityCost(target)


def observable_cost(obs: Observable) -> ObservableCost:
    return ObservableCost(obs)


def exact_ground_energy(obs: Observable, num_qubits: int) -> float:
    """Minimum eigenvalue of the observable from a dense eigensolve (n <= 14)."""
    if num_qubits > 14:
        raise ValueError("dense reference solve limited to n <= 14")
    mat = obs.dense(num_qubits)
    return float(np.linalg.eigvalsh(mat)[0])


@dataclass
class CostSpec:
    """Serializable description of a cost function.

    kind "ising" and "local_z" map to observable expectations; "infidelity"
    carries a target state (usually drawn per run, so it is excluded from
    config echoes and regenerated from the run seed).
    """

    kind: str
    num_qubits: int
    j: float = 1.0
    h: float = DEFAULT_TRANSVERSE_FIELD
    periodic: bool = True
    target: StateVector | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("ising", "local_z", "infidelity"):
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind == "infidelity" and self.target is not None:
            if self.target.num_qubits != self.num_qubits:
                raise ValueError("target register size mismatch")

    def observable(self) -> Observable | None:
        if self.kind == "ising":
            return mixed_field_ising(self.num_qubits, self.j, self.h, self.periodic)
        if self.kind == "local_z":
            return local_z_observable(self.num_qubits)
        return None

    def cost(self):
        if self.kind == "infidelity":
            if self.target is None:
                raise ValueError("infidelity cost needs a target state")
            return infidelity_cost(self.target)
        return observable_cost(self.observable())

    def reference_energy(self) -> float:
        """Exact optimum of the cost (ground energy, or 0 for infidelity)."""
        if self.kind == "infidelity":
            return 0.0
        return exact_ground_energy(self.observable(), self.num_qubits)
