"""Sweep-based sequential optimizers and a parameter-shift Adam baseline.

Each sequential update builds the quadratic-form matrix of one gate slot and
replaces the gate with the minimizer of the corresponding eigenproblem:

* ``fqs`` -- minimum eigenvector of the full 4x4 matrix (any SU(2) gate);
* ``fraxis`` -- minimum eigenvector of the 3x3 axis matrix (pi rotations);
* ``rotosolve`` -- minimum eigenvector of the 2x2 fixed-axis matrix, read
  back as an angle (axes stay fixed for the whole run);
* ``rotoselect`` -- rotosolve plus a discrete choice among the x, y, z axes,
  sharing the identity evaluation (seven evaluations per update).

Updates whose centered matrix has spectral radius below ``skip_tol`` leave
the gate untouched: the landscape is flat there and the eigenvector carries
no information.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import smatrix
from .circuits import CircuitTemplate, EvalCounter, energy_with_replacement
from .gatealg import random_quaternion, rz_matrix

METHODS = ("fqs", "fraxis", "rotosolve", "rotoselect", "adam")
AXIS_NAMES = ("x", "y", "z")


@dataclass
class MethodConfig:
    """Hyperparameters of one optimization run."""

    method: str
    sweeps: int = 100
    skip_tol: float = 1e-12
    decomposition: str = "ryrz"
    learning_rate: float = 0.1
    iterations: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.decomposition not in ("ryrz", "rzryrz"):
            raise ValueError(f"unknown decomposition {self.decomposition!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    update_index: int
    sweep: int
    slot_id: int
    energy: float
    evals: int
    wall_ns: int = 0


@dataclass
class Trajectory:
    """Per-update energy log of one run; also carries the final parameters."""

    records: list[TrajectoryRecord] = field(default_factory=list)
    final_params: np.ndarray | None = None

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def eval_counts(self) -> np.ndarray:
        return np.array([r.evals for r in self.records])

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy

    def energy_at_budget(self, max_evals: int) -> float:
        """Last logged energy whose cumulative evaluation count fits the budget."""
        best = None
        for r in self.records:
            if r.evals <= max_evals:
                best = r.energy
            else:
                break
        if best is None:
            raise ValueError("budget below the first record")
        return best


# --- single-slot updates -------------------------------------------------


def _current_energy(s_mat: np.ndarray, q_row: np.ndarray) -> float:
    return float(q_row @ s_mat @ q_row)


def fqs_update(
    template: CircuitTemplate,
    params,
    slot_id: int,
    cost,
    counter: EvalCounter,
    skip_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Optimal replacement over all of SU(2); returns (new quaternion, energy)."""
    s = smatrix.build_fqs_matrix(template, params, slot_id, cost, counter)
    if smatrix.spectral_radius(smatrix.centered(s)) < skip_tol:
        q = np.asarray(params)[slot_id].copy()
        return q, _current_energy(s, q)
    pair = smatrix.min_eigenpair(s)
    return pair.vector, pair.value


def fraxis_update(
    template: CircuitTemplate,
    params,
    slot_id: int,
    cost,
    counter: EvalCounter,
    skip_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Optimal pi-rotation axis; returns (new quaternion (0, n), energy)."""
    s = smatrix.build_fraxis_matrix(template, params, slot_id, cost, counter)
    if smatrix.spectral_radius(smatrix.centered(s)) < skip_tol:
        q = np.asarray(params)[slot_id].copy()
        # flat landscape: every axis gives tr/3 up to skip_tol, so report the
        # current axis when the slot holds a pi rotation and tr/3 otherwise
        nrm = np.linalg.norm(q[1:])
        if nrm > 1e-9:
            axis = q[1:] / nrm
            return q, float(axis @ s @ axis)
        return q, float(np.trace(s) / 3.0)
    pair = smatrix.min_eigenpair(s)
    return np.concatenate(([0.0], pair.vector)), pair.value


def rotosolve_update(
    template: CircuitTemplate,
    params,
    slot_id: int,
    axis,
    cost,
    counter: EvalCounter,
    skip_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Optimal angle for a fixed rotation axis; returns (new quaternion, energy)."""
    m = np.asarray(axis, dtype=float)
    s = smatrix.build_nft_matrix(template, params, slot_id, m, cost, counter)
    q_row = np.asarray(params)[slot_id]
    if smatrix.spectral_radius(smatrix.centered(s)) < skip_tol:
        c = np.array([q_row[0], q_row[1:] @ m])
        return q_row.copy(), float(c @ s @ c)
    pair = smatrix.min_eigenpair(s)
    c0, c1 = pair.vector
    return np.concatenate(([c0], c1 * m)), pair.value


def rotoselect_update(
    template: CircuitTemplate,
    params,
    slot_id: int,
    cost,
    counter: EvalCounter,
    skip_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Best (axis, angle) over the x, y, z axes from seven evaluations."""
    prefix = template.prefix_amplitudes(params, slot_id)

    def ew(gate):
        return energy_with_replacement(
            template, params, slot_id, gate, cost, counter, prefix=prefix
        )

    e_id = ew(smatrix.IDENTITY_GATE)
    mats = []
    for k in range(3):
        e_plus = ew(smatrix.TYPE_B_GATES[(k, +1)])
        e_minus = ew(smatrix.TYPE_B_GATES[(k, -1)])
        mats.append(smatrix.nft_matrix_from_energies(e_id, e_plus, e_minus))

    if all(smatrix.spectral_radius(smatrix.centered(s)) < skip_tol for s in mats):
        q_row = np.asarray(params)[slot_id].copy()
        return q_row, e_id
    best_k, best_pair = 0, None
    for k, s in enumerate(mats):
        pair = smatrix.min_eigenpair(s)
        if best_pair is None or pair.value < best_pair.value:
            best_k, best_pair = k, pair
    c0, c1 = best_pair.vector
    m = smatrix.AXIS_VECTORS[AXIS_NAMES[best_k]]
    return np.concatenate(([c0], c1 * m)), best_pair.value


# --- sweep driver ---------------------------------------------------------


def initial_parameters(
    method: str, template: CircuitTemplate, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray | None]:
    """State-random initialization matched to the method's gate family.

    Returns (params, axes); axes is the per-slot rotation axis table used by
    rotosolve (None for the other methods).
    """
    d = template.num_slots
    params = np.zeros((d, 4))
    axes = None
    if method == "fqs":
        for i in range(d):
            params[i] = random_quaternion(rng).q
    elif method == "fraxis":
        for i in range(d):
            vec = rng.standard_normal(3)
            params[i, 1:] = vec / np.linalg.norm(vec)
    elif method in ("rotosolve", "rotoselect"):
        axes_idx = rng.integers(0, 3, size=d)
        angles = rng.uniform(0.0, 2.0 * np.pi, size=d)
        axes = np.zeros((d, 3))
        for i in range(d):
            axes[i] = smatrix.AXIS_VECTORS[AXIS_NAMES[axes_idx[i]]]
            params[i, 0] = np.cos(angles[i] / 2.0)
            params[i, 1:] = np.sin(angles[i] / 2.0) * axes[i]
        if method == "rotoselect":
            axes = None
    else:
        raise ValueError(f"no quaternion initialization for method {method!r}")
    return params, axes


def run_sequential(
    template: CircuitTemplate,
    cost,
    config: MethodConfig,
    *,
    initial_params: np.ndarray | None = None,
    axes: np.ndarray | None = None,
    seed: int | None = None,
    counter: EvalCounter | None = None,
) -> Trajectory:
    """Run sweeps of sequential single-slot updates in ascending slot order.

    Parameters may be given explicitly or drawn from ``seed``; rotosolve
    requires one unit axis per slot (drawn with the parameters when omitted).
    Deterministic given identical inputs.
    """
    if config.method not in ("fqs", "fraxis", "rotosolve", "rotoselect"):
        raise ValueError(f"{config.method!r} is not a sequential method")
    if initial_params is None:
        if seed is None:
            raise ValueError("need either initial parameters or a seed")
        initial_params, drawn_axes = initial_parameters(
            config.method, template, np.random.default_rng(seed)
        )
        if axes is None:
            axes = drawn_axes
    params = np.array(initial_params, dtype=float)
    if config.method == "rotosolve":
        if axes is None:
            raise ValueError("rotosolve needs one rotation axis per slot")
        axes = np.asarray(axes, dtype=float)
        if axes.shape != (template.num_slots, 3):
            raise ValueError("axis table must have shape (num_slots, 3)")
    counter = counter if counter is not None else EvalCounter()

    t0 = time.perf_counter_ns()
    traj = Trajectory()
    # the initial energy is instrumentation, not part of the update budget
    energy = cost(template.prepare_state(params))
    traj.records.append(
        TrajectoryRecord(0, 0, -1, energy, counter.count, time.perf_counter_ns() - t0)
    )

    update_index = 0
    for sweep in range(1, config.sweeps + 1):
        for slot_id in range(template.num_slots):
            if config.method == "fqs":
                new_q, energy = fqs_update(
                    template, params, slot_id, cost, counter, config.skip_tol
                )
            elif config.method == "fraxis":
                new_q, energy = fraxis_update(
                    template, params, slot_id, cost, counter, config.skip_tol
                )
            elif config.method == "rotosolve":
                new_q, energy = rotosolve_update(
                    template, params, slot_id, axes[slot_id], cost, counter, config.skip_tol
                )
            else:
                new_q, energy = rotoselect_update(
                    template, params, slot_id, cost, counter, config.skip_tol
                )
            params[slot_id] = new_q
            update_index += 1
            traj.records.append(
                TrajectoryRecord(
                    update_index, sweep, slot_id, energy, counter.count,
                    time.perf_counter_ns() - t0,
                )
            )
    traj.final_params = params
    return traj


# --- gradient-based baseline ----------------------------------------------


_RY = lambda a: np.array(
    [[np.cos(a / 2), -np.sin(a / 2)], [np.sin(a / 2), np.cos(a / 2)]], dtype=complex
)


def _slot_matrices(angles: np.ndarray, decomposition: str) -> np.ndarray:
    """Compose per-slot unitaries from the fixed-axis rotation angles.

    ``ryrz``: Rz(b) Ry(a) (Ry applied first); ``rzryrz``: Rz(c) Ry(b) Rz(a).
    """
    d = angles.shape[0]
    mats = np.empty((d, 2, 2), dtype=complex)
    if decomposition == "ryrz":
        for i in range(d):
            mats[i] = rz_matrix(angles[i, 1]) @ _RY(angles[i, 0])
    else:
        for i in range(d):
            mats[i] = rz_matrix(angles[i, 2]) @ _RY(angles[i, 1]) @ rz_matrix(angles[i, 0])
    return mats


def decomposed_energy(
    template: CircuitTemplate,
    angles: np.ndarray,
    decomposition: str,
    cost,
    counter: EvalCounter | None = None,
) -> float:
    """Cost of the circuit with slots decomposed into fixed-axis rotations."""
    state = template.prepare_from_matrices(_slot_matrices(angles, decomposition))
    if counter is not None:
        counter.increment()
    return cost(state)


def parameter_shift_gradient(
    template: CircuitTemplate,
    angles: np.ndarray,
    decomposition: str,
    cost,
    counter: EvalCounter,
) -> np.ndarray:
    """Exact gradient of every rotation angle from +-pi/2 shifted evaluations."""
    grad = np.zeros_like(angles)
    flat = angles.reshape(-1)
    g = grad.reshape(-1)
    for k in range(flat.size):
        saved = flat[k]
        flat[k] = saved + np.pi / 2
        e_plus = decomposed_energy(template, angles, decomposition, cost, counter)
        flat[k] = saved - np.pi / 2
        e_minus = decomposed_energy(template, angles, decomposition, cost, counter)
        flat[k] = saved
        g[k] = 0.5 * (e_plus - e_minus)
    return grad


def adam_baseline(
    template: CircuitTemplate,
    cost,
    config: MethodConfig,
    seed: int | None = None,
    *,
    initial_angles: np.ndarray | None = None,
    counter: EvalCounter | None = None,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Trajectory:
    """Full-gradient Adam on the angle-decomposed ansatz.

    Each iteration costs 2 x (number of angles) circuit evaluations
    (parameter-shift rule); the logged per-iteration energy is computed out
    of band and never counted toward the evaluation budget.
    """
    if config.method != "adam":
        raise ValueError("config.method must be 'adam'")
    per_slot = 2 if config.decomposition == "ryrz" else 3
    if initial_angles is None:
        if seed is None:
            raise ValueError("need either initial angles or a seed")
        rng = np.random.default_rng(seed)
        initial_angles = rng.uniform(0.0, 2.0 * np.pi, size=(template.num_slots, per_slot))
    angles = np.array(initial_angles, dtype=float)
    if angles.shape != (template.num_slots, per_slot):
        raise ValueError(f"angles must have shape ({template.num_slots}, {per_slot})")
    counter = counter if counter is not None else EvalCounter()

    t0 = time.perf_counter_ns()
    traj = Trajectory()
    energy = decomposed_energy(template, angles, config.decomposition, cost)
    traj.records.append(TrajectoryRecord(0, 0, -1, energy, counter.count))

    m = np.zeros_like(angles)
    v = np.zeros_like(angles)
    for it in range(1, config.iterations + 1):
        grad = parameter_shift_gradient(
            template, angles, config.decomposition, cost, counter
        )
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad**2
        m_hat = m / (1.0 - beta1**it)
        v_hat = v / (1.0 - beta2**it)
        angles -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        energy = decomposed_energy(template, angles, config.decomposition, cost)
        traj.records.append(
            TrajectoryRecord(it, it, -1, energy, counter.count, time.perf_counter_ns() - t0)
        )
    traj.final_params = angles
    return traj
