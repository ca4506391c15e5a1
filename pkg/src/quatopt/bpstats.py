"""Trainability statistics: spectral-radius moments and the two bound checks.

The central quantity is r(S_c), the spectral radius of the centered
quadratic-form matrix of one probed gate slot. Its second moment over
randomly initialized circuits measures how much a single sequential update
can move the cost; exponential decay of this moment with qubit count is the
flat-landscape regime.

Two closed-form bounds are evaluated numerically:

* an upper bound that applies when the circuit before or after the probed
  slot is Haar-random over the whole register (checked against Monte Carlo
  with exact Haar unitaries on both sides);
* a lower bound for brickwork circuits of Haar 2-qubit blocks with a few-body
  cost, driven by the light-cone structure of the probed block.

``epsilon`` is the squared Hilbert-Schmidt distance from the trace-normalized
identity, tr[(M - tr(M) I / d)^2].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import gatealg, smatrix
from .circuits import EvalCounter, LightCones, build_template, column_blocks
from .models import infidelity_cost, local_z_observable, observable_cost
from .randhaar import haar_state, haar_unitary, make_rng
from .simcore import (
    Observable,
    StateVector,
    _apply_1q,
    _apply_2q,
    observable_matvec,
)

_CHUNK = 64  # fixed chunk size so results do not depend on worker count


# --- running statistics ----------------------------------------------------


@dataclass
class RunningMoments:
    """Numerically stable one-pass mean/variance accumulator (mergeable)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "RunningMoments"):
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta**2 * self.count * other.count / total
        self.count = total

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return 0.0
        return float(np.sqrt(self.m2 / (self.count - 1) / self.count))


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    samples: int
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    side: str  # "upper" or "lower"
    estimate: MomentEstimate
    margin: float
    passed: bool
    bound_stderr: float = 0.0


# --- small linear-algebra helpers -------------------------------------------


def epsilon(mat) -> float:
    """Squared Hilbert-Schmidt distance of M from (tr M / d) I."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("epsilon needs a square matrix")
    d = m.shape[0]
    val = np.trace(m @ m) - np.trace(m) ** 2 / d
    if abs(val.imag) > 1e-9:
        raise ValueError("epsilon is defined for matrices with real tr[M^2]")
    return float(val.real)


def reduced_density_matrix(state: StateVector, qubits) -> np.ndarray:
    """Partial trace of a pure state down to the given qubits.

    The first listed qubit becomes the least-significant bit of the reduced
    index, matching the register convention.
    """
    qubits = list(qubits)
    n = state.num_qubits
    psi = state.amplitudes.reshape([2] * n)
    axes = [n - 1 - q for q in reversed(qubits)]
    rest = [ax for ax in range(n) if ax not in axes]
    k = psi.transpose(axes + rest).reshape(2 ** len(qubits), -1)
    return k @ k.conj().T


def varsigma_set(p: int, axis=None) -> list[np.ndarray]:
    """Gate basis of the p-dimensional quadratic form.

    p=4: (I, -iX, -iY, -iZ); p=3: the pure rotations (-iX, -iY, -iZ);
    p=2: (I, -i axis.sigma) for a fixed unit axis.
    """
    vs = list(gatealg.VARSIGMA)
    if p == 4:
        return vs
    if p == 3:
        return vs[1:]
    if p == 2:
        if axis is None:
            raise ValueError("p=2 needs a rotation axis")
        m = np.asarray(axis, dtype=float)
        if abs(np.linalg.norm(m) - 1.0) > 1e-8:
            raise ValueError("rotation axis must be a unit vector")
        pauli = -1j * (m[0] * (1j * vs[1]) + m[1] * (1j * vs[2]) + m[2] * (1j * vs[3]))
        return [np.eye(2, dtype=complex), pauli]
    raise ValueError("p must be 2, 3 or 4")


def smatrix_from_environment(
    psi1: np.ndarray,
    num_qubits: int,
    target_qubit: int,
    apply_after,
    h_matvec,
    p: int = 4,
    axis=None,
) -> np.ndarray:
    """Exact p x p quadratic-form matrix from the split state/observable view.

    ``psi1`` is the state right before the probed gate, ``apply_after`` maps
    amplitudes through everything after it, and ``h_matvec`` applies the
    observable. Entries are Re <psi1| g_mu^dag H' g_nu |psi1> for the gate
    basis elements g of :func:`varsigma_set`.
    """
    vs = varsigma_set(p, axis)
    cols = []
    for g in vs:
        v = apply_after(_apply_1q(psi1, num_qubits, target_qubit, g))
        cols.append(v)
    v_mat = np.column_stack(cols)
    hv = np.column_stack([h_matvec(v_mat[:, i]) for i in range(p)])
    s = (v_mat.conj().T @ hv).real
    return 0.5 * (s + s.T)


# --- second moment of the spectral radius over random circuits --------------


def _radius_sq(s: np.ndarray) -> float:
    return smatrix.spectral_radius(smatrix.centered(s)) ** 2


def _random_params(template, rng) -> np.ndarray:
    vecs = rng.standard_normal((template.num_slots, 4))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def _moment_chunk(args) -> RunningMoments:
    family, n, layers, cost_kind, slot_id, seed, start, size = args
    template = build_template(family, n, layers)
    obs = local_z_observable(n) if cost_kind == "local" else None
    acc = RunningMoments()
    for k in range(start, start + size):
        rng = make_rng(seed, stream=k)
        params = _random_params(template, rng)
        if cost_kind == "global":
            cost = infidelity_cost(haar_state(n, rng))
        else:
            cost = observable_cost(obs)
        s = smatrix.build_fqs_matrix(template, params, slot_id, cost, EvalCounter())
        acc.add(_radius_sq(s))
    return acc


def second_moment_spectral_radius(
    family: str,
    num_qubits: int,
    layers: int,
    cost_kind: str,
    slot_id: int = 0,
    samples: int = 1000,
    seed: int = 0,
    jobs: int = 1,
) -> MomentEstimate:
    """E[r(S_c)^2] over fully random slot parameters (fresh Haar target per
    sample for the global cost), probing one slot of the template.

    Results are independent of ``jobs``: the sample loop is chunked with one
    RNG substream per sample and merged in a fixed order.
    """
    if cost_kind not in ("global", "local"):
        raise ValueError("cost_kind must be 'global' or 'local'")
    tasks = [
        (family, num_qubits, layers, cost_kind, slot_id, seed, start, min(_CHUNK, samples - start))
        for start in range(0, samples, _CHUNK)
    ]
    if jobs > 1 and len(tasks) > 1:
        with get_context("fork").Pool(jobs) as pool:
            parts = pool.map(_moment_chunk, tasks)
    else:
        parts = [_moment_chunk(t) for t in tasks]
    acc = RunningMoments()
    for part in parts:
        acc.merge(part)
    return MomentEstimate(
        acc.mean,
        acc.stderr,
        acc.count,
        config={
            "family": family,
            "n": num_qubits,
            "layers": layers,
            "cost": cost_kind,
            "slot": slot_id,
            "seed": seed,
        },
    )


# --- theorem-style bound evaluators ----------------------------------------


def _embed_single(op: np.ndarray, target: int, num_qubits: int) -> np.ndarray:
    full = np.array([[1.0 + 0j]])
    for q in range(num_qubits - 1, -1, -1):
        full = np.kron(full, op if q == target else np.eye(2, dtype=complex))
    return full


def _coef(p: int, mu: int, nu: int) -> float:
    return p * (-1.0) ** (1 - (mu == nu)) - 2.0


def haar_sandwich_moment(
    num_qubits: int,
    obs: Observable,
    input_state: StateVector,
    p: int = 4,
    axis=None,
    samples: int = 10000,
    seed: int = 0,
    target_qubit: int = 0,
) -> MomentEstimate:
    """Empirical E[r(S_c)^2] with independent Haar unitaries before and after
    the probed gate."""
    d = 2**num_qubits
    h_dense = obs.dense(num_qubits)
    acc = RunningMoments()
    for k in range(samples):
        rng = make_rng(seed, stream=k)
        u1 = haar_unitary(d, rng)
        u2 = haar_unitary(d, rng)
        psi1 = u1 @ input_state.amplitudes
        s = smatrix_from_environment(
            psi1,
            num_qubits,
            target_qubit,
            lambda v: u2 @ v,
            lambda v: h_dense @ v,
            p=p,
            axis=axis,
        )
        acc.add(_radius_sq(s))
    return MomentEstimate(
        acc.mean,
        acc.stderr,
        acc.count,
        config={"n": num_qubits, "p": p, "seed": seed, "samples": samples},
    )


def theorem1_bound(
    design: str,
    num_qubits: int,
    obs: Observable,
    input_state: StateVector,
    p: int = 4,
    axis=None,
    samples: int = 10000,
    bound_samples: int = 4000,
    seed: int = 0,
    target_qubit: int = 0,
) -> BoundReport:
    """Upper bound on E[r(S_c)^2] when one side of the probed slot is a
    2-design, checked against the all-Haar Monte Carlo estimate.

    ``design`` selects which side satisfies the 2-design hypothesis ("U1":
    the circuit before the slot, "U2": after). The residual average over the
    other side is itself estimated with ``bound_samples`` Haar draws using
    dense matrices.
    """
    if design not in ("U1", "U2"):
        raise ValueError("design must be 'U1' or 'U2'")
    if num_qubits > 8:
        raise ValueError("dense bound evaluation limited to n <= 8")
    d = 2**num_qubits
    vs = varsigma_set(p, axis)
    embedded = [_embed_single(g, target_qubit, num_qubits) for g in vs]
    h_dense = obs.dense(num_qubits)
    tr_h2 = obs.trace_squared_op(num_qubits)
    tr_h = obs.trace(num_qubits)
    rng = make_rng(seed, stream=2**32)  # distinct from the per-sample streams

    inner = RunningMoments()
    if design == "U1":
        delta = 1.0 - 1.0 / d  # pure input: tr[rho^2] = 1
        lead = p**2 * tr_h2 * delta / (2.0 * (d**2 - 1))
        mm = [
            [embedded[mu] @ embedded[nu].conj().T for nu in range(p)] for mu in range(p)
        ]
        for _ in range(bound_samples):
            u2 = haar_unitary(d, rng)
            hc = u2.conj().T @ h_dense @ u2
            tot = 0.0
            for mu in range(p):
                for nu in range(p):
                    x = hc @ mm[mu][nu]
                    y = hc @ mm[mu][nu].conj().T
                    tot += _coef(p, mu, nu) * 2.0 * np.einsum("ij,ji->", x, y).real
            inner.add(tot)
        scale = delta / (4.0 * p * (d**2 - 1))
    else:
        delta = tr_h2 - tr_h**2 / d
        lead = p**2 * 1.0 * delta / (2.0 * (d**2 - 1))  # tr[rho_in^2] = 1
        local = [[vs[mu].conj().T @ vs[nu] for nu in range(p)] for mu in range(p)]
        for _ in range(bound_samples):
            u1 = haar_unitary(d, rng)
            psi = u1 @ input_state.amplitudes
            rho_t = reduced_density_matrix(
                StateVector(num_qubits, psi), [target_qubit]
            )
            tot = 0.0
            for mu in range(p):
                for nu in range(p):
                    z = np.trace(rho_t @ local[mu][nu])
                    tot += _coef(p, mu, nu) * 2.0 * (abs(z) ** 2)
            inner.add(tot)
        scale = delta / (4.0 * p * (d**2 - 1))

    bound = float(lead + scale * inner.mean)
    bound_stderr = float(abs(scale) * inner.stderr)
    est = haar_sandwich_moment(
        num_qubits, obs, input_state, p, axis, samples, seed, target_qubit
    )
    margin = bound - est.mean
    passed = est.mean <= bound + 3.0 * est.stderr
    return BoundReport(bound, "upper", est, margin, passed, bound_stderr)


def theorem2_bound(
    num_qubits: int,
    block_size: int,
    num_layers: int,
    layer: int,
    p: int,
    obs: Observable,
    input_state: StateVector,
    cones: LightCones,
) -> float:
    """Light-cone lower bound on E[r(S_c)^2] for brickwork 2-design blocks.

        (p+2)(p-1) 2^{m(l+1)-1} / (p (2^{2m}-1)^2 (2^m+1)^{L+l})
            * sum_{i in cone} sum_{k <= k'} c_i^2 eps(rho_{k,k'}) eps(h_i)

    with m the block size, l the probed block's layer (1-based), L the total
    layer count, eps the squared Hilbert-Schmidt distance from the
    trace-normalized identity. Hamiltonian terms must touch at most m qubits;
    only terms supported inside the forward cone contribute, and the reduced
    input states run over contiguous unions of final-layer subsystems that
    intersect the backward cone.
    """
    m, l, layers = block_size, layer, num_layers
    if l < 1 or l > layers:
        raise ValueError("layer must be between 1 and the layer count")
    for _, word in obs.terms:
        if len(word.support) > m:
            raise ValueError(f"term {word} acts on more than {m} qubits")
    pref = (
        (p + 2)
        * (p - 1)
        * 2.0 ** (m * (l + 1) - 1)
        / (p * (2.0 ** (2 * m) - 1) ** 2 * (2.0**m + 1) ** (layers + l))
    )
    total = 0.0
    forward = cones.forward_qubits
    for coeff, word in obs.terms:
        if not set(word.support) <= forward:
            continue
        eps_h = epsilon(word.restricted_to_support())
        for k, kp in cones.backward_pairs:
            qubits = cones.subsystem_range_qubits(k, kp)
            eps_rho = epsilon(reduced_density_matrix(input_state, qubits))
            total += coeff**2 * eps_rho * eps_h
    return float(pref * total)


def _block_chunk(args) -> RunningMoments:
    n, num_columns, obs, p, seed, start, size = args
    cols = [column_blocks(c, n) for c in range(num_columns)]
    acc = RunningMoments()
    dim = 2**n
    for k in range(start, start + size):
        rng = make_rng(seed, stream=k)
        w_b = haar_unitary(4, rng)
        w_a = haar_unitary(4, rng)
        rest: list[tuple[tuple[int, int], np.ndarray]] = []
        for blk in cols[0][1:]:
            rest.append((blk, haar_unitary(4, rng)))
        for col in cols[1:]:
            for blk in col:
                rest.append((blk, haar_unitary(4, rng)))
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        psi1 = _apply_2q(amps, n, 0, 1, w_b)

        def after(v):
            v = _apply_2q(v, n, 0, 1, w_a)
            for blk, u in rest:
                v = _apply_2q(v, n, blk[0], blk[1], u)
            return v

        s = smatrix_from_environment(
            psi1, n, 0, after, lambda v: observable_matvec(obs, v, n), p=p
        )
        acc.add(_radius_sq(s))
    return acc


def haar_block_second_moment(
    num_qubits: int,
    num_columns: int,
    obs: Observable,
    samples: int = 10000,
    seed: int = 0,
    p: int = 4,
    jobs: int = 1,
) -> MomentEstimate:
    """Empirical E[r(S_c)^2] for the brickwork of Haar 2-qubit blocks.

    The probed gate sits on qubit 0 inside the first block of the first
    column, sandwiched between Haar halves of its own block; every other
    block is an independent Haar 2-qubit unitary, and the input is the
    all-zeros state.
    """
    if num_qubits % 2:
        raise ValueError("the 2-qubit brickwork needs an even qubit count")
    tasks = [
        (num_qubits, num_columns, obs, p, seed, start, min(_CHUNK, samples - start))
        for start in range(0, samples, _CHUNK)
    ]
    if jobs > 1 and len(tasks) > 1:
        with get_context("fork").Pool(jobs) as pool:
            parts = pool.map(_block_chunk, tasks)
    else:
        parts = [_block_chunk(t) for t in tasks]
    acc = RunningMoments()
    for part in parts:
        acc.merge(part)
    return MomentEstimate(
        acc.mean,
        acc.stderr,
        acc.count,
        config={
            "n": num_qubits,
            "columns": num_columns,
            "p": p,
            "seed": seed,
        },
    )
