"""Dense statevector simulation and exact Pauli-sum expectation values.

Conventions used project-wide:

* Qubit 0 is the least-significant bit of the amplitude index, so the basis
  state ``|b_{n-1} ... b_1 b_0>`` lives at index ``sum(b_q << q)``.
* Pauli words are written with the qubit-0 letter first: ``"ZII"`` is Z on
  qubit 0 of a 3-qubit register.
* Two-qubit unitaries index their 4-dimensional space with ``targets[0]`` as
  the low bit: column ``(b1 << 1) | b0`` corresponds to ``targets[0]=b0,
  targets[1]=b1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

_NORM_TOL = 1e-10
_UNITARY_TOL = 1e-8

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Phase-free Pauli word, one letter from IXYZ per qubit (qubit 0 first)."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"invalid Pauli word {self.letters!r}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        """Qubits on which the word acts nontrivially."""
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def dense(self) -> np.ndarray:
        """Full 2^n x 2^n matrix. Intended for small-n reference checks."""
        mats = [PAULI_MATRICES[c] for c in reversed(self.letters)]
        return reduce(np.kron, mats)

    def restricted_to_support(self) -> np.ndarray:
        """Dense matrix of the word on its nontrivial qubits only."""
        sup = self.support
        if not sup:
            return np.eye(1, dtype=complex)
        mats = [PAULI_MATRICES[self.letters[q]] for q in reversed(sup)]
        return reduce(np.kron, mats)


@dataclass(frozen=True)
class Observable:
    """Real-weighted Pauli sum ``constant * I + sum_i coeff_i * word_i``.

    Duplicate words are merged and all-identity words are folded into the
    constant, so each word appears at most once.
    """

    constant: float
    terms: tuple[tuple[float, PauliString], ...]

    @staticmethod
    def build(constant: float, terms) -> "Observable":
        merged: dict[str, float] = {}
        const = float(constant)
        width = None
        for coeff, word in terms:
            if not np.isfinite(coeff):
                raise ValueError("observable coefficients must be finite")
            if isinstance(word, str):
                word = PauliString(word)
            if width is None:
                width = len(word)
            elif len(word) != width:
                raise ValueError("all Pauli words must have equal length")
            if word.is_identity:
                const += float(coeff)
            else:
                merged[word.letters] = merged.get(word.letters, 0.0) + float(coeff)
        kept = tuple(
            (c, PauliString(w)) for w, c in merged.items() if c != 0.0
        )
        return Observable(const, kept)

    @property
    def num_qubits(self) -> int | None:
        return len(self.terms[0][1]) if self.terms else None

    def trace(self, num_qubits: int) -> float:
        """tr H; every nonidentity Pauli word is traceless."""
        return self.constant * 2**num_qubits

    def trace_squared_op(self, num_qubits: int) -> float:
        """tr[H^2] from Pauli-word orthogonality."""
        return 2**num_qubits * (
            self.constant**2 + sum(c * c for c, _ in self.terms)
        )

    def dense(self, num_qubits: int) -> np.ndarray:
        """Full matrix representation. Only for reference solves and oracles."""
        dim = 2**num_qubits
        out = self.constant * np.eye(dim, dtype=complex)
        for coeff, word in self.terms:
            if len(word) != num_qubits:
                raise ValueError("word length does not match register size")
            out += coeff * word.dense()
        return out


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over n qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.shape}"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm**2 - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm^2 deviates from 1 by {abs(nrm**2 - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", amps)

    @staticmethod
    def zero_state(num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return StateVector(num_qubits, amps)

    @staticmethod
    def computational_basis(num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return StateVector(num_qubits, amps)


# --- raw-array kernels (hot path; public wrappers validate) ---


def _apply_1q(amps: np.ndarray, num_qubits: int, target: int, u: np.ndarray) -> np.ndarray:
    lo = 2**target
    a = amps.reshape(-1, 2, lo)
    return np.einsum("ab,ibj->iaj", u, a).reshape(-1)


def _apply_2q(amps, num_qubits, t_low, t_high, u4):
    # t_low is bit 0 of the gate index, t_high bit 1; callers pass any order.
    g = u4.reshape(2, 2, 2, 2)  # [b_high', b_low', b_high, b_low]
    psi = amps.reshape([2] * num_qubits)
    ax_h = num_qubits - 1 - t_high
    ax_l = num_qubits - 1 - t_low
    out = np.tensordot(g, psi, axes=([2, 3], [ax_h, ax_l]))
    out = np.moveaxis(out, [0, 1], [ax_h, ax_l])
    return out.reshape(-1)


@lru_cache(maxsize=256)
def _cz_mask(num_qubits: int, qa: int, qb: int) -> np.ndarray:
    idx = np.arange(2**num_qubits)
    return ((idx >> qa) & (idx >> qb) & 1).astype(bool)


def _apply_cz(amps: np.ndarray, num_qubits: int, qa: int, qb: int) -> np.ndarray:
    out = amps.copy()
    out[_cz_mask(num_qubits, qa, qb)] *= -1.0
    return out


def is_unitary(u: np.ndarray, tol: float = _UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))) <= tol


def apply_gate(state: StateVector, targets, unitary) -> StateVector:
    """Apply a 1- or 2-qubit unitary to the given target qubits.

    Rejects non-unitary matrices (Frobenius deviation of U^dag U from the
    identity above 1e-8) and out-of-range or repeated targets.
    """
    targets = tuple(int(t) for t in (targets if np.iterable(targets) else (targets,)))
    n = state.num_qubits
    if len(set(targets)) != len(targets):
        raise ValueError("target qubits must be distinct")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target qubit {t} out of range for n={n}")
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (2 ** len(targets),) * 2:
        raise ValueError(f"unitary shape {u.shape} does not match {len(targets)} targets")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary within tolerance 1e-8")
    if len(targets) == 1:
        amps = _apply_1q(state.amplitudes, n, targets[0], u)
    else:
        amps = _apply_2q(state.amplitudes, n, targets[0], targets[1], u)
    return StateVector(n, amps)


# --- Pauli-sum expectation (term-by-term on a scratch copy, vectorized) ---


@lru_cache(maxsize=128)
def _compiled_terms(obs: Observable, num_qubits: int):
    """Per-word permutation/sign tables: P|psi>[k] = pref * sign[k] * psi[k ^ flip]."""
    dim = 2**num_qubits
    idx = np.arange(dim)
    coeffs, prefs, perms, signs = [], [], [], []
    for coeff, word in obs.terms:
        if len(word) != num_qubits:
            raise ValueError("word length does not match register size")
        flip = yz = 0
        n_y = 0
        for q, c in enumerate(word.letters):
            if c in "XY":
                flip |= 1 << q
            if c in "YZ":
                yz |= 1 << q
            if c == "Y":
                n_y += 1
        j = idx ^ flip
        par = np.zeros(dim, dtype=np.int64)
        bits = j & yz
        while bits.any():
            par ^= bits & 1
            bits = bits >> 1
        coeffs.append(coeff)
        prefs.append(1j**n_y)
        perms.append(j)
        signs.append(1.0 - 2.0 * par)
    return (
        np.asarray(coeffs),
        np.asarray(prefs),
        np.asarray(perms) if perms else np.zeros((0, dim), dtype=np.int64),
        np.asarray(signs) if signs else np.zeros((0, dim)),
    )


def expectation(state: StateVector, obs: Observable) -> float:
    """Exact expectation value <psi|H|psi> of a Pauli-sum observable."""
    n = state.num_qubits
    coeffs, prefs, perms, signs = _compiled_terms(obs, n)
    if len(coeffs) == 0:
        return obs.constant
    psi = state.amplitudes
    vals = (psi.conj()[None, :] * signs * psi[perms]).sum(axis=1) * prefs
    total = complex(coeffs @ vals)
    if abs(total.imag) > 1e-10:
        raise AssertionError(f"expectation has imaginary residue {total.imag:.3e}")
    return obs.constant + total.real


def observable_matvec(obs: Observable, amps: np.ndarray, num_qubits: int) -> np.ndarray:
    """H |psi> as a raw amplitude vector (not normalized)."""
    coeffs, prefs, perms, signs = _compiled_terms(obs, num_qubits)
    out = obs.constant * amps
    if len(coeffs) > 0:
        out = out + ((coeffs * prefs)[:, None] * signs * amps[perms]).sum(axis=0)
    return out


def fidelity(state: StateVector, target: StateVector) -> float:
    """|<target|state>|^2."""
    if state.num_qubits != target.num_qubits:
        raise ValueError("register sizes differ")
    return float(abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2)
