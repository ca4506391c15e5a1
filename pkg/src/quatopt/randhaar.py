"""Haar-random unitaries and states, plus a Monte Carlo second-moment check.

Randomness plumbing is pinned to numpy's PCG64: streams are derived from a
64-bit seed and a stream index through ``SeedSequence(seed, spawn_key=(stream,))``,
so parallel workers get independent, reproducible substreams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simcore import StateVector


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic PCG64 generator for (seed, stream)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,)))
    )


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of Haar-distributed unitaries, shape (count, dim, dim).

    Ginibre draw, QR orthonormalization, then the phase of R's diagonal is
    absorbed into Q so the distribution is exactly Haar.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    diag = np.einsum("...ii->...i", r)
    q *= (diag / np.abs(diag))[:, None, :]
    return q


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Single Haar-distributed dim x dim unitary."""
    return haar_unitaries(dim, 1, rng)[0]


def haar_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Uniformly random pure state (normalized complex Gaussian vector)."""
    dim = 2**num_qubits
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(num_qubits, vec / np.linalg.norm(vec))


def weingarten_expectation(a, b, c, d) -> complex:
    """Closed-form Haar average of tr[W a W^dag b W c W^dag d].

    Second-moment Weingarten integral over the unitary group of degree
    ``dim``:

        (tr[a] tr[c] tr[bd] + tr[ac] tr[b] tr[d]) / (dim^2 - 1)
      - (tr[ac] tr[bd] + tr[a] tr[b] tr[c] tr[d]) / (dim (dim^2 - 1))
    """
    a, b, c, d = (np.asarray(m, dtype=complex) for m in (a, b, c, d))
    dim = a.shape[0]
    if any(m.shape != (dim, dim) for m in (b, c, d)):
        raise ValueError("operators must share one square dimension")
    tr_a, tr_b, tr_c, tr_d = (np.trace(m) for m in (a, b, c, d))
    tr_ac = np.trace(a @ c)
    tr_bd = np.trace(b @ d)
    lead = (tr_a * tr_c * tr_bd + tr_ac * tr_b * tr_d) / (dim**2 - 1)
    corr = (tr_ac * tr_bd + tr_a * tr_b * tr_c * tr_d) / (dim * (dim**2 - 1))
    return complex(lead - corr)


@dataclass(frozen=True)
class WeingartenResult:
    mc_estimate: float
    closed_form: float
    stderr: float
    z_score: float
    samples: int


def weingarten_check(
    a, b, c, d, samples: int, rng: np.random.Generator
) -> WeingartenResult:
    """Monte Carlo estimate of the second-moment integral against its closed form.

    The sample statistic is the real part of the trace; the standard error
    comes from its sample variance.
    """
    a, b, c, d = (np.asarray(m, dtype=complex) for m in (a, b, c, d))
    dim = a.shape[0]
    closed = weingarten_expectation(a, b, c, d)
    stats = np.empty(samples)
    batch = 4096
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        w = haar_unitaries(dim, k, rng)
        wh = w.conj().transpose(0, 2, 1)
        p = w @ a @ wh
        q = w @ c @ wh
        prod = p @ b @ q @ d
        stats[done : done + k] = np.einsum("sii->s", prod).real
        done += k
    mc = float(stats.mean())
    stderr = float(stats.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    diff = abs(mc - closed.real)
    if stderr > 0.0:
        z = diff / stderr
    else:
        z = 0.0 if diff < 1e-12 else np.inf
    return WeingartenResult(mc, closed.real, stderr, float(z), samples)
