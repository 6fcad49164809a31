"""Teleportation with a partially entangled joint measurement.

Qubit ``a`` holds the unknown state, ``A`` and ``B`` share the channel. The
sender measures ``aA`` in the four-state basis generated by ``(x, y)`` and the
receiver applies a Pauli correction to ``B``. Three-qubit ordering is
(a, A, B), high bit first.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import PureChannel, XStateParams, pure_channel_density, xstate_density
from .qkernel import (
    I2, SX, SZ, QuadratureGrid, StateError, bloch_quadrature, check_density,
    check_ket, fidelity_pure_mixed, haar_random_qubits,
)

LABELS = ("phi+", "phi-", "psi+", "psi-")
DEGENERATE_P = 1e-14
MC_CHUNK = 1 << 16


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementBasis:
    x: float
    y: float
    reordered: bool = False

    @property
    def concurrence(self) -> float:
        return 2.0 * self.x * self.y

    @property
    def kets(self) -> dict[str, np.ndarray]:
        return _basis_kets(self.x, self.y)

    def matrix(self) -> np.ndarray:
        """Rows are the conjugated basis kets in ``LABELS`` order."""
        return np.array([self.kets[k].conj() for k in LABELS])


@lru_cache(maxsize=256)
def _basis_kets(x: float, y: float) -> dict[str, np.ndarray]:
    kets = {
        "phi+": np.array([x, 0, 0, y], dtype=complex),
        "phi-": np.array([y, 0, 0, -x], dtype=complex),
        "psi+": np.array([0, x, y, 0], dtype=complex),
        "psi-": np.array([0, y, -x, 0], dtype=complex),
    }
    for v in kets.values():
        v.setflags(write=False)
    return kets


def build_basis(x: float, y: float) -> MeasurementBasis:
    """Basis from non-negative (x, y); renormalized if off by at most 1e-9."""
    if x < 0 or y < 0:
        raise BasisError(f"basis parameters must be non-negative, got x={x!r}, y={y!r}")
    norm = math.hypot(x, y)
    if abs(norm - 1.0) > 1e-9:
        raise BasisError(f"basis not normalized: sqrt(x^2 + y^2) = {norm!r}")
    x, y = x / norm, y / norm
    if x > y:
        return MeasurementBasis(y, x, reordered=True)
    return MeasurementBasis(x, y)


def basis_from_concurrence(c: float) -> MeasurementBasis:
    """Solve 2xy = c with x <= y."""
    if not 0.0 <= c <= 1.0:
        raise BasisError(f"basis concurrence must lie in [0, 1], got {c!r}")
    x = math.sqrt((1.0 - math.sqrt(1.0 - c * c)) / 2.0)
    y = math.sqrt(1.0 - x * x)
    return MeasurementBasis(min(x, y), max(x, y))


BELL_BASIS = basis_from_concurrence(1.0)


def correction_for(label: str) -> np.ndarray:
    """Unitary the receiver applies to B after outcome ``label``."""
    if label == "phi+":
        return SX
    if label == "phi-":
        return SX @ SZ
    if label == "psi+":
        return I2
    if label == "psi-":
        return SZ
    raise KeyError(label)


@dataclass(frozen=True)
class TeleportOutcome:
    label: str
    probability: float
    output: np.ndarray
    degenerate: bool = False


def as_density(channel) -> np.ndarray:
    if isinstance(channel, XStateParams):
        return xstate_density(channel)
    if isinstance(channel, PureChannel):
        return pure_channel_density(channel)
    return check_density(channel, dim=4)


def teleport_outcomes(psi: np.ndarray, channel, basis: MeasurementBasis) -> list[TeleportOutcome]:
    """The four corrected output states of B with their probabilities."""
    psi = np.asarray(psi, dtype=complex)
    check_ket(psi)
    rho = as_density(channel)
    if not isinstance(basis, MeasurementBasis):
        raise BasisError("basis must be a MeasurementBasis")
    full = np.kron(np.outer(psi, psi.conj()), rho)
    outcomes = []
    for label in LABELS:
        bra = np.kron(basis.kets[label].conj()[None, :], I2)  # (2, 8)
        branch = bra @ full @ bra.conj().T
        p = float(np.trace(branch).real)
        if p < DEGENERATE_P:
            outcomes.append(TeleportOutcome(label, max(p, 0.0), I2 / 2, degenerate=True))
            continue
        u = correction_for(label)
        out = u @ branch @ u.conj().T / p
        outcomes.append(TeleportOutcome(label, p, 0.5 * (out + out.conj().T)))
    return outcomes


def conditional_fidelity(psi: np.ndarray, outcomes) -> float:
    """Outcome-averaged fidelity sum_k p_k <psi|rho_k|psi> for one input state."""
    total = math.fsum(
        o.probability * fidelity_pure_mixed(psi, o.output) for o in outcomes if not o.degenerate
    )
    return min(1.0, max(0.0, total))


def fidelity_tensor(channel, basis: MeasurementBasis) -> np.ndarray:
    """Tensor M with  sum_k p_k <psi|rho_k|psi> = sum conj(psi_c psi_d) M[c,d,a,e] psi_a psi_e.

    Outcome k leaves B in U_k sigma_k U_k^dag with
    sigma_k[b,d] = sum_{A,C} v_A rho[(A,b),(C,d)] conj(v_C),  v_A = sum_a conj(k_{aA}) psi_a.
    """
    rho = as_density(channel).reshape(2, 2, 2, 2)
    bras = basis.matrix().reshape(4, 2, 2)  # [k, a, A], already conjugated
    corr = np.array([correction_for(k) for k in LABELS])
    return np.einsum("kcb,kaA,AbCd,kfC,ked->cfae", corr, bras, rho, bras.conj(), corr.conj())


def conditional_fidelities(kets: np.ndarray, channel, basis: MeasurementBasis) -> np.ndarray:
    """Vectorized ``conditional_fidelity`` over an (n, 2) array of input kets."""
    kets = np.asarray(kets, dtype=complex)
    pairs = np.einsum("na,ne->nae", kets, kets).reshape(-1, 4)
    m = fidelity_tensor(channel, basis).reshape(4, 4)
    f = np.einsum("nx,xy,ny->n", pairs.conj(), m, pairs).real
    return np.clip(f, 0.0, 1.0)


def decomposition_identity_check(psi: np.ndarray, ch: PureChannel, basis: MeasurementBasis) -> float:
    """Rebuild |psi>_a |psi_AB> from its four measurement branches; return max residual.

    Each branch is |k> (x) U_k^dag |p_k> sqrt(p_k), with the receiver states
    written out from their closed forms. A global sign per branch is fitted.
    """
    psi = np.asarray(psi, dtype=complex)
    check_ket(psi)
    target = np.kron(psi, ch.ket())
    x, y, a, b = basis.x, basis.y, ch.alpha, ch.beta
    p0, p1 = psi
    unnormalized = {
        "phi+": np.array([x * a * p0, y * b * p1]),
        "phi-": np.array([y * a * p0, x * b * p1]),
        "psi+": np.array([x * b * p0, y * a * p1]),
        "psi-": np.array([y * b * p0, x * a * p1]),
    }
    total = np.zeros(8, dtype=complex)
    for label in LABELS:
        u = correction_for(label)
        branch = np.kron(basis.kets[label], u.conj().T @ unnormalized[label])
        overlap = np.vdot(branch, target).real
        total += (-1.0 if overlap < 0 else 1.0) * branch
    return float(np.max(np.abs(total - target)))


@lru_cache(maxsize=8)
def default_grid(n_theta: int = 64, n_phi: int = 64) -> QuadratureGrid:
    return bloch_quadrature(n_theta, n_phi)


def average_fidelity_quadrature(channel, basis: MeasurementBasis,
                                grid: QuadratureGrid | None = None) -> float:
    if grid is None:
        grid = default_grid()
    return grid.average(conditional_fidelities(grid.kets, channel, basis))


def worker_count() -> int:
    cap = os.environ.get("TELEFID_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise StateError(f"TELEFID_THREADS must be an integer, got {cap!r}") from None
    return n


def _mc_chunk(rho: np.ndarray, basis: MeasurementBasis, seed: int, index: int, size: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    return conditional_fidelities(haar_random_qubits(rng, size), rho, basis)


def average_fidelity_mc(channel, basis: MeasurementBasis, n_samples: int = 10**6,
                        seed: int = 0, workers: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of the average fidelity.

    Samples are drawn in fixed chunks, each from its own stream keyed by
    (seed, chunk index), and reduced with ``math.fsum``; the result does not
    depend on ``workers``.
    """
    if n_samples < 100:
        raise ValueError(f"n_samples must be at least 100, got {n_samples}")
    rho = as_density(channel)
    sizes = [MC_CHUNK] * (n_samples // MC_CHUNK)
    if n_samples % MC_CHUNK:
        sizes.append(n_samples % MC_CHUNK)
    workers = workers or worker_count()
    jobs = [(rho, basis, seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _mc_chunk(*j), jobs))
    else:
        parts = [_mc_chunk(*j) for j in jobs]
    values = np.concatenate(parts)
    mean = math.fsum(values) / n_samples
    var = math.fsum((values - mean) ** 2) / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)
