"""One- and two-qubit linear algebra primitives.

Kets and operators are plain complex numpy arrays. Basis ordering for two
qubits is {|00>, |01>, |10>, |11>} with the first factor as the high bit,
which is what ``np.kron`` produces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

_SYSY = np.kron(SY, SY)


class StateError(ValueError):
    """Raised when an array is not a valid ket or density matrix."""


class EigenSolverError(RuntimeError):
    """Raised when the eigenvalue routine fails inside a concurrence computation."""


def ket(*amplitudes) -> np.ndarray:
    """Build a normalized ket (length 2 or 4) from explicit amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    if v.size not in (2, 4):
        raise StateError(f"ket must have 2 or 4 amplitudes, got {v.size}")
    check_ket(v)
    return v


def check_ket(v: np.ndarray, atol: float = ATOL) -> None:
    norm = np.vdot(v, v).real
    if abs(norm - 1.0) > atol:
        raise StateError(f"ket is not normalized (norm^2 = {norm!r})")


def projector(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def tensor(op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    """Kronecker product; first argument acts on the high (left) qubit."""
    return np.kron(op_a, op_b)


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol)


def check_density(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate Hermiticity, unit trace and PSD; return the matrix as complex.

    Eigenvalues down to ``-PSD_TOL`` are tolerated as round-off.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError(f"density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise StateError(f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0, atol=ATOL):
        raise StateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > ATOL:
        raise StateError(f"density matrix trace is {tr!r}, expected 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -PSD_TOL:
        raise StateError(f"density matrix has negative eigenvalue {evals.min()!r}")
    return rho


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduce a two-qubit density matrix to qubit ``keep`` (0 = first, 1 = second)."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    if keep == 1:
        return np.einsum("jajb->ab", r)
    raise ValueError("keep must be 0 or 1")


def fidelity_pure_mixed(psi: np.ndarray, rho: np.ndarray) -> float:
    """Overlap <psi|rho|psi> of a pure qubit state with a one-qubit density matrix."""
    psi = np.asarray(psi, dtype=complex)
    check_ket(psi)
    rho = check_density(rho, dim=2)
    f = np.vdot(psi, rho @ psi).real
    return min(1.0, max(0.0, float(f)))


def wootters_concurrence(rho: np.ndarray) -> float:
    """Spin-flip concurrence of an arbitrary two-qubit density matrix.

    C = max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
    eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    rho = check_density(rho, dim=4)
    try:
        # with rho = W W^dag, the l_i are the singular values of W^T (sy x sy) W;
        # this avoids square roots of round-off sized eigenvalues of rho rho~
        w, v = np.linalg.eigh(rho)
        factor = v * np.sqrt(np.clip(w, 0.0, None))
        lam = np.linalg.svd(factor.T @ _SYSY @ factor, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigen-solver failed: {exc}") from exc
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(1.0, max(0.0, c)))


# --- sampling and quadrature over the Bloch sphere ---------------------------


def bloch_ket(u: float, phi: float) -> np.ndarray:
    """Qubit with cos(theta) = u and azimuth phi."""
    return np.array(
        [math.sqrt((1.0 + u) / 2.0), np.exp(1j * phi) * math.sqrt((1.0 - u) / 2.0)],
        dtype=complex,
    )


def bloch_kets(u: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Vectorized ``bloch_ket``; returns an (n, 2) array."""
    u = np.asarray(u, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = np.empty(u.shape + (2,), dtype=complex)
    out[..., 0] = np.sqrt((1.0 + u) / 2.0)
    out[..., 1] = np.exp(1j * phi) * np.sqrt(np.clip((1.0 - u) / 2.0, 0.0, None))
    return out


def haar_random_qubit(rng: np.random.Generator) -> np.ndarray:
    """Draw one Haar-uniform pure qubit: cos(theta) ~ U[-1, 1], phi ~ U[0, 2pi)."""
    u = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return bloch_ket(u, phi)


def haar_random_qubits(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return bloch_kets(u, phi)


def haar_random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phase fix on R's diagonal."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes on the Bloch sphere with weights summing to one."""

    kets: np.ndarray
    weights: np.ndarray
    shape: tuple[int, int]

    def __len__(self) -> int:
        return len(self.weights)

    def average(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def bloch_quadrature(n_theta: int = 64, n_phi: int = 64) -> QuadratureGrid:
    """Gauss-Legendre in cos(theta) times the periodic trapezoid rule in phi."""
    if n_theta < 2 or n_phi < 2:
        raise ValueError(f"quadrature needs at least 2x2 nodes, got {n_theta}x{n_phi}")
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    uu, pp = np.meshgrid(u, phi, indexing="ij")
    weights = np.outer(wu / 2.0, np.full(n_phi, 1.0 / n_phi)).ravel()
    weights /= weights.sum()
    return QuadratureGrid(bloch_kets(uu.ravel(), pp.ravel()), weights, (n_theta, n_phi))
