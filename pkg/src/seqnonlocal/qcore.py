"""Dense linear algebra for one to three qubits.

Operators are plain ``numpy`` complex arrays. Qubits are ordered A, B, C with
big-endian basis labels, so ``|abc>`` sits at index ``4a + 2b + c``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

PARTIES = ("A", "B", "C")

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class InvalidStateError(ValueError):
    """Raised when an operator fails a density-matrix check."""


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators, left to right."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def _party_index(party: str | int) -> int:
    if isinstance(party, str):
        try:
            return PARTIES.index(party.upper())
        except ValueError:
            raise ValueError(f"unknown subsystem {party!r}; expected one of A, B, C") from None
    if party not in (0, 1, 2):
        raise ValueError(f"unknown subsystem index {party}")
    return party


def embed(op: np.ndarray, party: str | int) -> np.ndarray:
    """Place a single-qubit operator on one slot of A (x) B (x) C."""
    idx = _party_index(party)
    factors = [I2, I2, I2]
    factors[idx] = op
    return kron(*factors)


def partial_trace(rho: np.ndarray, keep: Iterable[str | int]) -> np.ndarray:
    """Reduce a three-qubit operator to the subsystems in ``keep``.

    Parameters
    ----------
    rho : ndarray, shape (8, 8)
        Operator on A (x) B (x) C.
    keep : iterable of {"A", "B", "C"} or {0, 1, 2}
        Subsystems to retain, returned in A, B, C order.

    Returns
    -------
    ndarray
        Operator of dimension ``2 ** len(keep)``.
    """
    kept = sorted({_party_index(p) for p in keep})
    if not kept:
        raise ValueError("no subsystem retained")
    rho = np.asarray(rho)
    if rho.shape != (8, 8):
        raise ValueError(f"partial_trace expects an 8x8 operator, got {rho.shape}")
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    traced = [q for q in range(3) if q not in kept]
    # drop axes from the highest index down so the remaining labels stay valid
    nq = 3
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + nq)
        nq -= 1
    d = 2 ** len(kept)
    return t.reshape(d, d)


def trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    """``Tr[a b]`` without forming the product."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"trace_product needs square operators of equal size, got {a.shape} and {b.shape}")
    return complex(np.sum(a * b.T))


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        check_density_matrix(rho)
    except InvalidStateError:
        return False
    return True


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` unchanged.

    Raises
    ------
    InvalidStateError
        Naming the first check that failed.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4, 8):
        raise InvalidStateError(f"density matrix must be 2x2, 4x4 or 8x8, got {rho.shape}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (deviation {herm_dev:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr.real:.15g}, expected 1")
    min_eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if min_eig < -PSD_TOL:
        raise InvalidStateError(f"not positive semidefinite (smallest eigenvalue {min_eig:.3e})")
    return rho


def pure_state(amplitudes: Iterable[complex]) -> np.ndarray:
    """Density matrix of a normalised ket."""
    psi = np.asarray(list(amplitudes), dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidStateError("zero state vector")
    psi = psi / norm
    return np.outer(psi, psi.conj())


def purity(rho: np.ndarray) -> float:
    return float(trace_product(rho, rho).real)
