"""2x2 Hermitian operator arithmetic in the Bloch representation.

Everything acts on a single qubit in a globally fixed computational basis
{|0>, |1|>}; the Pauli matrices X, Y, Z always refer to that basis.  An
operator O is identified by its trace together with the Pauli trace triple
(Tr[OX], Tr[OY], Tr[OZ]).
"""

from __future__ import annotations

import numpy as np

from .tolerances import DEGENERATE_DIRECTION, HERMITICITY, POSITIVITY

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

for _m in (IDENTITY, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)


def require_hermitian(op, tol: float = HERMITICITY) -> np.ndarray:
    """Return ``op`` as a 2x2 complex array, raising if it is not Hermitian."""
    arr = np.asarray(op, dtype=complex)
    if arr.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator has non-finite entries")
    deviation = float(np.abs(arr - arr.conj().T).max())
    if deviation > tol:
        raise ValueError(
            f"operator is not Hermitian (deviation {deviation:.3e} exceeds {tol:.1e})"
        )
    return arr


def hermiticity_defect(op) -> float:
    """Largest entrywise deviation of ``op`` from its own adjoint."""
    arr = np.asarray(op, dtype=complex)
    return float(np.abs(arr - arr.conj().T).max())


def bloch_vector(op) -> np.ndarray:
    """Pauli trace triple (Tr[OX], Tr[OY], Tr[OZ]) of a Hermitian operator."""
    arr = require_hermitian(op)
    return np.array([np.trace(arr @ pauli).real for pauli in PAULIS])


def from_bloch(trace: float, r) -> np.ndarray:
    """Hermitian operator (1/2)(trace*I + r . sigma) with Bloch vector ``r``."""
    x, y, z = (float(c) for c in r)
    t = float(trace)
    return 0.5 * np.array(
        [[t + z, x - 1j * y], [x + 1j * y, t - z]], dtype=complex
    )


def eig2(op, degeneracy_tol: float = DEGENERATE_DIRECTION):
    """Closed-form eigendecomposition of a 2x2 Hermitian operator.

    Returns ``((lmax, lmin), (p0, p1))`` with eigenvalues in descending order
    and rank-1 orthogonal projectors satisfying ``lmax*p0 + lmin*p1 == op``.
    Degenerate spectra (Bloch norm below ``degeneracy_tol``) deterministically
    fall back to the computational-basis projectors.
    """
    arr = require_hermitian(op)
    trace = np.trace(arr).real
    r = bloch_vector(arr)
    gap = float(np.linalg.norm(r))
    lmax = 0.5 * (trace + gap)
    lmin = 0.5 * (trace - gap)
    if gap <= degeneracy_tol:
        p0 = np.array([[1, 0], [0, 0]], dtype=complex)
        p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    else:
        axis = r / gap
        p0 = from_bloch(1.0, axis)
        p1 = from_bloch(1.0, -axis)
    return (lmax, lmin), (p0, p1)


def psd_check(op, tol: float = POSITIVITY) -> bool:
    """True iff both eigenvalues of the Hermitian ``op`` are >= -tol."""
    (_, lmin), _ = eig2(op)
    return lmin >= -tol


def direction_projectors(direction, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the +1/-1 eigenstates of ``direction . sigma``."""
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"direction must be a unit vector, got norm {norm!r}")
    return from_bloch(1.0, d), from_bloch(1.0, -d)
