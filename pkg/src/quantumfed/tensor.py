"""Dense multi-qubit linear algebra.

Conventions used throughout the package:

* Operators are plain ``numpy`` complex arrays. Functions that take a single
  operator also accept a stack of them (leading batch axes) unless noted.
* A *layout* is an ordered sequence of hashable qubit identifiers. Position 0
  in the layout is the leftmost tensor factor, i.e. the most significant bit of
  the basis index, so ``tensor(a, b)`` places ``a``'s qubits before ``b``'s.
* In a network layer space, the previous layer's qubits come first and the
  current layer's qubits follow.
"""

from __future__ import annotations

import string
from typing import Hashable, Sequence

import numpy as np

MAX_QUBITS = 10
MAX_PAULI_QUBITS = 5

_LETTERS = string.ascii_letters


class DimensionError(ValueError):
    """Raised when an operator exceeds the size guard or has the wrong shape."""


class NonHermitianError(ArithmeticError):
    """Raised when an operator expected to be Hermitian is not."""


def _check_dim(dim: int) -> None:
    if dim > 2**MAX_QUBITS:
        raise DimensionError(f"dimension {dim} exceeds guard 2^{MAX_QUBITS}")


def num_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def _positions(layout: Sequence[Hashable], ids) -> list[int]:
    index = {q: i for i, q in enumerate(layout)}
    if len(index) != len(layout):
        raise ValueError(f"layout has duplicate qubit ids: {list(layout)}")
    out = []
    for q in ids:
        if q not in index:
            raise ValueError(f"unknown qubit id {q!r} for layout {list(layout)}")
        out.append(index[q])
    return out


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    _check_dim(a.shape[-1] * b.shape[-1])
    _check_dim(a.shape[-2] * b.shape[-2])
    return np.kron(a, b)


def ket_zero_projector(num_qubits: int) -> np.ndarray:
    dim = 2**num_qubits
    p = np.zeros((dim, dim), dtype=complex)
    p[0, 0] = 1.0
    return p


def partial_trace_positions(m: np.ndarray, n: int, traced: Sequence[int]) -> np.ndarray:
    """Trace out the qubits at positions ``traced`` of an ``n``-qubit operator.

    Works on stacks: the last two axes are the operator, everything before is
    carried through.
    """
    traced = sorted(set(traced))
    keep = [i for i in range(n) if i not in traced]
    batch = m.shape[:-2]
    t = m.reshape(batch + (2,) * (2 * n))
    rows = list(_LETTERS[:n])
    cols = list(_LETTERS[n : 2 * n])
    for i in traced:
        cols[i] = rows[i]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    r = np.einsum("..." + "".join(rows) + "".join(cols) + "->..." + out, t)
    d = 2 ** len(keep)
    return r.reshape(batch + (d, d))


def partial_trace(m: np.ndarray, layout: Sequence[Hashable], traced) -> np.ndarray:
    """Sum out the qubits named in ``traced``.

    The result acts on the remaining qubits in their layout order. Tracing every
    qubit gives a 1x1 matrix holding ``tr(m)``.
    """
    n = len(layout)
    if m.shape[-1] != 2**n or m.shape[-2] != 2**n:
        raise DimensionError(f"operator shape {m.shape[-2:]} does not match {n} qubits")
    return partial_trace_positions(m, n, _positions(layout, traced))


def hermitian_part(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.swapaxes(h, -1, -2).conj())


def matexp_hermitian(h: np.ndarray, scale: float, atol: float = 1e-8) -> np.ndarray:
    """Return ``exp(i * scale * h)`` for Hermitian ``h`` via eigendecomposition.

    ``h`` is symmetrized before use so small anti-Hermitian drift is discarded;
    anything larger than ``atol`` (Frobenius) raises :class:`NonHermitianError`.
    """
    h = np.asarray(h, dtype=complex)
    drift = np.linalg.norm(h - np.swapaxes(h, -1, -2).conj(), axis=(-2, -1))
    if np.any(drift > atol):
        raise NonHermitianError(f"matrix is not Hermitian (|H - H^dag|_F = {np.max(drift):.3e})")
    w, v = np.linalg.eigh(hermitian_part(h))
    phases = np.exp(1j * scale * w)
    return (v * phases[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def haar_unitary(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix, R-diagonal phases fixed."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    dim = 2**num_qubits
    _check_dim(dim)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random pure state as a normalized complex Gaussian vector."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    dim = 2**num_qubits
    _check_dim(dim)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def projector(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a vector or a stack of vectors."""
    return psi[..., :, None] * psi[..., None, :].conj()


def embed_positions(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Lift ``op`` acting on qubit positions ``targets`` to the full n-qubit space."""
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise DimensionError(f"operator shape {op.shape} does not act on {k} qubits")
    if len(set(targets)) != k or any(t < 0 or t >= n for t in targets):
        raise ValueError(f"bad target positions {list(targets)} for {n} qubits")
    _check_dim(2**n)
    rest = [i for i in range(n) if i not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex)).reshape((2,) * (2 * n))
    # axis a of `full` currently holds qubit order[a]; route it back to layout position
    order = list(targets) + rest
    perm = np.argsort(order)
    full = full.transpose(list(perm) + [n + p for p in perm])
    return full.reshape(2**n, 2**n)


def embed_on_qubits(op: np.ndarray, targets, layout: Sequence[Hashable]) -> np.ndarray:
    """Operator acting as ``op`` on ``targets`` (in the given order), identity elsewhere."""
    return embed_positions(np.asarray(op, dtype=complex), _positions(layout, targets), len(layout))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"commutator needs equal square operands, got {a.shape} and {b.shape}")
    return a @ b - b @ a


_PAULI_1 = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_basis(num_qubits: int) -> list[np.ndarray]:
    """All 4^q Pauli strings, ordered with the leftmost factor varying slowest.

    Labels follow ``itertools.product("IXYZ", repeat=q)``.
    """
    if num_qubits < 1 or num_qubits > MAX_PAULI_QUBITS:
        raise DimensionError(f"pauli_basis supports 1..{MAX_PAULI_QUBITS} qubits, got {num_qubits}")
    basis = list(_PAULI_1)
    for _ in range(num_qubits - 1):
        basis = [np.kron(a, p) for a in basis for p in _PAULI_1]
    return basis


def pauli_labels(num_qubits: int) -> list[str]:
    labels = ["I", "X", "Y", "Z"]
    for _ in range(num_qubits - 1):
        labels = [a + p for a in labels for p in "IXYZ"]
    return labels
