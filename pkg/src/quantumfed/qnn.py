"""Dissipative quantum neural network: feedforward, adjoint backward pass, costs
and the closed-form update matrices.

Layer ``l`` (1-based, ``1..L+1``) acts on ``m[l-1] + m[l]`` qubits: the
previous layer's qubits at positions ``0..m[l-1]-1`` and the fresh layer-l
qubits after them. Perceptron ``j`` (0-based here) acts on all previous-layer
qubits plus layer-l qubit ``j``, in that order. Within a layer perceptron 0 is
applied first, so the layer unitary is ``U[m-1] ... U[1] U[0]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (
    MAX_QUBITS,
    DimensionError,
    commutator,
    embed_positions,
    haar_unitary,
    hermitian_part,
    matexp_hermitian,
    partial_trace_positions,
    pauli_basis,
    projector,
)

UNITARITY_TOL = 1e-8


class UnitarityError(ArithmeticError):
    """A perceptron unitary drifted away from the unitary group."""


@dataclass(frozen=True)
class Architecture:
    widths: tuple[int, ...]

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if len(widths) < 2:
            raise ValueError(f"architecture needs at least two layers, got {list(widths)}")
        if any(w < 1 for w in widths):
            raise ValueError(f"layer widths must be >= 1, got {list(widths)}")
        widest = max(a + b for a, b in zip(widths, widths[1:]))
        if widest > MAX_QUBITS:
            raise DimensionError(f"layer space of {widest} qubits exceeds guard {MAX_QUBITS}")

    @property
    def num_layers(self) -> int:
        """Number of trainable layers (transitions), i.e. ``L + 1``."""
        return len(self.widths) - 1

    @property
    def m_in(self) -> int:
        return self.widths[0]

    @property
    def m_out(self) -> int:
        return self.widths[-1]

    def perceptron_qubits(self, l: int) -> int:
        return self.widths[l - 1] + 1

    def perceptrons(self):
        """Yield ``(l, j)`` for every perceptron, layer by layer."""
        for l in range(1, len(self.widths)):
            for j in range(self.widths[l]):
                yield l, j

    def __str__(self):
        return "[" + ",".join(map(str, self.widths)) + "]"


@dataclass
class NetworkParams:
    """Architecture plus perceptron unitaries; ``unitaries[l-1][j]`` is U^{l,j}."""

    arch: Architecture
    unitaries: list[list[np.ndarray]]

    def __post_init__(self):
        if len(self.unitaries) != self.arch.num_layers:
            raise ValueError("one list of unitaries per layer required")
        for l in range(1, self.arch.num_layers + 1):
            us = self.unitaries[l - 1]
            if len(us) != self.arch.widths[l]:
                raise ValueError(f"layer {l} needs {self.arch.widths[l]} perceptrons, got {len(us)}")
            dim = 2 ** self.arch.perceptron_qubits(l)
            for u in us:
                if u.shape != (dim, dim):
                    raise DimensionError(f"layer {l} perceptron must be {dim}x{dim}, got {u.shape}")
        self.check_unitarity()

    def layer(self, l: int) -> list[np.ndarray]:
        return self.unitaries[l - 1]

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.arch, [[u.copy() for u in us] for us in self.unitaries])

    def unitarity_defect(self) -> float:
        worst = 0.0
        for us in self.unitaries:
            for u in us:
                eye = np.eye(u.shape[0])
                worst = max(worst, float(np.linalg.norm(u.conj().T @ u - eye)))
        return worst

    def check_unitarity(self, tol: float = UNITARITY_TOL) -> None:
        for l, j in self.arch.perceptrons():
            u = self.unitaries[l - 1][j]
            err = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))
            if err >= tol:
                raise UnitarityError(
                    f"perceptron U^{{{l},{j + 1}}} violates unitarity: |U^dag U - I|_F = {err:.3e}"
                )

    def flat(self) -> np.ndarray:
        """All unitaries concatenated into one vector (for distances and digests)."""
        return np.concatenate([u.ravel() for us in self.unitaries for u in us])

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(self.flat().tobytes()).hexdigest()


def random_params(arch: Architecture | Sequence[int], rng: np.random.Generator) -> NetworkParams:
    """Haar-random perceptron unitaries, drawn layer by layer, perceptron by perceptron."""
    if not isinstance(arch, Architecture):
        arch = Architecture(tuple(arch))
    unitaries = [
        [haar_unitary(arch.perceptron_qubits(l), rng) for _ in range(arch.widths[l])]
        for l in range(1, arch.num_layers + 1)
    ]
    return NetworkParams(arch, unitaries)


def identity_params(arch: Architecture | Sequence[int]) -> NetworkParams:
    if not isinstance(arch, Architecture):
        arch = Architecture(tuple(arch))
    unitaries = [
        [np.eye(2 ** arch.perceptron_qubits(l), dtype=complex) for _ in range(arch.widths[l])]
        for l in range(1, arch.num_layers + 1)
    ]
    return NetworkParams(arch, unitaries)


@dataclass
class TrainingPair:
    input: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        self.input = np.asarray(self.input, dtype=complex)
        self.target = np.asarray(self.target, dtype=complex)
        for name, v in (("input", self.input), ("target", self.target)):
            if abs(np.vdot(v, v).real - 1.0) > 1e-10:
                raise ValueError(f"training pair {name} is not normalized")


@dataclass
class ForwardTrace:
    """Layer states rho^0 .. rho^out, each of shape ``(batch, d_l, d_l)``."""

    layer_states: list[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.layer_states[-1]


def _perceptron_targets(arch: Architecture, l: int, j: int) -> list[int]:
    m_prev = arch.widths[l - 1]
    return list(range(m_prev)) + [m_prev + j]


def embedded_layer(params: NetworkParams, l: int) -> list[np.ndarray]:
    """Perceptron unitaries of layer ``l`` lifted onto the layer space."""
    arch = params.arch
    n = arch.widths[l - 1] + arch.widths[l]
    return [
        embed_positions(u, _perceptron_targets(arch, l, j), n)
        for j, u in enumerate(params.layer(l))
    ]


def layer_unitary(params: NetworkParams, l: int) -> np.ndarray:
    total = None
    for e in embedded_layer(params, l):
        total = e if total is None else e @ total
    return total


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2).conj()


def _with_zero_ancilla(rho: np.ndarray, m_cur: int) -> np.ndarray:
    """rho ⊗ |0..0><0..0| on the layer space, for a single state or a stack."""
    dc = 2**m_cur
    d = rho.shape[-1]
    out = np.zeros(rho.shape[:-2] + (d * dc, d * dc), dtype=complex)
    out[..., ::dc, ::dc] = rho
    return out


def _lift_right(sigma: np.ndarray, m_prev: int) -> np.ndarray:
    """I_{prev} ⊗ sigma, for a single operator or a stack."""
    dp, dc = 2**m_prev, sigma.shape[-1]
    lifted = np.einsum("ij,...kl->...ikjl", np.eye(dp), sigma)
    return lifted.reshape(sigma.shape[:-2] + (dp * dc, dp * dc))


def _layer_channel(u: np.ndarray, m_prev: int, m_cur: int, rho_prev: np.ndarray) -> np.ndarray:
    # only the ancilla-|0..0> columns of u see the input
    v = u[:, :: 2**m_cur]
    evolved = v @ rho_prev @ v.conj().T
    return partial_trace_positions(evolved, m_prev + m_cur, range(m_prev))


def _check_rho(arch: Architecture, l: int, rho: np.ndarray) -> None:
    d = 2 ** arch.widths[l - 1]
    if rho.shape[-2:] != (d, d):
        raise DimensionError(f"layer {l} expects a {d}x{d} input state, got {rho.shape[-2:]}")


def layer_channel(params: NetworkParams, l: int, rho_prev: np.ndarray) -> np.ndarray:
    """E^l: attach |0..0> on layer l, apply the layer unitary, trace out layer l-1."""
    _check_rho(params.arch, l, rho_prev)
    w = params.arch.widths
    return _layer_channel(layer_unitary(params, l), w[l - 1], w[l], rho_prev)


def feedforward(params: NetworkParams, inputs: np.ndarray) -> ForwardTrace:
    """Propagate input state vector(s) through every layer, keeping each state.

    ``inputs`` is one state vector or a ``(batch, 2^m_in)`` stack; stored states
    always carry a batch axis.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=complex))
    if inputs.shape[-1] != 2 ** params.arch.m_in:
        raise DimensionError(f"input must have {2 ** params.arch.m_in} amplitudes")
    rho = projector(inputs)
    states = [rho]
    w = params.arch.widths
    for l in range(1, params.arch.num_layers + 1):
        rho = _layer_channel(layer_unitary(params, l), w[l - 1], w[l], rho)
        states.append(rho)
    return ForwardTrace(states)


def _adjoint(u: np.ndarray, m_prev: int, m_cur: int, sigma: np.ndarray) -> np.ndarray:
    # tr_l((I ⊗ |0><0|) U^dag (I ⊗ sigma) U) keeps only the ancilla-|0..0> block
    v = u[:, :: 2**m_cur]
    return v.conj().T @ _lift_right(sigma, m_prev) @ v


def adjoint_channel(params: NetworkParams, l: int, sigma: np.ndarray) -> np.ndarray:
    """F^l, the trace dual of E^l: tr(E^l(rho) sigma) = tr(rho F^l(sigma))."""
    w = params.arch.widths
    d = 2 ** w[l]
    if sigma.shape[-2:] != (d, d):
        raise DimensionError(f"layer {l} adjoint expects a {d}x{d} operator, got {sigma.shape[-2:]}")
    return _adjoint(layer_unitary(params, l), w[l - 1], w[l], sigma)


def backward_sigmas(params: NetworkParams, targets: np.ndarray) -> list[np.ndarray]:
    """Back-propagated target projectors sigma^l for l = 1..L+1 (index ``l-1``).

    ``sigma^out`` is the target projector; ``sigma^l = F^{l+1}(sigma^{l+1})``.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    if targets.shape[-1] != 2 ** params.arch.m_out:
        raise DimensionError(f"target must have {2 ** params.arch.m_out} amplitudes")
    w = params.arch.widths
    nl = params.arch.num_layers
    sigma = projector(targets)
    sigmas = [sigma]
    for l in range(nl, 1, -1):
        sigma = _adjoint(layer_unitary(params, l), w[l - 1], w[l], sigma)
        sigmas.append(sigma)
    return sigmas[::-1]


def _batch_arrays(batch: Sequence[TrainingPair]) -> tuple[np.ndarray, np.ndarray]:
    if len(batch) == 0:
        raise ValueError("batch must not be empty")
    return (
        np.stack([p.input for p in batch]),
        np.stack([p.target for p in batch]),
    )


def summed_commutators(params: NetworkParams, batch: Sequence[TrainingPair]) -> dict[tuple[int, int], np.ndarray]:
    """``sum_x tr_rest M_x^{l,j}`` for every perceptron, on (inputs, qubit j).

    ``M_x^{l,j} = [A, B]`` with ``A`` the state after perceptrons ``1..j`` of
    layer ``l`` and ``B`` the target operator pulled back through perceptrons
    ``m_l..j+1``. Samples are summed in batch order.
    """
    inputs, targets = _batch_arrays(batch)
    arch = params.arch
    w = arch.widths
    trace = feedforward(params, inputs)
    sigmas = backward_sigmas(params, targets)
    out = {}
    for l in range(1, arch.num_layers + 1):
        m_prev, m_cur = w[l - 1], w[l]
        n = m_prev + m_cur
        embedded = embedded_layer(params, l)
        rho_prev = trace.layer_states[l - 1]
        a = _with_zero_ancilla(rho_prev, m_cur)
        b_list = [None] * m_cur
        b = _lift_right(sigmas[l - 1], m_prev)
        for j in range(m_cur - 1, -1, -1):
            b_list[j] = b
            b = _dagger(embedded[j]) @ b @ embedded[j]
        for j in range(m_cur):
            a = embedded[j] @ a @ _dagger(embedded[j])
            m_sum = commutator(a, b_list[j]).sum(axis=0)
            rest = [m_prev + k for k in range(m_cur) if k != j]
            out[(l, j)] = partial_trace_positions(m_sum, n, rest)
    return out


def update_matrices(
    params: NetworkParams,
    batch: Sequence[TrainingPair],
    eta: float,
    symmetrize: bool = True,
) -> dict[tuple[int, int], np.ndarray]:
    """Update generators K_j^l keyed by ``(l, j)`` with 0-based ``j``.

    ``K = eta * 2^{m_{l-1}} * i / |batch| * sum_x tr_rest M_x^{l,j}``; each K acts
    on (previous-layer qubits, layer-l qubit j), matching its perceptron.
    """
    sums = summed_commutators(params, batch)
    n = len(batch)
    ks = {}
    for (l, j), m in sums.items():
        k = eta * (2 ** params.arch.widths[l - 1]) * 1j / n * m
        ks[(l, j)] = hermitian_part(k) if symmetrize else k
    return ks


def apply_update(params: NetworkParams, ks: dict, eps: float) -> NetworkParams:
    """New params with every perceptron replaced by ``exp(i eps K) U``."""
    unitaries = [list(us) for us in params.unitaries]
    for (l, j), k in ks.items():
        unitaries[l - 1][j] = matexp_hermitian(k, eps) @ unitaries[l - 1][j]
    return NetworkParams(params.arch, unitaries)


def cost_derivative(params: NetworkParams, batch: Sequence[TrainingPair], directions: dict) -> float:
    """Directional derivative of the fidelity under ``U -> exp(i s K) U``.

    Evaluated with the trace formula ``(i/N) sum_x sum_{l,j} tr(M_x^{l,j} K_j^l)``.
    """
    sums = summed_commutators(params, batch)
    total = 0.0 + 0.0j
    for key, k in directions.items():
        total += np.trace(sums[key] @ k)
    return float((1j * total / len(batch)).real)


def _fidelities(params: NetworkParams, data: Sequence[TrainingPair]) -> tuple[np.ndarray, np.ndarray]:
    inputs, targets = _batch_arrays(data)
    rho_out = feedforward(params, inputs).output
    return rho_out, targets


def cost_fidelity(params: NetworkParams, dataset: Sequence[TrainingPair]) -> float:
    """Mean <phi_out| rho_out |phi_out> over the dataset."""
    rho_out, targets = _fidelities(params, dataset)
    f = np.einsum("bi,bij,bj->b", targets.conj(), rho_out, targets)
    if np.max(np.abs(f.imag)) >= 1e-10:
        raise ArithmeticError(f"fidelity has imaginary residue {np.max(np.abs(f.imag)):.3e}")
    return float(np.mean(f.real))


def cost_mse(params: NetworkParams, dataset: Sequence[TrainingPair]) -> float:
    """Mean squared Frobenius distance between output states and target projectors."""
    rho_out, targets = _fidelities(params, dataset)
    diff = rho_out - projector(targets)
    return float(np.mean(np.sum(np.abs(diff) ** 2, axis=(-2, -1))))


def pauli_diagnostic(k: np.ndarray, q: int) -> np.ndarray:
    """Pauli coefficients ``tr(K P) / 2^q`` in :func:`pauli_basis` order."""
    if k.shape != (2**q, 2**q):
        raise DimensionError(f"expected a {2**q}x{2**q} operator, got {k.shape}")
    coeffs = np.array([np.trace(k @ p) for p in pauli_basis(q)]) / 2**q
    return coeffs.real if np.allclose(coeffs.imag, 0.0, atol=1e-12) else coeffs


def pauli_reconstruct(coeffs: np.ndarray, q: int) -> np.ndarray:
    return sum(c * p for c, p in zip(coeffs, pauli_basis(q)))
