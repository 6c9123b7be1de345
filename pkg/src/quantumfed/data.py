"""Synthetic quantum datasets: a hidden unitary, noisy training pairs and a
similarity-ordered (non-iid) split across nodes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .qnn import TrainingPair
from .tensor import haar_state, haar_unitary


@dataclass(frozen=True)
class DatasetSpec:
    num_train: int = 100
    num_test: int = 100
    noise_ratio: float = 0.0
    num_qubits: int = 2
    num_nodes: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.num_train < 1 or self.num_test < 1 or self.num_qubits < 1 or self.num_nodes < 1:
            raise ValueError("dataset counts must be >= 1")
        if not 0.0 <= self.noise_ratio <= 1.0:
            raise ValueError(f"noise_ratio must lie in [0, 1], got {self.noise_ratio}")


@dataclass
class PartitionedDataset:
    nodes: list[list[TrainingPair]]
    test: list[TrainingPair]
    noisy: frozenset[int] = frozenset()

    @property
    def train(self) -> list[TrainingPair]:
        return [p for node in self.nodes for p in node]


def sort_key(pair: TrainingPair) -> tuple[float, ...]:
    """Lexicographic key over (Re a0, Im a0, Re a1, Im a1, ...) of the input state."""
    return tuple(np.column_stack([pair.input.real, pair.input.imag]).ravel().tolist())


def partition_heterogeneous(pairs: Sequence[TrainingPair], num_nodes: int) -> list[list[TrainingPair]]:
    """Sort pairs by input amplitudes and deal contiguous blocks to nodes.

    Block sizes differ by at most one; the remainder goes to the earliest nodes.
    """
    if num_nodes < 1 or num_nodes > len(pairs):
        raise ValueError(f"cannot split {len(pairs)} pairs across {num_nodes} nodes")
    ordered = sorted(pairs, key=sort_key)
    base, extra = divmod(len(ordered), num_nodes)
    blocks, start = [], 0
    for n in range(num_nodes):
        size = base + (1 if n < extra else 0)
        blocks.append(ordered[start : start + size])
        start += size
    return blocks


def _clean_pair(ug: np.ndarray, m: int, rng: np.random.Generator) -> TrainingPair:
    psi = haar_state(m, rng)
    return TrainingPair(psi, ug @ psi)


def generate(spec: DatasetSpec, rng: np.random.Generator | None = None) -> tuple[PartitionedDataset, np.ndarray]:
    """Build the node datasets, clean test set and the hidden unitary U_g.

    A uniformly chosen ``floor(noise_ratio * num_train)`` subset of training
    pairs gets an independent random input *and* target. ``U_g`` is returned for
    diagnostics only.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    m = spec.num_qubits
    ug = haar_unitary(m, rng)
    train = [_clean_pair(ug, m, rng) for _ in range(spec.num_train)]
    n_noisy = int(np.floor(spec.noise_ratio * spec.num_train))
    noisy = sorted(rng.choice(spec.num_train, size=n_noisy, replace=False).tolist()) if n_noisy else []
    for i in noisy:
        train[i] = TrainingPair(haar_state(m, rng), haar_state(m, rng))
    test = [_clean_pair(ug, m, rng) for _ in range(spec.num_test)]
    noisy_ids = {id(train[i]) for i in noisy}
    nodes = partition_heterogeneous(train, spec.num_nodes)
    flat = [p for node in nodes for p in node]
    noisy_positions = frozenset(i for i, p in enumerate(flat) if id(p) in noisy_ids)
    return PartitionedDataset(nodes, test, noisy_positions), ug


def _encode_states(vs) -> list:
    return [[[float(a.real), float(a.imag)] for a in v] for v in vs]


def _decode_states(raw) -> list[np.ndarray]:
    return [np.array([complex(re, im) for re, im in v]) for v in raw]


def dump_dataset(path: str | Path, spec: DatasetSpec, data: PartitionedDataset, ug: np.ndarray | None = None) -> None:
    """Write the dataset as JSON; complex numbers are ``[re, im]`` pairs."""
    doc = {
        "spec": asdict(spec),
        "seed": spec.seed,
        "nodes": [
            {"inputs": _encode_states(p.input for p in node), "targets": _encode_states(p.target for p in node)}
            for node in data.nodes
        ],
        "test": {
            "inputs": _encode_states(p.input for p in data.test),
            "targets": _encode_states(p.target for p in data.test),
        },
        "noisy": sorted(data.noisy),
    }
    if ug is not None:
        doc["hidden_unitary"] = [_encode_states([row])[0] for row in ug]
    Path(path).write_text(json.dumps(doc, indent=1))


def load_dataset(path: str | Path) -> tuple[DatasetSpec, PartitionedDataset]:
    doc = json.loads(Path(path).read_text())
    spec = DatasetSpec(**doc["spec"])

    def pairs(block):
        return [TrainingPair(i, t) for i, t in zip(_decode_states(block["inputs"]), _decode_states(block["targets"]))]

    nodes = [pairs(b) for b in doc["nodes"]]
    return spec, PartitionedDataset(nodes, pairs(doc["test"]), frozenset(doc.get("noisy", [])))
