"""Federated training: node-side local updates, server-side selection,
ordered-product aggregation and the round loop."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .qnn import (
    Architecture,
    NetworkParams,
    TrainingPair,
    apply_update,
    cost_fidelity,
    cost_mse,
    random_params,
    update_matrices,
)
from .tensor import matexp_hermitian

log = logging.getLogger(__name__)


class Mode(str, Enum):
    GD = "GD"
    SGD = "SGD"


class ProtocolError(ValueError):
    """The set of update records does not match what the round expects."""


@dataclass(frozen=True)
class FedConfig:
    total_nodes: int = 10
    participants: int = 10
    rounds: int = 50
    interval: int = 2
    eps: float = 0.1
    eta: float = 1.0
    mode: Mode = Mode.GD
    sgd_batch_size: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.total_nodes < 1:
            raise ValueError("total_nodes must be >= 1")
        if not 1 <= self.participants <= self.total_nodes:
            raise ValueError(f"participants must lie in 1..{self.total_nodes}, got {self.participants}")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.interval < 1:
            raise ValueError("interval must be >= 1")
        if self.sgd_batch_size < 1:
            raise ValueError("sgd_batch_size must be >= 1")
        if not (self.eps > 0 and self.eta > 0):
            raise ValueError("eps and eta must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass
class NodeState:
    node_id: int
    local_data: list[TrainingPair]
    working_params: NetworkParams | None = None

    def __post_init__(self):
        if not self.local_data:
            raise ValueError(f"node {self.node_id} has no local data")

    @property
    def size(self) -> int:
        return len(self.local_data)


@dataclass(frozen=True)
class UpdateRecord:
    """One uploaded update unitary; ``step`` and ``layer`` are 1-based, ``perceptron`` 0-based."""

    node_id: int
    step: int
    layer: int
    perceptron: int
    unitary: np.ndarray = field(repr=False)

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.node_id, self.step, self.layer, self.perceptron)


@dataclass
class RoundReport:
    round: int
    selected: list[int]
    n_total: int
    train_fidelity: float
    train_mse: float
    test_fidelity: float
    test_mse: float
    wall_time: float


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a (seed, purpose, ...) tuple."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


_INIT, _SELECT, _NODE = 0, 1, 2


def initial_params(arch: Architecture | Sequence[int], seed: int) -> NetworkParams:
    """The Haar-random global model the server starts from for ``seed``."""
    return random_params(arch, rng_stream(seed, _INIT))


def _local_batch(node: NodeState, cfg: FedConfig, rng: np.random.Generator) -> list[TrainingPair]:
    if cfg.mode is Mode.GD:
        return node.local_data
    size = cfg.sgd_batch_size
    if size > node.size:
        log.warning("node %s: batch size %d exceeds local data %d, using full data", node.node_id, size, node.size)
        return node.local_data
    idx = rng.choice(node.size, size=size, replace=False)
    return [node.local_data[i] for i in idx]


def quanfed_node(
    node: NodeState,
    global_params: NetworkParams,
    cfg: FedConfig,
    n_total: int,
    rng: np.random.Generator,
) -> list[UpdateRecord]:
    """Run ``cfg.interval`` local steps and return the weighted update unitaries.

    Each step records ``exp(i eps N_n/N_t K)`` for every perceptron while the
    node's working copy moves by the unweighted ``exp(i eps K)``.
    """
    if n_total < node.size:
        raise ValueError(f"N_t={n_total} is smaller than node {node.node_id}'s {node.size} samples")
    weight = node.size / n_total
    node.working_params = global_params.copy()
    records = []
    for k in range(1, cfg.interval + 1):
        ks = update_matrices(node.working_params, _local_batch(node, cfg, rng), cfg.eta)
        for (l, j), kmat in ks.items():
            records.append(UpdateRecord(node.node_id, k, l, j, matexp_hermitian(kmat, cfg.eps * weight)))
        if k < cfg.interval:
            node.working_params = apply_update(node.working_params, ks, cfg.eps)
    return records


def select_nodes(all_ids: Sequence[int], n_p: int, rng: np.random.Generator) -> list[int]:
    """Uniformly pick ``n_p`` distinct node ids; returned in ascending order."""
    if n_p > len(all_ids):
        raise ValueError(f"cannot select {n_p} of {len(all_ids)} nodes")
    if n_p < 1:
        raise ValueError("must select at least one node")
    chosen = rng.choice(len(all_ids), size=n_p, replace=False)
    return sorted(all_ids[i] for i in chosen)


def aggregate(
    records: Iterable[UpdateRecord],
    cfg: FedConfig,
    selected: Sequence[int] | None = None,
    arch: Architecture | None = None,
) -> dict[tuple[int, int], np.ndarray]:
    """Global update unitary per perceptron.

    For each ``(l, j)`` this is ``P_{I_l} ... P_1`` where
    ``P_k = U_{n1,k} U_{n2,k} ...`` over selected nodes in ascending id order.
    The record set must hold every ``(node, step, l, j)`` exactly once.
    """
    table: dict[tuple[int, int, int, int], np.ndarray] = {}
    for r in records:
        if r.key in table:
            raise ProtocolError(f"duplicate update record (n={r.node_id}, k={r.step}, l={r.layer}, j={r.perceptron})")
        table[r.key] = r.unitary
    nodes = sorted(set(selected) if selected is not None else {key[0] for key in table})
    if arch is not None:
        perceptrons = list(arch.perceptrons())
    else:
        perceptrons = sorted({(key[2], key[3]) for key in table})
    expected = {(n, k, l, j) for n in nodes for k in range(1, cfg.interval + 1) for l, j in perceptrons}
    missing = sorted(expected - table.keys())
    if missing:
        n, k, l, j = missing[0]
        raise ProtocolError(f"missing update record (n={n}, k={k}, l={l}, j={j}); {len(missing)} missing in total")
    extra = sorted(table.keys() - expected)
    if extra:
        n, k, l, j = extra[0]
        raise ProtocolError(f"unexpected update record (n={n}, k={k}, l={l}, j={j})")
    out = {}
    for l, j in perceptrons:
        total = None
        for k in range(1, cfg.interval + 1):
            step = None
            for n in nodes:
                u = table[(n, k, l, j)]
                step = u if step is None else step @ u
            total = step if total is None else step @ total
        out[(l, j)] = total
    return out


def apply_global(params: NetworkParams, updates: dict[tuple[int, int], np.ndarray]) -> NetworkParams:
    unitaries = [list(us) for us in params.unitaries]
    for (l, j), u in updates.items():
        unitaries[l - 1][j] = u @ unitaries[l - 1][j]
    return NetworkParams(params.arch, unitaries)


def quanfed_ps(
    cfg: FedConfig,
    nodes: Sequence[NodeState],
    test_data: Sequence[TrainingPair],
    arch: Architecture | Sequence[int],
    init: NetworkParams | None = None,
    on_round: Callable[[RoundReport], None] | None = None,
) -> tuple[NetworkParams, list[RoundReport]]:
    """Server loop: select, collect local updates, aggregate, apply; ``cfg.rounds`` times.

    Metrics are evaluated after each round's update on the union of node data
    and on ``test_data``. A unitarity violation raises
    :class:`~quantumfed.qnn.UnitarityError`.
    """
    if not isinstance(arch, Architecture):
        arch = Architecture(tuple(arch))
    if len(nodes) != cfg.total_nodes:
        raise ValueError(f"config expects {cfg.total_nodes} nodes, got {len(nodes)}")
    for node in nodes:
        p = node.local_data[0]
        if p.input.shape[0] != 2**arch.m_in or p.target.shape[0] != 2**arch.m_out:
            raise ValueError(f"node {node.node_id} data does not match architecture {arch}")
    params = init.copy() if init is not None else initial_params(arch, cfg.seed)
    by_id = {node.node_id: node for node in nodes}
    ids = sorted(by_id)
    select_rng = rng_stream(cfg.seed, _SELECT)
    train_union = [p for node in nodes for p in node.local_data]
    reports = []
    for t in range(1, cfg.rounds + 1):
        start = time.perf_counter()
        chosen = select_nodes(ids, cfg.participants, select_rng)
        n_total = sum(by_id[n].size for n in chosen)
        records = []
        for n in chosen:
            records.extend(quanfed_node(by_id[n], params, cfg, n_total, rng_stream(cfg.seed, _NODE, t, n)))
        params = apply_global(params, aggregate(records, cfg, chosen, arch))
        report = RoundReport(
            round=t,
            selected=chosen,
            n_total=n_total,
            train_fidelity=cost_fidelity(params, train_union),
            train_mse=cost_mse(params, train_union),
            test_fidelity=cost_fidelity(params, test_data),
            test_mse=cost_mse(params, test_data),
            wall_time=time.perf_counter() - start,
        )
        reports.append(report)
        if on_round is not None:
            on_round(report)
    return params, reports


def centralized_reference(
    params: NetworkParams,
    data: Sequence[TrainingPair],
    steps: int,
    eps: float,
    eta: float,
) -> NetworkParams:
    """Plain single-machine training: full-data update matrices every step."""
    for _ in range(steps):
        params = apply_update(params, update_matrices(params, data, eta), eps)
    return params
