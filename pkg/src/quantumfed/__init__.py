"""Federated training of dissipative quantum neural networks on a dense simulator."""

from .data import DatasetSpec, PartitionedDataset, generate, partition_heterogeneous
from .protocol import (
    FedConfig,
    Mode,
    NodeState,
    ProtocolError,
    RoundReport,
    UpdateRecord,
    aggregate,
    centralized_reference,
    quanfed_node,
    quanfed_ps,
    select_nodes,
)
from .qnn import (
    Architecture,
    NetworkParams,
    TrainingPair,
    UnitarityError,
    cost_fidelity,
    cost_mse,
    feedforward,
    random_params,
    update_matrices,
)

__version__ = "0.1.0"
