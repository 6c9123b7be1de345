"""Running configured experiments and writing their metrics."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .data import generate
from .protocol import NodeState, RoundReport, quanfed_ps
from .qnn import NetworkParams

log = logging.getLogger(__name__)

CSV_HEADER = ("round", "train_fidelity", "train_mse", "test_fidelity", "test_mse")


@dataclass
class RunResult:
    config: ExperimentConfig
    params: NetworkParams
    reports: list[RoundReport]
    csv_path: Path | None = None


def _fmt(x: float) -> str:
    return format(x, ".15e")


def write_metrics(path: Path, reports: Sequence[RoundReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow([r.round, _fmt(r.train_fidelity), _fmt(r.train_mse), _fmt(r.test_fidelity), _fmt(r.test_mse)])


def read_metrics(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: (int(v) if k == "round" else float(v)) for k, v in row.items()} for row in csv.DictReader(fh)]


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunResult:
    """Generate the dataset, train federatedly and (optionally) write CSV + config echo."""
    data, _ = generate(config.dataset_spec())
    nodes = [NodeState(i, block) for i, block in enumerate(data.nodes)]

    def progress(r: RoundReport):
        log.info(
            "%s round %d: train F=%.4f test F=%.4f (%.2fs)",
            config.name, r.round, r.train_fidelity, r.test_fidelity, r.wall_time,
        )

    params, reports = quanfed_ps(config.fed_config(), nodes, data.test, config.arch(), on_round=progress)
    result = RunResult(config, params, reports)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.csv_path = out / f"{config.name}.csv"
        write_metrics(result.csv_path, reports)
        (out / f"{config.name}.config.yaml").write_text(config.to_yaml())
    return result


def oscillation_amplitude(values: Sequence[float], window: int = 20) -> float:
    """Largest round-to-round change over the last ``window`` rounds."""
    tail = np.asarray(values[-(window + 1):], dtype=float)
    if tail.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(tail))))
