"""Mini-batch training loop with best-validation checkpointing."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..model.network import WinPredictor
from ..rng import SplitMix64, derive_seed
from ..tensor import Tape, Tensor
from .loss import bce_loss
from .optim import AdamW, TrainConfig

log = logging.getLogger(__name__)

Example = tuple[np.ndarray, int]  # ((T, C, H, W) clip, label)


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainResult:
    log: list[EpochLog]
    best_params: dict[str, np.ndarray]
    best_epoch: int
    best_val_acc: float


def predict_probs(model: WinPredictor, clips: list[np.ndarray], batch_size: int = 64) -> np.ndarray:
    """Forward in inference mode (no tape), batched for throughput."""
    out = []
    for i in range(0, len(clips), batch_size):
        x = np.stack(clips[i : i + batch_size])
        out.append(model.forward(x).data)
    return np.concatenate(out) if out else np.zeros(0)


def evaluate_accuracy(model: WinPredictor, dataset: list[Example], threshold: float = 0.5) -> float:
    probs = predict_probs(model, [x for x, _ in dataset])
    preds = (probs >= threshold).astype(int)
    labels = np.array([y for _, y in dataset])
    return float((preds == labels).mean())


def train_model(
    model: WinPredictor,
    train_set: list[Example],
    val_set: list[Example],
    config: TrainConfig,
    progress=None,
) -> TrainResult:
    """Seeded shuffled mini-batches; retains the best-validation parameters.

    `progress`, when given, is called with each EpochLog row as it lands.
    """
    if not train_set or not val_set:
        raise ValueError("train and validation sets must be non-empty")
    opt = AdamW(model.params, config)
    history: list[EpochLog] = []
    best = (-1.0, -1, None)  # (val_acc, epoch, snapshot)
    for epoch in range(config.epochs):
        order = list(range(len(train_set)))
        SplitMix64(derive_seed(config.seed, epoch)).shuffle(order)
        loss_sum = 0.0
        hits = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start : start + config.batch_size]]
            x = np.stack([ex[0] for ex in batch])
            y = np.array([ex[1] for ex in batch], dtype=np.float64)
            with Tape() as tape:
                probs = model.forward(x)
                loss = bce_loss(probs, y)
                tape.backward(loss)
            opt.step()
            opt.zero_grad()
            loss_sum += float(loss.data.reshape(())) * len(batch)
            hits += int(((probs.data >= config.threshold).astype(int) == y).sum())
        row = EpochLog(
            epoch=epoch,
            train_loss=loss_sum / len(train_set),
            train_acc=hits / len(train_set),
            val_acc=evaluate_accuracy(model, val_set, config.threshold),
        )
        history.append(row)
        log.info(
            "epoch %d: loss %.4f train_acc %.3f val_acc %.3f",
            row.epoch, row.train_loss, row.train_acc, row.val_acc,
        )
        if progress is not None:
            progress(row)
        if row.val_acc > best[0]:
            best = (row.val_acc, epoch, {k: p.data.copy() for k, p in model.params.items()})
    assert best[2] is not None
    return TrainResult(
        log=history,
        best_params=best[2],
        best_epoch=best[1],
        best_val_acc=best[0],
    )


def dataset_to_examples(records, frame_count: int, label_fn=None) -> list[Example]:
    """Materialize (clip, label) pairs at full progress.

    `label_fn(record) -> 0/1/None` overrides the recorded winner (None
    drops the record); the default labels p1-wins as 1.
    """
    from ..sim.engine import sample_timeline

    out: list[Example] = []
    for rec in records:
        if label_fn is not None:
            label = label_fn(rec)
            if label is None:
                continue
        else:
            if rec.winner == "draw":
                continue
            label = 1 if rec.winner == "p1" else 0
        out.append((sample_timeline(rec, frame_count, 1.0), label))
    return out
