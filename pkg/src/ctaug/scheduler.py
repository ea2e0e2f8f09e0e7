"""Online augmentation: per-batch probability gating.

One Bernoulli(p) draw per batch decides whether the configured technique is
applied to every sample in it (all-or-nothing). Each gated sample draws its
transform parameters from its own keyed stream, so results are independent
of worker count and batch traversal order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core.image import Sample
from .core.rng import derive_stream, item_stream
from .errors import ValidationError
from .transforms import TransformSpec, apply_transform

PRESET_PROBABILITIES = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3)


@dataclass(frozen=True)
class AugmentationPlan:
    spec: TransformSpec
    probability: float
    per_image: bool = False  # ablation mode: gate each image separately

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError(f"probability must be in [0, 1], got {self.probability}")


@dataclass(frozen=True)
class Batch:
    samples: tuple[Sample, ...]
    epoch: int
    batch_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValidationError("batch must be non-empty")
        shape = self.samples[0].image.pixels.shape
        for s in self.samples:
            if s.image.pixels.shape != shape:
                raise ValidationError("all samples in a batch must share dimensions")


def augment_batch(batch: Batch, plan: AugmentationPlan, master_seed: int) -> Batch:
    """Gate the batch, then transform every sample with its own stream."""
    if plan.per_image:
        out = []
        for i, sample in enumerate(batch.samples):
            gate = item_stream(master_seed, "gate-item", batch.epoch, batch.batch_index, i)
            if gate.uniform() < plan.probability:
                rng = item_stream(master_seed, "item", batch.epoch, batch.batch_index, i)
                out.append(apply_transform(sample, plan.spec, rng))
            else:
                out.append(sample)
        return Batch(samples=tuple(out), epoch=batch.epoch, batch_index=batch.batch_index)

    gate = derive_stream(master_seed, "gate", batch.epoch, batch.batch_index)
    if not gate.uniform() < plan.probability:
        return batch
    out = []
    for i, sample in enumerate(batch.samples):
        rng = item_stream(master_seed, "item", batch.epoch, batch.batch_index, i)
        out.append(apply_transform(sample, plan.spec, rng))
    return Batch(samples=tuple(out), epoch=batch.epoch, batch_index=batch.batch_index)


def augment_stream(
    samples: Iterable[Sample],
    plan: AugmentationPlan,
    batch_size: int,
    master_seed: int,
    epoch: int = 0,
) -> Iterator[Sample]:
    """Chunk a sample stream into batches, gate each, and flatten."""
    if batch_size < 1:
        raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
    pending: list[Sample] = []
    batch_index = 0

    def flush(chunk: list[Sample], index: int) -> Iterator[Sample]:
        batch = Batch(samples=tuple(chunk), epoch=epoch, batch_index=index)
        yield from augment_batch(batch, plan, master_seed).samples

    for sample in samples:
        pending.append(sample)
        if len(pending) == batch_size:
            yield from flush(pending, batch_index)
            pending = []
            batch_index += 1
    if pending:
        yield from flush(pending, batch_index)
