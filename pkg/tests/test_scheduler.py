import numpy as np
import pytest

from ctaug.core import derive_stream
from ctaug.errors import ValidationError
from ctaug.scheduler import AugmentationPlan, Batch, augment_batch, augment_stream
from ctaug.transforms import make_spec
from conftest import random_sample


def make_batches(np_rng, n_batches, batch_size=4, h=16, w=16):
    return [
        Batch(
            samples=tuple(random_sample(np_rng, h, w) for _ in range(batch_size)),
            epoch=0,
            batch_index=i,
        )
        for i in range(n_batches)
    ]


def test_probability_zero_is_identity(np_rng):
    plan = AugmentationPlan(spec=make_spec("Flip"), probability=0.0)
    for batch in make_batches(np_rng, 5):
        out = augment_batch(batch, plan, master_seed=123)
        assert out is batch


def test_probability_one_applies_to_every_sample(np_rng):
    plan = AugmentationPlan(spec=make_spec("Flip", {"axis": "horizontal"}), probability=1.0)
    for batch in make_batches(np_rng, 5):
        out = augment_batch(batch, plan, master_seed=123)
        for before, after in zip(batch.samples, out.samples):
            assert np.array_equal(after.image.pixels, before.image.pixels[:, ::-1])
            assert np.array_equal(after.mask.labels, before.mask.labels[:, ::-1])


def test_empirical_rate_at_p03():
    # Count gate decisions directly over 10,000 batch keys.
    plan_p = 0.3
    hits = sum(
        1
        for i in range(10_000)
        if derive_stream(77, "gate", 0, i).uniform() < plan_p
    )
    rate = hits / 10_000
    assert abs(rate - plan_p) <= 0.02


def test_gated_batch_is_all_or_nothing(np_rng):
    plan = AugmentationPlan(spec=make_spec("Flip", {"axis": "horizontal"}), probability=0.5)
    for batch in make_batches(np_rng, 40):
        out = augment_batch(batch, plan, master_seed=9)
        flipped = [
            np.array_equal(a.image.pixels, b.image.pixels[:, ::-1])
            for a, b in zip(out.samples, batch.samples)
        ]
        unchanged = [a.equal_bytes(b) for a, b in zip(out.samples, batch.samples)]
        assert all(flipped) or all(unchanged)


def test_stream_matches_per_sample_sequence(np_rng):
    # batch_size=1, p=1 must equal applying the transform sample by sample.
    from ctaug.core.rng import item_stream
    from ctaug.transforms import apply_transform

    samples = [random_sample(np_rng) for _ in range(6)]
    plan = AugmentationPlan(spec=make_spec("Rotate"), probability=1.0)
    streamed = list(augment_stream(iter(samples), plan, batch_size=1, master_seed=5))
    for i, (orig, got) in enumerate(zip(samples, streamed)):
        rng = item_stream(5, "item", 0, i, 0)
        assert got.equal_bytes(apply_transform(orig, plan.spec, rng))


def test_empty_stream():
    plan = AugmentationPlan(spec=make_spec("Flip"), probability=1.0)
    assert list(augment_stream(iter([]), plan, batch_size=4, master_seed=1)) == []


def test_stream_deterministic_and_order_preserving(np_rng):
    samples = [random_sample(np_rng) for _ in range(13)]
    plan = AugmentationPlan(spec=make_spec("ShiftScaleRotate"), probability=0.5)
    a = list(augment_stream(iter(samples), plan, batch_size=4, master_seed=21))
    b = list(augment_stream(iter(samples), plan, batch_size=4, master_seed=21))
    assert len(a) == len(b) == 13
    for x, y in zip(a, b):
        assert x.equal_bytes(y)
    for orig, out in zip(samples, a):
        assert out.sample_id == orig.sample_id


def test_per_image_mode(np_rng):
    plan = AugmentationPlan(
        spec=make_spec("Flip", {"axis": "horizontal"}), probability=0.5, per_image=True
    )
    batch = make_batches(np_rng, 1, batch_size=64)[0]
    out = augment_batch(batch, plan, master_seed=3)
    changed = sum(0 if a.equal_bytes(b) else 1 for a, b in zip(out.samples, batch.samples))
    assert 0 < changed < 64  # mixed decisions within one batch


def test_plan_validation():
    with pytest.raises(ValidationError):
        AugmentationPlan(spec=make_spec("Flip"), probability=1.5)
    with pytest.raises(ValidationError):
        Batch(samples=(), epoch=0, batch_index=0)
    plan = AugmentationPlan(spec=make_spec("Flip"), probability=1.0)
    with pytest.raises(ValidationError):
        list(augment_stream(iter([]), plan, batch_size=0, master_seed=1))
