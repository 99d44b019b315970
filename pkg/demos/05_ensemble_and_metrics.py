"""Fusing model outputs in probability space and scoring them with J and F."""

import numpy as np

import eaparse as ea

rng = np.random.default_rng(0)

# ground truth: a square of class 1
gt = np.zeros((16, 16), dtype=np.uint8)
gt[4:12, 4:12] = 1


def fake_logits(mask, strength, size):
    """Logits that agree with ``mask`` with the given confidence, any grid size."""
    small = mask if size == 16 else mask[::2, ::2]
    out = np.zeros((2, size, size), dtype=np.float32)
    out[1] = np.where(small == 1, strength, -strength)
    out[0] = -out[1]
    return out


# member A is confident and correct; member B runs at half resolution and
# lost a corner of the square
holed = gt.copy()
holed[4:8, 4:8] = 0
member_a = fake_logits(gt, 3.0, 16)
member_b = fake_logits(holed, 1.0, 8)

# probabilities are averaged (softmax first, then mean), members resized
# bilinearly to a shared grid; ties in the argmax go to the lowest class id
probs = ea.ensemble_probabilities([member_a, member_b])
pred = ea.ensemble_argmax([member_a, member_b])
print("prob maps sum to one:", bool(np.allclose(probs.sum(axis=0), 1.0)))

for name, p in (("A alone", member_a), ("B alone", member_b)):
    solo = ea.ensemble_argmax([p], 16, 16)
    print(f"{name}: J = {ea.region_jaccard(solo, gt, 1):.4f}")
print(f"ensemble: J = {ea.region_jaccard(pred, gt, 1):.4f}")

# F scores boundary agreement within a pixel tolerance; the default scales
# with the image diagonal
print("\ndefault tolerance at 16x16:", ea.default_tolerance(16, 16))
print("F tolerance 0:", round(ea.boundary_f(pred, gt, 1, 0), 4))
print("F tolerance 2:", round(ea.boundary_f(pred, gt, 1, 2), 4))

# per-class aggregation over several frames; frames missing a class are
# skipped rather than scored as 0 or 1
report = ea.evaluate_frames([pred, gt], [gt, gt], class_ids=[1], tolerance=1)
print("\nreport:", report.to_json_dict())
