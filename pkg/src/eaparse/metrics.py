"""Region (J) and boundary (F) quality measures with per-class aggregation.

J is the Jaccard index of the predicted and ground-truth pixel sets of one
class. F is the F-measure of boundary precision and recall, where a boundary
pixel matches when the other map has a boundary pixel within a tolerance
radius. Frames where a class appears in neither map are skipped, not scored:
scoring an absent class as perfect would inflate averages, scoring it as
zero would punish correct rejections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import dilate_mask, extract_boundary
from .errors import EmptyInput, NoClassEverPresent, ShapeMismatch
from .tensorio import ensure_label_map


def default_tolerance(height: int, width: int) -> int:
    """Boundary match radius scaled to image size: 0.8% of the diagonal.

    Rounded half-up and floored at 1 pixel so tiny frames still tolerate
    one-pixel boundary shifts.
    """
    diag = math.hypot(height, width)
    return max(1, int(math.floor(0.008 * diag + 0.5)))


def region_jaccard(pred, gt, class_id: int) -> float | None:
    """|pred ∩ gt| / |pred ∪ gt| for one class; None when both are empty."""
    p = ensure_label_map(pred) == class_id
    g = ensure_label_map(gt) == class_id
    if p.shape != g.shape:
        raise ShapeMismatch(f"prediction shape {p.shape} != ground truth shape {g.shape}")
    union = int((p | g).sum())
    if union == 0:
        return None
    return float(int((p & g).sum()) / union)


def boundary_f(pred, gt, class_id: int, tolerance: int | None = None) -> float | None:
    """F-measure of boundary agreement for one class within ``tolerance`` pixels.

    None when neither map has any boundary for the class; 0.0 when exactly
    one side does. Precision counts predicted boundary pixels within the
    tolerance of some ground-truth boundary pixel, recall the reverse.
    """
    p = ensure_label_map(pred)
    g = ensure_label_map(gt)
    if p.shape != g.shape:
        raise ShapeMismatch(f"prediction shape {p.shape} != ground truth shape {g.shape}")
    if tolerance is None:
        tolerance = default_tolerance(*p.shape)
    bp = extract_boundary((p == class_id).astype(np.uint8)).astype(bool)
    bg = extract_boundary((g == class_id).astype(np.uint8)).astype(bool)
    np_, ng = int(bp.sum()), int(bg.sum())
    if np_ == 0 and ng == 0:
        return None
    if np_ == 0 or ng == 0:
        return 0.0
    gt_zone = dilate_mask(bg.astype(np.uint8), tolerance).astype(bool)
    pred_zone = dilate_mask(bp.astype(np.uint8), tolerance).astype(bool)
    precision = int((bp & gt_zone).sum()) / np_
    recall = int((bg & pred_zone).sum()) / ng
    if precision + recall == 0:
        return 0.0
    return float(2.0 * precision * recall / (precision + recall))


@dataclass
class ClassScore:
    """Mean J and F of one class over the frames where it was scoreable."""

    class_id: int
    mean_j: float
    mean_f: float
    frames_counted: int


@dataclass
class EvalReport:
    """Per-class scores plus dataset-level means; J&F is their midpoint."""

    per_class: list[ClassScore] = field(default_factory=list)
    mean_j: float = 0.0
    mean_f: float = 0.0
    j_and_f: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "per_class": {
                str(s.class_id): {
                    "J": s.mean_j,
                    "F": s.mean_f,
                    "frames": s.frames_counted,
                }
                for s in self.per_class
            },
            "mean_J": self.mean_j,
            "mean_F": self.mean_f,
            "J_and_F": self.j_and_f,
        }


def evaluate_frames(
    preds, gts, class_ids, tolerance: int | None = None
) -> EvalReport:
    """Score prediction/ground-truth frame lists for each class and aggregate.

    Per class and frame, J and F are skipped independently (None). A class
    with no scoreable frame at all is dropped from the report; if that
    happens for every class the dataset carries no signal and
    NoClassEverPresent is raised. Dataset means average the per-class means,
    each class weighted equally, and J&F = (mean_J + mean_F) / 2. The result
    depends only on the multiset of frames, not their processing order.
    """
    preds = list(preds)
    gts = list(gts)
    if not preds or not gts:
        raise EmptyInput("evaluation needs at least one frame")
    if len(preds) != len(gts):
        raise ShapeMismatch(f"{len(preds)} predictions vs {len(gts)} ground truths")
    class_ids = [int(c) for c in class_ids]
    j_scores: dict[int, list[float]] = {c: [] for c in class_ids}
    f_scores: dict[int, list[float]] = {c: [] for c in class_ids}
    for pred, gt in zip(preds, gts):
        for c in class_ids:
            j = region_jaccard(pred, gt, c)
            if j is not None:
                j_scores[c].append(j)
            f = boundary_f(pred, gt, c, tolerance)
            if f is not None:
                f_scores[c].append(f)

    report = EvalReport()
    for c in class_ids:
        if not j_scores[c]:
            continue
        # value-sorted reduction: the means, and with them the whole report,
        # depend only on the multiset of frames, not the list order
        mj = float(np.mean(np.sort(j_scores[c])))
        mf = float(np.mean(np.sort(f_scores[c]))) if f_scores[c] else 0.0
        report.per_class.append(
            ClassScore(class_id=c, mean_j=mj, mean_f=mf, frames_counted=len(j_scores[c]))
        )
    if not report.per_class:
        raise NoClassEverPresent("no requested class appears in any frame")
    report.mean_j = float(np.mean([s.mean_j for s in report.per_class]))
    f_classes = [s.mean_f for s in report.per_class if f_scores[s.class_id]]
    report.mean_f = float(np.mean(f_classes)) if f_classes else 0.0
    report.j_and_f = (report.mean_j + report.mean_f) / 2.0
    return report
