"""The ``eaparse`` executable: every operation as a file-driven subcommand.

Global flags (given before the subcommand): ``--config c.json`` merges a
JSON document over the built-in defaults, ``--seed S`` overrides the config
seed, ``--jobs N`` sizes the pipeline worker pool, and ``--print-config``
prints the effective configuration as JSON and exits.

Exit codes: 0 on success, 2 on malformed input of any kind (bad files, bad
flags, unknown config keys), 1 on an internal error. No subcommand writes a
partial output: results are computed fully before the first byte goes to
disk.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import traceback
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .augment import SwapTable, cut_half, hflip_with_swap, rotate_quarter
from .boundary import DEFAULT_EDGE_RADIUS, edge_attention_mask, extract_boundary
from .ensemble import ensemble_argmax, ensemble_probabilities
from .errors import ToolkitError
from .grabcut import GrabcutParams, grabcut_refine, refine_class
from .metrics import evaluate_frames
from .roi import DEFAULT_EXPAND_RATIO, Box, crop, expand_box, paste
from .segloss import (
    LossResult,
    LossWeights,
    boundary_bce,
    softmax_cross_entropy,
    total_loss,
)
from .tensorio import (
    read_label_map,
    read_logits,
    read_rgb_image,
    write_label_map,
    write_logits,
    write_rgb_image,
)

DEFAULT_CONFIG = {
    "swap_pairs": [],
    "edge_radius": DEFAULT_EDGE_RADIUS,
    "loss_weights": {"lambda_edge": 1.0, "lambda_boundary": 1.0},
    "grabcut": {
        "components_k": 5,
        "gamma": 50.0,
        "iterations": 5,
        "erode_radius": 3,
        "dilate_radius": 10,
        "classes": [],
    },
    "ensemble_size": None,
    "metric_tolerance": None,
    "expand_ratio": DEFAULT_EXPAND_RATIO,
    "classes": None,
    "rng_seed": 0,
}


def _merge_config(base: dict, override: dict, scope: str = "config") -> dict:
    """Recursive merge that rejects keys the schema does not define."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ToolkitError(f"unknown config key: {scope}.{key}")
        if isinstance(base[key], dict) and base[key]:
            if not isinstance(value, dict):
                raise ToolkitError(f"{scope}.{key} must be an object")
            out[key] = _merge_config(base[key], value, f"{scope}.{key}")
        else:
            out[key] = value
    return out


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ToolkitError(f"{path}: not valid JSON: {exc}") from exc


def _effective_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config is not None:
        user = _load_json(args.config)
        if not isinstance(user, dict):
            raise ToolkitError(f"{args.config}: config must be a JSON object")
        cfg = _merge_config(cfg, user)
    if getattr(args, "seed", None) is not None:
        cfg["rng_seed"] = int(args.seed)
    return cfg


def _parse_box(text: str) -> Box:
    parts = text.split(",")
    if len(parts) != 4:
        raise ToolkitError(f"box must be x0,y0,x1,y1 with integers, got {text!r}")
    try:
        x0, y0, x1, y1 = (int(p) for p in parts)
    except ValueError as exc:
        raise ToolkitError(f"box must be x0,y0,x1,y1 with integers, got {text!r}") from exc
    return Box(x0, y0, x1, y1)


def _parse_classes(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise ToolkitError(f"class list must be comma-separated integers, got {text!r}") from exc


def _read_boxes_jsonl(path) -> dict[str, list[Box]]:
    """One {"frame": name, "box": [x0,y0,x1,y1]} object per line."""
    boxes: dict[str, list[Box]] = defaultdict(list)
    try:
        with open(path, "r", encoding="utf-8") as f:
            for ln, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ToolkitError(f"{path}:{ln}: not valid JSON: {exc}") from exc
                if (
                    not isinstance(entry, dict)
                    or "frame" not in entry
                    or "box" not in entry
                    or not isinstance(entry["box"], list)
                    or len(entry["box"]) != 4
                ):
                    raise ToolkitError(
                        f'{path}:{ln}: expected {{"frame": name, "box": [x0,y0,x1,y1]}}'
                    )
                boxes[str(entry["frame"])].append(Box(*(int(v) for v in entry["box"])))
    except OSError as exc:
        raise ToolkitError(f"cannot read {path}: {exc}") from exc
    return dict(boxes)


def _swap_table(cfg: dict, swaps_path) -> SwapTable:
    pairs = cfg["swap_pairs"]
    if swaps_path is not None:
        doc = _load_json(swaps_path)
        if isinstance(doc, dict):
            if "swap_pairs" not in doc:
                raise ToolkitError(f"{swaps_path}: expected a swap_pairs entry")
            pairs = doc["swap_pairs"]
        elif isinstance(doc, list):
            pairs = doc
        else:
            raise ToolkitError(f"{swaps_path}: expected a list or an object")
    return SwapTable(pairs)


def _grabcut_params(cfg: dict, args, rng_seed: int) -> GrabcutParams:
    gc = cfg["grabcut"]
    pick = lambda flag, key: gc[key] if flag is None else flag  # noqa: E731
    return GrabcutParams(
        components_k=int(pick(getattr(args, "components", None), "components_k")),
        gamma=float(pick(getattr(args, "gamma", None), "gamma")),
        iterations=int(pick(getattr(args, "iters", None), "iterations")),
        erode_radius=int(pick(getattr(args, "erode", None), "erode_radius")),
        dilate_radius=int(pick(getattr(args, "dilate", None), "dilate_radius")),
        rng_seed=rng_seed,
    )


# --- subcommand handlers ---


def _cmd_edges(cfg, args) -> int:
    labels = read_label_map(args.labels)
    radius = cfg["edge_radius"] if args.radius is None else args.radius
    mask = edge_attention_mask(labels, int(radius))
    write_label_map(mask, args.out)
    return 0


def _cmd_loss(cfg, args) -> int:
    want_grad = args.grad_out is not None
    logits = read_logits(args.logits)
    labels = read_label_map(args.labels)
    mask = read_label_map(args.mask) if args.mask else None
    seg = softmax_cross_entropy(logits, labels, mask, want_gradient=want_grad)

    zero_grad = np.zeros(logits.shape, dtype=np.float64) if want_grad else None
    edge = LossResult(0.0, 0, zero_grad)
    if args.edge_mask_radius is not None:
        em = edge_attention_mask(labels, args.edge_mask_radius)
        edge = softmax_cross_entropy(logits, labels, em, want_gradient=want_grad)

    bnd = LossResult(0.0, 0, np.zeros(labels.shape) if want_grad else None)
    if args.edge_logits is not None:
        el = read_logits(args.edge_logits)
        bnd = boundary_bce(el, extract_boundary(labels), want_gradient=want_grad)

    weights = LossWeights(
        lambda_edge=cfg["loss_weights"]["lambda_edge"]
        if args.edge_weight is None
        else args.edge_weight,
        lambda_boundary=cfg["loss_weights"]["lambda_boundary"]
        if args.boundary_weight is None
        else args.boundary_weight,
    )
    total = total_loss(seg, edge, bnd, weights)
    if want_grad:
        write_logits(total.gradient.astype(np.float32), args.grad_out)
    print(json.dumps({"loss": total.loss, "pixels": total.contributing_pixels}))
    return 0


def _cmd_augment(cfg, args) -> int:
    image = read_rgb_image(args.image)
    labels = read_label_map(args.labels)

    if args.op == "hflip":
        swaps = _swap_table(cfg, args.swaps_config)
        out_image, out_labels = hflip_with_swap(image, labels, swaps)
    elif args.op in ("rot90", "rot270"):
        out_image, out_labels = rotate_quarter(image, labels, 1 if args.op == "rot90" else 3)
    else:  # cuthalf
        if args.side is None:
            raise ToolkitError("--side is required for --op cuthalf")
        out_image, out_labels = cut_half(image, labels, args.side)

    write_rgb_image(out_image, f"{args.out_prefix}image.ppm")
    write_label_map(out_labels, f"{args.out_prefix}labels.pgm")
    return 0


def _cmd_grabcut(cfg, args) -> int:
    image = read_rgb_image(args.image)
    labels = read_label_map(args.labels)
    params = _grabcut_params(cfg, args, rng_seed=cfg["rng_seed"])
    if args.energy_trace is not None:
        mask = (labels == args.class_id).astype(np.uint8)
        if not mask.any():
            raise ToolkitError(f"class {args.class_id} not present in label map")
        refined_mask, trace = grabcut_refine(image, mask, params)
        out = labels.copy()
        out[(labels == args.class_id) & (refined_mask == 0)] = 0
        out[refined_mask == 1] = args.class_id
        write_label_map(out, args.out)
        with open(args.energy_trace, "w", encoding="utf-8") as f:
            json.dump(trace, f)
            f.write("\n")
    else:
        out = refine_class(labels, image, args.class_id, params)
        write_label_map(out, args.out)
    return 0


def _cmd_ensemble(cfg, args) -> int:
    members = [read_logits(p) for p in args.inputs]
    size = cfg["ensemble_size"]
    height = args.height if args.height is not None else (size[0] if size else None)
    width = args.width if args.width is not None else (size[1] if size else None)
    pred = ensemble_argmax(members, height, width)
    write_label_map(pred, args.out)
    return 0


def _list_frames(directory, suffix: str) -> list[str]:
    try:
        names = sorted(p.name for p in Path(directory).iterdir() if p.suffix == suffix)
    except OSError as exc:
        raise ToolkitError(f"cannot list {directory}: {exc}") from exc
    if not names:
        raise ToolkitError(f"{directory}: no {suffix} files found")
    return names


def _cmd_eval(cfg, args) -> int:
    names = _list_frames(args.pred_dir, ".pgm")
    preds = [read_label_map(Path(args.pred_dir) / n) for n in names]
    gts = [read_label_map(Path(args.gt_dir) / n) for n in names]
    if args.classes is not None:
        class_ids = _parse_classes(args.classes)
    elif cfg["classes"] is not None:
        class_ids = [int(c) for c in cfg["classes"]]
    else:
        class_ids = sorted(set(int(v) for g in gts for v in np.unique(g)) - {0})
    tolerance = cfg["metric_tolerance"] if args.tolerance is None else args.tolerance
    report = evaluate_frames(preds, gts, class_ids, tolerance)
    payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(payload)
    return 0


def _cmd_roi(cfg, args) -> int:
    if args.roi_op == "crop":
        is_image = args.image is not None
        raster = read_rgb_image(args.image) if is_image else read_label_map(args.labels)
        box = _resolve_box(args)
        if args.expand is not None:
            h, w = raster.shape[:2]
            box = expand_box(box, args.expand, w, h)
        out = crop(raster, box)
        (write_rgb_image if is_image else write_label_map)(out, args.out)
    else:  # paste
        canvas = read_label_map(args.canvas)
        patch = read_label_map(args.patch)
        box = _resolve_box(args)
        write_label_map(paste(canvas, patch, box), args.out)
    return 0


def _resolve_box(args) -> Box:
    if args.box is not None:
        return _parse_box(args.box)
    if args.boxes_jsonl is None or args.frame is None:
        raise ToolkitError("give either --box or both --boxes-jsonl and --frame")
    table = _read_boxes_jsonl(args.boxes_jsonl)
    if args.frame not in table:
        raise ToolkitError(f"{args.boxes_jsonl}: no box for frame {args.frame!r}")
    return table[args.frame][0]


def _frame_seed(base_seed: int, frame_index: int) -> int:
    # stable per-frame seed: independent of worker count and schedule
    return int(np.random.SeedSequence([base_seed, frame_index]).generate_state(1, dtype=np.uint64)[0])


def _pipeline_frame(cfg, args, idx: int, stem: str, boxes: list[Box]):
    image = read_rgb_image(Path(args.images) / f"{stem}.ppm")
    gt = read_label_map(Path(args.gt_dir) / f"{stem}.pgm")
    h, w = image.shape[:2]
    ratio = cfg["expand_ratio"] if args.expand is None else args.expand

    canvas = np.zeros((h, w), dtype=np.uint8)
    confidence = np.zeros((h, w), dtype=np.float64)
    for k, box in enumerate(boxes):
        roi_box = expand_box(box, ratio, w, h)
        members = []
        for d in args.logits_dir:
            path = Path(d) / f"{stem}__{k}.fplt"
            if not path.exists() and k == 0 and len(boxes) == 1:
                fallback = Path(d) / f"{stem}.fplt"
                if fallback.exists():
                    path = fallback
            members.append(read_logits(path))
        probs = ensemble_probabilities(members, roi_box.height, roi_box.width)
        patch = probs.argmax(axis=0).astype(np.uint8)
        patch_conf = probs.max(axis=0)
        canvas = paste(
            canvas,
            patch,
            roi_box,
            canvas_confidence=confidence,
            patch_confidence=patch_conf,
        )
        window = confidence[roi_box.y0 : roi_box.y1, roi_box.x0 : roi_box.x1]
        confidence[roi_box.y0 : roi_box.y1, roi_box.x0 : roi_box.x1] = np.maximum(
            window, patch_conf
        )

    refine_ids = (
        _parse_classes(args.refine_classes)
        if args.refine_classes is not None
        else [int(c) for c in cfg["grabcut"]["classes"]]
    )
    for class_id in refine_ids:
        if (canvas == class_id).any():
            params = _grabcut_params(cfg, args, rng_seed=_frame_seed(cfg["rng_seed"], idx))
            canvas = refine_class(canvas, image, class_id, params)
    return canvas, gt


def _cmd_pipeline(cfg, args) -> int:
    stems = [Path(n).stem for n in _list_frames(args.images, ".ppm")]
    all_boxes = _read_boxes_jsonl(args.boxes)
    for stem in stems:
        if stem not in all_boxes:
            raise ToolkitError(f"{args.boxes}: no box for frame {stem!r}")

    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)

    def work(item):
        idx, stem = item
        try:
            return _pipeline_frame(cfg, args, idx, stem, all_boxes[stem])
        except ToolkitError as exc:
            raise type(exc)(f"frame {stem}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, enumerate(stems)))
    else:
        results = [work(item) for item in enumerate(stems)]

    preds = [r[0] for r in results]
    gts = [r[1] for r in results]
    if args.classes is not None:
        class_ids = _parse_classes(args.classes)
    elif cfg["classes"] is not None:
        class_ids = [int(c) for c in cfg["classes"]]
    else:
        class_ids = sorted(set(int(v) for g in gts for v in np.unique(g)) - {0})
    tolerance = cfg["metric_tolerance"] if args.tolerance is None else args.tolerance
    report = evaluate_frames(preds, gts, class_ids, tolerance)

    # all computation succeeded; only now touch the disk
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for stem, pred in zip(stems, preds):
        write_label_map(pred, out_dir / f"{stem}.pgm")
    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        f.write(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return 0


# --- parser ---


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eaparse",
        description="Face-parsing post-processing toolkit: boundary masks, "
        "losses, augmentations, GrabCut refinement, ensembling, J/F scoring "
        "and the file-driven pipeline tying them together.",
    )
    parser.add_argument("--config", metavar="c.json", help="JSON config merged over defaults")
    parser.add_argument("--seed", type=int, help="override the config rng seed")
    parser.add_argument("--jobs", type=int, help="pipeline worker threads (default: CPU count)")
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the effective configuration as JSON and exit",
    )
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("edges", help="write the near-boundary attention mask of a label map")
    p.add_argument("--labels", required=True, metavar="in.pgm")
    p.add_argument("--radius", type=int, help="band radius in pixels (default from config)")
    p.add_argument("--out", required=True, metavar="mask.pgm")

    p = sub.add_parser("loss", help="evaluate the segmentation loss (and its gradient)")
    p.add_argument("--logits", required=True, metavar="x.fplt")
    p.add_argument("--labels", required=True, metavar="y.pgm")
    p.add_argument("--mask", metavar="m.pgm", help="restrict the base term to these pixels")
    p.add_argument(
        "--edge-mask-radius",
        type=int,
        metavar="R",
        help="add the edge-restricted term over a band of this radius",
    )
    p.add_argument("--edge-weight", type=float, metavar="W", help="weight of the edge term")
    p.add_argument(
        "--edge-logits", metavar="e.fplt", help="single-channel boundary-head logits"
    )
    p.add_argument(
        "--boundary-weight", type=float, metavar="W", help="weight of the boundary term"
    )
    p.add_argument(
        "--grad-out",
        metavar="g.fplt",
        help="write the class-logit gradient of the total loss",
    )

    p = sub.add_parser("augment", help="apply a symmetry-aware augmentation to a frame")
    p.add_argument("--op", required=True, choices=["hflip", "rot90", "rot270", "cuthalf"])
    p.add_argument("--image", required=True, metavar="i.ppm")
    p.add_argument("--labels", required=True, metavar="l.pgm")
    p.add_argument(
        "--config",
        dest="swaps_config",
        metavar="swaps.json",
        help="swap pairs for mirroring ops (default from the global config)",
    )
    p.add_argument("--side", choices=["left", "right", "top", "bottom"])
    p.add_argument(
        "--out-prefix",
        required=True,
        metavar="p",
        help="writes <p>image.ppm and <p>labels.pgm",
    )

    p = sub.add_parser("grabcut", help="refine one class of a label map against its image")
    p.add_argument("--image", required=True, metavar="i.ppm")
    p.add_argument("--labels", required=True, metavar="l.pgm")
    p.add_argument("--class", dest="class_id", type=int, required=True, metavar="K")
    p.add_argument("--gamma", type=float, metavar="G")
    p.add_argument("--components", type=int, metavar="K")
    p.add_argument("--iters", type=int, metavar="N")
    p.add_argument("--erode", type=int, metavar="R")
    p.add_argument("--dilate", type=int, metavar="R")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, metavar="S")
    p.add_argument("--out", required=True, metavar="refined.pgm")
    p.add_argument("--energy-trace", metavar="trace.json")

    p = sub.add_parser("ensemble", help="fuse several logit files into one prediction")
    p.add_argument("--inputs", required=True, nargs="+", metavar="x.fplt")
    p.add_argument("--height", type=int, metavar="H")
    p.add_argument("--width", type=int, metavar="W")
    p.add_argument("--out", required=True, metavar="pred.pgm")

    p = sub.add_parser("eval", help="score predictions against ground truth (J and F)")
    p.add_argument("--pred-dir", required=True, metavar="P")
    p.add_argument("--gt-dir", required=True, metavar="G")
    p.add_argument("--classes", metavar="1,2,...", help="default: all non-zero gt classes")
    p.add_argument("--tolerance", type=int, metavar="T")
    p.add_argument("--out", required=True, metavar="report.json")

    p = sub.add_parser("roi", help="box geometry: crop out or paste back")
    roi_sub = p.add_subparsers(dest="roi_op", required=True, metavar="crop|paste")
    pc = roi_sub.add_parser("crop")
    src = pc.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", metavar="i.ppm")
    src.add_argument("--labels", metavar="l.pgm")
    pc.add_argument("--box", metavar="x0,y0,x1,y1")
    pc.add_argument("--boxes-jsonl", metavar="boxes.jsonl")
    pc.add_argument("--frame", metavar="NAME", help="frame key inside --boxes-jsonl")
    pc.add_argument("--expand", type=float, metavar="R", help="expand the box first")
    pc.add_argument("--out", required=True)
    pp = roi_sub.add_parser("paste")
    pp.add_argument("--canvas", required=True, metavar="c.pgm")
    pp.add_argument("--patch", required=True, metavar="p.pgm")
    pp.add_argument("--box", metavar="x0,y0,x1,y1")
    pp.add_argument("--boxes-jsonl", metavar="boxes.jsonl")
    pp.add_argument("--frame", metavar="NAME")
    pp.add_argument("--out", required=True, metavar="o.pgm")

    p = sub.add_parser("pipeline", help="run the whole flow over a directory of frames")
    p.add_argument("--images", required=True, metavar="DIR", help="input frames (.ppm)")
    p.add_argument("--boxes", required=True, metavar="boxes.jsonl")
    p.add_argument(
        "--logits-dir",
        required=True,
        action="append",
        metavar="DIR",
        help="one per ensemble member; files <frame>__<k>.fplt per box "
        "(<frame>.fplt accepted for single-box frames)",
    )
    p.add_argument("--gt-dir", required=True, metavar="DIR")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--expand", type=float, metavar="R")
    p.add_argument(
        "--refine-classes", metavar="1,2,...", help="classes to refine with grabcut"
    )
    p.add_argument("--classes", metavar="1,2,...", help="classes to score")
    p.add_argument("--tolerance", type=int, metavar="T")
    return parser


_HANDLERS = {
    "edges": _cmd_edges,
    "loss": _cmd_loss,
    "augment": _cmd_augment,
    "grabcut": _cmd_grabcut,
    "ensemble": _cmd_ensemble,
    "eval": _cmd_eval,
    "roi": _cmd_roi,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        if args.print_config:
            print(json.dumps(cfg, indent=2, sort_keys=True))
            return 0
        if args.command is None:
            parser.error("a subcommand is required (or --print-config)")
        return _HANDLERS[args.command](cfg, args)
    except (ToolkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - internal failure path
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
