"""Acceptance gate: eight end-to-end properties, one printed verdict each.

Every test prints "ACCEPTANCE n (...): PASS|FAIL" directly to the terminal
(bypassing capture) and then asserts, so a plain pytest run shows the
per-criterion outcome at a glance.
"""

import json

import numpy as np

import helpers
import eaparse as ea
from eaparse.cli import main
from eaparse.errors import (
    BadMagic,
    BadVersion,
    MalformedHeader,
    NonFiniteValue,
    ToolkitError,
    TruncatedData,
    UnsupportedMaxval,
)


def _verdict(capfd, idx: int, name: str, ok: bool, details: str = "") -> None:
    line = f"ACCEPTANCE {idx} ({name}): {'PASS' if ok else 'FAIL'}"
    with capfd.disabled():
        print(line, flush=True)
    assert ok, f"{line}" + (f" - {details}" if details else "")


def test_acceptance_1_loss_gradients(capfd):
    """Analytic gradients of all three losses match central finite differences."""
    worst = 0.0
    culprit = ""
    for i in range(50):
        rng = np.random.default_rng(1000 + i)
        c = int(rng.integers(2, 5))
        h = int(rng.integers(2, 9))
        w = int(rng.integers(2, 9))

        logits = rng.uniform(-2, 2, (c, h, w)).astype(np.float32)
        labels = rng.integers(0, c, (h, w)).astype(np.uint8)
        mask = (rng.random((h, w)) < 0.5).astype(np.uint8)
        if not mask.any():
            mask[0, 0] = 1
        got = ea.softmax_cross_entropy(logits, labels, mask, want_gradient=True).gradient
        fd = helpers.fd_gradient(
            lambda x: ea.softmax_cross_entropy(x, labels, mask).loss, logits
        )
        err = helpers.max_rel_err(got, fd)
        if err > worst:
            worst, culprit = err, f"masked CE seed {i}"

        if (labels == labels[0, 0]).all():
            labels[0, 0] = (labels[0, 0] + 1) % c
        em = ea.edge_attention_mask(labels, 1)
        got = ea.edge_attention_loss(logits, labels, em, want_gradient=True).gradient
        fd = helpers.fd_gradient(
            lambda x: ea.edge_attention_loss(x, labels, em).loss, logits
        )
        err = helpers.max_rel_err(got, fd)
        if err > worst:
            worst, culprit = err, f"edge-attention seed {i}"

        el = rng.uniform(-2, 2, (1, h, w)).astype(np.float32)
        bnd_gt = (rng.random((h, w)) < 0.5).astype(np.uint8)
        got = ea.boundary_bce(el, bnd_gt, want_gradient=True).gradient
        fd = helpers.fd_gradient(lambda x: ea.boundary_bce(x, bnd_gt).loss, el)
        err = helpers.max_rel_err(got, fd)
        if err > worst:
            worst, culprit = err, f"boundary BCE seed {i}"

    _verdict(
        capfd,
        1,
        "loss gradients vs central finite differences",
        worst <= 1e-4,
        f"worst relative error {worst:.3e} at {culprit}",
    )


def test_acceptance_2_metric_oracles(capfd):
    """J matches set counting exactly; F matches distance-based scoring to 1e-12."""
    ok = True
    details = ""
    for i in range(200):
        rng = np.random.default_rng(2000 + i)
        pred = rng.integers(0, 4, (16, 16)).astype(np.uint8)
        gt = rng.integers(0, 4, (16, 16)).astype(np.uint8)
        for c in range(4):
            if ea.region_jaccard(pred, gt, c) != helpers.oracle_jaccard(pred, gt, c):
                ok, details = False, f"J mismatch seed {i} class {c}"
                break
            for tol in (0, 1, 2):
                got = ea.boundary_f(pred, gt, c, tol)
                want = helpers.oracle_boundary_f(pred, gt, c, tol)
                if (got is None) != (want is None) or (
                    got is not None and abs(got - want) > 1e-12
                ):
                    ok, details = False, f"F mismatch seed {i} class {c} tol {tol}"
                    break
            if not ok:
                break
        if not ok:
            break
    _verdict(capfd, 2, "J/F equal brute-force oracles", ok, details)


def test_acceptance_3_min_cut_exactness(capfd):
    """Solver flow equals exhaustive cut enumeration, and equals its own cut."""
    ok = True
    details = ""
    rng = np.random.default_rng(3000)
    for i in range(100):
        g = helpers.random_grid_graph(rng)
        flow, side = ea.max_flow(g)
        best = helpers.oracle_min_cut(g)
        if flow != best:
            ok, details = False, f"graph {i}: flow {flow!r} != enumerated min cut {best!r}"
            break
        if helpers.cut_value(g, side) != flow:
            ok, details = False, f"graph {i}: returned partition does not cost the flow"
            break
    _verdict(capfd, 3, "min-cut equals exhaustive enumeration", ok, details)


def test_acceptance_4_grabcut_disk(capfd):
    """The hole in the disk's init mask is recovered, monotonically, repeatably."""
    image, truth, init = helpers.disk_scene()
    params = ea.GrabcutParams(rng_seed=0)
    mask1, trace1 = ea.grabcut_refine(image, init, params)
    mask2, trace2 = ea.grabcut_refine(image, init, params)

    jacc = ea.region_jaccard(mask1, truth, 1)
    monotone = all(b <= a for a, b in zip(trace1, trace1[1:]))
    identical = bool((mask1 == mask2).all()) and trace1 == trace2
    ok = jacc >= 0.99 and monotone and identical
    _verdict(
        capfd,
        4,
        "grabcut recovers disk hole, monotone energy, bit-identical",
        ok,
        f"jaccard {jacc:.4f}, monotone {monotone}, identical {identical}",
    )


def _run_pipeline(paths, out_dir, members, refine, jobs=1):
    argv = [
        "--jobs",
        str(jobs),
        "pipeline",
        "--images",
        str(paths["images"]),
        "--boxes",
        str(paths["boxes"]),
    ]
    for m in members:
        argv += ["--logits-dir", str(paths[m])]
    argv += ["--gt-dir", str(paths["gt"]), "--out-dir", str(out_dir)]
    if refine:
        argv += ["--refine-classes", "1"]
    assert main(argv) == 0
    return helpers.read_report(out_dir)["J_and_F"]


def test_acceptance_5_pipeline_directionality(capfd, tmp_path):
    """Grabcut strictly helps; ensembling with a clean model never hurts."""
    paths = helpers.write_clip(tmp_path / "clip", n_frames=3)
    degraded = _run_pipeline(paths, tmp_path / "degraded", ["degraded"], refine=False)
    refined = _run_pipeline(paths, tmp_path / "refined", ["degraded"], refine=True)
    ensembled = _run_pipeline(
        paths, tmp_path / "ensembled", ["clean", "degraded"], refine=False
    )
    ok = refined > degraded and ensembled >= degraded
    _verdict(
        capfd,
        5,
        "grabcut strictly improves J&F, ensembling never hurts",
        ok,
        f"degraded {degraded:.4f}, +grabcut {refined:.4f}, +clean member {ensembled:.4f}",
    )


def test_acceptance_6_augmentation_algebra(capfd):
    """Flip twice and rotate four times restore the input; halves have the stated sizes."""
    ok = True
    details = ""
    swaps = ea.SwapTable([(1, 2), (3, 4)])
    for i in range(100):
        rng = np.random.default_rng(6000 + i)
        h = int(rng.integers(1, 10))
        w = int(rng.integers(1, 10))
        if i % 2:  # force odd dimensions on half the cases
            h, w = h | 1, w | 1
        image = rng.integers(0, 256, (h, w, 3)).astype(np.uint8)
        labels = rng.integers(0, 6, (h, w)).astype(np.uint8)

        i2, l2 = ea.hflip_with_swap(*ea.hflip_with_swap(image, labels, swaps), swaps)
        if not ((i2 == image).all() and (l2 == labels).all()):
            ok, details = False, f"hflip involution broken at seed {i}"
            break
        ri, rl = image, labels
        for _ in range(4):
            ri, rl = ea.rotate_quarter(ri, rl, 1)
        if not ((ri == image).all() and (rl == labels).all()):
            ok, details = False, f"four quarter rotations not identity at seed {i}"
            break

    if ok:
        rng = np.random.default_rng(6999)
        for w in range(2, 10):
            image = rng.integers(0, 256, (4, w, 3)).astype(np.uint8)
            labels = rng.integers(0, 6, (4, w)).astype(np.uint8)
            _, left = ea.cut_half(image, labels, "left")
            _, right = ea.cut_half(image, labels, "right")
            if left.shape[1] != w // 2 or not (left == labels[:, : w // 2]).all():
                ok, details = False, f"left half wrong for width {w}"
                break
            if right.shape[1] != w - (w + 1) // 2 or not (
                right == labels[:, (w + 1) // 2 :]
            ).all():
                ok, details = False, f"right half wrong for width {w}"
                break
    _verdict(capfd, 6, "augmentation algebra (involutions, half sizes)", ok, details)


def test_acceptance_7_format_round_trips(capfd, tmp_path):
    """All three formats round-trip byte-exactly; malformed files raise the named error."""
    ok = True
    details = ""
    for i in range(100):
        rng = np.random.default_rng(7000 + i)
        h = int(rng.integers(1, 13))
        w = int(rng.integers(1, 13))

        p = tmp_path / "a.pgm"
        lab = rng.integers(0, 256, (h, w)).astype(np.uint8)
        ea.write_label_map(lab, p)
        raw = p.read_bytes()
        back = ea.read_label_map(p)
        ea.write_label_map(back, p)
        if not (back == lab).all() or p.read_bytes() != raw:
            ok, details = False, f"PGM round trip broken at seed {i}"
            break

        p = tmp_path / "a.ppm"
        img = rng.integers(0, 256, (h, w, 3)).astype(np.uint8)
        ea.write_rgb_image(img, p)
        raw = p.read_bytes()
        back = ea.read_rgb_image(p)
        ea.write_rgb_image(back, p)
        if not (back == img).all() or p.read_bytes() != raw:
            ok, details = False, f"PPM round trip broken at seed {i}"
            break

        p = tmp_path / "a.fplt"
        ten = rng.uniform(-10, 10, (int(rng.integers(1, 5)), h, w)).astype(np.float32)
        ea.write_logits(ten, p)
        raw = p.read_bytes()
        back = ea.read_logits(p)
        ea.write_logits(back, p)
        if not (back == ten).all() or p.read_bytes() != raw:
            ok, details = False, f"FPLT round trip broken at seed {i}"
            break

    if ok:
        nan_payload = np.array([np.nan], dtype="<f4").tobytes()
        cases = [
            ("m.pgm", b"P5\n1 1\n65535\n\x00", ea.read_label_map, UnsupportedMaxval),
            ("m.pgm", b"P5\n1 1\n255\n\x00", ea.read_rgb_image, MalformedHeader),
            ("m.ppm", b"P6\n1 1\n255\n\x00\x00\x00", ea.read_label_map, MalformedHeader),
            ("m.pgm", b"P5\n# c\n1 1\n255\n\x00", ea.read_label_map, MalformedHeader),
            ("m.pgm", b"P5\n2 2\n255\n\x00\x00", ea.read_label_map, TruncatedData),
            ("m.ppm", b"P6\n2 1\n255\n\x00\x00\x00", ea.read_rgb_image, TruncatedData),
            ("m.fplt", b"XPLT" + b"\x01\x00\x00\x00" * 4 + b"\x00" * 4, ea.read_logits, BadMagic),
            ("m.fplt", b"FPLT" + b"\x02\x00\x00\x00" + b"\x01\x00\x00\x00" * 3 + b"\x00" * 4, ea.read_logits, BadVersion),
            ("m.fplt", b"FPLT" + b"\x01\x00\x00\x00" * 4 + b"\x00" * 2, ea.read_logits, TruncatedData),
            ("m.fplt", b"FPLT" + b"\x01\x00\x00\x00" * 4 + nan_payload, ea.read_logits, NonFiniteValue),
        ]
        for name, payload, reader, expected in cases:
            p = tmp_path / name
            p.write_bytes(payload)
            try:
                reader(p)
            except ToolkitError as exc:
                if type(exc) is not expected:
                    ok = False
                    details = f"{name}: got {type(exc).__name__}, wanted {expected.__name__}"
                    break
            else:
                ok, details = False, f"{name}: accepted, wanted {expected.__name__}"
                break
    _verdict(capfd, 7, "format round trips and malformed-input rejection", ok, details)


def test_acceptance_8_parallel_determinism(capfd, tmp_path):
    """Pipeline bytes are identical for --jobs 1 and --jobs 8."""
    paths = helpers.write_clip(tmp_path / "clip", n_frames=3)
    for jobs, name in ((1, "j1"), (8, "j8")):
        _run_pipeline(paths, tmp_path / name, ["clean", "degraded"], refine=True, jobs=jobs)
    names1 = sorted(p.name for p in (tmp_path / "j1").iterdir())
    names8 = sorted(p.name for p in (tmp_path / "j8").iterdir())
    ok = names1 == names8 and all(
        (tmp_path / "j1" / n).read_bytes() == (tmp_path / "j8" / n).read_bytes()
        for n in names1
    )
    _verdict(capfd, 8, "pipeline bytes identical across --jobs 1 and 8", ok)


def test_report_files_are_valid_json(tmp_path):
    """Sanity companion for criteria 5/8: reports parse and carry the score keys."""
    paths = helpers.write_clip(tmp_path / "clip", n_frames=2)
    _run_pipeline(paths, tmp_path / "out", ["clean"], refine=False)
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert set(report) == {"per_class", "mean_J", "mean_F", "J_and_F"}
