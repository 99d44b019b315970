"""Boundary extraction and disk morphology against double-loop oracles."""

import numpy as np
import pytest

import helpers
import eaparse as ea


def test_uniform_map_has_no_boundary():
    assert ea.extract_boundary(np.full((5, 5), 3, dtype=np.uint8)).sum() == 0


def test_two_column_map_fully_boundary():
    m = np.array([[0, 1], [0, 1]], dtype=np.uint8)
    assert ea.extract_boundary(m).tolist() == [[1, 1], [1, 1]]


@pytest.mark.parametrize("seed", range(20))
def test_boundary_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(0, 4, (8, 8)).astype(np.uint8)
    assert (ea.extract_boundary(m) == helpers.oracle_boundary(m)).all()


def test_boundary_invariant_under_relabeling():
    rng = np.random.default_rng(5)
    m = rng.integers(0, 4, (8, 8)).astype(np.uint8)
    relabeled = np.array([9, 4, 7, 1], dtype=np.uint8)[m]
    assert (ea.extract_boundary(m) == ea.extract_boundary(relabeled)).all()


def test_dilate_radius_zero_is_identity():
    rng = np.random.default_rng(1)
    m = (rng.random((6, 6)) < 0.4).astype(np.uint8)
    assert (ea.dilate_mask(m, 0) == m).all()


def test_dilate_single_pixel_radius_one_is_plus():
    m = np.zeros((5, 5), dtype=np.uint8)
    m[2, 2] = 1
    out = ea.dilate_mask(m, 1)
    expected = np.zeros((5, 5), dtype=np.uint8)
    for r, c in ((2, 2), (1, 2), (3, 2), (2, 1), (2, 3)):
        expected[r, c] = 1
    assert (out == expected).all()


@pytest.mark.parametrize("seed", range(20))
def test_dilate_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    m = (rng.random((8, 8)) < 0.25).astype(np.uint8)
    assert (ea.dilate_mask(m, 2) == helpers.oracle_dilate(m, 2)).all()


@pytest.mark.parametrize("seed", range(20))
def test_erode_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    m = (rng.random((8, 8)) < 0.7).astype(np.uint8)
    assert (ea.erode_mask(m, 2) == helpers.oracle_erode(m, 2)).all()


def test_dilate_monotone_in_radius():
    rng = np.random.default_rng(2)
    m = (rng.random((9, 9)) < 0.2).astype(np.uint8)
    d1 = ea.dilate_mask(m, 1)
    d2 = ea.dilate_mask(m, 2)
    assert ((d1 == 1) <= (d2 == 1)).all()
    assert ea.dilate_mask(np.zeros((4, 4), dtype=np.uint8), 3).sum() == 0


def test_edge_attention_mask_uniform_is_empty():
    assert ea.edge_attention_mask(np.zeros((6, 6), dtype=np.uint8), 4).sum() == 0


def test_edge_attention_mask_vertical_split():
    m = np.zeros((4, 4), dtype=np.uint8)
    m[:, 2:] = 1
    r0 = ea.edge_attention_mask(m, 0)
    assert (r0[:, 1:3] == 1).all()
    assert r0[:, 0].sum() == 0 and r0[:, 3].sum() == 0
    r1 = ea.edge_attention_mask(m, 1)
    expected = helpers.oracle_dilate(helpers.oracle_boundary(m), 1)
    assert (r1 == expected).all()


def test_edge_attention_mask_superset_of_boundary():
    rng = np.random.default_rng(3)
    m = rng.integers(0, 3, (10, 10)).astype(np.uint8)
    for radius in (0, 1, 2, 3):
        band = ea.edge_attention_mask(m, radius)
        assert ((ea.extract_boundary(m) == 1) <= (band == 1)).all()
