"""Symmetry-aware augmentations: flips that relabel, quarter turns, half crops."""

import numpy as np

import eaparse as ea

# class ids: say 1 = left eye, 2 = right eye; mirroring must exchange them
swaps = ea.SwapTable([(1, 2)])
labels = np.array(
    [
        [0, 1, 0, 2, 0],
        [0, 1, 0, 2, 0],
    ],
    dtype=np.uint8,
)
image = np.repeat((labels * 80)[:, :, None], 3, axis=2).astype(np.uint8)
print("labels:\n", labels)

flipped_img, flipped_lab = ea.hflip_with_swap(image, labels, swaps)
print("\nhflip with swap:\n", flipped_lab)  # geometry mirrored AND ids exchanged

# doing it again restores the original exactly
again_img, again_lab = ea.hflip_with_swap(flipped_img, flipped_lab, swaps)
print("involution:", bool((again_lab == labels).all() and (again_img == image).all()))

# quarter rotations: 1 = 90 degrees clockwise, 3 = 270; nothing is mirrored
grid = np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8)
grid_img = np.repeat(grid[:, :, None], 3, axis=2)
_, turned = ea.rotate_quarter(grid_img, grid, 1)
print("\nrot90 of\n", grid, "\nis\n", turned)
_, back = ea.rotate_quarter(*ea.rotate_quarter(grid_img, grid, 1), 3)
print("rot270 undoes rot90:", bool((back == grid).all()))

# cut-half keeps one side; for odd widths the middle column belongs to neither,
# so left gets floor(W/2) columns and right gets the columns from ceil(W/2) on
wide = np.arange(7, dtype=np.uint8)[None].repeat(2, axis=0)
wide_img = np.repeat(wide[:, :, None], 3, axis=2)
_, left = ea.cut_half(wide_img, wide, "left")
_, right = ea.cut_half(wide_img, wide, "right")
print("\nwidth 7 ->", left.shape[1], "left columns", left[0].tolist())
print("width 7 ->", right.shape[1], "right columns", right[0].tolist())
