"""Boundary extraction, the near-edge attention band, and the three loss terms."""

import numpy as np

import eaparse as ea

# a square of class 1 on background
labels = np.zeros((8, 8), dtype=np.uint8)
labels[2:6, 2:6] = 1
print("labels:\n", labels)

# boundary = pixels with a 4-neighbor of another class (both sides light up)
boundary = ea.extract_boundary(labels)
print("\nboundary:\n", boundary)

# widening the boundary with a disk gives the attention band for the edge loss
band = ea.edge_attention_mask(labels, radius=1)
print("\nattention band, radius 1:\n", band)

# random logits over 2 classes; the plain term averages over every pixel,
# the edge term only over the band
rng = np.random.default_rng(0)
logits = rng.uniform(-2, 2, (2, 8, 8)).astype(np.float32)
seg = ea.softmax_cross_entropy(logits, labels, want_gradient=True)
edge = ea.edge_attention_loss(logits, labels, band, want_gradient=True)
print(f"\nplain CE   {seg.loss:.4f} over {seg.contributing_pixels} px")
print(f"edge CE    {edge.loss:.4f} over {edge.contributing_pixels} px")

# a one-channel boundary head gets binary cross-entropy against the boundary
edge_logits = rng.uniform(-2, 2, (1, 8, 8)).astype(np.float32)
bnd = ea.boundary_bce(edge_logits, boundary, want_gradient=True)
print(f"boundary BCE {bnd.loss:.4f} over {bnd.contributing_pixels} px")

# the combined objective weights the three terms; its gradient covers the
# class logits (the boundary head keeps its own gradient)
total = ea.total_loss(seg, edge, bnd, ea.LossWeights(lambda_edge=1.0, lambda_boundary=0.5))
print(f"total      {total.loss:.4f}")

# gradient sanity: channel sums vanish pixelwise, so probabilities stay normalized
print("max |channel sum| of CE gradient:", float(np.abs(seg.gradient.sum(axis=0)).max()))

# spot check one entry against a central finite difference
i = (1, 3, 3)
h = 1e-3
bump = logits.astype(np.float64).copy()
bump[i] += h
f_plus = ea.softmax_cross_entropy(bump.astype(np.float32), labels).loss
bump[i] -= 2 * h
f_minus = ea.softmax_cross_entropy(bump.astype(np.float32), labels).loss
print(f"analytic {seg.gradient[i]:+.6f}  finite difference {(f_plus - f_minus) / (2 * h):+.6f}")
