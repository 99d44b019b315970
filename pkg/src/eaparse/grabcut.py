"""GrabCut-style mask refinement: color GMMs, grid graph, min-cut.

A network's parse sometimes drops part of a region whose colors clearly
belong to it. Refinement recovers such parts from the image alone: seed a
trimap from the initial mask, model foreground and background colors with
one Gaussian mixture each, connect ambiguous pixels in an 8-neighbor grid
with contrast-sensitive smoothness weights, and let a minimum s-t cut decide
which side each ambiguous pixel joins. Alternating model refits with cuts
drives the labeling energy downhill.

Everything here is deterministic: mixture fitting is seeded, the solver
visits arcs in a fixed order, and a rerun with identical inputs produces a
bit-identical mask.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .boundary import dilate_mask, erode_mask
from .errors import (
    ClassAbsent,
    DegenerateMask,
    InvalidRaster,
    ShapeMismatch,
    TooFewPixels,
)
from .tensorio import ensure_binary_mask, ensure_label_map, ensure_rgb_image

# trimap pixel states
TRIMAP_BG = 0  # definitely background, never reassigned
TRIMAP_PROB_BG = 1  # ambiguous, currently leaning background
TRIMAP_PROB_FG = 2  # ambiguous, currently leaning foreground
TRIMAP_FG = 3  # definitely foreground, never reassigned

# cap on any -log likelihood term: keeps capacities finite on pixels the
# opposite model finds (numerically) impossible
MAX_DATA_TERM = 1e9

# ridge added to every fitted covariance diagonal; tiny against the 0..255
# color range but keeps single-color components invertible
COV_RIDGE = 1e-3

_GMM_ROUNDS = 10  # refit rounds per GMM fit; assignment usually stabilizes sooner

# 8-connectivity, one representative per undirected neighbor pair
_DIRECTIONS = ((0, 1, 1.0), (1, 0, 1.0), (1, 1, math.sqrt(2.0)), (1, -1, math.sqrt(2.0)))


@dataclass(frozen=True)
class GrabcutParams:
    """Every free constant of the refinement, in one place."""

    components_k: int = 5
    gamma: float = 50.0
    iterations: int = 5
    erode_radius: int = 3
    dilate_radius: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.components_k < 1:
            raise InvalidRaster(f"components_k must be >= 1, got {self.components_k}")
        if self.gamma < 0:
            raise InvalidRaster(f"gamma must be >= 0, got {self.gamma}")
        if self.iterations < 1:
            raise InvalidRaster(f"iterations must be >= 1, got {self.iterations}")
        if self.erode_radius < 0 or self.dilate_radius < 0:
            raise InvalidRaster("trimap radii must be >= 0")


@dataclass(frozen=True)
class Trimap:
    """Per-pixel states in {TRIMAP_BG, TRIMAP_PROB_BG, TRIMAP_PROB_FG, TRIMAP_FG}."""

    data: np.ndarray

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def definite_fg(self) -> np.ndarray:
        return self.data == TRIMAP_FG

    def definite_bg(self) -> np.ndarray:
        return self.data == TRIMAP_BG

    def probable(self) -> np.ndarray:
        return (self.data == TRIMAP_PROB_BG) | (self.data == TRIMAP_PROB_FG)


def build_trimap(init, params: GrabcutParams) -> Trimap:
    """Seed a trimap from an initial mask by eroding and dilating it.

    Pixels surviving erosion are definite foreground (the whole mask if
    erosion wipes it out), pixels beyond the dilated mask are definite
    background, everything else stays ambiguous on its initial side.
    """
    m = ensure_binary_mask(init)
    n_on = int(m.sum())
    if n_on == 0 or n_on == m.size:
        raise DegenerateMask("initial mask must contain both mask and non-mask pixels")
    def_fg = erode_mask(m, params.erode_radius).astype(bool)
    if not def_fg.any():
        def_fg = m.astype(bool)
    def_bg = ~dilate_mask(m, params.dilate_radius).astype(bool)
    data = np.full(m.shape, TRIMAP_PROB_BG, dtype=np.uint8)
    data[m.astype(bool) & ~def_fg] = TRIMAP_PROB_FG
    data[def_fg] = TRIMAP_FG
    data[def_bg] = TRIMAP_BG
    return Trimap(data=data)


@dataclass(frozen=True)
class ColorGmm:
    """A K-component full-covariance Gaussian mixture over RGB.

    ``weights`` sum to 1 (components may carry weight 0 after losing all
    members); every covariance is kept positive definite by the fit ridge.
    """

    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, 3)
    covariances: np.ndarray  # (K, 3, 3)

    def _component_logpdf(self, pixels: np.ndarray) -> np.ndarray:
        """(N, K) log density of each pixel under each component."""
        px = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
        k = self.weights.shape[0]
        out = np.empty((px.shape[0], k), dtype=np.float64)
        for i in range(k):
            diff = px - self.means[i]
            inv = np.linalg.inv(self.covariances[i])
            _, logdet = np.linalg.slogdet(self.covariances[i])
            quad = np.einsum("ni,ij,nj->n", diff, inv, diff)
            out[:, i] = -0.5 * (quad + logdet + 3.0 * math.log(2.0 * math.pi))
        return out

    def log_likelihood(self, pixels) -> np.ndarray:
        """(N,) log of the weighted mixture density at each pixel."""
        comp = self._component_logpdf(pixels)
        with np.errstate(divide="ignore"):
            logw = np.where(self.weights > 0, np.log(self.weights), -np.inf)
        scored = comp + logw
        top = scored.max(axis=1, keepdims=True)
        return (top + np.log(np.exp(scored - top).sum(axis=1, keepdims=True)))[:, 0]

    def assign_components(self, pixels) -> np.ndarray:
        """(N,) index of the highest-scoring component per pixel."""
        comp = self._component_logpdf(pixels)
        with np.errstate(divide="ignore"):
            logw = np.where(self.weights > 0, np.log(self.weights), -np.inf)
        return np.argmax(comp + logw, axis=1)


def _estimate(px: np.ndarray, assign: np.ndarray, k: int, prev_means: np.ndarray) -> ColorGmm:
    """ML re-estimation from a hard assignment; empty components keep weight 0."""
    n = px.shape[0]
    weights = np.zeros(k)
    means = prev_means.copy()
    covs = np.tile(COV_RIDGE * np.eye(3), (k, 1, 1))
    for i in range(k):
        members = px[assign == i]
        if members.shape[0] == 0:
            continue
        weights[i] = members.shape[0] / n
        means[i] = members.mean(axis=0)
        diff = members - means[i]
        covs[i] = diff.T @ diff / members.shape[0] + COV_RIDGE * np.eye(3)
    return ColorGmm(weights=weights, means=means, covariances=covs)


def _classification_loglik(gmm: ColorGmm, px: np.ndarray, assign: np.ndarray) -> float:
    comp = gmm._component_logpdf(px)
    with np.errstate(divide="ignore"):
        logw = np.where(gmm.weights > 0, np.log(gmm.weights), -np.inf)
    return float((comp + logw)[np.arange(px.shape[0]), assign].sum())


def fit_gmm(pixels, k: int, rng_seed, *, with_trace: bool = False):
    """Fit a K-component mixture by seeded k-means++ plus hard refit rounds.

    Each round assigns every pixel to its highest-scoring component and then
    re-estimates weights, means and ridge-regularized covariances from the
    members; rounds stop when assignments stabilize. Fully deterministic for
    a fixed seed. With ``with_trace`` the total classification log-likelihood
    after the initial estimate and after each round is returned as well.
    """
    px = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    n = px.shape[0]
    if n < k:
        raise TooFewPixels(f"{n} pixels cannot support {k} mixture components")

    rng = np.random.default_rng(rng_seed)
    centers = px[int(rng.integers(n))][None]
    for _ in range(1, k):
        d2 = ((px[:, None, :] - centers[None]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers = np.vstack([centers, px[idx]])

    assign = ((px[:, None, :] - centers[None]) ** 2).sum(axis=2).argmin(axis=1)
    gmm = _estimate(px, assign, k, prev_means=centers)
    trace = [_classification_loglik(gmm, px, assign)]

    for _ in range(_GMM_ROUNDS):
        new_assign = gmm.assign_components(px)
        gmm = _estimate(px, new_assign, k, prev_means=gmm.means)
        trace.append(_classification_loglik(gmm, px, new_assign))
        stable = bool((new_assign == assign).all())
        assign = new_assign
        if stable:
            break
    return (gmm, trace) if with_trace else gmm


# --- grid graph and max-flow ---


@dataclass(frozen=True)
class GridGraph:
    """An s-t network over the ambiguous pixels.

    ``source_cap``/``sink_cap`` hold the terminal link capacities per node;
    ``edges`` (m, 2) lists undirected neighbor pairs whose shared capacity
    sits in ``edge_cap``. All capacities must be finite and non-negative.
    """

    source_cap: np.ndarray
    sink_cap: np.ndarray
    edges: np.ndarray
    edge_cap: np.ndarray

    def validate(self) -> int:
        n = self.source_cap.shape[0]
        if self.sink_cap.shape != (n,):
            raise ShapeMismatch("source and sink capacity arrays differ in length")
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise ShapeMismatch(f"edges must be (m, 2), got {self.edges.shape}")
        if self.edge_cap.shape != (self.edges.shape[0],):
            raise ShapeMismatch("one capacity per edge required")
        for caps in (self.source_cap, self.sink_cap, self.edge_cap):
            if caps.size and (not np.all(np.isfinite(caps)) or caps.min() < 0):
                raise InvalidRaster("capacities must be finite and >= 0")
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= n:
                raise InvalidRaster("edge endpoint out of node range")
            if (self.edges[:, 0] == self.edges[:, 1]).any():
                raise InvalidRaster("self-loops are not allowed")
        return n


def max_flow(graph: GridGraph) -> tuple[float, np.ndarray]:
    """Maximum s-t flow and the minimum-cut side of every node.

    Shortest-augmenting-path (level graph) search with arcs visited in a
    fixed construction order, so results are deterministic. Returns the flow
    value and a uint8 vector with 1 for nodes on the source side of the cut
    (those reachable from s in the residual network).
    """
    n = graph.validate()
    s, t = n, n + 1

    # arc a and a^1 are mutual reverses; neighbor arcs carry the shared
    # capacity in both directions, which is the standard undirected encoding
    to: list[int] = []
    cap: list[float] = []
    adj: list[list[int]] = [[] for _ in range(n + 2)]

    def add_arc(u: int, v: int, c_uv: float, c_vu: float) -> None:
        adj[u].append(len(to))
        to.append(v)
        cap.append(float(c_uv))
        adj[v].append(len(to))
        to.append(u)
        cap.append(float(c_vu))

    for i in range(n):
        add_arc(s, i, float(graph.source_cap[i]), 0.0)
    for i in range(n):
        add_arc(i, t, float(graph.sink_cap[i]), 0.0)
    for (u, v), c in zip(graph.edges.tolist(), graph.edge_cap.tolist()):
        add_arc(int(u), int(v), c, c)

    flow = 0.0
    level = [-1] * (n + 2)
    while True:
        # BFS: level graph on positive residuals
        for i in range(n + 2):
            level[i] = -1
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in adj[u]:
                if cap[a] > 0.0 and level[to[a]] < 0:
                    level[to[a]] = level[u] + 1
                    queue.append(to[a])
        if level[t] < 0:
            break

        # blocking flow: iterative DFS with per-node arc pointers
        ptr = [0] * (n + 2)
        path: list[int] = []
        u = s
        while True:
            if u == t:
                bottleneck = min(cap[a] for a in path)
                flow += bottleneck
                retreat = len(path)
                for i, a in enumerate(path):
                    cap[a] -= bottleneck
                    cap[a ^ 1] += bottleneck
                    if cap[a] == 0.0 and i < retreat:
                        retreat = i  # resume from the first saturated arc
                path = path[:retreat]
                u = s if not path else to[path[-1]]
                continue
            advanced = False
            while ptr[u] < len(adj[u]):
                a = adj[u][ptr[u]]
                if cap[a] > 0.0 and level[to[a]] == level[u] + 1:
                    path.append(a)
                    u = to[a]
                    advanced = True
                    break
                ptr[u] += 1
            if advanced:
                continue
            level[u] = -1  # dead end for this phase
            if u == s:
                break
            last = path.pop()
            u = to[last ^ 1]
            ptr[u] += 1

    side = np.zeros(n, dtype=np.uint8)
    seen = [False] * (n + 2)
    seen[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for a in adj[u]:
            if cap[a] > 0.0 and not seen[to[a]]:
                seen[to[a]] = True
                queue.append(to[a])
    for i in range(n):
        if seen[i]:
            side[i] = 1
    return flow, side


# --- the refinement loop ---


def _pairwise_weights(z: np.ndarray, gamma: float) -> list[tuple[int, int, np.ndarray]]:
    """Contrast-sensitive smoothness weight arrays, one per direction.

    Weight between neighbors p, q is gamma * exp(-beta * ||z_p - z_q||^2)
    divided by their distance, with beta = 1 / (2 * mean squared color
    difference over all 8-neighbor pairs). A constant image makes that mean
    zero; beta falls back to 0 and the weights become uniform gamma / dist.
    """
    diffs = []
    for dr, dc, _ in _DIRECTIONS:
        a = z[: z.shape[0] - dr, max(0, -dc) : z.shape[1] - max(0, dc)]
        b = z[dr:, max(0, dc) : z.shape[1] - max(0, -dc)]
        diffs.append(((a - b) ** 2).sum(axis=2))
    total = sum(float(d.sum()) for d in diffs)
    count = sum(d.size for d in diffs)
    mean_sq = total / count if count else 0.0
    beta = 0.0 if mean_sq == 0.0 else 1.0 / (2.0 * mean_sq)
    return [
        (dr, dc, gamma * np.exp(-beta * d) / dist)
        for (dr, dc, dist), d in zip(_DIRECTIONS, diffs)
    ]


def _pair_index(shape: tuple[int, int], dr: int, dc: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/col index grids of the two endpoints of every (dr, dc) pair."""
    h, w = shape
    rr, cc = np.meshgrid(
        np.arange(h - dr), np.arange(max(0, -dc), w - max(0, dc)), indexing="ij"
    )
    return (rr, cc), (rr + dr, cc + dc)


def _labeling_energy(
    alpha: np.ndarray,
    z: np.ndarray,
    fg_gmm: ColorGmm,
    bg_gmm: ColorGmm,
    weights: list[tuple[int, int, np.ndarray]],
) -> float:
    """Gibbs energy of a labeling: capped data terms plus crossing weights."""
    flat = z.reshape(-1, 3)
    data_fg = np.minimum(-fg_gmm.log_likelihood(flat), MAX_DATA_TERM)
    data_bg = np.minimum(-bg_gmm.log_likelihood(flat), MAX_DATA_TERM)
    a = alpha.reshape(-1).astype(bool)
    energy = float(data_fg[a].sum() + data_bg[~a].sum())
    for dr, dc, w in weights:
        (r0, c0), (r1, c1) = _pair_index(alpha.shape, dr, dc)
        crossing = alpha[r0, c0] != alpha[r1, c1]
        energy += float(w[crossing].sum())
    return energy


def grabcut_refine(image, init, params: GrabcutParams | None = None):
    """Refine a binary mask against its image; returns (mask, energy_trace).

    Alternates seeded GMM refits with min-cuts for ``params.iterations``
    rounds, recording the labeling energy after each cut. Definite trimap
    pixels never change side, so the result always contains the eroded core
    and never touches pixels far outside the dilated envelope. The same two
    fitting seeds are reused every round, which makes the whole refinement a
    deterministic function of (image, init, params).
    """
    if params is None:
        params = GrabcutParams()
    img = ensure_rgb_image(image)
    mask = ensure_binary_mask(init)
    if img.shape[:2] != mask.shape:
        raise ShapeMismatch(f"image {img.shape[:2]} and mask {mask.shape} differ")

    trimap = build_trimap(mask, params)
    z = img.astype(np.float64)
    weights = _pairwise_weights(z, params.gamma)

    probable = trimap.probable()
    def_fg = trimap.definite_fg()
    node_of = np.full(mask.shape, -1, dtype=np.int64)
    node_of[probable] = np.arange(int(probable.sum()))
    n_nodes = int(probable.sum())

    # one fixed fitting seed per side, reused every round: the fit depends
    # only on the current partition, never on iteration count
    fg_seed, bg_seed = (int(v) for v in np.random.SeedSequence(params.rng_seed).generate_state(2, dtype=np.uint64))

    # neighbor structure is constant across rounds; build it once
    prob_edges: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    fold_fg = np.zeros(n_nodes)  # smoothness toward pixels pinned to FG
    fold_bg = np.zeros(n_nodes)  # smoothness toward pixels pinned to BG
    for dr, dc, w in weights:
        (r0, c0), (r1, c1) = _pair_index(mask.shape, dr, dc)
        p_prob = probable[r0, c0]
        q_prob = probable[r1, c1]
        both = p_prob & q_prob
        prob_edges.append(
            (node_of[r0, c0][both], node_of[r1, c1][both], w[both])
        )
        for a_prob, (ra, ca), (rb, cb) in (
            (p_prob & ~q_prob, (r0, c0), (r1, c1)),
            (q_prob & ~p_prob, (r1, c1), (r0, c0)),
        ):
            nodes = node_of[ra, ca][a_prob]
            pinned_fg = def_fg[rb, cb][a_prob]
            np.add.at(fold_fg, nodes[pinned_fg], w[a_prob][pinned_fg])
            np.add.at(fold_bg, nodes[~pinned_fg], w[a_prob][~pinned_fg])
    edges = np.concatenate([np.stack([u, v], axis=1) for u, v, _ in prob_edges]) if n_nodes else np.zeros((0, 2), dtype=np.int64)
    edge_cap = np.concatenate([c for _, _, c in prob_edges]) if n_nodes else np.zeros(0)

    alpha = mask.astype(bool)
    fg_gmm = bg_gmm = None
    prob_px = z[probable]
    trace: list[float] = []
    for _ in range(params.iterations):
        fg_px = z[alpha]
        bg_px = z[~alpha]
        if fg_px.shape[0]:
            fg_gmm = fit_gmm(fg_px, min(params.components_k, fg_px.shape[0]), fg_seed)
        if bg_px.shape[0]:
            bg_gmm = fit_gmm(bg_px, min(params.components_k, bg_px.shape[0]), bg_seed)

        if n_nodes:
            # source side = foreground: the link a cut severs is the one to
            # the terminal the pixel does NOT join, hence the opposite model
            src = np.minimum(-bg_gmm.log_likelihood(prob_px), MAX_DATA_TERM) + fold_fg
            snk = np.minimum(-fg_gmm.log_likelihood(prob_px), MAX_DATA_TERM) + fold_bg
            shift = np.minimum(src, snk)  # same constant on both terminals of a
            src = src - shift  # pixel moves every cut equally; keeps caps >= 0
            snk = snk - shift
            _, side = max_flow(
                GridGraph(source_cap=src, sink_cap=snk, edges=edges, edge_cap=edge_cap)
            )
            alpha = def_fg.copy()
            alpha[probable] = side.astype(bool)
        else:
            alpha = def_fg.copy()
        trace.append(_labeling_energy(alpha, z, fg_gmm, bg_gmm, weights))

    return alpha.astype(np.uint8), trace


def refine_class(labels, image, class_id: int, params: GrabcutParams | None = None) -> np.ndarray:
    """Refine one class of a label map in place of its binary mask.

    Pixels the refinement adds take ``class_id``; pixels it removes fall
    back to background (0). Other classes keep their labels unless the
    refined mask claims their pixels.
    """
    lm = ensure_label_map(labels)
    if not (lm == class_id).any():
        raise ClassAbsent(f"class {class_id} not present in label map")
    refined, _ = grabcut_refine(image, (lm == class_id).astype(np.uint8), params)
    out = lm.copy()
    out[(lm == class_id) & (refined == 0)] = 0
    out[refined == 1] = class_id
    return out
