"""Axis-aligned binary regression trees: exact-split CART and ExtraTree."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidHyperparameter, NonFiniteInput

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    n_candidate_features: int | None = None  # ExtraTree: K features per node, None = all
    seed: int | None = None  # ExtraTree only

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidHyperparameter("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise InvalidHyperparameter("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise InvalidHyperparameter("min_samples_split must be >= 2")


@dataclass(frozen=True)
class RegressionTree:
    """Flat node-array tree. feature[i] == -1 marks a leaf; value[i] is the
    mean training target routed to node i."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return self.feature.size


SCORE_TIE_REL_TOL = 1e-9


def _best_exact_split(Xn, yn, min_samples_leaf, feature_indices):
    """Exhaustive best split over the given features.

    Candidate thresholds are midpoints of consecutive distinct sorted values;
    the score is total child SSE. Candidates within a small relative tolerance
    of the minimum count as tied (summation order perturbs mathematically
    equal scores), and ties break to the lowest feature index, then the
    lowest threshold.
    """
    n = yn.size
    Xf = Xn[:, feature_indices]
    order = np.argsort(Xf, axis=0, kind="stable")
    Xs = np.take_along_axis(Xf, order, axis=0)
    ys = yn[order]

    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total_sum = csum[-1]
    total_sq = csq[-1]

    k = np.arange(1, n)[:, None]  # left-child sizes for split position i = k-1
    left_sse = csq[:-1] - csum[:-1] ** 2 / k
    right_sum = total_sum[None, :] - csum[:-1]
    right_sq = total_sq[None, :] - csq[:-1]
    right_sse = right_sq - right_sum**2 / (n - k)
    score = left_sse + right_sse

    valid = Xs[1:] > Xs[:-1]
    if min_samples_leaf > 1:
        size_ok = (k >= min_samples_leaf) & (n - k >= min_samples_leaf)
        valid = valid & size_ok
    score = np.where(valid, score, np.inf)

    if not np.isfinite(score).any():
        return None
    tol = SCORE_TIE_REL_TOL * max(float(yn @ yn), 1e-300)
    cutoff = score.min() + tol
    best_pos = np.argmax(score <= cutoff, axis=0)  # first tied position per feature
    col_scores = score[best_pos, np.arange(len(feature_indices))]
    col = int(np.argmax(col_scores <= cutoff))  # first tied feature
    pos = int(best_pos[col])
    threshold = 0.5 * (Xs[pos, col] + Xs[pos + 1, col])
    return int(feature_indices[col]), float(threshold), float(col_scores[col])


def _best_random_split(Xn, yn, K, min_samples_leaf, rng):
    """ExtraTree split: K features without replacement, one uniform threshold
    each, best candidate by child SSE."""
    d = Xn.shape[1]
    feats = rng.choice(d, size=min(K, d), replace=False)
    n = yn.size
    cols = Xn[:, feats]
    lo = cols.min(axis=0)
    hi = cols.max(axis=0)
    thr = rng.uniform(lo, hi)  # zero-spread features yield lo, filtered below

    mask = cols <= thr[None, :]
    n_left = mask.sum(axis=0)
    valid = (hi > lo) & (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
    if not valid.any():
        return None
    ysum_left = yn @ mask
    ysq_left = (yn * yn) @ mask
    ysum = yn.sum()
    ysq = yn @ yn
    with np.errstate(divide="ignore", invalid="ignore"):
        sse = (
            ysq_left
            - ysum_left**2 / n_left
            + (ysq - ysq_left)
            - (ysum - ysum_left) ** 2 / (n - n_left)
        )
    sse = np.where(valid, sse, np.inf)
    best = int(np.argmin(sse))  # ties resolve to the earliest drawn feature
    return int(feats[best]), float(thr[best]), float(sse[best])


def _grow(X, y, params: TreeParams, splitter):
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    # LIFO stack, children pushed right-then-left: deterministic depth-first,
    # left-first order (fixes the rng consumption order for ExtraTree).
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        value[node] = float(yn.mean())
        n = idx.size
        if (
            (params.max_depth is not None and depth >= params.max_depth)
            or n < params.min_samples_split
            or n < 2 * params.min_samples_leaf
            or np.all(yn == yn[0])
        ):
            continue
        split = splitter(X[idx], yn)
        if split is None:
            continue
        f, thr, _ = split
        mask = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left_id = new_node()
        right_id = new_node()
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, idx[~mask], depth + 1))
        stack.append((left_id, idx[mask], depth + 1))

    return RegressionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=float),
        n_features=X.shape[1],
    )


def _validate_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise DimensionMismatch(f"X {X.shape} does not pair with y {y.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyInput("need at least one sample and one feature")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteInput("inputs must be finite")
    return X, y


def fit_cart(X, y, params: TreeParams = TreeParams()) -> RegressionTree:
    """Exact-split CART: each node takes the (feature, midpoint) minimizing
    total child variance; fully deterministic via the tie-break rule."""
    X, y = _validate_xy(X, y)

    def splitter(Xn, yn):
        return _best_exact_split(Xn, yn, params.min_samples_leaf, np.arange(X.shape[1]))

    return _grow(X, y, params, splitter)


def fit_cart_subspaced(X, y, params: TreeParams, max_features: int, rng) -> RegressionTree:
    """CART with per-node uniform feature subsampling (random-forest member)."""
    X, y = _validate_xy(X, y)
    d = X.shape[1]
    m = min(max_features, d)
    if m < 1:
        raise InvalidHyperparameter("max_features must be >= 1")

    def splitter(Xn, yn):
        feats = np.sort(rng.choice(d, size=m, replace=False))
        return _best_exact_split(Xn, yn, params.min_samples_leaf, feats)

    return _grow(X, y, params, splitter)


def fit_extratree(X, y, params: TreeParams = TreeParams(), seed=None) -> RegressionTree:
    """Extremely randomized tree: random feature subset, one uniform threshold
    per candidate feature, best of those by variance reduction."""
    X, y = _validate_xy(X, y)
    if seed is None:
        seed = params.seed
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    K = params.n_candidate_features or X.shape[1]
    if not 1 <= K <= X.shape[1]:
        raise InvalidHyperparameter(f"n_candidate_features must be in [1, {X.shape[1]}]")

    def splitter(Xn, yn):
        return _best_random_split(Xn, yn, K, params.min_samples_leaf, rng)

    return _grow(X, y, params, splitter)


def tree_predict(tree: RegressionTree, x) -> float:
    """Route one input to its leaf: go left iff x[feature] <= threshold."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tree.n_features,):
        raise DimensionMismatch(f"expected {tree.n_features} features, got shape {x.shape}")
    node = 0
    while tree.feature[node] != LEAF:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return float(tree.value[node])


def tree_predict_many(tree: RegressionTree, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise DimensionMismatch(f"expected (n, {tree.n_features}) inputs, got {X.shape}")
    nodes = np.zeros(X.shape[0], dtype=np.int32)
    active = tree.feature[nodes] != LEAF
    while active.any():
        cur = nodes[active]
        f = tree.feature[cur]
        go_left = X[active, f] <= tree.threshold[cur]
        nodes[active] = np.where(go_left, tree.left[cur], tree.right[cur])
        active = tree.feature[nodes] != LEAF
    return tree.value[nodes]
