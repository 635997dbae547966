"""Binary CART decision tree with Gini impurity.

Splits scan every candidate feature and every midpoint between consecutive
distinct sorted values. Ties are broken toward the lower feature index and
lower threshold, and leaves emit their majority class (earlier class on
vote ties), so training is fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import LabeledDataset, TrainedModel, as_query_matrix, check_training_data


@dataclass
class TreeNode:
    feature: int = -1          # -1 marks a leaf
    threshold: float = 0.0     # go left when x[feature] <= threshold
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    leaf_class: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def dtree_train(
    data: LabeledDataset, max_depth: int | None = None, min_leaf: int = 1
) -> TrainedModel:
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if len(data.class_list) < 2:
        # single-class data degenerates to a constant predictor
        root = TreeNode(leaf_class=0)
    else:
        check_training_data(data)
        root = grow_tree(
            data.features, data.label_indices, len(data.class_list), max_depth, min_leaf
        )
    return TrainedModel(
        kind="dtree",
        params=root,
        class_list=data.class_list,
        n_features=data.n_features,
        schema_labels=data.schema_labels,
    )


def dtree_predict(model: TrainedModel, x):
    matrix, single = as_query_matrix(model, x)
    idx = predict_tree(model.params, matrix)
    out = np.array([model.class_list[i] for i in idx], dtype=object)
    return out[0] if single else out


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None,
    min_leaf: int,
    rng: np.random.Generator | None = None,
    features_per_split: int | None = None,
    depth: int = 0,
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    majority = int(np.argmax(counts))
    n = y.size
    if (
        counts.max() == n
        or (max_depth is not None and depth >= max_depth)
        or n < 2 * min_leaf
    ):
        return TreeNode(leaf_class=majority)

    if features_per_split is not None and features_per_split < x.shape[1]:
        dims = np.sort(rng.choice(x.shape[1], size=features_per_split, replace=False))
    else:
        dims = np.arange(x.shape[1])

    best_score = -np.inf
    best: tuple[int, float] | None = None
    for dim in dims:
        found = _best_split_on_dim(x[:, dim], y, n_classes, min_leaf)
        if found is not None and found[0] > best_score:
            best_score, thr = found
            best = (int(dim), float(thr))
    if best is None:
        return TreeNode(leaf_class=majority)

    dim, thr = best
    left_mask = x[:, dim] <= thr
    kwargs = dict(
        n_classes=n_classes,
        max_depth=max_depth,
        min_leaf=min_leaf,
        rng=rng,
        features_per_split=features_per_split,
        depth=depth + 1,
    )
    return TreeNode(
        feature=dim,
        threshold=thr,
        left=grow_tree(x[left_mask], y[left_mask], **kwargs),
        right=grow_tree(x[~left_mask], y[~left_mask], **kwargs),
    )


def _best_split_on_dim(values, y, n_classes, min_leaf):
    """Best (score, threshold) on one feature, or None when no split is valid.

    Score is the quantity maximized by minimum weighted Gini:
    sum_sq_left/n_left + sum_sq_right/n_right over label count vectors.
    """
    n = values.size
    order = np.argsort(values, kind="stable")
    xs = values[order]
    ys = y[order]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys] = 1.0
    prefix = np.vstack([np.zeros(n_classes), np.cumsum(onehot, axis=0)])
    total = prefix[-1]

    positions = np.arange(min_leaf, n - min_leaf + 1)
    positions = positions[xs[positions - 1] < xs[positions]]
    if positions.size == 0:
        return None
    left = prefix[positions]
    right = total - left
    nl = positions.astype(np.float64)
    nr = n - nl
    score = (left**2).sum(axis=1) / nl + (right**2).sum(axis=1) / nr
    best = int(np.argmax(score))  # first max = lowest threshold
    p = positions[best]
    return float(score[best]), (xs[p - 1] + xs[p]) / 2.0


def predict_tree(root: TreeNode, matrix: np.ndarray) -> np.ndarray:
    out = np.empty(matrix.shape[0], dtype=np.int64)
    for i, row in enumerate(matrix):
        node = root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.leaf_class
    return out


def tree_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def flatten_tree(root: TreeNode) -> list[dict]:
    """Preorder node list with child index links, for serialization."""
    nodes: list[dict] = []

    def visit(node: TreeNode) -> int:
        slot = len(nodes)
        nodes.append({})
        if node.is_leaf:
            nodes[slot] = {"leaf": node.leaf_class}
        else:
            left = visit(node.left)
            right = visit(node.right)
            nodes[slot] = {
                "feature": node.feature,
                "threshold": node.threshold,
                "left": left,
                "right": right,
            }
        return slot

    visit(root)
    return nodes


def unflatten_tree(nodes: list[dict]) -> TreeNode:
    def build(slot: int) -> TreeNode:
        spec = nodes[slot]
        if "leaf" in spec:
            return TreeNode(leaf_class=int(spec["leaf"]))
        return TreeNode(
            feature=int(spec["feature"]),
            threshold=float(spec["threshold"]),
            left=build(int(spec["left"])),
            right=build(int(spec["right"])),
        )

    if not nodes:
        raise ValueError("empty tree serialization")
    return build(0)
