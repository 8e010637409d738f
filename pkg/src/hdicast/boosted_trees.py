"""Second-order gradient-boosted regression trees.

Squared-error loss ``0.5 * (y - y_hat)**2`` (gradient ``y_hat - y``, hessian 1)
with L2 leaf penalty ``lambda`` and per-leaf penalty ``gamma``. Splits are
found by exact greedy enumeration; rows with a missing feature value follow a
default direction learned per split.

Trees are grown by numba kernels into flat node arrays (``feature == -1``
marks a leaf). :class:`Leaf` / :class:`Split` give the recursive view of the
same trees and back the JSON format.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Union

import numpy as np
from numba import njit

from hdicast.errors import ColumnMismatch, DegenerateLeaf, EmptyDesign


@dataclass(frozen=True)
class TrainParams:
    n_rounds: int = 100
    eta: float = 0.1
    max_depth: int = 2
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.n_rounds, int) and self.n_rounds >= 0):
            raise ValueError("n_rounds must be a non-negative integer")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if not (isinstance(self.max_depth, int) and self.max_depth >= 0):
            raise ValueError("max_depth must be a non-negative integer")
        for name in ("reg_lambda", "gamma", "min_child_weight"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("reg_lambda")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainParams":
        d = dict(d)
        if "lambda" in d:
            d["reg_lambda"] = d.pop("lambda")
        for key in ("eta", "reg_lambda", "gamma", "min_child_weight"):
            if key in d:
                d[key] = float(d[key])
        return cls(**d)


@dataclass(frozen=True)
class Leaf:
    weight: float


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    default_left: bool
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


class SplitDecision(NamedTuple):
    feature: int
    threshold: float
    default_left: bool
    gain: float


# --------------------------------------------------------------------------
# kernels

@njit(cache=True)
def _gain(GL, HL, GR, HR, G, H, lam, gamma, mcw):
    if HL < mcw or HR < mcw or HL + lam <= 0.0 or HR + lam <= 0.0:
        return -np.inf
    return 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam)) - gamma


@njit(cache=True)
def _node_sums(g, h, node_of, node):
    G = 0.0
    H = 0.0
    count = 0
    for r in range(g.shape[0]):
        if node_of[r] == node:
            G += g[r]
            H += h[r]
            count += 1
    return G, H, count


@njit(cache=True)
def _find_split(X, order, n_obs, g, h, node_of, node, use_feature, lam, gamma, mcw):
    G, H, count = _node_sums(g, h, node_of, node)
    best_gain = 0.0
    best_f = -1
    best_thr = 0.0
    best_dl = True
    if count < 2 or H + lam <= 0.0:
        return best_gain, best_f, best_thr, best_dl
    n_rows = X.shape[0]
    for f in range(X.shape[1]):
        if not use_feature[f]:
            continue
        Gm = 0.0
        Hm = 0.0
        cnt_m = 0
        for idx in range(n_obs[f], n_rows):
            r = order[f, idx]
            if node_of[r] == node:
                Gm += g[r]
                Hm += h[r]
                cnt_m += 1
        Gnm = 0.0
        Hnm = 0.0
        for idx in range(n_obs[f]):
            r = order[f, idx]
            if node_of[r] == node:
                Gnm += g[r]
                Hnm += h[r]
        GL = 0.0
        HL = 0.0
        seen = 0
        prev = 0.0
        for idx in range(n_obs[f]):
            r = order[f, idx]
            if node_of[r] != node:
                continue
            x = X[r, f]
            if seen > 0 and x > prev:
                thr = prev + (x - prev) / 2.0
                GR = Gnm - GL
                HR = Hnm - HL
                if cnt_m > 0:
                    gain = _gain(GL + Gm, HL + Hm, GR, HR, G, H, lam, gamma, mcw)
                    if gain > best_gain:
                        best_gain, best_f, best_thr, best_dl = gain, f, thr, True
                    gain = _gain(GL, HL, GR + Gm, HR + Hm, G, H, lam, gamma, mcw)
                    if gain > best_gain:
                        best_gain, best_f, best_thr, best_dl = gain, f, thr, False
                else:
                    # no missing rows seen: unseen missing values follow the heavier child
                    gain = _gain(GL, HL, GR, HR, G, H, lam, gamma, mcw)
                    if gain > best_gain:
                        best_gain, best_f, best_thr, best_dl = gain, f, thr, HL >= HR
            GL += g[r]
            HL += h[r]
            seen += 1
            prev = x
    return best_gain, best_f, best_thr, best_dl


@njit(cache=True)
def _grow_tree(X, order, n_obs, g, h, use_feature, max_depth, lam, gamma, mcw,
               feat, thr, dleft, left, right, value, node_of):
    """Grow one tree breadth-first into the node arrays; returns the node count.

    On return ``node_of[r]`` is the leaf reached by training row ``r``.
    """
    depth = np.zeros(feat.shape[0], np.int64)
    for r in range(node_of.shape[0]):
        node_of[r] = 0
    n_nodes = 1
    head = 0
    while head < n_nodes:
        node = head
        head += 1
        f = -1
        t = 0.0
        dl = True
        if depth[node] < max_depth:
            _, f, t, dl = _find_split(X, order, n_obs, g, h, node_of, node, use_feature, lam, gamma, mcw)
        if f < 0:
            G, H, _ = _node_sums(g, h, node_of, node)
            feat[node] = -1
            value[node] = -G / (H + lam)
            continue
        lo = n_nodes
        hi = n_nodes + 1
        n_nodes += 2
        feat[node] = f
        thr[node] = t
        dleft[node] = dl
        left[node] = lo
        right[node] = hi
        depth[lo] = depth[node] + 1
        depth[hi] = depth[node] + 1
        for r in range(X.shape[0]):
            if node_of[r] == node:
                x = X[r, f]
                go_left = dl if np.isnan(x) else x < t
                node_of[r] = lo if go_left else hi
    return n_nodes


@njit(cache=True)
def _boost(X, y, order, n_obs, use_feature, base, n_rounds, eta, max_depth, lam, gamma, mcw, cap):
    n = X.shape[0]
    feat = np.full((n_rounds, cap), -1, np.int64)
    thr = np.zeros((n_rounds, cap))
    dleft = np.zeros((n_rounds, cap), np.bool_)
    left = np.full((n_rounds, cap), -1, np.int64)
    right = np.full((n_rounds, cap), -1, np.int64)
    value = np.zeros((n_rounds, cap))
    preds = np.full(n, base)
    g = np.empty(n)
    h = np.ones(n)
    node_of = np.zeros(n, np.int64)
    for t in range(n_rounds):
        for r in range(n):
            g[r] = preds[r] - y[r]
        _grow_tree(X, order, n_obs, g, h, use_feature, max_depth, lam, gamma, mcw,
                   feat[t], thr[t], dleft[t], left[t], right[t], value[t], node_of)
        for r in range(n):
            preds[r] += eta * value[t, node_of[r]]
    return feat, thr, dleft, left, right, value, preds


@njit(cache=True)
def _predict(X, base, eta, feat, thr, dleft, left, right, value, n_trees):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        acc = base
        for t in range(n_trees):
            node = 0
            while feat[t, node] >= 0:
                x = X[r, feat[t, node]]
                if np.isnan(x):
                    go_left = dleft[t, node]
                else:
                    go_left = x < thr[t, node]
                node = left[t, node] if go_left else right[t, node]
            acc += eta * value[t, node]
        out[r] = acc
    return out


# --------------------------------------------------------------------------
# python surface

def grad_hess(y, y_hat):
    """Gradient and hessian of ``0.5 * (y - y_hat)**2`` with respect to ``y_hat``."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    return y_hat - y, np.ones_like(y_hat)


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    """Minimiser of ``G*w + 0.5*(H + lambda)*w**2``."""
    if H + reg_lambda == 0:
        raise DegenerateLeaf("H + lambda is zero")
    return -G / (H + reg_lambda)


def _as_design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    if np.isinf(X).any():
        raise ValueError("X contains infinite values")
    return np.ascontiguousarray(X)


def _sort_index(X: np.ndarray):
    # argsort places NaN last, so the first n_obs[f] entries are the observed rows
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))
    n_obs = (~np.isnan(X)).sum(axis=0).astype(np.int64)
    return order, n_obs


def _feature_mask(n_features: int, features) -> np.ndarray:
    mask = np.zeros(n_features, np.bool_)
    if features is None:
        mask[:] = True
    else:
        mask[list(features)] = True
    return mask


def best_split(X, g, h, reg_lambda: float = 0.0, gamma: float = 0.0,
               min_child_weight: float = 1.0, features=None) -> Optional[SplitDecision]:
    """Best exact-greedy split over all rows, or ``None`` when no split has positive gain."""
    X = _as_design(X)
    g = np.ascontiguousarray(g, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("best_split needs at least 2 rows")
    order, n_obs = _sort_index(X)
    node_of = np.zeros(X.shape[0], np.int64)
    gain, f, t, dl = _find_split(X, order, n_obs, g, h, node_of, 0, _feature_mask(X.shape[1], features),
                                 float(reg_lambda), float(gamma), float(min_child_weight))
    if f < 0:
        return None
    return SplitDecision(int(f), float(t), bool(dl), float(gain))


class Forest(NamedTuple):
    feature: np.ndarray
    threshold: np.ndarray
    default_left: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


def _capacity(max_depth: int, n_rows: int) -> int:
    if max_depth >= 30:
        return 2 * n_rows - 1
    return min(2 ** (max_depth + 1) - 1, 2 * n_rows - 1)


def _node_from_arrays(forest: Forest, t: int, node: int) -> TreeNode:
    f = int(forest.feature[t, node])
    if f < 0:
        return Leaf(float(forest.value[t, node]))
    return Split(f, float(forest.threshold[t, node]), bool(forest.default_left[t, node]),
                 _node_from_arrays(forest, t, int(forest.left[t, node])),
                 _node_from_arrays(forest, t, int(forest.right[t, node])))


def _count_nodes(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + _count_nodes(node.left) + _count_nodes(node.right)


def _forest_from_trees(trees) -> Forest:
    cap = max([_count_nodes(t) for t in trees], default=1)
    k = len(trees)
    forest = Forest(np.full((k, cap), -1, np.int64), np.zeros((k, cap)), np.zeros((k, cap), np.bool_),
                    np.full((k, cap), -1, np.int64), np.full((k, cap), -1, np.int64), np.zeros((k, cap)))
    for t, root in enumerate(trees):
        queue = [root]
        pos = 0
        while pos < len(queue):
            node = queue[pos]
            if isinstance(node, Leaf):
                forest.value[t, pos] = node.weight
            else:
                forest.feature[t, pos] = node.feature
                forest.threshold[t, pos] = node.threshold
                forest.default_left[t, pos] = node.default_left
                forest.left[t, pos] = len(queue)
                forest.right[t, pos] = len(queue) + 1
                queue.extend([node.left, node.right])
            pos += 1
    return forest


def build_tree(X, g, h, params: TrainParams) -> TreeNode:
    """Grow a single tree on the given gradient statistics."""
    X = _as_design(X)
    if X.shape[0] < 1:
        raise EmptyDesign("build_tree needs at least one row")
    g = np.ascontiguousarray(g, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    order, n_obs = _sort_index(X)
    cap = _capacity(params.max_depth, X.shape[0])
    arrays = Forest(np.full((1, cap), -1, np.int64), np.zeros((1, cap)), np.zeros((1, cap), np.bool_),
                    np.full((1, cap), -1, np.int64), np.full((1, cap), -1, np.int64), np.zeros((1, cap)))
    node_of = np.zeros(X.shape[0], np.int64)
    _grow_tree(X, order, n_obs, g, h, _feature_mask(X.shape[1], None), params.max_depth,
               params.reg_lambda, params.gamma, params.min_child_weight,
               arrays.feature[0], arrays.threshold[0], arrays.default_left[0],
               arrays.left[0], arrays.right[0], arrays.value[0], node_of)
    return _node_from_arrays(arrays, 0, 0)


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.weight}
    return {"feature": node.feature, "threshold": node.threshold, "default_left": node.default_left,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(d: dict) -> TreeNode:
    if "leaf" in d:
        return Leaf(float(d["leaf"]))
    return Split(int(d["feature"]), float(d["threshold"]), bool(d["default_left"]),
                 _node_from_dict(d["left"]), _node_from_dict(d["right"]))


@dataclass(frozen=True, eq=False)
class BoostedModel:
    """``base_score + eta * sum(tree(x))`` over the fitted trees."""

    base_score: float
    params: TrainParams
    n_features: int
    forest: Forest

    @classmethod
    def from_trees(cls, base_score: float, trees, params: TrainParams, n_features: int) -> "BoostedModel":
        return cls(float(base_score), params, int(n_features), _forest_from_trees(list(trees)))

    @cached_property
    def trees(self) -> tuple[TreeNode, ...]:
        return tuple(_node_from_arrays(self.forest, t, 0) for t in range(self.forest.feature.shape[0]))

    @property
    def n_trees(self) -> int:
        return self.forest.feature.shape[0]

    def to_dict(self) -> dict:
        return {"base_score": self.base_score, "params": self.params.to_dict(),
                "n_features": self.n_features, "trees": [_node_to_dict(t) for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedModel":
        return cls.from_trees(d["base_score"], [_node_from_dict(t) for t in d["trees"]],
                              TrainParams.from_dict(d["params"]), d["n_features"])

    def __eq__(self, other):
        if not isinstance(other, BoostedModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def train(X, y, params: TrainParams = TrainParams()) -> BoostedModel:
    """Fit ``params.n_rounds`` trees starting from ``base_score = mean(y)``."""
    X = _as_design(X)
    y = np.ascontiguousarray(y, dtype=float)
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X rows and y length differ")
    if y.shape[0] == 0:
        raise EmptyDesign("cannot train on zero rows")
    if not np.isfinite(y).all():
        raise ValueError("y must be finite")
    base = float(np.mean(y))
    order, n_obs = _sort_index(X)
    cap = _capacity(params.max_depth, X.shape[0])
    out = _boost(X, y, order, n_obs, _feature_mask(X.shape[1], None), base, params.n_rounds,
                 params.eta, params.max_depth, params.reg_lambda, params.gamma,
                 params.min_child_weight, cap)
    return BoostedModel(base, params, X.shape[1], Forest(*out[:6]))


def predict_many(model: BoostedModel, X, n_trees: Optional[int] = None) -> np.ndarray:
    """Predictions for every row of ``X``; ``n_trees`` truncates the ensemble."""
    X = _as_design(X)
    if X.shape[1] != model.n_features:
        raise ColumnMismatch(f"model expects {model.n_features} columns, got {X.shape[1]}")
    k = model.n_trees if n_trees is None else min(n_trees, model.n_trees)
    f = model.forest
    return _predict(X, model.base_score, model.params.eta, f.feature, f.threshold,
                    f.default_left, f.left, f.right, f.value, k)


def predict(model: BoostedModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ColumnMismatch("predict takes a single feature row")
    return float(predict_many(model, x.reshape(1, -1))[0])


def _leaf_weights(node: TreeNode) -> list[float]:
    if isinstance(node, Leaf):
        return [node.weight]
    return _leaf_weights(node.left) + _leaf_weights(node.right)


def objective_value(model: BoostedModel, X, y, params: Optional[TrainParams] = None) -> float:
    """Squared-error training loss plus ``gamma*T + 0.5*lambda*sum(w**2)`` per tree."""
    params = model.params if params is None else params
    y = np.asarray(y, dtype=float)
    resid = y - predict_many(model, X)
    loss = 0.5 * float(np.sum(resid * resid))
    penalty = 0.0
    for tree in model.trees:
        w = np.array(_leaf_weights(tree))
        penalty += params.gamma * w.size + 0.5 * params.reg_lambda * float(np.sum(w * w))
    return loss + penalty
