"""Grid search over classifier hyperparameters with stratified CV."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError
from ..evaluation import waf
from ..validation import as_labels, as_matrix


@dataclass
class GridSpec:
    """Candidate lists per hyperparameter; WAF picks the winner."""

    param_grid: dict[str, list] = field(default_factory=dict)
    fold_count: int = 5

    def __post_init__(self):
        if self.fold_count < 2:
            raise ValueError("fold_count must be at least 2")
        for name, candidates in self.param_grid.items():
            if not candidates:
                raise ValueError(f"empty candidate list for {name!r}")

    def combinations(self) -> list[dict]:
        names = list(self.param_grid)
        out = []
        for values in itertools.product(*(self.param_grid[n] for n in names)):
            out.append(dict(zip(names, values)))
        return out or [{}]


def stratified_kfold(y, fold_count: int, seed: int) -> list[np.ndarray]:
    """Index arrays per fold, each with (nearly) the label mix of ``y``."""
    y = np.asarray(y)
    folds: list[list[int]] = [[] for _ in range(fold_count)]
    rng = np.random.default_rng(seed)
    for label in np.unique(y):
        idx = np.nonzero(y == label)[0]
        if idx.size < fold_count:
            raise DegenerateDataError(
                f"label {label} has {idx.size} members; cannot build "
                f"{fold_count} stratified folds")
        idx = idx[rng.permutation(idx.size)]
        for pos, i in enumerate(idx):
            folds[pos % fold_count].append(int(i))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def grid_search(kind, X, y, grid: GridSpec, seed: int):
    """Pick the combination maximizing mean CV WAF, then refit on all rows.

    ``kind`` is a classifier name ("random_forest", "gaussian_nb",
    "mlp") or a ``factory(params, seed)`` callable building a fresh
    estimator. Ties go to the earlier combination in declared grid
    order. Only the rows passed in are ever touched, so callers hand
    over the training split and nothing else.
    """
    if callable(kind):
        make_classifier = kind
    else:
        from . import make_classifier as _make

        def make_classifier(params, s, _kind=kind):
            return _make(_kind, params, s)

    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    folds = stratified_kfold(y, grid.fold_count, seed)
    all_idx = np.arange(X.shape[0])
    best_params = None
    best_score = -np.inf
    for params in grid.combinations():
        scores = []
        for fold in folds:
            train_mask = np.ones(X.shape[0], dtype=bool)
            train_mask[fold] = False
            train_idx = all_idx[train_mask]
            model = make_classifier(params, seed)
            model.fit(X[train_idx], y[train_idx])
            scores.append(waf(y[fold], model.predict(X[fold])))
        mean_score = float(np.mean(scores))
        if mean_score > best_score:
            best_score = mean_score
            best_params = params
    model = make_classifier(best_params, seed)
    model.fit(X, y)
    return best_params, model
