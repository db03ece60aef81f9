"""Supervised graph classification on precomputed kernels.

Distance (or embedding) input is turned into similarities on the training
fold only (1 - D/dmax_train), spectrum-shifted into a PSD kernel, and fed
to a soft-margin SVM solved by SMO-style pairwise coordinate ascent.  The
cross-validation harness keeps every data-dependent quantity (similarity
scale, kernel shift, C choice) fitted strictly on training folds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graphemb.distances import DistanceMatrix
from graphemb.embedding import EmbeddingMatrix, pairwise_embedding_distances
from graphemb.errors import DataError, NumericalError

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
KKT_TOL = 1e-3
SUPPORT_EPS = 1e-12


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric kernel over training items; ``shifted_by`` records the
    -lambda_min diagonal shift applied to make it PSD (0 if none)."""

    values: np.ndarray
    shifted_by: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError(f"kernel must be square, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("kernel has non-finite entries")
        if v.size and np.abs(v - v.T).max() > 1e-9:
            raise DataError("kernel is asymmetric beyond 1e-9")
        if self.shifted_by < 0:
            raise DataError(f"shifted_by must be >= 0, "
                            f"got {self.shifted_by!r}")
        v = np.array((v + v.T) / 2.0, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SvmModel:
    """Dual solution: support indices into the training set, their
    alpha_i * y_i coefficients, the bias, and the C used."""

    support: tuple[int, ...]
    dual_coef: np.ndarray
    bias: float
    C: float
    n_train: int

    def __post_init__(self):
        coef = np.asarray(self.dual_coef, dtype=np.float64)
        if coef.shape != (len(self.support),):
            raise DataError("dual_coef length must match support indices")
        coef = np.array(coef, copy=True)
        coef.setflags(write=False)
        object.__setattr__(self, "dual_coef", coef)
        object.__setattr__(self, "support", tuple(int(i)
                                                  for i in self.support))


def kernel_from_similarity(S: np.ndarray) -> KernelMatrix:
    """Shift the spectrum if needed: K = S - lambda_min(S) * I when
    lambda_min < 0, else K = S unchanged.  Off-diagonal entries are never
    touched."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError(f"similarity must be square, got {S.shape}")
    if S.size and np.abs(S - S.T).max() > 1e-9:
        raise DataError("similarity matrix is asymmetric beyond 1e-9")
    S = (S + S.T) / 2.0
    lam_min = float(np.linalg.eigvalsh(S)[0]) if S.size else 0.0
    if lam_min < 0:
        K = S - lam_min * np.eye(S.shape[0])
        return KernelMatrix(K, shifted_by=-lam_min)
    return KernelMatrix(S, shifted_by=0.0)


def _as_pm1(y) -> np.ndarray:
    y = np.asarray(y)
    vals = sorted(set(y.tolist()))
    if len(vals) != 2:
        raise DataError(f"need exactly 2 classes, got {len(vals)}")
    return np.where(y == vals[1], 1.0, -1.0)


def svm_train(K, y, C: float = 1.0) -> SvmModel:
    """Soft-margin SVM dual via sequential minimal optimization.

    Deterministic: candidate scans run in index order, the paired index
    maximizes |E_i - E_j| (first index wins ties).  Terminates when a full
    pass finds no KKT violation beyond 1e-3.
    """
    Kv = K.values if isinstance(K, KernelMatrix) else np.asarray(
        K, dtype=np.float64)
    if Kv.ndim != 2 or Kv.shape[0] != Kv.shape[1]:
        raise DataError(f"kernel must be square, got {Kv.shape}")
    y = np.asarray(y)
    if len(y) != Kv.shape[0]:
        raise DataError(f"{len(y)} labels for {Kv.shape[0]} kernel rows")
    yy = _as_pm1(y)
    if not (C > 0):
        raise DataError(f"C must be > 0, got {C!r}")

    m = len(yy)
    alpha = np.zeros(m)
    state = {"b": 0.0}
    # f_i = sum_j alpha_j y_j K_ij (bias tracked separately)
    f = np.zeros(m)

    def take_step(i1: int, i2: int) -> bool:
        nonlocal f
        if i1 == i2:
            return False
        a1o, a2o = alpha[i1], alpha[i2]
        y1, y2 = yy[i1], yy[i2]
        e1 = f[i1] + state["b"] - y1
        e2 = f[i2] + state["b"] - y2
        s = y1 * y2
        if s < 0:
            L = max(0.0, a2o - a1o)
            H = min(C, C + a2o - a1o)
        else:
            L = max(0.0, a1o + a2o - C)
            H = min(C, a1o + a2o)
        if L >= H:
            return False
        k11 = Kv[i1, i1]
        k12 = Kv[i1, i2]
        k22 = Kv[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2 = a2o + y2 * (e1 - e2) / eta
            a2 = min(max(a2, L), H)
        else:
            # flat direction: evaluate the dual objective at both ends
            gamma = a1o + s * a2o

            def neg_obj(a2v):
                a1v = gamma - s * a2v
                v1 = f[i1] - a1o * y1 * k11 - a2o * y2 * k12
                v2 = f[i2] - a1o * y1 * k12 - a2o * y2 * k22
                w = (a1v + a2v
                     - 0.5 * k11 * a1v * a1v - 0.5 * k22 * a2v * a2v
                     - s * k12 * a1v * a2v
                     - y1 * a1v * v1 - y2 * a2v * v2)
                return -w

            if neg_obj(L) < neg_obj(H) - 1e-12:
                a2 = L
            elif neg_obj(H) < neg_obj(L) - 1e-12:
                a2 = H
            else:
                return False
        if abs(a2 - a2o) < 1e-12 * (a2 + a2o + 1e-12):
            return False
        a1 = a1o + s * (a2o - a2)
        d1 = (a1 - a1o) * y1
        d2 = (a2 - a2o) * y2
        b1 = state["b"] - e1 - d1 * k11 - d2 * k12
        b2 = state["b"] - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1 < C:
            state["b"] = b1
        elif 0.0 < a2 < C:
            state["b"] = b2
        else:
            state["b"] = (b1 + b2) / 2.0
        alpha[i1] = a1
        alpha[i2] = a2
        f += d1 * Kv[i1] + d2 * Kv[i2]
        return True

    def examine(i2: int) -> bool:
        y2 = yy[i2]
        a2 = alpha[i2]
        e2 = f[i2] + state["b"] - y2
        r2 = e2 * y2
        if not ((r2 < -KKT_TOL and a2 < C) or (r2 > KKT_TOL and a2 > 0)):
            return False
        non_bound = np.flatnonzero((alpha > 0) & (alpha < C))
        if len(non_bound) > 1:
            errs = f[non_bound] + state["b"] - yy[non_bound]
            i1 = int(non_bound[np.argmax(np.abs(errs - e2))])
            if take_step(i1, i2):
                return True
        for i1 in non_bound:
            if take_step(int(i1), i2):
                return True
        for i1 in range(m):
            if take_step(i1, i2):
                return True
        return False

    examine_all = True
    passes = 0
    max_passes = max(200, 20 * m)
    while True:
        passes += 1
        if passes > max_passes:
            raise NumericalError(f"SMO failed to converge within "
                                 f"{max_passes} passes")
        changed = 0
        if examine_all:
            for i in range(m):
                changed += examine(i)
        else:
            for i in np.flatnonzero((alpha > 0) & (alpha < C)):
                changed += examine(int(i))
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True

    # recompute the bias from the converged alphas: the running estimate
    # tracks the last step taken, which is arbitrary within the KKT
    # feasibility interval once every alpha sits at a bound
    free = np.flatnonzero((alpha > SUPPORT_EPS) & (alpha < C - SUPPORT_EPS))
    if len(free):
        b = float(np.mean(yy[free] - f[free]))
    else:
        t = yy - f
        lower = ((yy > 0) & (alpha <= SUPPORT_EPS)) | \
                ((yy < 0) & (alpha >= C - SUPPORT_EPS))
        lo = float(t[lower].max()) if lower.any() else None
        hi = float(t[~lower].min()) if (~lower).any() else None
        if lo is None:
            b = hi if hi is not None else float(state["b"])
        elif hi is None:
            b = lo
        else:
            b = (lo + hi) / 2.0

    support = np.flatnonzero(alpha > SUPPORT_EPS)
    return SvmModel(tuple(int(i) for i in support),
                    alpha[support] * yy[support], float(b),
                    float(C), m)


def svm_predict(model: SvmModel, K_rows) -> np.ndarray:
    """Predict +-1 labels from kernel rows against the full training set
    (columns in training order); sign(0) counts as +1."""
    K_rows = np.atleast_2d(np.asarray(K_rows, dtype=np.float64))
    if K_rows.shape[1] != model.n_train:
        raise DataError(f"kernel rows have {K_rows.shape[1]} columns, "
                        f"expected {model.n_train}")
    dec = K_rows[:, list(model.support)] @ model.dual_coef + model.bias
    return np.where(dec >= 0, 1, -1)


def decision_values(model: SvmModel, K_rows) -> np.ndarray:
    K_rows = np.atleast_2d(np.asarray(K_rows, dtype=np.float64))
    if K_rows.shape[1] != model.n_train:
        raise DataError(f"kernel rows have {K_rows.shape[1]} columns, "
                        f"expected {model.n_train}")
    return K_rows[:, list(model.support)] @ model.dual_coef + model.bias


@dataclass(frozen=True)
class FoldReport:
    """Training-fold intermediates, exposed so leakage is testable."""

    dmax: float
    shift: float
    chosen_C: float
    accuracy: float
    predictions: tuple[int, ...]


@dataclass(frozen=True)
class CvResult:
    mean_accuracy: float
    std_accuracy: float
    repeat_accuracies: tuple[float, ...]


def _distances_from(data) -> np.ndarray:
    if isinstance(data, DistanceMatrix):
        return np.asarray(data.values, dtype=np.float64)
    if isinstance(data, EmbeddingMatrix):
        return np.asarray(pairwise_embedding_distances(data).values,
                          dtype=np.float64)
    raise DataError("expected a DistanceMatrix or EmbeddingMatrix, "
                    f"got {type(data).__name__}")


def _stratified_folds(y: np.ndarray, folds: int,
                      rng: np.random.Generator) -> list[np.ndarray]:
    """Round-robin deal of shuffled per-class indices with a running fold
    pointer: fold sizes differ by at most 1 overall AND per class."""
    assignment = np.empty(len(y), dtype=int)
    ptr = 0
    for cls in sorted(set(y.tolist())):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for i in idx:
            assignment[i] = ptr % folds
            ptr += 1
    return [np.flatnonzero(assignment == fold) for fold in range(folds)]


def _train_one(D: np.ndarray, yy: np.ndarray, train_idx: np.ndarray,
               C: float):
    """Fit similarity scale, shift, and SVM on the given rows only.

    Returns (model, dmax, shift).  dmax falls back to 1 when the training
    distances are all zero.
    """
    Dtr = D[np.ix_(train_idx, train_idx)]
    dmax = float(Dtr.max()) if Dtr.size else 0.0
    if dmax <= 0:
        dmax = 1.0
    S = 1.0 - Dtr / dmax
    K = kernel_from_similarity(S)
    model = svm_train(K, yy[train_idx], C)
    return model, dmax, K.shifted_by


def _test_rows(D: np.ndarray, train_idx: np.ndarray, test_idx: np.ndarray,
               dmax: float) -> np.ndarray:
    """Cross-similarity rows for test items: the diagonal spectrum shift
    touches only train-train self similarity, so these are unshifted."""
    return 1.0 - D[np.ix_(test_idx, train_idx)] / dmax


def _pick_C(D: np.ndarray, yy: np.ndarray, train_idx: np.ndarray,
            C_grid, rng: np.random.Generator) -> float:
    """Inner stratified CV on the training fold only; ties favor the
    smallest C."""
    y_tr = yy[train_idx]
    inner = min(3, int(min(np.sum(y_tr == 1), np.sum(y_tr == -1))))
    if inner < 2 or len(C_grid) == 1:
        return float(sorted(C_grid)[0])
    inner_folds = _stratified_folds(y_tr, inner, rng)
    best_C, best_acc = None, -1.0
    for C in sorted(C_grid):
        correct = 0
        for fold in inner_folds:
            test_local = fold
            train_local = np.setdiff1d(np.arange(len(train_idx)), fold)
            tr = train_idx[train_local]
            te = train_idx[test_local]
            model, dmax, _ = _train_one(D, yy, tr, C)
            rows = _test_rows(D, tr, te, dmax)
            pred = svm_predict(model, rows)
            correct += int((pred == yy[te]).sum())
        acc = correct / len(train_idx)
        if acc > best_acc + 1e-12:
            best_acc = acc
            best_C = float(C)
    return best_C


def run_fold(D: np.ndarray, yy: np.ndarray, train_idx: np.ndarray,
             test_idx: np.ndarray, C_grid, rng: np.random.Generator
             ) -> FoldReport:
    """One outer fold: choose C on the training part, fit, score the test
    part.  Nothing derived from test rows enters the fit."""
    chosen_C = _pick_C(D, yy, train_idx, C_grid, rng)
    model, dmax, shift = _train_one(D, yy, train_idx, chosen_C)
    rows = _test_rows(D, train_idx, test_idx, dmax)
    pred = svm_predict(model, rows)
    acc = float((pred == yy[test_idx]).mean())
    return FoldReport(dmax, shift, chosen_C, acc,
                      tuple(int(p) for p in pred))


def cross_validate(data, labels, C_grid=DEFAULT_C_GRID, folds: int = 10,
                   repeats: int = 10, seed: int = 0) -> CvResult:
    """Repeated stratified k-fold CV of the distance->similarity->kernel->
    SVM pipeline.

    Per repeat, folds are a fresh stratified shuffle; accuracy is pooled
    over the repeat's test predictions.  Returns mean and std (population)
    over repeats.
    """
    D = _distances_from(data)
    y = np.asarray(labels)
    if len(y) != D.shape[0]:
        raise DataError(f"{len(y)} labels for {D.shape[0]} items")
    if folds < 2:
        raise DataError(f"folds must be >= 2, got {folds}")
    if repeats < 1:
        raise DataError(f"repeats must be >= 1, got {repeats}")
    yy = _as_pm1(y)
    for cls in (-1.0, 1.0):
        if int((yy == cls).sum()) < folds:
            raise DataError("every class needs at least `folds` members")
    accs = []
    for rep in range(repeats):
        rng = np.random.default_rng(
            np.random.SeedSequence([int(seed), rep]))
        fold_sets = _stratified_folds(yy, folds, rng)
        correct = 0
        for f, test_idx in enumerate(fold_sets):
            train_idx = np.setdiff1d(np.arange(len(yy)), test_idx)
            inner_rng = np.random.default_rng(
                np.random.SeedSequence([int(seed), rep, f]))
            report = run_fold(D, yy, train_idx, test_idx, C_grid, inner_rng)
            correct += int((np.asarray(report.predictions)
                            == yy[test_idx]).sum())
        accs.append(correct / len(yy))
    accs_arr = np.asarray(accs)
    return CvResult(float(accs_arr.mean()), float(accs_arr.std()),
                    tuple(float(a) for a in accs))
