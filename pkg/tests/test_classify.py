"""Kernel construction, SMO solver, and the leakage-free CV harness."""

import numpy as np
import pytest

from graphemb.classify import (
    CvResult,
    FoldReport,
    KernelMatrix,
    SvmModel,
    cross_validate,
    decision_values,
    kernel_from_similarity,
    run_fold,
    svm_predict,
    svm_train,
    _stratified_folds,
)
from graphemb.distances import DistanceMatrix
from graphemb.embedding import EmbeddingMatrix
from graphemb.errors import DataError


def dmat(values) -> DistanceMatrix:
    return DistanceMatrix(np.asarray(values, dtype=float), "embedding")


def blob_distance_matrix(per_class: int = 12, gap: float = 10.0,
                         seed: int = 0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(0.0, 0.3, per_class),
                        rng.normal(gap, 0.3, per_class)])
    D = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(D, 0.0)
    y = [0] * per_class + [1] * per_class
    return dmat((D + D.T) / 2.0), y


class TestKernelMatrix:
    def test_shape_and_symmetry_enforced(self):
        with pytest.raises(DataError):
            KernelMatrix(np.zeros((2, 3)))
        with pytest.raises(DataError):
            KernelMatrix(np.array([[1.0, 0.5], [0.1, 1.0]]))
        with pytest.raises(DataError):
            KernelMatrix(np.array([[np.inf, 0.0], [0.0, 1.0]]))
        with pytest.raises(DataError):
            KernelMatrix(np.eye(2), shifted_by=-1.0)

    def test_values_frozen(self):
        K = KernelMatrix(np.eye(2))
        with pytest.raises(ValueError):
            K.values[0, 0] = 5.0
        assert K.m == 2


class TestKernelFromSimilarity:
    def test_psd_input_untouched(self):
        S = np.array([[2.0, 1.0], [1.0, 2.0]])
        K = kernel_from_similarity(S)
        assert K.shifted_by == 0.0
        assert np.array_equal(K.values, S)

    def test_indefinite_input_shifted(self):
        # eigenvalues -1 and 1: shift by 1 lands [[1,1],[1,1]]
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        K = kernel_from_similarity(S)
        assert abs(K.shifted_by - 1.0) < 1e-12
        assert np.allclose(K.values, [[1.0, 1.0], [1.0, 1.0]])

    def test_off_diagonal_never_touched(self):
        rng = np.random.default_rng(3)
        S = rng.random((5, 5))
        S = (S + S.T) / 2.0 - 0.6
        K = kernel_from_similarity(S)
        off = ~np.eye(5, dtype=bool)
        assert np.array_equal(K.values[off], S[off])

    def test_result_is_psd(self):
        rng = np.random.default_rng(4)
        for trial in range(5):
            S = rng.random((6, 6)) - 0.5
            S = (S + S.T) / 2.0
            K = kernel_from_similarity(S)
            assert np.linalg.eigvalsh(K.values)[0] >= -1e-10

    def test_asymmetric_rejected(self):
        with pytest.raises(DataError):
            kernel_from_similarity(np.array([[1.0, 0.2], [0.4, 1.0]]))


class TestSvm:
    def separable_line(self):
        x = np.array([-2.0, -1.0, 1.0, 2.0])
        K = KernelMatrix(np.outer(x, x))
        y = (1, 1, 2, 2)
        return x, K, y

    def test_max_margin_solution(self):
        # linear kernel on -2,-1,1,2: the margin is set by the inner pair,
        # decision function f(x) = x
        x, K, y = self.separable_line()
        model = svm_train(K, y, C=10.0)
        dec = decision_values(model, K.values)
        assert np.allclose(dec, x, atol=0.05)
        assert set(model.support) <= {1, 2}
        assert abs(model.bias) < 0.05

    def test_dual_feasibility(self):
        x, K, y = self.separable_line()
        model = svm_train(K, y, C=10.0)
        alphas = np.abs(model.dual_coef)
        assert np.all(alphas >= 0) and np.all(alphas <= 10.0 + 1e-9)
        assert abs(model.dual_coef.sum()) < 1e-9

    def test_predictions_on_training_rows(self):
        x, K, y = self.separable_line()
        model = svm_train(K, y, C=10.0)
        assert list(svm_predict(model, K.values)) == [-1, -1, 1, 1]

    def test_two_classes_required(self):
        with pytest.raises(DataError):
            svm_train(KernelMatrix(np.eye(3)), (1, 1, 1), C=1.0)

    def test_c_positive(self):
        with pytest.raises(DataError):
            svm_train(KernelMatrix(np.eye(2)), (0, 1), C=0.0)

    def test_label_count_checked(self):
        with pytest.raises(DataError):
            svm_train(KernelMatrix(np.eye(2)), (0, 1, 1), C=1.0)

    def test_predict_column_count_checked(self):
        x, K, y = self.separable_line()
        model = svm_train(K, y, C=1.0)
        with pytest.raises(DataError):
            svm_predict(model, np.zeros((1, 3)))

    def test_sign_zero_is_positive(self):
        model = SvmModel((0,), np.array([0.0]), 0.0, 1.0, 2)
        assert list(svm_predict(model, np.zeros((1, 2)))) == [1]

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        X = rng.random((14, 2))
        K = kernel_from_similarity(X @ X.T)
        y = [0] * 7 + [1] * 7
        a = svm_train(K, y, C=1.0)
        b = svm_train(K, y, C=1.0)
        assert a.support == b.support
        assert np.array_equal(a.dual_coef, b.dual_coef)
        assert a.bias == b.bias


class TestStratifiedFolds:
    def test_fold_sizes_balanced(self):
        y = np.array([1.0] * 13 + [-1.0] * 8)
        folds = _stratified_folds(y, 5, np.random.default_rng(0))
        sizes = sorted(len(f) for f in folds)
        assert sizes[-1] - sizes[0] <= 1
        assert sum(sizes) == 21

    def test_per_class_balance(self):
        y = np.array([1.0] * 12 + [-1.0] * 9)
        folds = _stratified_folds(y, 3, np.random.default_rng(1))
        for cls in (1.0, -1.0):
            counts = sorted(int((y[f] == cls).sum()) for f in folds)
            assert counts[-1] - counts[0] <= 1


class TestRunFold:
    def test_dmax_fitted_on_training_rows_only(self):
        # the single largest distance sits between two test items; the
        # fold report must not see it
        D = np.full((6, 6), 10.0)
        np.fill_diagonal(D, 0.0)
        D[0, 1] = D[1, 0] = D[2, 3] = D[3, 2] = 1.0
        D[4, 5] = D[5, 4] = 100.0
        yy = np.array([1.0, 1.0, -1.0, -1.0, 1.0, -1.0])
        report = run_fold(D, yy, np.arange(4), np.array([4, 5]), (1.0,),
                          np.random.default_rng(0))
        assert report.dmax == 10.0
        assert report.shift >= 0.0
        assert report.chosen_C == 1.0
        assert len(report.predictions) == 2


class TestCrossValidate:
    def test_separable_data_perfect(self):
        dm, y = blob_distance_matrix()
        res = cross_validate(dm, y, C_grid=(1.0, 10.0), folds=4, repeats=3,
                             seed=0)
        assert res.mean_accuracy == 1.0
        assert res.std_accuracy == 0.0
        assert res.repeat_accuracies == (1.0, 1.0, 1.0)

    def test_embedding_matrix_accepted(self):
        rng = np.random.default_rng(2)
        X = np.vstack([rng.normal(0, 0.2, (8, 2)),
                       rng.normal(6, 0.2, (8, 2))])
        em = EmbeddingMatrix(X, tuple(str(i) for i in range(16)))
        res = cross_validate(em, [0] * 8 + [1] * 8, C_grid=(1.0,),
                             folds=4, repeats=2, seed=1)
        assert res.mean_accuracy == 1.0

    def test_shuffled_labels_near_chance(self):
        dm, y = blob_distance_matrix(per_class=15, seed=5)
        rng = np.random.default_rng(11)
        y_null = list(rng.permutation(y))
        res = cross_validate(dm, y_null, C_grid=(1.0,), folds=5, repeats=4,
                             seed=3)
        assert 0.2 <= res.mean_accuracy <= 0.8

    def test_deterministic(self):
        dm, y = blob_distance_matrix(per_class=8, seed=7)
        a = cross_validate(dm, y, C_grid=(0.1, 1.0), folds=4, repeats=2,
                           seed=9)
        b = cross_validate(dm, y, C_grid=(0.1, 1.0), folds=4, repeats=2,
                           seed=9)
        assert a.repeat_accuracies == b.repeat_accuracies

    def test_validation(self):
        dm, y = blob_distance_matrix(per_class=4)
        with pytest.raises(DataError):
            cross_validate(dm, y, folds=1)
        with pytest.raises(DataError):
            cross_validate(dm, y, repeats=0)
        with pytest.raises(DataError):
            cross_validate(dm, y, folds=5)
        with pytest.raises(DataError):
            cross_validate(dm, y[:-1], folds=2)
        with pytest.raises(DataError):
            cross_validate(np.zeros((4, 4)), [0, 0, 1, 1], folds=2)
