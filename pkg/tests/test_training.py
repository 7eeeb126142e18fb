import math

import numpy as np
import pytest

from slmkit.checks import distinct_inputs, interpolation_instance
from slmkit.errors import InputError, ShapeError
from slmkit.models import augment, predict_elm, predict_slm
from slmkit.rbf import RandomSpec, RbfBank, generate_bank
from slmkit.training import (
    Dataset,
    build_h_matrix,
    build_k_matrix,
    build_k_matrix_naive,
    build_z,
    check_k_rank,
    fit_elm,
    fit_slm,
)


def instance(seed, N, n, h, m=2):
    rng = np.random.default_rng(seed)
    x = distinct_inputs(rng, N, n)
    return generate_bank(RandomSpec(seed=seed), n, h), Dataset(x, rng.standard_normal((N, m)))


def test_build_z_examples():
    np.testing.assert_array_equal(build_z([1.0, 2.0]), [1.0, 2.0, 1.0])
    np.testing.assert_array_equal(build_z([]), [1.0])
    np.testing.assert_array_equal(build_z([-3.0]), [-3.0, 1.0])


def test_dataset_validation():
    with pytest.raises(ShapeError):
        Dataset(np.zeros((3, 2)), np.zeros((2, 2)))
    with pytest.raises(InputError):
        Dataset(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(InputError):
        Dataset([[np.nan]], [[0.0]])
    d = Dataset(np.zeros((4, 2)), np.zeros((4, 3)))
    assert (len(d), d.dim_in, d.dim_out) == (4, 2, 3)


def test_h_single_point_at_center():
    x = np.array([[0.4, -0.2]])
    bank = RbfBank(x, [0.9])
    np.testing.assert_array_equal(build_h_matrix(bank, Dataset(x, [[1.0]])), [[1.0]])
    np.testing.assert_array_equal(build_k_matrix(bank, Dataset(x, [[1.0]])), [[0.4, -0.2, 1.0]])


def test_h_large_widths_vanish():
    bank = RbfBank([[5.0, 5.0], [-5.0, 5.0]], [1e6, 1e6])
    data = Dataset(np.random.default_rng(0).standard_normal((6, 2)), np.zeros((6, 1)))
    assert np.max(build_h_matrix(bank, data)) == 0.0
    assert np.max(np.abs(build_k_matrix(bank, data))) == 0.0


def test_h_matches_per_entry_oracle():
    bank, data = instance(1, 3, 2, 2)
    h = build_h_matrix(bank, data)
    assert h.shape == (3, 2)
    for j in range(3):
        for i in range(2):
            d = data.inputs[j] - bank.centers[i]
            assert h[j, i] == pytest.approx(math.exp(-bank.widths[i] * (d[0] ** 2 + d[1] ** 2)), rel=1e-15)


@pytest.mark.parametrize("N,n,h", [(4, 2, 2), (3, 1, 5), (7, 3, 4), (1, 1, 1), (12, 2, 6)])
def test_k_is_row_wise_product_of_h_and_z(N, n, h):
    bank, data = instance(N * 10 + n, N, n, h)
    k = build_k_matrix(bank, data)
    hm, z = build_h_matrix(bank, data), augment(data.inputs)
    assert k.shape == (N, (n + 1) * h)
    for j in range(N):
        for i in range(h):
            for c in range(n + 1):
                assert k[j, i * (n + 1) + c] == hm[j, i] * z[j, c]


@pytest.mark.parametrize("N,n,h", [(4, 2, 2), (3, 1, 5), (7, 3, 4), (30, 2, 10), (5, 5, 3)])
def test_k_equals_naive_assembly_exactly(N, n, h):
    bank, data = instance(N + n + h, N, n, h)
    np.testing.assert_array_equal(build_k_matrix(bank, data), build_k_matrix_naive(bank, data))


def test_k_with_floor_width_is_z():
    x = np.array([[0.5], [-0.7]])
    bank = RbfBank([[0.0]], [1e-12])
    np.testing.assert_allclose(build_k_matrix(bank, Dataset(x, np.zeros((2, 1)))), augment(x), atol=1e-6)


def test_dimension_mismatch():
    bank = generate_bank(RandomSpec(), 3, 2)
    with pytest.raises(ShapeError):
        build_k_matrix(bank, Dataset(np.zeros((2, 2)), np.zeros((2, 1))))


# --- rank ----------------------------------------------------------------------

def test_rank_column_limited():
    bank, data = instance(8, 8, 1, 2)
    assert np.linalg.matrix_rank(build_k_matrix(bank, data)) == 4
    assert check_k_rank(bank, data) == 4


def test_rank_row_limited():
    bank, data = instance(3, 3, 1, 5)
    assert np.linalg.matrix_rank(build_k_matrix(bank, data)) == 3
    assert check_k_rank(bank, data) == 3


def test_rank_with_duplicate_inputs():
    x = np.array([[0.1, 0.2], [0.1, 0.2], [1.0, -1.0], [0.3, 0.9]])
    bank = generate_bank(RandomSpec(seed=2), 2, 4)
    r = check_k_rank(bank, Dataset(x, np.zeros((4, 1))))
    assert r <= 3


# --- fitting -------------------------------------------------------------------

def test_single_sample_exact_fit():
    x, t = np.array([[0.3, 0.8]]), np.array([[2.0, -1.0]])
    params, rep = fit_slm(generate_bank(RandomSpec(seed=4), 2, 1), Dataset(x, t))
    assert np.sum((predict_slm(params, x) - t) ** 2) <= 1e-10
    assert rep.N == 1 and rep.regressor_cols == 3


def test_square_interpolation_instance():
    bank, data = interpolation_instance(0, 6, 1)
    k = build_k_matrix(bank, data)
    assert k.shape == (6, 6)
    assert np.linalg.matrix_rank(k) == 6
    params, rep = fit_slm(bank, data)
    np.testing.assert_allclose(params.gamma, np.linalg.solve(k, data.targets), rtol=1e-6, atol=1e-9)
    assert rep.train_mse <= 1e-16 * np.mean(np.sum(data.targets ** 2, axis=1))


def test_fit_report_fields():
    bank, data = instance(5, 40, 2, 5)
    params, rep = fit_slm(bank, data)
    resid = predict_slm(params, data.inputs) - data.targets
    assert rep.train_sse == pytest.approx(float(np.sum(resid ** 2)), rel=1e-10)
    assert rep.train_mse == pytest.approx(rep.train_sse / 40, rel=1e-15)
    assert (rep.kind, rep.n, rep.m, rep.h, rep.N) == ("slm", 2, 2, 5, 40)
    assert rep.rank_of_regressor == 15 and rep.full_rank
    assert rep.sigma_max >= rep.sigma_min_kept > 0
    assert rep.k_build_seconds >= 0 and rep.solve_seconds >= 0


def test_elm_square_system():
    bank, data = instance(6, 5, 2, 5)
    params, rep = fit_elm(bank, data)
    assert rep.full_rank
    assert rep.train_mse <= 1e-12


def test_elm_zero_targets():
    bank, data = instance(7, 20, 2, 6)
    params, _ = fit_elm(bank, Dataset(data.inputs, np.zeros((20, 2))))
    np.testing.assert_array_equal(params.b_matrix, 0.0)
    assert np.all(predict_elm(params, data.inputs) == 0)


def test_monotone_capacity_nested_banks():
    rng = np.random.default_rng(0)
    x = rng.uniform(-2, 2, (200, 2))
    data = Dataset(x, np.column_stack([np.sin(x[:, 0]) * x[:, 1], np.cos(x.sum(axis=1))]))
    full = generate_bank(RandomSpec(seed=1), 2, 32)
    errs = [fit_slm(full.prefix(h), data)[1].train_mse for h in (1, 2, 4, 8, 16, 32)]
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0]
