import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stqp import (
    BoundKind,
    SizeLimitExceeded,
    SplittingConfig,
    StqpInstance,
    big_m,
    lambda_bounds,
    lb1,
    lb2,
    oracle_solve,
    user_bound,
)

from conftest import random_instance, random_symmetric


class TestLb1:
    def test_positive_diagonal_closed_form(self):
        # gamma0 = 0, harmonic mean of (2, 3): 1/(1/2 + 1/3) = 6/5
        inst = StqpInstance(np.diag([2.0, 3.0]))
        cert = lb1(inst)
        assert cert.value == pytest.approx(1.2, abs=1e-15)
        assert cert.kind == BoundKind.L1

    def test_minimum_on_diagonal_collapses_to_gamma0(self):
        inst = StqpInstance(np.array([[1.0, 2.0], [2.0, 5.0]]))
        assert lb1(inst).value == 1.0

    def test_exact_on_diagonal_matrices(self):
        # for diagonal Q the bound equals the optimum
        inst = StqpInstance(np.diag([1.0, 2.0, 4.0]))
        expected = 1.0 / (1.0 / 1.0 + 1.0 / 2.0 + 1.0 / 4.0)
        assert lb1(inst).value == pytest.approx(expected, abs=1e-15)
        assert oracle_solve(inst).value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_bracketing(self, seed):
        inst = random_instance(6, 300 + seed)
        nu = oracle_solve(inst).value
        gamma0 = float(np.min(inst.q))
        gamma1 = float(np.min(np.diag(inst.q)))
        value = lb1(inst).value
        assert gamma0 - 1e-12 <= value <= nu + 1e-9
        assert nu <= gamma1 + 1e-9

    def test_shift_covariance(self):
        inst = random_instance(5, 17)
        gamma = 0.37
        shifted = StqpInstance(inst.q + gamma, name="s")
        assert lb1(shifted).value == pytest.approx(lb1(inst).value + gamma, abs=1e-10)


class TestLb2:
    def test_kind_and_certificate_shape(self):
        inst = random_instance(4, 5)
        cert = lb2(inst)
        assert cert.kind == BoundKind.L2_CERTIFIED
        assert cert.s_matrix.shape == (4, 4)
        assert cert.n_matrix.shape == (4, 4)
        assert cert.residuals is not None and len(cert.residuals) == 3

    @pytest.mark.parametrize("seed", range(6))
    def test_certificate_identity(self, seed):
        inst = random_instance(5, 600 + seed)
        cert = lb2(inst)
        scale = 1.0 + float(np.max(np.abs(inst.q)))
        # Q - value*E splits exactly into the stored psd + nonnegative parts
        recon = cert.s_matrix + cert.n_matrix
        assert float(np.max(np.abs(inst.q - cert.value - recon))) <= 1e-10 * scale
        assert float(np.min(cert.n_matrix)) >= 0.0
        eigs = np.linalg.eigvalsh(cert.s_matrix)
        assert float(eigs.min()) >= -1e-8 * scale

    @pytest.mark.parametrize("seed", range(6))
    def test_sound_and_at_least_lb1(self, seed):
        inst = random_instance(6, 700 + seed)
        nu = oracle_solve(inst).value
        c2 = lb2(inst)
        c1 = lb1(inst)
        assert c2.value <= nu + 1e-8
        assert c1.value <= c2.value + c2.residuals[2] + 1e-9

    @pytest.mark.parametrize("n", [2, 5, 10])
    def test_identity_matrices_tight(self, n):
        cert = lb2(StqpInstance(np.eye(n)))
        assert cert.value == pytest.approx(1.0 / n, abs=1e-4)

    def test_size_limit(self):
        inst = StqpInstance(np.eye(301))
        with pytest.raises(SizeLimitExceeded):
            lb2(inst)
        cert = lb2(inst, SplittingConfig(allow_large=True, max_iter=50, search_iters=5))
        assert cert.value <= 1.0 / 301 + 1e-8

    def test_seconds_recorded(self):
        cert = lb2(random_instance(4, 9))
        assert cert.seconds >= 0.0


class TestBigM:
    def test_formula(self):
        q = np.array([[1.0, 3.0], [3.0, 2.0]])
        cert = user_bound(0.5)
        vec = big_m(StqpInstance(q), cert)
        np.testing.assert_allclose(vec.m, np.array([2.5, 2.5]))
        assert vec.lower_bound == 0.5

    def test_tighter_bound_shrinks_m(self):
        inst = random_instance(5, 23)
        loose = big_m(inst, user_bound(-2.0))
        tight = big_m(inst, user_bound(-1.0))
        assert np.all(tight.m <= loose.m)


class TestLambdaBounds:
    def test_interval(self):
        q = np.array([[2.0, 0.0], [0.0, 3.0]])
        lo, hi = lambda_bounds(StqpInstance(q), user_bound(0.25))
        assert (lo, hi) == (0.25, 2.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10_000))
def test_lb2_certificate_always_valid(n, seed):
    """The certified value never exceeds the optimum, converged or not."""
    inst = random_instance(n, seed)
    cert = lb2(inst, SplittingConfig(max_iter=200, refine_iters=40, search_iters=12))
    nu = oracle_solve(inst).value
    assert cert.value <= nu + 1e-8
    assert float(np.min(cert.n_matrix)) >= 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000), st.floats(-3, 3, allow_nan=False))
def test_lb1_shift_property(n, seed, gamma):
    inst = random_instance(n, seed)
    shifted = StqpInstance(inst.q + gamma, name="s")
    assert lb1(shifted).value == pytest.approx(lb1(inst).value + gamma, abs=1e-8)
