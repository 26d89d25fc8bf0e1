import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracreg import kernels
from fracreg.kernels import (DiagonalEvaluationError, KernelCoefficient,
                             eval_kernel, verify_kernel_class)


def test_constant_kernel_identity():
    k = kernels.constant_kernel()
    assert eval_kernel(k, [0.3], [2.5]) == 1.0
    assert eval_kernel(k, [-1.0], [4.0]) == 1.0


def test_diagonal_evaluation_rejected():
    k = kernels.constant_kernel()
    with pytest.raises(DiagonalEvaluationError):
        eval_kernel(k, [1.5], [1.5])


def test_sign_profile_kernel_bounds_on_random_pairs():
    # a(z) = 1 + sign(sin(|z|))/2 stays inside [1/2, 2] = [1/lambda, lambda]
    def profile(z):
        r = np.sqrt(np.sum(z ** 2, axis=-1))
        return 1.0 + 0.5 * np.sign(np.sin(r))

    k = KernelCoefficient.translation_invariant(profile, lam=2.0)
    rng = np.random.default_rng(0)
    x = rng.uniform(-8, 8, size=(10_000, 1))
    y = rng.uniform(-8, 8, size=(10_000, 1))
    vals = k.pair_values(x, y)
    assert np.all(vals >= 0.5) and np.all(vals <= 2.0)


def test_checkerboard_symmetric_and_bounded():
    k = kernels.checkerboard_kernel()
    rng = np.random.default_rng(1)
    x = rng.uniform(-5, 5, size=(2000, 2))
    y = rng.uniform(-5, 5, size=(2000, 2))
    axy = k.pair_values(x, y)
    ayx = k.pair_values(y, x)
    assert np.array_equal(axy, ayx)
    assert np.all(axy >= 0.5) and np.all(axy <= 2.0)


def test_translation_invariance_exact_under_lattice_shift():
    k = kernels.rough_kernel(lam=2.0, seed=4, cell=0.5, extent=30.0, dim=1)
    rng = np.random.default_rng(2)
    x = rng.uniform(-4, 4, size=(500, 1))
    y = rng.uniform(-4, 4, size=(500, 1))
    for t in (0.25, -1.5, 3.0):
        assert np.array_equal(k.pair_values(x + t, y + t), k.pair_values(x, y))


def test_rough_profile_even():
    k = kernels.rough_kernel(lam=3.0, seed=9, cell=0.5, extent=10.0, dim=2)
    rng = np.random.default_rng(3)
    z = rng.uniform(-6, 6, size=(1000, 2))
    assert np.array_equal(k.profile_at(z), k.profile_at(-z))


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(min_value=1.0, max_value=10.0),
       seed=st.integers(min_value=0, max_value=1000))
def test_rough_kernel_respects_band(lam, seed):
    k = kernels.rough_kernel(lam=lam, seed=seed, cell=0.5, extent=8.0, dim=1)
    z = np.linspace(-10, 10, 801).reshape(-1, 1)
    vals = k.profile_at(z)
    assert np.all(vals >= 1.0 / lam - 1e-12)
    assert np.all(vals <= lam + 1e-12)


def test_verify_kernel_class_constant_all_clean():
    rep = verify_kernel_class(kernels.constant_kernel(), 512, dim=1)
    assert rep.bounds_ok and rep.symmetry_ok and rep.translation_ok
    assert rep.max_symmetry_violation == 0.0
    assert rep.max_lower_violation == 0.0


def test_verify_kernel_class_flags_asymmetry():
    # deliberately broken kernel, bypassing the symmetrizing constructor
    k = KernelCoefficient(lam=4.0, kind=kernels.GENERAL,
                          evaluator=lambda x, y: 1.0 + x[..., 0])
    rep = verify_kernel_class(k, 256, extent=2.0, dim=1)
    assert not rep.symmetry_ok
    assert rep.max_symmetry_violation > 0.0


def test_verify_kernel_class_rough_lambda4():
    k = kernels.rough_kernel(lam=4.0, seed=123, cell=0.5, extent=20.0, dim=1)
    rep = verify_kernel_class(k, 1024, dim=1)
    assert rep.bounds_ok and rep.symmetry_ok and rep.translation_ok


def test_verify_kernel_class_rejects_bad_count():
    with pytest.raises(kernels.KernelError):
        verify_kernel_class(kernels.constant_kernel(), 0)


def test_general_kernel_symmetrized_at_load():
    k = KernelCoefficient.general(lambda x, y: 1.0 + x[..., 0], lam=4.0)
    x = np.array([[0.5]])
    y = np.array([[2.0]])
    assert k.pair_values(x, y) == k.pair_values(y, x)


def test_data_kernel_bound_and_symmetry():
    dk = kernels.rough_data_kernel(big_lambda=1.5, m=3, seed=5, cell=0.5,
                                   extent=10.0, dim=1)
    rng = np.random.default_rng(7)
    z = rng.uniform(-8, 8, size=(2000, 1))
    total = np.zeros(z.shape[0])
    for i in range(dk.m):
        comp = dk.component(i)
        vals = comp.profile_at(z)
        assert np.array_equal(vals, comp.profile_at(-z))
        total += np.abs(vals)
    assert np.all(total <= dk.big_lambda + 1e-12)


def test_kernel_validation_errors():
    with pytest.raises(kernels.KernelError):
        KernelCoefficient.translation_invariant(lambda z: z, lam=0.5)
    with pytest.raises(kernels.KernelError):
        KernelCoefficient(lam=2.0, kind="weird")
