"""Unit tests for the dense networks and the Adam optimizer."""

import numpy as np
import pytest

from mfcgac._autodiff import STD_FLOOR, AdamState, MlpNet, adam_step
from mfcgac.exceptions import ConfigError, DimensionError, NonFiniteError
from tests.gradcheck import central_difference


@pytest.fixture
def net(rng):
    """Small scalar network with random weights and biases."""
    n = MlpNet([1, 6, 1], rng=rng)
    n.params += 0.1 * rng.standard_normal(n.params.shape[0])
    return n


@pytest.mark.unit
class TestMlpNet:
    """Test suite for MlpNet construction and evaluation."""

    def test_param_count(self):
        """Test parameter count is the sum of (in + 1) * out."""
        assert MlpNet.param_count([1, 128, 1]) == 385
        assert MlpNet([2, 3, 4]).params.shape == (3 * 3 + 4 * 4,)

    def test_glorot_initialization(self, rng):
        """Test weights lie within the Glorot bound and biases start at zero."""
        n = MlpNet([1, 5, 1], rng=rng)
        w0, b0 = n.params[:5], n.params[5:10]
        w1, b1 = n.params[10:15], n.params[15:]
        assert np.all(np.abs(w0) <= np.sqrt(6.0 / 6.0))
        assert np.all(np.abs(w1) <= np.sqrt(6.0 / 6.0))
        assert np.all(b0 == 0.0)
        assert np.all(b1 == 0.0)
        assert np.any(w0 != 0.0)

    def test_zero_network_outputs_zero(self):
        """Test a network without an rng starts at zero."""
        n = MlpNet([1, 4, 1])
        np.testing.assert_array_equal(n.scalar(np.array([-1.0, 0.0, 2.0])), np.zeros(3))

    def test_shapes(self, net):
        """Test forward and scalar output shapes."""
        assert net.forward(np.zeros(7)).shape == (7, 1)
        assert net.scalar(np.zeros(7)).shape == (7,)
        assert net.scalar(0.5).shape == (1,)

    def test_softplus_floor(self):
        """Test the softplus head never drops below the floor."""
        n = MlpNet([1, 3, 1], head="softplus")
        n.params[-1] = -50.0
        np.testing.assert_array_equal(n.scalar(np.array([0.0, 1.0])), np.full(2, STD_FLOOR))
        n.params[-1] = 0.0
        assert n.scalar(0.0)[0] == pytest.approx(np.log(2.0))

    def test_tanh_output_is_bounded(self, rng):
        """Test a tanh output layer maps into (-1, 1)."""
        n = MlpNet([1, 8], output_activation="tanh", rng=rng)
        out = n.forward(np.linspace(-100.0, 100.0, 11))
        assert out.shape == (11, 8)
        assert np.all(np.abs(out) <= 1.0)

    def test_invalid_sizes(self):
        """Test invalid layer sizes are rejected."""
        with pytest.raises(ConfigError):
            MlpNet([3])
        with pytest.raises(ConfigError):
            MlpNet([1, 0, 1])
        with pytest.raises(ConfigError):
            MlpNet([1, 4, 2], head="softplus")

    def test_wrong_input_dimension(self):
        """Test inputs of the wrong width raise DimensionError."""
        n = MlpNet([2, 3, 1])
        with pytest.raises(DimensionError):
            n.forward(np.zeros((4, 3)))
        with pytest.raises(DimensionError):
            n.forward(1.0)

    def test_non_finite_input(self, net):
        """Test NaN inputs raise NonFiniteError."""
        with pytest.raises(NonFiniteError):
            net.forward(np.array([0.0, np.nan]))

    def test_wrong_upstream_length(self, net):
        """Test an upstream gradient of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError):
            net.param_grad(np.zeros(3), np.ones(2))
        with pytest.raises(DimensionError):
            net.backward(np.zeros(3), np.ones((3, 2)))
        assert net.param_grad(np.zeros(3), 1.0).shape == net.params.shape

    def test_copy_is_independent(self, net):
        """Test copies do not share parameters."""
        clone = net.copy()
        np.testing.assert_array_equal(clone.params, net.params)
        clone.params[0] += 1.0
        assert clone.params[0] != net.params[0]

    def test_load_params_checks_length(self, net):
        """Test load_params rejects the wrong number of values."""
        with pytest.raises(DimensionError):
            net.load_params(np.zeros(3))

    def test_checkpoint_restores_network_and_optimizer(self, net):
        """Test a checkpoint rebuilds the same network and Adam state."""
        opt = AdamState.zeros(net.params.shape[0])
        opt.step(net.params, np.ones_like(net.params), 1e-3)
        restored, restored_opt = MlpNet.from_checkpoint(net.to_checkpoint(opt))
        np.testing.assert_array_equal(restored.params, net.params)
        assert restored.sizes == net.sizes
        assert restored_opt is not None
        assert restored_opt.t == 1
        np.testing.assert_array_equal(restored_opt.m, opt.m)


@pytest.mark.unit
class TestGradients:
    """Finite-difference checks of every derivative the networks provide."""

    def test_param_grad(self, net, rng):
        """Test reverse-mode parameter gradients."""
        x = rng.standard_normal(5)
        up = rng.standard_normal(5)
        grad = net.param_grad(x, up)
        numeric = central_difference(lambda: float(np.sum(up * net.scalar(x))), net.params)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)

    def test_input_grad_from_backward(self, rng):
        """Test backward also returns the gradient w.r.t. the inputs."""
        n = MlpNet([3, 5, 2], rng=rng)
        x = rng.standard_normal((4, 3))
        up = rng.standard_normal((4, 2))
        _, g_in = n.backward(x, up)
        flat = x.ravel()

        def f() -> float:
            return float(np.sum(up * n.forward(flat.reshape(4, 3))))

        numeric = central_difference(f, flat).reshape(4, 3)
        np.testing.assert_allclose(g_in, numeric, rtol=1e-5, atol=1e-8)

    def test_input_derivative(self, rng):
        """Test the forward-mode Jacobian against finite differences."""
        n = MlpNet([2, 7, 3], rng=rng)
        x = rng.standard_normal((3, 2))
        jac = n.input_derivative(x)
        assert jac.shape == (3, 2, 3)
        h = 1e-6
        for i in range(2):
            step = np.zeros(2)
            step[i] = h
            numeric = (n.forward(x + step) - n.forward(x - step)) / (2 * h)
            np.testing.assert_allclose(jac[:, i, :], numeric, rtol=1e-5, atol=1e-8)

    def test_divergence_gradient_scalar(self, net, rng):
        """Test the parameter gradient of the summed divergence."""
        x = rng.standard_normal(6)
        trace, _, grad = net.divergence_backward(x)
        np.testing.assert_allclose(trace, net.input_derivative(x)[:, 0, 0], rtol=1e-12, atol=1e-13)

        numeric = central_difference(
            lambda: float(np.sum(net.input_derivative(x)[:, 0, 0])), net.params
        )
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-7)

    def test_divergence_gradient_vector_field(self, rng):
        """Test the exact trace and its gradient for a 2-D vector field."""
        n = MlpNet([2, 5, 2], rng=rng)
        n.params += 0.1 * rng.standard_normal(n.params.shape[0])
        x = rng.standard_normal((4, 2))
        trace, _, grad = n.divergence_backward(x)
        jac = n.input_derivative(x)
        np.testing.assert_allclose(trace, jac[:, 0, 0] + jac[:, 1, 1], rtol=1e-12, atol=1e-13)

        def total_trace() -> float:
            j = n.input_derivative(x)
            return float(np.sum(j[:, 0, 0] + j[:, 1, 1]))

        numeric = central_difference(total_trace, n.params)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-7)

    def test_quadratic_form_direction(self, rng):
        """Test z^T J z and its gradient for random probe directions."""
        n = MlpNet([2, 5, 2], rng=rng)
        x = rng.standard_normal((3, 2))
        z = rng.standard_normal((3, 2))
        q, _, grad = n.divergence_backward(x, z)
        jac = n.input_derivative(x)
        np.testing.assert_allclose(q, np.einsum("ni,nij,nj->n", z, jac, z), rtol=1e-12, atol=1e-13)

        def total() -> float:
            return float(np.sum(np.einsum("ni,nij,nj->n", z, n.input_derivative(x), z)))

        numeric = central_difference(total, n.params)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-7)
        np.testing.assert_allclose(n.param_grad_of_input_derivative(x, z), grad, rtol=1e-12, atol=1e-13)

    def test_divergence_with_value_term(self, net, rng):
        """Test the upstream value term is added to the divergence gradient."""
        x = rng.standard_normal(4)
        up = rng.standard_normal(4)
        _, outputs, grad = net.divergence_backward(x, upstream=up)
        _, _, grad_trace = net.divergence_backward(x)
        np.testing.assert_allclose(grad, grad_trace + net.param_grad(x, up), rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(outputs, net.forward(x), rtol=1e-12, atol=1e-13)


@pytest.mark.unit
class TestAdam:
    """Test suite for AdamState."""

    def test_first_step(self):
        """Test the bias-corrected first step moves by lr along -sign(grad)."""
        params = np.array([1.0])
        state = AdamState.zeros(1)
        state.step(params, np.array([0.5]), 0.1)
        assert params[0] == pytest.approx(0.9, abs=1e-7)
        assert state.t == 1
        assert state.m[0] == pytest.approx(0.05)
        assert state.v[0] == pytest.approx(0.00025)

    def test_zero_gradient_only_counts(self):
        """Test an all-zero gradient leaves parameters and moments untouched."""
        params = np.array([1.0, -2.0])
        state = AdamState.zeros(2)
        state.step(params, np.array([0.3, 0.1]), 0.01)
        before, m, v = params.copy(), state.m.copy(), state.v.copy()
        state.step(params, np.zeros(2), 0.01)
        np.testing.assert_array_equal(params, before)
        np.testing.assert_array_equal(state.m, m)
        np.testing.assert_array_equal(state.v, v)
        assert state.t == 2

    def test_zero_learning_rate_freezes(self):
        """Test lr = 0 keeps parameters fixed."""
        params = np.array([0.25, 0.5])
        adam_step(params, np.array([1.0, -1.0]), AdamState.zeros(2), 0.0)
        np.testing.assert_array_equal(params, [0.25, 0.5])

    def test_negative_learning_rate(self):
        """Test a negative learning rate is a configuration error."""
        with pytest.raises(ConfigError):
            AdamState.zeros(1).step(np.zeros(1), np.ones(1), -1e-3)

    def test_length_mismatch(self):
        """Test mismatched lengths raise DimensionError."""
        with pytest.raises(DimensionError):
            AdamState.zeros(2).step(np.zeros(2), np.ones(3), 1e-3)

    def test_non_finite_gradient_leaves_state(self):
        """Test a NaN gradient raises and modifies nothing."""
        params = np.array([1.0, 2.0])
        state = AdamState.zeros(2)
        with pytest.raises(NonFiniteError):
            state.step(params, np.array([np.nan, 1.0]), 0.1)
        np.testing.assert_array_equal(params, [1.0, 2.0])
        assert state.t == 0
