"""Unit tests for score matching, Langevin sampling and particle sets."""

import numpy as np
import pytest

from mfcgac._autodiff import AdamState, MlpNet
from mfcgac.exceptions import DimensionError, DivergenceError, NonFiniteError, RunIOError
from mfcgac.models import LangevinConfig
from mfcgac.score import (
    EmpiricalMeasure,
    MeanFieldSampler,
    langevin_sample,
    read_particles_csv,
    score_loss_exact,
    score_loss_hutchinson,
    write_particles_csv,
)
from tests.gradcheck import central_difference


def _linear_score(mean: float, std: float) -> MlpNet:
    """A [1, 1] network equal to the score of N(mean, std^2)."""
    net = MlpNet([1, 1])
    net.load_params([-1.0 / std**2, mean / std**2])
    return net


@pytest.mark.unit
class TestEmpiricalMeasure:
    """Test suite for EmpiricalMeasure."""

    def test_statistics(self):
        """Test mean and unbiased variance."""
        meas = EmpiricalMeasure(np.array([1.0, 2.0, 3.0]))
        assert meas.size == 3
        assert meas.mean == pytest.approx(2.0)
        assert meas.variance == pytest.approx(1.0)

    def test_single_particle_variance(self):
        """Test a single particle has zero variance."""
        assert EmpiricalMeasure(np.array([0.4])).variance == 0.0

    def test_invalid_particles(self):
        """Test empty, 2-D and non-finite particle arrays are rejected."""
        with pytest.raises(DimensionError):
            EmpiricalMeasure(np.array([]))
        with pytest.raises(DimensionError):
            EmpiricalMeasure(np.zeros((2, 2)))
        with pytest.raises(NonFiniteError):
            EmpiricalMeasure(np.array([0.0, np.inf]))


@pytest.mark.unit
class TestScoreLoss:
    """Test suite for the score-matching objectives."""

    def test_zero_network_has_zero_loss(self):
        """Test S = 0 gives zero loss."""
        loss, grad = score_loss_exact(MlpNet([1, 4, 1]), np.linspace(-1.0, 1.0, 9))
        assert loss == 0.0
        assert grad.shape == (MlpNet.param_count([1, 4, 1]),)

    def test_linear_score_loss(self):
        """Test the loss of S(x) = w*x + b in closed form."""
        net = MlpNet([1, 1])
        net.load_params([-2.0, 0.5])
        x = np.array([0.0, 1.0])
        loss, _ = score_loss_exact(net, x)
        # mean of w + 0.5 * (w x + b)^2 over x = 0 and x = 1
        assert loss == pytest.approx(-2.0 + 0.5 * (0.25 + 2.25) / 2)

    def test_exact_gradient(self, rng):
        """Test the parameter gradient against finite differences."""
        net = MlpNet([1, 6, 1], rng=rng)
        net.params += 0.1 * rng.standard_normal(net.params.shape[0])
        x = rng.standard_normal(8)
        _, grad = score_loss_exact(net, x)
        numeric = central_difference(lambda: score_loss_exact(net, x)[0], net.params)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-7)

    def test_hutchinson_gradient(self, rng):
        """Test the Hutchinson gradient against finite differences with fixed probes."""
        net = MlpNet([1, 6, 1], rng=rng)
        x = rng.standard_normal(8)
        z = rng.standard_normal(8)
        _, grad = score_loss_hutchinson(net, x, z)
        numeric = central_difference(lambda: score_loss_hutchinson(net, x, z)[0], net.params)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-7)

    def test_hutchinson_with_unit_probes_is_exact(self, rng):
        """Test probes of +-1 reproduce the exact trace in one dimension."""
        net = MlpNet([1, 6, 1], rng=rng)
        x = rng.standard_normal(10)
        z = rng.choice([-1.0, 1.0], size=10)
        exact_loss, exact_grad = score_loss_exact(net, x)
        loss, grad = score_loss_hutchinson(net, x, z)
        assert loss == pytest.approx(exact_loss, rel=1e-12)
        np.testing.assert_allclose(grad, exact_grad, rtol=1e-10, atol=1e-14)

    def test_hutchinson_is_unbiased(self, rng):
        """Test the Hutchinson loss concentrates on the exact loss."""
        net = MlpNet([1, 8, 1], rng=rng)
        n = 400_000
        x = rng.standard_normal(n)
        z = rng.standard_normal(n)
        exact_loss, _ = score_loss_exact(net, x)
        loss, _ = score_loss_hutchinson(net, x, z)
        trace = net.input_derivative(x)[:, 0, 0]
        tolerance = 5.0 * np.sqrt(2.0 * np.mean(trace**2) / n)
        assert abs(loss - exact_loss) <= tolerance

    def test_probe_count_mismatch(self):
        """Test one probe per state is required."""
        with pytest.raises(DimensionError):
            score_loss_hutchinson(MlpNet([1, 2, 1]), np.zeros(4), np.ones(3))


@pytest.mark.unit
class TestLangevin:
    """Test suite for Langevin sampling."""

    def test_zero_step_size_returns_input(self):
        """Test eps = 0 leaves the particles unchanged."""
        init = EmpiricalMeasure(np.array([0.1, -0.2]))
        out = langevin_sample(
            _linear_score(0.0, 1.0),
            LangevinConfig(step_size=0.0, iterations=10),
            init,
            np.random.default_rng(0),
        )
        np.testing.assert_array_equal(out.particles, init.particles)
        assert out.particles is not init.particles

    def test_zero_score_is_pure_diffusion(self):
        """Test S = 0 reduces Langevin to a Gaussian random walk."""
        cfg = LangevinConfig(step_size=0.04, iterations=7)
        init = EmpiricalMeasure(np.linspace(-1.0, 1.0, 5))
        out = langevin_sample(MlpNet([1, 3, 1]), cfg, init, np.random.default_rng(3))

        replay = np.random.default_rng(3)
        expected = init.particles.copy()
        for _ in range(cfg.iterations):
            expected = expected + 0.2 * replay.standard_normal(5)
        np.testing.assert_allclose(out.particles, expected, rtol=1e-12, atol=1e-14)

    def test_stationary_law_of_gaussian_score(self):
        """Test particles settle at the discretized stationary law of an exact score."""
        mean, std, eps = 0.3, 0.5, 0.05
        cfg = LangevinConfig(step_size=eps, iterations=500)
        init = EmpiricalMeasure(np.zeros(20_000))
        out = langevin_sample(_linear_score(mean, std), cfg, init, np.random.default_rng(11))

        # unadjusted Langevin on a Gaussian inflates the variance by 1/(1 - eps/(4 std^2))
        expected_var = std**2 / (1.0 - eps / (4.0 * std**2))
        assert out.mean == pytest.approx(mean, abs=0.05)
        assert out.variance == pytest.approx(expected_var, rel=0.04)

    def test_divergence_detected(self):
        """Test escaping particles raise DivergenceError."""
        net = MlpNet([1, 1])
        net.load_params([0.0, 1e9])
        with pytest.raises(DivergenceError) as exc_info:
            langevin_sample(
                net,
                LangevinConfig(iterations=3),
                EmpiricalMeasure(np.zeros(4)),
                np.random.default_rng(0),
            )
        assert exc_info.value.where == "langevin"


@pytest.mark.unit
class TestMeanFieldSampler:
    """Test suite for MeanFieldSampler."""

    def test_warm_start_continues_from_last_particles(self):
        """Test a warm-started refresh chains on the previous particles."""
        cfg = LangevinConfig(step_size=0.05, iterations=5, warm_start=True)
        net = _linear_score(0.0, 1.0)
        init = EmpiricalMeasure(np.linspace(-1.0, 1.0, 6))
        sampler = MeanFieldSampler(cfg, init)
        sampler.refresh(net, np.random.default_rng(1))
        sampler.refresh(net, np.random.default_rng(2))

        first = langevin_sample(net, cfg, init, np.random.default_rng(1))
        second = langevin_sample(net, cfg, first, np.random.default_rng(2))
        np.testing.assert_array_equal(sampler.measure.particles, second.particles)
        assert sampler.refreshes == 2

    def test_cold_start_restarts_from_initial(self):
        """Test a cold-started refresh always starts from the initial particles."""
        cfg = LangevinConfig(step_size=0.05, iterations=5, warm_start=False)
        net = _linear_score(0.0, 1.0)
        init = EmpiricalMeasure(np.linspace(-1.0, 1.0, 6))
        sampler = MeanFieldSampler(cfg, init)
        sampler.refresh(net, np.random.default_rng(1))
        sampler.refresh(net, np.random.default_rng(2))

        expected = langevin_sample(net, cfg, init, np.random.default_rng(2))
        np.testing.assert_array_equal(sampler.measure.particles, expected.particles)


@pytest.mark.unit
class TestParticleCsv:
    """Test suite for particle files."""

    def test_roundtrip_is_exact(self, tmp_path, rng):
        """Test particles survive a write/read cycle bit for bit."""
        meas = EmpiricalMeasure(rng.standard_normal(50))
        path = tmp_path / "particles.csv"
        write_particles_csv(meas, path)
        assert path.read_text().splitlines()[0] == "x"
        np.testing.assert_array_equal(read_particles_csv(path).particles, meas.particles)

    def test_missing_header(self, tmp_path):
        """Test a CSV without the x header is rejected."""
        path = tmp_path / "bad.csv"
        path.write_text("1.0\n2.0\n")
        with pytest.raises(RunIOError):
            read_particles_csv(path)

    def test_missing_file(self, tmp_path):
        """Test reading a missing file raises RunIOError."""
        with pytest.raises(RunIOError) as exc_info:
            read_particles_csv(tmp_path / "nope.csv")
        assert exc_info.value.path == tmp_path / "nope.csv"


@pytest.mark.unit
@pytest.mark.slow
def test_score_network_learns_gaussian_score(run_slow):
    """Test Adam on the exact score loss recovers a Gaussian's score."""
    rng = np.random.default_rng(5)
    x = 0.3 + 0.5 * rng.standard_normal(5000)
    net = MlpNet([1, 1])
    opt = AdamState.zeros(2)
    for step in range(5000):
        _, grad = score_loss_exact(net, x)
        opt.step(net.params, grad, 0.05 if step < 3000 else 0.005)

    var = float(np.var(x))
    w, b = net.params
    assert w == pytest.approx(-1.0 / var, rel=0.02)
    assert b == pytest.approx(float(np.mean(x)) / var, rel=0.02)


@pytest.fixture(scope="module")
def learned_gaussian_score(run_slow):
    """One-hidden-layer score network fitted to 10^5 draws of N(0.3, 0.5^2)."""
    mean, std = 0.3, 0.5
    rng = np.random.default_rng(17)
    x = mean + std * rng.standard_normal(100_000)
    net = MlpNet([1, 16, 1], rng=rng)
    opt = AdamState.zeros(net.params.shape[0])
    for step in range(4000):
        _, grad = score_loss_exact(net, x)
        opt.step(net.params, grad, 1e-2 if step < 3000 else 1e-3)
    return net, mean, std


@pytest.mark.unit
@pytest.mark.slow
class TestLearnedScore:
    """Test suite for a hidden-layer score network trained on Gaussian draws."""

    def test_recovers_score_within_two_std(self, learned_gaussian_score):
        """Test the sup error against -(x - m)/s^2 on [m - 2s, m + 2s]."""
        net, mean, std = learned_gaussian_score
        grid = np.linspace(mean - 2.0 * std, mean + 2.0 * std, 201)
        exact = -(grid - mean) / std**2
        sup_error = float(np.max(np.abs(net.scalar(grid) - exact)))
        assert sup_error <= 0.1 * float(np.max(np.abs(exact)))

    def test_langevin_reproduces_moments(self, learned_gaussian_score):
        """Test Langevin on the learned score gives mean within 5% and variance within 10%."""
        net, mean, std = learned_gaussian_score
        eps = 0.01
        cfg = LangevinConfig(step_size=eps, iterations=1000)
        init = EmpiricalMeasure(np.random.default_rng(23).standard_normal(20_000))
        out = langevin_sample(net, cfg, init, np.random.default_rng(29))

        expected_var = std**2 / (1.0 - eps / (4.0 * std**2))
        assert abs(out.mean - mean) <= 0.05 * mean
        assert abs(out.variance - expected_var) <= 0.10 * std**2
