"""
Deviation metric and the regularized objective.
"""
import numpy as np
import pytest

from common.experiment.io import References
from common.experiment.synthetic import SyntheticTruth, truth_scaling
from common.oscillator.model import ParamVector, default_bounds
from common.shared.errors import ZeroLabAmplitude
from common.shared.metrics import ReconstructionMetrics
from identify.objective import (
    ObjectiveConfig,
    ObjectiveEvaluator,
    clamp_damping,
    deviation_vector,
    model_scaling,
    noise_misfit,
    objective,
    reference_point,
    relative_deviation,
    simulated_peaks,
)

TRUTH = SyntheticTruth(noise_floor=0.0)


@pytest.mark.parametrize("z_sim, z_lab, expected", [(5.0, 5.0, 0.0), (2.0, 1.0, 1.0), (0.5, 1.0, 0.5)])
def test_relative_deviation(z_sim, z_lab, expected):
    assert relative_deviation(z_sim, z_lab) == expected


def test_relative_deviation_needs_positive_lab_value():
    with pytest.raises(ZeroLabAmplitude):
        relative_deviation(1.0, 0.0)


def test_deviation_vanishes_at_truth(noiseless_experiment):
    p = TRUTH.param_vector
    chi = model_scaling(p, noiseless_experiment)
    deviations = deviation_vector(p, chi, noiseless_experiment)
    assert deviations.shape == (2 * noiseless_experiment.n_c,)
    assert np.all(deviations < 1e-9)


def test_model_scaling_at_truth_equals_generator_scaling(noiseless_experiment):
    data = noiseless_experiment
    chi_true = truth_scaling(TRUTH, data.frf.frequencies, data.frf_hybrid, data.channel)
    assert model_scaling(TRUTH.param_vector, data) == pytest.approx(chi_true, rel=1e-12)


def test_doubling_chi_matches_direct_recomputation(eta_plus_experiment):
    data = eta_plus_experiment
    p = ParamVector(1.8, 30.0, 90.0)
    chi = model_scaling(p, data)
    doubled = deviation_vector(p, 2 * chi, data)
    lab = data.lab_peaks.reshape(-1)
    sim = simulated_peaks(p, data).reshape(-1)
    np.testing.assert_allclose(doubled, np.abs(2 * chi * sim - lab) / lab, rtol=1e-12)


def test_deviation_order_follows_pair_permutation(eta_plus_experiment):
    p = ParamVector(1.8, 30.0, 90.0)
    chi = model_scaling(p, eta_plus_experiment)
    order = [2, 0, 4, 1, 3]
    base = deviation_vector(p, chi, eta_plus_experiment).reshape(-1, 2)
    permuted = deviation_vector(p, chi, eta_plus_experiment.reordered(order)).reshape(-1, 2)
    np.testing.assert_allclose(permuted, base[order], rtol=1e-12)


def test_regularizer_vanishes_at_reference(eta_plus_experiment):
    p_ref = reference_point(eta_plus_experiment)
    values = [
        objective(p_ref, eta_plus_experiment, ObjectiveConfig(nu, p_ref, default_bounds()))
        for nu in (0.0, 0.1, 1e6)
    ]
    assert values[0] == values[1] == values[2]


def test_objective_at_truth_is_bounded_by_regularizer(noiseless_experiment):
    p_ref = reference_point(noiseless_experiment, References(theta=1.9))
    cfg = ObjectiveConfig(0.1, p_ref, default_bounds())
    p = TRUTH.param_vector
    offset = p.as_array() - p_ref.as_array()
    assert objective(p, noiseless_experiment, cfg) <= 0.05 * float(offset @ offset) + 1e-8


def test_reference_point_defaults(eta_plus_experiment):
    p_ref = reference_point(eta_plus_experiment)
    assert p_ref.theta == pytest.approx(np.pi / 2 + np.pi / 8)
    assert (p_ref.d1, p_ref.d2) == pytest.approx((20.0, 120.0), rel=1e-12)
    custom = reference_point(eta_plus_experiment, References(theta=1.0, d1=5.0))
    assert (custom.theta, custom.d1) == (1.0, 5.0)
    assert custom.d2 == pytest.approx(120.0, rel=1e-12)


def test_zero_guess_is_clamped_and_recorded(eta_plus_experiment):
    p_ref = reference_point(eta_plus_experiment)
    metrics = ReconstructionMetrics()
    evaluator = ObjectiveEvaluator(
        eta_plus_experiment, ObjectiveConfig(0.1, p_ref, default_bounds()), metrics=metrics
    )
    evaluation = evaluator.evaluate(ParamVector(0.0, 0.0, 0.0))
    assert evaluation.clamped == ("d1", "d2")
    assert np.isfinite(evaluation.total)
    assert metrics.clamped_evaluations == 1
    assert metrics.clamp_events == {"d1": 1, "d2": 1}
    offset = p_ref.as_array()
    assert evaluation.regularization == pytest.approx(0.05 * float(offset @ offset))


def test_clamp_damping_leaves_valid_values():
    p = ParamVector(1.0, 2.0, 3.0)
    assert clamp_damping(p, 1e-6) == (p, ())
    clamped, names = clamp_damping(ParamVector(1.0, -5.0, 3.0), 1e-6)
    assert names == ("d1",)
    assert clamped.d1 == 1e-6 and clamped.d2 == 3.0


def test_objective_config_validation(eta_plus_experiment):
    p_ref = reference_point(eta_plus_experiment)
    with pytest.raises(ValueError):
        ObjectiveConfig(-1.0, p_ref, default_bounds())
    with pytest.raises(ValueError):
        ObjectiveConfig(0.1, ParamVector(10.0, 0.0, 0.0), default_bounds())


def test_noise_misfit_sums_half_floor_over_lab_peaks(eta_plus_experiment, noiseless_experiment):
    data = eta_plus_experiment
    expected = float(np.sum(0.5 * data.xi / data.lab_peaks))
    assert noise_misfit(data) == pytest.approx(expected, rel=1e-12)
    assert noise_misfit(data) > 0
    assert noise_misfit(noiseless_experiment) == 0.0
