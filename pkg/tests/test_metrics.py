from common.oscillator.model import ParamVector, default_bounds
from common.shared.metrics import ReconstructionMetrics
from identify.objective import ObjectiveConfig, ObjectiveEvaluator, reference_point
from identify.reconstruct import ReconstructionConfig, reconstruct


def test_metrics_summary_tracks_evaluations_and_iterations(noiseless_experiment):
    data = noiseless_experiment
    cfg = ReconstructionConfig(l_max=2, max_evals=30, tol=0.0)
    obj = ObjectiveConfig(cfg.nu0, reference_point(data), default_bounds(), cfg.d_floor)
    metrics = ReconstructionMetrics()

    report = reconstruct(data, ParamVector(0.0, 0.0, 0.0), cfg, obj, metrics=metrics)

    assert metrics.outer_iterations == 4
    assert len(metrics.inner_evaluations) == 4
    # each outer iteration re-evaluates the point it returns
    assert metrics.evaluations == sum(metrics.inner_evaluations) + metrics.outer_iterations
    assert metrics.clamped_evaluations >= 2
    assert metrics.clamp_events["d1"] >= 2
    assert not metrics.failures

    summary = metrics.summary()
    assert report.metrics == summary
    assert summary["evaluations"] == len(metrics.evaluation_durations)
    assert list(summary["clamp_events"]) == sorted(summary["clamp_events"])

    timing = metrics.timing_summary()
    assert timing["total_evaluation_time"] >= 0.0
    assert timing["average_evaluation_time"] <= timing["total_evaluation_time"]


def test_metrics_merge_and_failures(noiseless_experiment):
    data = noiseless_experiment
    obj = ObjectiveConfig(0.1, reference_point(data), default_bounds())
    first, second = ReconstructionMetrics(), ReconstructionMetrics()
    ObjectiveEvaluator(data, obj, metrics=first).evaluate(ParamVector(1.9, -5.0, 100.0))
    ObjectiveEvaluator(data, obj, metrics=second).evaluate(ParamVector(1.9, 20.0, 120.0))
    second.record_failure("SingularAtDrive")

    first.merge(second)

    assert first.evaluations == 2
    assert first.clamped_evaluations == 1
    assert first.clamp_events == {"d1": 1}
    assert first.summary()["failures"] == {"SingularAtDrive": 1}


def test_empty_metrics_timing_is_zero():
    assert ReconstructionMetrics().timing_summary()["average_evaluation_time"] == 0.0
