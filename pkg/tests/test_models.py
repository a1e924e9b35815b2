import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from models import (
    Anchor,
    BrownianDrift,
    CheckReport,
    EcdfBand,
    ExponentSummary,
    FunctionalVariant,
    MCEstimate,
    PathSample,
    Regime,
    Report,
    RngStream,
    RunConfig,
    StopReason,
    TwoSidedExit,
    VariantTag,
    parse_process_spec,
)


def test_parse_process_spec_from_mapping_and_json():
    spec = parse_process_spec({"kind": "brownian_drift", "q": 1, "gamma": 0.5})
    assert spec == BrownianDrift(q=1.0, gamma=0.5)
    assert parse_process_spec(spec.model_dump_json()) == spec


def test_nested_dual_spec():
    spec = parse_process_spec({"kind": "dual_of", "inner": {"kind": "stable_sn", "c": 1, "alpha": 1.5}})
    assert spec.inner.alpha == 1.5
    assert spec.side.value == "spectrally_positive"


def test_bv_rejects_nonpositive_gamma_star():
    with pytest.raises(ValidationError, match="opposite of a subordinator"):
        parse_process_spec({"kind": "bv_drift_cpp", "gamma_star": 0, "jump_rate": 1, "jump_mean": 1})


def test_dual_of_needs_spectrally_negative_inner():
    with pytest.raises(ValidationError):
        parse_process_spec({"kind": "dual_of", "inner": {"kind": "poisson_multiple", "alpha_jump": 1, "rate": 1}})


def test_unknown_spec_field_rejected():
    with pytest.raises(ValidationError):
        parse_process_spec({"kind": "brownian_drift", "q": 1, "gamma": 0.5, "sigma": 2})


@pytest.mark.parametrize("alpha", [1.0, 2.5])
def test_stable_index_range(alpha):
    with pytest.raises(ValidationError):
        parse_process_spec({"kind": "stable_sn", "c": 1, "alpha": alpha})


def test_exponent_summary_orders_indices():
    with pytest.raises(ValidationError):
        ExponentSummary(kappa=0, psi_prime_at_kappa=0, psi_at_kappa_plus_1=1, sigma=2, beta=1.5,
                        regime=Regime.OSCILLATES)


def test_two_sided_exit_ordered():
    with pytest.raises(ValidationError):
        TwoSidedExit(lower=1.0, upper=0.5)


def test_rng_stream_reproducible_and_children_independent():
    stream = RngStream(seed=7, stream_id=3)
    first = stream.generator().random(5)
    assert np.array_equal(first, RngStream(seed=7, stream_id=3).generator().random(5))
    child_a = stream.child(0).generator().random(5)
    child_b = stream.child(1).generator().random(5)
    assert not np.array_equal(child_a, child_b)
    assert not np.array_equal(first, child_a)
    assert stream.child(1).child(2).spawn_key == (1, 2)


def test_variant_parameters():
    assert FunctionalVariant(tag=VariantTag.A_Y, y=2.0).y == 2.0
    with pytest.raises(ValidationError):
        FunctionalVariant(tag=VariantTag.A_Y)
    with pytest.raises(ValidationError):
        FunctionalVariant(tag=VariantTag.I_V_UP, y=1.0)
    with pytest.raises(ValidationError):
        FunctionalVariant(tag=VariantTag.I_V, K=3)


def test_check_report_pass_follows_comparison():
    report = CheckReport.evaluate("ks", 0.3, 0.01, ">", provenance=Anchor.RANDOM_AFFINE_EQUATION)
    assert report.passed
    payload = json.loads(report.model_dump_json(by_alias=True))
    assert payload["pass"] is True
    assert payload["provenance"] == "random_affine_equation"
    with pytest.raises(ValidationError):
        CheckReport(name="bad", statistic=2.0, threshold=1.0, comparison="<=", passed=True,
                    provenance=Anchor.FIRST_MOMENT)


def test_check_report_needs_a_known_anchor():
    with pytest.raises(ValidationError):
        CheckReport(name="free", statistic=0.0, threshold=1.0, passed=True,
                    provenance="moment bound E[I^k] <= k! E[I]^k")
    with pytest.raises(TypeError):
        CheckReport.evaluate("missing", 0.0, 1.0)


def test_infinite_statistic_survives_a_json_round_trip():
    check = CheckReport.evaluate("exponential_moment_stability", math.inf, 0.05,
                                 provenance=Anchor.EXPONENTIAL_MOMENTS)
    report = Report.from_checks("zside", {"seed": 1}, [check])
    assert json.loads(report.to_json())["checks"][0]["statistic"] == "inf"
    restored = Report.model_validate_json(report.to_json())
    assert restored.checks[0].statistic == math.inf
    assert not restored.overall_pass


def test_report_overall_ignores_advisory_checks():
    checks = [CheckReport.evaluate("a", 0.0, 1.0, provenance=Anchor.MOMENT_BOUND),
              CheckReport.evaluate("b", 2.0, 1.0, provenance=Anchor.LOG_CONCAVITY, advisory=True)]
    report = Report.from_checks("demo", {"seed": 1}, checks)
    assert report.overall_pass
    assert Report.model_validate_json(report.to_json()) == report


def test_report_with_error_fails():
    passing = CheckReport.evaluate("a", 0.0, 1.0, provenance=Anchor.SUBADDITIVITY)
    report = Report.from_checks("demo", {}, [passing], error="demo: boom")
    assert not report.overall_pass
    with pytest.raises(ValidationError):
        Report(suite="demo", checks=[CheckReport.evaluate("a", 2.0, 1.0, provenance=Anchor.SUBADDITIVITY)],
               overall_pass=True)


def test_estimate_interval_includes_bias():
    estimate = MCEstimate(mean=1.0, stderr=0.1, n=100, bias_bound=0.05, dt=0.001, variant=VariantTag.I_V_UP)
    assert estimate.interval() == pytest.approx((0.65, 1.35))


def test_run_config_requires_seed_and_forbids_extras():
    with pytest.raises(ValidationError):
        RunConfig()
    with pytest.raises(ValidationError):
        RunConfig(seed=1, colour="blue")
    config = RunConfig(seed=1, workers=4, out_dir="/tmp")
    assert "workers" not in config.echo()
    assert "out_dir" not in config.echo()


def test_ecdf_band():
    band = EcdfBand(sorted_values=np.array([1.0, 2.0, 3.0, 4.0]), n=4, delta=0.05)
    assert band.cdf(2.5) == 0.5
    assert band.cdf(4.0) == 1.0
    assert band.epsilon == pytest.approx(np.sqrt(np.log(40.0) / 8.0))
    assert band.upper(4.0) == 1.0


def test_path_sample_csv(tmp_path):
    path = PathSample(dt=0.5, values=[0.0, 1.0, 0.5], stop_reason=StopReason.HORIZON_REACHED)
    assert path.duration == 1.0
    target = path.to_csv(tmp_path / "path.csv")
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines == ["t,value", "0.0,0.0", "0.5,1.0", "1.0,0.5"]
