"""
Command handlers for the CLI: configuration loading and one handler per subcommand.
Handlers print their result on stdout and return an exit code.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from exceptions import ConfigError, DomainError, EstimationError, LevyToolkitError, UnsupportedError
from models import (
    BVDriftCPP,
    DualOf,
    FunctionalVariant,
    Horizon,
    LevelUp,
    PoissonMultiple,
    RngStream,
    RunConfig,
    Side,
)
from services import (
    PathSimulator,
    empirical_cdf,
    estimate,
    get_model,
    predict_left_tail_log,
    predict_poisson_tail,
    sample_batch,
    verify_suite,
    write_tail_curve_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

PATH_KINDS = ("v", "v_sharp", "v_up", "z", "z_up")


# Configuration

def _line_of(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """Line of the first occurrence of the innermost key of a validation location"""
    keys = [str(part) for part in loc if isinstance(part, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _validation_error(exc: ValidationError, text: str) -> ConfigError:
    first = exc.errors()[0]
    loc = tuple(first.get("loc", ()))
    path = ".".join(str(part) for part in loc)
    return ConfigError(first.get("msg", "invalid configuration"), path=path, line=_line_of(text, loc))


def _parse_json(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError("the configuration must be a JSON object", line=1)
    return data


def parse_config(text: str) -> RunConfig:
    """
    Validate a JSON configuration document.

    Args:
        text: JSON object with the RunConfig fields

    Returns:
        RunConfig

    Raises:
        ConfigError: malformed JSON, unknown keys or invalid values, with line and path
    """
    data = _parse_json(text)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc, text) from exc


def load_run_config(config_path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """Configuration file (if any) with command-line values applied on top"""
    text = "{}"
    if config_path:
        try:
            text = Path(config_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read configuration: {exc.strerror}", path=config_path) from exc
    data = _parse_json(text)
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc, text) from exc


def _require_process(config: RunConfig):
    if config.process is None:
        raise ConfigError("this command needs a process", path="process")
    return config.process


def _print_json(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _output_path(config: RunConfig, name: str) -> Path:
    directory = Path(config.out_dir)
    os.makedirs(directory, exist_ok=True)
    return directory / name


# Handlers

def handle_exponent(config: RunConfig) -> int:
    """Ψ and Ψ♯ on the λ grid, Φ and φ_V on the x grid, plus the exponent summary"""
    spec = _require_process(config)
    model = get_model(spec)
    lambdas = list(config.lambda_grid)
    xs = list(config.x_grid)
    payload: Dict[str, Any] = {"kind": spec.kind, "lambda": lambdas,
                               "psi": [model.psi(lam) for lam in lambdas]}
    if isinstance(spec, PoissonMultiple):
        payload["summary"] = None
    else:
        payload["summary"] = model.exponent_summary().model_dump(mode="json")
        payload["psi_conditioned"] = [model.psi_conditioned(lam) for lam in lambdas]
        payload["x"] = xs
        payload["inverse_exponent"] = [model.inverse_exponent(x) for x in xs]
        if spec.side == Side.SPECTRALLY_NEGATIVE:
            payload["phi_v"] = [model.phi_v(x) for x in xs]
    _print_json(payload)
    return EXIT_OK


def handle_scale(config: RunConfig) -> int:
    spec = _require_process(config)
    model = get_model(spec)
    xs = list(config.x_grid)
    if not xs:
        raise ConfigError("scale needs at least one --x value", path="x_grid")
    _print_json({"kind": spec.kind, "x": xs,
                 "scale_w": [model.scale_w(x) for x in xs],
                 "scale_w_conditioned": [model.scale_w_conditioned(x) for x in xs]})
    return EXIT_OK


def handle_simulate(config: RunConfig, path_kind: str) -> int:
    """Simulate one path of the requested kind and write it as `t,value` CSV"""
    spec = _require_process(config)
    if path_kind not in PATH_KINDS:
        raise DomainError(f"unknown path kind '{path_kind}'")
    simulator = PathSimulator(spec, config.dt)
    stream = RngStream(seed=config.seed, stream_id=0)
    rule = Horizon(T=config.horizon) if config.horizon is not None else LevelUp(y=config.y)
    negative = path_kind in ("v", "v_sharp", "v_up")
    if negative != (spec.side == Side.SPECTRALLY_NEGATIVE):
        raise DomainError(f"path kind '{path_kind}' does not match a {spec.side.value} spec")

    if path_kind in ("v", "z"):
        path = simulator.simulate_until(0.0, rule, stream)
    elif path_kind == "v_sharp":
        path = simulator.simulate_v_sharp(rule, stream)
    elif path_kind == "v_up":
        path = simulator.simulate_v_up(LevelUp(y=config.y), stream, algo=config.v_up_algo)
    else:
        path = simulator.simulate_z_up(rule, stream)

    target = path.to_csv(_output_path(config, f"path_{path_kind}_seed{config.seed}.csv"))
    logger.info(f"✅ Wrote {len(path)} grid points to {target}")
    print(target)
    return EXIT_OK


def _require_variant(config: RunConfig) -> FunctionalVariant:
    if config.variant is None:
        raise ConfigError("this command needs a functional variant", path="variant")
    return config.variant


def handle_estimate(config: RunConfig) -> int:
    spec = _require_process(config)
    variant = _require_variant(config)
    try:
        result = estimate(spec, variant, config.y, config.dt, config.n, config.seed,
                          config.workers, config.v_up_algo)
    except EstimationError as exc:
        logger.error(f"❌ Estimation aborted after {exc.completed} draws: {exc.message}")
        if exc.partial is not None and hasattr(exc.partial, "model_dump_json"):
            print(exc.partial.model_dump_json(indent=2))
        return EXIT_FAILURE
    print(result.model_dump_json(indent=2))
    return EXIT_OK


def _prediction(spec, x: float) -> float:
    """Leading-order P(I ≤ x) from the left-tail asymptotics"""
    if isinstance(spec, PoissonMultiple):
        return math.exp(-predict_poisson_tail(spec.alpha_jump, x)) if x < 1 else math.nan
    if isinstance(spec, BVDriftCPP):
        raise UnsupportedError("bounded-variation V has a support edge, not a left-tail law")
    if isinstance(spec, DualOf):
        raise UnsupportedError("left-tail predictions cover spectrally negative specs and poisson_multiple")
    return math.exp(predict_left_tail_log(spec, x))


def handle_predict(config: RunConfig) -> int:
    """Prediction curve `x,ecdf,dkw_lo,dkw_hi,prediction`; ECDF columns when a variant is configured"""
    spec = _require_process(config)
    xs = list(config.x_grid) or list(np.round(np.linspace(0.05, 1.0, 20), 12))
    prediction = [_prediction(spec, x) for x in xs]
    band = None
    if config.variant is not None:
        samples = sample_batch(spec, config.variant, config.y, config.dt, config.n, config.seed,
                               config.workers, v_up_algo=config.v_up_algo)
        band = empirical_cdf(samples, config.overrides.dkw_delta)
    target = write_tail_curve_csv(_output_path(config, f"prediction_{spec.kind}_seed{config.seed}.csv"),
                                  xs, band, prediction)
    print(target)
    return EXIT_OK


def handle_verify(config: RunConfig, suite: str, timing: bool = False) -> int:
    report = verify_suite(suite, config, timing=timing)
    text = report.to_json()
    target = _output_path(config, f"report_{suite}.json")
    target.write_text(text + "\n", encoding="utf-8")
    print(text)
    if report.error is not None:
        logger.error(f"❌ Suite '{suite}' stopped: {report.error}")
    return EXIT_OK if report.overall_pass else EXIT_FAILURE


def exit_code_for(exc: LevyToolkitError) -> int:
    """Usage, configuration and domain errors map to 2; runtime failures to 1"""
    if isinstance(exc, (ConfigError, DomainError, UnsupportedError)):
        return EXIT_USAGE
    return EXIT_FAILURE
