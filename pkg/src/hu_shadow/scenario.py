"""Scenario files: JSON ingestion, validation and defaulting.

A scenario fully determines one experiment.  All defaults are made
explicit on load, unknown keys are rejected, and a loaded scenario
round-trips losslessly through :func:`scenario_to_dict`.

Rational parameters may be written as strings ("1/3"), which keeps the
exact-arithmetic oracle applicable; plain JSON numbers are accepted too.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigError
from .growth import AnalysisOptions
from .shadowing import ShadowOptions
from .systems import (
    Family,
    MapSystem,
    PolicyKind,
    ResidualPolicy,
    affine_sinusoid,
    index_scaled_linear,
    periodic_linear,
    power_two_parity,
)

_NumberLike = Union[int, float, str]


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass(frozen=True)
class Scenario:
    system: MapSystem
    system_config: dict
    a1: complex
    epsilon: float
    residual: ResidualPolicy
    horizon: int
    analysis: AnalysisOptions
    shadow: ShadowOptions
    output: OutputOptions


def _parse_number(value: Any, where: str):
    """Accept ints, floats and exact-fraction strings like "1/3"."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: cannot parse {value!r} as a number") from exc
    raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")


def _parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{where}: complex values are [re, im] pairs")
        return complex(
            float(_parse_number(value[0], where)), float(_parse_number(value[1], where))
        )
    return complex(float(_parse_number(value, where)))


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _build_system(cfg: dict) -> MapSystem:
    if not isinstance(cfg, dict):
        raise ConfigError("system: expected an object")
    _reject_unknown(
        cfg,
        {"family", "coeffs", "odd_scale", "even_inverse_scale", "base", "even_shift", "slope"},
        "system",
    )
    try:
        family = Family(cfg.get("family", ""))
    except ValueError:
        raise ConfigError(
            f"system.family: unknown family {cfg.get('family')!r}; "
            f"expected one of {[f.value for f in Family]}"
        ) from None
    try:
        if family is Family.PERIODIC_LINEAR:
            coeffs = cfg.get("coeffs")
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError("system.coeffs: expected a nonempty list")
            return periodic_linear(
                tuple(_parse_number(c, "system.coeffs") for c in coeffs)
            )
        if family is Family.INDEX_SCALED_LINEAR:
            return index_scaled_linear(
                _parse_number(cfg.get("odd_scale", 3), "system.odd_scale"),
                _parse_number(cfg.get("even_inverse_scale", 2), "system.even_inverse_scale"),
            )
        if family is Family.POWER_TWO_PARITY:
            return power_two_parity(
                int(cfg.get("base", 2)), int(cfg.get("even_shift", 3))
            )
        return affine_sinusoid(float(_parse_number(cfg.get("slope", 3), "system.slope")))
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _build_policy(cfg: Any) -> ResidualPolicy:
    if cfg is None:
        return ResidualPolicy()
    if not isinstance(cfg, dict):
        raise ConfigError("residual: expected an object")
    _reject_unknown(cfg, {"kind", "theta"}, "residual")
    try:
        kind = PolicyKind(cfg.get("kind", PolicyKind.CONSTANT_REAL.value))
    except ValueError:
        raise ConfigError(
            f"residual.kind: unknown kind {cfg.get('kind')!r}; "
            f"expected one of {[k.value for k in PolicyKind]}"
        ) from None
    theta = float(_parse_number(cfg.get("theta", 0.0), "residual.theta"))
    return ResidualPolicy(kind=kind, theta=theta)


def scenario_from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError("scenario: expected a JSON object")
    _reject_unknown(
        raw,
        {"system", "a1", "epsilon", "residual", "horizon", "analysis", "shadow", "output"},
        "scenario",
    )
    if "system" not in raw:
        raise ConfigError("scenario: missing required key 'system'")
    system_cfg = raw["system"]
    system = _build_system(system_cfg)

    a1 = _parse_complex(raw.get("a1", 1), "a1")
    epsilon = float(_parse_number(raw.get("epsilon", 1e-3), "epsilon"))
    if epsilon < 0:
        raise ConfigError("epsilon: must be nonnegative")
    horizon = raw.get("horizon", 200)
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("horizon: must be a positive integer")

    analysis_cfg = raw.get("analysis", {})
    if not isinstance(analysis_cfg, dict):
        raise ConfigError("analysis: expected an object")
    _reject_unknown(analysis_cfg, {"window", "tol", "max_period"}, "analysis")
    analysis = AnalysisOptions(
        window=int(analysis_cfg.get("window", 32)),
        tol=float(_parse_number(analysis_cfg.get("tol", 1e-4), "analysis.tol")),
        max_period=int(analysis_cfg.get("max_period", 8)),
    )
    if analysis.window < 1 or analysis.tol <= 0 or analysis.max_period < 2:
        raise ConfigError("analysis: window >= 1, tol > 0, max_period >= 2 required")

    shadow_cfg = raw.get("shadow", {})
    if not isinstance(shadow_cfg, dict):
        raise ConfigError("shadow: expected an object")
    _reject_unknown(shadow_cfg, {"tol", "max_iter", "tail_fraction"}, "shadow")
    shadow = ShadowOptions(
        tol=float(_parse_number(shadow_cfg.get("tol", 1e-12), "shadow.tol")),
        max_iter=int(shadow_cfg.get("max_iter", 100)),
        tail_fraction=float(
            _parse_number(shadow_cfg.get("tail_fraction", 1e-3), "shadow.tail_fraction")
        ),
    )
    if shadow.tol <= 0 or shadow.max_iter < 1 or not 0 < shadow.tail_fraction < 1:
        raise ConfigError("shadow: tol > 0, max_iter >= 1, 0 < tail_fraction < 1 required")

    output_cfg = raw.get("output", {})
    if not isinstance(output_cfg, dict):
        raise ConfigError("output: expected an object")
    _reject_unknown(output_cfg, {"directory", "formats"}, "output")
    formats = output_cfg.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or not set(formats) <= {"csv", "json"}:
        raise ConfigError("output.formats: subset of ['csv', 'json'] expected")
    output = OutputOptions(
        directory=str(output_cfg.get("directory", "out")), formats=tuple(formats)
    )

    return Scenario(
        system=system,
        system_config=system_cfg,
        a1=a1,
        epsilon=epsilon,
        residual=_build_policy(raw.get("residual")),
        horizon=horizon,
        analysis=analysis,
        shadow=shadow,
        output=output,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    return scenario_from_dict(raw)


def scenario_to_dict(s: Scenario) -> dict:
    """Fully-defaulted dictionary form (lossless round trip)."""
    return {
        "system": s.system_config,
        "a1": [s.a1.real, s.a1.imag],
        "epsilon": s.epsilon,
        "residual": {"kind": s.residual.kind.value, "theta": s.residual.theta},
        "horizon": s.horizon,
        "analysis": {
            "window": s.analysis.window,
            "tol": s.analysis.tol,
            "max_period": s.analysis.max_period,
        },
        "shadow": {
            "tol": s.shadow.tol,
            "max_iter": s.shadow.max_iter,
            "tail_fraction": s.shadow.tail_fraction,
        },
        "output": {"directory": s.output.directory, "formats": list(s.output.formats)},
    }
