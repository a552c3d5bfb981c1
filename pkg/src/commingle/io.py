"""JSON file formats. Counts are JSON integers; times are decimal strings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any

from .errors import InvalidSignalError
from .forward import Observation
from .signal import BlurMixture, PiecewiseSignal, SamplingGrid


def _time(value: Any, what: str) -> float:
    # JSON numbers would already have passed through binary floating point
    if not isinstance(value, str):
        raise InvalidSignalError(f"{what} must be a decimal string, got {value!r}")
    try:
        return float(Decimal(value))
    except InvalidOperation:
        raise InvalidSignalError(f"{what} is not a decimal number: {value!r}") from None


def _counts(values: Any, what: str) -> tuple[int, ...]:
    if not isinstance(values, list):
        raise InvalidSignalError(f"{what} must be a list of integers")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise InvalidSignalError(f"{what} entry {v!r} is not an integer count")
    return tuple(values)


def format_time(x: float) -> str:
    return repr(float(x))


def _load(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSignalError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidSignalError(f"{path}: expected a JSON object")
    return data


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(dump_json(data))


def signal_from_dict(data: dict) -> PiecewiseSignal:
    breaks = data.get("breaks")
    if not isinstance(breaks, list):
        raise InvalidSignalError("signal needs a 'breaks' list")
    return PiecewiseSignal(tuple(_time(b, "break") for b in breaks), _counts(data.get("amps"), "amps"))


def signal_to_dict(signal: PiecewiseSignal) -> dict:
    return {"breaks": [format_time(b) for b in signal.breaks], "amps": list(signal.amps)}


def read_signal(path: str | Path) -> PiecewiseSignal:
    return signal_from_dict(_load(path))


@dataclass(frozen=True)
class ObservationFile:
    """An observation plus the blur metadata it may carry."""

    observation: Observation
    blur: BlurMixture | None = None

    @property
    def sigma_max(self) -> float | None:
        return None if self.blur is None else self.blur.sigma_max


def observation_to_dict(obs: Observation, blur: BlurMixture | None = None) -> dict:
    out: dict[str, Any] = {
        "t0": format_time(obs.grid.t0),
        "T": format_time(obs.grid.T),
        "samples": list(obs.samples),
    }
    if blur is not None:
        out["sigma_max"] = format_time(blur.sigma_max)
        out["blur"] = [[format_time(w), format_time(s)] for w, s in blur.components]
    return out


def observation_from_dict(data: dict) -> ObservationFile:
    samples = _counts(data.get("samples"), "samples")
    if not samples:
        raise InvalidSignalError("observation has no samples")
    T = _time(data["T"], "T") if "T" in data else 1.0
    grid = SamplingGrid(_time(data.get("t0"), "t0"), len(samples), T)
    blur = None
    if "blur" in data:
        blur = BlurMixture(tuple((_time(w, "blur weight"), _time(s, "blur sigma")) for w, s in data["blur"]))
    elif "sigma_max" in data:
        blur = BlurMixture.gaussian(_time(data["sigma_max"], "sigma_max"))
    return ObservationFile(Observation(grid, samples), blur)


def read_observation(path: str | Path) -> ObservationFile:
    return observation_from_dict(_load(path))


def write_observation(path: str | Path, obs: Observation, blur: BlurMixture | None = None) -> None:
    write_json(path, observation_to_dict(obs, blur))
