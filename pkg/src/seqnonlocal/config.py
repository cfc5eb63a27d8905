"""Scenario files.

A scenario is a TOML document::

    scenario_id = "ghz-mermin-2"

    [state]
    kind = "GHZ"            # GHZ | W | custom (custom needs matrix_real / matrix_imag, 8x8)

    [alice]
    theta0 = "pi*0.5"       # radians, a number or "pi*<number>"
    phi0 = "pi*0.5"
    theta1 = "pi*0.5"
    phi1 = 0.0

    [bob]                   # same keys as [alice]

    [[charlie]]             # one table per Charlie, in measurement order
    theta0 = "pi*0.5"
    phi0 = "pi*0.5"
    theta1 = "pi*0.5"
    phi1 = 0
    sharpness = 0.525
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .measure import BlochDirection, Sharpness
from .protocol import Charlie, InitialState, PartySettings, ScenarioConfig

ANGLE_KEYS = ("theta0", "phi0", "theta1", "phi1")
_PI_FORM = re.compile(r"^\s*(-?)\s*pi\s*(?:\*\s*([-+0-9.eE]+))?\s*$")


class ConfigError(ValueError):
    """Malformed or invalid scenario file; the message names the field."""


def parse_angle(value, where: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected an angle in radians, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _PI_FORM.match(value)
        try:
            if m:
                out = (-1.0 if m.group(1) else 1.0) * math.pi * (float(m.group(2)) if m.group(2) else 1.0)
            else:
                out = float(value)
        except ValueError:
            raise ConfigError(f"{where}: cannot parse angle {value!r}") from None
    else:
        raise ConfigError(f"{where}: expected an angle in radians, got {value!r}")
    if not math.isfinite(out):
        raise ConfigError(f"{where}: angle must be finite")
    return out


def _table(doc: dict, key: str, where: str | None = None) -> dict:
    where = where or key
    if key not in doc:
        raise ConfigError(f"{where}: missing section")
    tab = doc[key]
    if not isinstance(tab, dict):
        raise ConfigError(f"{where}: expected a table")
    return tab


def _settings(tab: dict, where: str) -> PartySettings:
    missing = [k for k in ANGLE_KEYS if k not in tab]
    if missing:
        raise ConfigError(f"{where}.{missing[0]}: missing field")
    a = [parse_angle(tab[k], f"{where}.{k}") for k in ANGLE_KEYS]
    for k, v in zip(ANGLE_KEYS, a):
        hi = math.pi if k.startswith("theta") else 2 * math.pi
        if not (-1e-12 <= v <= hi + 1e-12):
            raise ConfigError(f"{where}.{k}: {v} outside [0, {'pi' if hi == math.pi else '2*pi'}]")
    return PartySettings(BlochDirection(a[0], a[1]), BlochDirection(a[2], a[3]))


def _state(tab: dict) -> InitialState:
    kind = tab.get("kind")
    if not isinstance(kind, str):
        raise ConfigError("state.kind: expected \"GHZ\", \"W\" or \"custom\"")
    if kind.upper() in ("GHZ", "W"):
        return InitialState.named(kind)
    if kind.lower() != "custom":
        raise ConfigError(f"state.kind: unknown state {kind!r}")
    try:
        re_part = np.array(tab["matrix_real"], dtype=float)
        im_part = np.array(tab.get("matrix_imag", np.zeros((8, 8))), dtype=float)
    except KeyError:
        raise ConfigError("state.matrix_real: missing field for custom state") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"state.matrix_real: {exc}") from None
    if re_part.shape != (8, 8) or im_part.shape != (8, 8):
        raise ConfigError("state.matrix_real: custom state must be 8x8")
    try:
        return InitialState.custom(re_part + 1j * im_part)
    except ValueError as exc:
        raise ConfigError(f"state: {exc}") from None


def scenario_from_dict(doc: dict, require_sharp_final: bool = True) -> tuple[str, ScenarioConfig]:
    """Build and validate a scenario; returns ``(scenario_id, config)``."""
    sid = str(doc.get("scenario_id", "scenario"))
    state = _state(_table(doc, "state"))
    alice = _settings(_table(doc, "alice"), "alice")
    bob = _settings(_table(doc, "bob"), "bob")
    rows = doc.get("charlie")
    if not isinstance(rows, list) or not rows:
        raise ConfigError("charlie: need at least one [[charlie]] table")
    charlies = []
    for m, row in enumerate(rows, start=1):
        where = f"charlie[{m}]"
        if not isinstance(row, dict):
            raise ConfigError(f"{where}: expected a table")
        settings = _settings(row, where)
        if "sharpness" not in row:
            raise ConfigError(f"{where}.sharpness: missing field")
        lam = row["sharpness"]
        if isinstance(lam, bool) or not isinstance(lam, (int, float)):
            raise ConfigError(f"{where}.sharpness: expected a number, got {lam!r}")
        try:
            s = Sharpness(float(lam))
        except ValueError:
            raise ConfigError(f"{where}.sharpness: must satisfy 0 < lambda <= 1, got {lam}") from None
        charlies.append(Charlie(settings, s))
    try:
        return sid, ScenarioConfig(state, alice, bob, tuple(charlies), require_sharp_final)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def loads(text: str, require_sharp_final: bool = True) -> tuple[str, ScenarioConfig]:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from None
    return scenario_from_dict(doc, require_sharp_final)


def load(path, require_sharp_final: bool = True) -> tuple[str, ScenarioConfig]:
    return loads(Path(path).read_text(), require_sharp_final)


def _settings_dict(s: PartySettings) -> dict:
    return dict(zip(ANGLE_KEYS, s.angles()))


def scenario_to_dict(config: ScenarioConfig, scenario_id: str = "scenario") -> dict:
    state = config.state
    if state.kind in ("GHZ", "W"):
        st = {"kind": state.kind}
    else:
        st = {
            "kind": "custom",
            "matrix_real": state.matrix.real.tolist(),
            "matrix_imag": state.matrix.imag.tolist(),
        }
    return {
        "scenario_id": scenario_id,
        "state": st,
        "alice": _settings_dict(config.alice),
        "bob": _settings_dict(config.bob),
        "charlie": [dict(_settings_dict(c.settings), sharpness=c.lam) for c in config.charlies],
    }


def dumps(config: ScenarioConfig, scenario_id: str = "scenario") -> str:
    return tomli_w.dumps(scenario_to_dict(config, scenario_id))
