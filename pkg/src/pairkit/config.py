"""Run configuration: TOML loading, defaults, validation, canonical echo.

One file describes a whole experiment bundle: per-source dispersion tables
and poling specs, named pump presets, the analysis grid, interferometer and
counting parameters, and output options.  Keys carry their unit in the
name (``*_nm``, ``*_m``, ``*_s``, ``*_hz``); dispersion tables use the SI
keys ``omega0, k0, k1, k2, k3`` directly.

Precedence is flag > file > default.  The fully resolved configuration can
be rendered back to canonical TOML, which hashes stably and reparses to the
identical configuration.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .dispersion import DispersionBranch, DispersionModel
from .errors import ConfigError
from .grids import FrequencyGrid
from .interference import InterferometerConfig
from .counting import PulseTrainConfig
from .jointspectrum import PumpEnvelope
from .poling import NonlinearityProfile
from .units import SPEED_OF_LIGHT, TWO_PI, nm_to_angular_frequency

BUNDLED_PRESET = "device.toml"

DEFAULTS: dict = {
    "interferometer": {
        "reflectivity": 0.5,
        "tau_min_s": -3.0e-12,
        "tau_max_s": 3.0e-12,
        "n_steps": 121,
    },
    "counting": {
        "repetition_rate_hz": 80.0e6,
        "n_pulses": 200_000,
        "pair_probability_top": 0.0291,
        "pair_probability_bot": 0.0282,
        "loss_signal": 0.1,
        "loss_idler": 0.15,
        "seed": 1,
        "timing_jitter_s": 0.0,
        "bin_width_s": 3.125e-9,
        "window_s": 8.0e-8,
    },
    "tof": {
        "dispersion_ns_per_nm": 0.5,
        "n_samples": 200_000,
        "jsi_bins": 96,
    },
    "rsweep": {"r_min": 0.0, "r_max": 1.0, "n_steps": 41},
    "output": {"directory": "pairkit-out", "format": "csv"},
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise ConfigError("output", f"cannot render config value {value!r}")


def _render_tables(data: dict, prefix: str = "") -> list[str]:
    lines = []
    scalars = {k: v for k, v in data.items() if not isinstance(v, dict)}
    tables = {k: v for k, v in data.items() if isinstance(v, dict)}
    if scalars and prefix:
        lines.append(f"[{prefix}]")
    for key in sorted(scalars):
        lines.append(f"{key} = {_render_value(scalars[key])}")
    if scalars:
        lines.append("")
    for key in sorted(tables):
        child = f"{prefix}.{key}" if prefix else key
        lines.extend(_render_tables(tables[key], child))
    return lines


class RunConfig:
    """Defaults-resolved configuration with typed section accessors."""

    def __init__(self, sections: dict):
        self.sections = _merge(DEFAULTS, sections)

    @classmethod
    def load(cls, path=None) -> "RunConfig":
        if path is None:
            source = resources.files("pairkit").joinpath("presets", BUNDLED_PRESET)
            data = tomllib.loads(source.read_text(encoding="utf-8"))
        else:
            with Path(path).open("rb") as fh:
                data = tomllib.load(fh)
        return cls(data)

    def override(self, section: str, key: str, value) -> None:
        self.sections = _merge(self.sections, {section: {key: value}})

    # -- canonical form ----------------------------------------------------

    def effective_toml(self) -> str:
        return "\n".join(_render_tables(self.sections)).rstrip() + "\n"

    def config_hash(self) -> str:
        """Short digest of the scientific configuration.

        The [output] table (directory, file format) is excluded so that the
        same experiment written to two places carries the same hash.
        """
        physics = {k: v for k, v in self.sections.items() if k != "output"}
        text = "\n".join(_render_tables(physics)).rstrip() + "\n"
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    # -- section access ----------------------------------------------------

    def _section(self, *names: str) -> dict:
        node = self.sections
        for name in names:
            if not isinstance(node, dict) or name not in node:
                raise ConfigError(".".join(names), "missing config section")
            node = node[name]
        if not isinstance(node, dict):
            raise ConfigError(".".join(names), "expected a table")
        return node

    def _value(self, section: dict, path: str, key: str, kind=float, positive=False):
        if key not in section:
            raise ConfigError(path, f"missing key {key!r}")
        try:
            value = kind(section[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, f"key {key!r} is not a valid {kind.__name__}") from exc
        if positive and value <= 0:
            raise ConfigError(path, f"key {key!r} must be > 0")
        return value

    def source_names(self) -> list[str]:
        return sorted(self._section("source"))

    def pump_names(self) -> list[str]:
        return sorted(self._section("pump"))

    def dispersion_model(self, source: str) -> DispersionModel:
        path = f"source.{source}.dispersion"
        table = self._section("source", source, "dispersion")
        branches = {}
        for name in ("pump", "signal", "idler"):
            if name not in table:
                raise ConfigError(path, f"missing branch {name!r}")
            branch = table[name]
            bpath = f"{path}.{name}"
            branches[name] = DispersionBranch(
                omega0=self._value(branch, bpath, "omega0", positive=True),
                k0=self._value(branch, bpath, "k0"),
                k1=self._value(branch, bpath, "k1"),
                k2=float(branch.get("k2", 0.0)),
                k3=float(branch.get("k3", 0.0)),
                span=float(branch["span"]) if "span" in branch else None,
            )
        return DispersionModel(**branches)

    def poling(self, source: str) -> tuple[NonlinearityProfile, float, float]:
        path = f"source.{source}.poling"
        table = self._section("source", source, "poling")
        shape = table.get("shape", "gaussian")
        length = self._value(table, path, "length_m", positive=True)
        period = self._value(table, path, "period_m", positive=True)
        if shape == "gaussian":
            profile = NonlinearityProfile(
                shape="gaussian",
                gaussian_fwhm=self._value(table, path, "gaussian_fwhm_m", positive=True),
            )
        else:
            profile = NonlinearityProfile(shape="tophat")
        return profile, length, period

    def grid_for(self, source: str) -> FrequencyGrid:
        grid = self._section("grid")
        src = self._section("source", source)
        signal_center_nm = self._value(grid, "grid", "signal_center_nm", positive=True)
        idler_center_nm = self._value(src, f"source.{source}", "idler_center_nm", positive=True)
        signal_span_nm = self._value(grid, "grid", "signal_span_nm", positive=True)
        idler_span_nm = self._value(grid, "grid", "idler_span_nm", positive=True)

        def span_omega(span_nm: float, center_nm: float) -> float:
            return TWO_PI * SPEED_OF_LIGHT * (span_nm * 1e-9) / (center_nm * 1e-9) ** 2

        return FrequencyGrid(
            signal_center=nm_to_angular_frequency(signal_center_nm),
            idler_center=nm_to_angular_frequency(idler_center_nm),
            signal_span=span_omega(signal_span_nm, signal_center_nm),
            idler_span=span_omega(idler_span_nm, idler_center_nm),
            n_signal=self._value(grid, "grid", "n_signal", kind=int, positive=True),
            n_idler=self._value(grid, "grid", "n_idler", kind=int, positive=True),
        )

    def pump(self, name: str) -> PumpEnvelope:
        path = f"pump.{name}"
        table = self._section("pump", name)
        return PumpEnvelope(
            center_nm=self._value(table, path, "center_nm", positive=True),
            fwhm_nm=self._value(table, path, "fwhm_nm", positive=True),
            chirp=float(table.get("chirp_s2", 0.0)),
        )

    def interferometer(self) -> InterferometerConfig:
        table = self._section("interferometer")
        try:
            return InterferometerConfig(
                reflectivity=self._value(table, "interferometer", "reflectivity"),
                tau_min=self._value(table, "interferometer", "tau_min_s"),
                tau_max=self._value(table, "interferometer", "tau_max_s"),
                n_steps=self._value(table, "interferometer", "n_steps", kind=int),
            )
        except ValueError as exc:
            raise ConfigError("interferometer", str(exc)) from exc

    def pulse_train(self) -> PulseTrainConfig:
        table = self._section("counting")
        try:
            return PulseTrainConfig(
                repetition_rate=self._value(table, "counting", "repetition_rate_hz", positive=True),
                n_pulses=self._value(table, "counting", "n_pulses", kind=int, positive=True),
                pair_probability=(
                    self._value(table, "counting", "pair_probability_top", positive=True),
                    self._value(table, "counting", "pair_probability_bot", positive=True),
                ),
                loss_signal=self._value(table, "counting", "loss_signal", positive=True),
                loss_idler=self._value(table, "counting", "loss_idler", positive=True),
                reflectivity=self._value(
                    self._section("interferometer"), "interferometer", "reflectivity"
                ),
                seed=self._value(table, "counting", "seed", kind=int),
                timing_jitter=float(table.get("timing_jitter_s", 0.0)),
            )
        except ValueError as exc:
            raise ConfigError("counting", str(exc)) from exc

    def counting_windows(self) -> tuple[float, float]:
        table = self._section("counting")
        return (
            self._value(table, "counting", "bin_width_s", positive=True),
            self._value(table, "counting", "window_s", positive=True),
        )

    def tof(self) -> dict:
        table = self._section("tof")
        return {
            "dispersion_ns_per_nm": self._value(table, "tof", "dispersion_ns_per_nm"),
            "n_samples": self._value(table, "tof", "n_samples", kind=int, positive=True),
            "jsi_bins": self._value(table, "tof", "jsi_bins", kind=int, positive=True),
        }

    def rsweep_values(self):
        import numpy as np

        table = self._section("rsweep")
        r_min = self._value(table, "rsweep", "r_min")
        r_max = self._value(table, "rsweep", "r_max")
        n = self._value(table, "rsweep", "n_steps", kind=int)
        if not (0.0 <= r_min < r_max <= 1.0 and n >= 2):
            raise ConfigError("rsweep", "need 0 <= r_min < r_max <= 1 and n_steps >= 2")
        return np.linspace(r_min, r_max, n)

    def output(self) -> tuple[Path, str]:
        table = self._section("output")
        fmt = table.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("output", f"unknown format {fmt!r}")
        return Path(table.get("directory", "pairkit-out")), fmt
