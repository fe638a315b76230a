"""Configuration loading for the command-line tools.

One TOML file describes a run: emitter rates, cavity axes, sideband model,
numerics, optional external filter, and optional three-level parameters.
Sections and keys:

* ``model`` (top level): ``"two_level"`` (default) or ``"three_level"``.
* ``[emitter]``: ``gamma``, ``gamma_star``, ``debye_waller``, and either
  ``wavelength_nm`` or ``omega0`` (rad/s). ``angular = true`` marks rate
  values as already angular (rad/s); the default ``false`` reads them as
  ordinary frequencies in Hz and multiplies by 2 pi.
* ``[cavity]``: ``v_m_rel`` and ``q`` axes, each either a scalar or a
  ``[min, max, count]`` log-spaced axis spec; ``n``; optional ``omega_c``
  (rad/s, defaults to the emitter frequency); ``coupling_dipole`` either
  ``"zpl"`` (Debye-Waller weighted radiative rate, the default) or
  ``"full"`` (full radiative rate).
* ``[sideband]``: ``file`` (path relative to the config file) or an inline
  ``components`` list of ``{center_THz, fwhm_THz, weight}`` tables plus
  ``debye_waller`` and ``angular``; optional section.
* ``[numerics]``: ``photon_cutoff`` plus optional spectral-grid defaults
  (``spectrum_points``, ``window_factor``, ``time_points``).
* ``[filter]``: optional scalar ``kappa_f`` (applied to single-point
  evaluations), optional ``axis`` spec for filter scans, ``center``;
  ``angular`` flag as in ``[emitter]``.
* ``[three_level]``: ``gamma_xy``, ``delta``, ``temperature``, ``upper``,
  ``theta_points``; ``angular`` flag as in ``[emitter]``.

``--set section.key=value`` overrides are applied before validation, and
the hash of the fully resolved configuration (with the sideband parameters
inlined) stamps every output file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .models import (
    EmitterParams,
    SidebandFileError,
    SidebandModel,
    ThreeLevelParams,
    load_sideband_model,
)
from .units import TWO_PI, to_angular, wavelength_to_angular

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_override"]


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


_KNOWN = {
    None: {"model"},
    "emitter": {"gamma", "gamma_star", "debye_waller", "wavelength_nm", "omega0", "angular"},
    "cavity": {"v_m_rel", "q", "n", "omega_c", "coupling_dipole"},
    "sideband": {"file", "components", "debye_waller", "angular"},
    "numerics": {"photon_cutoff", "spectrum_points", "window_factor", "time_points"},
    "filter": {"kappa_f", "axis", "center", "angular"},
    "three_level": {"gamma_xy", "delta", "temperature", "upper", "theta_points", "angular"},
}


def parse_override(text: str):
    """Split one ``section.key=value`` override; value uses TOML syntax."""
    head, sep, raw = text.partition("=")
    if not sep or not head.strip():
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    section, dot, key = head.strip().partition(".")
    if not section or not dot or not key:
        raise ConfigError(f"override target {head.strip()!r} must name section.key")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        # Bare words (paths, enum values) pass through as strings.
        value = raw.strip()
    return section, key, value


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _require(sec: dict, section: str, key: str):
    if key not in sec:
        raise ConfigError(f"missing required key {section}.{key}")
    return sec[key]


def _number(value, section: str, key: str, positive=True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{section}.{key} must be positive, got {value}")
    return value


def _rate(sec: dict, section: str, key: str, angular: bool, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    value = _number(sec[key], section, key, positive=False)
    if value < 0:
        raise ConfigError(f"{section}.{key} must be non-negative")
    return value if angular else TWO_PI * value


def _axis(value, section: str, key: str) -> np.ndarray:
    """A scalar or [min, max, count] log-spaced axis spec."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.array([float(value)])
    if isinstance(value, list) and len(value) == 3:
        lo = _number(value[0], section, key)
        hi = _number(value[1], section, key)
        count = value[2]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(f"{section}.{key} count must be a positive integer")
        if hi < lo:
            raise ConfigError(f"{section}.{key} has max < min")
        if count == 1:
            return np.array([lo])
        return np.geomspace(lo, hi, count)
    raise ConfigError(
        f"{section}.{key} must be a number or [min, max, count] axis spec"
    )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description."""

    model: str
    emitter: EmitterParams
    v_m_axis: np.ndarray
    q_axis: np.ndarray
    n: float
    omega_c: float
    coupling_dipole: str
    sideband: SidebandModel | None
    photon_cutoff: int
    spectrum_points: int
    window_factor: float
    time_points: int
    kappa_f: float | None
    filter_axis: np.ndarray | None
    filter_center: float
    three_level: ThreeLevelParams | None
    theta_points: int
    resolved: dict

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def coupling_rate_override(self) -> float | None:
        """Radiative rate fed to the coupling mapping, None for the default."""
        return self.emitter.gamma if self.coupling_dipole == "full" else None


def _resolve_sideband(sec: dict, base: Path) -> SidebandModel | None:
    if not sec:
        return None
    if "file" in sec:
        extra = sorted(set(sec) - {"file"})
        if extra:
            raise ConfigError(
                f"sideband.file excludes inline keys, found {', '.join(extra)}"
            )
        path = base / str(sec["file"])
        if not path.exists():
            raise ConfigError(f"sideband file not found: {path}")
        try:
            return load_sideband_model(path)
        except SidebandFileError as exc:
            raise ConfigError(str(exc)) from None
    # Inline components mirror the file schema.
    angular = sec.get("angular", False)
    if not isinstance(angular, bool):
        raise ConfigError("sideband.angular must be a boolean")
    comps = sec.get("components")
    if not isinstance(comps, list) or not comps:
        raise ConfigError("sideband.components must be a non-empty list of tables")
    debye_waller = _number(
        sec.get("debye_waller", 0.02), "sideband", "debye_waller"
    )
    centers, fwhms, weights = [], [], []
    for k, comp in enumerate(comps):
        if not isinstance(comp, dict):
            raise ConfigError(f"sideband.components[{k}] must be a table")
        try:
            centers.append(to_angular(float(comp["center_THz"]), "THz", angular))
            fwhms.append(to_angular(float(comp["fwhm_THz"]), "THz", angular))
            weights.append(float(comp["weight"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(
                f"sideband.components[{k}]: expected center_THz, fwhm_THz, weight ({exc})"
            ) from None
    try:
        return SidebandModel.from_raw(centers, fwhms, weights, debye_waller)
    except SidebandFileError as exc:
        raise ConfigError(f"inline sideband invalid: {exc}") from None


def load_config(path, overrides=()) -> RunConfig:
    """Load and validate a TOML run configuration.

    ``overrides`` is an iterable of ``section.key=value`` strings applied
    on top of the file before validation.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from None

    for text in overrides:
        section, key, value = parse_override(text)
        data.setdefault(section, {})
        if not isinstance(data[section], dict):
            raise ConfigError(f"override targets non-table section [{section}]")
        data[section][key] = value

    for section, keys in _KNOWN.items():
        sec = data if section is None else data.get(section, {})
        if section is not None and not isinstance(sec, dict):
            raise ConfigError(f"[{section}] must be a table")
        scope = {k for k in sec if section is not None or not isinstance(sec[k], dict)}
        unknown = scope - keys
        if unknown:
            where = "top level" if section is None else f"[{section}]"
            raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    unknown_sections = {
        k for k, v in data.items() if isinstance(v, dict)
    } - {k for k in _KNOWN if k is not None}
    if unknown_sections:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown_sections))}")

    model = data.get("model", "two_level")
    if model not in ("two_level", "three_level"):
        raise ConfigError(f"model must be two_level or three_level, got {model!r}")

    em_sec = _section(data, "emitter")
    angular = em_sec.get("angular", False)
    if not isinstance(angular, bool):
        raise ConfigError("emitter.angular must be a boolean")
    if "omega0" in em_sec and "wavelength_nm" in em_sec:
        raise ConfigError("give emitter.omega0 or emitter.wavelength_nm, not both")
    if "omega0" in em_sec:
        omega0 = _number(em_sec["omega0"], "emitter", "omega0")
    else:
        wavelength = _number(
            em_sec.get("wavelength_nm", 637.0), "emitter", "wavelength_nm"
        )
        omega0 = wavelength_to_angular(wavelength * 1e-9)
    try:
        emitter = EmitterParams(
            gamma=_rate(em_sec, "emitter", "gamma", angular),
            gamma_star=_rate(em_sec, "emitter", "gamma_star", angular),
            debye_waller=_number(
                _require(em_sec, "emitter", "debye_waller"), "emitter", "debye_waller"
            ),
            omega0=omega0,
        )
    except ValueError as exc:
        raise ConfigError(f"emitter parameters invalid: {exc}") from None

    cav_sec = _section(data, "cavity")
    v_m_axis = _axis(_require(cav_sec, "cavity", "v_m_rel"), "cavity", "v_m_rel")
    q_axis = _axis(_require(cav_sec, "cavity", "q"), "cavity", "q")
    if np.any(q_axis < 1):
        raise ConfigError("cavity.q values must be >= 1")
    n = _number(cav_sec.get("n", 2.0), "cavity", "n")
    omega_c = _number(cav_sec.get("omega_c", omega0), "cavity", "omega_c")
    coupling_dipole = cav_sec.get("coupling_dipole", "zpl")
    if coupling_dipole not in ("zpl", "full"):
        raise ConfigError(
            f"cavity.coupling_dipole must be 'zpl' or 'full', got {coupling_dipole!r}"
        )

    sideband = _resolve_sideband(_section(data, "sideband"), path.parent)
    if sideband is not None and abs(sideband.debye_waller - emitter.debye_waller) > 1e-9:
        raise ConfigError(
            "sideband Debye-Waller factor "
            f"{sideband.debye_waller} disagrees with emitter.debye_waller "
            f"{emitter.debye_waller}"
        )

    num_sec = _section(data, "numerics")
    photon_cutoff = num_sec.get("photon_cutoff", 1)
    if isinstance(photon_cutoff, bool) or not isinstance(photon_cutoff, int):
        raise ConfigError("numerics.photon_cutoff must be an integer")
    if photon_cutoff < 1:
        raise ConfigError("numerics.photon_cutoff must be >= 1")
    spectrum_points = num_sec.get("spectrum_points", 2048)
    time_points = num_sec.get("time_points", 1024)
    for key, val in (("spectrum_points", spectrum_points), ("time_points", time_points)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 16:
            raise ConfigError(f"numerics.{key} must be an integer >= 16")
    window_factor = _number(num_sec.get("window_factor", 10.0), "numerics", "window_factor")

    fil_sec = _section(data, "filter")
    fil_angular = fil_sec.get("angular", False)
    if not isinstance(fil_angular, bool):
        raise ConfigError("filter.angular must be a boolean")
    kappa_f = None
    if "kappa_f" in fil_sec:
        kappa_f = _number(fil_sec["kappa_f"], "filter", "kappa_f")
        if not fil_angular:
            kappa_f *= TWO_PI
    filter_axis = None
    if "axis" in fil_sec:
        filter_axis = _axis(fil_sec["axis"], "filter", "axis")
        if not fil_angular:
            filter_axis = TWO_PI * filter_axis
    filter_center = _number(
        fil_sec.get("center", 0.0), "filter", "center", positive=False
    )
    if "center" in fil_sec and not fil_angular:
        filter_center *= TWO_PI

    three_sec = _section(data, "three_level")
    three_level = None
    theta_points = 11
    if three_sec or model == "three_level":
        if model != "three_level":
            raise ConfigError("[three_level] section requires model = 'three_level'")
        tl_angular = three_sec.get("angular", False)
        if not isinstance(tl_angular, bool):
            raise ConfigError("three_level.angular must be a boolean")
        upper = three_sec.get("upper", "x")
        if upper not in ("x", "y"):
            raise ConfigError(f"three_level.upper must be 'x' or 'y', got {upper!r}")
        theta_points = three_sec.get("theta_points", 11)
        if isinstance(theta_points, bool) or not isinstance(theta_points, int) or theta_points < 2:
            raise ConfigError("three_level.theta_points must be an integer >= 2")
        try:
            three_level = ThreeLevelParams(
                gamma=emitter.gamma,
                gamma_xy=_rate(three_sec, "three_level", "gamma_xy", tl_angular),
                delta=_rate(three_sec, "three_level", "delta", tl_angular),
                temperature=_number(
                    _require(three_sec, "three_level", "temperature"),
                    "three_level",
                    "temperature",
                ),
                upper=upper,
            )
        except ValueError as exc:
            raise ConfigError(f"three_level parameters invalid: {exc}") from None

    resolved = {
        "model": model,
        "emitter": {
            "gamma": emitter.gamma,
            "gamma_star": emitter.gamma_star,
            "debye_waller": emitter.debye_waller,
            "omega0": emitter.omega0,
        },
        "cavity": {
            "v_m_rel": [float(v) for v in v_m_axis],
            "q": [float(q) for q in q_axis],
            "n": n,
            "omega_c": omega_c,
            "coupling_dipole": coupling_dipole,
        },
        "sideband": None
        if sideband is None
        else {
            "centers": [float(c) for c in sideband.centers],
            "fwhms": [float(f) for f in sideband.fwhms],
            "weights": [float(w) for w in sideband.weights],
            "debye_waller": sideband.debye_waller,
        },
        "numerics": {
            "photon_cutoff": photon_cutoff,
            "spectrum_points": spectrum_points,
            "window_factor": window_factor,
            "time_points": time_points,
        },
        "filter": {
            "kappa_f": kappa_f,
            "axis": None if filter_axis is None else [float(k) for k in filter_axis],
            "center": filter_center,
        },
        "three_level": None
        if three_level is None
        else {
            "gamma_xy": three_level.gamma_xy,
            "delta": three_level.delta,
            "temperature": three_level.temperature,
            "upper": three_level.upper,
            "theta_points": theta_points,
        },
    }

    return RunConfig(
        model=model,
        emitter=emitter,
        v_m_axis=v_m_axis,
        q_axis=q_axis,
        n=n,
        omega_c=omega_c,
        coupling_dipole=coupling_dipole,
        sideband=sideband,
        photon_cutoff=photon_cutoff,
        spectrum_points=spectrum_points,
        window_factor=window_factor,
        time_points=time_points,
        kappa_f=kappa_f,
        filter_axis=filter_axis,
        filter_center=filter_center,
        three_level=three_level,
        theta_points=theta_points,
        resolved=resolved,
    )
