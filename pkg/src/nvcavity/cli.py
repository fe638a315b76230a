"""Command-line front end.

Subcommands:

* ``fom``: single-point figure of merit (JSON by default).
* ``sweep``: (V_m, Q) grid -> CSV, outer loop over mode volume.
* ``filter-scan``: external-filter width scan at one grid point.
* ``theta-scan``: dipole-orientation scan of the three-level model.
* ``modevol``: mode volume and placement factors from a field export.
* ``harminv``: resonance extraction from a ringdown signal.

Every output embeds the hash of the fully resolved configuration (or
argument set) in a ``# config_hash`` header comment / JSON field, floats
are fixed-format, and rows are emitted in a deterministic order, so
identical inputs give byte-identical outputs.

Exit codes: 0 success, 1 configuration or usage error, 2 numerics failure,
3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dynamics import NumericsError
from .merit import FilterSpec, evaluate_point
from .models import build_three_level_model, build_two_level_model
from .photonics import (
    CavityParams,
    FieldFileError,
    coupling_from_geometry,
    field_structure,
    harmonic_inversion,
    load_field_grid,
    load_ringdown,
    mode_volume,
)

__all__ = ["main"]

_FLOAT_FMT = "%.12e"


class _Parser(argparse.ArgumentParser):
    """Routes argparse usage errors through the config-error exit code."""

    def error(self, message):
        raise ConfigError(message)


def _hash_args(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FLOAT_FMT % float(value)


def _table_text(columns, rows, config_hash: str, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "config_hash": config_hash,
            "rows": [dict(zip(columns, row)) for row in rows],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    lines = [f"# config_hash: {config_hash}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def _point_from_axes(cfg: RunConfig, name: str, axis, value):
    if value is not None:
        return float(value)
    if axis.size == 1:
        return float(axis[0])
    raise ConfigError(
        f"config defines a {name} axis with {axis.size} points; "
        f"pass --{name} to pick one"
    )


def _build_model(cfg: RunConfig, v_m_rel: float, q: float, theta: float):
    cav = CavityParams(v_m_rel=v_m_rel, q=q, omega_c=cfg.omega_c, n=cfg.n)
    g = coupling_from_geometry(
        cav, cfg.emitter, radiative_rate=cfg.coupling_rate_override
    )
    detuning = cfg.emitter.omega0 - cfg.omega_c
    if cfg.model == "three_level":
        model = build_three_level_model(
            cfg.three_level,
            g=g,
            kappa_c=cav.kappa_c,
            theta=theta,
            photon_cutoff=cfg.photon_cutoff,
        )
    else:
        model = build_two_level_model(
            cfg.emitter,
            g=g,
            kappa_c=cav.kappa_c,
            detuning=detuning,
            photon_cutoff=cfg.photon_cutoff,
        )
    return model, g, cav.kappa_c


def _point_metrics(cfg: RunConfig, v_m_rel: float, q: float, theta: float,
                   kappa_f: float | None):
    model, g, kappa_c = _build_model(cfg, v_m_rel, q, theta)
    ext = None
    if kappa_f is not None:
        ext = FilterSpec(kappa_f=kappa_f, center=cfg.filter_center)
    fom = evaluate_point(model, cfg.sideband, ext)
    flags = []
    if kappa_f is not None:
        purcell_rate = 4.0 * g**2 / kappa_c + cfg.emitter.gamma
        if kappa_f < purcell_rate:
            # Below the enhanced decay rate the incoherent-sideband
            # assumption turns pessimistic; flag rather than model it.
            flags.append("tight_filter_sideband_coherence")
    return fom, g, kappa_c, flags


def _cmd_fom(args) -> int:
    cfg = load_config(args.config, args.set or ())
    v = _point_from_axes(cfg, "vm", cfg.v_m_axis, args.vm)
    q = _point_from_axes(cfg, "q", cfg.q_axis, args.q)
    fom, g, kappa_c, flags = _point_metrics(cfg, v, q, args.theta, cfg.kappa_f)
    payload = {
        "config_hash": cfg.config_hash,
        "v_m_rel": v,
        "q": q,
        "g": g,
        "kappa_c": kappa_c,
        "i_zpl": fom.i_zpl,
        "f_zpl": fom.f_zpl,
        "f_sb": fom.f_sb,
        "i_total": fom.i_total,
        "beta": fom.beta,
        "beta_times_i": fom.beta * fom.i_total,
        "flags": flags,
    }
    if args.format == "csv":
        columns = [k for k in payload if k not in ("config_hash", "flags")]
        text = _table_text(
            columns, [[payload[k] for k in columns]], cfg.config_hash, "csv"
        )
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    _write(args.output, text)
    return 0


_SWEEP_COLUMNS = (
    "v_m_rel", "q", "g", "kappa_c", "i_zpl", "f_zpl", "f_sb",
    "i_total", "beta", "beta_times_i", "status",
)


def sweep_rows(cfg: RunConfig, theta: float = 0.0):
    """All grid rows in deterministic order (outer v_m_rel, inner q)."""
    rows = []
    for v in cfg.v_m_axis:
        for q in cfg.q_axis:
            try:
                fom, g, kappa_c, _ = _point_metrics(cfg, float(v), float(q), theta, cfg.kappa_f)
                rows.append([
                    float(v), float(q), g, kappa_c, fom.i_zpl, fom.f_zpl,
                    fom.f_sb, fom.i_total, fom.beta, fom.beta * fom.i_total, "ok",
                ])
            except NumericsError:
                rows.append([float(v), float(q), 0.0, 0.0, 0.0, 0.0, 0.0,
                             0.0, 0.0, 0.0, "numerics"])
    return rows


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.set or ())
    rows = sweep_rows(cfg, theta=args.theta)
    _write(args.output, _table_text(_SWEEP_COLUMNS, rows, cfg.config_hash, args.format))
    return 0


def _cmd_filter_scan(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if cfg.filter_axis is None:
        raise ConfigError("filter-scan requires a filter.axis spec in the config")
    v = _point_from_axes(cfg, "vm", cfg.v_m_axis, args.vm)
    q = _point_from_axes(cfg, "q", cfg.q_axis, args.q)
    rows = []
    for kappa_f in cfg.filter_axis:
        fom, *_ = _point_metrics(cfg, v, q, args.theta, float(kappa_f))
        rows.append([float(kappa_f), fom.i_total, fom.beta])
    betas = [row[2] for row in rows]
    for a, b in zip(betas, betas[1:]):
        if b < a - 1e-9:
            raise NumericsError(
                f"beta decreased from {a} to {b} along a widening filter axis"
            )
    _write(
        args.output,
        _table_text(("kappa_f", "i_total", "beta"), rows, cfg.config_hash, args.format),
    )
    return 0


def _cmd_theta_scan(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if cfg.model != "three_level" or cfg.three_level is None:
        raise ConfigError("theta-scan requires model = 'three_level'")
    v = _point_from_axes(cfg, "vm", cfg.v_m_axis, args.vm)
    q = _point_from_axes(cfg, "q", cfg.q_axis, args.q)
    thetas = np.linspace(0.0, math.pi / 2.0, cfg.theta_points)
    rows = []
    for theta in thetas:
        fom, *_ = _point_metrics(cfg, v, q, float(theta), cfg.kappa_f)
        rows.append([float(theta), fom.i_zpl, fom.i_total, fom.f_zpl])
    _write(
        args.output,
        _table_text(
            ("theta", "i_zpl", "i_total", "f_zpl"), rows, cfg.config_hash, args.format
        ),
    )
    return 0


def _parse_vector(text: str, flag: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{flag} expects three comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{flag} expects numbers, got {text!r}") from None


def _cmd_modevol(args) -> int:
    grid = load_field_grid(args.field_file)
    v_m = mode_volume(grid)
    wavelength = args.wavelength_nm * 1e-9
    v_m_rel = v_m / (wavelength / args.n) ** 3
    payload = {
        "v_m": v_m,
        "v_m_rel": v_m_rel,
        "f_r": 1.0,
        "eta": 1.0,
        "v_m_eff": v_m,
    }
    if args.r is not None:
        r = _parse_vector(args.r, "--r")
        dipole = _parse_vector(args.dipole, "--dipole")
        try:
            geom = field_structure(grid, r, dipole)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        payload.update(
            f_r=geom.f_r,
            eta=geom.eta,
            v_m_eff=geom.v_m_eff if math.isfinite(geom.v_m_eff) else -1.0,
        )
    payload["config_hash"] = _hash_args(
        {
            "field_file": str(args.field_file),
            "r": args.r,
            "dipole": args.dipole,
            "wavelength_nm": args.wavelength_nm,
            "n": args.n,
        }
    )
    _write(args.output, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_harminv(args) -> int:
    signal, dt_file = load_ringdown(args.signal_file)
    dt = args.dt if args.dt is not None else dt_file
    try:
        modes = harmonic_inversion(
            signal, dt, max_modes=args.max_modes, noise_floor=args.noise_floor
        )
    except ValueError as exc:
        raise NumericsError(str(exc)) from None
    rows = [
        [m.frequency / 1e12, m.q, abs(m.amplitude),
         math.atan2(m.amplitude.imag, m.amplitude.real), m.decay_rate]
        for m in modes
    ]
    config_hash = _hash_args(
        {
            "signal_file": str(args.signal_file),
            "dt": dt,
            "max_modes": args.max_modes,
            "noise_floor": args.noise_floor,
        }
    )
    _write(
        args.output,
        _table_text(
            ("frequency_THz", "Q", "amp_abs", "amp_phase", "decay_rate"),
            rows, config_hash, args.format,
        ),
    )
    return 0


def _add_common(parser, config_required=True, default_format="csv"):
    if config_required:
        parser.add_argument("--config", required=True, help="TOML run configuration")
        parser.add_argument(
            "--set",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="override one configuration key (repeatable)",
        )
    parser.add_argument("--output", default=None, help="output path (default stdout)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default=default_format
    )


def _add_point_flags(parser):
    parser.add_argument("--vm", type=float, default=None, help="mode volume in (lambda/n)^3")
    parser.add_argument("--q", type=float, default=None, help="quality factor")
    parser.add_argument(
        "--theta", type=float, default=0.0,
        help="dipole orientation angle (three-level model only)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nvcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nvcavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fom", help="single-point figure of merit")
    _add_common(p, default_format="json")
    _add_point_flags(p)
    p.set_defaults(func=_cmd_fom)

    p = sub.add_parser("sweep", help="(V_m, Q) grid sweep")
    _add_common(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("filter-scan", help="external filter width scan")
    _add_common(p)
    _add_point_flags(p)
    p.set_defaults(func=_cmd_filter_scan)

    p = sub.add_parser("theta-scan", help="three-level orientation scan")
    _add_common(p)
    _add_point_flags(p)
    p.set_defaults(func=_cmd_theta_scan)

    p = sub.add_parser("modevol", help="mode volume from a field export")
    p.add_argument("field_file")
    p.add_argument("--r", default=None, help="emitter position x,y,z in meters")
    p.add_argument("--dipole", default="1,0,0", help="dipole axis x,y,z")
    p.add_argument("--wavelength-nm", type=float, default=637.0)
    p.add_argument("--n", type=float, default=2.0)
    _add_common(p, config_required=False, default_format="json")
    p.set_defaults(func=_cmd_modevol)

    p = sub.add_parser("harminv", help="resonances from a ringdown signal")
    p.add_argument("signal_file")
    p.add_argument("--dt", type=float, default=None, help="sample spacing override, seconds")
    p.add_argument("--max-modes", type=int, default=8)
    p.add_argument("--noise-floor", type=float, default=1e-6)
    _add_common(p, config_required=False)
    p.set_defaults(func=_cmd_harminv)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerics failure: {exc}", file=sys.stderr)
        return 2
    except (FieldFileError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
