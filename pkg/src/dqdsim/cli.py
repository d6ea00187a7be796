"""Command-line front-end.

    simulate spectral --config cfg.json [--out file] [--format csv|json]
    simulate evolve   --config cfg.json [--out file] [--engine E] [--format F]
    simulate t2       --config cfg.json [--out file] [--engine E] [--format F]
    simulate sweep    --config cfg.json [--out file] [--engine E] [--format F]

A run is described by a single JSON config; CLI flags override config fields.
Unknown config keys are an error.  Outputs are deterministic: floats are
written with 17 significant digits, lines end with \\n, and JSON keys are
sorted.  Exit codes: 0 success, 2 usage/config error, 3 numerical guard,
4 i/o failure.  The only ambient configuration is SIMULATE_THREADS, the
number of worker threads for sweep points.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import (
    NoDecoherenceError,
    SweepError,
    SweepSpec,
    TrajectoryTooShortError,
    decoherence_time_analytic,
    decoherence_time_empirical,
    run_sweep,
)
from .analytic import chi_rate, closed_form_trajectory
from .bath import BathModel, OhmicBath, bath_from_dict, bath_to_dict, spectral_density
from .redfield import StepSizeError, Trajectory, build_tensor, propagate_numeric, time_grid
from .system import QubitParams, diagonalize, initial_state
from .units import temperature_from_millikelvin

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_IO = 4

THREADS_ENV = "SIMULATE_THREADS"

_ENGINES = ("closed_form", "numeric", "both")
_FORMATS = ("csv", "json")

_TRAJECTORY_HEADER = "t,rho11,rho22,re_rho12,im_rho12,abs_rho12"
_NUMERIC_EXTRA_HEADER = (
    "rho11_numeric,rho22_numeric,re_rho12_numeric,im_rho12_numeric,abs_rho12_numeric"
)

_COMMON_KEYS = {"bath", "format", "out"}
_TIMEGRID_KEYS = {"t_end", "n_steps", "store_every"}
_PHYSICS_KEYS = {"qubit", "temperature_K", "temperature_mK", "engine"}
_ALLOWED_KEYS = {
    "spectral": _COMMON_KEYS | {"grid"},
    "evolve": _COMMON_KEYS | _PHYSICS_KEYS | _TIMEGRID_KEYS,
    "t2": _COMMON_KEYS | _PHYSICS_KEYS | _TIMEGRID_KEYS,
    "sweep": _COMMON_KEYS | _PHYSICS_KEYS | _TIMEGRID_KEYS | {"sweep", "trajectories"},
}


class ConfigError(ValueError):
    """Invalid configuration or usage; maps to exit code 2."""


def _fmt(x: float) -> str:
    # 17 significant digits round-trips doubles exactly
    return format(float(x), ".17g")


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _check_keys(obj: dict, allowed: set, context: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")


def _number(obj: dict, key: str, context: str) -> float:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(obj: dict, key: str, context: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context}.{key} must be an integer, got {value!r}")
    return value


def _parse_bath(cfg: dict) -> BathModel:
    if "bath" not in cfg:
        raise ConfigError("config needs a 'bath' object")
    try:
        return bath_from_dict(cfg["bath"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_temperature(cfg: dict, required: bool = True) -> Optional[float]:
    has_k = "temperature_K" in cfg
    has_mk = "temperature_mK" in cfg
    if has_k and has_mk:
        raise ConfigError("give exactly one of temperature_K and temperature_mK")
    try:
        if has_k:
            return _number(cfg, "temperature_K", "config")
        if has_mk:
            return temperature_from_millikelvin(_number(cfg, "temperature_mK", "config"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if required:
        raise ConfigError("config needs temperature_K or temperature_mK")
    return None


def _parse_qubit(cfg: dict, bath: BathModel) -> Optional[float]:
    """Tunneling T_c from the qubit object, or None to use the 0.1*omega_l binding."""
    qubit = cfg.get("qubit")
    if qubit is None:
        if isinstance(bath, OhmicBath):
            raise ConfigError(
                "the Ohmic bath carries no omega_l; give qubit.tunneling_Tc or qubit.omega_l"
            )
        return None
    if not isinstance(qubit, dict):
        raise ConfigError("qubit must be an object")
    _check_keys(qubit, {"tunneling_Tc", "omega_l"}, "qubit")
    if ("tunneling_Tc" in qubit) == ("omega_l" in qubit):
        raise ConfigError("qubit needs exactly one of tunneling_Tc and omega_l")
    if "tunneling_Tc" in qubit:
        return _number(qubit, "tunneling_Tc", "qubit")
    return 0.1 * _number(qubit, "omega_l", "qubit")


def _resolve_tc(cfg: dict, bath: BathModel) -> float:
    tc = _parse_qubit(cfg, bath)
    if tc is None:
        tc = 0.1 * bath.omega_l
    try:
        QubitParams(tunneling_Tc=tc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return tc


def _parse_time_grid(cfg: dict, required: bool) -> tuple[Optional[float], Optional[int], int]:
    has_t = "t_end" in cfg
    has_n = "n_steps" in cfg
    if has_t != has_n:
        raise ConfigError("t_end and n_steps must be given together")
    if not has_t:
        if required:
            raise ConfigError("config needs t_end and n_steps")
        if "store_every" in cfg:
            raise ConfigError("store_every needs a time grid (t_end, n_steps)")
        return None, None, 1
    t_end = _number(cfg, "t_end", "config")
    n_steps = _integer(cfg, "n_steps", "config")
    store_every = _integer(cfg, "store_every", "config") if "store_every" in cfg else 1
    try:
        time_grid(t_end, n_steps, store_every)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return t_end, n_steps, store_every


def _parse_engine(cfg: dict, override: Optional[str]) -> str:
    engine = override or cfg.get("engine", "closed_form")
    if engine not in _ENGINES:
        raise ConfigError(f"engine must be one of {_ENGINES}, got {engine!r}")
    return engine


def _parse_format(cfg: dict, override: Optional[str]) -> str:
    fmt = override or cfg.get("format", "csv")
    if fmt not in _FORMATS:
        raise ConfigError(f"format must be one of {_FORMATS}, got {fmt!r}")
    return fmt


def _parse_out(cfg: dict, override: Optional[str]) -> Optional[str]:
    out = override if override is not None else cfg.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a string path")
    return out


def _max_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as handle:
            handle.write(text)


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _trajectory_csv(
    primary: Trajectory,
    numeric: Optional[Trajectory] = None,
    max_abs_diff: Optional[float] = None,
) -> str:
    header = _TRAJECTORY_HEADER
    if numeric is not None:
        header += "," + _NUMERIC_EXTRA_HEADER
    lines = [header]
    for i, t in enumerate(primary.times):
        r12 = primary.data[i, 1]
        fields = [
            _fmt(t),
            _fmt(primary.data[i, 0].real),
            _fmt(primary.data[i, 3].real),
            _fmt(r12.real),
            _fmt(r12.imag),
            _fmt(abs(r12)),
        ]
        if numeric is not None:
            n12 = numeric.data[i, 1]
            fields += [
                _fmt(numeric.data[i, 0].real),
                _fmt(numeric.data[i, 3].real),
                _fmt(n12.real),
                _fmt(n12.imag),
                _fmt(abs(n12)),
            ]
        lines.append(",".join(fields))
    if max_abs_diff is not None:
        lines.append(f"# max_abs_diff={_fmt(max_abs_diff)}")
    return "\n".join(lines) + "\n"


def _trajectory_rows_json(primary: Trajectory, numeric: Optional[Trajectory]) -> list:
    rows = []
    for i, t in enumerate(primary.times):
        r12 = primary.data[i, 1]
        row = {
            "t": float(t),
            "rho11": float(primary.data[i, 0].real),
            "rho22": float(primary.data[i, 3].real),
            "re_rho12": float(r12.real),
            "im_rho12": float(r12.imag),
            "abs_rho12": float(abs(r12)),
        }
        if numeric is not None:
            n12 = numeric.data[i, 1]
            row.update(
                rho11_numeric=float(numeric.data[i, 0].real),
                rho22_numeric=float(numeric.data[i, 3].real),
                re_rho12_numeric=float(n12.real),
                im_rho12_numeric=float(n12.imag),
                abs_rho12_numeric=float(abs(n12)),
            )
        rows.append(row)
    return rows


def cmd_spectral(cfg: dict, out: Optional[str], fmt: str) -> None:
    bath = _parse_bath(cfg)
    grid = cfg.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("spectral needs a 'grid' object {omega_min, omega_max, count}")
    _check_keys(grid, {"omega_min", "omega_max", "count"}, "grid")
    for key in ("omega_min", "omega_max", "count"):
        if key not in grid:
            raise ConfigError(f"grid.{key} is required")
    omega_min = _number(grid, "omega_min", "grid")
    omega_max = _number(grid, "omega_max", "grid")
    count = _integer(grid, "count", "grid")
    if omega_min < 0 or omega_max <= omega_min or count < 2:
        raise ConfigError("grid needs 0 <= omega_min < omega_max and count >= 2")

    omegas = np.linspace(omega_min, omega_max, count)
    values = [spectral_density(bath, float(w)) for w in omegas]

    meta = {
        "command": "spectral",
        "bath": bath_to_dict(bath),
        "grid": {"omega_min": omega_min, "omega_max": omega_max, "count": count},
        "format": fmt,
        "out": out,
    }
    if fmt == "csv":
        lines = ["omega,J"]
        lines += [f"{_fmt(w)},{_fmt(j)}" for w, j in zip(omegas, values)]
        _emit("\n".join(lines) + "\n", out)
    else:
        rows = [{"omega": float(w), "J": float(j)} for w, j in zip(omegas, values)]
        _emit(_json_text({"meta": meta, "rows": rows}), out)


def _evolve_pieces(cfg: dict):
    """Shared evolve/t2 resolution: bath, temperature, qubit and chi."""
    bath = _parse_bath(cfg)
    temperature = _parse_temperature(cfg)
    tc = _resolve_tc(cfg, bath)
    eig = diagonalize(QubitParams(tunneling_Tc=tc))
    rate = chi_rate(eig, bath, temperature)
    return bath, temperature, tc, eig, rate


def _run_engines(eig, bath, temperature, rate, engine, t_end, n_steps, store_every):
    times = time_grid(t_end, n_steps, store_every)
    closed = numeric = None
    max_abs_diff = None
    if engine in ("closed_form", "both"):
        closed = closed_form_trajectory(rate, times)
    if engine in ("numeric", "both"):
        tensor = build_tensor(eig, bath, temperature)
        numeric = propagate_numeric(tensor, eig, initial_state(), t_end, n_steps, store_every)
    if engine == "both":
        max_abs_diff = float(np.max(np.abs(closed.data - numeric.data)))
    return closed, numeric, max_abs_diff


def cmd_evolve(cfg: dict, out: Optional[str], engine: str, fmt: str) -> None:
    bath, temperature, tc, eig, rate = _evolve_pieces(cfg)
    t_end, n_steps, store_every = _parse_time_grid(cfg, required=True)
    closed, numeric, max_abs_diff = _run_engines(
        eig, bath, temperature, rate, engine, t_end, n_steps, store_every
    )
    primary = closed if closed is not None else numeric
    secondary = numeric if engine == "both" else None

    meta = {
        "command": "evolve",
        "bath": bath_to_dict(bath),
        "qubit": {"tunneling_Tc": tc},
        "temperature_K": temperature,
        "t_end": t_end,
        "n_steps": n_steps,
        "store_every": store_every,
        "engine": engine,
        "format": fmt,
        "out": out,
    }
    if fmt == "csv":
        _emit(_trajectory_csv(primary, secondary, max_abs_diff), out)
    else:
        doc = {"meta": meta, "rows": _trajectory_rows_json(primary, secondary)}
        if max_abs_diff is not None:
            doc["max_abs_diff"] = max_abs_diff
        _emit(_json_text(doc), out)


def cmd_t2(cfg: dict, out: Optional[str], engine: str, fmt: str) -> None:
    bath, temperature, tc, eig, rate = _evolve_pieces(cfg)
    t_end, n_steps, store_every = _parse_time_grid(cfg, required=False)
    t2_analytic = decoherence_time_analytic(rate)
    t2_empirical = None
    if t_end is not None:
        closed, numeric, _ = _run_engines(
            eig, bath, temperature, rate, engine, t_end, n_steps, store_every
        )
        t2_empirical = decoherence_time_empirical(numeric if numeric is not None else closed)

    meta = {
        "command": "t2",
        "bath": bath_to_dict(bath),
        "qubit": {"tunneling_Tc": tc},
        "temperature_K": temperature,
        "t_end": t_end,
        "n_steps": n_steps,
        "store_every": store_every,
        "engine": engine,
        "format": fmt,
        "out": out,
    }
    row = {
        "omega_21": eig.omega_21,
        "temperature_K": temperature,
        "chi": rate.chi,
        "n_occ": rate.n_occ,
        "t2_analytic": t2_analytic,
        "t2_empirical": t2_empirical,
    }
    if fmt == "csv":
        fields = [
            _fmt(row["omega_21"]),
            _fmt(row["temperature_K"]),
            _fmt(row["chi"]),
            _fmt(row["n_occ"]),
            _fmt(row["t2_analytic"]),
            "" if t2_empirical is None else _fmt(t2_empirical),
        ]
        header = "omega_21,temperature_K,chi,n_occ,t2_analytic,t2_empirical"
        _emit(header + "\n" + ",".join(fields) + "\n", out)
    else:
        _emit(_json_text({"meta": meta, "rows": [row]}), out)


def _parse_sweep_block(cfg: dict) -> tuple[str, tuple[float, ...]]:
    block = cfg.get("sweep")
    if not isinstance(block, dict):
        raise ConfigError("sweep needs a 'sweep' object {parameter, values}")
    _check_keys(block, {"parameter", "values"}, "sweep")
    parameter = block.get("parameter")
    if parameter not in ("omega_l", "eta", "temperature"):
        raise ConfigError(f"sweep.parameter must be omega_l, eta or temperature, got {parameter!r}")
    values = block.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a non-empty list of numbers")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"sweep.values entries must be numbers, got {v!r}")
    return parameter, tuple(float(v) for v in values)


def _parse_trajectories_block(cfg: dict) -> tuple[bool, int]:
    block = cfg.get("trajectories")
    if block is None:
        return False, 1
    if not isinstance(block, dict):
        raise ConfigError("trajectories must be an object {write, every}")
    _check_keys(block, {"write", "every"}, "trajectories")
    write = block.get("write", False)
    if not isinstance(write, bool):
        raise ConfigError("trajectories.write must be a boolean")
    every = _integer(block, "every", "trajectories") if "every" in block else 1
    if every < 1:
        raise ConfigError("trajectories.every must be >= 1")
    return write, every


def cmd_sweep(cfg: dict, out: Optional[str], engine: str, fmt: str) -> None:
    bath = _parse_bath(cfg)
    parameter, values = _parse_sweep_block(cfg)
    temperature = _parse_temperature(cfg, required=(parameter != "temperature"))
    tc = _parse_qubit(cfg, bath) if (parameter == "omega_l" or "qubit" in cfg) else None
    if tc is None and parameter != "omega_l" and isinstance(bath, OhmicBath):
        raise ConfigError(
            "the Ohmic bath carries no omega_l; give qubit.tunneling_Tc or qubit.omega_l"
        )
    t_end, n_steps, store_every = _parse_time_grid(cfg, required=False)
    write_traj, keep_every = _parse_trajectories_block(cfg)
    if write_traj and out is None:
        raise ConfigError("writing sweep trajectories requires --out (files go next to it)")
    if write_traj and t_end is None:
        raise ConfigError("writing sweep trajectories requires a time grid (t_end, n_steps)")

    kind = bath_to_dict(bath)["kind"]
    try:
        spec = SweepSpec(
            bath_family=kind,
            swept_parameter=parameter,
            values=values,
            base_bath=bath,
            temperature=temperature,
            tunneling_Tc=tc,
            t_end=t_end,
            n_steps=n_steps,
            store_every=store_every,
            engine=engine,
            keep_trajectories=write_traj,
            keep_every=keep_every,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    result = run_sweep(spec, max_workers=_max_workers())

    trajectory_names: list[Optional[str]] = []
    if write_traj:
        out_path = Path(out)
        for point in result.points:
            name = f"{out_path.stem}_point{point.index}.csv"
            primary = (
                point.trajectory_closed
                if point.trajectory_closed is not None
                else point.trajectory_numeric
            )
            secondary = point.trajectory_numeric if spec.engine == "both" else None
            _emit(
                _trajectory_csv(primary, secondary, point.max_abs_diff),
                str(out_path.with_name(name)),
            )
            trajectory_names.append(name)
    else:
        trajectory_names = [None] * len(result.points)

    meta = {
        "command": "sweep",
        "bath": bath_to_dict(bath),
        "qubit": None if tc is None else {"tunneling_Tc": tc},
        "temperature_K": temperature,
        "sweep": {"parameter": parameter, "values": list(values)},
        "t_end": t_end,
        "n_steps": n_steps,
        "store_every": store_every,
        "trajectories": {"write": write_traj, "every": keep_every},
        "engine": engine,
        "format": fmt,
        "out": out,
    }
    if fmt == "csv":
        lines = [
            "index,parameter,value,omega_21,temperature_K,chi,n_occ,"
            "t2_analytic,t2_empirical,max_abs_diff,trajectory"
        ]
        for point, name in zip(result.points, trajectory_names):
            lines.append(
                ",".join(
                    [
                        str(point.index),
                        point.parameter,
                        _fmt(point.value),
                        _fmt(point.omega_21),
                        _fmt(point.temperature),
                        _fmt(point.chi),
                        _fmt(point.n_occ),
                        _fmt(point.t2_analytic),
                        "" if point.t2_empirical is None else _fmt(point.t2_empirical),
                        "" if point.max_abs_diff is None else _fmt(point.max_abs_diff),
                        name or "",
                    ]
                )
            )
        _emit("\n".join(lines) + "\n", out)
    else:
        rows = []
        for point, name in zip(result.points, trajectory_names):
            rows.append(
                {
                    "index": point.index,
                    "parameter": point.parameter,
                    "value": point.value,
                    "omega_21": point.omega_21,
                    "temperature_K": point.temperature,
                    "chi": point.chi,
                    "n_occ": point.n_occ,
                    "t2_analytic": point.t2_analytic,
                    "t2_empirical": point.t2_empirical,
                    "max_abs_diff": point.max_abs_diff,
                    "trajectory": name,
                }
            )
        _emit(_json_text({"meta": meta, "rows": rows}), out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Charge-qubit decoherence: spectral densities, Redfield dynamics, T2 sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("spectral", "tabulate the bath spectral density J(omega)"),
        ("evolve", "evolve the density matrix on a time grid"),
        ("t2", "compute decoherence times for one parameter set"),
        ("sweep", "sweep omega_l, eta or temperature"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", default=None, choices=_FORMATS, help="override config format")
        if name != "spectral":
            p.add_argument(
                "--engine", default=None, choices=_ENGINES, help="override config engine"
            )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        cfg = _load_config(args.config)
        _check_keys(cfg, _ALLOWED_KEYS[args.command], "config")
        fmt = _parse_format(cfg, args.format)
        out = _parse_out(cfg, args.out)
        if args.command == "spectral":
            cmd_spectral(cfg, out, fmt)
        else:
            engine = _parse_engine(cfg, args.engine)
            if args.command == "evolve":
                cmd_evolve(cfg, out, engine, fmt)
            elif args.command == "t2":
                cmd_t2(cfg, out, engine, fmt)
            else:
                cmd_sweep(cfg, out, engine, fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        if isinstance(exc.cause, ConfigError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        done = len(exc.partial.points)
        print(f"sweep aborted after {done} completed point(s): {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (StepSizeError, NoDecoherenceError, TrajectoryTooShortError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
