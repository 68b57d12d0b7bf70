"""Command-line front end: config ingestion, experiment commands, CSV output.

Configs are TOML with strict unknown-key rejection; every command's output is
reproducible from the config bytes, the flags, and the pilot seed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import sys
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analysis, geometry, signal
from .errors import ConfigParseError, GeometryError
from .fim import PERFECT, PriorSpec, VaPrior
from .geometry import Point2, Reflector, Scenario
from .signal import OfdmConfig

EIGEN_COLUMNS = ("sigma_ref", "lambda1", "lambda2", "dir1_deg", "dir2_deg",
                 "scenario_hash", "pilot_seed")
PEB_COLUMNS = ("sigma_ref", "case", "peb_rx", "peb_va1", "singular",
               "scenario_hash", "pilot_seed")


# ---------------------------------------------------------------------------
# config parsing


def _reject_unknown(table: dict, allowed, where: str):
    for key in table:
        if key not in allowed:
            raise ConfigParseError(f"{where}: unknown key {key!r}")


def _get(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigParseError(f"{where}: missing required key {key!r}")
    return table[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _boolean(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigParseError(f"{where}: expected a boolean, got {value!r}")
    return value


def _pair(value, where: str):
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigParseError(f"{where}: expected a pair [x, y]")
    return [_number(v, where) for v in value]


def _build_array(table, where: str, wavelength: float, rotation: float):
    if not isinstance(table, dict):
        raise ConfigParseError(f"{where}: expected a table")
    kind = _get(table, "type", where)
    n = _integer(_get(table, "n_elements", where), f"{where}.n_elements")
    if kind == "ula":
        _reject_unknown(table, {"type", "n_elements", "spacing_m"}, where)
        spacing = _number(table.get("spacing_m", wavelength / 2.0), f"{where}.spacing_m")
        return geometry.ula_array(n, spacing, axis_angle=rotation)
    if kind == "uca":
        _reject_unknown(table, {"type", "n_elements", "radius_m"}, where)
        default_radius = wavelength / (4.0 * math.sin(math.pi / n)) if n > 1 else 0.0
        radius = _number(table.get("radius_m", default_radius), f"{where}.radius_m")
        return geometry.uca_array(n, radius, phase=rotation)
    raise ConfigParseError(f"{where}.type: expected 'ula' or 'uca', got {kind!r}")


def _parse_prior(value, where: str):
    if value == "none":
        return None
    if value == "perfect":
        return PERFECT
    if isinstance(value, dict):
        _reject_unknown(value, {"sigma_par_m", "sigma_perp_m", "rho"}, where)
        try:
            return VaPrior(
                _number(_get(value, "sigma_par_m", where), f"{where}.sigma_par_m"),
                _number(_get(value, "sigma_perp_m", where), f"{where}.sigma_perp_m"),
                _number(value.get("rho", 0.0), f"{where}.rho"),
            )
        except ValueError as exc:
            raise ConfigParseError(f"{where}: {exc}") from None
    raise ConfigParseError(
        f"{where}: expected 'none', 'perfect' or a table with sigma_par_m/sigma_perp_m/rho"
    )


@dataclass(frozen=True, eq=False)
class LoadedConfig:
    """Everything a command needs, derived from one config file."""

    scenario: Scenario
    ofdm: OfdmConfig
    priors: PriorSpec  # priors for the active paths, config values
    reflector_gammas: tuple
    config_hash: str

    def priors_by_path(self):
        """Mirror-point prior per active path; None for the direct path."""
        result, nlos = [], 0
        for path in geometry.scenario_paths(self.scenario):
            if path.is_los:
                result.append(None)
            else:
                result.append(self.priors.va[nlos])
                nlos += 1
        return result


def load_config(path: str) -> LoadedConfig:
    """Parse and validate a TOML scenario file.

    Raises ConfigParseError for malformed or unknown content and GeometryError
    when the described scene admits no valid path.
    """
    try:
        with open(path, "rb") as handle:
            raw = handle.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path!r}: {exc}") from None
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigParseError(f"{path}: {exc}") from None

    _reject_unknown(doc, {"ofdm", "tx", "rx", "clock", "reflectors", "paths"}, path)

    ofdm_tab = _get(doc, "ofdm", path)
    _reject_unknown(
        ofdm_tab,
        {"f_c_hz", "n_subcarriers", "delta_f_hz", "pilot_index_min", "pilot_index_max",
         "tx_power_dbm", "noise_figure_db", "n0_dbm_hz", "pilot_seed"},
        "[ofdm]",
    )
    p_min = _integer(_get(ofdm_tab, "pilot_index_min", "[ofdm]"), "[ofdm].pilot_index_min")
    p_max = _integer(_get(ofdm_tab, "pilot_index_max", "[ofdm]"), "[ofdm].pilot_index_max")
    if p_min > p_max:
        raise ConfigParseError("[ofdm]: pilot_index_min exceeds pilot_index_max")
    subcarriers = tuple(p for p in range(p_min, p_max + 1) if p != 0)
    if not subcarriers:
        raise ConfigParseError("[ofdm]: pilot index range contains no usable subcarrier")
    try:
        ofdm = OfdmConfig(
            f_c_hz=_number(_get(ofdm_tab, "f_c_hz", "[ofdm]"), "[ofdm].f_c_hz"),
            n_subcarriers=_integer(
                _get(ofdm_tab, "n_subcarriers", "[ofdm]"), "[ofdm].n_subcarriers"
            ),
            delta_f_hz=_number(_get(ofdm_tab, "delta_f_hz", "[ofdm]"), "[ofdm].delta_f_hz"),
            subcarriers=subcarriers,
            tx_power_dbm=_number(
                _get(ofdm_tab, "tx_power_dbm", "[ofdm]"), "[ofdm].tx_power_dbm"
            ),
            noise_figure_db=_number(
                _get(ofdm_tab, "noise_figure_db", "[ofdm]"), "[ofdm].noise_figure_db"
            ),
            noise_density_dbm_hz=_number(
                _get(ofdm_tab, "n0_dbm_hz", "[ofdm]"), "[ofdm].n0_dbm_hz"
            ),
            pilot_seed=_integer(ofdm_tab.get("pilot_seed", 0), "[ofdm].pilot_seed"),
        )
    except ValueError as exc:
        raise ConfigParseError(f"[ofdm]: {exc}") from None

    def parse_terminal(name: str):
        tab = _get(doc, name, path)
        _reject_unknown(tab, {"position_m", "orientation_rad", "array"}, f"[{name}]")
        pos = _pair(_get(tab, "position_m", f"[{name}]"), f"[{name}].position_m")
        orient = _number(tab.get("orientation_rad", 0.0), f"[{name}].orientation_rad")
        return Point2(*pos), orient, _get(tab, "array", f"[{name}]")

    tx_pos, tx_orient, tx_array_tab = parse_terminal("tx")
    rx_pos, rx_orient, rx_array_tab = parse_terminal("rx")
    # The Tx frame is the global frame, so its orientation rotates the physical
    # array. The Rx orientation is the unknown alpha; its array is laid out in
    # the local Rx frame.
    tx_array = _build_array(tx_array_tab, "[tx].array", ofdm.wavelength, tx_orient)
    rx_array = _build_array(rx_array_tab, "[rx].array", ofdm.wavelength, 0.0)

    clock_tab = doc.get("clock", {})
    _reject_unknown(clock_tab, {"d_clk_m", "sigma_clk_s"}, "[clock]")
    d_clk = _number(clock_tab.get("d_clk_m", 0.0), "[clock].d_clk_m")
    clock_sigma = clock_tab.get("sigma_clk_s", "none")
    if clock_sigma == "none":
        clock_sigma = None
    elif clock_sigma == "perfect":
        clock_sigma = PERFECT
    else:
        clock_sigma = _number(clock_sigma, "[clock].sigma_clk_s")
        if clock_sigma <= 0:
            raise ConfigParseError("[clock].sigma_clk_s: must be positive")

    reflectors, gammas, reflector_priors = [], [], []
    for i, tab in enumerate(doc.get("reflectors", [])):
        where = f"[[reflectors]] #{i}"
        _reject_unknown(tab, {"anchor_point_m", "normal_angle_rad", "gamma", "prior"}, where)
        anchor = _pair(_get(tab, "anchor_point_m", where), f"{where}.anchor_point_m")
        normal = _number(_get(tab, "normal_angle_rad", where), f"{where}.normal_angle_rad")
        gamma = _number(tab.get("gamma", 1.0), f"{where}.gamma")
        if not (0.0 < gamma <= 1.0):
            raise ConfigParseError(f"{where}.gamma: must be in (0, 1]")
        reflectors.append(Reflector(Point2(*anchor), normal))
        gammas.append(gamma)
        reflector_priors.append(_parse_prior(tab.get("prior", "none"), f"{where}.prior"))

    paths_tab = doc.get("paths", {})
    _reject_unknown(paths_tab, {"include_los", "reflector_indices"}, "[paths]")
    include_los = _boolean(paths_tab.get("include_los", True), "[paths].include_los")
    indices = paths_tab.get("reflector_indices", list(range(len(reflectors))))
    if not isinstance(indices, list):
        raise ConfigParseError("[paths].reflector_indices: expected a list")
    indices = tuple(_integer(i, "[paths].reflector_indices") for i in indices)
    for i in indices:
        if not (0 <= i < len(reflectors)):
            raise ConfigParseError(f"[paths].reflector_indices: index {i} out of range")
    if not include_los and not indices:
        raise ConfigParseError("[paths]: at least one active path is required")

    try:
        scenario = Scenario(
            tx_position=tx_pos,
            tx_array=tx_array,
            rx_position=rx_pos,
            rx_array=rx_array,
            rx_orientation=rx_orient,
            clock_offset_m=d_clk,
            reflectors=tuple(reflectors),
            include_los=include_los,
            active_reflectors=indices,
        )
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from None

    priors = PriorSpec(
        clock_sigma_s=clock_sigma,
        va=tuple(reflector_priors[i] for i in indices),
    )
    return LoadedConfig(
        scenario=scenario,
        ofdm=ofdm,
        priors=priors,
        reflector_gammas=tuple(gammas),
        config_hash=hashlib.sha256(raw).hexdigest()[:12],
    )


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return format(value, ".12g")


def write_eigen_csv(path: str, rows, config_hash: str, pilot_seed: int):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EIGEN_COLUMNS)
        for row in rows:
            writer.writerow(
                [_fmt(row.sigma_ref), _fmt(row.lambda1), _fmt(row.lambda2),
                 _fmt(row.dir1_deg), _fmt(row.dir2_deg), config_hash, str(pilot_seed)]
            )


def write_peb_csv(path: str, rows, config_hash: str, pilot_seed: int):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PEB_COLUMNS)
        for row in rows:
            writer.writerow(
                [_fmt(row.sigma_ref), row.case, _fmt(row.peb_rx), _fmt(row.peb_va1),
                 str(int(row.singular)), config_hash, str(pilot_seed)]
            )


def _describe_prior(value) -> str:
    if value is None:
        return "none"
    if value is PERFECT:
        return "perfect"
    if isinstance(value, VaPrior):
        return (f"sigma_par={value.sigma_par:.6g} m, "
                f"sigma_perp={value.sigma_perp:.6g} m, rho={value.rho:.6g}")
    return f"sigma={value:.6g} s"


def cmd_describe(loaded: LoadedConfig, out=None) -> int:
    out = out if out is not None else sys.stdout
    scenario, ofdm = loaded.scenario, loaded.ofdm
    print(f"scenario {loaded.config_hash}", file=out)
    print(
        f"tx: position=({scenario.tx_position.x:.6g}, {scenario.tx_position.y:.6g}) m, "
        f"array={scenario.tx_array.kind} n={scenario.tx_array.n_elements}",
        file=out,
    )
    print(
        f"rx: position=({scenario.rx_position.x:.6g}, {scenario.rx_position.y:.6g}) m, "
        f"orientation={scenario.rx_orientation:.6g} rad, "
        f"array={scenario.rx_array.kind} n={scenario.rx_array.n_elements}",
        file=out,
    )
    print(
        f"clock: offset={scenario.clock_offset_m:.6g} m, "
        f"prior={_describe_prior(loaded.priors.clock_sigma_s)}",
        file=out,
    )
    for path, prior in zip(geometry.scenario_paths(scenario), loaded.priors_by_path()):
        if path.is_los:
            print(
                f"path {path.index} (direct): d={path.d:.6g} m, tau={path.tau:.6g} s, "
                f"aod={path.theta_tx:.6g} rad, aoa={path.theta_rx:.6g} rad",
                file=out,
            )
        else:
            print(
                f"path {path.index} (reflector {path.reflector_index}): "
                f"d={path.d:.6g} m, tau={path.tau:.6g} s, "
                f"aod={path.theta_tx:.6g} rad, aoa={path.theta_rx:.6g} rad, "
                f"va=({path.p_va.x:.6g}, {path.p_va.y:.6g}) m, "
                f"bounce=({path.p_s.x:.6g}, {path.p_s.y:.6g}) m, "
                f"prior={_describe_prior(prior)}",
                file=out,
            )
    frac_bw, lam_over_d, ok = signal.narrowband_check(
        ofdm, scenario.tx_array, scenario.rx_array
    )
    verdict = "ok" if ok else "violated"
    print(
        f"narrowband check: {verdict} "
        f"(fractional bandwidth {frac_bw:.6g}, wavelength/aperture {lam_over_d:.6g})",
        file=out,
    )
    print(f"noise variance: {signal.noise_variance(ofdm):.6g} mW", file=out)
    return 0


def _grid_from_args(args) -> analysis.SweepGrid:
    try:
        return analysis.default_grid(args.points, args.sigma_min, args.sigma_max)
    except ValueError as exc:
        raise ConfigParseError(f"grid flags: {exc}") from None


def cmd_eigen_sweep(loaded: LoadedConfig, args) -> int:
    grid = _grid_from_args(args)
    rows = analysis.eigen_sweep(loaded.scenario, loaded.ofdm, grid, loaded.reflector_gammas)
    write_eigen_csv(args.out, rows, loaded.config_hash, loaded.ofdm.pilot_seed)
    return 0


def cmd_peb_sweep(loaded: LoadedConfig, args) -> int:
    grid = _grid_from_args(args)
    rows = analysis.peb_sweep(
        loaded.scenario, loaded.ofdm, grid, args.case, loaded.reflector_gammas
    )
    write_peb_csv(args.out, rows, loaded.config_hash, loaded.ofdm.pilot_seed)
    return 0


def cmd_validate(args) -> int:
    report = analysis.validation_report(args.trials, args.seed, args.tolerance_scale)
    print(report.format())
    return 0 if report.passed else 1


def _add_grid_flags(parser):
    parser.add_argument("--sigma-min", type=float, default=1e-3,
                        help="smallest prior accuracy sigma_ref in meters")
    parser.add_argument("--sigma-max", type=float, default=1e3,
                        help="largest prior accuracy sigma_ref in meters")
    parser.add_argument("--points", type=int, default=61,
                        help="number of log-spaced grid points")
    parser.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reflectinfo",
        description="Fisher-information positioning bounds for single-anchor "
                    "scenes with single-bounce reflections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="print derived geometry and signal levels")
    p.add_argument("config")

    p = sub.add_parser("eigen-sweep",
                       help="eigen-structure of the first bounce path's position "
                            "information vs prior accuracy")
    p.add_argument("config")
    _add_grid_flags(p)

    p = sub.add_parser("peb-sweep", help="Rx and mirror-point PEB vs prior accuracy")
    p.add_argument("config")
    p.add_argument("--case", required=True, choices=sorted(analysis.CASE_REFLECTORS),
                   help="two-path case: A = first+second reflector, B = first+third")
    _add_grid_flags(p)

    p = sub.add_parser("validate", help="cross-check closed forms against the "
                                        "numerical Schur-complement machinery")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help=argparse.SUPPRESS)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        loaded = load_config(args.config)
        if args.command == "describe":
            return cmd_describe(loaded)
        if args.command == "eigen-sweep":
            return cmd_eigen_sweep(loaded, args)
        if args.command == "peb-sweep":
            return cmd_peb_sweep(loaded, args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
