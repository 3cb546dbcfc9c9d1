"""Config-driven command line runner.

Verbs:
  run <config> [--out DIR]     build densities, resolve mode sets, propagate
  fixtures list|emit <dir>     bundled pre-fitted mode tables
  fit <jsc.csv> --modes N      fit a stored density grid to discrete modes
  compare <a.csv> <b.csv>      deviation metrics between two trace files

Configs are flat ``key = value`` text; vectors are comma-separated, booleans
true/false, comments start with #.  A bare config name (no path separator, no
extension) resolves against the configs bundled with the package.  All output
files are deterministic: same config and inputs give byte-identical bytes.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .core import (
    ConfigParseError,
    Emitter,
    Environment,
    Scenario,
    SimulationError,
    validate_scenario,
)
from . import fixtures
from .dynamics import (
    PopulationTrace,
    compare_traces,
    propagate_cqed,
    propagate_cqed_ddi,
    propagate_mqed_dmma,
    propagate_mqed_wf,
    time_grid,
)
from .modefit import (
    effective_total_density,
    fit_modes,
    read_mode_file,
    write_mode_file,
)
from .spectral import SpectralDensityGrid, rate_and_shift_matrices, spectral_density

METHODS = ("cqed_ddi", "cqed", "mqed_wf", "mqed_dmma")

_KNOWN_KEYS = {
    "environment", "plasma_energy_ev", "damping_energy_ev", "eps_inf",
    "interface_z_nm", "omega_min_ev", "omega_max_ev", "n_omega",
    "compute_scattering", "n_modes", "fit_seed", "mode_fixture",
    "mode_file_scattering", "mode_file_total", "methods", "t_max_fs", "dt_fs",
    "rwa", "counter_rotating", "initial_emitter", "output_dir",
}
_EMITTER_FIELDS = ("position_nm", "energy_ev", "dipole_debye")


def _parse_bool(raw: str, key: str, line_no: int) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigParseError(f"line {line_no}: field '{key}' expects a boolean, got {raw!r}")


def _parse_floats(raw: str, key: str, line_no: int, n: int) -> tuple:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != n:
        raise ConfigParseError(
            f"line {line_no}: field '{key}' expects {n} comma-separated values, got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigParseError(f"line {line_no}: field '{key}' has a non-numeric entry") from None


def parse_config(path: str) -> dict:
    """Flat key=value file to a dict of typed settings with defaults applied."""
    raw = {}
    lines = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigParseError(f"line {ln}: expected 'key = value', got {stripped!r}")
            key, _, val = stripped.partition("=")
            key = key.strip()
            val = val.split("#", 1)[0].strip()
            if key in raw:
                raise ConfigParseError(f"line {ln}: duplicate key '{key}'")
            raw[key] = val
            lines[key] = ln

    emitters = []
    idx = 1
    while f"emitter{idx}_position_nm" in raw or f"emitter{idx}_energy_ev" in raw:
        pos_key = f"emitter{idx}_position_nm"
        en_key = f"emitter{idx}_energy_ev"
        dip_key = f"emitter{idx}_dipole_debye"
        if pos_key not in raw:
            raise ConfigParseError(f"field '{pos_key}' is required for emitter {idx}")
        if en_key not in raw:
            raise ConfigParseError(f"field '{en_key}' is required for emitter {idx}")
        pos = _parse_floats(raw.pop(pos_key), pos_key, lines[pos_key], 3)
        try:
            energy = float(raw.pop(en_key))
        except ValueError:
            raise ConfigParseError(
                f"line {lines[en_key]}: field '{en_key}' must be a number") from None
        if dip_key in raw:
            dip = _parse_floats(raw.pop(dip_key), dip_key, lines[dip_key], 3)
        else:
            dip = (0.0, 0.0, 10.0)
        emitters.append(Emitter(position_nm=pos, energy_ev=energy, dipole_debye=dip))
        idx += 1
    if not emitters:
        raise ConfigParseError("no emitters defined (need at least 'emitter1_position_nm' "
                               "and 'emitter1_energy_ev')")

    for key in raw:
        if key not in _KNOWN_KEYS:
            ln = lines[key]
            if key.startswith("emitter"):
                raise ConfigParseError(
                    f"line {ln}: field '{key}' does not fit emitter<N>_<field> with "
                    f"contiguous N (emitters found: {len(emitters)})")
            raise ConfigParseError(f"line {ln}: unknown field '{key}'")

    def get(key, default=None):
        return raw.get(key, default)

    env_name = get("environment", "free_space").lower()
    if env_name in ("free_space", "freespace", "vacuum"):
        environment = Environment.free_space()
    elif env_name == "drude":
        for req in ("plasma_energy_ev", "damping_energy_ev"):
            if req not in raw:
                raise ConfigParseError(f"field '{req}' is required for environment = drude")
        environment = Environment.drude_half_space(
            float(raw["plasma_energy_ev"]), float(raw["damping_energy_ev"]),
            eps_inf=float(get("eps_inf", 1.0)),
            interface_z_nm=float(get("interface_z_nm", 0.0)))
    else:
        raise ConfigParseError(
            f"line {lines['environment']}: field 'environment' must be "
            f"'free_space' or 'drude', got {env_name!r}")

    scenario = validate_scenario(tuple(emitters), environment)

    methods_raw = get("methods", ",".join(METHODS))
    methods = tuple(m.strip() for m in methods_raw.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            ln = lines.get("methods", 0)
            raise ConfigParseError(
                f"line {ln}: field 'methods' names unknown method '{m}' "
                f"(known: {', '.join(METHODS)})")

    w_mean = float(np.mean([e.energy_ev for e in emitters]))
    omega_min = float(get("omega_min_ev", max(w_mean - 1.5, 1e-6)))
    omega_max = float(get("omega_max_ev", w_mean + 1.5))
    if omega_min <= 0 or omega_max <= omega_min:
        raise ConfigParseError("frequency window must satisfy 0 < omega_min_ev < omega_max_ev")

    cfg = {
        "scenario": scenario,
        "methods": methods,
        "omega_min_ev": omega_min,
        "omega_max_ev": omega_max,
        "n_omega": int(get("n_omega", 2000)),
        "compute_scattering": _parse_bool(get("compute_scattering", "true"),
                                          "compute_scattering",
                                          lines.get("compute_scattering", 0)),
        "n_modes": int(get("n_modes", 0)),
        "fit_seed": int(get("fit_seed", 0)),
        "mode_fixture": get("mode_fixture"),
        "mode_file_scattering": get("mode_file_scattering"),
        "mode_file_total": get("mode_file_total"),
        "t_max_fs": float(get("t_max_fs", 200.0)),
        "dt_fs": float(get("dt_fs", 0.05)),
        "rwa": _parse_bool(get("rwa", "true"), "rwa", lines.get("rwa", 0)),
        "counter_rotating": _parse_bool(get("counter_rotating", "true"),
                                        "counter_rotating",
                                        lines.get("counter_rotating", 0)),
        "initial_emitter": int(get("initial_emitter", 1)),
        "output_dir": get("output_dir"),
    }
    if cfg["n_omega"] < 8:
        raise ConfigParseError("field 'n_omega' must be at least 8")
    if not (1 <= cfg["initial_emitter"] <= len(emitters)):
        raise ConfigParseError(
            f"field 'initial_emitter' must be in 1..{len(emitters)}")
    if cfg["mode_fixture"] is not None and cfg["mode_fixture"] not in fixtures.FIXTURE_IDS:
        raise ConfigParseError(
            f"field 'mode_fixture' names unknown fixture '{cfg['mode_fixture']}' "
            f"(known: {', '.join(fixtures.FIXTURE_IDS)})")
    return cfg


def _resolve_config_path(name: str) -> str:
    if os.path.exists(name):
        return name
    if os.sep not in name and "." not in name:
        bundled = os.path.join(os.path.dirname(__file__), "data", "configs", name + ".cfg")
        if os.path.exists(bundled):
            return bundled
    raise ConfigParseError(f"config '{name}' not found (no such file, no bundled config)")


def _write_compare_csv(path: str, traces: dict) -> None:
    lines = ["method_a,method_b,emitter,max_abs_diff,t_at_max_fs,l2"]
    names = list(traces)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            for met in compare_traces(traces[names[i]], traces[names[j]]):
                lines.append(f"{names[i]},{names[j]},{met.emitter},"
                             f"{met.max_abs_diff:.11e},{met.t_at_max_fs:.6f},{met.l2:.11e}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _scenario_log_lines(sc: Scenario) -> list:
    out = []
    for i, em in enumerate(sc.emitters, start=1):
        p = em.position_nm
        d = em.dipole_debye
        out.append(f"emitter{i}_position_nm = {p[0]:.6g}, {p[1]:.6g}, {p[2]:.6g}")
        out.append(f"emitter{i}_energy_ev = {em.energy_ev:.6g}")
        out.append(f"emitter{i}_dipole_debye = {d[0]:.6g}, {d[1]:.6g}, {d[2]:.6g}")
    env = sc.environment
    if env.is_free_space:
        out.append("environment = free_space")
    else:
        out.append("environment = drude")
        out.append(f"plasma_energy_ev = {env.plasma_energy_ev:.6g}")
        out.append(f"damping_energy_ev = {env.damping_energy_ev:.6g}")
        out.append(f"eps_inf = {env.eps_inf:.6g}")
        out.append(f"interface_z_nm = {env.interface_z_nm:.6g}")
    return out


def cmd_run(config_name: str, out_override: str | None) -> int:
    path = _resolve_config_path(config_name)
    cfg = parse_config(path)
    sc = cfg["scenario"]
    base = os.path.splitext(os.path.basename(path))[0]
    outdir = out_override or cfg["output_dir"] or f"{base}_out"
    os.makedirs(outdir, exist_ok=True)
    log = [f"config = {base}"]
    log += _scenario_log_lines(sc)

    omegas = np.linspace(cfg["omega_min_ev"], cfg["omega_max_ev"], cfg["n_omega"])
    log.append(f"omega_min_ev = {cfg['omega_min_ev']:.6g}")
    log.append(f"omega_max_ev = {cfg['omega_max_ev']:.6g}")
    log.append(f"n_omega = {cfg['n_omega']}")
    log.append(f"compute_scattering = {str(cfg['compute_scattering']).lower()}")

    j_sc = None
    if cfg["compute_scattering"]:
        j_sc = spectral_density(sc, omegas, part="scattering")

    # resolve mode sets: fixture > explicit files > fit against the density
    ms_scatter = None
    ms_total = None
    if cfg["mode_fixture"]:
        ms_scatter = fixtures.modeset_for(cfg["mode_fixture"], "scattering")
        ms_total = fixtures.modeset_for(cfg["mode_fixture"], "total")
        log.append(f"mode_fixture = {cfg['mode_fixture']}")
    else:
        if cfg["mode_file_scattering"]:
            ms_scatter = read_mode_file(cfg["mode_file_scattering"])
            log.append(f"mode_file_scattering = {cfg['mode_file_scattering']}")
        if cfg["mode_file_total"]:
            ms_total = read_mode_file(cfg["mode_file_total"])
            log.append(f"mode_file_total = {cfg['mode_file_total']}")

    need_scatter = ms_scatter is None and (
        "cqed_ddi" in cfg["methods"]
        or (not cfg["compute_scattering"] and "mqed_wf" in cfg["methods"]))
    need_total = ms_total is None and "cqed" in cfg["methods"]
    if (need_scatter or need_total) and cfg["n_modes"] < 1:
        raise ConfigParseError(
            "field 'n_modes' is required when mode sets are fitted rather than loaded")
    if need_scatter or need_total:
        if j_sc is None:
            j_sc = spectral_density(sc, omegas, part="scattering")
        log.append(f"n_modes = {cfg['n_modes']}")
        log.append(f"fit_seed = {cfg['fit_seed']}")
    if need_scatter:
        ms_scatter = fit_modes(j_sc, cfg["n_modes"], seed=cfg["fit_seed"],
                               target_part="scattering")
    if need_total:
        j0_vals = spectral_density(sc, omegas, part="free_space").values
        j_tot = SpectralDensityGrid(omegas_ev=omegas, values=j_sc.values + j0_vals,
                                    part="total")
        ms_total = fit_modes(j_tot, cfg["n_modes"], seed=cfg["fit_seed"],
                             target_part="total")

    if ms_scatter is not None:
        write_mode_file(ms_scatter, os.path.join(outdir, "modes.txt"))
        log.append(f"modes_scattering = {ms_scatter.n_modes} modes, "
                   f"fit_rms = {ms_scatter.fit_rms:.6g}")
    if ms_total is not None:
        write_mode_file(ms_total, os.path.join(outdir, "modes_total.txt"))
        log.append(f"modes_total = {ms_total.n_modes} modes, "
                   f"fit_rms = {ms_total.fit_rms:.6g}")

    # the density grid the wavefunction route integrates; also the jsc.csv payload
    if cfg["compute_scattering"]:
        wf_source = j_sc
        log.append("wf_source = computed scattering density")
    else:
        if ms_scatter is None:
            raise ConfigParseError(
                "compute_scattering = false requires a scattering mode set "
                "(mode_fixture or mode_file_scattering) to build the effective density")
        wf_source = effective_total_density(ms_scatter, sc, omegas)
        log.append("wf_source = effective total density (closed-form free-space "
                   "part + fitted modes)")
    wf_source.to_csv(os.path.join(outdir, "jsc.csv"))

    rates = None
    if "cqed_ddi" in cfg["methods"] or "mqed_dmma" in cfg["methods"]:
        rates = rate_and_shift_matrices(sc)
        log.append(f"gamma0_diag_ev = "
                   + ", ".join(f"{rates.gamma0_ev[a, a]:.6g}" for a in range(sc.n_emitters)))
        log.append(f"gamma_total_diag_ev = "
                   + ", ".join(f"{rates.gamma_total_ev[a, a]:.6g}" for a in range(sc.n_emitters)))
        log.append(f"delta_sc_ev = "
                   + ", ".join(f"{rates.delta_sc_ev[a]:.6g}" for a in range(sc.n_emitters)))

    t = time_grid(cfg["t_max_fs"], cfg["dt_fs"])
    log.append(f"t_max_fs = {cfg['t_max_fs']:.6g}")
    log.append(f"dt_fs = {cfg['dt_fs']:.6g}")
    log.append(f"rwa = {str(cfg['rwa']).lower()}")
    log.append(f"counter_rotating = {str(cfg['counter_rotating']).lower()}")
    log.append(f"initial_emitter = {cfg['initial_emitter']}")
    init = cfg["initial_emitter"] - 1

    traces = {}
    for method in cfg["methods"]:
        if method == "cqed_ddi":
            tr = propagate_cqed_ddi(sc, ms_scatter, rates, t, rwa=cfg["rwa"],
                                    initial_emitter=init)
        elif method == "cqed":
            tr = propagate_cqed(sc, ms_total, t, rwa=cfg["rwa"], initial_emitter=init)
        elif method == "mqed_wf":
            tr = propagate_mqed_wf(wf_source, sc, t,
                                   counter_rotating=cfg["counter_rotating"],
                                   initial_emitter=init)
        else:
            tr = propagate_mqed_dmma(sc, rates, t, initial_emitter=init)
        tr.to_csv(os.path.join(outdir, f"trace_{method}.csv"))
        traces[method] = tr
    log.append(f"methods = {', '.join(cfg['methods'])}")

    if len(traces) >= 2:
        _write_compare_csv(os.path.join(outdir, "compare.csv"), traces)

    with open(os.path.join(outdir, "run.log"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(log) + "\n")
    print(f"wrote {len(traces)} trace file(s) to {outdir}")
    return 0


def cmd_fixtures(action: str, outdir: str | None) -> int:
    if action == "list":
        for fid in fixtures.list_fixtures():
            sc = fixtures.scenario_for(fid)
            ms = fixtures.modeset_for(fid, "scattering")
            h = sc.emitters[0].position_nm[2]
            d = (f", d = {sc.emitters[1].position_nm[0]:g} nm"
                 if sc.n_emitters == 2 else "")
            print(f"{fid}: {sc.n_emitters} emitter(s), h = {h:g} nm{d}, "
                  f"{ms.n_modes} modes")
        return 0
    paths = fixtures.emit_fixture_files(outdir)
    print(f"wrote {len(paths)} mode files to {outdir}")
    return 0


def cmd_fit(csv_path: str, n_modes: int, target: str, seed: int, out: str) -> int:
    grid = SpectralDensityGrid.from_csv(csv_path, part=target)
    ms = fit_modes(grid, n_modes, seed=seed, target_part=target)
    write_mode_file(ms, out)
    peak = float(np.max(np.abs(grid.values)))
    print(f"fit: {n_modes} modes, rms = {ms.fit_rms:.6g} 1/fs "
          f"({ms.fit_rms / peak:.3g} of peak), converged = {ms.converged}")
    print(f"wrote {out}")
    return 0


def cmd_compare(path_a: str, path_b: str, out: str | None) -> int:
    tr_a = PopulationTrace.from_csv(path_a, method=os.path.basename(path_a))
    tr_b = PopulationTrace.from_csv(path_b, method=os.path.basename(path_b))
    mets = compare_traces(tr_a, tr_b)
    for met in mets:
        print(f"emitter {met.emitter}: max |dP| = {met.max_abs_diff:.6g} "
              f"at t = {met.t_at_max_fs:.6g} fs, rms = {met.l2:.6g}")
    if out:
        _write_compare_csv(out, {tr_a.method: tr_a, tr_b.method: tr_b})
        print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epsim",
                                 description="emitter-polariton dynamics simulator")
    sub = ap.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config", help="config file path or bundled config name")
    p_run.add_argument("--out", default=None, help="output directory override")

    p_fix = sub.add_parser("fixtures", help="bundled mode tables")
    p_fix.add_argument("action", choices=("list", "emit"))
    p_fix.add_argument("outdir", nargs="?", default=None)

    p_fit = sub.add_parser("fit", help="fit a stored density grid")
    p_fit.add_argument("csv", help="spectral density CSV (omega_eV, J_11, ...)")
    p_fit.add_argument("--modes", type=int, required=True)
    p_fit.add_argument("--target", choices=("scattering", "total"), default="scattering")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", default="modes.txt")

    p_cmp = sub.add_parser("compare", help="compare two trace CSVs")
    p_cmp.add_argument("trace_a")
    p_cmp.add_argument("trace_b")
    p_cmp.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            return cmd_run(args.config, args.out)
        if args.verb == "fixtures":
            if args.action == "emit" and not args.outdir:
                print("ERROR ConfigParseError: fixtures emit needs an output directory",
                      file=sys.stderr)
                return 1
            return cmd_fixtures(args.action, args.outdir)
        if args.verb == "fit":
            return cmd_fit(args.csv, args.modes, args.target, args.seed, args.out)
        return cmd_compare(args.trace_a, args.trace_b, args.out)
    except ConfigParseError as exc:
        print(f"ERROR ConfigParseError: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
