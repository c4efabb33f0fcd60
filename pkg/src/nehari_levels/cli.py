"""Command-line runner: one subcommand per verification, each writing a CSV and a text report.

Exit status: 0 when every recorded check passes, 2 when a check fails,
1 on a computational error, 64 on a bad configuration.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import reports
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NehariLevelsError
from .levels import EnergyLedger
from .minmax import (CHAIN_HEADER, find_beta_zero, inequality_chain_report, scan_levels, sigma_grid)
from .potentials import PotentialSpec

EXIT_OK, EXIT_ERROR, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2, 64


def _write_rows(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _finish(out: Path, name: str, ledger: EnergyLedger, extra: str = "") -> EnergyLedger:
    text = ledger.report()
    if extra:
        text = extra + "\n" + text
    (out / f"{name}.txt").write_text(text + "\n")
    print(f"== {name}")
    print(text)
    return ledger


def run_ground_state(cfg: ExperimentConfig, out: Path, args):
    led, w = reports.ground_state_checks(cfg.params, cfg.r_max, cfg.nodes)
    _write_rows(out / "ground-state.csv", ["r", "w", "dw"], zip(w.grid, w.values, w.derivs))
    led.write_csv(out / "ground-state_checks.csv")
    return _finish(out, "ground-state", led)


def run_decay(cfg, out, args):
    led, w, (c, cp) = reports.decay_checks(cfg.params, cfg.r_max, cfg.nodes)
    _write_rows(out / "decay.csv", ["r", "w", "w_scaled", "dw_scaled"], reports.decay_table(w))
    led.write_csv(out / "decay_checks.csv")
    return _finish(out, "decay", led)


def run_sobolev(cfg, out, args):
    led, S = reports.sobolev_checks(cfg.params.N)
    led.write_csv(out / "sobolev.csv")
    return _finish(out, "sobolev", led)


def run_levels(cfg, out, args):
    led = reports.levels_checks(cfg.params, cfg.eps_list)
    led.write_csv(out / "levels.csv")
    return _finish(out, "levels", led)


def run_interaction(cfg, out, args):
    led, rep = reports.interaction_checks(cfg.params, cfg.rho_list)
    rep.write_csv(out / "interaction.csv")
    led.write_csv(out / "interaction_checks.csv")
    return _finish(out, "interaction", led)


def run_two_bump(cfg, out, args):
    led, rows = reports.two_bump_checks(cfg.params, cfg.two_bump_rho, cfg.s_list)
    _write_rows(out / "two-bump.csv",
                ["rho", "s", "delta", "norm_sq", "norm_main", "norm_residual_over_delta",
                 "lp_p", "lp_main", "lp_residual_over_delta"],
                [(cfg.two_bump_rho, r.s, r.delta, r.norm_sq, r.norm_main, r.norm_residual,
                  r.lp_p, r.lp_main, r.lp_residual) for r in rows])
    led.write_csv(out / "two-bump_checks.csv")
    return _finish(out, "two-bump", led)


def _scan(cfg, args):
    return scan_levels(cfg.minmax_rho, cfg.params.eps, s_count=cfg.s_count,
                       sigma=sigma_grid(cfg.n_azimuth, cfg.n_polar), domain=cfg.domain,
                       potential=cfg.potential, params=cfg.params.with_eps(0.0), threads=args.threads)


def run_scan(cfg, out, args):
    sc = _scan(cfg, args)
    sc.write_csv(out / "scan.csv")
    led = reports.EnergyLedger(m=float("nan"), S=float("nan"))
    led.add("B <= A", sc.B, sc.A, sc.A - sc.B, sc.A - sc.B >= 0)
    led.notes.append(f"A = {sc.A:.12g} at s = {sc.argmax[0]:.8f}, y = {sc.argmax[1].y}; B = {sc.B:.12g}")
    return _finish(out, "scan", led)


def run_barycenter(cfg, out, args):
    led, devs = reports.barycenter_checks(cfg.params, cfg.bary_spacing, cfg.bary_pad, cfg.bary_rho_list,
                                          cfg.domain.hole_radius or cfg.hole_radius)
    _write_rows(out / "barycenter.csv", ["rho", "deviation"], zip(cfg.bary_rho_list, devs))
    led.write_csv(out / "barycenter_checks.csv")
    return _finish(out, "barycenter", led)


def run_beta_zero(cfg, out, args):
    cert = find_beta_zero(cfg.minmax_rho, cfg.params.eps, cfg.domain, cfg.potential)
    _write_rows(out / "beta-zero.csv",
                ["s_star", "s_lo", "s_hi", "f_lo", "f_hi", "beta_x", "beta_y", "beta_z", "t", "energy"],
                [(cert.s_star, cert.s_lo, cert.s_hi, cert.f_lo, cert.f_hi, *cert.beta, cert.t, cert.energy)])
    led = reports.EnergyLedger(m=float("nan"), S=float("nan"))
    for y, v in cert.precondition:
        led.add(f"beta(psi[1,y]).y > 0 at y={tuple(round(c, 6) for c in y.y)}", v, 0.0, v, v > 0)
    led.add("bracket contains the sign change", cert.f_lo, cert.f_hi, cert.f_lo - cert.f_hi,
            cert.f_lo >= 0 >= cert.f_hi)
    return _finish(out, "beta-zero", led, CHAIN_HEADER)


def run_chain(cfg, out, args):
    sc = _scan(cfg, args)
    sc.write_csv(out / "chain_scan.csv")
    rho, eps = cfg.minmax_rho, cfg.params.eps
    led = inequality_chain_report(rho, eps, cfg.domain, cfg.potential, scan=sc, params=cfg.params.with_eps(0.0))
    led.write_csv(out / "chain.csv")
    return _finish(out, "chain", led)


def run_check_18_24(cfg, out, args):
    below = PotentialSpec("gaussian", cfg.below_amplitude, cfg.below_width)
    led, table = reports.condition_checks(cfg.params, cfg.z_grid, cfg.exterior_z_grid, below, cfg.hole_radius)
    rows = [(regime, *r.z, r.lhs, r.rhs, str(r.satisfied).lower(), r.energy_sw, r.m) for regime, r in table]
    zcols = [f"z{k + 1}" for k in range(cfg.params.N)]
    _write_rows(out / "check-18-24.csv", ["regime", *zcols, "lhs", "rhs", "satisfied", "energy_sw", "m"], rows)
    led.write_csv(out / "check-18-24_checks.csv")
    return _finish(out, "check-18-24", led)


def run_nonexistence(cfg, out, args):
    led, vals, m_eps = reports.nonexistence_checks(cfg.params, cfg.n_list, cfg.hole_radius, cfg.potential)
    _write_rows(out / "nonexistence.csv", ["n", "energy", "m_eps", "gap"],
                [(n, v, m_eps, v - m_eps) for n, v in zip(cfg.n_list, vals)])
    led.write_csv(out / "nonexistence_checks.csv")
    return _finish(out, "nonexistence", led)


COMMANDS = {
    "ground-state": run_ground_state,
    "decay": run_decay,
    "sobolev": run_sobolev,
    "levels": run_levels,
    "interaction": run_interaction,
    "two-bump": run_two_bump,
    "scan": run_scan,
    "barycenter": run_barycenter,
    "beta-zero": run_beta_zero,
    "chain": run_chain,
    "check-18-24": run_check_18_24,
    "nonexistence": run_nonexistence,
}


def _status(ledger: EnergyLedger, strict: bool) -> bool:
    if strict:
        return all(c.passed is True for c in ledger.checks)
    return ledger.all_passed


def run_all(cfg, out, args):
    summary = reports.EnergyLedger(m=float("nan"), S=float("nan"))
    for name, fn in COMMANDS.items():
        try:
            led = fn(cfg, out, args)
            ok = _status(led, args.strict)
            failed = sum(c.passed is False for c in led.checks)
            summary.add(f"{name}", len(led.checks) - failed, len(led.checks), -failed, ok)
        except (NehariLevelsError, ArithmeticError) as exc:
            summary.add(f"{name}", 0, 0, float("nan"), False)
            summary.notes.append(f"{name}: {type(exc).__name__}: {exc}")
    summary.write_csv(out / "all.csv")
    return _finish(out, "all", summary)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nehari-levels", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=[*COMMANDS, "all"])
    ap.add_argument("--config", type=Path, help="INI file layered over the shipped defaults")
    ap.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for the scan")
    ap.add_argument("--strict", action="store_true", help="count skipped checks as failures")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    fn = run_all if args.command == "all" else COMMANDS[args.command]
    try:
        ledger = fn(cfg, out, args)
    except (NehariLevelsError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        (out / f"{args.command}.txt").write_text(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK if _status(ledger, args.strict) else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
