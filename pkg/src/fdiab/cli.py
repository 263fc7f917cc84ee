"""Command-line entry point: sweep execution and CSV emission.

Subcommands: sweep-snr, sweep-bits, single (one fully dumped trial), and
power (power-model table).  All randomness is governed by --seed.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .config import ConfigError, parse_config
from .metrics import power_total
from .montecarlo import TrialContext, run_sweep

CSV_SCHEMA = "# fdiab-results v1"
CSV_COLUMNS = [
    "axis_name",
    "axis_value",
    "duplex",
    "architecture",
    "bits",
    "mean_se_sum",
    "mean_se_backhaul",
    "mean_se_access",
    "stderr",
    "bound_sum",
    "ee_bits_per_joule",
    "outage_p",
    "eps_rate",
]


def _fmt(value) -> str:
    if isinstance(value, float):
        if value == math.inf:
            return "inf"
        return repr(value)
    return str(value)


def emit_csv(result, path) -> None:
    """Write one row per (axis value x scenario); floats keep full precision
    so parsing the file back recovers them exactly."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow(
                [
                    row.axis_name,
                    _fmt(float(row.axis_value)),
                    row.duplex,
                    row.architecture,
                    _fmt(float(row.bits)),
                    _fmt(row.mean_se_sum),
                    _fmt(row.mean_se_backhaul),
                    _fmt(row.mean_se_access),
                    _fmt(row.stderr),
                    _fmt(row.bound_sum),
                    _fmt(row.ee_bits_per_joule),
                    _fmt(row.outage_p),
                    _fmt(row.eps_rate),
                ]
            )


def _add_common(sub):
    sub.add_argument("--config", default=None, help="TOML config file")
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    sub.add_argument("--out", default=None, help="output CSV path")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument(
        "--scenarios",
        default="fd-hyb,fd-dig,hd-hyb,hd-dig,bound",
        help="comma list of fd-hyb,fd-dig,hd-hyb,hd-dig,bound",
    )


def _build_parser():
    parser = argparse.ArgumentParser(prog="fdiab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("sweep-snr", "sum spectral efficiency vs average SNR"),
        ("sweep-bits", "sum spectral efficiency vs ADC bits"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common(p)
    p = sub.add_parser("single", help="run one trial and print its metrics")
    _add_common(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--dump", default=None, metavar="PREFIX", help="dump channels and beamformers")
    p = sub.add_parser("power", help="print the receiver power model table")
    _add_common(p)
    return parser


def _run_sweep_cmd(args, axis):
    cfg = parse_config(args.config, args.overrides)
    spec = cfg.sweep_spec(axis, trials=args.trials, seed=args.seed)
    scenarios = cfg.scenarios(args.scenarios)
    result = run_sweep(spec, scenarios, workers=max(args.workers, 1))
    if args.out:
        emit_csv(result, args.out)
        print(f"wrote {len(result.rows)} rows to {args.out}")
    else:
        for row in result.rows:
            print(
                f"{row.axis_name}={row.axis_value:g} {row.duplex}/{row.architecture}/b={row.bits:g}: "
                f"sum={row.mean_se_sum:.3f} (bh={row.mean_se_backhaul:.3f}, acc={row.mean_se_access:.3f}) "
                f"bound={row.bound_sum:.3f} ee={row.ee_bits_per_joule:.3f}"
            )
    return 0


def _run_single(args):
    cfg = parse_config(args.config, args.overrides)
    trial_cfg = cfg.trial_config(snr_db=args.snr_db)
    seed = args.seed if args.seed is not None else cfg["sweep.seed"]
    scenarios = cfg.scenarios(args.scenarios)
    ctx = TrialContext(seed, trial_cfg.system)
    for sc in scenarios:
        res = ctx.evaluate(sc, trial_cfg.snr_db, trial_cfg.si_power_db, trial_cfg.noise_var)
        print(
            f"{sc.tag}: se_sum={res.se_sum:.4f} se_backhaul={res.se_backhaul:.4f} "
            f"se_access={res.se_access:.4f} bound_sum={res.se_bound_backhaul + res.se_bound_access:.4f}"
        )
    if args.dump:
        np.savez(
            f"{args.dump}_channels.npz",
            backhaul=ctx.channels.backhaul.subcarriers,
            access=ctx.channels.access.subcarriers,
            si=ctx.channels.si.subcarriers,
        )
        print(f"wrote {args.dump}_channels.npz")
    return 0


def _run_power(args):
    cfg = parse_config(args.config, args.overrides)
    model = cfg.power_model()
    n_rf = cfg["system.n_rf"]
    print(f"rho_RF = {model.rho_rf * 1e3:.3f} mW, rho_ADC = {model.rho_adc * 1e3:.6f} mW (b={model.bits:g})")
    for label, n_rx in (("IAB", cfg["system.n_ant_iab"]), ("UE", cfg["system.n_ant_ue"])):
        for arch in ("all-digital", "hybrid"):
            p = power_total(arch, n_rx, n_rf, model)
            print(f"{label} {arch} (N_RX={n_rx}, N_RF={n_rf}): {p:.6f} W")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep-snr":
            return _run_sweep_cmd(args, "snr_db")
        if args.command == "sweep-bits":
            return _run_sweep_cmd(args, "bits")
        if args.command == "single":
            return _run_single(args)
        if args.command == "power":
            return _run_power(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
