"""Command-line front end.

Exit codes: 0 on success (a protocol abort is a successful run), 2 for
usage errors, 3 when an internal invariant check fails.
"""
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import adversary, analysis
from .lm05 import run_lm05
from .protocol import ProtocolConfig, chunk_message, run_cqd, run_qsdc
from .walk import CoinParams

OUTPUT_ENV = "QWDC_OUTPUT_DIR"
DEFAULT_SEED = 0


class InvariantViolation(RuntimeError):
    pass


def _out_path(path, default_name):
    if path:
        return Path(path)
    return Path(os.environ.get(OUTPUT_ENV, ".")) / default_name


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError("config file must hold a JSON object")
    return data


def _merge(file_cfg, flags, defaults):
    """Flags win over the config file, which wins over defaults."""
    out = dict(defaults)
    out.update({k: v for k, v in file_cfg.items() if k in defaults})
    out.update({k: v for k, v in flags.items() if v is not None})
    return out


def _coin(eff):
    return CoinParams(float(eff["theta"]), float(eff["xi"]), float(eff["zeta"]))


def _random_bits(count, seed):
    rng = np.random.default_rng([seed, 7])
    return "".join(str(int(b)) for b in rng.integers(2, size=count))


@click.group()
def cli():
    """Quantum-walk direct communication: protocol runs, attacks and analysis."""


_SIM_DEFAULTS = {
    "N": 5, "n": 16, "nT": 7, "theta_mode": "random", "theta": math.pi / 4, "xi": math.pi / 4,
    "zeta": math.pi / 4, "tolerance": 0.0, "seed": DEFAULT_SEED, "attack": "none", "legs": None,
    "message": None, "message_b": None, "k": None, "theta_r": None,
}


@cli.command()
@click.argument("protocol", type=click.Choice(["qsdc", "cqd", "lm05"]))
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON file of defaults.")
@click.option("--N", "N", type=click.IntRange(min=2))
@click.option("--n", "n", type=click.IntRange(min=4))
@click.option("--nT", "nT", type=click.IntRange(min=1))
@click.option("--theta-mode", type=click.Choice(["random", "fixed"]))
@click.option("--theta", type=float)
@click.option("--xi", type=float)
@click.option("--zeta", type=float)
@click.option("--tolerance", type=click.FloatRange(0.0, 1.0))
@click.option("--seed", type=int)
@click.option("--attack", type=click.Choice(["none", "IR1", "IR2", "DoS", "MITM", "untrusted-charlie"]))
@click.option("--leg", "legs", multiple=True, help="Channel leg to attack (repeatable).")
@click.option("--message", help="Bit string sent by Bob (QSDC/LM05) or Alice (CQD).")
@click.option("--message-b", help="Bob's bit string for CQD.")
@click.option("--k", type=click.IntRange(min=0), help="Pin Alice's CQD layer exponent.")
@click.option("--theta-r", type=float, help="Pin Alice's CQD layer angle.")
@click.option("--out", type=click.Path(dir_okay=False))
def simulate(protocol, config_path, out, **flags):
    """Run one protocol session and write its transcript as JSON."""
    flags["legs"] = list(flags["legs"]) or None
    eff = _merge(_load_config(config_path), flags, _SIM_DEFAULTS)
    seed = int(eff["seed"])
    try:
        cfg = ProtocolConfig(
            N=2 if protocol == "lm05" else int(eff["N"]), n=int(eff["n"]), nT=int(eff["nT"]),
            theta_mode=eff["theta_mode"], coin=_coin(eff), error_tolerance=float(eff["tolerance"]),
            cqd_k=eff["k"], cqd_theta_r=eff["theta_r"],
        )
        msg_bits = eff["message"]
        if msg_bits is None:
            msg_bits = _random_bits(cfg.capacity * (1 if protocol == "lm05" else int(math.log2(cfg.N))), seed)
        msg = chunk_message(msg_bits, cfg.N)
        kind = {"untrusted-charlie": "UntrustedCharlie"}.get(eff["attack"], eff["attack"])
        eve = adversary.make_interceptor(kind, eff["legs"], protocol)
        rng = np.random.default_rng(seed)
        if protocol == "qsdc":
            tr = run_qsdc(cfg, msg, eve, rng)
        elif protocol == "lm05":
            tr = run_lm05(cfg, msg, eve, rng)
        else:
            b_bits = eff["message_b"]
            if b_bits is None:
                b_bits = _random_bits(cfg.capacity * int(math.log2(cfg.N)), seed + 1)
            tr = run_cqd(cfg, msg, chunk_message(b_bits, cfg.N), eve, rng)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    if tr.aborted and tr.decoded:
        raise InvariantViolation("aborted transcript carries decoded messages")
    doc = tr.to_dict()
    doc["run_spec"] = {"subcommand": f"simulate {protocol}", **{k: v for k, v in eff.items()}}
    path = _out_path(out, f"{protocol}-seed{seed}.json")
    _write(path, json.dumps(doc, indent=2) + "\n")

    decoded = json.dumps({k: v.bits for k, v in tr.decoded.items()}, sort_keys=True)
    digest = hashlib.sha256(decoded.encode()).hexdigest()[:16]
    click.echo(f"protocol={protocol} seed={seed} attack={eff['attack']}")
    click.echo(f"aborted={tr.aborted} abort_step={tr.abort_step} error_rate={tr.error_rate:.6g}")
    click.echo(f"decoded_sha256={digest}")
    if tr.attack is not None:
        acc = tr.attack.extraction_accuracy
        click.echo(f"attack_detection_rate={tr.attack.detection_rate:.6g} extraction_accuracy={acc}")
    click.echo(f"transcript={path}")


_SWEEP_DEFAULTS = {"N": 3, "nT": 7, "theta": math.pi / 4, "xi": math.pi / 4, "zeta": math.pi / 4}


def _sweep_grid(var, values, points, start, stop):
    if values:
        conv = float if var == "theta" else int
        try:
            return [conv(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise click.UsageError(f"bad --values: {exc}")
    if var == "theta":
        lo = 0.0 if start is None else start
        hi = 2 * math.pi if stop is None else stop
        return [lo + (hi - lo) * k / points for k in range(points)]
    lo = 1 if var == "nT" else 2
    lo = int(lo if start is None else start)
    hi = int(lo + points - 1 if stop is None else stop)
    return list(range(lo, hi + 1))


def _check_records(records):
    for r in records:
        if "error" in r:
            continue
        if not (math.isfinite(r["I_AE_bits"]) and r["I_AE_bits"] >= 0):
            raise InvariantViolation(f"non-finite or negative information at {r}")


def _emit_sweep(records, var, strategy, base, fmt, path, denominator, lm05_column):
    _check_records(records)
    if fmt == "csv":
        text = analysis.sweep_csv(records, var, strategy, lm05_column)
    else:
        text = analysis.sweep_json(records, var, strategy, base, denominator)
    _write(path, text)


@cli.command()
@click.option("--preset", type=click.Choice(sorted(analysis.FIGURE_PRESETS)))
@click.option("--var", type=click.Choice(["theta", "N", "nT"]))
@click.option("--values", help="Comma-separated grid values.")
@click.option("--points", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--start", type=float)
@click.option("--stop", type=float)
@click.option("--strategy", type=click.Choice(["IR1", "IR2"]), default="IR2", show_default=True)
@click.option("--N", "N", type=click.IntRange(min=2))
@click.option("--nT", "nT", type=click.IntRange(min=1))
@click.option("--theta", type=float)
@click.option("--xi", type=float)
@click.option("--zeta", type=float)
@click.option("--denominator", type=click.Choice(["singles", "groups"]), default="singles", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def sweep(preset, var, values, points, start, stop, strategy, denominator, fmt, out, **base_flags):
    """Tabulate Alice-Eve information over a grid of theta, N or nT."""
    if preset:
        var, grid, base, strategy = analysis.FIGURE_PRESETS[preset]
        name = preset
    else:
        if var is None:
            raise click.UsageError("give --var or --preset")
        eff = _merge({}, base_flags, _SWEEP_DEFAULTS)
        base = analysis.ParameterSpace(int(eff["N"]), int(eff["nT"]), _coin(eff))
        grid = _sweep_grid(var, values, points, start, stop)
        name = f"sweep-{var}-{strategy}"
    records = analysis.sweep(var, grid, strategy, base, denominator)
    path = _out_path(out, f"{name}.{fmt}")
    _emit_sweep(records, var, strategy, base, fmt, path, denominator, lm05_column=bool(preset))
    click.echo(f"var={var} strategy={strategy} points={len(grid)} base={json.dumps(base.to_dict())}")
    click.echo(f"output={path}")


@cli.command("reproduce-figures")
@click.option("--out-dir", type=click.Path(file_okay=False))
def reproduce_figures(out_dir):
    """Write fig3a/fig3b/fig5a/fig5b CSV tables with the LM05 reference column."""
    root = Path(out_dir) if out_dir else Path(os.environ.get(OUTPUT_ENV, "."))
    for name in sorted(analysis.FIGURE_PRESETS):
        var, grid, base, strategy = analysis.FIGURE_PRESETS[name]
        records = analysis.sweep(var, grid, strategy, base)
        path = root / f"{name}.csv"
        _emit_sweep(records, var, strategy, base, "csv", path, "singles", lm05_column=True)
        click.echo(f"{name}: {len(grid)} points -> {path}")


@cli.command("attack-stats")
@click.option("--strategy", type=click.Choice(["IR1", "IR2", "DoS", "MITM", "LM05-IR"]), required=True)
@click.option("--N", "N", type=click.IntRange(min=2), default=3, show_default=True)
@click.option("--nT", "nT", type=click.IntRange(min=1), default=7, show_default=True)
@click.option("--theta", type=float, default=math.pi / 4)
@click.option("--xi", type=float, default=math.pi / 4)
@click.option("--zeta", type=float, default=math.pi / 4)
@click.option("--trials", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def attack_stats(strategy, N, nT, theta, xi, zeta, trials, seed, out):
    """Compare exact and Monte Carlo per-state detection probabilities."""
    space = analysis.ParameterSpace(N, nT, CoinParams(theta, xi, zeta))
    exact = analysis.detection_rate(strategy, space, "exact")
    mc = analysis.detection_rate(strategy, space, "monte-carlo", trials, np.random.default_rng(seed))
    sigma = math.sqrt(max(exact * (1 - exact), 0.0) / trials)
    z = (mc - exact) / sigma if sigma > 0 else (0.0 if mc == exact else math.inf)
    doc = {
        "strategy": strategy,
        "space": None if strategy == "LM05-IR" else space.to_dict(),
        "trials": trials,
        "seed": seed,
        "exact": exact,
        "monte_carlo": float(mc),
        "sigma": sigma,
        "z": float(z),
        "within_3_sigma": bool(abs(z) <= 3.0),
    }
    path = _out_path(out, f"attack-stats-{strategy}.json")
    _write(path, json.dumps(doc, indent=2) + "\n")
    click.echo(f"strategy={strategy} exact={exact:.12g} monte_carlo={mc:.12g} sigma={sigma:.3g} z={z:.3g}")
    click.echo(f"report={path}")


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="qwdc", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except InvariantViolation as exc:
        click.echo(f"internal invariant violated: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
