"""``ionkick`` command line: one subcommand per experiment.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure. Errors are reported on stderr as ``error[<category>]: ...``.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, fastgate, sdk, waveform
from .config import ConfigError, RunConfig, load_config, parse_override
from .dynamics import IntegrationError, propagate, write_trajectory
from .io import write_csv, write_json
from .levels import ZeemanConfig, build_lambda_system, build_yb171_system
from .parallel import ordered_map, resolve_threads
from .pulses import Protocol

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("sdk-map", "robustness", "delay-scan", "gate-solve", "gate-scan",
            "trajectory", "waveform-compile", "validate")


# ---------------------------------------------------------------------------
# object construction from a validated config; ValueError here is a config error


def build_system(cfg: RunConfig):
    model = cfg["system"]["model"]
    if model == "lambda":
        return build_lambda_system(cfg["system"]["splitting"])
    if model == "yb171":
        return build_yb171_system(ZeemanConfig(B_field=cfg["zeeman"]["B_field"]))
    raise ConfigError(f"system.model must be 'lambda' or 'yb171', got {model!r}")


def protocol_params(cfg: RunConfig, protocol) -> dict:
    """Protocol-section overrides, applied only to the protocol they name."""
    if Protocol(cfg["protocol"]["name"]) is Protocol(protocol):
        return cfg.pulse_params()
    return {}


def build_pulse(cfg: RunConfig):
    name = cfg["protocol"]["name"]
    return sdk.make_pulse(name, **cfg.pulse_params())


def build_trap(cfg: RunConfig):
    return fastgate.TrapConfig(**cfg["trap"])


def _check_choices(values, allowed, what):
    bad = [v for v in values if v not in allowed]
    if bad:
        raise ConfigError(f"{what}: {bad} not among {list(allowed)}")


def prepare(command: str, cfg: RunConfig) -> dict:
    """Validate cross-field consistency by building every object a command needs."""
    try:
        Protocol(cfg["protocol"]["name"])
    except ValueError:
        raise ConfigError(f"protocol.name must be one of {[p.value for p in Protocol]}") from None
    ctx = {}
    try:
        ctx["system"] = build_system(cfg)
        ctx["pulse"] = build_pulse(cfg)
        ctx["trap"] = build_trap(cfg)
        if command in ("sdk-map", "validate"):
            m = cfg["sdk_map"]
            ctx["grid"] = sdk.SweepGrid(sdk.SweepAxis(**m["x"]), sdk.SweepAxis(**m["y"]),
                                        cfg.pulse_params())
        rb = cfg["robustness"]
        _check_choices(rb["protocols"], [p.value for p in Protocol], "robustness.protocols")
        _check_choices(rb["kinds"], sdk.KINDS, "robustness.kinds")
        if rb["count"] < 1 or cfg["delay_scan"]["count"] < 1:
            raise ConfigError("sweep counts must be at least 1")
        _check_choices(cfg["gate"]["schemes"], fastgate.PATTERNS, "gate.schemes")
        _check_choices([cfg["trajectory"]["scheme"]], fastgate.PATTERNS, "trajectory.scheme")
        _check_choices([cfg["trajectory"]["kind"]], ("sdk", "gate"), "trajectory.kind")
        _check_choices([cfg["gate_scan"]["mode"]], ("snap", "regrid"), "gate_scan.mode")
        if any(n < 1 for n in cfg["gate"]["n"]) or cfg["trajectory"]["n"] < 1:
            raise ConfigError("gate n values must be positive")
        if any(f <= 0 for f in cfg["gate_scan"]["f_bw"]):
            raise ConfigError("gate_scan.f_bw values must be positive")
        if cfg["gate"]["n_pairs"] < 1 or not 0 <= cfg["gate"]["epsilon"] <= 1:
            raise ConfigError("gate.n_pairs must be >= 1 and gate.epsilon in [0, 1]")
        if not 0 < cfg["run"]["tol"] < 1e-2:
            raise ConfigError("run.tol must lie in (0, 1e-2)")
        w = cfg["waveform"]
        if w["v_pi"] <= 0 or w["sample_rate"] <= 0 or w["extinction"] < 0:
            raise ConfigError("waveform: v_pi and sample_rate must be positive, extinction >= 0")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return ctx


# ---------------------------------------------------------------------------
# experiments: each returns (written paths, one-line summary)


def _header(command: str, cfg: RunConfig) -> str:
    return f"ionkick {command} config_hash={cfg.hash}"


def cmd_sdk_map(cfg, ctx, out, threads):
    pulse = ctx["pulse"]
    fmap = sdk.fidelity_map(pulse.protocol, ctx["grid"], ctx["system"], cfg["run"]["tol"],
                            threads)
    path = out / f"sdk_map_{pulse.protocol.value}.csv"
    header = f"{_header('sdk-map', cfg)} x={fmap.grid.x.name} y={fmap.grid.y.name}"
    write_csv(path, ("x", "y", "epsilon"), fmap.rows(), header)
    eps = fmap.epsilon
    best = float(np.nanmin(eps)) if np.any(np.isfinite(eps)) else float("nan")
    return [path], (f"sdk-map {pulse.protocol.value}: {eps.size} cells, "
                    f"min epsilon {best:.3e}, {len(fmap.failures)} failed")


def cmd_robustness(cfg, ctx, out, threads):
    rb = cfg["robustness"]
    values = np.linspace(rb["lo"], rb["hi"], rb["count"])
    rows, worst = [], []
    for proto in rb["protocols"]:
        for kind in rb["kinds"]:
            curve = sdk.robustness_sweep(proto, kind, values, rb["n_pairs"],
                                         protocol_params(cfg, proto), ctx["system"],
                                         cfg["run"]["tol"], threads)
            rows += [(proto, kind, x, e, f) for x, e, f in curve.rows()]
            worst.append(f"{proto}/{kind} {curve.worst:.2e}")
    path = out / "robustness.csv"
    write_csv(path, ("protocol", "kind", "perturbation", "epsilon", "one_minus_Fs"), rows,
              _header("robustness", cfg))
    return [path], "robustness worst 1-F_s: " + ", ".join(worst)


def cmd_delay_scan(cfg, ctx, out, threads):
    d = cfg["delay_scan"]
    devs = np.linspace(d["lo"], d["hi"], d["count"])
    curve = sdk.delay_sensitivity(devs, d["n_pairs"], protocol_params(cfg, Protocol.STIRAP),
                                  ctx["system"], cfg["run"]["tol"], threads)
    path = out / "delay_scan.csv"
    write_csv(path, ("perturbation", "epsilon", "one_minus_Fs"), curve.rows(),
              _header("delay-scan", cfg))
    return [path], f"delay-scan: {len(devs)} points, worst 1-F_s {curve.worst:.3e}"


def _solve_one(job, trap, starts, rng_seed):
    scheme, n = job
    return fastgate.solve_timings(scheme, n, trap, starts=starts, rng_seed=rng_seed)


def _solve_all(cfg, ctx, threads):
    g = cfg["gate"]
    jobs = [(s, n) for s in g["schemes"] for n in g["n"]]
    fn = partial(_solve_one, trap=ctx["trap"], starts=g["starts"], rng_seed=g["rng_seed"])
    return jobs, ordered_map(fn, jobs, threads)


def cmd_gate_solve(cfg, ctx, out, threads):
    g = cfg["gate"]
    jobs, solved = _solve_all(cfg, ctx, threads)
    rows, kicks = [], []
    for (scheme, n), (seq, rep) in zip(jobs, solved):
        ev = fastgate.evaluate(seq, ctx["trap"], g["epsilon"], g["n_pairs"])
        rows.append((scheme, n, seq.n_pairs, *seq.times[3:], seq.gate_time, rep.max_residual,
                     ev.phi, ev.one_minus_Fo, ev.F_gate))
        kicks.append({"scheme": scheme, "n": n, "times_s": seq.times, "weights": seq.weights,
                      "report": ev.to_dict()})
    path = out / "gate_solve.csv"
    cols = ("scheme", "n", "n_pairs", "tau1_s", "tau2_s", "tau3_s", "gate_time_s",
            "max_residual", "phi", "one_minus_Fo", "F_gate")
    write_csv(path, cols, rows, _header("gate-solve", cfg))
    jpath = out / "gate_solve.json"
    write_json(jpath, {"config_hash": cfg.hash, "sequences": kicks})
    worst = max(r[7] for r in rows)
    return [path, jpath], f"gate-solve: {len(rows)} sequences, max residual {worst:.2e}"


def cmd_gate_scan(cfg, ctx, out, threads):
    gs = cfg["gate_scan"]
    jobs, solved = _solve_all(cfg, ctx, threads)
    rows = []
    for scheme in cfg["gate"]["schemes"]:
        ns = [n for s, n in jobs if s == scheme]
        base = [seq for (s, _), (seq, _) in zip(jobs, solved) if s == scheme]
        scan = fastgate.repetition_scan(scheme, ns, gs["f_bw"], ctx["trap"], gs["t0"],
                                        gs["mode"], threads, baselines=base)
        rows += [(scheme, *r.as_tuple()) for r in scan]
    path = out / "gate_scan.csv"
    write_csv(path, ("scheme",) + fastgate.SCAN_COLUMNS, rows, _header("gate-scan", cfg))
    at_1ghz = [r[-1] for r in rows if r[2] == 1e9]
    tail = f", max 1-F_o at 1 GHz {max(at_1ghz):.2e}" if at_1ghz else ""
    return [path], f"gate-scan: {len(rows)} rows{tail}"


def cmd_trajectory(cfg, ctx, out, threads):
    tr = cfg["trajectory"]
    if tr["kind"] == "sdk":
        pulse = ctx["pulse"]
        prop = propagate(ctx["system"], pulse, cfg["run"]["tol"])
        path = out / f"trajectory_sdk_{pulse.protocol.value}.csv"
        write_trajectory(prop, path, _header("trajectory", cfg))
        return [path], (f"trajectory sdk {pulse.protocol.value}: {len(prop.t_grid)} steps, "
                        f"unitarity error {prop.unitarity_error():.1e}")
    g = cfg["gate"]
    seq, _ = fastgate.solve_timings(tr["scheme"], tr["n"], ctx["trap"], starts=g["starts"],
                                    rng_seed=g["rng_seed"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fastgate.GridCollisionWarning)
        seq = fastgate.discretize(seq, tr["f_bw"])
    ac, as_, traj = fastgate.closure(seq, ctx["trap"])
    path = out / f"trajectory_gate_{tr['scheme']}_n{tr['n']}.csv"
    traj.write_csv(path, _header("trajectory", cfg))
    return [path], f"trajectory gate {tr['scheme']} n={tr['n']}: |alpha_c|={abs(ac):.3e}"


def cmd_waveform(cfg, ctx, out, threads):
    w = cfg["waveform"]
    pulse = ctx["pulse"]
    prog = waveform.compile_protocol(pulse, w["sample_rate"], w["v_pi"], w["rf_base"],
                                     w["modulation_depth"])
    pred = waveform.predict_output(prog, extinction=w["extinction"])
    stem = f"waveform_{pulse.protocol.value}"
    csv_path, bin_path, json_path = (out / f"{stem}.csv", out / f"{stem}.bin",
                                     out / f"{stem}.json")
    prog.write_csv(csv_path, _header("waveform-compile", cfg))
    prog.write_binary(bin_path)
    write_json(json_path, {
        "config_hash": cfg.hash,
        "sample_rate_hz": prog.sample_rate,
        "channels": list(waveform.CHANNELS),
        "n_samples": int(prog.t.size),
        "leg_boundaries": list(prog.leg_boundaries),
        "path_delay_s": prog.path_delay,
        "seed_frequency_hz": prog.seed_frequency,
        "leakage_ratio": pred.leakage_ratio,
        "peak_intensity": float(np.max(pred.intensity)),
    })
    return [csv_path, bin_path, json_path], (
        f"waveform-compile {pulse.protocol.value}: {prog.t.size} samples at "
        f"{prog.sample_rate:.3g} Hz, path delay {prog.path_delay:.4g} s")


HANDLERS = {
    "sdk-map": cmd_sdk_map, "robustness": cmd_robustness, "delay-scan": cmd_delay_scan,
    "gate-solve": cmd_gate_solve, "gate-scan": cmd_gate_scan, "trajectory": cmd_trajectory,
    "waveform-compile": cmd_waveform,
}


# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML run configuration")
    common.add_argument("--out-dir", help="output directory (overrides run.out_dir)")
    common.add_argument("--threads", type=int,
                        help="worker processes (default: IONKICK_THREADS, then all CPUs)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")
    common.add_argument("--protocol", help="shorthand for --set protocol.name=...")
    common.add_argument("--tol", type=float, help="shorthand for --set run.tol=...")
    p = argparse.ArgumentParser(prog="ionkick", description="Spin-dependent kick gate toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def _fail(category: str, message: str, code: int) -> int:
    print(f"error[{category}]: {message}", file=sys.stderr)
    return code


def run(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        overrides = [parse_override(s) for s in args.set]
        if args.protocol:
            overrides.append((["protocol", "name"], args.protocol))
        if args.tol is not None:
            overrides.append((["run", "tol"], args.tol))
        if args.out_dir:
            overrides.append((["run", "out_dir"], args.out_dir))
        cfg = load_config(args.config, overrides)
        ctx = prepare(args.command, cfg)
        threads = resolve_threads(args.threads if args.threads is not None
                                  else cfg["run"].get("threads"))
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except ValueError as exc:  # bad thread count or env var
        return _fail("config", str(exc), EXIT_CONFIG)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)

    if args.command == "validate":
        print(f"validate: ok config_hash={cfg.hash}")
        return EXIT_OK

    out = Path(cfg["run"]["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths, summary = HANDLERS[args.command](cfg, ctx, out, threads)
        manifest = out / f"{args.command.replace('-', '_')}_manifest.json"
        write_json(manifest, {
            "command": args.command,
            "version": __version__,
            "schema_version": cfg.schema_version,
            "config_hash": cfg.hash,
            "config": cfg.raw,
            "outputs": sorted(p.name for p in paths),
            "summary": summary,
        })
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    except (IntegrationError, fastgate.SolverError, ArithmeticError, ValueError) as exc:
        return _fail("numerical", str(exc), EXIT_NUMERIC)
    print(summary)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
