"""Command-line front end: equilibria, simulate, sweep, verify, selftest.

Exit codes: 0 success, 1 verification/self-test failure, 2 invalid input,
3 integration blow-up (or every sweep cell failed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics, equilibrium, selftest, verifier
from .dynamics import IntegratorConfig, Mode, Regularizer, simulate_batch
from .game import ConstraintError, DerivedParams, GameScores, Profile, derive_params, scores_from_derived

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BLOWUP = 0, 1, 2, 3

MODES = {"dual": Mode.DUAL, "primal_replicator": Mode.PRIMAL_REPLICATOR, "two_action": Mode.TWO_ACTION}


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _check_keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def parse_game(game_cfg: dict):
    """Returns (m, DerivedParams, GameScores or None) from a config 'game' section."""
    _check_keys(game_cfg, {"m", "scores", "derived"}, "game", required={"m"})
    m = game_cfg["m"]
    if not isinstance(m, int) or m < 2:
        raise ConfigError(f"game.m must be an integer >= 2, got {m!r}")
    if ("scores" in game_cfg) == ("derived" in game_cfg):
        raise ConfigError("game: give exactly one of 'scores' or 'derived'")
    try:
        if "scores" in game_cfg:
            s = game_cfg["scores"]
            _check_keys(s, {"a", "b", "c", "epsilon"}, "game.scores", required={"a", "b", "c", "epsilon"})
            scores = GameScores(float(s["a"]), float(s["b"]), float(s["c"]), float(s["epsilon"]), m)
            return m, derive_params(scores), scores
        d = game_cfg["derived"]
        _check_keys(d, {"alpha", "beta", "gamma", "offset"}, "game.derived", required={"alpha", "beta", "gamma"})
        g = DerivedParams(float(d["alpha"]), float(d["beta"]), float(d["gamma"]), float(d.get("offset", 0.0)))
        return m, g, None
    except ConstraintError as exc:
        raise ConfigError(f"infeasible game: {exc}") from exc


TOP_KEYS = {"game", "regularizer", "mode", "step", "horizon", "record_every", "inits", "outputs", "thresholds"}


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict):
    _check_keys(cfg, TOP_KEYS, "config", required={"game", "horizon", "inits"})
    parse_game(cfg["game"])
    if cfg.get("regularizer", "entropic") not in ("entropic", "euclidean"):
        raise ConfigError(f"regularizer must be entropic or euclidean, got {cfg['regularizer']!r}")
    if cfg.get("mode", "dual") not in MODES:
        raise ConfigError(f"mode must be one of {sorted(MODES)}")
    inits = cfg["inits"]
    _check_keys(inits, {"count", "seed", "kind", "points"}, "inits", required={"kind"})
    if inits["kind"] not in ("random_interior", "explicit"):
        raise ConfigError("inits.kind must be random_interior or explicit")
    if inits["kind"] == "explicit" and "points" not in inits:
        raise ConfigError("inits.points is required for explicit initializations")
    _check_keys(cfg.get("outputs", {}), {"trajectory_csv", "summary_json"}, "outputs")
    _check_keys(cfg.get("thresholds", {}), set(diagnostics.Thresholds.__dataclass_fields__), "thresholds")
    try:
        integrator_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def integrator_config(cfg: dict) -> IntegratorConfig:
    return IntegratorConfig(
        horizon=float(cfg["horizon"]),
        step=float(cfg.get("step", 0.02)),
        mode=MODES[cfg.get("mode", "dual")],
        regularizer=Regularizer(cfg.get("regularizer", "entropic")),
        record_every=int(cfg.get("record_every", 1)),
    )


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def random_interior_profile(seed: int, m: int) -> np.ndarray:
    """Dirichlet(1) per player, clamped to >= 1e-6 and renormalized."""
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(m), size=3)
    P = np.maximum(P, 1e-6)
    return P / P.sum(axis=-1, keepdims=True)


def initial_profiles(cfg: dict, m: int, seed_override=None):
    """Returns [(seed or None, (3, m) array)]."""
    inits = cfg["inits"]
    if inits["kind"] == "explicit":
        out = []
        for k, pt in enumerate(inits["points"]):
            try:
                prof = Profile(*pt)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"inits.points[{k}]: {exc}") from exc
            if prof.m != m:
                raise ConfigError(f"inits.points[{k}] has {prof.m} actions, game has {m}")
            out.append((None, prof.as_array()))
        return out
    base = int(seed_override if seed_override is not None else inits.get("seed", 0))
    return [(base + k, random_interior_profile(base + k, m)) for k in range(int(inits.get("count", 1)))]


def write_trajectory_csv(path: Path, traj):
    m = traj.m
    header = ["t"] + [f"{p}_{i}" for p in "xyz" for i in range(1, m + 1)] + ["V", "G"]
    lines = [",".join(header)]
    flat = traj.profiles.reshape(len(traj), -1)
    for t, row, v, g in zip(traj.t, flat, traj.V, traj.G):
        lines.append(",".join([_fmt(t)] + [_fmt(x) for x in row] + [_fmt(v), _fmt(g)]))
    path.write_text("\n".join(lines) + "\n")


def _csv_path(base: Path, k: int, n: int) -> Path:
    return base if n == 1 else base.with_name(f"{base.stem}_{k}{base.suffix}")


def run_experiment(cfg: dict, out_dir: Path, seed=None) -> dict:
    """Simulate every initialization of a validated config; write CSV and JSON."""
    m, game, scores = parse_game(cfg["game"])
    icfg = integrator_config(cfg)
    inits = initial_profiles(cfg, m, seed)
    th = diagnostics.Thresholds(**cfg.get("thresholds", {}))
    trajs = simulate_batch([p for _, p in inits], game, icfg)
    outputs = cfg.get("outputs", {})
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_base = out_dir / outputs.get("trajectory_csv", "trajectory.csv")
    per_init = []
    for k, ((s, _), traj) in enumerate(zip(inits, trajs)):
        write_trajectory_csv(_csv_path(csv_base, k, len(inits)), traj)
        entry = {"seed": s, "label": None, "error": traj.error}
        try:
            c = diagnostics.classify_trajectory(traj, th)
            entry.update(label=c.label.value, terminal_sync=c.terminal_sync, recurrence=c.recurrence)
        except diagnostics.TooFewSamples as exc:
            entry["label_error"] = str(exc)
        v_res, g_res = diagnostics.rate_residuals(traj) if len(traj) >= 3 else (None, None)
        vmin = float(traj.V.min())
        entry.update(
            V_initial=float(traj.V[0]),
            V_terminal=float(traj.V[-1]),
            V_min=vmin,
            V_max=float(traj.V.max()),
            V_nonmonotone=bool(vmin < traj.V[0] - 1e-6 and traj.V[-1] > vmin + 1e-6),
            G_terminal=float(traj.G[-1]),
            max_vdot_residual=v_res,
            max_gdot_residual=g_res,
        )
        per_init.append(entry)
    summary = {
        "game": {
            "m": m,
            "alpha": game.alpha, "beta": game.beta, "gamma": game.gamma, "offset": game.c,
            "scores": None if scores is None else {"a": scores.a, "b": scores.b, "c": scores.c, "epsilon": scores.epsilon},
        },
        "config_hash": config_hash(cfg),
        "integrator": {"step": icfg.step, "horizon": icfg.horizon, "mode": cfg.get("mode", "dual"),
                       "regularizer": icfg.regularizer.value, "record_every": icfg.record_every},
        "per_init": per_init,
    }
    (out_dir / outputs.get("summary_json", "summary.json")).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# commands

def cmd_equilibria(args) -> int:
    if args.m < 2:
        print("error: m must be >= 2", file=sys.stderr)
        return EXIT_INPUT
    beta = args.beta
    if beta is not None:
        print("note: beta does not affect the equilibrium set", file=sys.stderr)
    else:
        beta = 2 * (abs(args.alpha) + abs(args.gamma)) + 1.0
    try:
        game = DerivedParams(args.alpha, beta, args.gamma)
    except ConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    eq = equilibrium.enumerate_equilibria(args.m, args.alpha, args.gamma)
    report = {"m": args.m, "alpha": args.alpha, "gamma": args.gamma, "regime": eq.regime.value, "notes": eq.notes}
    if eq.continuum:
        report.update(continuum=True, families=[], points=[])
    else:
        pts = equilibrium.expand_points(eq, line_samples=args.line_samples)
        report.update(
            continuum=False,
            families=[f.describe() for f in eq.families],
            points=[{"strategy": [float(v) for v in p],
                     "gains": list(verifier.deviation_gain(Profile.symmetric(p), game))} for p in pts],
        )
    if args.format == "json":
        print(json.dumps(report, indent=2))
        return EXIT_OK
    print(f"regime: {report['regime']}")
    for note in eq.notes:
        print(f"note: {note}")
    if eq.continuum:
        print("continuum: full simplex")
        return EXIT_OK
    print("families: " + ", ".join(report["families"]))
    print(f"points: {len(report['points'])}")
    for p in report["points"]:
        s = ", ".join(f"{v:.12g}" for v in p["strategy"])
        print(f"  ({s})  max gain {max(p['gains']):.3e}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
        summary = run_experiment(cfg, Path(args.out_dir), args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    errors = [e["error"] for e in summary["per_init"] if e["error"]]
    labels = [e["label"] for e in summary["per_init"]]
    print(f"{len(labels)} runs: " + ", ".join(str(x) for x in labels))
    if errors:
        print("blow-up: " + "; ".join(errors), file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def _parse_floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _sweep_cell(job):
    cfg, out_dir, seed = job
    try:
        validate_config(cfg)
        summary = run_experiment(cfg, Path(out_dir), seed)
    except ConfigError as exc:
        return {"status": "error", "error": str(exc)}
    hist = {}
    for e in summary["per_init"]:
        hist[str(e["label"])] = hist.get(str(e["label"]), 0) + 1
    failed = all(e["error"] for e in summary["per_init"])
    return {"status": "blowup" if failed else "ok", "histogram": hist, "error": None}


def cell_config(base: dict, alpha: float, gamma: float) -> dict:
    """Base config with (alpha, gamma) replaced; beta and offset are kept."""
    cfg = json.loads(json.dumps(base))
    game = cfg["game"]
    m, g, scores = parse_game(game)
    if scores is not None:
        try:
            s = scores_from_derived(alpha, g.beta, gamma, g.c, m)
        except ConstraintError as exc:
            raise ConfigError(f"infeasible cell: {exc}") from exc
        game["scores"] = {"a": s.a, "b": s.b, "c": s.c, "epsilon": s.epsilon}
    else:
        game["derived"].update(alpha=alpha, gamma=gamma)
    return cfg


def cmd_sweep(args) -> int:
    try:
        base = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells, jobs = [], []
    for i, a in enumerate(_parse_floats(args.alphas)):
        for j, gm in enumerate(_parse_floats(args.gammas)):
            cell = {"alpha": a, "gamma": gm, "dir": f"cell_{i}_{j}"}
            try:
                jobs.append((cell_config(base, a, gm), str(out / cell["dir"]), args.seed))
                cells.append(cell)
            except ConfigError as exc:
                cell.update(status="error", error=str(exc), histogram={})
                cells.append(cell)
    pending = [c for c in cells if "status" not in c]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    for cell, res in zip(pending, results):
        cell.update(res)
    index = {"base_config_hash": config_hash(base), "cells": cells}
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    for c in cells:
        print(f"alpha={c['alpha']:g} gamma={c['gamma']:g}: {c['status']} {c.get('histogram') or c.get('error')}")
    return EXIT_OK if any(c["status"] == "ok" for c in cells) else EXIT_BLOWUP


def _load_profile(args):
    if args.file:
        data = json.loads(Path(args.file).read_text())
        return Profile(data["x"], data.get("y", data["x"]), data.get("z", data["x"]))
    x = _parse_floats(args.profile)
    y = _parse_floats(args.y) if args.y else x
    z = _parse_floats(args.z) if args.z else x
    return Profile(x, y, z)


def cmd_verify(args) -> int:
    try:
        if args.config:
            _, game, _ = parse_game(load_config(args.config)["game"])
        else:
            game = DerivedParams(args.alpha, args.beta, args.gamma, args.offset)
        if not args.file and not args.profile:
            raise ValueError("give --profile or --file")
        prof = _load_profile(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    gains = verifier.deviation_gain(prof, game)
    nash = max(gains) <= 1e-9
    report = {"gains": list(gains), "is_nash": nash}
    if np.array_equal(prof.x, prof.y) and np.array_equal(prof.y, prof.z):
        st = verifier.stationarity_check(prof.x, game)
        report["stationarity"] = {"common_value": st.common_value,
                                  "max_equality_violation": st.max_equality_violation,
                                  "max_inequality_violation": st.max_inequality_violation,
                                  "is_nash": st.is_nash}
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print("gains: " + ", ".join(f"{g:.6g}" for g in gains))
        if "stationarity" in report:
            s = report["stationarity"]
            print(f"stationarity: C={s['common_value']:.6g} eq_violation={s['max_equality_violation']:.3g} "
                  f"ineq_violation={s['max_inequality_violation']:.3g}")
        print("nash" if nash else "not nash")
    return EXIT_OK if nash else EXIT_FAIL


def cmd_selftest(args) -> int:
    results = selftest.run_all(args.seed or 0)
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(p for _, p, _ in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")

    p = argparse.ArgumentParser(prog="m3ma", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("equilibria", parents=[common], help="list Nash equilibria")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--gamma", type=float, required=True)
    e.add_argument("--beta", type=float, default=None)
    e.add_argument("--line-samples", type=int, default=3,
                   help="samples per degenerate segment of double-root equilibria")
    e.set_defaults(func=cmd_equilibria)

    s = sub.add_parser("simulate", parents=[common], help="integrate FTRL trajectories")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", parents=[common], help="simulate over an alpha x gamma grid")
    w.add_argument("--alphas", required=True, help="comma-separated alpha values")
    w.add_argument("--gammas", required=True, help="comma-separated gamma values")
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", parents=[common], help="check a profile for Nash")
    v.add_argument("--profile", help="comma-separated strategy of X (and Y, Z unless given)")
    v.add_argument("--y")
    v.add_argument("--z")
    v.add_argument("--file", help='JSON {"x": [...], "y": [...], "z": [...]}')
    v.add_argument("--alpha", type=float, default=0.0)
    v.add_argument("--beta", type=float, default=2.0)
    v.add_argument("--gamma", type=float, default=0.0)
    v.add_argument("--offset", type=float, default=0.0)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("selftest", parents=[common], help="run the identity suites")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command in ("simulate", "sweep") and not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
