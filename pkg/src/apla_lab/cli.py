"""Command-line front end.

Commands
--------
``check-game``          structural predicates of the configured game
``analyze``             resistance/stability analysis, JSON report
``stationary``          stationary distribution with dual-route cross-check
``simulate``            seeded Monte Carlo experiment, JSON + CSV
``reproduce-staghunt``  the full coordination-game pipeline (both modes,
                        noiseless and noisy) with prediction verdicts

Exit codes: 0 success, 2 config error, 3 parameter-validation error,
4 internal oracle or prediction mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from importlib import resources

from . import __version__
from .dynamics import APLA, PLA, Params
from .errors import (
    AplaLabError,
    CapacityError,
    ConfigError,
    OracleMismatchError,
    ParameterError,
    UsageError,
)
from .games import Game, decode_profile, game_from_dict, load_game
from .montecarlo import (
    ExperimentConfig,
    ExperimentReport,
    compare_prediction,
    run_experiment,
    write_series_csv,
)
from .stability import (
    ENUMERATION_CAP,
    analyze_stability,
    build_digraph,
    check_corollaries,
    fw_stationary,
    fw_stationary_check,
)

STATIONARY_AGREEMENT_TOL = 1e-9

_EXPERIMENT_DEFAULTS = {
    "horizon": 100000,
    "runs": 10,
    "seed": 0,
    "end_window_fraction": 0.1,
    "tracked_profiles": [],
    "series_points": 2000,
    "initial": None,
}
_ANALYSIS_DEFAULTS = {
    "delta": 0.1,
    "rel_tol": 1e-9,
    "resistance_mode": "asymptotic",
    "stationary": False,
}


@dataclass(frozen=True)
class RunConfig:
    """A parsed, validated experiment configuration file."""

    game: Game
    params: Params
    experiment: dict
    analysis: dict
    source: str


def _builtin_config_text(name: str) -> str:
    resource = resources.files("apla_lab").joinpath(f"data/{name}.json")
    if not resource.is_file():
        raise ConfigError(f"no builtin config named {name!r}")
    return resource.read_text(encoding="utf-8")


def load_config(path: str) -> RunConfig:
    """Parse and validate a config file (or ``builtin:<name>``).

    Game invariants raise ``ConfigError``; parameter invariants raise
    ``ParameterError`` so the CLI can distinguish exit codes.
    """
    if path.startswith("builtin:"):
        text = _builtin_config_text(path.split(":", 1)[1])
        base_dir = "."
    else:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        base_dir = os.path.dirname(os.path.abspath(path))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"schema_version", "description", "game", "params", "experiment", "analysis"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    if doc.get("schema_version") != 1:
        raise ConfigError("config must declare \"schema_version\": 1")
    if "game" not in doc or "params" not in doc:
        raise ConfigError("config needs 'game' and 'params' sections")

    game_block = doc["game"]
    try:
        if isinstance(game_block, dict) and "file" in game_block:
            game_path = os.path.join(base_dir, game_block["file"])
            if not os.path.isfile(game_path):
                raise ConfigError(f"game file not found: {game_path}")
            game = load_game(game_path)
        else:
            game = game_from_dict(game_block)
    except UsageError as exc:
        raise ConfigError(f"invalid game: {exc}") from exc

    params = Params.from_dict(doc["params"])
    params.validate_against(game)

    experiment = dict(_EXPERIMENT_DEFAULTS)
    extra = set(doc.get("experiment", {})) - set(experiment)
    if extra:
        raise ConfigError(f"unknown experiment fields: {sorted(extra)}")
    experiment.update(doc.get("experiment", {}))

    analysis = dict(_ANALYSIS_DEFAULTS)
    extra = set(doc.get("analysis", {})) - set(analysis)
    if extra:
        raise ConfigError(f"unknown analysis fields: {sorted(extra)}")
    analysis.update(doc.get("analysis", {}))

    return RunConfig(
        game=game, params=params, experiment=experiment, analysis=analysis, source=path
    )


def _apply_mode(params: Params, mode: str | None) -> Params:
    if mode is None or mode == params.mode:
        return params
    if mode == PLA:
        return Params(
            epsilon=params.epsilon, nu=params.nu, lam=params.lam,
            h=0.0, c_asp=0.0, upsilon_bar=params.upsilon_bar, mode=PLA,
        )
    return replace(params, mode=APLA)


def _experiment_config(cfg: RunConfig, args: argparse.Namespace) -> ExperimentConfig:
    exp = dict(cfg.experiment)
    for key in ("seed", "runs", "horizon"):
        value = getattr(args, key, None)
        if value is not None:
            exp[key] = value
    params = _apply_mode(cfg.params, getattr(args, "mode", None))
    try:
        return ExperimentConfig(
            game=cfg.game,
            params=params,
            horizon=int(exp["horizon"]),
            runs=int(exp["runs"]),
            seed=int(exp["seed"]),
            tracked_profiles=tuple(exp["tracked_profiles"]),
            end_window_fraction=float(exp["end_window_fraction"]),
            series_points=int(exp["series_points"]),
            initial=exp["initial"],
        )
    except UsageError as exc:
        raise ConfigError(f"invalid experiment block: {exc}") from exc


def _metadata(cfg: RunConfig, config: ExperimentConfig | None = None) -> dict:
    if config is None:
        config = _experiment_config(cfg, argparse.Namespace())
    return {
        "tool_version": __version__,
        "config_hash": config.digest(),
        "seed": config.seed,
    }


def _write_json(out_dir: str | None, name: str, doc: dict) -> None:
    if out_dir is None:
        print(json.dumps(doc, indent=2))
        return
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")
    print(f"wrote {path}")


def _profile_label(game: Game, p: int) -> str:
    return "(" + ",".join(str(a) for a in decode_profile(game, p)) + ")"


def cmd_check_game(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    report = check_corollaries(cfg.game, cfg.params)
    game = cfg.game
    print(f"players: {game.n}, actions: {list(game.action_counts)}, "
          f"profiles: {game.num_profiles}")
    print(f"positive utility: {report['positive_utility']}")
    print(f"weakly acyclic: {report['weakly_acyclic']}")
    print("pure Nash equilibria: "
          + (", ".join(_profile_label(game, p) for p in report["pure_nash"]) or "none"))
    print("payoff dominant: "
          + (", ".join(_profile_label(game, p) for p in report["payoff_dominant"]) or "none"))
    print(f"prediction class: {report['prediction_class']}")
    for line in report["warnings"]:
        print(f"warning: {line}")
    doc = {**_metadata(cfg), "check_game": report}
    _write_json(args.out, "check_game.json", doc)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    params = _apply_mode(cfg.params, args.mode)
    delta = args.delta if args.delta is not None else cfg.analysis["delta"]
    mode = args.resistance or cfg.analysis["resistance_mode"]
    report = analyze_stability(
        cfg.game,
        params,
        delta=delta,
        resistance_mode=mode,
        rel_tol=cfg.analysis["rel_tol"],
        with_stationary=bool(cfg.analysis["stationary"])
        and cfg.game.num_profiles <= ENUMERATION_CAP,
    )
    game = cfg.game
    for p in game.profiles():
        marker = " *" if p in report.stable_set else ""
        print(f"r*{_profile_label(game, p)} = {report.node_resistance[p]:.9g}{marker}")
    print("stochastically stable set: "
          + ", ".join(_profile_label(game, p) for p in sorted(report.stable_set)))
    doc = {**_metadata(cfg), "stability": report.to_dict()}
    _write_json(args.out, "analyze.json", doc)
    return 0


def cmd_stationary(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    digraph = build_digraph(
        cfg.game, cfg.params,
        delta=cfg.analysis["delta"],
        resistance_mode=cfg.analysis["resistance_mode"],
    )
    if cfg.game.num_profiles <= ENUMERATION_CAP:
        tree, solved, gap = fw_stationary_check(digraph)
        print(f"tree-sum vs solver max discrepancy: {gap:.3e}")
        doc = {
            **_metadata(cfg),
            "stationary": {
                "tree_sum": tree.tolist(),
                "solver": solved.tolist(),
                "max_discrepancy": gap,
            },
        }
        _write_json(args.out, "stationary.json", doc)
        if gap > STATIONARY_AGREEMENT_TOL:
            raise OracleMismatchError(
                f"tree-sum and solver stationary distributions disagree by {gap:.3e}"
            )
    else:
        solved = fw_stationary(digraph, "solver")
        print(f"{cfg.game.num_profiles} states exceed the enumeration cap; "
              "solver mode only")
        doc = {**_metadata(cfg), "stationary": {"solver": solved.tolist()}}
        _write_json(args.out, "stationary.json", doc)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    config = _experiment_config(cfg, args)
    report = run_experiment(config, tool_version=__version__)
    verdict = compare_prediction(
        config.game, config.params, report,
        delta=cfg.analysis["delta"], rel_tol=cfg.analysis["rel_tol"],
    )
    end_mean = report.aggregate["end_window_freq"]["mean"]
    for p in config.tracked_profiles:
        print(f"mean end-window freq {_profile_label(config.game, p)}: {end_mean[p]:.4f}")
    print(f"observed mode {_profile_label(config.game, verdict['observed_mode'])}, "
          f"predicted {[_profile_label(config.game, p) for p in verdict['predicted_stable_set']]}, "
          f"match: {verdict['match']}")
    doc = {
        "tool_version": __version__,
        "config_hash": report.config_hash,
        "seed": config.seed,
        "report": report.to_dict(),
        "prediction": verdict,
    }
    _write_json(args.out, "simulate.json", doc)
    if args.out is not None:
        csv_path = os.path.join(args.out, "simulate.csv")
        write_series_csv(report, csv_path)
        print(f"wrote {csv_path}")
    return 0


def cmd_reproduce_staghunt(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or "staghunt_out"
    conditions = [
        (PLA, 0.0), (PLA, 0.1), (APLA, 0.0), (APLA, 0.1),
    ]
    mismatches = []
    summary = []
    for mode, noise in conditions:
        params = _apply_mode(replace(cfg.params, upsilon_bar=noise), mode)
        ns = argparse.Namespace(
            seed=args.seed, runs=args.runs, horizon=args.horizon, mode=None
        )
        config = _experiment_config(
            RunConfig(cfg.game, params, cfg.experiment, cfg.analysis, cfg.source), ns
        )
        report = run_experiment(config, tool_version=__version__)
        verdict = compare_prediction(
            config.game, params, report,
            delta=cfg.analysis["delta"], rel_tol=cfg.analysis["rel_tol"],
        )
        tag = f"{mode}_noise{noise:g}"
        end_mean = report.aggregate["end_window_freq"]["mean"]
        line = (
            f"{tag:16s} mean end-window freq (A,A)={end_mean[0]:.3f} "
            f"(B,B)={end_mean[3]:.3f} predicted="
            f"{[_profile_label(config.game, p) for p in verdict['predicted_stable_set']]} "
            f"match={verdict['match']}"
        )
        print(line)
        summary.append({
            "condition": tag,
            "params": params.to_dict(),
            "prediction": verdict,
            "end_window_freq_mean": end_mean,
        })
        doc = {
            "tool_version": __version__,
            "config_hash": report.config_hash,
            "seed": config.seed,
            "report": report.to_dict(),
            "prediction": verdict,
        }
        _write_json(out_dir, f"reproduce_{tag}.json", doc)
        write_series_csv(report, os.path.join(out_dir, f"reproduce_{tag}.csv"))
        if not verdict["match"]:
            mismatches.append(tag)
    _write_json(out_dir, "reproduce_summary.json", {
        "tool_version": __version__,
        "seed": args.seed if args.seed is not None else cfg.experiment["seed"],
        "config_hash": _experiment_config(cfg, argparse.Namespace()).digest(),
        "conditions": summary,
    })
    if mismatches:
        raise OracleMismatchError(
            f"simulation contradicts the stability prediction for: {mismatches}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apla-lab",
        description="Learning-automata game simulation and stochastic-stability analysis",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, default_config=None):
        sp.add_argument(
            "--config",
            default=default_config,
            required=default_config is None,
            help="config JSON path or builtin:staghunt",
        )
        sp.add_argument("--out", default=None, help="output directory (default: stdout)")

    sp = sub.add_parser("check-game", help="structural predicates of the game")
    common(sp)
    sp.set_defaults(func=cmd_check_game)

    sp = sub.add_parser("analyze", help="resistance and stability analysis")
    common(sp)
    sp.add_argument("--mode", choices=[PLA, APLA], default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--resistance", choices=["asymptotic", "product"], default=None)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("stationary", help="stationary distribution cross-check")
    common(sp)
    sp.set_defaults(func=cmd_stationary)

    sp = sub.add_parser("simulate", help="seeded Monte Carlo experiment")
    common(sp)
    sp.add_argument("--mode", choices=[PLA, APLA], default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--runs", type=int, default=None)
    sp.add_argument("--horizon", type=int, default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser(
        "reproduce-staghunt",
        help="both dynamics, noiseless and noisy, with prediction verdicts",
    )
    common(sp, default_config="builtin:staghunt")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--runs", type=int, default=None)
    sp.add_argument("--horizon", type=int, default=None)
    sp.set_defaults(func=cmd_reproduce_staghunt)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, UsageError, CapacityError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 3
    except OracleMismatchError as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 4
    except AplaLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
