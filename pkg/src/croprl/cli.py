"""Command-line entry points: train, evaluate, ablate, report.

All behavior is driven by one INI config file plus ``--set section.key=value``
overrides. Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (apply_overrides, build_agent_hyper, build_run_settings,
                     build_scenario, load_config)
from .errors import ConfigError
from .harness import (ExperimentConfig, baseline_policy, evaluate_policy,
                      load_checkpoint, reaggregate, run_ablation, run_training)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="croprl",
        description="Train and evaluate nitrogen-management policies on the "
                    "surrogate crop environment.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--out", default=None, help="output directory")

    p_train = sub.add_parser("train", help="train agents across seeds")
    common(p_train)
    p_train.add_argument("--seed", type=int, default=None,
                         help="train a single trial with this seed")

    p_eval = sub.add_parser("evaluate", help="evaluate a checkpoint or baseline")
    common(p_eval)
    group = p_eval.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", help="agent checkpoint JSON")
    group.add_argument("--baseline", type=float,
                       help="single-dose amount applied at vstage 5 (kg/ha)")
    p_eval.add_argument("--episodes", type=int, default=1)

    p_abl = sub.add_parser("ablate", help="paired-condition ablation")
    common(p_abl)
    p_abl.add_argument("--axis", choices=("observation", "frequency"),
                       required=True)

    p_rep = sub.add_parser("report", help="re-aggregate a run directory")
    p_rep.add_argument("--run", required=True, help="existing run directory")
    return parser


def _experiment_from_args(args) -> ExperimentConfig:
    cfg = apply_overrides(load_config(args.config), args.overrides)
    scenario = build_scenario(cfg)
    kind, hyper = build_agent_hyper(cfg, scenario.name)
    run = build_run_settings(cfg)
    seeds = run["seeds"]
    trials = run["trials"]
    if getattr(args, "seed", None) is not None:
        seeds, trials = (args.seed,), 1
    out_dir = Path(args.out) if args.out else run["out_dir"]
    return ExperimentConfig(scenario=scenario, agent_kind=kind, hyper=hyper,
                            trials=trials, seeds=seeds,
                            observation=run["observation"],
                            baseline_grid=run["baseline_grid"],
                            out_dir=out_dir)


def _cmd_train(args) -> int:
    config = _experiment_from_args(args)
    report = run_training(config)
    good = report.successful()
    print(f"trained {len(good)}/{len(report.trials)} trials; "
          f"report in {config.out_dir}")
    for trial in report.trials:
        if trial.failed:
            print(f"  seed {trial.seed}: FAILED ({trial.error})")
        else:
            s = trial.summary
            print(f"  seed {trial.seed}: reward {s.cumulative_reward:.1f} "
                  f"N {s.total_n:.0f} topwt {s.topwt:.0f} "
                  f"converged@{trial.convergence_episode}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = apply_overrides(load_config(args.config), args.overrides)
    scenario = build_scenario(cfg)
    run = build_run_settings(cfg)
    from .state import ObservationMask
    mask = ObservationMask.of_kind(run["observation"])
    if args.checkpoint:
        policy, meta = load_checkpoint(args.checkpoint)
        if meta.get("observation") and meta["observation"] != run["observation"]:
            raise ConfigError(
                f"checkpoint expects {meta['observation']} observations, "
                f"config requests {run['observation']}")
        label = f"checkpoint:{args.checkpoint}"
    else:
        policy = baseline_policy(args.baseline)
        label = f"baseline:{args.baseline:g}"
    mean, per_episode = evaluate_policy(policy, scenario, mask,
                                        n_episodes=args.episodes)
    result = {"policy": label, "episodes": args.episodes,
              "mean": mean.as_dict(),
              "per_episode": [s.as_dict() for s in per_episode]}
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "evaluation.json").write_text(
            json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_ablate(args) -> int:
    config = _experiment_from_args(args)
    result = run_ablation(config, args.axis)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    written = reaggregate(args.run)
    for path in written:
        print(path)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"train": _cmd_train, "evaluate": _cmd_evaluate,
                "ablate": _cmd_ablate, "report": _cmd_report}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
