"""Command-line entry points.

Subcommands mirror the pipeline stages: eda, preprocess, select, train,
evaluate, and reproduce.  All but eda/reproduce take --config; exit code 0
on success, 1 with a stage-named message otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import models
from .config import ConfigError, PipelineConfig, load_config
from .data import column_stats, load_secom
from .pipeline import PipelineError, emit_report, reproduce, run_pipeline


def _cfg_from_args(args) -> PipelineConfig:
    if not args.config:
        raise ConfigError("--config FILE is required for this subcommand")
    return load_config(args.config)


def cmd_eda(args) -> int:
    d = load_secom(args.data, args.labels)
    stats = column_stats(d)
    n_pos = int(d.labels.sum())
    missing = [s.missing_fraction for s in stats]
    n_const = sum(1 for s in stats if s.is_constant)
    print(f"rows: {d.n_rows}   columns: {d.n_cols}   positives: {n_pos} "
          f"({n_pos / d.n_rows:.1%})")
    print(f"missing cells: {sum(m * d.n_rows for m in missing) / (d.n_rows * d.n_cols):.2%} overall")
    print(f"columns over 50% missing: {sum(1 for m in missing if m > 0.5)}")
    print(f"constant columns: {n_const}")
    worst = sorted(stats, key=lambda s: -s.missing_fraction)[:10]
    print("highest-missing columns:")
    for s in worst:
        print(f"  column {s.column_id}: {s.missing_fraction:.1%} missing")
    return 0


def cmd_preprocess(args) -> int:
    cfg = _cfg_from_args(args)
    res = run_pipeline(cfg, stop_after="prune")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["column_id,reason,threshold,kept_partner"]
    for log in res.drop_logs.values():
        lines.extend(log.to_csv().splitlines()[1:])
    (out / "drops.csv").write_text("\n".join(lines) + "\n")
    print(f"{res.pruned.n_cols} columns survive pruning; drop log in {out / 'drops.csv'}")
    return 0


def cmd_select(args) -> int:
    cfg = _cfg_from_args(args)
    res = run_pipeline(cfg, stop_after="select")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if res.ledger is None:
        print("selector roster is 'none'; nothing to vote on")
        return 0
    (out / "votes.csv").write_text(res.ledger.to_csv())
    print(f"{len(res.ledger.selected)} features selected at threshold "
          f"{res.ledger.threshold}; ledger in {out / 'votes.csv'}")
    return 0


def cmd_train(args) -> int:
    cfg = _cfg_from_args(args)
    res = run_pipeline(cfg, stop_after="train")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fam, m in res.trained.items():
        path = out / f"model_{fam}.json"
        path.write_text(models.model_to_json(m))
        print(f"trained {fam} -> {path}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _cfg_from_args(args)
    res = run_pipeline(cfg)
    files = emit_report(res.report, cfg.out_dir, result=res)
    for f in files:
        print(f)
    return 0


def cmd_reproduce(args) -> int:
    report = reproduce(args.scenario, args.seed, args.out,
                       data_path=args.data, labels_path=args.labels,
                       roster=args.roster)
    from .pipeline import format_report_table
    print(format_report_table(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rareclass",
                                     description="Rare-class yield-prediction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eda", help="summarize a sensor/labels file pair")
    p.add_argument("data")
    p.add_argument("labels")
    p.set_defaults(func=cmd_eda)

    for name, func in (("preprocess", cmd_preprocess), ("select", cmd_select),
                       ("train", cmd_train), ("evaluate", cmd_evaluate)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="run one of the three fixed testing scenarios")
    p.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--roster", default="default", choices=("default", "fast", "none"))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
