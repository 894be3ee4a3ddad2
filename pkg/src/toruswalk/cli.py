"""
Command-line front end.

Exit codes: 0 ok, 1 analysis mismatch or failed check, 2 config/schema
error, 3 numeric invariant failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, coins, config, export, verify
from .decision import RoundConfig, run_rounds
from .errors import ConfigError, DomainError, InvariantError
from .lattice import Geometry, channel_names
from .operators import CoinField, unitarity_residual

log = logging.getLogger("toruswalk")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


def _emit(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _resolve(out_dir: Path | None, name: str) -> Path:
    p = Path(name)
    if out_dir is not None and not p.is_absolute():
        p = out_dir / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _summary(d: analysis.AverageDistribution) -> str:
    g = d.geometry
    cp = repr(analysis.conflict_probability(d)) if g.dim > 1 else "n/a"
    return f"total_probability={d.total()!r} conflict_probability={cp} nonzero_nodes={d.nonzero_count()}"


# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    if not args.config:
        raise ConfigError("simulate needs --config PATH")
    cfg = config.load_config(args.config)
    doc = dict(cfg.doc)
    if args.steps is not None:
        doc["steps"] = args.steps
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = config.parse_config(doc, cfg.base_dir)
    field = config.build_field(cfg)
    s0 = config.build_initial(cfg, field)
    out_dir = Path(args.out) if args.out else None
    outputs = dict(cfg.outputs)
    if not outputs and out_dir is not None:
        outputs = {"avg_csv": "avg.csv", "heatmap_pgm": "avg.pgm", "report_json": "report.json"}

    per_step = outputs.get("per_step_csv")
    visit = None
    if per_step:
        base = _resolve(out_dir, per_step)
        visit = lambda t, p: export.write_distribution_csv(export.per_step_path(base, t), field.geometry, p)  # noqa: E731

    d = analysis.average_distribution(s0, field, cfg.steps, visit)
    g = field.geometry
    if "avg_csv" in outputs:
        export.write_distribution_csv(_resolve(out_dir, outputs["avg_csv"]), g, d.probs)
    if "heatmap_pgm" in outputs:
        export.write_heatmap(_resolve(out_dir, outputs["heatmap_pgm"]), g, d.probs)
    if "state_csv" in outputs:
        export.write_state_csv(_resolve(out_dir, outputs["state_csv"]), s0)
    report = {
        "dim": g.dim,
        "n": g.size,
        "scheme": cfg.scheme,
        "steps": cfg.steps,
        "total_probability": d.total(),
        "conflict_probability": analysis.conflict_probability(d) if g.dim > 1 else None,
        "nonzero_nodes": d.nonzero_count(),
        "initial_prenorm": s0.prenorm,
    }
    if cfg.rounds:
        rc = RoundConfig(g.dim, g.size, field, s0, cfg.t_meas, cfg.rounds, cfg.seed, cfg.scheme)
        stats = run_rounds(rc)
        report["rounds"] = {"count": stats.rounds, "t_meas": cfg.t_meas, "conflict_count": stats.conflict_count}
        if "rounds_json" in outputs:
            stats.write_json(_resolve(out_dir, outputs["rounds_json"]))
        if "rounds_csv" in outputs:
            stats.write_csv(_resolve(out_dir, outputs["rounds_csv"]))
    if "report_json" in outputs:
        export.write_json(_resolve(out_dir, outputs["report_json"]), report)
    _emit(args, _summary(d))
    if cfg.rounds:
        _emit(args, f"rounds={stats.rounds} conflict_count={stats.conflict_count}")
    return EXIT_OK


def _scheme_field(scheme: str, g: Geometry) -> CoinField:
    doc = {"dim": g.dim, "n": g.size, "scheme": scheme}
    return config.build_field(config.parse_config(doc))


def cmd_analyze(args) -> int:
    g = Geometry(args.dim or 3, args.n or 5)
    field = _scheme_field(args.scheme or "reflection", g)
    report = analysis.node_subnetworks(field)
    doc = report.to_json_dict()
    if g.dim == 3:
        groups = analysis.group_subnetworks(g.size)
        doc["group_level"] = groups.to_json_dict()
        doc["group_consistent"] = sorted(groups.sizes()) == sorted(report.sizes())
    doc["mask_compliant"] = coins.is_mask_compliant(field)
    text = json.dumps(doc, indent=1)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "subnetworks.json").write_text(text + "\n")
        lines = ["component,representative,class,size"]
        for i, c in enumerate(report.components):
            rep = " ".join(str(x + 1) for x in c.representative)
            lines.append(f"{i},{rep},{c.klass},{c.node_count}")
        (out / "subnetworks.csv").write_text("\n".join(lines) + "\n")
    _emit(args, text)
    if report.warning:
        print(f"warning: {report.warning}", file=sys.stderr)
    if report.match is False:
        return EXIT_FAIL
    return EXIT_OK


def _format_matrix(m: np.ndarray) -> str:
    def cell(z):
        re, im = z.real, z.imag
        if z == 0:
            return "0"
        return f"{re:+.4f}{im:+.4f}j"

    return "\n".join("  ".join(f"{cell(z):>16}" for z in row) for row in m)


def cmd_coins(args) -> int:
    if not args.node:
        raise ConfigError("coins needs --node, e.g. --node 1,2,3")
    labels = [int(x) for x in args.node.split(",")]
    g = Geometry(args.dim or len(labels), args.n or 5)
    v = g.from_labels(labels)
    mask = coins.reflection_mask(g, v)
    field = coins.build_reflection_field(g)
    coin = field.coin(v)
    resid = unitarity_residual(coin)
    names = channel_names(g.dim)
    lines = [
        f"node {tuple(labels)}  N={g.size}  D={g.dim}  conflict neighbors k={mask.k}",
        "channels: " + " ".join(names),
        "mask:",
        mask.grid(),
        "coin:",
        _format_matrix(coin),
        f"unitarity residual={resid:.3e} {'<=' if resid <= 1e-10 else '>'} 1e-10",
        f"mask satisfied: {coins.satisfies_mask(coin, mask)}",
    ]
    _emit(args, "\n".join(lines))
    return EXIT_OK if resid <= 1e-10 else EXIT_NUMERIC


def cmd_verify(args) -> int:
    extra = None
    if args.coin_file:
        extra = {args.coin_file: CoinField.load(args.coin_file)}
    results = verify.run_all(extra)
    ok = all(r.passed for r in results)
    doc = {"passed": ok, "checks": [r.__dict__ for r in results]}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export.write_json(out / "verify.json", doc)
    for r in results:
        _emit(args, f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    if args.json:
        print(json.dumps(doc, indent=1))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_rounds(args) -> int:
    if args.config:
        cfg = config.load_config(args.config)
        doc = dict(cfg.doc)
        base = cfg.base_dir
    else:
        doc = {"dim": args.dim or 2, "n": args.n or 11, "scheme": args.scheme or "reflection"}
        base = Path(".")
    for key, val in (("seed", args.seed), ("rounds", args.rounds), ("t_meas", args.steps)):
        if val is not None:
            doc[key] = val
    doc.setdefault("rounds", 1000)
    cfg = config.parse_config(doc, base)
    field = config.build_field(cfg)
    s0 = config.build_initial(cfg, field)
    g = field.geometry
    if g.dim == 1:
        raise ConfigError("decision rounds need 2 or 3 players (dim 2 or 3)")
    stats = run_rounds(RoundConfig(g.dim, g.size, field, s0, cfg.t_meas, cfg.rounds, cfg.seed, cfg.scheme))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stats.write_json(out / "rounds.json")
        stats.write_csv(out / "rounds.csv")
    _emit(
        args,
        f"rounds={stats.rounds} conflict_count={stats.conflict_count} "
        f"conflict_rate={stats.conflict_rate!r} t_meas={cfg.t_meas}",
    )
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--steps", type=int, help="number of steps T (t_meas for rounds)")
    common.add_argument("--n", type=int, help="cycle length N")
    common.add_argument("--dim", type=int, choices=(1, 2, 3), help="dimension / player count")
    common.add_argument("--scheme", choices=config.SCHEMES, help="coin scheme")
    common.add_argument("--quiet", action="store_true", help="suppress normal output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="toruswalk", description="Coined quantum walks on cycles and tori.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="evolve a configured walk and write outputs").set_defaults(
        func=cmd_simulate
    )
    sub.add_parser("analyze", parents=[common], help="subnetwork decomposition report").set_defaults(
        func=cmd_analyze
    )
    pc = sub.add_parser("coins", parents=[common], help="print a node's reflection mask and coin")
    pc.add_argument("--node", help="1-based node labels, comma separated")
    pc.set_defaults(func=cmd_coins)
    pv = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    pv.add_argument("--coin-file", help="also check this coin field JSON")
    pv.add_argument("--json", action="store_true", help="print machine-readable results")
    pv.set_defaults(func=cmd_verify)
    pr = sub.add_parser("rounds", parents=[common], help="multi-player decision rounds")
    pr.add_argument("--rounds", type=int, help="number of rounds R")
    pr.set_defaults(func=cmd_rounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"numeric invariant failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
