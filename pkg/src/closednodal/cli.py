"""Command line entry point: ``closednodal <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from .config import ExperimentConfig, dump_config, load_config
from .oracles import ball_eigenvalue, choose_R_window, shell_ground_eigenvalue


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if getattr(args, "h", None):
        changes["h"] = list(args.h)
    if getattr(args, "out", None):
        changes["out"] = args.out
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "margin", None) is not None:
        changes["margin"] = args.margin
    return cfg.replace(**changes) if changes else cfg


def _store(cfg: ExperimentConfig):
    from .store import ResultStore

    return ResultStore(Path(cfg.out) / "records.ndjson")


def cmd_oracle(args) -> int:
    lo, hi = choose_R_window(args.R1)
    b1 = ball_eigenvalue(args.R1)
    b2 = ball_eigenvalue(args.R1, "first-excited")
    print(f"lambda1(B_R1)        = {b1.value:.12g}  [{b1.method}]")
    print(f"lambda2(B_R1)        = {b2.value:.12g}  [{b2.method}, bracket {b2.bracket_width:.1e}]")
    print(f"R window             = ({lo:.9f}, {hi:.9f})")
    if args.R is not None:
        s = shell_ground_eigenvalue(args.R1, args.R)
        inside = args.R in choose_R_window(args.R1)
        print(f"lambda1(A_R1,R)      = {s.value:.12g}  ({'inside' if inside else 'outside'} the window)")
    return 0


def _summary(rec: dict) -> str:
    lam = ", ".join(f"{v:.6f}" for v in rec["eigenvalues"])
    nodal = rec["nodal"] or {}
    return (
        f"h={rec['h']:g} nodes={rec['n_nodes']} lambda=[{lam}] converged={rec['converged']} "
        f"nodal2={nodal.get('count')} containment={nodal.get('verdict')} "
        f"min_distance={nodal.get('min_distance')}" + (f" error={rec['error']}" if rec["error"] else "")
    )


def cmd_solve(args) -> int:
    from .harness import run_sequence

    cfg = _config(args).replace(study="single")
    res = run_sequence(cfg, _store(cfg))
    for rec in res.records:
        print(_summary(rec))
    return 1 if any(r["error"] for r in res.records) else 0


def cmd_sweep(args) -> int:
    from .harness import run_sequence

    cfg = _config(args)
    if cfg.study in ("single", "find-config"):
        print(f"study {cfg.study!r} is not a sweep", file=sys.stderr)
        return 2
    res = run_sequence(cfg, _store(cfg))
    for rec in res.records:
        print(f"{rec['index']['name']}={rec['index']['value']} " + _summary(rec))
    for h, ok in res.monotone.items():
        print(f"lambda2 monotone at h={h:g}: {ok}")
    for t in res.tables:
        print(f"table: {t}")
    return 0 if all(res.monotone.values()) else 1


def cmd_find(args) -> int:
    from .harness import find_config

    cfg = _config(args)
    res = find_config(cfg, _store(cfg))
    for e in res.log:
        print(json.dumps(e))
    print(res.message if not res.found else "found: " + _summary(res.record))
    return 0


def cmd_topology(args) -> int:
    from .discretize import voxelize
    from .harness import build_domain
    from .topology import BETTI_VOXEL_LIMIT, betti_mod2, topology_report

    cfg = _config(args)
    domain = build_domain(cfg)
    for h in cfg.h:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            grid = voxelize(domain, h)
        rep = topology_report(grid)
        if args.betti and int(grid.mask.sum()) <= BETTI_VOXEL_LIMIT:
            rep.betti = betti_mod2(grid)
        print(json.dumps(rep.to_dict()))
    return 0


def cmd_config(args) -> int:
    sys.stdout.write(dump_config(_config(args)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="closednodal", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("oracle", help="reference eigenvalues and the admissible R window")
    o.add_argument("--R1", type=float, default=1.0)
    o.add_argument("--R", type=float, default=None)
    o.set_defaults(func=cmd_oracle)

    def common(sp):
        sp.add_argument("--config", type=Path, help="key = value configuration file")
        sp.add_argument("--h", type=float, nargs="+", help="grid spacing(s), overrides the config")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--margin", type=float, help="containment margin (default 2h)")

    for name, func, text in (
        ("solve", cmd_solve, "solve one configuration at each h"),
        ("sweep", cmd_sweep, "run a perturbation sequence or epsilon sweep"),
        ("find", cmd_find, "search for a configuration with contained negative set"),
        ("topology", cmd_topology, "complement components, Euler characteristic, Betti numbers"),
        ("config", cmd_config, "print the effective configuration"),
    ):
        sp = sub.add_parser(name, help=text)
        common(sp)
        if name == "topology":
            sp.add_argument("--betti", action="store_true", help="also compute mod-2 Betti numbers")
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
