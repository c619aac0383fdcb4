"""Experiment orchestration: single runs, perturbation sequences, epsilon
sweeps and the search for a configuration exhibiting containment.

Every run produces a ResultRecord (a JSON-ready dict) whose ``config`` entry
is the full configuration of that single run, so ``replay(record)``
recomputes it. Timings are the only field that differs between replays.
"""

from __future__ import annotations

import csv
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import AUTO, ExperimentConfig
from .discretize import assemble_laplacian, boundary_distance_field, voxelize
from .eigensolve import simplicity_report, smallest_eigenpairs
from .geometry import (
    Ball,
    Domain,
    Shell,
    SpherePointSet,
    _parse_vecs,
    domain_to_config,
    epsilon_upper_bound,
    feature_delta0,
    make_fournais,
    make_passage,
    make_pole,
    make_sheet,
    pole_directions,
    smooth_domain,
)
from .nodal import containment_report, nodal_domains
from .store import SCHEMA_VERSION, ResultStore
from .topology import BETTI_VOXEL_LIMIT, betti_mod2, topology_report

__all__ = [
    "FindResult",
    "SequenceResult",
    "build_domain",
    "fibonacci_centers",
    "find_config",
    "lambda2_monotone",
    "replay",
    "run_sequence",
    "run_single",
]

log = logging.getLogger(__name__)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
NOT_FOUND = "not found at this resolution"

# swept config field and whether increasing it enlarges the domain
SEQUENCES = {
    "passage-sequence": ("n", True, "passage"),
    "sheet-sequence": ("m", False, "sheet"),
    "pole-sequence": ("l", True, "pole"),
    "smooth-sequence": ("delta", True, "smoothed"),
    "epsilon-sweep": ("eps", True, "fournais"),
}
INTEGER_INDEX = {"n", "m", "l"}


def fibonacci_centers(M: int) -> SpherePointSet:
    """Fibonacci lattice on S^2: height 1 - 2(i + 1/2)/M, azimuth 2 pi i / phi^2."""
    if M < 1:
        raise ValueError("M must be at least 1")
    i = np.arange(M)
    z = 1.0 - 2.0 * (i + 0.5) / M
    phi = 2.0 * math.pi * i / GOLDEN**2
    rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return SpherePointSet(pts)


def centers_of(cfg: ExperimentConfig) -> SpherePointSet:
    if cfg.centers == "fibonacci":
        return fibonacci_centers(cfg.M)
    return SpherePointSet(_parse_vecs(cfg.centers))


def resolved_eps(cfg: ExperimentConfig) -> float:
    if cfg.eps == AUTO:
        return cfg.eps_fraction * epsilon_upper_bound(centers_of(cfg))
    return float(cfg.eps)


def build_domain(cfg: ExperimentConfig) -> Domain:
    """The domain described by ``cfg``, validated by the geometry builders."""
    if cfg.domain == "ball":
        return Ball(cfg.R1)
    if cfg.domain == "shell":
        return Shell(cfg.R1, cfg.R)
    d: Domain = make_fournais(centers_of(cfg), resolved_eps(cfg), cfg.R1, cfg.R, enforce_sheet_bound=cfg.strict_eps)
    if cfg.domain == "fournais":
        return d
    d = make_passage(d, cfg.n)
    if cfg.domain == "passage":
        return d
    d = make_sheet(d, cfg.m)
    if cfg.domain == "sheet":
        return d
    if cfg.l == AUTO:
        # smallest admissible l whose pole stays clear of the inner ball
        _, eta = pole_directions(d)
        l = max(math.ceil(1.0 / eta), 2 * cfg.n)
    else:
        l = int(cfg.l)
    d = make_pole(d, l)
    if cfg.domain == "pole":
        return d
    delta = 0.5 * feature_delta0(d) if cfg.delta == AUTO else float(cfg.delta)
    width = 0.25 * delta if cfg.width == AUTO else float(cfg.width)
    return smooth_domain(d, delta, width)


def _empty_record(cfg: ExperimentConfig, h: float, index) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "domain": {},
        "index": index,
        "h": float(h),
        "n_nodes": 0,
        "under_resolved": False,
        "eigenvalues": [],
        "gaps": [],
        "residuals": [],
        "converged": False,
        "iterations": 0,
        "simple2": None,
        "nodal_counts": [],
        "nodal": None,
        "topology": None,
        "timings": {},
        "error": None,
    }


def run_single(cfg: ExperimentConfig, index: dict | None = None) -> dict:
    """Build, voxelise, solve and analyse one configuration at ``cfg.h[0]``.

    Failures are reported in the record's ``error`` field, never raised.
    """
    h = cfg.h[0]
    rec = _empty_record(cfg, h, index)
    t = rec["timings"]
    try:
        t0 = time.perf_counter()
        domain = build_domain(cfg)
        rec["domain"] = domain_to_config(domain)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            grid = voxelize(domain, h)
        rec["n_nodes"] = grid.n
        rec["under_resolved"] = grid.under_resolved
        A = assemble_laplacian(grid, cfg.boundary)
        t["discretize"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        spec = smallest_eigenpairs(
            A, cfg.k, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed, preconditioner=cfg.preconditioner
        )
        t["solve"] = time.perf_counter() - t0
        rec.update(
            eigenvalues=[float(v) for v in spec.eigenvalues],
            gaps=[float(v) for v in spec.gaps],
            residuals=[float(v) for v in spec.residuals],
            converged=bool(spec.converged),
            iterations=int(spec.iterations),
            simple2=bool(simplicity_report(spec, 2).simple),
        )

        t0 = time.perf_counter()
        V = spec.eigenvectors
        # values below the solver accuracy carry no reliable sign
        band = max(cfg.zero_band, cfg.tol)
        rec["nodal_counts"] = [nodal_domains(grid, V[:, j], band).significant for j in range(cfg.k)]
        margin = None if cfg.margin == AUTO else float(cfg.margin)
        dist = boundary_distance_field(grid)
        rep = containment_report(grid, V[:, 1], margin=margin, zero_band=band, distance=dist)
        rec["nodal"] = rep.to_dict()
        t["nodal"] = time.perf_counter() - t0

        if cfg.topology:
            t0 = time.perf_counter()
            topo = topology_report(grid)
            if cfg.betti and int(grid.mask.sum()) <= BETTI_VOXEL_LIMIT:
                topo.betti = betti_mod2(grid)
            rec["topology"] = topo.to_dict()
            t["topology"] = time.perf_counter() - t0

        if cfg.vtk:
            from .io import write_vtk

            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            fields = {f"psi{j + 1}": V[:, j] for j in range(cfg.k)}
            fields["nodal2"] = rep.labels.astype(np.int32)
            write_vtk(out / f"{domain.kind}_h{h:g}.vtk", grid, fields)
    except Exception as exc:  # one bad row must not abort a sweep
        log.warning("run failed: %s", exc)
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def replay(record: dict) -> dict:
    """Rerun a record from its embedded configuration."""
    return run_single(ExperimentConfig.from_dict(record["config"]), record.get("index"))


def strip_timings(record: dict) -> dict:
    return {k: v for k, v in record.items() if k != "timings"}


def lambda2_monotone(lam2: list[float], grows: list[bool], tol: float) -> list[bool]:
    """Check domain monotonicity between consecutive rows.

    ``grows[i]`` says whether row i+1 has the larger domain. A larger domain
    may not raise lambda_2 by more than the solver accuracy ``tol * lambda``.
    """
    ok = []
    for a, b, g in zip(lam2[:-1], lam2[1:], grows):
        slack = 10.0 * tol * max(abs(a), abs(b))
        ok.append(bool(b <= a + slack) if g else bool(b >= a - slack))
    return ok


@dataclass
class SequenceResult:
    study: str
    records: list[dict]
    monotone: dict[float, bool] = field(default_factory=dict)
    tables: list[Path] = field(default_factory=list)


def _rows(cfg: ExperimentConfig) -> list[tuple[ExperimentConfig, dict | None]]:
    base = cfg.replace(study="single", values=[], workers=1)
    if cfg.study == "single":
        return [(base.replace(h=[h]), None) for h in cfg.h]
    if cfg.study not in SEQUENCES:
        raise ValueError(f"study {cfg.study!r} is not a sequence")
    name, _, kind = SEQUENCES[cfg.study]
    if not cfg.values:
        raise ValueError("sequence studies need a list of index values")
    rows = []
    for v in cfg.values:
        value = int(v) if name in INTEGER_INDEX else float(v)
        if name in INTEGER_INDEX and value != v:
            raise ValueError(f"{name} must be an integer, got {v}")
        for h in cfg.h:
            rows.append((base.replace(domain=kind, h=[h], **{name: value}), {"name": name, "value": value}))
    return rows


def _run_row(args):
    cfg, index = args
    return run_single(cfg, index)


def _execute(rows, workers: int) -> list[dict]:
    if workers == 1 or len(rows) < 2:
        return [_run_row(r) for r in rows]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_row, rows))


TABLE_COLUMNS = [
    "index",
    "value",
    "h",
    "n_nodes",
    "lambda1",
    "lambda2",
    "lambda3",
    "gap32",
    "converged",
    "nodal_count2",
    "significant2",
    "containment",
    "min_distance",
    "complement_components",
    "monotone_ok",
    "error",
]


def _table_row(rec: dict, ok) -> list:
    lam = rec["eigenvalues"] + [None] * 3
    nodal = rec["nodal"] or {}
    topo = rec["topology"] or {}
    idx = rec["index"] or {}
    return [
        idx.get("name", ""),
        idx.get("value", ""),
        repr(rec["h"]),
        rec["n_nodes"],
        *(repr(v) if v is not None else "" for v in lam[:3]),
        repr(lam[2] - lam[1]) if lam[2] is not None else "",
        rec["converged"],
        nodal.get("count", ""),
        nodal.get("significant", ""),
        nodal.get("verdict", ""),
        "" if nodal.get("min_distance") is None else repr(nodal["min_distance"]),
        topo.get("components", ""),
        "" if ok is None else ok,
        rec["error"] or "",
    ]


def _write_table(path: Path, records: list[dict], oks: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)  # default dialect: RFC 4180 quoting, CRLF rows
        w.writerow(TABLE_COLUMNS)
        for rec, ok in zip(records, oks):
            w.writerow(_table_row(rec, ok))
    return path


def run_sequence(cfg: ExperimentConfig, store: ResultStore | None = None, write_tables: bool = True) -> SequenceResult:
    """Run every (index value, h) row of a sequence study.

    One table per h tracks lambda_2 against the index together with the
    domain-monotonicity check; a separate refinement table lists every row
    ordered by index and then h.
    """
    rows = _rows(cfg)
    records = _execute(rows, cfg.workers)
    if store is not None:
        records = [store.append(r) for r in records]
    result = SequenceResult(cfg.study, records)
    out = Path(cfg.out)
    grows_up = SEQUENCES.get(cfg.study, (None, True))[1]
    for h in cfg.h:
        sub = [r for r in records if r["h"] == h]
        good = [r for r in sub if not r["error"] and len(r["eigenvalues"]) >= 2]
        oks: list = [None] * len(sub)
        if cfg.study in SEQUENCES and len(good) > 1:
            vals = [r["index"]["value"] for r in good]
            grows = [(b > a) == grows_up for a, b in zip(vals[:-1], vals[1:])]
            flags = lambda2_monotone([r["eigenvalues"][1] for r in good], grows, cfg.tol)
            result.monotone[h] = all(flags)
            pos = {id(r): i for i, r in enumerate(sub)}
            for r, f in zip(good[1:], flags):
                oks[pos[id(r)]] = f
        if write_tables:
            result.tables.append(_write_table(out / f"{cfg.study}_h{h:g}.csv", sub, oks))
    if write_tables and len(cfg.h) > 1:
        order = sorted(range(len(records)), key=lambda i: ((records[i]["index"] or {}).get("value", 0), records[i]["h"]))
        result.tables.append(
            _write_table(out / f"{cfg.study}_refinement.csv", [records[i] for i in order], [None] * len(order))
        )
    return result


@dataclass
class FindResult:
    found: bool
    record: dict | None
    log: list[dict]
    message: str


def search_rows(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    """Candidate configurations in search order: M, then eps, then R, then
    h (coarse to fine), with optional shell-only rows last."""
    rows = []
    base = cfg.replace(study="single", values=[], domain="fournais", centers="fibonacci", workers=1)
    for M in cfg.find_M:
        bound = epsilon_upper_bound(fibonacci_centers(M))
        eps_list = list(cfg.find_eps) or [f * bound for f in cfg.find_eps_fraction]
        for eps in eps_list:
            for R in cfg.find_R:
                hs = list(cfg.find_h) or [r * eps for r in cfg.find_h_ratio]
                for h in sorted(hs, reverse=True):
                    rows.append(base.replace(M=int(M), eps=float(eps), R=float(R), h=[float(h)]))
    if cfg.find_shell:
        for R in cfg.find_R:
            for h in sorted(cfg.h, reverse=True):
                rows.append(base.replace(domain="shell", R=float(R), h=[float(h)]))
    return rows


def estimated_nodes(cfg: ExperimentConfig) -> int:
    return int(4.0 / 3.0 * math.pi * cfg.R**3 / cfg.h[0] ** 3)


def find_config(cfg: ExperimentConfig, store: ResultStore | None = None) -> FindResult:
    """First configuration whose psi_2 passes the containment test.

    Rows whose estimated node count exceeds ``find_max_nodes`` are logged
    as unaffordable and skipped. Exhausting the space is a normal outcome.
    """
    entries = []
    for row in search_rows(cfg):
        entry = {"M": row.M, "eps": row.eps, "R": row.R, "h": row.h[0], "domain": row.domain}
        nodes = estimated_nodes(row)
        entry["estimated_nodes"] = nodes
        if nodes > cfg.find_max_nodes:
            entry["status"] = "unaffordable"
            entries.append(entry)
            continue
        rec = run_single(row)
        if store is not None:
            rec = store.append(rec)
        verdict = bool(rec["nodal"] and rec["nodal"]["verdict"])
        entry["status"] = "error" if rec["error"] else ("contained" if verdict else "not contained")
        entries.append(entry)
        if verdict:
            return FindResult(True, rec, entries, "found")
    return FindResult(False, None, entries, NOT_FOUND)
