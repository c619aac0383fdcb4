import csv
import json

import numpy as np
import pytest

from closednodal.config import ExperimentConfig
from closednodal.harness import (
    NOT_FOUND,
    build_domain,
    estimated_nodes,
    fibonacci_centers,
    find_config,
    lambda2_monotone,
    replay,
    run_sequence,
    run_single,
    search_rows,
    strip_timings,
)
from closednodal.store import ResultStore, _clean

ANTIPODAL = "0 0 1 | 0 0 -1"

SEQUENCE_VALUES = {
    "passage-sequence": [2, 3, 4],
    "sheet-sequence": [1, 2, 3],
    "pole-sequence": [4, 6, 8],
    "smooth-sequence": [0.03, 0.06, 0.1],
    "epsilon-sweep": [0.15, 0.2, 0.25],
}


def canonical(rec):
    return json.dumps(_clean(strip_timings(rec)), sort_keys=True)


def test_fibonacci_examples():
    np.testing.assert_allclose(fibonacci_centers(1).centers, [[1.0, 0.0, 0.0]], atol=1e-15)
    z = fibonacci_centers(2).centers[:, 2]
    np.testing.assert_allclose(z, [0.5, -0.5])
    for M in (3, 16, 100):
        c = fibonacci_centers(M).centers
        np.testing.assert_allclose(np.linalg.norm(c, axis=1), 1.0, rtol=1e-15)
        assert len(np.unique(np.round(c, 12), axis=0)) == M
    with pytest.raises(ValueError):
        fibonacci_centers(0)


def test_build_domain_kinds():
    for kind in ("ball", "shell", "fournais", "passage", "sheet", "pole", "smoothed"):
        d = build_domain(ExperimentConfig(domain=kind, centers=ANTIPODAL, eps=0.25))
        assert d.kind == kind
    # auto pole index keeps the poles clear of the unit ball
    d = build_domain(ExperimentConfig(domain="pole", centers=ANTIPODAL, eps=0.25, n=3))
    assert d.l >= 6


def test_single_record_and_replay(tmp_path):
    cfg = ExperimentConfig(domain="fournais", centers=ANTIPODAL, eps=0.25, h=[0.1], betti=False)
    rec = ResultStore(tmp_path / "r.ndjson").append(run_single(cfg))
    assert rec["error"] is None and rec["converged"]
    assert len(rec["eigenvalues"]) == 3 and rec["nodal_counts"][0] == 1
    assert set(rec["timings"]) >= {"discretize", "solve", "nodal", "topology"}
    assert canonical(replay(rec)) == canonical(rec)


def test_errors_are_recorded(tmp_path):
    cfg = ExperimentConfig(domain="fournais", M=16, eps=0.5, h=[0.1])
    rec = ResultStore(tmp_path / "r.ndjson").append(run_single(cfg))
    assert rec["error"].startswith("ValueError")
    assert rec["eigenvalues"] == [] and rec["nodal"] is None


def test_workers_do_not_change_results(tmp_path):
    base = ExperimentConfig(domain="ball", h=[0.25, 0.2], out=str(tmp_path))
    a = run_sequence(base, write_tables=False).records
    b = run_sequence(base.replace(workers=2), write_tables=False).records
    assert [canonical(r) for r in a] == [canonical(r) for r in b]


def test_lambda2_monotone_rule():
    assert lambda2_monotone([10.0, 9.0, 8.0], [True, True], 1e-6) == [True, True]
    assert lambda2_monotone([10.0, 11.0], [True], 1e-6) == [False]
    assert lambda2_monotone([10.0, 11.0], [False], 1e-6) == [True]
    # rises within the solver accuracy are tolerated
    assert lambda2_monotone([10.0, 10.0 + 1e-6], [True], 1e-6) == [True]


def test_empty_search_not_found():
    res = find_config(ExperimentConfig(find_M=[]))
    assert not res.found and res.message == NOT_FOUND and res.log == []


def test_default_search_space_is_unaffordable():
    cfg = ExperimentConfig()
    rows = search_rows(cfg)
    assert [r.M for r in rows] == [8, 12, 16]
    for r in rows:
        assert r.R == 1.8 and r.h[0] <= r.eps / 4
    res = find_config(cfg)
    assert not res.found and res.message == NOT_FOUND
    assert all(e["status"] == "unaffordable" for e in res.log)
    assert all(e["estimated_nodes"] > cfg.find_max_nodes for e in res.log)


def test_shell_only_rows_fail(tmp_path):
    cfg = ExperimentConfig(find_M=[], find_shell=True, h=[0.1])
    res = find_config(cfg, ResultStore(tmp_path / "r.ndjson"))
    assert not res.found and res.message == NOT_FOUND
    assert [e["status"] for e in res.log] == ["not contained"]


def test_search_order():
    cfg = ExperimentConfig(find_M=[8, 12], find_eps_fraction=[0.5, 0.25], find_h_ratio=[0.5, 0.25])
    rows = search_rows(cfg)
    assert len(rows) == 8
    keys = [(r.M, -r.eps, -r.h[0]) for r in rows]
    assert keys == sorted(keys)
    assert estimated_nodes(ExperimentConfig(R=1.0, h=[0.1])) == int(4 / 3 * np.pi * 1000)


@pytest.fixture(scope="module")
def sequences(tmp_path_factory):
    out = tmp_path_factory.mktemp("seq")
    results = {}
    for study, values in SEQUENCE_VALUES.items():
        cfg = ExperimentConfig(study=study, centers=ANTIPODAL, eps=0.25, values=values, h=[0.1], out=str(out))
        results[study] = run_sequence(cfg, ResultStore(out / "records.ndjson"))
    return results


@pytest.mark.parametrize("study", list(SEQUENCE_VALUES))
def test_sequence_monotone(sequences, study):
    res = sequences[study]
    assert all(r["error"] is None for r in res.records)
    assert res.monotone == {0.1: True}
    for r in res.records:
        assert r["nodal_counts"][1] <= 2


def test_sequence_tables(sequences):
    res = sequences["passage-sequence"]
    (path,) = res.tables
    raw = path.read_bytes()
    assert b"\r\n" in raw
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert [int(r["value"]) for r in rows] == SEQUENCE_VALUES["passage-sequence"]
    assert [r["monotone_ok"] for r in rows] == ["", "True", "True"]
    lam2 = [float(r["lambda2"]) for r in rows]
    assert lam2 == sorted(lam2, reverse=True)


def test_sequence_needs_values():
    with pytest.raises(ValueError):
        run_sequence(ExperimentConfig(study="pole-sequence"), write_tables=False)
    with pytest.raises(ValueError):
        run_sequence(ExperimentConfig(study="passage-sequence", values=[1.5]), write_tables=False)
