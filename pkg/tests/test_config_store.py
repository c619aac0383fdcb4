import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closednodal.config import FIELDS, ExperimentConfig, dump_config, load_config, parse_config
from closednodal.store import HEADER, ResultStore, read_records, validate_record

finite = st.floats(min_value=1e-9, max_value=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(
    eps=st.one_of(st.just("auto"), finite),
    R=finite,
    h=st.lists(finite, min_size=1, max_size=4),
    values=st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=5),
    seed=st.integers(0, 2**63 - 1),
    tol=finite,
    betti=st.booleans(),
    l=st.one_of(st.just("auto"), st.integers(1, 1000)),
)
def test_round_trip_is_exact(eps, R, h, values, seed, tol, betti, l):
    cfg = ExperimentConfig(eps=eps, R=R, h=h, values=values, seed=seed, tol=tol, betti=betti, l=l)
    assert parse_config(dump_config(cfg)) == cfg


def test_defaults_and_comments(tmp_path):
    text = "# header\nstudy = epsilon-sweep   # trailing\n\nvalues = 0.15, 0.1\nstrict_eps = false\n"
    p = tmp_path / "c.conf"
    p.write_text(text)
    cfg = load_config(p)
    assert cfg.study == "epsilon-sweep" and cfg.values == [0.15, 0.1] and cfg.strict_eps is False
    assert cfg.h == [0.05] and cfg.k == 3
    assert list(cfg.to_dict()) == list(FIELDS)


@pytest.mark.parametrize(
    "text",
    [
        "colour = blue",
        "h = 0.1\nh = 0.2",
        "just a line",
        "k = 2",
        "k = three",
        "betti = maybe",
        "study = dance",
        "h = -1",
        "eps = none",
    ],
)
def test_invalid_config(text):
    with pytest.raises(ValueError):
        parse_config(text)


def minimal_record(**over):
    rec = {
        "schema_version": 1,
        "config": ExperimentConfig().to_dict(),
        "domain": {"kind": "ball"},
        "index": None,
        "h": 0.1,
        "n_nodes": 10,
        "eigenvalues": [1.0, 2.0, 3.0],
        "gaps": [1.0, 1.0],
        "residuals": [0.0, 0.0, 0.0],
        "converged": True,
        "nodal": {"count": 2, "signs": [1, -1], "verdict": False, "margin": 0.2, "min_distance": float("nan")},
        "topology": None,
        "timings": {"solve": 0.1},
        "error": None,
    }
    rec.update(over)
    return rec


def test_store_round_trip(tmp_path):
    path = tmp_path / "out" / "r.ndjson"
    store = ResultStore(path)
    stored = store.append(minimal_record())
    assert stored["nodal"]["min_distance"] is None
    store.append(minimal_record(h=0.05))
    again = ResultStore(path)
    recs = again.records()
    assert [r["h"] for r in recs] == [0.1, 0.05]
    assert json.loads(path.read_text().splitlines()[0]) == HEADER
    assert read_records(path) == recs


@pytest.mark.parametrize(
    "bad",
    [
        {"schema_version": 2},
        {"h": 0},
        {"eigenvalues": ["x"]},
        {"nodal": {"count": 0, "signs": [], "verdict": None, "margin": 0.1, "min_distance": 0.0}},
        {"nodal": {"count": 1, "signs": [0], "verdict": None, "margin": 0.1, "min_distance": 0.0}},
        {"config": {"h": 0.1}},
    ],
)
def test_store_rejects_invalid(tmp_path, bad):
    import jsonschema

    with pytest.raises(jsonschema.ValidationError):
        ResultStore(tmp_path / "r.ndjson").append(minimal_record(**bad))
    with pytest.raises(jsonschema.ValidationError):
        validate_record(minimal_record(**bad))


def test_store_rejects_foreign_file(tmp_path):
    p = tmp_path / "r.ndjson"
    p.write_text('{"format": "other"}\n')
    with pytest.raises(ValueError):
        ResultStore(p)
