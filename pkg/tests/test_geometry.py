import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closednodal.geometry import (
    Ball,
    Passage,
    Shell,
    SheetWeb,
    SpherePointSet,
    domain_from_config,
    domain_to_config,
    epsilon_upper_bound,
    make_fournais,
    make_passage,
    make_pole,
    make_sheet,
    room_separation_bound,
    smooth_domain,
)
from closednodal.harness import fibonacci_centers

PROBES = 100_000


def probe(rng, n=PROBES, radius=2.0):
    return rng.uniform(-radius, radius, size=(n, 3))


def implies(a, b):
    return bool(np.all(~a | b))


# ---------------------------------------------------------------- point sets


def test_point_set_validation():
    with pytest.raises(ValueError):
        SpherePointSet(np.array([[0.0, 0.0, 1.1]]))
    with pytest.raises(ValueError):
        SpherePointSet(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(ValueError):
        SpherePointSet(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        SpherePointSet(np.array([[1.0, 0.0]]))


def test_epsilon_bound_examples(antipodal):
    assert epsilon_upper_bound(antipodal) == pytest.approx(0.5)
    assert epsilon_upper_bound(SpherePointSet(np.array([[0.0, 0.0, 1.0]]))) == 0.5
    octa = SpherePointSet(np.eye(3))
    assert epsilon_upper_bound(octa) == pytest.approx(0.25)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=40))
def test_rooms_below_bound_are_disjoint(M):
    pts = fibonacci_centers(M)
    eps = epsilon_upper_bound(pts)
    c = pts.centers
    d = np.linalg.norm(c[:, None] - c[None], axis=-1)[~np.eye(M, dtype=bool)]
    assert np.all(d > 2 * eps * (1 - 1e-12))
    assert eps <= room_separation_bound(pts)


# ---------------------------------------------------------------- Fournais


def test_fournais_membership_and_wall(antipodal):
    f = make_fournais(antipodal, 0.25)
    x = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.5, 0.0, 0.0], [1.9, 0.0, 0.0]])
    assert f.contains(x).tolist() == [True, True, False, True, False]
    cut, t0, t1 = f.wall_crossings(np.array([[0.99, 0.0, 0.0]]), np.array([[1.01, 0.0, 0.0]]))
    assert cut[0] and t0[0] == pytest.approx(0.5) and t1[0] == pytest.approx(0.5)
    # through a room: not severed
    cut, _, _ = f.wall_crossings(np.array([[0.0, 0.0, 0.99]]), np.array([[0.0, 0.0, 1.01]]))
    assert not cut[0]


def test_fournais_rejections(antipodal):
    with pytest.raises(ValueError, match="spectral window"):
        make_fournais(antipodal, 0.25, R=2.1)
    with pytest.raises(ValueError, match="room-separation"):
        make_fournais(antipodal, 0.6)
    with pytest.raises(ValueError):
        make_fournais(antipodal, 0.25, R1=2.0, R=3.6)


def test_relaxed_epsilon_only_needs_disjoint_rooms():
    pts = fibonacci_centers(100)
    with pytest.raises(ValueError):
        make_fournais(pts, 0.1)
    f = make_fournais(pts, 0.1, enforce_sheet_bound=False)
    assert f.eps == 0.1
    with pytest.raises(ValueError):
        make_fournais(pts, 0.2, enforce_sheet_bound=False)


# ---------------------------------------------------------------- sequences


def test_passage_examples(chain):
    p = chain["passage"]
    r = 1.0 + 1.0 / (2 * p.n)
    assert p.contains(np.array([[0.0, 0.0, r]]))[0]
    assert not p.contains(np.array([[r, 0.0, 0.0]]))[0]


def test_passage_volume_monte_carlo(chain, rng):
    n = 1_000_000
    x = rng.uniform(-1.8, 1.8, size=(n, 3))
    a = chain["passage"].contains(x)
    b = chain["fournais"].contains(x)
    diff = b.astype(float) - a.astype(float)
    se = diff.std() / math.sqrt(n)
    assert diff.mean() > 3 * se


def test_sheet_examples(chain):
    p = chain["passage"]
    r = 1.0 + 1.0 / (2 * p.n)
    on_g = np.array([[0.0, math.sqrt(0.5) * r, math.sqrt(0.5) * r]])
    for m in range(1, 5):
        assert make_sheet(p, m).contains(on_g)[0]


def test_sheet_hole_count_antipodal(chain):
    # both levels degenerate to the poles, so G is the great circle x1 = 0
    assert chain["sheet"].holes == 2
    assert [make_sheet(chain["passage"], m).holes for m in range(1, 9)] == [2] * 8


@pytest.mark.parametrize("M", [2, 4, 8])
def test_sheet_hole_bound(M):
    pts = fibonacci_centers(M)
    p = make_passage(make_fournais(pts, 0.5 * epsilon_upper_bound(pts)), 2)
    s = make_sheet(p, 1)
    assert 1 <= s.holes <= 2 * M + 2


def test_sheet_mesh_resolution_error(chain):
    with pytest.raises(ValueError, match="pitch"):
        make_sheet(chain["passage"], 1, mesh_pitch=0.5)


def test_sheet_web_invariants():
    w = SheetWeb((0.5, -0.2, 0.5), 0.1)
    assert w.levels == (-0.2, 0.5)
    assert w.is_connected()
    with pytest.raises(ValueError):
        SheetWeb((0.0,), 0.0)


def test_pole_examples(chain):
    pole = chain["pole"]
    mid = 0.5 * (pole.base.base.outer_wall + pole.R)
    for theta in pole.directions:
        assert not pole.contains((mid * theta)[None])[0]
    # 3/l away (in angle) from every pole direction, same radius
    t = pole.directions[0]
    perp = np.cross(t, [0.0, 0.0, 1.0])
    perp /= np.linalg.norm(perp)
    a = 3.0 / pole.l / mid
    x = mid * (math.cos(a) * t + math.sin(a) * perp)
    assert mid * a == pytest.approx(3.0 / pole.l)  # arc length at that radius
    assert pole.contains(x[None])[0]


def test_pole_requires_large_l(chain):
    with pytest.raises(ValueError, match="ceil"):
        make_pole(chain["sheet"], 0)


def test_smoothing_identity_and_ball(rng):
    ball = Ball(1.0)
    ident = smooth_domain(ball, 0.0, 0.0)
    x = probe(rng, 10_000, 1.3)
    assert np.array_equal(ident.contains(x), ball.contains(x))
    sm = smooth_domain(ball, 0.05, 0.02)
    inside = sm.contains(x)
    r = np.linalg.norm(x, axis=1)
    assert implies(r < 1.0, inside)
    assert implies(inside, r < 1.1)
    with pytest.raises(ValueError):
        smooth_domain(ball, 0.05, 0.06)


def test_smoothing_keeps_pole_complement(chain):
    sm = smooth_domain(chain["pole"], 0.05, 0.0125, guard_h=0.1)
    assert sm.delta == 0.05


# ---------------------------------------------------------------- invariants


def test_nesting(chain, rng):
    x = probe(rng)
    f, p, s, pole = (chain[k] for k in ("fournais", "passage", "sheet", "pole"))
    p4 = make_passage(f, 4)
    assert implies(p.contains(x), p4.contains(x))
    assert implies(p4.contains(x), f.contains(x))
    s2 = make_sheet(p, 2)
    assert implies(s2.contains(x), s.contains(x))
    pole8 = make_pole(s, 8)
    assert implies(pole.contains(x), pole8.contains(x))
    assert implies(pole8.contains(x), s.contains(x))
    sm = smooth_domain(pole, 0.05, 0.0125)
    assert implies(pole.contains(x), sm.contains(x))


def test_contain_unit_ball_and_bounded(chain, rng):
    x = probe(rng, radius=3.0)
    r = np.linalg.norm(x, axis=1)
    for d in list(chain.values()) + [Shell(1.0, 1.8)]:
        R = d.R
        inside = d.contains(x)
        assert implies(inside, r < R + 1)
        if d.kind != "shell":
            assert implies(r < 1.0, inside)


def test_rotational_symmetry(rng):
    x = rng.normal(size=(10_000, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    y = x @ q.T
    for d in (Ball(1.0), Shell(1.0, 1.8)):
        scale = rng.uniform(0.0, 2.0, size=(10_000, 1)) / np.linalg.norm(x, axis=1, keepdims=True)
        assert np.array_equal(d.contains(x * scale), d.contains(y * scale))


def test_config_round_trip(chain):
    sm = smooth_domain(chain["pole"], 0.05, 0.0125)
    for d in list(chain.values()) + [sm, Ball(1.0), Shell(1.0, 1.8)]:
        cfg = domain_to_config(d)
        back = domain_from_config(cfg)
        assert domain_to_config(back) == cfg
        assert type(back) is type(d)


def test_passage_rejects_bad_index(chain):
    with pytest.raises(ValueError):
        make_passage(chain["fournais"], 0)
    with pytest.raises(TypeError):
        make_passage(Ball(1.0), 2)
    assert isinstance(make_passage(chain["fournais"], 3), Passage)
