import itertools
import random
from dataclasses import replace

import pytest

from surfemb4.bands import (
    BandCatalog,
    BandError,
    BandRecord,
    InconsistentCut,
    MixedW1Annulus,
    NotLinearizable,
    RelH2,
    SurfaceComponent,
    SurfaceModel,
    ThetaConflict,
    band_fibre_finger_move,
    is_b_characteristic,
    is_r_characteristic,
    is_s_characteristic,
    lambda_boundary_check,
    split_cut_components,
    theta,
    theta_on_span,
    union_records,
    validate_record,
    validate_theta_well_defined,
)
from surfemb4.whitney import DoublePoint, WhitneyCollection, WhitneyDisc, t_count


def torus_surface():
    return SurfaceModel([SurfaceComponent(0, 1, True)])


def klein_surface():
    return SurfaceModel([SurfaceComponent(0, 2, False)])


def record(surface, rel, rid, kind, rel_class, boundary_classes, *, mu=0, arc=0,
           interior=0, euler=0, core=None):
    bcs = tuple(tuple(c) for c in boundary_classes)
    w1s = tuple(surface.w1_of(c) for c in bcs)
    if core is None:
        core = sum(w1s) % 2
    r = BandRecord(rid, kind, tuple(rel_class), bcs, w1s, core, mu, arc, interior, euler)
    validate_record(r, surface, rel)
    return r


def test_theta_seifert_band_vanishes():
    surface = torus_surface()
    rel = RelH2(("seifert",), {"seifert": (1, 0)})
    r = record(surface, rel, "seifert", "surface", [1], [(1, 0)])
    assert theta(r) == 0


def test_theta_single_interior_intersection():
    surface = torus_surface()
    rel = RelH2(("x",), {"x": (1, 0)})
    r = record(surface, rel, "x", "annulus", [1], [(1, 0), (0, 0)], interior=1)
    assert theta(r) == 1


def test_theta_klein_bottle_band_tracks_euler_number():
    surface = klein_surface()
    rel = RelH2(("b11",), {"b11": (1, 1)})
    r0 = record(surface, rel, "b", "mobius", [1], [(1, 1)], euler=0)
    r4 = record(surface, rel, "b", "mobius", [1], [(1, 1)], euler=1)
    assert theta(r0) == 0 and theta(r4) == 1


def test_theta_mixed_annulus_raises_with_hint():
    surface = klein_surface()
    rel = RelH2(("m",), {"m": (1, 0)})
    r = record(surface, rel, "m", "annulus", [1], [(1, 0), (0, 0)])
    with pytest.raises(MixedW1Annulus) as exc:
        theta(r)
    assert exc.value.verdict_hint == "km=0"


def test_mobius_with_reversing_boundary_rejected():
    surface = klein_surface()
    rel = RelH2(("m",), {"m": (1, 0)})
    with pytest.raises(BandError):
        record(surface, rel, "m", "mobius", [1], [(1, 0)])


def test_lambda_check_empty_catalog():
    surface = torus_surface()
    rel = RelH2((), {})
    catalog = BandCatalog(surface, rel, ())
    assert lambda_boundary_check(catalog)
    assert is_b_characteristic(catalog).yes


def test_lambda_check_dual_pair_fails():
    surface = torus_surface()
    rel = RelH2(("da", "db"), {"da": (1, 0), "db": (0, 1)})
    ra = record(surface, rel, "da", "surface", [1, 0], [(1, 0)])
    rb = record(surface, rel, "db", "surface", [0, 1], [(0, 1)])
    catalog = BandCatalog(surface, rel, (ra, rb))
    assert not lambda_boundary_check(catalog)
    result = is_b_characteristic(catalog)
    assert not result.yes and result.witness == ("da", "db")


def test_lambda_check_self_dual_class_fails():
    # single band whose total boundary is a self-dual nonorientable class;
    # encoded as a (mixed) annulus since lone reversing circles bound no
    # admissible mobius band
    surface = klein_surface()
    rel = RelH2(("e",), {"e": (1, 0)})
    r = record(surface, rel, "e", "annulus", [1], [(1, 0), (0, 0)])
    catalog = BandCatalog(surface, rel, (r,))
    assert not lambda_boundary_check(catalog)
    assert not is_b_characteristic(catalog).yes


def test_validate_theta_well_defined():
    surface = torus_surface()
    rel = RelH2(("x",), {"x": (0, 0)})
    r1 = record(surface, rel, "r1", "surface", [1], [], interior=0)
    r2 = record(surface, rel, "r2", "surface", [1], [], interior=1, euler=1)
    assert validate_theta_well_defined(BandCatalog(surface, rel, (r1, r2))) is None
    r3 = record(surface, rel, "r3", "surface", [1], [], interior=1)
    conflict = validate_theta_well_defined(BandCatalog(surface, rel, (r1, r3)))
    assert conflict is not None and conflict.witnesses == ("r1", "r3")


def test_theta_on_span_linearity():
    surface = SurfaceModel([SurfaceComponent(0, 2, True)])
    rel = RelH2(("x", "y"), {"x": (1, 0, 0, 0), "y": (0, 0, 1, 0)})
    rx = record(surface, rel, "x", "surface", [1, 0], [(1, 0, 0, 0)], interior=1)
    ry = record(surface, rel, "y", "surface", [0, 1], [(0, 0, 1, 0)], interior=1)
    functional = theta_on_span(BandCatalog(surface, rel, (rx, ry)))
    assert functional.evaluate((1, 0)) == 1
    assert functional.evaluate((1, 1)) == 0  # disjoint boundaries: values add
    assert not functional.is_zero()


def test_theta_on_span_empty():
    surface = torus_surface()
    functional = theta_on_span(BandCatalog(surface, RelH2((), {}), ()))
    assert functional.is_zero()


def test_theta_on_span_not_linearizable():
    surface = torus_surface()
    rel = RelH2(("da", "db"), {"da": (1, 0), "db": (0, 1)})
    ra = record(surface, rel, "da", "surface", [1, 0], [(1, 0)])
    rb = record(surface, rel, "db", "surface", [0, 1], [(0, 1)])
    with pytest.raises(NotLinearizable):
        theta_on_span(BandCatalog(surface, rel, (ra, rb)))


def test_span_inconsistency_detected():
    surface = torus_surface()
    rel = RelH2(("x", "y"), {"x": (0, 0), "y": (0, 0)})
    r1 = record(surface, rel, "r1", "surface", [1, 0], [], interior=1)
    r2 = record(surface, rel, "r2", "surface", [0, 1], [], interior=1)
    r3 = record(surface, rel, "r3", "surface", [1, 1], [], interior=1)
    with pytest.raises(ThetaConflict):
        theta_on_span(BandCatalog(surface, rel, (r1, r2, r3)))


def test_s_and_r_characteristic():
    assert is_s_characteristic([(1, 1)])
    assert not is_s_characteristic([(0, 1)])
    assert is_s_characteristic([])
    assert is_r_characteristic([(1, 1)])
    assert not is_r_characteristic([(0, 1)])
    assert is_r_characteristic([])


def _torus_fixture():
    surface = torus_surface()
    points = [DoublePoint(0, (0, 0), 1, 0), DoublePoint(1, (0, 0), -1, 0)]
    disc = WhitneyDisc(0, (0, 1), {0: 1})
    coll = WhitneyCollection((disc,), {}, convenient=True)
    return surface, points, coll


def test_finger_move_theta_zero_keeps_t():
    surface, points, coll = _torus_fixture()
    rel = RelH2(("s",), {"s": (1, 0)})
    band = record(surface, rel, "s", "surface", [1], [(1, 0)])
    new_points, out, delta = band_fibre_finger_move(points, coll, band, surface, [0], identity=0)
    assert delta == 0
    assert t_count(new_points, [0], out) == t_count(points, [0], coll)


def test_finger_move_theta_one_flips_t():
    surface, points, coll = _torus_fixture()
    rel = RelH2(("s",), {"s": (1, 0)})
    band = record(surface, rel, "s", "surface", [1], [(1, 0)], interior=1)
    new_points, out, delta = band_fibre_finger_move(points, coll, band, surface, [0], identity=0)
    assert delta == 1
    assert t_count(new_points, [0], out) != t_count(points, [0], coll)


def test_finger_move_dual_pair_with_pushoff_flips_once():
    # two dual bands, each with Theta = 0; the second picks up one arc
    # intersection with the first new disc, so the combined effect flips t
    surface, points, coll = _torus_fixture()
    rel = RelH2(("a", "b"), {"a": (1, 0), "b": (0, 1)})
    band_a = record(surface, rel, "a", "surface", [1, 0], [(1, 0)])
    band_b = record(surface, rel, "b", "surface", [0, 1], [(0, 1)])
    t0 = t_count(points, [0], coll)
    pts1, coll1, d1 = band_fibre_finger_move(points, coll, band_a, surface, [0], identity=0)
    assert d1 == 0
    band_b_pushed = replace(band_b, arc_count=1)
    pts2, coll2, d2 = band_fibre_finger_move(pts1, coll1, band_b_pushed, surface, [0], identity=0)
    assert d2 == 1
    assert t_count(pts2, [0], coll2) == (t0 + 1) % 2


def _random_record(surface, rel, rng, rid):
    dim = surface.dim
    names = len(rel.basis)
    kind = rng.choice(("annulus", "mobius", "surface"))
    while True:
        if kind == "annulus":
            classes = [tuple(rng.randrange(2) for _ in range(dim)) for _ in range(2)]
            w1s = [surface.w1_of(c) for c in classes]
            if sorted(w1s) == [0, 1]:
                continue  # mixed annuli have no invariant
        elif kind == "mobius":
            classes = [tuple(rng.randrange(2) for _ in range(dim))]
            if surface.w1_of(classes[0]) == 1:
                continue
        else:
            classes = [tuple(rng.randrange(2) for _ in range(dim))
                       for _ in range(rng.randrange(3))]
            if any(surface.w1_of(c) for c in classes):
                continue
        break
    total = tuple(0 for _ in range(dim))
    for c in classes:
        total = tuple(x ^ y for x, y in zip(total, c))
    rel_class = [0] * names
    rel_class[rng.randrange(names)] = 1
    rel = RelH2(rel.basis, dict(rel.boundary))
    # declare the boundary map consistently for this record's basis vector
    name = rel.basis[rel_class.index(1)]
    boundary = dict(rel.boundary)
    boundary[name] = total
    rel = RelH2(rel.basis, boundary)
    r = BandRecord(
        rid, kind, tuple(rel_class), tuple(classes),
        tuple(surface.w1_of(c) for c in classes),
        sum(surface.w1_of(c) for c in classes) % 2,
        rng.randrange(2), rng.randrange(2), rng.randrange(2), rng.randrange(2),
    )
    validate_record(r, surface, rel)
    return r


def test_theta_quadraticity_randomized():
    rng = random.Random(41)
    surfaces = [
        torus_surface(),
        klein_surface(),
        SurfaceModel([SurfaceComponent(0, 2, True), SurfaceComponent(1, 1, False)]),
    ]
    rel_basis = ("u", "v", "w")
    count = 0
    while count < 300:
        surface = rng.choice(surfaces)
        rel = RelH2(rel_basis, {n: (0,) * surface.dim for n in rel_basis})
        r1 = _random_record(surface, rel, rng, "r1")
        r2 = _random_record(surface, rel, rng, "r2")
        u = union_records(r1, r2, surface)
        lam = surface.form(r1.total_boundary(surface.dim), r2.total_boundary(surface.dim))
        try:
            expected = (theta(r1) + theta(r2) + lam) % 2
        except MixedW1Annulus:
            continue
        assert theta(u) == expected
        count += 1


def test_b_implies_r_implies_s_randomized():
    # linked catalogs per the closing-up recipe: F.R + R.R = Theta(B)
    rng = random.Random(43)
    surface = torus_surface()
    for _ in range(300):
        rel = RelH2(("x", "y", "z"), {"x": (0, 0), "y": (0, 0), "z": (0, 0)})
        records = []
        for i in range(rng.randrange(1, 4)):
            interior = rng.randrange(2)
            euler = rng.randrange(2)
            rel_class = [0, 0, 0]
            rel_class[i] = 1
            records.append(record(surface, rel, f"b{i}", "surface",
                                  rel_class, [], interior=interior, euler=euler))
        catalog = BandCatalog(surface, rel, tuple(records))
        rp2 = []
        for r in records:
            rr = rng.randrange(2)
            rp2.append(((theta(r) + rr) % 2, rr))
        spheres = list(rp2)  # odd-degree collapse transfers the congruence
        b = is_b_characteristic(catalog).yes
        if b:
            assert is_r_characteristic(rp2)
            assert is_s_characteristic(spheres)
        if not is_r_characteristic(rp2):
            assert not b


def test_b_equals_r_for_simply_connected_components():
    # over a union of spheres every band closes up, so the two notions agree
    rng = random.Random(45)
    surface = SurfaceModel([SurfaceComponent(0, 0, True)])
    for _ in range(200):
        size = rng.randrange(1, 4)
        basis = tuple(f"c{i}" for i in range(size))
        rel = RelH2(basis, {n: () for n in basis})
        records = []
        for i in range(size):
            rel_class = [0] * size
            rel_class[i] = 1
            records.append(record(surface, rel, f"b{i}", "surface", rel_class, [],
                                  interior=rng.randrange(2), euler=rng.randrange(2)))
        catalog = BandCatalog(surface, rel, tuple(records))
        rp2 = []
        for r in records:
            rr = rng.randrange(2)
            rp2.append(((theta(r) + rr) % 2, rr))
        assert is_b_characteristic(catalog).yes == is_r_characteristic(rp2)


def test_split_cut_sphere_two_discs():
    assert split_cut_components([0, 1], [(0, 1, 1)]) == [0]


def test_split_cut_torus_two_parallel_curves():
    selected = split_cut_components([0, 1], [(0, 1, 1), (0, 1, 1)])
    assert selected == [0]
    # exhaustive check over the 2-labelings: the other valid selection is {1}
    valid = []
    for bits in itertools.product((0, 1), repeat=2):
        if all(bits[0] ^ bits[1] == 1 for _ in range(2)):
            valid.append([n for n in (0, 1) if bits[n] == 0])
    assert selected in valid


def test_split_cut_nonseparating_curve_inconsistent():
    with pytest.raises(InconsistentCut):
        split_cut_components([0], [(0, 0, 1)])


def test_split_cut_every_edge_once():
    rng = random.Random(47)
    for _ in range(100):
        n = rng.randrange(2, 7)
        # build a random bipartite-consistent parity-1 graph
        labels = [rng.randrange(2) for _ in range(n)]
        edges = []
        for _ in range(rng.randrange(1, 2 * n)):
            u, v = rng.randrange(n), rng.randrange(n)
            if labels[u] == labels[v]:
                continue
            edges.append((u, v, 1))
        if not edges:
            continue
        selected = set(split_cut_components(list(range(n)), edges))
        for u, v, _ in edges:
            assert (u in selected) != (v in selected)
