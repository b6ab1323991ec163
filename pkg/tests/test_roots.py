from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from branchfloer import plumbing as pl
from branchfloer import roots as rt

GAMMA7 = pl.star(-1, [[-2], [-3], [-7]])
E8 = pl.star(-2, [[-2, -2, -2, -2], [-2, -2], [-2]])


def test_gamma7_star_root_shape():
    """Two weight-0 leaves exchanged by the reflection, merging one level down."""
    r = rt.build_root_star(GAMMA7)
    assert r.stable
    assert r.d_invariant() == 0
    top = r.vertices_at(r.n_min)
    assert len(top) == 2
    assert r.weights[top[0]] == r.weights[top[1]] == 0
    assert r.involution[top[0]] == top[1]
    assert r.succ[top[0]] == r.succ[top[1]]
    assert set(r.leaves) == set(top)
    # below the merge it is a plain stem fixed by the involution
    for v in range(len(r)):
        if v not in top:
            assert r.involution[v] == v


def test_gamma7_box_equals_star():
    a = rt.build_root_star(GAMMA7)
    b = rt.build_root_box(GAMMA7)
    assert a.is_isomorphic(b, with_involution=True)


def test_gamma_family_two_swapped_leaves():
    for q in (9, 11, 13, 15):
        tree = pl.star(-1, [[-2], [-3], [-q]])
        r = rt.build_root_star(tree)
        assert r.d_invariant() == Fraction(7 - q, 4)
        top = r.vertices_at(r.n_min)
        assert len(top) == 2 and r.involution[top[0]] == top[1]


def test_d_invariant_anchors():
    # E8 boundary with its natural orientation
    assert rt.build_root_star(E8).d_invariant() == 2
    # lens space of a single -3 vertex, spin structure
    minus3 = pl.PlumbingTree((-3,), ())
    assert rt.build_root_star(minus3).d_invariant() == Fraction(-1, 2)
    # same space with reversed orientation via the -1 star with two -3 legs,
    # which blows down to the chain (-2, -2)
    tref = pl.star(-1, [[-3], [-3]])
    assert rt.build_root_star(tref).d_invariant() == Fraction(1, 2)
    assert rt.build_root_star(pl.linear_chain([-2, -2])).d_invariant() == Fraction(1, 2)


def test_pure_stem_root_has_trivial_involution():
    minus3 = pl.PlumbingTree((-3,), ())
    r = rt.build_root_star(minus3)
    assert r.involution == tuple(range(len(r)))
    assert len(r.leaves) == 1


def test_two_legged_star_single_components():
    # every sublevel set is connected here, so the reflection acts trivially
    tree = pl.star(-2, [[-3], [-3]])
    r = rt.build_root_star(tree)
    assert r.d_invariant() == Fraction(1, 4)
    for n in range(r.n_min, r.n_max + 1):
        assert len(r.vertices_at(n)) == 1
    assert r.involution == tuple(range(len(r)))
    assert r.is_isomorphic(rt.build_root_box(tree))


def test_explicit_stop_level_flags_instability():
    for build in (rt.build_root_star, rt.build_root_box):
        r = build(GAMMA7, n_max=0)
        assert not r.stable
        assert len(r.vertices_at(0)) == 2
    with pytest.raises(rt.InstabilityError):
        rt.build_root_star(GAMMA7, n_max=-5)


def test_representative_independence():
    """Changing k inside its spinc class shifts levels but not the root."""
    k1 = pl.spin_char(GAMMA7)
    q = np.array(pl.intersection_form(GAMMA7))
    k2 = tuple(int(x) for x in np.array(k1) + 2 * q @ np.array([1, 0, 0, 0]))
    r1 = rt.build_root_star(GAMMA7, k1)
    r2 = rt.build_root_star(GAMMA7, k2)
    assert r1.is_isomorphic(r2, with_involution=True)
    assert r1.d_invariant() == r2.d_invariant()


def test_isomorphism_is_discriminating():
    r7 = rt.build_root_star(GAMMA7)
    r8 = rt.build_root_star(E8)
    assert not r7.is_isomorphic(r8)
    r9 = rt.build_root_star(pl.star(-1, [[-2], [-3], [-9]]))
    assert not r7.is_isomorphic(r9)  # same shape, different weights


def test_involution_selection():
    aut = (0, 2, 1)
    tree = pl.star(-2, [[-3], [-3]], automorphism=aut)
    r = rt.build_root_star(tree)
    assert r.graph_perm is not None
    assert rt.graph_involution(r).involution == r.graph_perm
    assert rt.lattice_involution(r).involution == r.reflection
    trivial = r.with_involution("trivial")
    assert trivial.involution == tuple(range(len(r)))
    with pytest.raises(ValueError):
        r.with_involution("nonsense")


def test_json_round_trip():
    r = rt.build_root_star(GAMMA7)
    back = rt.GradedRoot.from_json(r.to_json())
    assert back.levels == r.levels
    assert back.weights == r.weights
    assert back.succ == r.succ
    assert back.involution == r.involution
    assert r.is_isomorphic(back)


def test_dot_output_is_deterministic():
    r = rt.build_root_star(GAMMA7)
    dot = r.render_dot()
    assert dot == r.render_dot()
    assert dot.startswith("digraph graded_root {")
    assert "style=dashed" in dot  # the leaf swap is drawn
    assert dot.count("->") >= len(r) - 1


def test_memory_guard():
    with pytest.raises(rt.MemoryGuardError):
        rt.build_root_box(E8, radius=4, max_points=10_000)


def test_dispatch_prefers_star():
    assert rt.build_root(GAMMA7).engine == "star"
    # a tree that branches twice cannot use the star engine
    bush = pl.PlumbingTree(
        (-3, -2, -2, -3, -2, -2),
        ((0, 1), (1, 2), (1, 3), (3, 4), (3, 5)),
    )
    assert rt.build_root(bush).engine == "box"


@st.composite
def small_star_trees(draw):
    center = draw(st.integers(min_value=-4, max_value=-1))
    legs = []
    for _ in range(draw(st.integers(min_value=1, max_value=3))):
        length = draw(st.integers(min_value=1, max_value=2))
        legs.append(
            [draw(st.integers(min_value=-5, max_value=-2)) for _ in range(length)]
        )
    tree = pl.star(center, legs)
    assume(len(tree) <= 4)
    assume(pl.is_negative_definite(pl.intersection_form(tree)))
    pd = pl.pd_vector(tree, pl.spin_char(tree))
    assume(all(abs(x) <= 10 for x in pd))
    return tree


@settings(max_examples=40, deadline=None)
@given(small_star_trees())
def test_engines_agree_on_random_stars(tree):
    a = rt.build_root_star(tree)
    b = rt.build_root_box(tree)
    assert a.is_isomorphic(b, with_involution=True)
    assert a.d_invariant() == b.d_invariant()
