"""Root-level reductions behind the connected invariants.

Two ways to shrink a symmetric graded root without changing its local
equivalence class:

* `monotone_subroot` keeps only a distinguished set of leaves, found by
  walking the stem upward from the highest-weight invariant vertex and
  collecting swapped leaf pairs of strictly increasing weight.  Its model
  complex computes the connected homology with no searching at all.
* `symmetric_reduction` deletes swapped leaf pairs outright, redirecting them
  onto an invariant vertex of the same weight.  Each deletion is certified by
  an explicit chain map, so when the procedure runs to completion the result
  is a root with trivial involution in the same class; when no valid target
  exists the report says so (and the reduced connected homology is then
  forced to be nonzero).

`omega` and `branched_dimensions` are small readers used by the knot-level
pipeline and the cross-checking tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .complexes import (
    GradedUModule,
    RankBoundExceeded,
    UMap,
    _bits,
    _exp_of,
    connected_homology_brute,
    homology,
    is_local_equivalence,
    lift_involution,
    model_complex,
)
from .exact import solve_mod2
from .roots import GradedRoot


def _leaves_above(root: GradedRoot) -> dict[int, frozenset]:
    """For each vertex, the set of leaves whose downward path passes it."""
    above: dict[int, frozenset] = {}
    for v in sorted(range(len(root)), key=lambda v: root.levels[v]):
        kids = root.children(v)
        if kids:
            above[v] = frozenset().union(*(above[c] for c in kids))
        else:
            above[v] = frozenset({v})
    return above


def _best_pair(root, leafset, floor):
    """Swapped pair in leafset of maximal weight (above floor, if given).

    Ties go to the pair containing the smallest vertex id.  Returns None when
    no pair qualifies."""
    j = root.involution
    best = None
    for v in sorted(leafset):
        if j[v] == v or j[v] < v or j[v] not in leafset:
            continue
        w = root.weights[v]
        if floor is not None and w <= floor:
            continue
        if best is None or w > root.weights[best]:
            best = v
    if best is None:
        return None
    return (best, j[best])


def monotone_leaves(root: GradedRoot) -> tuple[int, ...]:
    """The distinguished leaf set of the monotone subroot.

    Start at the invariant vertex of highest weight: a lone leaf over it is
    kept, otherwise one swapped pair of maximal weight.  Then walk down the
    stem; whenever the set of leaves overhead grows, adopt a swapped pair of
    maximal weight provided it strictly beats everything selected so far.
    """
    j = root.involution
    above = _leaves_above(root)
    invariant = [v for v in range(len(root)) if j[v] == v]
    if not invariant:
        raise ValueError("symmetric root has no invariant vertex")
    v0 = min(invariant, key=lambda v: (-root.weights[v], v))
    selected: set[int] = set()
    if len(above[v0]) == 1:
        selected.update(above[v0])
    else:
        pair = _best_pair(root, above[v0], None)
        assert pair is not None, "no invariant leaf and no swapped pair over v0"
        selected.update(pair)
    seen = len(above[v0])
    cur = root.succ[v0]
    while cur is not None:
        if len(above[cur]) > seen:
            floor = max(root.weights[l] for l in selected)
            pair = _best_pair(root, above[cur], floor)
            if pair is not None:
                selected.update(pair)
            seen = len(above[cur])
        cur = root.succ[cur]
    return tuple(sorted(selected))


def _subroot_spanned(root: GradedRoot, leaf_ids):
    """Smallest subroot containing the given leaves, plus the id map into it.

    The leaf set must be closed under the involution; successors, weights and
    representatives are inherited, candidate involutions are dropped."""
    keep: set[int] = set()
    for l in leaf_ids:
        v: int | None = l
        while v is not None and v not in keep:
            keep.add(v)
            v = root.succ[v]
    j = root.involution
    for v in keep:
        if j[v] not in keep:
            raise ValueError("leaf set is not closed under the involution")
    order = sorted(keep)
    index = {v: i for i, v in enumerate(order)}
    sub = GradedRoot(
        levels=tuple(root.levels[v] for v in order),
        weights=tuple(root.weights[v] for v in order),
        succ=tuple(
            index[root.succ[v]] if root.succ[v] is not None else None for v in order
        ),
        involution=tuple(index[j[v]] for v in order),
        stable=root.stable,
        reps=tuple(root.reps[v] for v in order) if root.reps is not None else None,
        engine=root.engine,
    )
    return sub, index


def monotone_subroot(root: GradedRoot) -> GradedRoot:
    """Subroot spanned by the distinguished leaves; computes the connected
    homology through its model complex."""
    sub, _ = _subroot_spanned(root, monotone_leaves(root))
    return sub


def connected_homology(root: GradedRoot, verify: bool = False) -> GradedUModule:
    """Homology of the monotone subroot's model complex.

    With verify=True the answer is recomputed by enumerating maximal
    self-equivalences of the full model whenever its rank permits; a
    disagreement is a hard failure."""
    module = homology(model_complex(monotone_subroot(root)).cx)
    if verify:
        model = model_complex(root)
        try:
            brute = connected_homology_brute(model.cx, lift_involution(model))
        except RankBoundExceeded:
            return module
        if brute != module:
            raise ValueError("monotone subroot disagrees with the brute-force image")
    return module


def omega(module: GradedUModule) -> int:
    """Smallest n with U^n killing the torsion part (0 when there is none)."""
    return max((length for _, length in module.torsion), default=0)


# ---------------------------------------------------------------------------
# deleting swapped leaf pairs


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of symmetric_reduction.

    root: the reduced root; its involution is trivial unless obstructed.
    deletions: number of swapped leaf pairs removed.
    obstructed: True when some pair admitted no certified deletion; the root
    then still carries the partially reduced involution.
    """

    root: GradedRoot
    deletions: int
    obstructed: bool


def _extend_to_angles(msrc, mtgt, rows):
    """Complete a leaf prescription to a chain map by solving for the angle
    entries, or return None when the linear system has no solution."""
    src, tgt = msrc.cx, mtgt.cx
    angle_src = sorted(msrc.angle_gen.values())
    angle_tgt = sorted(mtgt.angle_gen.values())
    unknowns = [
        (a, b)
        for a in angle_src
        for b in angle_tgt
        if _exp_of(src.gradings[a], tgt.gradings[b], Fraction(0)) is not None
    ]
    matrix, rhs = [], []
    for a in angle_src:
        want = 0
        for i in _bits(src.diff[a]):
            want ^= rows[i]
        for t in range(len(tgt)):
            coeffs = [1 if ua == a and (tgt.diff[b] >> t) & 1 else 0 for ua, b in unknowns]
            bit = (want >> t) & 1
            if any(coeffs) or bit:
                matrix.append(coeffs)
                rhs.append(bit)
    sol = solve_mod2(matrix, rhs) if matrix else [0] * len(unknowns)
    if sol is None:
        return None
    for (a, b), x in zip(unknowns, sol):
        if x:
            rows[a] |= 1 << b
    return rows


def _delete_pair(root: GradedRoot, pair) -> GradedRoot | None:
    """Remove one swapped leaf pair, certified by a local equivalence onto
    the spanned subroot; None when every same-weight invariant target fails."""
    survivors = [l for l in root.leaves if l not in pair]
    sub, index = _subroot_spanned(root, survivors)
    msrc = model_complex(root)
    mtgt = model_complex(sub)
    iota_src = lift_involution(msrc)
    iota_tgt = lift_involution(mtgt)
    w = root.weights[pair[0]]
    j = root.involution
    targets = [
        v
        for v in range(len(root))
        if j[v] == v and root.weights[v] == w and v in index
    ]
    for x in targets:
        rows = [0] * len(msrc.cx)
        hit = mtgt.leaf_gen[mtgt.rep_leaf[index[x]]]
        for leaf, gen in msrc.leaf_gen.items():
            rows[gen] = 1 << (hit if leaf in pair else mtgt.leaf_gen[index[leaf]])
        rows = _extend_to_angles(msrc, mtgt, rows)
        if rows is None:
            continue
        f = UMap(msrc.cx, mtgt.cx, Fraction(0), tuple(rows))
        if is_local_equivalence(f, iota_src, iota_tgt):
            return sub
    return None


def symmetric_reduction(root: GradedRoot) -> ReductionReport:
    """Repeatedly delete swapped leaf pairs (smallest ids first) until the
    involution fixes every leaf, certifying each step."""
    current = root
    deletions = 0
    while True:
        j = current.involution
        moved = [l for l in current.leaves if j[l] != l]
        if not moved:
            trivial = tuple(range(len(current)))
            assert all(j[v] == v for v in range(len(current)))
            return ReductionReport(replace(current, involution=trivial), deletions, False)
        a = min(moved)
        nxt = _delete_pair(current, (a, j[a]))
        if nxt is None:
            return ReductionReport(current, deletions, True)
        current = nxt
        deletions += 1


# ---------------------------------------------------------------------------
# involution orbit counts


def branched_dimensions(root: GradedRoot) -> dict[Fraction, int]:
    """Graded dimensions of the branched homology read off the root alone.

    On a root-backed complex the involution acts on each level by permuting
    the vertices, so the fixed and the swapped parts both contribute one
    dimension per orbit: once at the level's weight and once a grading below.
    """
    j = root.involution
    dims: dict[Fraction, int] = {}
    for n in range(root.n_min, root.n_max + 1):
        verts = root.vertices_at(n)
        if not verts:
            continue
        orbits = sum(1 for v in verts if j[v] >= v)
        w = root.weights[verts[0]]
        dims[w] = dims.get(w, 0) + orbits
        dims[w - 1] = dims.get(w - 1, 0) + orbits
    return dims
