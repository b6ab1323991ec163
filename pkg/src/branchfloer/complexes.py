"""Free complexes over F_2[U] with involutions, and their homology.

Everything here is graded: U has degree -2 and a homogeneous map of degree d
can send a generator x to U^e y only when e = (gr(y) - gr(x) - d)/2 is a
nonnegative integer.  The exponent is therefore determined by the gradings,
so maps are stored as plain F_2 matrices (one bitmask row per source
generator) and composition is xor arithmetic.

The homology of such a complex is a direct sum of towers F_2[U] and torsion
pieces F_2[U]/U^n; both are read off by sweeping grading slices from the top
down and tracking which classes survive multiplication by U (a barcode).
Deep slices, below every generator, stabilize; the classes still alive there
are the towers.

The branched construction attaches the mapping cone of 1 + iota with an
extra degree -1 marker Q.  Its homology carries exactly two towers and the
Q-action on deep classes tells the upper tower apart from the lower one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .exact import solve_mod2


class RankBoundExceeded(RuntimeError):
    """A brute-force search was asked to handle too large a complex."""


def _exp_of(gr_src, gr_tgt, degree):
    """U-exponent forced on an entry of a degree-`degree` map, or None."""
    e = Fraction(gr_tgt - gr_src - degree) / 2
    if e.denominator != 1 or e < 0:
        return None
    return int(e)


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _F2Space:
    """Row space over F_2 with combination tracking (echelon insertion)."""

    def __init__(self):
        self.pivots = {}  # leading bit -> (vector, combination tag)

    def reduce(self, v, tag=0):
        while v:
            p = v.bit_length() - 1
            if p not in self.pivots:
                return v, tag
            pv, pt = self.pivots[p]
            v ^= pv
            tag ^= pt
        return 0, tag

    def add(self, v, tag=0):
        """Insert; returns (independent?, residual tag)."""
        v, tag = self.reduce(v, tag)
        if v == 0:
            return False, tag
        self.pivots[v.bit_length() - 1] = (v, tag)
        return True, tag

    def contains(self, v):
        return self.reduce(v)[0] == 0

    @property
    def rank(self):
        return len(self.pivots)


@dataclass(frozen=True)
class UComplex:
    """Finitely generated free complex over F_2[U]; diff has degree -1.

    diff[j] is the bitmask of generators hit by generator j, each with the
    grading-forced power of U."""

    gradings: tuple[Fraction, ...]
    diff: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.gradings)
        assert len(self.diff) == n
        if self.labels:
            assert len(self.labels) == n
        for j in range(n):
            for i in _bits(self.diff[j]):
                assert _exp_of(self.gradings[j], self.gradings[i], -1) is not None, (
                    f"differential entry {j}->{i} has no valid U-power"
                )
        for j in range(n):
            acc = 0
            for i in _bits(self.diff[j]):
                acc ^= self.diff[i]
            assert acc == 0, "differential does not square to zero"

    def __len__(self):
        return len(self.gradings)

    def label(self, i):
        return self.labels[i] if self.labels else f"x{i}"


def shift_complex(cx: UComplex, s) -> UComplex:
    """Add s to every grading."""
    return replace(cx, gradings=tuple(g + s for g in cx.gradings))


def dual_complex(cx: UComplex) -> UComplex:
    """Plain graded dual: gradings negate, differential transposes."""
    n = len(cx)
    rows = [0] * n
    for j in range(n):
        for i in _bits(cx.diff[j]):
            rows[i] |= 1 << j
    labels = tuple(f"{cx.label(i)}*" for i in range(n)) if cx.labels else ()
    return UComplex(tuple(-g for g in cx.gradings), tuple(rows), labels)


def tensor_complex(a: UComplex, b: UComplex) -> UComplex:
    """Tensor product over F_2[U]; generator (i, j) sits at index i*len(b)+j."""
    nb = len(b)
    gradings = []
    rows = []
    for i in range(len(a)):
        for j in range(nb):
            gradings.append(a.gradings[i] + b.gradings[j])
            r = 0
            for t in _bits(a.diff[i]):
                r |= 1 << (t * nb + j)
            for t in _bits(b.diff[j]):
                r |= 1 << (i * nb + t)
            rows.append(r)
    labels = ()
    if a.labels or b.labels:
        labels = tuple(
            f"{a.label(i)}|{b.label(j)}" for i in range(len(a)) for j in range(nb)
        )
    return UComplex(tuple(gradings), tuple(rows), labels)


@dataclass(frozen=True)
class UMap:
    """Homogeneous F_2[U]-linear map; rows[j] lists targets of generator j."""

    src: UComplex
    tgt: UComplex
    degree: Fraction
    rows: tuple[int, ...]

    def __post_init__(self):
        assert len(self.rows) == len(self.src)
        for j in range(len(self.src)):
            for i in _bits(self.rows[j]):
                assert _exp_of(
                    self.src.gradings[j], self.tgt.gradings[i], self.degree
                ) is not None, f"map entry {j}->{i} has no valid U-power"

    def __call__(self, j):
        return self.rows[j]

    def is_chain_map(self) -> bool:
        for j in range(len(self.src)):
            acc = 0
            for i in _bits(self.rows[j]):
                acc ^= self.tgt.diff[i]
            for i in _bits(self.src.diff[j]):
                acc ^= self.rows[i]
            if acc:
                return False
        return True

    def __add__(self, other: "UMap") -> "UMap":
        assert self.src is other.src and self.tgt is other.tgt
        assert self.degree == other.degree
        return replace(self, rows=tuple(a ^ b for a, b in zip(self.rows, other.rows)))


def identity_map(cx: UComplex) -> UMap:
    return UMap(cx, cx, Fraction(0), tuple(1 << j for j in range(len(cx))))


def zero_map(src: UComplex, tgt: UComplex, degree=Fraction(0)) -> UMap:
    return UMap(src, tgt, Fraction(degree), (0,) * len(src))


def compose(g: UMap, f: UMap) -> UMap:
    """g after f."""
    assert f.tgt is g.src
    rows = []
    for j in range(len(f.src)):
        acc = 0
        for i in _bits(f.rows[j]):
            acc ^= g.rows[i]
        rows.append(acc)
    return UMap(f.src, g.tgt, f.degree + g.degree, tuple(rows))


def dual_map(f: UMap, dual_src: UComplex, dual_tgt: UComplex) -> UMap:
    """Transpose of an endomorphism-shaped map on the dual complexes."""
    rows = [0] * len(f.tgt)
    for j in range(len(f.src)):
        for i in _bits(f.rows[j]):
            rows[i] |= 1 << j
    return UMap(dual_src, dual_tgt, f.degree, tuple(rows))


def tensor_map(f: UMap, g: UMap, src: UComplex, tgt: UComplex) -> UMap:
    nb = len(g.src)
    nbt = len(g.tgt)
    rows = []
    for i in range(len(f.src)):
        for j in range(nb):
            r = 0
            for fi in _bits(f.rows[i]):
                for gj in _bits(g.rows[j]):
                    r |= 1 << (fi * nbt + gj)
            rows.append(r)
    return UMap(src, tgt, f.degree + g.degree, tuple(rows))


# ---------------------------------------------------------------------------
# grading slices


def slice_basis(cx: UComplex, g) -> list[tuple[int, int]]:
    """Basis of the grading-g piece: pairs (generator, U-exponent)."""
    out = []
    for j in range(len(cx)):
        a = Fraction(cx.gradings[j] - g) / 2
        if a.denominator == 1 and a >= 0:
            out.append((j, int(a)))
    return out


def _slice_vectors(f: UMap, g, src_basis, tgt_index):
    """Images of the grading-g source basis under f, as bitmasks over the
    target slice at g + f.degree."""
    vecs = []
    for j, a in src_basis:
        v = 0
        for i in _bits(f.rows[j]):
            e = _exp_of(f.src.gradings[j], f.tgt.gradings[i], f.degree)
            v |= 1 << tgt_index[(i, a + e)]
        vecs.append(v)
    return vecs


def _index_of(basis):
    return {pair: t for t, pair in enumerate(basis)}


def _diff_slice(cx: UComplex, g, src_basis=None, tgt_index=None):
    if src_basis is None:
        src_basis = slice_basis(cx, g)
    if tgt_index is None:
        tgt_index = _index_of(slice_basis(cx, g - 1))
    vecs = []
    for j, a in src_basis:
        v = 0
        for i in _bits(cx.diff[j]):
            e = _exp_of(cx.gradings[j], cx.gradings[i], -1)
            v |= 1 << tgt_index[(i, a + e)]
        vecs.append(v)
    return vecs


# ---------------------------------------------------------------------------
# homology as towers + torsion


@dataclass(frozen=True)
class GradedUModule:
    """Isomorphism type of a graded F_2[U]-module of finite rank.

    towers: top gradings of the free summands, descending.
    torsion: (top grading, U-length) pairs for the F_2[U]/U^n summands.
    """

    towers: tuple[Fraction, ...]
    torsion: tuple[tuple[Fraction, int], ...]
    deep: dict = field(default_factory=dict, compare=False, repr=False)

    def total_rank(self):
        return len(self.towers)


def _parity(g) -> Fraction:
    return Fraction(g) % 2


def _sub_provider_full(cx):
    def provider(g, basis):
        return [1 << t for t in range(len(basis))]

    return provider


def homology(cx: UComplex, sub=None) -> GradedUModule:
    """Barcode homology.  With `sub`, computes homology of the subcomplex
    spanned (slice-wise) by sub(g, basis) -> list of bitmask vectors; the
    span must be closed under the differential."""
    if len(cx) == 0:
        return GradedUModule((), ())
    provider = sub if sub is not None else _sub_provider_full(cx)
    gmin = min(cx.gradings)
    towers = []
    torsion = []
    deep = {}
    for par in sorted({_parity(g) for g in cx.gradings}):
        in_par = [g for g in cx.gradings if _parity(g) == par]
        gmax = max(in_par)
        g_stop = gmax
        while g_stop > gmin - 5:
            g_stop -= 2
        alive = []  # (birth, vector over current slice basis)
        g = gmax
        prev_transport = None
        while g >= g_stop:
            basis = slice_basis(cx, g)
            index = _index_of(basis)
            below = slice_basis(cx, g - 1)
            below_index = _index_of(below)
            above = slice_basis(cx, g + 1)
            above_index = index
            dslice = _diff_slice(cx, g, basis, below_index)
            dabove = _diff_slice(cx, g + 1, above, above_index)
            span = provider(g, basis)
            span_above = provider(g + 1, above)
            # boundaries arriving from one slice up, restricted to the span
            bspace = _F2Space()
            for v in _apply_vectors(dabove, span_above):
                bspace.add(v)
            # cycles inside the span
            kernel = _kernel_of(_apply_vectors(dslice, span), span)
            # transported survivors first (elder rule), then new classes
            quotient = _F2Space()
            for pv, _ in bspace.pivots.values():
                quotient.add(pv)
            next_alive = []
            if prev_transport is not None:
                for birth, vec in alive:
                    tv = prev_transport(vec, index)
                    indep, _ = quotient.add(tv)
                    if indep:
                        next_alive.append((birth, tv))
                    else:
                        torsion.append((birth, int((birth - g) / 2)))
            for v in kernel:
                indep, _ = quotient.add(v)
                if indep:
                    next_alive.append((g, v))
            alive = next_alive

            def make_transport(old_basis):
                def transport(vec, new_index):
                    out = 0
                    for t in _bits(vec):
                        j, a = old_basis[t]
                        out |= 1 << new_index[(j, a + 1)]
                    return out

                return transport

            prev_transport = make_transport(basis)
            if g == g_stop:
                deep[par] = (g, list(alive), basis)
                towers.extend(birth for birth, _ in alive)
            g -= 2
    towers.sort(reverse=True)
    torsion.sort(key=lambda t: (-t[0], t[1]))
    return GradedUModule(tuple(towers), tuple(torsion), deep)


def _apply_vectors(mapped, vectors):
    """Apply a slice map (list: basis index -> image bitmask) to vectors."""
    out = []
    for v in vectors:
        acc = 0
        for t in _bits(v):
            acc ^= mapped[t]
        out.append(acc)
    return out


def _kernel_of(images, sources):
    """Kernel vectors of a slice map given parallel image/source lists."""
    space = _F2Space()
    kernel = []
    for img, src in zip(images, sources):
        if src == 0:
            continue
        if img == 0:
            kernel.append(src)
            continue
        indep, combo = space.add(img, src)
        if not indep and combo:
            kernel.append(combo)
    return kernel


def _transport(vec, basis_from, g_from, g_to, cx):
    """Multiply a slice vector by U^((g_from - g_to)/2)."""
    steps = Fraction(g_from - g_to) / 2
    assert steps.denominator == 1 and steps >= 0
    steps = int(steps)
    if steps == 0:
        return vec
    index = _index_of(slice_basis(cx, g_to))
    out = 0
    for t in _bits(vec):
        j, a = basis_from[t]
        out |= 1 << index[(j, a + steps)]
    return out


def delta_invariant(cx: UComplex, computed: GradedUModule | None = None):
    """Top grading of the unique tower of H(cx)."""
    module = computed if computed is not None else homology(cx)
    if len(module.towers) != 1:
        raise ValueError(f"expected a single tower, found {module.towers}")
    return module.towers[0]


def module_dim_at(module: GradedUModule, g) -> int:
    """F_2-dimension of the module in a single grading."""
    g = Fraction(g)
    dim = 0
    for d in module.towers:
        if g <= d and (d - g) % 2 == 0:
            dim += 1
    for b, length in module.torsion:
        if (b - g) % 2 == 0 and 0 <= (b - g) / 2 < length:
            dim += 1
    return dim


# ---------------------------------------------------------------------------
# model complex of a graded root


class ModelComplex:
    """Chain model of a graded root: one generator per leaf, one per angle
    between consecutive branches, with the grading-forced differential."""

    def __init__(self, root):
        self.root = root
        self.children = {v: root.children(v) for v in range(len(root))}
        self.rep_leaf = {}
        for v in sorted(range(len(root)), key=lambda v: root.levels[v]):
            kids = self.children[v]
            if not kids:
                self.rep_leaf[v] = v
            else:
                self.rep_leaf[v] = min(
                    (self.rep_leaf[c] for c in kids),
                    key=lambda l: (-root.weights[l], l),
                )
        self.leaf_gen = {}
        gradings = []
        labels = []
        for leaf in root.leaves:
            self.leaf_gen[leaf] = len(gradings)
            gradings.append(root.weights[leaf])
            labels.append(f"v{leaf}")
        self.angle_gen = {}
        rows = [0] * len(gradings)
        for v in range(len(root)):
            kids = self.children[v]
            for s in range(len(kids) - 1):
                self.angle_gen[(v, s)] = len(gradings)
                gradings.append(root.weights[v] + 1)
                labels.append(f"a{v}.{s}")
                left = self.leaf_gen[self.rep_leaf[kids[s]]]
                right = self.leaf_gen[self.rep_leaf[kids[s + 1]]]
                rows.append((1 << left) | (1 << right))
        self.cx = UComplex(tuple(gradings), tuple(rows), tuple(labels))

    def _subtree_top(self, c):
        while len(self.children[c]) == 1:
            c = self.children[c][0]
        return c

    def _child_toward(self, u, leaf):
        prev = leaf
        x = self.root.succ[leaf]
        while x != u:
            prev = x
            x = self.root.succ[x]
        return prev

    def chain_to_rep(self, leaf, u):
        """Angle set whose boundary joins `leaf` to the representative leaf
        of the subtree over u (with the grading-forced U-powers)."""
        if leaf == self.rep_leaf[u]:
            return 0
        c = self._child_toward(u, leaf)
        mask = self.chain_to_rep(leaf, self._subtree_top(c))
        kids = self.children[u]
        i = kids.index(c)
        j = next(
            t for t, cc in enumerate(kids) if self.rep_leaf[cc] == self.rep_leaf[u]
        )
        for s in range(min(i, j), max(i, j)):
            mask ^= 1 << self.angle_gen[(u, s)]
        return mask

    def chain_between(self, la, lb, u):
        return self.chain_to_rep(la, u) ^ self.chain_to_rep(lb, u)

    def _join(self, a, b):
        down = set()
        x = a
        while x is not None:
            down.add(x)
            x = self.root.succ[x]
        x = b
        while x not in down:
            x = self.root.succ[x]
        return x


def model_complex(root) -> ModelComplex:
    return ModelComplex(root)


def lift_involution(model: ModelComplex) -> UMap:
    """Chain-level involution of the model complex induced by the root's
    symmetry: leaves map to their partner leaves, angles to the angle chain
    joining the partner representatives."""
    root = model.root
    perm = root.involution
    rows = [0] * len(model.cx)
    for leaf, gen in model.leaf_gen.items():
        rows[gen] = 1 << model.leaf_gen[perm[leaf]]
    for (v, s), gen in model.angle_gen.items():
        kids = model.children[v]
        r1 = perm[model.rep_leaf[kids[s]]]
        r2 = perm[model.rep_leaf[kids[s + 1]]]
        rows[gen] = model.chain_between(r1, r2, model._join(r1, r2))
    iota = UMap(model.cx, model.cx, Fraction(0), tuple(rows))
    assert iota.is_chain_map(), "involution lift failed to commute with d"
    if nullhomotopy(compose(iota, iota) + identity_map(model.cx)) is None:
        raise ValueError("lifted involution does not square to the identity")
    return iota


# ---------------------------------------------------------------------------
# the branched construction


def involutive_cone(cx: UComplex, iota: UMap):
    """Cone of 1 + iota with marker Q (degree -1, Q^2 = 0).

    Returns the cone complex and the Q-action on it as a chain map."""
    n = len(cx)
    gradings = list(cx.gradings) + [g - 1 for g in cx.gradings]
    rows = []
    for j in range(n):
        rows.append(cx.diff[j] | ((iota.rows[j] ^ (1 << j)) << n))
    for j in range(n):
        rows.append(cx.diff[j] << n)
    labels = ()
    if cx.labels:
        labels = tuple(cx.labels) + tuple(f"Q{l}" for l in cx.labels)
    cone = UComplex(tuple(gradings), tuple(rows), labels)
    q = UMap(cone, cone, Fraction(-1), tuple(1 << (n + j) for j in range(n)) + (0,) * n)
    assert q.is_chain_map()
    return cone, q


@dataclass(frozen=True)
class BranchedModule:
    """Homology of the branched cone with its two distinguished corrections.

    upper - 1 and lower are the tops of the two infinite towers; the Q-action
    sends the deep part of the lower tower onto the deep part of the other."""

    upper: Fraction
    lower: Fraction
    module: GradedUModule


def branched_invariants(cx: UComplex, iota: UMap) -> BranchedModule:
    cone, q = involutive_cone(cx, iota)
    module = homology(cone)
    if len(module.towers) != 2:
        raise ValueError(f"branched homology has towers {module.towers}, expected 2")
    if (module.towers[0] - module.towers[1]) % 2 != 1:
        raise ValueError("branched towers do not alternate parity")
    hits = {}
    for par, (g0, alive, basis) in module.deep.items():
        if not alive:
            continue
        if len(alive) != 1:
            raise ValueError("two towers share a parity in the branched cone")
        top, vec = alive[0]
        other = _parity(g0 - 1)
        g1, alive1, basis1 = module.deep[other]
        index1 = _index_of(slice_basis(cone, g0 - 1))
        img = _apply_vectors(_slice_vectors(q, g0, basis, index1), [vec])[0]
        g_common = min(g0 - 1, g1)
        img = _transport(img, slice_basis(cone, g0 - 1), g0 - 1, g_common, cone)
        space = _F2Space()
        up = slice_basis(cone, g_common + 1)
        for v in _diff_slice(cone, g_common + 1, up, _index_of(slice_basis(cone, g_common))):
            space.add(v)
        (t_top, t_vec), = alive1
        t_vec = _transport(t_vec, basis1, g1, g_common, cone)
        space.add(t_vec, 1)
        residual, tag = space.reduce(img)
        if residual:
            raise ValueError("deep Q-image escapes the surviving tower")
        if tag:
            hits[top] = t_top
    if len(hits) != 1:
        raise ValueError(f"deep Q-action is not rank one: {hits}")
    (source, target), = hits.items()
    upper = target + 1
    lower = source
    if lower > upper:
        raise ValueError("branched tower ordering violated")
    return BranchedModule(upper, lower, module)


# ---------------------------------------------------------------------------
# homotopies and local equivalence


def _positions(src: UComplex, tgt: UComplex, degree):
    out = []
    for j in range(len(src)):
        for i in range(len(tgt)):
            if _exp_of(src.gradings[j], tgt.gradings[i], degree) is not None:
                out.append((j, i))
    return out


def nullhomotopy(f: UMap) -> UMap | None:
    """Solve f = dH + Hd for H of degree deg(f) + 1, if possible."""
    src, tgt = f.src, f.tgt
    hpos = _positions(src, tgt, f.degree + 1)
    hvar = {p: t for t, p in enumerate(hpos)}
    eqpos = _positions(src, tgt, f.degree)
    rows = []
    rhs = []
    for (j, i) in eqpos:
        row = [0] * len(hpos)
        for m in range(len(tgt)):
            if (j, m) in hvar and (tgt.diff[m] >> i) & 1:
                row[hvar[(j, m)]] ^= 1
        for m in _bits(src.diff[j]):
            if (m, i) in hvar:
                row[hvar[(m, i)]] ^= 1
        rows.append(row)
        rhs.append((f.rows[j] >> i) & 1)
    sol = solve_mod2(rows, rhs) if rows else []
    if sol is None:
        return None
    hrows = [0] * len(src)
    for (j, i), t in hvar.items():
        if sol[t]:
            hrows[j] |= 1 << i
    return UMap(src, tgt, f.degree + 1, tuple(hrows))


def maps_homotopic(f: UMap, g: UMap) -> bool:
    return nullhomotopy(f + g) is not None


class _DeepContext:
    """Cached slice data for testing maps src -> tgt on deep tower classes."""

    def __init__(self, src: UComplex, tgt: UComplex, ha: GradedUModule, hb: GradedUModule):
        self.ok_dims = True
        self.blocks = []
        for par in sorted(set(ha.deep) | set(hb.deep)):
            na = len(ha.deep[par][1]) if par in ha.deep else 0
            nb = len(hb.deep[par][1]) if par in hb.deep else 0
            if na != nb:
                self.ok_dims = False
                return
            if na == 0:
                continue
            g0, alive, basis = ha.deep[par]
            g1, alive1, basis1 = hb.deep[par]
            g = min(g0, g1)
            index = _index_of(slice_basis(tgt, g))
            space = _F2Space()
            for v in _diff_slice(tgt, g + 1, slice_basis(tgt, g + 1), index):
                space.add(v)
            for t, (_, vec) in enumerate(alive1):
                space.add(_transport(vec, basis1, g1, g, tgt), 1 << t)
            reps = [_transport(vec, basis, g0, g, src) for _, vec in alive]
            self.blocks.append((g, slice_basis(src, g), index, space, reps, na))

    def iso(self, f: UMap) -> bool:
        if not self.ok_dims:
            return False
        for g, src_basis, index, space, reps, n in self.blocks:
            vecs = _slice_vectors(f, g, src_basis, index)
            rows = _F2Space()
            for img in _apply_vectors(vecs, reps):
                residual, tag = space.reduce(img)
                if residual:
                    return False
                rows.add(tag)
            if rows.rank != n:
                return False
        return True


def induces_localized_iso(f: UMap, ha=None, hb=None) -> bool:
    """Does f invert the deep (U-localized) homology on every parity?"""
    ha = ha if ha is not None else homology(f.src)
    hb = hb if hb is not None else homology(f.tgt)
    return _DeepContext(f.src, f.tgt, ha, hb).iso(f)


def is_local_equivalence(f: UMap, iota_src: UMap, iota_tgt: UMap, ha=None, hb=None) -> bool:
    """Chain map commuting with the involutions up to homotopy and inverting
    the localized homology."""
    if not f.is_chain_map():
        return False
    if nullhomotopy(compose(iota_tgt, f) + compose(f, iota_src)) is None:
        return False
    return induces_localized_iso(f, ha, hb)


# ---------------------------------------------------------------------------
# brute-force enumeration of local equivalences (small ranks only)


def _nullspace(rows, ncols):
    """Basis of the right nullspace of an F_2 matrix given as bitmask rows."""
    space = _F2Space()
    for r in rows:
        space.add(r)
    pivots = dict(space.pivots)
    pivot_cols = set(pivots)
    basis = []
    for fc in range(ncols):
        if fc in pivot_cols:
            continue
        v = 1 << fc
        for pc in sorted(pivots):
            rest = pivots[pc][0] ^ (1 << pc)
            if bin(rest & v).count("1") % 2:
                v |= 1 << pc
        basis.append(v)
    return basis


def local_equivalences(
    src: UComplex,
    iota_src: UMap,
    tgt: UComplex,
    iota_tgt: UMap,
    rank_bound: int = 8,
    search_bound: int = 18,
) -> list[UMap]:
    """All local equivalences src -> tgt, found by exhausting the affine
    space of chain maps that commute with the involutions up to homotopy.

    Maps are returned up to equality (not up to homotopy), sorted.  Raises
    RankBoundExceeded when the complexes or the search space are too big."""
    if len(src) > rank_bound or len(tgt) > rank_bound:
        raise RankBoundExceeded(f"complex rank exceeds bound {rank_bound}")
    fpos = _positions(src, tgt, Fraction(0))
    hpos = _positions(src, tgt, Fraction(1))
    fvar = {p: t for t, p in enumerate(fpos)}
    hvar = {p: len(fpos) + t for t, p in enumerate(hpos)}
    nvars = len(fpos) + len(hpos)
    rows = []
    # chain condition: d f + f d = 0 at every degree -1 position
    for (j, i) in _positions(src, tgt, Fraction(-1)):
        row = 0
        for m in range(len(tgt)):
            if (j, m) in fvar and (tgt.diff[m] >> i) & 1:
                row ^= 1 << fvar[(j, m)]
        for m in _bits(src.diff[j]):
            if (m, i) in fvar:
                row ^= 1 << fvar[(m, i)]
        if row:
            rows.append(row)
    # involution condition: iota_tgt f + f iota_src = d H + H d
    for (j, i) in fpos:
        row = 0
        for m in range(len(src)):
            if (iota_src.rows[j] >> m) & 1 and (m, i) in fvar:
                row ^= 1 << fvar[(m, i)]
        for m in range(len(tgt)):
            if (j, m) in fvar and (iota_tgt.rows[m] >> i) & 1:
                row ^= 1 << fvar[(j, m)]
        for m in range(len(tgt)):
            if (j, m) in hvar and (tgt.diff[m] >> i) & 1:
                row ^= 1 << hvar[(j, m)]
        for m in _bits(src.diff[j]):
            if (m, i) in hvar:
                row ^= 1 << hvar[(m, i)]
        if row:
            rows.append(row)
    basis = _nullspace(rows, nvars)
    # the homotopy variables only certify solvability; project them away and
    # enumerate each candidate chain map once
    fmask = (1 << len(fpos)) - 1
    fspace = _F2Space()
    fbasis = []
    for v in basis:
        indep, _ = fspace.add(v & fmask)
        if indep:
            fbasis.append(v & fmask)
    if len(fbasis) > search_bound:
        raise RankBoundExceeded(
            f"search space dimension {len(fbasis)} exceeds bound {search_bound}"
        )
    ctx = _DeepContext(src, tgt, homology(src), homology(tgt))
    found = []
    for combo in range(1 << len(fbasis)):
        fbits = 0
        c = combo
        t = 0
        while c:
            if c & 1:
                fbits ^= fbasis[t]
            c >>= 1
            t += 1
        if fbits == 0:
            continue
        frows = [0] * len(src)
        for (j, i), t in fvar.items():
            if (fbits >> t) & 1:
                frows[j] |= 1 << i
        f = UMap(src, tgt, Fraction(0), tuple(frows))
        if ctx.iso(f):
            found.append(f)
    found.sort(key=lambda f: f.rows)
    return found


def self_local_equivalences(
    cx: UComplex, iota: UMap, rank_bound: int = 8, search_bound: int = 18
) -> list[UMap]:
    return local_equivalences(cx, iota, cx, iota, rank_bound, search_bound)


# ---------------------------------------------------------------------------
# connected (image) homology by brute force


def image_homology(f: UMap) -> GradedUModule:
    """Homology of the subcomplex im(f) of the target of a chain self-map."""
    assert f.src is f.tgt and f.degree == 0

    def provider(g, basis):
        index = _index_of(basis)
        return [v for v in _slice_vectors(f, g, basis, index) if v]

    return homology(f.tgt, sub=provider)


def _deep_kernel_rank(f: UMap, ha: GradedUModule) -> int:
    total = 0
    for par, (g0, alive, basis) in ha.deep.items():
        index = _index_of(slice_basis(f.tgt, g0))
        vecs = _slice_vectors(f, g0, basis, index)
        space = _F2Space()
        for v in vecs:
            space.add(v)
        total += len(basis) - space.rank
    return total


def connected_homology_brute(
    cx: UComplex, iota: UMap, rank_bound: int = 8, search_bound: int = 18
) -> GradedUModule:
    """Connected homology via exhaustive search: the image homology of a
    self local equivalence whose deep kernel is as large as possible.

    All maximizers must agree on the answer; if they do not, the search is
    reported as inconclusive."""
    cands = self_local_equivalences(cx, iota, rank_bound, search_bound)
    ha = homology(cx)
    best_rank = -1
    best = []
    for f in cands:
        kr = _deep_kernel_rank(f, ha)
        if kr > best_rank:
            best_rank, best = kr, [f]
        elif kr == best_rank:
            best.append(f)
    modules = []
    for f in best:
        m = image_homology(f)
        modules.append((m.towers, m.torsion))
    if len(set(modules)) != 1:
        raise ValueError("maximal self equivalences disagree; no canonical image")
    return GradedUModule(*modules[0])


def standard_swap_complex(top) -> tuple[UComplex, UMap]:
    """Two generators at grading `top` exchanged by the involution, bound by
    a single relator one degree below (the smallest nontrivial model)."""
    top = Fraction(top)
    cx = UComplex(
        (top, top, top - 1),
        (0, 0, (1 << 0) | (1 << 1)),
        ("a", "b", "c"),
    )
    iota = UMap(cx, cx, Fraction(0), (1 << 1, 1 << 0, 1 << 2))
    return cx, iota

