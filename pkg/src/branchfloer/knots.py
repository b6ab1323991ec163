"""Knots presented through their double branched covers.

Torus, pretzel, and Montesinos knots all have branched covers that are
Seifert fibered over the sphere, so each constructor here produces a
star-shaped negative-definite plumbing together with the right spin
characteristic vector and a recipe for the covering involution.  Mirrors
dualize the resulting chain data and connected sums tensor it, so the full
input language is

    torus(p,q) | pretzel(a1,...,ak) | montesinos(e; a1/b1, ...)
               | mirror(S) | sum(S, S, ...)

parsed by `parse_spec` and evaluated by `invariants`.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd, prod
import re

import numpy as np

from .complexes import (
    GradedUModule,
    UComplex,
    UMap,
    branched_invariants,
    connected_homology_brute,
    delta_invariant,
    dual_complex,
    dual_map,
    homology,
    lift_involution,
    model_complex,
    shift_complex,
    tensor_complex,
    tensor_map,
)
from .connected import monotone_subroot, omega
from .exact import determinant
from .plumbing import (
    DefinitenessError,
    PlumbingTree,
    check_negative_definite,
    determinant_magnitude,
    spin_char,
    star,
)
from .roots import build_root


class KnotSpecError(ValueError):
    """The input does not describe a supported knot."""


# ---------------------------------------------------------------------------
# plumbing constructors


def negative_continued_fraction(p: int, q: int) -> list[int]:
    """Chain weights (all <= -2) whose continued fraction expands p/q.

    >>> negative_continued_fraction(7, 3)
    [-3, -2, -2]
    >>> negative_continued_fraction(5, 4)
    [-2, -2, -2, -2]
    """
    assert 0 < q < p
    out = []
    while q:
        c = -((-p) // q)
        out.append(-c)
        p, q = q, c * q - p
    return out


@dataclass(frozen=True)
class Presentation:
    """A negative-definite plumbing presenting a branched double cover.

    `involution` names the symmetry the graded root should carry ("auto"
    picks the declared tree automorphism or the lattice reflection).  When
    the definite side belongs to the mirror, `mirrored` is set and consumers
    must dualize whatever they compute.
    """

    tree: PlumbingTree
    char: tuple[int, ...]
    involution: str
    mirrored: bool


def _seifert_star(extra: int, slopes: list[Fraction]) -> PlumbingTree:
    """Star plumbing bounding the Seifert space with unnormalized fiber
    slopes `slopes` over a base orbifold twisted by `extra`."""
    e0 = extra
    legs = []
    for s in slopes:
        f = s - floor(s)
        e0 += floor(s)
        if f:
            legs.append(negative_continued_fraction(f.denominator, f.numerator))
    return star(e0, legs)


def _cong(c: int, mod: int, lo: int) -> int:
    # unique x in [lo, mod) with c*x = -1 mod `mod`; callers guarantee
    # gcd(c, mod) == 1
    for x in range(lo, max(mod, lo + 1)):
        if (c * x + 1) % mod == 0:
            return x
    raise AssertionError("congruence has no solution in range")


def torus_plumbing(p: int, q: int) -> Presentation:
    """Minimal resolution plumbing for the double cover of the (p, q) torus
    knot, which is the link of the suspension singularity x^2 + y^p + z^q.

    For odd p*q the cover is a Brieskorn homology sphere and the covering
    involution acts trivially on the root.  For even p*q the resolution has
    two equal legs that the involution exchanges; the swap is recorded as a
    tree automorphism.
    """
    if abs(p) < 2 or abs(q) < 2:
        raise KnotSpecError("torus parameters need |p|, |q| >= 2; smaller gives the unknot")
    if gcd(p, q) != 1:
        raise KnotSpecError("torus(p, q) with gcd(p, q) > 1 is a link, not a knot")
    mirrored = p * q < 0
    p, q = abs(p), abs(q)
    if p > q:
        p, q = q, p
    if p % 2 and q % 2:
        # fiber orders (2, p, q), orbifold euler number -1/(2pq)
        b2 = _cong(2 * q, p, 1)
        b3 = _cong(2 * p, q, 1)
        rem = -1 - p * q - 2 * q * b2 - 2 * p * b3
        assert rem % (2 * p * q) == 0
        e0 = rem // (2 * p * q)
        tree = star(
            e0,
            [
                [-2],
                negative_continued_fraction(p, b2),
                negative_continued_fraction(q, b3),
            ],
        )
        mode = "trivial"
    else:
        # one even parameter 2m; fiber orders (r, r, m), euler number -1/(rm)
        r, m = (q, p // 2) if p % 2 == 0 else (p, q // 2)
        b = _cong(2 * m, r, 1)
        b3 = _cong(r, m, 0)
        rem = -1 - 2 * m * b - r * b3
        assert rem % (r * m) == 0
        e0 = rem // (r * m)
        leg = negative_continued_fraction(r, b)
        legs = [leg, leg]
        if m > 1:
            legs.append(negative_continued_fraction(m, b3))
        size = 1 + sum(len(l) for l in legs)
        perm = list(range(size))
        for i in range(len(leg)):
            perm[1 + i], perm[1 + len(leg) + i] = 1 + len(leg) + i, 1 + i
        tree = star(e0, legs, automorphism=tuple(perm))
        mode = "auto"
    check_negative_definite(tree)
    return Presentation(tree, spin_char(tree), mode, mirrored)


def pretzel_plumbing(strands) -> Presentation:
    """Seifert plumbing for the double cover of a pretzel: one fiber of
    slope -1/a per strand.  Falls back to the mirror when the given
    orientation bounds the positive-definite side."""
    strands = tuple(int(a) for a in strands)
    if any(a == 0 for a in strands):
        raise KnotSpecError("zero strands split the pretzel diagram")
    slopes = [Fraction(-1, a) for a in strands]
    ey = sum(slopes)
    if ey == 0:
        raise DefinitenessError(
            "pretzel cover has euler number zero; neither orientation bounds "
            "a definite plumbing"
        )
    mirrored = False
    if ey > 0:
        slopes = [-s for s in slopes]
        mirrored = True
    tree = _seifert_star(0, slopes)
    check_negative_definite(tree)
    return Presentation(tree, spin_char(tree), "auto", mirrored)


def montesinos_plumbing(e: int, fractions) -> Presentation:
    """Seifert plumbing for the double cover of montesinos(e; a1/b1, ...).

    The cover has orbifold euler number -e - sum(b_i/a_i); pretzel(a1,...)
    is the special case montesinos(0; a1/1, ...).
    """
    try:
        fractions = [
            Fraction(*f) if isinstance(f, tuple) else Fraction(f) for f in fractions
        ]
    except ZeroDivisionError:
        raise KnotSpecError("montesinos fraction with zero denominator") from None
    if not fractions:
        raise KnotSpecError("montesinos spec needs at least one fraction")
    if any(abs(f.numerator) < 2 for f in fractions):
        raise KnotSpecError(
            "montesinos fraction with |numerator| < 2 is a trivial fiber; "
            "fold it into the integer coefficient"
        )
    slopes = [-1 / f for f in fractions]
    ey = Fraction(-e) + sum(slopes)
    if ey == 0:
        raise DefinitenessError(
            "montesinos cover has euler number zero; neither orientation "
            "bounds a definite plumbing"
        )
    mirrored = False
    extra = -e
    if ey > 0:
        slopes = [-s for s in slopes]
        extra = e
        mirrored = True
    tree = _seifert_star(extra, slopes)
    check_negative_definite(tree)
    det = determinant_magnitude(tree)
    if det % 2 == 0:
        raise KnotSpecError(
            f"montesinos determinant {det} is even: the data describes a link"
        )
    return Presentation(tree, spin_char(tree), "auto", mirrored)


# ---------------------------------------------------------------------------
# diagram-side oracle


def _pretzel_det(strands) -> int:
    return abs(sum(prod(strands) // a for a in strands))


def goeritz_oracle(strands) -> tuple[int, int]:
    """Determinant and signature of a pretzel knot from its checkerboard
    form, independent of any plumbing.

    The Goeritz matrix of the standard diagram is tridiagonal; its signature
    needs a correction term counting crossings whose smoothing disagrees
    with the coloring.  With all strands odd no correction is needed; with
    exactly one even strand the odd strands contribute theirs.  Supports 3
    to 5 strands.
    """
    strands = tuple(int(a) for a in strands)
    k = len(strands)
    if not 3 <= k <= 5:
        raise KnotSpecError("goeritz oracle supports pretzels with 3 to 5 strands")
    if any(a == 0 for a in strands):
        raise KnotSpecError("zero strands split the pretzel diagram")
    evens = [a for a in strands if a % 2 == 0]
    if len(evens) > 1:
        raise KnotSpecError("two even strands form a pretzel link, not a knot")
    g = [[0] * (k - 1) for _ in range(k - 1)]
    for i in range(k - 1):
        g[i][i] = strands[i] + strands[i + 1]
        if i + 1 < k - 1:
            g[i][i + 1] = g[i + 1][i] = -strands[i + 1]
    det = abs(determinant(g))
    if det % 2 == 0:
        raise KnotSpecError(f"pretzel determinant {det} is even: this is a link")
    eigs = np.linalg.eigvalsh(np.array(g, dtype=float))
    sig = int((eigs > 0).sum()) - int((eigs < 0).sum())
    mu = 0 if not evens else sum(a for a in strands if a % 2)
    return det, sig - mu


# ---------------------------------------------------------------------------
# the knot description language


@dataclass(frozen=True)
class KnotSpec:
    """A parsed knot description: a constructor with parameters, or a
    mirror/sum node over child specs."""

    kind: str
    params: tuple = ()
    children: tuple["KnotSpec", ...] = ()

    @classmethod
    def torus(cls, p: int, q: int) -> "KnotSpec":
        if abs(p) < 2 or abs(q) < 2:
            raise KnotSpecError(
                "torus parameters need |p|, |q| >= 2; smaller gives the unknot"
            )
        if gcd(p, q) != 1:
            raise KnotSpecError("torus(p, q) with gcd(p, q) > 1 is a link, not a knot")
        return cls("torus", (int(p), int(q)))

    @classmethod
    def pretzel(cls, *strands: int) -> "KnotSpec":
        if len(strands) < 2:
            raise KnotSpecError("a pretzel needs at least two strands")
        if any(a == 0 for a in strands):
            raise KnotSpecError("zero strands split the pretzel diagram")
        det = _pretzel_det(strands)
        if det == 0:
            raise KnotSpecError("pretzel determinant is zero: not a knot")
        if det % 2 == 0:
            raise KnotSpecError(
                f"pretzel determinant {det} is even: this is a link, not a knot"
            )
        return cls("pretzel", tuple(int(a) for a in strands))

    @classmethod
    def montesinos(cls, e: int, fractions) -> "KnotSpec":
        try:
            fr = tuple(
                Fraction(*f) if isinstance(f, tuple) else Fraction(f)
                for f in fractions
            )
        except ZeroDivisionError:
            raise KnotSpecError("montesinos fraction with zero denominator") from None
        if not fr:
            raise KnotSpecError("montesinos spec needs at least one fraction")
        if any(f == 0 for f in fr):
            raise KnotSpecError("zero montesinos fraction")
        if any(abs(f.numerator) < 2 for f in fr):
            raise KnotSpecError(
                "montesinos fraction with |numerator| < 2 is a trivial fiber; "
                "fold it into the integer coefficient"
            )
        ey = Fraction(-e) - sum(1 / f for f in fr)
        det = abs(ey) * prod(abs(f.numerator) for f in fr)
        assert det.denominator == 1
        det = int(det)
        if det == 0:
            raise KnotSpecError("montesinos determinant is zero: not a knot")
        if det % 2 == 0:
            raise KnotSpecError(
                f"montesinos determinant {det} is even: the data describes a link"
            )
        return cls("montesinos", (int(e),) + fr)

    @classmethod
    def mirror(cls, inner: "KnotSpec") -> "KnotSpec":
        return cls("mirror", (), (inner,))

    @classmethod
    def connected_sum(cls, *specs: "KnotSpec") -> "KnotSpec":
        if len(specs) < 2:
            raise KnotSpecError("a sum needs at least two summands")
        return cls("sum", (), tuple(specs))

    def __str__(self) -> str:
        return unparse(self)


def unparse(spec: KnotSpec) -> str:
    """Canonical textual form; `parse_spec` round-trips it.

    >>> unparse(KnotSpec.mirror(KnotSpec.torus(3, 7)))
    'mirror(torus(3,7))'
    """
    if spec.kind in ("torus", "pretzel"):
        return f"{spec.kind}({','.join(str(x) for x in spec.params)})"
    if spec.kind == "montesinos":
        fr = ",".join(f"{f.numerator}/{f.denominator}" for f in spec.params[1:])
        return f"montesinos({spec.params[0]};{fr})"
    if spec.kind == "mirror":
        return f"mirror({unparse(spec.children[0])})"
    return f"sum({','.join(unparse(c) for c in spec.children)})"


_TOKEN = re.compile(r"[a-z]+|-?\d+|[(),;/]")


def _tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise KnotSpecError(f"unexpected character {text[pos]!r} at position {pos}")
        out.append(m.group())
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def take(self):
        if self.i >= len(self.tokens):
            raise KnotSpecError("unexpected end of spec")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def expect(self, tok):
        got = self.take()
        if got != tok:
            raise KnotSpecError(f"expected {tok!r}, found {got!r}")

    def integer(self):
        tok = self.take()
        try:
            return int(tok)
        except ValueError:
            raise KnotSpecError(f"expected an integer, found {tok!r}") from None

    def fraction(self):
        a = self.integer()
        self.expect("/")
        b = self.integer()
        if b == 0:
            raise KnotSpecError("montesinos fraction with zero denominator")
        return (a, b)

    def expr(self) -> KnotSpec:
        name = self.take()
        if name == "torus":
            self.expect("(")
            p = self.integer()
            self.expect(",")
            q = self.integer()
            self.expect(")")
            return KnotSpec.torus(p, q)
        if name == "pretzel":
            self.expect("(")
            strands = [self.integer()]
            while self.peek() == ",":
                self.take()
                strands.append(self.integer())
            self.expect(")")
            return KnotSpec.pretzel(*strands)
        if name == "montesinos":
            self.expect("(")
            e = self.integer()
            self.expect(";")
            fractions = [self.fraction()]
            while self.peek() == ",":
                self.take()
                fractions.append(self.fraction())
            self.expect(")")
            return KnotSpec.montesinos(e, fractions)
        if name == "mirror":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return KnotSpec.mirror(inner)
        if name == "sum":
            self.expect("(")
            parts = [self.expr()]
            while self.peek() == ",":
                self.take()
                parts.append(self.expr())
            self.expect(")")
            return KnotSpec.connected_sum(*parts)
        raise KnotSpecError(f"unknown constructor {name!r}")


def parse_spec(text: str) -> KnotSpec:
    tokens = _tokenize(text)
    if not tokens:
        raise KnotSpecError("empty knot spec")
    parser = _Parser(tokens)
    spec = parser.expr()
    if parser.i != len(tokens):
        raise KnotSpecError(
            f"trailing input after spec: {''.join(tokens[parser.i:])!r}"
        )
    return spec


def presentation(spec: KnotSpec) -> Presentation:
    """The plumbing presentation of a constructor spec.  Mirrors and sums
    have no single plumbing; they live at the chain level."""
    if spec.kind == "torus":
        return torus_plumbing(*spec.params)
    if spec.kind == "pretzel":
        return pretzel_plumbing(spec.params)
    if spec.kind == "montesinos":
        return montesinos_plumbing(spec.params[0], spec.params[1:])
    raise KnotSpecError(f"{spec.kind} specs do not have a plumbing presentation")


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class _Eval:
    """Chain data for a spec: the full complex with involution, a small
    locally equivalent representative, and diagram bookkeeping.  `direct`
    marks the small model as a monotone subroot model, whose homology is the
    connected module with no search."""

    cx: UComplex
    iota: UMap
    small_cx: UComplex
    small_iota: UMap
    direct: bool
    det: int
    sigma: int | None


def _rebase(m: UMap, cx: UComplex) -> UMap:
    return UMap(cx, cx, m.degree, m.rows)


def _shifted(cx: UComplex, iota: UMap, s) -> tuple[UComplex, UMap]:
    out = shift_complex(cx, s)
    return out, _rebase(iota, out)


def _dualized(cx: UComplex, iota: UMap) -> tuple[UComplex, UMap]:
    out = dual_complex(cx)
    return out, dual_map(iota, out, out)


def _evaluate(spec: KnotSpec, n_max) -> _Eval:
    if spec.kind == "mirror":
        ev = _evaluate(spec.children[0], n_max)
        cx, iota = _dualized(ev.cx, ev.iota)
        scx, siota = _dualized(ev.small_cx, ev.small_iota)
        sigma = None if ev.sigma is None else -ev.sigma
        return _Eval(cx, iota, scx, siota, False, ev.det, sigma)
    if spec.kind == "sum":
        parts = [_evaluate(c, n_max) for c in spec.children]
        out = parts[0]
        for nxt in parts[1:]:
            cx = tensor_complex(out.cx, nxt.cx)
            iota = tensor_map(out.iota, nxt.iota, cx, cx)
            scx = tensor_complex(out.small_cx, nxt.small_cx)
            siota = tensor_map(out.small_iota, nxt.small_iota, scx, scx)
            cx, iota = _shifted(cx, iota, 2)
            scx, siota = _shifted(scx, siota, 2)
            sigma = (
                None
                if out.sigma is None or nxt.sigma is None
                else out.sigma + nxt.sigma
            )
            out = _Eval(cx, iota, scx, siota, False, out.det * nxt.det, sigma)
        return out
    pres = presentation(spec)
    root = build_root(pres.tree, pres.char, involution=pres.involution, n_max=n_max)
    model = model_complex(root)
    small = model_complex(monotone_subroot(root))
    cx, iota = _shifted(model.cx, lift_involution(model), -2)
    scx, siota = _shifted(small.cx, lift_involution(small), -2)
    direct = not pres.mirrored
    if pres.mirrored:
        cx, iota = _dualized(cx, iota)
        scx, siota = _dualized(scx, siota)
    sigma = None
    if spec.kind == "pretzel" and 3 <= len(spec.params) <= 5:
        sigma = goeritz_oracle(spec.params)[1]
    return _Eval(cx, iota, scx, siota, direct, determinant_magnitude(pres.tree), sigma)


@dataclass(frozen=True)
class InvariantPackage:
    """Everything the pipeline knows about one knot."""

    spec: KnotSpec
    delta: Fraction
    delta_upper: Fraction
    delta_lower: Fraction
    branched: GradedUModule
    connected: GradedUModule
    reduced_connected: GradedUModule
    omega: int
    det: int
    sigma: int | None

    def to_jsonable(self) -> dict:
        return {
            "schema": 1,
            "spec": unparse(self.spec),
            "delta": _rat(self.delta),
            "delta_upper": _rat(self.delta_upper),
            "delta_lower": _rat(self.delta_lower),
            "branched": _module_jsonable(self.branched),
            "connected": _module_jsonable(self.connected),
            "red_conn": [
                {"degree": _rat(b), "length": length}
                for b, length in self.reduced_connected.torsion
            ],
            "omega": self.omega,
            "det": self.det,
            "sigma": self.sigma,
        }


def _rat(x) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def _module_jsonable(m: GradedUModule) -> dict:
    return {
        "towers": [_rat(t) for t in m.towers],
        "torsion": [
            {"degree": _rat(b), "length": length} for b, length in m.torsion
        ],
    }


def invariants(
    spec: KnotSpec,
    *,
    n_max: int | None = None,
    rank_bound: int = 16,
    search_bound: int = 24,
    verify: bool = False,
) -> InvariantPackage:
    """Compute the full branched invariant package of a knot spec.

    Mirrors and sums are evaluated on small locally equivalent models, so
    the connected part of a sum stays inside `rank_bound`.  With `verify`
    the fast connected computation is cross-checked against the exhaustive
    search.
    """
    ev = _evaluate(spec, n_max)
    full = homology(ev.cx)
    delta = delta_invariant(ev.cx, full)
    br = branched_invariants(ev.cx, ev.iota)
    if ev.direct:
        conn = homology(ev.small_cx)
        if verify:
            check = connected_homology_brute(
                ev.small_cx, ev.small_iota, rank_bound, search_bound
            )
            if (check.towers, check.torsion) != (conn.towers, conn.torsion):
                raise ValueError("connected homology cross-check failed")
    else:
        conn = connected_homology_brute(
            ev.small_cx, ev.small_iota, rank_bound, search_bound
        )
    if conn.towers != (delta,):
        raise ValueError(
            f"connected module towers {conn.towers} disagree with delta {delta}"
        )
    if not br.lower <= delta <= br.upper:
        raise ValueError("branched correction terms bracket delta; got "
                         f"{br.lower}, {delta}, {br.upper}")
    return InvariantPackage(
        spec=spec,
        delta=delta,
        delta_upper=br.upper,
        delta_lower=br.lower,
        branched=br.module,
        connected=conn,
        reduced_connected=GradedUModule((), conn.torsion),
        omega=omega(conn),
        det=ev.det,
        sigma=ev.sigma,
    )
