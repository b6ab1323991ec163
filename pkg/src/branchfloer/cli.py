"""Command line front end for the invariant pipeline.

Subcommands:

  invariants SPEC       full invariant package for one knot spec
  root SPEC|JSON|-      graded root with involution for a cover presentation
  independence SPEC...  torsion orders per knot and per pairwise sum, plus an
                        independence certificate

A knot spec uses the grammar
``torus(p,q) | pretzel(a1,...,ak) | montesinos(e; a1/b1, ...) | mirror(S) |
sum(S, S, ...)``.  The root subcommand also accepts a plumbing tree as JSON
(``{"weights": [...], "edges": [[i,j], ...]}``) either inline or on stdin
via ``-``.

Exit codes: 0 success, 2 malformed input or usage, 3 no definite cover
presentation, 4 unstable truncation, 1 anything else.  Set
BRANCHFLOER_CACHE_DIR to reuse graded-root computations across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import knots, plumbing, roots


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by all subcommands; defaults match the library."""

    n_max: int | None = None
    box_radius: int | None = None
    rank_bound: int = 16
    truncation_margin: int = 2
    workers: int = 1
    fmt: str = "json"
    verify: bool = False

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.box_radius is not None and self.box_radius <= 0:
            raise ValueError("box radius must be positive")
        if self.rank_bound <= 0:
            raise ValueError("rank bound must be positive")
        if self.truncation_margin <= 0:
            raise ValueError("truncation margin must be positive")
        if self.workers <= 0:
            raise ValueError("worker count must be positive")
        if self.fmt not in ("json", "text", "dot"):
            raise ValueError(f"unknown output format {self.fmt!r}")


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _module_text(mod) -> str:
    towers = ",".join(_frac(t) for t in mod.towers)
    torsion = ",".join(f"{_frac(d)}:{l}" for d, l in mod.torsion)
    return f"towers[{towers}] torsion[{torsion}]"


def cmd_invariants(text: str, config: RunConfig, out=None) -> None:
    out = out or sys.stdout
    spec = knots.parse_spec(text)
    pkg = knots.invariants(
        spec,
        n_max=config.n_max,
        rank_bound=config.rank_bound,
        search_bound=config.rank_bound + 8,
        verify=config.verify,
    )
    if config.fmt == "json":
        out.write(json.dumps(pkg.to_jsonable(), sort_keys=True) + "\n")
        return
    out.write(f"spec        {knots.unparse(spec)}\n")
    out.write(f"delta       {_frac(pkg.delta)}\n")
    out.write(f"delta_upper {_frac(pkg.delta_upper)}\n")
    out.write(f"delta_lower {_frac(pkg.delta_lower)}\n")
    out.write(f"branched    {_module_text(pkg.branched)}\n")
    out.write(f"conn        {_module_text(pkg.connected)}\n")
    out.write(f"red_conn    {_module_text(pkg.reduced_connected)}\n")
    out.write(f"omega       {pkg.omega}\n")
    out.write(f"det         {pkg.det}\n")
    out.write(f"sigma       {pkg.sigma if pkg.sigma is not None else '-'}\n")


def _tree_from_doc(doc) -> tuple[plumbing.PlumbingTree, tuple[int, ...] | None, str]:
    try:
        weights = tuple(int(w) for w in doc["weights"])
        edges = tuple((int(a), int(b)) for a, b in doc.get("edges", []))
        aut = doc.get("automorphism")
        tree = plumbing.PlumbingTree(
            weights, edges, automorphism=tuple(aut) if aut else None
        )
        char = tuple(int(c) for c in doc["char"]) if doc.get("char") else None
        involution = str(doc.get("involution", "auto"))
    except plumbing.DefinitenessError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise knots.KnotSpecError(f"bad plumbing JSON: {err}")
    return tree, char, involution


def _build_root(tree, char, involution, config: RunConfig) -> roots.GradedRoot:
    cache_dir = os.environ.get("BRANCHFLOER_CACHE_DIR")
    key_path = None
    if cache_dir:
        key_doc = {
            "weights": list(tree.weights),
            "edges": [list(e) for e in tree.edges],
            "automorphism": list(tree.automorphism) if tree.automorphism else None,
            "char": list(char) if char else None,
            "involution": involution,
            "n_max": config.n_max,
            "margin": config.truncation_margin,
            "radius": config.box_radius,
        }
        digest = hashlib.sha256(
            json.dumps(key_doc, sort_keys=True).encode()
        ).hexdigest()
        key_path = os.path.join(cache_dir, f"root-{digest}.json")
        if os.path.exists(key_path):
            with open(key_path) as fh:
                return roots.GradedRoot.from_json(fh.read())
    root = roots.build_root(
        tree,
        char,
        involution=involution,
        n_max=config.n_max,
        margin=config.truncation_margin,
        radius=config.box_radius,
        workers=config.workers,
    )
    if key_path:
        os.makedirs(cache_dir, exist_ok=True)
        with open(key_path, "w") as fh:
            fh.write(root.to_json())
    return root


def cmd_root(source: str, config: RunConfig, out=None) -> None:
    out = out or sys.stdout
    text = sys.stdin.read() if source == "-" else source
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as err:
            raise knots.KnotSpecError(f"bad plumbing JSON: {err}")
        tree, char, involution = _tree_from_doc(doc)
    else:
        pres = knots.presentation(knots.parse_spec(stripped))
        tree, char, involution = pres.tree, pres.char, pres.involution
    root = _build_root(tree, char, involution, config)
    if not root.stable:
        comps = len(root.vertices_at(root.n_max))
        raise roots.InstabilityError(
            f"sublevel sets still split into {comps} components "
            f"at level {root.n_max}; raise --n-max"
        )
    if config.verify:
        alt_engine = "box" if root.engine == "star" else "star"
        try:
            alt = roots.build_root(
                tree,
                char,
                engine=alt_engine,
                involution=involution,
                n_max=config.n_max,
                margin=config.truncation_margin,
                workers=config.workers,
            )
        except ValueError:
            alt = None  # non-star tree cannot feed the star engine
        if alt is not None and not root.is_isomorphic(alt, with_involution=True):
            raise RuntimeError("engine cross-check failed: star and box roots differ")
    if config.fmt == "dot":
        out.write(root.render_dot())
    elif config.fmt == "json":
        out.write(root.to_json() + "\n")
    else:
        swaps = sorted(
            (v, j) for v, j in enumerate(root.involution) if j > v
        )
        out.write(
            f"graded root: {len(root)} vertices, levels "
            f"{min(root.levels)}..{root.n_max}, engine {root.engine}\n"
        )
        out.write(f"d_invariant {_frac(root.d_invariant())}\n")
        out.write(f"leaves      {len(root.leaves)}\n")
        out.write(f"involution  {' '.join(f'({a} {b})' for a, b in swaps) or 'id'}\n")


def _omega_of(task) -> int:
    text, n_max, rank_bound, verify = task
    pkg = knots.invariants(
        knots.parse_spec(text),
        n_max=n_max,
        rank_bound=rank_bound,
        search_bound=rank_bound + 8,
        verify=verify,
    )
    return pkg.omega


def cmd_independence(texts: list[str], config: RunConfig, out=None) -> None:
    out = out or sys.stdout
    specs = [knots.parse_spec(t) for t in texts]
    names = [knots.unparse(s) for s in specs]
    pair_index = [(i, j) for i in range(len(specs)) for j in range(i + 1, len(specs))]
    tasks = [(n, config.n_max, config.rank_bound, config.verify) for n in names]
    tasks += [
        (f"sum({names[i]},{names[j]})", config.n_max, config.rank_bound, config.verify)
        for i, j in pair_index
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_omega_of, tasks))
    else:
        results = [_omega_of(t) for t in tasks]
    omegas = results[: len(specs)]
    pair_omegas = results[len(specs):]
    certificate = all(w > 0 for w in omegas) and len(set(omegas)) == len(omegas)
    for (i, j), w in zip(pair_index, pair_omegas):
        if w != max(omegas[i], omegas[j]):
            certificate = False
    doc = {
        "schema": 1,
        "entries": [{"spec": n, "omega": w} for n, w in zip(names, omegas)],
        "pairs": [
            {"specs": [names[i], names[j]], "omega": w}
            for (i, j), w in zip(pair_index, pair_omegas)
        ],
        "certificate": certificate,
    }
    if config.fmt == "json":
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return
    for entry in doc["entries"]:
        out.write(f"omega {entry['spec']} {entry['omega']}\n")
    for pair in doc["pairs"]:
        out.write(f"omega sum({pair['specs'][0]},{pair['specs'][1]}) {pair['omega']}\n")
    out.write(f"certificate {'yes' if certificate else 'no'}\n")


def _add_common(sub, formats):
    sub.add_argument("--n-max", type=int, default=None, help="truncation level cap")
    sub.add_argument(
        "--box",
        type=int,
        default=None,
        dest="box_radius",
        help="box engine radius override",
    )
    sub.add_argument(
        "--rank-bound",
        type=int,
        default=16,
        help="rank cap for the brute-force equivalence search",
    )
    sub.add_argument("--workers", type=int, default=1, help="parallel pipelines")
    sub.add_argument("--format", choices=formats, default=formats[0])
    sub.add_argument(
        "--verify", action="store_true", help="run cross-oracle checks inline"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="branchfloer",
        description="branched double cover invariants of arborescent knots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_inv = sub.add_parser("invariants", help="invariant package for one knot spec")
    p_inv.add_argument("spec", help="knot spec, e.g. 'pretzel(2,-3,-7)'")
    _add_common(p_inv, ("json", "text"))

    p_root = sub.add_parser("root", help="graded root of a cover presentation")
    p_root.add_argument("source", help="knot spec, plumbing JSON, or - for stdin")
    p_root.add_argument("--dot", action="store_true", help="same as --format dot")
    _add_common(p_root, ("json", "text", "dot"))

    p_ind = sub.add_parser("independence", help="omega-based independence report")
    p_ind.add_argument("specs", nargs="+", help="knot specs to compare")
    _add_common(p_ind, ("json", "text"))

    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            n_max=args.n_max,
            box_radius=args.box_radius,
            rank_bound=args.rank_bound,
            workers=args.workers,
            fmt="dot" if getattr(args, "dot", False) else args.format,
            verify=args.verify,
        )
        if args.command == "invariants":
            cmd_invariants(args.spec, config)
        elif args.command == "root":
            cmd_root(args.source, config)
        else:
            cmd_independence(args.specs, config)
    except knots.KnotSpecError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except plumbing.DefinitenessError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except roots.InstabilityError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - rc 1 is part of the contract
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
