"""Render graded roots for a few double branched covers as Graphviz DOT.

Writes one .dot file per knot into the chosen directory (default ./roots).
Pipe any of them through `dot -Tpng` to get a picture.  The dashed edges
are the involution; vertical position is the grading level.
"""

import argparse
import os

from branchfloer import knots as kn
from branchfloer import roots as rt

GALLERY = ["torus(3,7)", "pretzel(2,-3,-7)", "pretzel(11,-5,9)", "montesinos(0;7/3)"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="roots", help="output directory")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for text in GALLERY:
        pres = kn.presentation(kn.parse_spec(text))
        root = rt.build_root(pres.tree, pres.char, involution=pres.involution)
        name = text.replace("(", "_").replace(")", "").replace(",", "_").replace(";", "_").replace("/", "-")
        path = os.path.join(args.out, f"{name}.dot")
        with open(path, "w") as fh:
            fh.write(root.render_dot())
        swaps = sum(1 for v, j in enumerate(root.involution) if j != v) // 2
        print(f"{text:28} -> {path}  ({len(root)} vertices, {swaps} involution swaps)")


if __name__ == "__main__":
    main()
