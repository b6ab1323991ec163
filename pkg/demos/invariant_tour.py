"""Print the invariant package for a handful of small knots.

Run from the repository root after an editable install:

    python demos/invariant_tour.py
"""

from branchfloer import knots as kn

SPECS = [
    "torus(2,3)",
    "torus(3,5)",
    "torus(3,7)",
    "pretzel(2,-3,-7)",
    "mirror(pretzel(2,-3,-7))",
    "sum(torus(2,3),torus(2,3))",
]


def describe(m):
    parts = [f"F[U]_{t}" for t in m.towers]
    parts += [f"(F[U]/U^{n})_{b}" for b, n in m.torsion]
    return " + ".join(parts) if parts else "0"


def main():
    for text in SPECS:
        pkg = kn.invariants(kn.parse_spec(text))
        print(text)
        print(f"  delta       {pkg.delta}  (upper {pkg.delta_upper}, lower {pkg.delta_lower})")
        print(f"  branched    {describe(pkg.branched)}")
        print(f"  connected   {describe(pkg.connected)}")
        print(f"  omega       {pkg.omega}    determinant {pkg.det}")
        print()


if __name__ == "__main__":
    main()
