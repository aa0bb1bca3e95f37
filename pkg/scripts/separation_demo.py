#!/usr/bin/env python3
"""Classification landscape across the named fixture families.

Prints one row per fixture: positivity, product positivity, PPT, and the
orientation tag, making the separation between quantum states and merely
product-positive operators visible at a glance.
"""

import argparse

from poptlab.fixtures import GeneratorSpec, generate
from poptlab.jordan import ClassifyConfig, classify
from poptlab.operator_core import partial_transpose


def rows(dim: int, seed: int):
    specs = [
        GeneratorSpec("max_entangled", (dim, dim)),
        GeneratorSpec("ginibre_mixed", (dim, dim), seed),
        GeneratorSpec("haar_pure", (dim, dim), seed + 1),
        GeneratorSpec("werner", (dim, dim), parameters={"p": -0.8}),
        GeneratorSpec("werner", (dim, dim), parameters={"p": 0.0}),
        GeneratorSpec("swap_popt", (dim, dim)),
        GeneratorSpec("pt_of", (dim, dim), seed + 2, parameters={"kind": "ginibre_mixed"}),
        GeneratorSpec("pt_of", (dim, dim), parameters={"kind": "max_entangled"}),
    ]
    for spec in specs:
        label = spec.kind
        if spec.kind == "werner":
            label += f"(p={spec.parameters['p']})"
        if spec.kind == "pt_of":
            label += f"({spec.parameters['kind']})"
        yield label, generate(spec).state


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=3, help="local dimension on each side")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=int, default=32)
    parser.add_argument("--double-flip", action="store_true", help="also classify the two-sided transpose")
    args = parser.parse_args()

    cfg = ClassifyConfig(restarts=args.restarts, samples=30, seed=args.seed)
    dims = (args.dim, args.dim)
    header = f"{'fixture':30s} {'verdict':14s} {'min eig':>10s} {'popt min':>10s} {'ppt':>5s} {'orientation':>12s}"
    print(header)
    print("-" * len(header))
    for label, rho in rows(args.dim, args.seed):
        rep = classify(rho, dims, cfg)
        print(
            f"{label:30s} {rep.verdict:14s} {rep.min_eigenvalue:10.4f} "
            f"{rep.popt.min_value:10.2e} {str(rep.is_ppt):>5s} {rep.orientation.tag:>12s}"
        )
        if args.double_flip:
            both = partial_transpose(partial_transpose(rho, dims, 1), dims, 2)
            flipped = classify(both, dims, cfg)
            print(
                f"{'  ^ both sides transposed':30s} {flipped.verdict:14s} {flipped.min_eigenvalue:10.4f} "
                f"{flipped.popt.min_value:10.2e} {str(flipped.is_ppt):>5s} {flipped.orientation.tag:>12s}"
            )


if __name__ == "__main__":
    main()
