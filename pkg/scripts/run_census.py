#!/usr/bin/env python3
"""Classify every truth function of arity <= 3 and report which validity
classes coincide for a few familiar connective sets."""

import argparse

from kripkebench.search import classify_connectives, report_relations
from kripkebench.syntax import Signature
from kripkebench.truthfun import builtin

SIGNATURE_SETS = [
    ("not,and,imp", ("not", "and", "imp")),
    ("and,or", ("and", "or")),
    ("not,and,or,imp", ("not", "and", "or", "imp")),
    ("xor", ("xor",)),
    ("iff", ("iff",)),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-arity", type=int, default=3)
    args = parser.parse_args()

    for arity in range(args.max_arity + 1):
        census = classify_connectives(arity)
        print(f"arity {arity}:")
        for supermultiplicative in (True, False):
            for monotonic in (True, False):
                count = census.count(supermultiplicative, monotonic)
                label = (
                    ("supermultiplicative" if supermultiplicative else "non-supermultiplicative")
                    + ", "
                    + ("monotonic" if monotonic else "non-monotonic")
                )
                print(f"  {label}: {count}")
    print()

    for label, names in SIGNATURE_SETS:
        signature = Signature({}, {name: builtin(name) for name in names})
        report = report_relations(signature)
        print(
            f"{{{label}}}: intuitionistic=constant-domain {report.ils_equals_cds},"
            f" constant-domain=classical {report.cds_equals_cls},"
            f" intuitionistic=classical {report.ils_equals_cls}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
