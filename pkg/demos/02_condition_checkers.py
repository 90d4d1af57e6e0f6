#!/usr/bin/env python3
"""Hypothesis checks for the degenerate wave operator, family by family.

Each built-in coefficient family is pushed through the five checks
(non-negativity of a, finite-order degeneration, the first-order bound,
the order condition, and the ellipticity band for beta).  A failing
check always names the worst point.
"""

from lpwave.coefficients import (builtin_family, check_order_condition,
                                 run_all_checks)

CASES = [
    ("monomial", dict(k=2, gamma=0.0)),
    ("monomial", dict(k=4, gamma=0.3)),
    ("monomial", dict(k=4, gamma=0.1)),      # order condition fails
    ("interior_zero", dict(k=2, gamma=0.0)),
    ("nondegenerate", dict(k=1, gamma=0.0)),
    ("flat", dict(k=2, gamma=0.0)),          # infinite-order zero fails
]

for name, params in CASES:
    cs = builtin_family(name, **params)
    print("=" * 64)
    print(f"family {name}  k={params['k']}  gamma={params['gamma']}")
    print("=" * 64)
    for report in run_all_checks(cs):
        mark = "ok  " if report.verdict else "FAIL"
        line = f"  [{mark}] {report.condition_id:<20} margin {report.margin:+.4g}"
        if report.witness is not None and report.witness.t is not None:
            line += (f"  tightest at t={report.witness.t:.3f}, "
                     f"x={report.witness.x:.3f}")
        print(line)
        if report.note:
            print(f"         note: {report.note}")
    print()

print("order condition as k grows with gamma = 1/2 "
      "(the large-k limit of the admissible range):")
for k in (2, 10, 1000, 10 ** 6):
    rep = check_order_condition(k, 0.5)
    print(f"  k={k:>8}: gamma + 1/k = {rep.witness.value:.8f}  "
          f"-> {'admissible' if rep.verdict else 'rejected'}")
