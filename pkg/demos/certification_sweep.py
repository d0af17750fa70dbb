"""
Certifying the bounds on random matrices
========================================

A small slice of the standard ensemble: every certificate reports the
computed norm, the sampled supremum, and the ratio to the theoretical
constant.  Ratios stay below 1; the sampled supremum is a lower bound,
so each report carries that caveat.
"""

from bivarfun.certify import run_case, standard_ensemble

cases = standard_ensemble(seed=11, counts={"cp1": 4, "bivariate": 4, "multivariate": 2,
                                           "lemma1": 2, "lemma2": 2, "frechet": 3})
print(f"{'case':16s} {'function':38s} {'ratio':>8s}  pass")
for case in cases:
    rep = run_case(case)
    print(f"{case.case_id:16s} {str(case.function)[:38]:38s} {rep.ratio:8.4f}  {rep.passed}")
