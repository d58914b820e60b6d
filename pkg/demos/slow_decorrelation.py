"""
Slow decorrelation along a characteristic
=========================================

Passage times at two points a distance T^nu apart along a characteristic
differ, to leading order, by a deterministic drift.  The normalized
remainder shrinks as T grows, which is what lets fixed-time statements
travel to points at slightly different times.
"""

from kpzlab import harness as H

print("curved regime (eta = 0.9, nu = 1/2), scale T^(1/3)")
for row in H.slow_decorrelation_suite(0.9, 1.0, 0.5, [250, 500, 1000], 2000, seed=1):
    print(f"  T={row['T']:6.0f}  P={row['P']}  Q={row['Q']}  var={row['var']:.4f}")

print("boundary regime (eta = 0.25, nu = 3/4), scale T^(1/2)")
for row in H.slow_decorrelation_suite(0.25, 1.0, 0.75, [250, 500, 1000], 2000, seed=2):
    print(f"  T={row['T']:6.0f}  P(|z| >= 1) = {row['exceedance']:.4f}   var={row['var']:.4f}")
