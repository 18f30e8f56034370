"""Predicted cost of reinforcement against a wider fixed basis.

For the max-call with d assets and J dates, replacing the quadratic basis
by linear plus one reinforcing column changes evaluation cost by roughly
(2d + J) / (d(d + 1)).
"""
from rrmc.costmodel import max_call_ratio

for d in (2, 5, 10, 20, 50):
    r = max_call_ratio(d, 9)
    print(f"d={d:3d}  evaluation ratio {str(r):>9s} = {float(r):.3f}")
