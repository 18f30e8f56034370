"""Bracketing a Bermudan put between a lower and a dual upper bound.

A binomial lattice gives the reference price.  The fitted stopping rule
yields a lower bound on fresh paths; nested simulation around the same rule
yields an upper bound.  A good basis makes the bracket tight.
"""
from rrmc import TimeGrid, experiment
from rrmc.oracle import LatticeSpec, lattice_price

exact = lattice_price(LatticeSpec(100.0, 100.0, 0.05, 0.2, TimeGrid.uniform(1.0, 4)))
print(f"lattice reference {exact:.4f}")

for basis in ("constant-linear", "constant-linear-quadratic"):
    rep = experiment.run_experiment({"product": {"put": {}}, "basis": basis, "N": 20_000,
                                     "N_test": 20_000, "outer": 5_000, "inner": 200})
    lo, up = rep["lower"], rep["upper"]
    print(f"{basis:28s} [{lo['value']:.4f}, {up['value']:.4f}]  "
          f"gap {100 * (up['value'] - lo['value']) / exact:.2f}%")
