"""Two-asset max-call: how much one reinforcing regressor buys.

The plain linear basis leaves the exercise boundary badly misplaced.  Adding
the previous date's value estimate as an extra column recovers most of what
a full quadratic basis gets, at a fraction of its width.

    python demos/max_call_reinforcement.py [N]
"""
import sys

from rrmc import experiment

N = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000

print(f"{'basis':28s} {'method':16s} {'lower':>8s} {'se':>6s}")
for basis in ("constant-linear", "constant-linear-quadratic"):
    for method in ("standard-tvr", "reinforced-tvr"):
        rep = experiment.run_experiment({"product": {"max_call": {"d": 2}}, "basis": basis,
                                         "method": method, "N": N, "N_test": N})
        lo = rep["lower"]
        print(f"{basis:28s} {method:16s} {lo['value']:8.3f} {lo['std_error']:6.3f}")
