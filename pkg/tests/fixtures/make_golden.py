"""Regenerate put_golden.json with a plain-Python reference (no numpy, no rrmc).

The ten paths are frozen in the JSON; this script only recomputes the
expected coefficients, LS dummy cash flows and stop dates from them.
Run: python3 tests/fixtures/make_golden.py
"""
import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
PATH = os.path.join(HERE, "put_golden.json")


def fit_line(xs, ys):
    """Least squares y ~ a + b x from the 2x2 normal equations (Cramer's rule)."""
    n = len(xs)
    sx = sum(xs)
    sxx = sum(x * x for x in xs)
    sy = sum(ys)
    sxy = sum(x * y for x, y in zip(xs, ys))
    det = n * sxx - sx * sx
    return [(sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det]


def reference(doc):
    strike, rate, dates = doc["strike"], doc["rate"], doc["dates"]
    paths = doc["paths"]
    n_dates = len(dates)

    def g(x, j):
        return math.exp(-rate * dates[j]) * max(strike - x, 0.0)

    # Tsitsiklis-van Roy: response max(g_j, C_j) at date-j states
    tvr = [None] * (n_dates - 1)
    cont = [0.0] * len(paths)          # C_j at date-j states
    for j in range(n_dates - 1, 0, -1):
        ys = [max(g(p[j], j), c) for p, c in zip(paths, cont)]
        xs = [p[j - 1] for p in paths]
        a, b = fit_line(xs, ys)
        tvr[j - 1] = [a, b]
        cont = [a + b * x for x in xs]

    # Longstaff-Schwartz: response is the realised dummy cash flow
    ls = [None] * (n_dates - 1)
    dummy = [g(p[-1], n_dates - 1) for p in paths]
    for j in range(n_dates - 1, 0, -1):
        xs = [p[j - 1] for p in paths]
        a, b = fit_line(xs, dummy)
        ls[j - 1] = [a, b]
        dummy = [g(x, j - 1) if g(x, j - 1) >= a + b * x else v for x, v in zip(xs, dummy)]

    def stops(coeffs):
        out = []
        for p in paths:
            tau = n_dates - 1
            for j in range(n_dates - 1):
                a, b = coeffs[j]
                if g(p[j], j) >= a + b * p[j]:
                    tau = j
                    break
            out.append(tau)
        return out

    return {"tvr_coefficients": tvr, "ls_coefficients": ls, "ls_dummy_cashflows": dummy,
            "tvr_stop_dates": stops(tvr)}


if __name__ == "__main__":
    with open(PATH) as fh:
        doc = json.load(fh)
    doc["expected"] = reference(doc)
    with open(PATH, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
