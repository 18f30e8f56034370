"""Small builders shared by the test modules."""
import numpy as np

from rrmc.basis import BasisSpec, FixedBasisFamily, ReinforcementSpec
from rrmc.market_models import GBMParams, PathSet, TimeGrid, simulate
from rrmc.products import MaxCallSpec, PutSpec, SwapSpec


def max_call_setup(d=2, n=2000, seed=1, num_dates=9, strike=100.0, rho=0.0):
    grid = TimeGrid.uniform(3.0, num_dates)
    params = GBMParams.symmetric(d, 0.05, 0.1, 0.2, 100.0, rho)
    return params, MaxCallSpec(strike, 0.05, grid), simulate(params, grid, n, seed)


def swap_setup(d=6, n=2000, seed=1, rho=0.3):
    grid = TimeGrid.uniform(5.0, 10)
    params = GBMParams.symmetric(d, 0.05, 0.0, 0.2, 100.0, rho)
    prod = SwapSpec(0.05, 2, 4, 0.09, 0.03, 0.0, 0.05, params.spot, grid, notional=1e4)
    return params, prod, simulate(params, grid, n, seed)


def put_setup(n=2000, seed=1, num_dates=4):
    grid = TimeGrid.uniform(1.0, num_dates)
    params = GBMParams.symmetric(1, 0.05, 0.0, 0.2, 100.0)
    return params, PutSpec(100.0, 0.05, grid), simulate(params, grid, n, seed)


def basis(family, d, b=1, ordered=False, variant="value"):
    return BasisSpec(FixedBasisFamily(family, d, ordered), ReinforcementSpec(b, variant))


def golden_paths(doc):
    grid = TimeGrid(tuple(doc["dates"]))
    states = np.array(doc["paths"], dtype=float)[:, :, None]
    states.setflags(write=False)
    params = GBMParams.symmetric(1, doc["rate"], 0.0, doc["vol"], doc["spot"])
    return PathSet(states, grid, None, params), PutSpec(doc["strike"], doc["rate"], grid)
