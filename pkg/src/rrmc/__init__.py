"""Regression Monte Carlo for optimal stopping with reinforced bases."""
from .basis import BasisSpec, FixedBasisFamily, ReinforcementSpec
from .backward import ContinuationModel, backward_induct_ls, backward_induct_tvr, train
from .bounds import BoundEstimate, dual_upper_bound, evaluate_continuation, lower_bound
from .errors import (CapacityError, CollinearityError, ConfigError, ConvergenceError,
                     NumericalError, RRMCError)
from .market_models import GBMParams, PathSet, TimeGrid, simulate
from .products import MaxCallSpec, PutSpec, SwapSpec

__version__ = "0.1.0"
