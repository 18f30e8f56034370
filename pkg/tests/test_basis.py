import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from rrmc.basis import (BasisSpec, FixedBasisFamily, ReinforcementSpec, eval_fixed,
                        eval_reinforcing, family_name, reinforcing)
from rrmc.errors import ConfigError


def test_sizes():
    assert FixedBasisFamily("constant-linear", 5).size == 6
    assert FixedBasisFamily("constant-linear-quadratic", 5).size == 1 + 5 + 15
    assert FixedBasisFamily("constant-linear-payoff", 5).size == 7
    assert FixedBasisFamily("swap-order-stats", 20).size == 22
    assert FixedBasisFamily("swap-order-stats-quadratic", 3).size == 2 + 3 + 6
    spec = BasisSpec(FixedBasisFamily("constant-linear", 2), ReinforcementSpec(1))
    assert (spec.K, spec.b, spec.width) == (3, 1, 4)


def test_table_labels_resolve():
    assert family_name("1, X_i") == "constant-linear"
    assert family_name("1,X_i,X_iX_j") == "constant-linear-quadratic"
    assert family_name("1, X_i, g(X)") == "constant-linear-payoff"
    assert family_name("1, C, X_(i)") == "swap-order-stats"
    with pytest.raises(ConfigError):
        family_name("splines")


def test_feature_order_quadratic():
    f = eval_fixed(FixedBasisFamily("constant-linear-quadratic", 2), (2.0, 3.0))
    assert f.tolist() == [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]


def test_ordered_features_sort():
    fam = FixedBasisFamily("constant-linear", 3, ordered=True)
    assert eval_fixed(fam, (3.0, 1.0, 2.0)).tolist() == [1.0, 1.0, 2.0, 3.0]
    raw = FixedBasisFamily("constant-linear", 3)
    assert eval_fixed(raw, (3.0, 1.0, 2.0)).tolist() == [1.0, 3.0, 1.0, 2.0]


def test_swap_features_include_coupon_and_order_stats():
    fam = FixedBasisFamily("swap-order-stats", 3)
    f = fam.evaluate(np.array([[90.0, 110.0, 100.0]]), np.array([-0.5]))
    assert f.tolist() == [[1.0, -0.5, 90.0, 100.0, 110.0]]
    with pytest.raises(ConfigError):
        fam.evaluate(np.array([[90.0, 110.0, 100.0]]))


def test_payoff_feature_last():
    fam = FixedBasisFamily("constant-linear-payoff", 2)
    assert eval_fixed(fam, (1.0, 2.0), 7.0).tolist() == [1.0, 1.0, 2.0, 7.0]


def test_dimension_checks():
    with pytest.raises(ConfigError):
        eval_fixed(FixedBasisFamily("constant-linear", 2), (1.0, 2.0, 3.0))
    with pytest.raises(ConfigError):
        FixedBasisFamily("constant-linear", 0)
    with pytest.raises(ConfigError):
        ReinforcementSpec(2)
    with pytest.raises(ConfigError):
        ReinforcementSpec(1, "derivative")


@given(arrays(np.float64, (4, 5), elements=st.floats(1, 200)))
@settings(max_examples=40, deadline=None)
def test_order_statistic_features_permutation_invariant(states):
    fam = FixedBasisFamily("swap-order-stats-quadratic", 5)
    perm = np.random.default_rng(0).permutation(5)
    c = np.arange(4.0)
    assert np.array_equal(fam.evaluate(states, c), fam.evaluate(states[:, perm], c))


def test_reinforcing_variants_and_ties():
    assert reinforcing("value", [1.0, 3.0], [2.0, 2.0]).tolist() == [2.0, 3.0]
    assert reinforcing("indicator", [1.0, 2.0, 3.0], [2.0, 2.0, 2.0]).tolist() == [0.0, 1.0, 1.0]
    assert eval_reinforcing("value", 0.0, 0.0).tolist() == [0.0]
    with pytest.raises(ConfigError):
        reinforcing("other", 1.0, 1.0)


def test_basis_spec_roundtrip():
    spec = BasisSpec(FixedBasisFamily("constant-linear", 4, True), ReinforcementSpec(1, "indicator"))
    assert BasisSpec.from_dict(spec.to_dict()) == spec
