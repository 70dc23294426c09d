import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from models.control_spec import ControlSpec, Mode, Power
from models.symmetric_spec import AbsProduct, ExactMultiadditive, PowerPerturbed, SymmetricSpec
from services.core_operators import (
    GenericControl,
    PowerControl,
    defect,
    evaluate_symmetric,
    fold_control,
    kappa,
    kappa_closed_form,
    printed_fold_coefficient,
    printed_stability_constant,
    scale_tuple,
    select_mode,
    stabilizer_series,
    stability_constant,
)
from utils.errors import ArityError, ConfigurationError, CoordinateRangeError, DivergentSeriesError, ThresholdError
from utils.sampling import make_rng, uniform_box

coordinate = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)


def power(n, eps=1.0, r=0.0):
    return ControlSpec(n=n, kind=Power(eps=eps, r=r))


# --------------------------------------------------
# evaluate_symmetric / defect
# --------------------------------------------------
def test_exact_product():
    assert evaluate_symmetric(SymmetricSpec(n=2, kind=ExactMultiadditive(c=1.0)), [3.0, 4.0]) == 12.0


def test_abs_product():
    assert evaluate_symmetric(SymmetricSpec(n=2, kind=AbsProduct(eps=1.0)), [-2.0, 3.0]) == 3.0


def test_exact_product_sums_coordinates_for_vectors():
    spec = SymmetricSpec(n=2, d=2, kind=ExactMultiadditive(c=1.0))
    assert evaluate_symmetric(spec, [[1.0, 2.0], [3.0, 4.0]]) == 21.0


def test_wrong_arity_is_rejected():
    with pytest.raises(ArityError):
        evaluate_symmetric(SymmetricSpec(n=2), [1.0, 2.0, 3.0])


def test_non_finite_point_is_rejected():
    with pytest.raises(ConfigurationError):
        evaluate_symmetric(SymmetricSpec(n=2), [1.0, float("nan")])


@given(st.lists(coordinate, min_size=3, max_size=3))
@settings(max_examples=200, deadline=None)
def test_catalog_is_permutation_symmetric(y):
    specs = [
        SymmetricSpec(n=3, kind=ExactMultiadditive(c=1.5)),
        SymmetricSpec(n=3, kind=PowerPerturbed(c=-1.0, beta=0.3, r=0.5)),
        SymmetricSpec(n=3, kind=AbsProduct(eps=2.0)),
    ]
    for spec in specs:
        base = evaluate_symmetric(spec, y)
        for perm in itertools.permutations(y):
            assert evaluate_symmetric(spec, list(perm)) == base


def test_abs_product_defect_examples():
    spec = SymmetricSpec(n=2, kind=AbsProduct(eps=1.0))
    assert defect(spec, [1.0, 1.0, -1.0]) == -1.0
    assert defect(spec, [1.0, 2.0, 3.0]) == 0.0


@given(st.lists(coordinate, min_size=4, max_size=4))
@settings(max_examples=200, deadline=None)
def test_exact_multiadditive_has_zero_defect(z):
    spec = SymmetricSpec(n=3, kind=ExactMultiadditive(c=0.5))
    scale = abs(z[0] * z[1]) * (abs(z[2]) + abs(z[3]) + 1.0)
    assert abs(defect(spec, z)) <= 1e-12 * max(1.0, scale)


def test_n1_defect_is_cauchy_difference():
    spec = SymmetricSpec(n=1, kind=AbsProduct(eps=2.0))
    assert defect(spec, [3.0, -1.0]) == 2.0 - 3.0 - 1.0


# --------------------------------------------------
# controls and folding
# --------------------------------------------------
def test_zero_convention():
    zero = (np.array([0.0]), np.array([0.0]))
    assert PowerControl(power(1, r=0.0))(zero) == 2.0
    assert PowerControl(power(1, r=0.5))(zero) == 0.0


@pytest.mark.parametrize("y", [(1.0, 1.0), (0.0, 5.0), (-3.0, 0.25)])
def test_fold_r0_is_six(y):
    assert fold_control(power(2, r=0.0), list(y)) == 6.0


def test_fold_r1_at_ones():
    assert fold_control(power(2, r=1.0), [1.0, 1.0]) == 8.0


def test_fold_n1():
    assert fold_control(power(1, eps=0.5, r=2.0), [3.0]) == pytest.approx(9.0)


def test_fold_visits_reversed_tail():
    # term j=1 of the n=3 fold is 2 phi(2 x_1, x_3, x_2, x_2)
    seen = []

    def record(z):
        seen.append(tuple(float(p[0]) for p in z))
        return 1.0

    control = GenericControl(fn=record, n=3)
    assert fold_control(control, [1.0, 2.0, 3.0]) == 1.0 + 2.0 + 4.0
    assert seen == [(2.0, 4.0, 3.0, 3.0), (2.0, 3.0, 2.0, 2.0), (3.0, 2.0, 1.0, 1.0)]


@given(st.integers(1, 4), st.sampled_from([-1.0, -0.5, 0.0, 0.5, 2.0]), st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4))
@settings(max_examples=100, deadline=None)
def test_fold_matches_kappa(n, r, xs):
    y = xs[:n]
    expected = kappa(n, r) * math.prod(x**r for x in y)
    assert fold_control(power(n, r=r), y) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("r", [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_fold_matches_kappa_on_random_tuples(n, r):
    rng = make_rng(3 * n)
    magnitudes = uniform_box(rng, 100, (n,), 0.1, 10.0)
    signs = np.where(uniform_box(rng, 100, (n,), 0.0, 1.0) < 0.5, -1.0, 1.0)
    control = power(n, eps=2.5, r=r)
    for y in magnitudes * signs:
        expected = 2.5 * kappa(n, r) * math.prod(abs(x) ** r for x in y)
        assert fold_control(control, y.tolist()) == pytest.approx(expected, rel=1e-10)


# --------------------------------------------------
# constants
# --------------------------------------------------
@pytest.mark.parametrize("n, r, value", [(1, 0.3, 2.0), (2, 0.0, 6.0), (2, 1.0, 8.0), (3, 1.0, 24.0), (4, 1.0, 64.0)])
def test_kappa_values(n, r, value):
    assert kappa(n, r) == pytest.approx(value)


@given(st.integers(1, 6), st.floats(-3.0, 3.0))
@settings(max_examples=200, deadline=None)
def test_kappa_closed_form(n, r):
    assume(abs(r - 1.0) > 1e-3)
    assert kappa_closed_form(n, r) == pytest.approx(kappa(n, r), rel=1e-9)


def test_kappa_closed_form_limit_at_one():
    assert kappa_closed_form(3, 1.0) == kappa(3, 1.0) == 24.0


def test_printed_fold_coefficient_agrees_only_for_n1():
    assert printed_fold_coefficient(1, 0.5) == pytest.approx(kappa(1, 0.5))
    assert printed_fold_coefficient(2, 0.0) != pytest.approx(kappa(2, 0.0))


def test_stability_constant_mismatch_at_n2_r0():
    constant = stability_constant(2, 0.0)
    assert constant.definitional == pytest.approx(2.0)
    assert constant.printed == pytest.approx(1.0)
    assert not constant.agree


@pytest.mark.parametrize("r", [-1.0, 0.0, 0.5, 2.0, 3.0])
def test_stability_constant_n1(r):
    constant = stability_constant(1, r)
    assert constant.definitional == pytest.approx(2.0 / abs(2.0 - 2.0**r))
    assert constant.agree


def test_threshold_has_no_constant():
    with pytest.raises(ThresholdError, match="threshold"):
        stability_constant(2, 1.0)
    with pytest.raises(ThresholdError):
        printed_stability_constant(2, 1.0)


# --------------------------------------------------
# stabilizer series
# --------------------------------------------------
def test_select_mode():
    assert select_mode(0.5) is Mode.PLUS
    assert select_mode(-2.0) is Mode.PLUS
    assert select_mode(2.0) is Mode.MINUS
    with pytest.raises(ThresholdError):
        select_mode(1.0)


def test_plus_series_n2_r0():
    series = stabilizer_series(power(2, r=0.0), [1.0, 1.0], Mode.PLUS)
    assert series.total == pytest.approx(2.0, rel=1e-12)
    assert series.closed_form == pytest.approx(2.0)
    assert series.certified


def test_minus_series_n1_r2():
    series = stabilizer_series(power(1, r=2.0), [1.0], Mode.MINUS)
    assert series.total == pytest.approx(1.0, rel=1e-12)
    assert series.ratio == pytest.approx(0.5)


@pytest.mark.parametrize("r, mode", [(1.0, Mode.PLUS), (1.5, Mode.PLUS), (0.5, Mode.MINUS), (1.0, Mode.MINUS)])
def test_divergent_series(r, mode):
    with pytest.raises(DivergentSeriesError, match="convergence condition"):
        stabilizer_series(power(2, r=r), [1.0, 1.0], mode)


def test_negative_r_tail_ratio_depends_on_zero_coordinates():
    control = PowerControl(power(2, r=-1.0))
    assert control.tail_ratio(Mode.PLUS, (np.array([1.0]), np.array([2.0]))) == 2.0**-4
    assert control.tail_ratio(Mode.PLUS, (np.array([0.0]), np.array([2.0]))) == 2.0**-2
    assert control.tail_ratio(Mode.PLUS) == 2.0**-2


def test_negative_r_series_uses_the_exact_ratio():
    series = stabilizer_series(power(2, r=-1.0), [1.0, 2.0], Mode.PLUS, k_terms=10)
    assert series.ratio == 2.0**-4
    assert series.certified
    assert series.total == pytest.approx(series.closed_form, rel=1e-12)


def test_closed_form_skipped_for_zero_coordinates_at_nonpositive_r():
    series = stabilizer_series(power(2, r=0.0), [0.0, 3.0], Mode.PLUS)
    assert series.closed_form is None
    assert series.total > 0.0


@given(st.integers(1, 3), st.sampled_from([-0.5, 0.25, 0.75, 1.5, 3.0]), st.lists(st.floats(0.25, 8.0), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_series_within_tail_of_closed_form(n, r, xs):
    mode = Mode.PLUS if r < 1.0 else Mode.MINUS
    series = stabilizer_series(power(n, r=r), xs[:n], mode)
    assert abs(series.value - series.closed_form) <= series.tail_bound + 1e-12 * series.closed_form


def test_generic_control_without_ratio_is_not_certified():
    control = GenericControl(fn=lambda z: abs(z[0][0]) ** 0.5 + abs(z[1][0]) ** 0.5, n=1)
    series = stabilizer_series(control, [1.0], Mode.PLUS)
    assert not series.certified
    assert series.total == pytest.approx(2.0 / (2.0 - math.sqrt(2.0)), rel=1e-9)


def test_rescaling_out_of_range():
    with pytest.raises(CoordinateRangeError):
        scale_tuple((np.array([1.0]),), 600)
