import math

import numpy as np
import pytest

from weylsl import forward_oracle as fo
from weylsl.errors import InvalidInputError, StageError
from weylsl.pipeline import (
    RescaleRecord,
    SolverOptions,
    adapt_analytic_bc,
    adapt_partial_potential,
    adapt_two_spectra,
    adapt_variable_h,
    point_grid,
    run_inverse,
    run_synthetic,
    three_spectra_indices,
)
from weylsl.potentials import PotentialSpec, catalog

PI = math.pi
FREE = catalog("free")


def test_two_spectra_free_alternates():
    lam = [n * n for n in range(6)]
    nu = [(n + 0.5) ** 2 for n in range(6)]
    samples = adapt_two_spectra(lam, nu)
    z = [s.z.real for s in samples]
    assert z == sorted(z)
    assert [s.is_infinite for s in samples] == [True, False] * 6
    assert all(s.M == 0 for s in samples if not s.is_infinite)


def test_two_spectra_errors():
    with pytest.raises(InvalidInputError):
        adapt_two_spectra([0.0, 1.0], [1.0 + 1e-11, 2.0])
    with pytest.raises(InvalidInputError):
        adapt_two_spectra([1.0, 0.0], [0.5, 2.0])


def test_variable_h_conversion():
    s = adapt_variable_h([(2.0, 0.0), (3.0, 1.0)], h_ref=0.0)
    assert s[0].is_infinite
    assert s[1].M == 1.0
    assert adapt_variable_h([(2.0, 0.5)], h_ref=0.5)[0].is_infinite


def test_analytic_bc_conversion():
    s = adapt_analytic_bc(lambda z: 0.0, lambda z: 1.0, [1.0, 2.0])
    assert all(v.M == 0 and not v.is_infinite for v in s)
    s = adapt_analytic_bc(lambda z: 1.0, lambda z: 0.0, [1.0], h_ref=2.0)
    assert s[0].M == -0.5
    with pytest.raises(InvalidInputError):
        adapt_analytic_bc(lambda z: 0.0, lambda z: 0.0, [1.0])


def test_adapter_equivalence():
    pairs = [(0.7, 1.0), (2.3, 2.0), (5.1, 3.0), (8.8, 0.0)]
    table = dict(pairs)
    a = adapt_variable_h(pairs)
    b = adapt_analytic_bc(lambda z: 1.0, lambda z: -table[z], list(table))
    assert a == b


def test_three_spectra_indices():
    i1, i2, i3 = three_spectra_indices()
    assert i1[:6] == [0, 1, 3, 4, 6, 7]
    assert i2[:6] == [0, 2, 3, 5, 6, 8]
    assert i3[:6] == [1, 2, 4, 5, 7, 8]
    assert len(i1) == len(i2) == len(i3) == 8


def test_point_grid():
    z = point_grid(3)
    assert z == pytest.approx([0.04, 0.49, 1.44])
    assert point_grid(2, include_zero=True)[0] == 0.0
    assert isinstance(point_grid(2, imag=1.0)[0], complex)


def test_rescale_record_round_trip():
    rec = RescaleRecord(PI / 2)
    assert rec.ell == pytest.approx(PI / 2) and rec.ratio == pytest.approx(0.5)
    z, m = rec.to_hat(4.0, 3.0)
    assert (z, m) == pytest.approx((1.0, 1.5))
    assert math.isinf(rec.to_hat(4.0, math.inf)[1])
    x, q, H = rec.from_hat(np.array([0.0, PI]), np.array([1.0, 1.0]), 1.0)
    np.testing.assert_allclose(x, [PI / 2, PI])
    np.testing.assert_allclose(q, [4.0, 4.0])
    assert H == 2.0


def test_rescaled_m_matches_rescaled_problem():
    q5 = catalog("q5")
    a = PI / 2
    rec = RescaleRecord(a)
    r = rec.ratio
    hat = PotentialSpec(lambda s: r * r * q5.q(a + rec.ell * np.asarray(s) / PI), 0.0, r * q5.H, "q5 hat")
    for lam in fo.oracle_spectrum(q5, 6)[1:]:
        m_left = fo.propagate_m(q5, a, q5.h, lam)
        zh, mh = rec.to_hat(lam, m_left)
        assert mh == pytest.approx(fo.m_value(hat, zh), rel=1e-8, abs=1e-8)


def test_partial_free_gives_zero():
    pairs = [(float(n * n), 0.0) for n in range(40)]
    samples, rec = adapt_partial_potential(FREE, PI / 2, pairs)
    result = run_inverse(samples, rescale=rec)
    assert result.x[0] == pytest.approx(PI / 2) and result.x[-1] == pytest.approx(PI)
    assert np.max(np.abs(result.q)) <= 1e-6
    assert abs(result.H) <= 1e-6


def test_partial_a_out_of_range():
    with pytest.raises(InvalidInputError):
        adapt_partial_potential(FREE, PI, [(1.0, 0.0)])


def test_free_two_spectra_round_trip():
    lam = [n * n for n in range(16)]
    nu = [(n + 0.5) ** 2 for n in range(16)]
    result = run_inverse(adapt_two_spectra(lam, nu))
    assert np.max(np.abs(result.q)) <= 1e-8
    assert abs(result.h) <= 1e-8 and abs(result.H) <= 1e-8
    d = result.diagnostics
    for key in ("cond", "residual_norm", "omega_minus_omega2", "K", "n_coeffs", "shift"):
        assert key in d
    assert set(result.timings) == {"weyl_system", "spectral", "gelfand_levitan"}


def test_too_few_samples_is_tagged():
    samples = adapt_two_spectra([0.0, 1.0, 4.0], [0.25, 2.25, 6.25])
    with pytest.raises(StageError) as info:
        run_inverse(samples)
    assert info.value.stage == "weyl_system"
    assert info.value.diagnostics["n_samples"] == 6


def test_fixed_size_truncation():
    lam = [n * n for n in range(10)]
    nu = [(n + 0.5) ** 2 for n in range(10)]
    result = run_inverse(adapt_two_spectra(lam, nu), SolverOptions(n_unknown_h=6, K=200))
    assert result.diagnostics["n_coeffs"] == 6 and result.diagnostics["K"] == 200
    assert np.max(np.abs(result.q)) <= 1e-8


@pytest.mark.parametrize("bad", [dict(N=0), dict(grid_points=10), dict(spline_degree=4),
                                 dict(cond_limit=1e7), dict(K=0), dict(n_unknown_h=0)])
def test_solver_options_validation(bad):
    with pytest.raises(InvalidInputError):
        SolverOptions(**bad).validate()


def test_synthetic_free_round_trip():
    _, result, report = run_synthetic(FREE, {"kind": "points", "count": 41})
    assert all(v <= 1e-8 for v in report.values()), report
