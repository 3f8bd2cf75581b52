import numpy as np
import pytest

from loopshift import (
    InvalidParameterError,
    PiecewiseLinearOracle,
    QuadraticOracle,
    SectorClass,
    SeparableOracle,
    grad,
    oracle_from_json,
    parse_oracle,
    plant_apply,
    random_rotation,
    sector_check,
    sector_membership_sampled,
    shifted_plant_apply,
)


def oracle_suite(sector):
    mid = 0.5 * (sector.m + sector.L)
    return [
        QuadraticOracle([sector.m, sector.L]),
        QuadraticOracle([sector.m, mid, sector.L], rotation=random_rotation(3, 42)),
        PiecewiseLinearOracle([0.0, 1.0], [sector.m, sector.L]),
        SeparableOracle([
            PiecewiseLinearOracle([0.0, 0.5], [sector.L, sector.m]),
            QuadraticOracle([mid]),
        ]),
    ]


def test_sector_constants():
    sec = SectorClass(1.0, 10.0)
    assert sec.kappa == 10.0
    assert sec.sector_gain == pytest.approx(9 / 11)
    assert sec.threshold == pytest.approx(11 / 9)
    assert sec.shift == pytest.approx(2 / 11)


def test_sector_rejects_degenerate_bounds():
    with pytest.raises(InvalidParameterError):
        SectorClass(0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        SectorClass(2.0, 1.0)
    with pytest.raises(InvalidParameterError):
        SectorClass(1.0, 1.0)


def test_sector_check_arithmetic():
    sec = SectorClass(1.0, 10.0)
    assert sector_check(0.0, 0.0, sec)
    assert sector_check(1.0, 5.0, sec)
    assert not sector_check(1.0, 11.0, sec)


def test_quadratic_gradient():
    oracle = QuadraticOracle([1.0, 10.0])
    assert np.allclose(grad(oracle, [1.0, 1.0]), [1.0, 10.0])
    assert np.all(grad(oracle, oracle.xstar) == 0.0)


def test_piecewise_linear_gradient_accumulates_slopes():
    oracle = PiecewiseLinearOracle([0.0, 1.0], [1.0, 10.0])
    assert grad(oracle, [2.0])[0] == pytest.approx(11.0)
    assert grad(oracle, [0.5])[0] == pytest.approx(0.5)
    assert grad(oracle, [-2.0])[0] == pytest.approx(-11.0)
    assert grad(oracle, [0.0])[0] == 0.0


def test_piecewise_linear_gradient_is_continuous():
    oracle = PiecewiseLinearOracle([0.0, 0.5, 2.0], [3.0, 1.0, 7.0])
    for b in (0.5, 2.0):
        left = oracle.centered_grad(np.array([b - 1e-9]))[0]
        right = oracle.centered_grad(np.array([b + 1e-9]))[0]
        assert abs(left - right) < 1e-7


def test_pwl_validation():
    with pytest.raises(InvalidParameterError):
        PiecewiseLinearOracle([1.0], [1.0])  # must start at 0
    with pytest.raises(InvalidParameterError):
        PiecewiseLinearOracle([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        PiecewiseLinearOracle([0.0], [-1.0])


def test_plant_apply_examples():
    oracle = QuadraticOracle([2.0], xstar=[3.0])
    assert plant_apply(oracle, [0.0])[0] == 0.0
    assert plant_apply(oracle, [1.0])[0] == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = rng.normal(size=1)
        direct = plant_apply(oracle, u)
        via_grad = grad(oracle, u + oracle.xstar)
        assert np.allclose(direct, via_grad, atol=1e-12)


def test_shifted_plant_examples():
    m, L = 1.0, 10.0
    sec = SectorClass(m, L)
    top = QuadraticOracle([L])
    assert shifted_plant_apply(top, sec, [0.0])[0] == 0.0
    out = shifted_plant_apply(top, sec, [2.0])[0]
    assert out == pytest.approx(-2.0 * sec.sector_gain, rel=1e-12)
    center = QuadraticOracle([(m + L) / 2.0])
    assert shifted_plant_apply(center, sec, [7.0])[0] == pytest.approx(0.0, abs=1e-14)


def test_shifted_plant_gain_bound():
    sec = SectorClass(1.0, 10.0)
    rng = np.random.default_rng(10)
    for oracle in oracle_suite(sec):
        assert oracle.lies_in(sec)
        for _ in range(10_000):
            u = 5.0 * rng.standard_normal(oracle.dim)
            out = shifted_plant_apply(oracle, sec, u)
            bound = sec.sector_gain * float(np.linalg.norm(u)) * (1.0 + 1e-9)
            assert float(np.linalg.norm(out)) <= bound


def test_quadratic_sector_membership_per_eigendirection():
    sec = SectorClass(1.0, 10.0)
    for lam in (1.0, 2.5, 5.5, 10.0):
        for u in np.linspace(-50.0, 50.0, 2001):
            assert sector_check(u, lam * u, sec)
    # outside the band the check must fail somewhere
    assert not sector_check(1.0, 10.5, sec)


def test_sampled_membership_for_oracle_suite():
    sec = SectorClass(1.0, 10.0)
    for oracle in oracle_suite(sec):
        assert sector_membership_sampled(oracle, sec, samples=10_000, seed=1)


def test_translated_oracle_moves_stationary_point():
    oracle = QuadraticOracle([1.0, 4.0])
    moved = oracle.translated([1.0, -2.0])
    assert np.allclose(moved.xstar, [1.0, -2.0])
    assert np.all(grad(moved, moved.xstar) == 0.0)
    x = np.array([0.3, 0.7])
    assert np.allclose(grad(moved, x + moved.xstar), grad(oracle, x))


def test_separable_oracle_composition():
    comp = SeparableOracle(
        [QuadraticOracle([2.0]), PiecewiseLinearOracle([0.0], [3.0])],
        xstar=[1.0, -1.0],
    )
    assert comp.dim == 2
    out = grad(comp, [2.0, 0.0])
    assert out[0] == pytest.approx(2.0)   # 2 * (2 - 1)
    assert out[1] == pytest.approx(3.0)   # 3 * (0 + 1)


def test_dimension_mismatch_errors():
    oracle = QuadraticOracle([1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        grad(oracle, [1.0])
    with pytest.raises(InvalidParameterError):
        plant_apply(oracle, [1.0, 2.0, 3.0])
    with pytest.raises(InvalidParameterError):
        sector_check([1.0], [1.0, 2.0], SectorClass(1, 2))


def test_parse_oracle_strings():
    q = parse_oracle("quadratic:1,10")
    assert q.kind == "quadratic" and q.dim == 2
    p = parse_oracle("pwl:0:1,1:10")
    assert p.kind == "pwl"
    assert grad(p, [2.0])[0] == pytest.approx(11.0)
    with pytest.raises(InvalidParameterError):
        parse_oracle("cubic:1,2")
    with pytest.raises(InvalidParameterError):
        parse_oracle("pwl:0:1:2")


def test_oracle_from_json():
    q = oracle_from_json({"kind": "quadratic", "eigenvalues": [1, 5, 10], "rotation_seed": 3})
    assert q.dim == 3
    sec = SectorClass(1.0, 10.0)
    assert q.lies_in(sec)
    s = oracle_from_json({
        "kind": "separable",
        "components": [
            {"kind": "pwl", "breakpoints": [0.0], "slopes": [2.0]},
            {"kind": "quadratic", "eigenvalues": [4.0]},
        ],
    })
    assert s.dim == 2
    with pytest.raises(InvalidParameterError):
        oracle_from_json({"kind": "spline"})


def test_describe_round_trips_cli_syntax():
    assert parse_oracle("quadratic:1,10").describe() == "quadratic:1,10"
    assert parse_oracle("pwl:0:1,1:10").describe() == "pwl:0:1,1:10"
