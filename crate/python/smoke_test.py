"""Smoke test for the tvar_py extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import math

import tvar_py as tv


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    const = tv.Schedule.constant(1.2, -0.32)
    table = tv.green_functions(const, 0, 4)
    for got, want in zip(table, [1.0, 1.2, 1.12, 0.96, 0.7936]):
        assert close(got, want), (got, want)
    assert close(tv.xi(const, 0, 4), tv.xi_determinant(const, 0, 4))

    point, mse = tv.forecast(const, 3, 3, (0.0, 0.0))
    assert point == 0.0 and close(mse, 3.6944)

    sol = tv.general_solution(const, 0, 3)
    eps = [0.3, -0.2, 0.5]
    assert close(sol.evaluate((1.0, 0.5), eps), tv.forward_recursion(const, 0, (1.0, 0.5), eps))

    ar1 = tv.Schedule.constant(0.5, 0.0, phi0=1.0)
    mean, var, converged = tv.unconditional_moments(ar1, 0)
    assert converged and close(mean, 2.0, 1e-8) and close(var, 4.0 / 3.0, 1e-8)
    gamma, _ = tv.autocovariance(ar1, 0, 3)
    assert close(gamma, 0.125 * 4.0 / 3.0, 1e-8)

    par = tv.Schedule.periodic([(0.0, 0.5, 0.0, 1.0), (0.0, 1.2, 0.0, 1.0), (0.0, 0.9, 0.0, 1.0), (0.0, 1.8, 0.0, 1.0)])
    verdict, rho, _ = tv.stationarity(par)
    assert verdict == "stationary" and close(rho, 0.972, 1e-10)
    value, satisfied, exact = tv.par24_restriction(par)
    assert close(value, 0.972) and satisfied and exact

    rec, dec, det, terms = tv.decompose(par, 4, 3)
    assert terms == 4 and close(rec, dec, 1e-11) and close(rec, det, 1e-11)

    text = par.to_toml()
    assert tv.Schedule.from_toml(text)(7).phi1 == par(7).phi1

    paths = tv.simulate(const, 0, 5, 4, seed=3)
    assert paths == tv.simulate(const, 0, 5, 4, seed=3)
    assert len(paths) == 4 and all(len(p) == 5 for p in paths)

    fe_var, se, _, _ = tv.empirical_forecast_error(const, 40, 3, 20000, seed=1)
    assert abs(fe_var - 3.6944) < 4 * se

    try:
        tv.Schedule.constant(0.5, 0.0, sigma2=-1.0)
    except tv.TvarError as e:
        assert "sigma2" in str(e)
    else:
        raise AssertionError("negative variance accepted")

    try:
        tv.Schedule.from_toml("schema_version = 1\nbogus = 1\n")
    except tv.ConfigError:
        pass
    else:
        raise AssertionError("unknown key accepted")

    assert math.isinf(tv.xi(tv.Schedule.constant(1e3, 0.0), 0, 200))
    print("tvar_py smoke test passed")


if __name__ == "__main__":
    main()
