"""Smoke test of the betagas_py extension: run after building it with maturin."""

import math

import betagas_py as bg


def main():
    v = bg.Potential.gaussian()
    assert v.value(2.0) == 2.0

    eq = bg.solve_equilibrium(v, 1.0)
    assert eq.residual <= 1e-10, eq
    assert abs(eq.moment(2) - 2.0) < 2e-3
    assert abs(eq.z_c / math.sqrt(2 * math.pi) - 1.0) < 1e-4
    assert eq.relative_entropy() > 0.0
    g = eq.stieltjes(complex(0.0, 1.0))
    assert g.imag > 0.0

    zero = bg.solve_equilibrium(v, 0.0)
    assert zero.relative_entropy() < 1e-12

    try:
        bg.solve_equilibrium(v, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative coupling accepted")

    batch = bg.tridiagonal_sample(200, 1.0, 200, seed=3)
    assert len(batch) == 200 and batch.n_particles == 200
    assert abs(batch.coupling - 1.0) < 1e-12
    again = bg.SampleBatch.from_bytes(batch.to_bytes())
    assert again.samples() == batch.samples()

    chain = bg.mcmc_sample(v, 10, 1.0, 20, seed=1, sweeps_burnin=200, sweeps_between=2)
    assert 0.05 <= chain.acceptance_rate <= 0.9, chain.acceptance_rate
    assert chain.warning is None

    ratio = bg.brute_force_partition_ratio(v, 2, 1.0)
    assert abs(ratio - 2 * math.sqrt(2)) < 1e-4

    fixture = bg.poisson_fixture(0.3, [0.0], 5.0, 1000, 50, seed=4)
    report = bg.poisson_report(fixture, 0.0, 5.0, 0.3)
    assert report["chi2_pass"] and report["mean_pass"], report

    outcomes = bg.validate(quick=True, only=[1, 2])
    assert [o["pass"] for o in outcomes] == [True, True], outcomes

    print("betagas_py smoke test passed")


if __name__ == "__main__":
    main()
