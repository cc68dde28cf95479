use betagas::equilibrium::{
    default_grid, fixed_point_step, free_energy, solve_equilibrium, stieltjes_residual, EquilibriumSolution,
    SolverConfig,
};
use betagas::potential::{reference_density, DensityOnGrid, Grid, PotentialSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn solve_on(v: &PotentialSpec, c: f64, grid: &Grid) -> EquilibriumSolution {
    solve_equilibrium(v, c, grid, &SolverConfig::default()).unwrap()
}

fn solve(v: &PotentialSpec, c: f64) -> EquilibriumSolution {
    let grid = default_grid(v, c).unwrap();
    solve_equilibrium(v, c, &grid, &SolverConfig::default()).unwrap_or_else(|e| panic!("c = {c}: {e}"))
}

/// Closed-form `Z_c = sqrt(2 pi) Gamma(1 + c)` for the Gaussian potential,
/// the limit of the exact Selberg-integral ratio `Z_{b,N} / Z_{b,N-1}`.
fn gaussian_zc(c: f64) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt() * statrs::function::gamma::gamma(1.0 + c)
}

#[test]
fn gaussian_moment_identity_and_normalizer() {
    let v = PotentialSpec::gaussian();
    for c in [0.25, 1.0, 4.0] {
        let sol = solve(&v, c);
        let m1 = sol.rho.moment(1);
        let m2 = sol.rho.moment(2);
        println!("c = {c}: iterations {}, residual {:.2e}, m1 {m1:.2e}, m2 {m2:.6}, Z_c {:.8}", sol.iterations, sol.residual, sol.z_c);
        assert!(m1.abs() < 1e-6);
        assert!((m2 - 1.0 - c).abs() < 2e-3);
        assert!((sol.z_c - gaussian_zc(c)).abs() < 1e-4 * gaussian_zc(c));
        assert!((sol.rho.integral() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_step_widens_alpha() {
    // One Gibbs update from alpha at c = 1: second moment of
    // exp(-x^2/2 + 2 U_alpha(x)) with U_alpha(x) = E log|x - Y| taken from an
    // independent midpoint quadrature.
    let v = PotentialSpec::gaussian();
    let grid = Grid::new(-10.0, 10.0, 1001).unwrap();
    let alpha = reference_density(&v, &grid).unwrap().density;
    let (next, _) = fixed_point_step(&alpha, 1.0, &v).unwrap();
    let m2 = next.moment(2);

    // midpoint rule on cells centred away from x: nodes x + (j + 1/2) h
    let half_cells = 20_000i64;
    let h = 12.0 / half_cells as f64;
    let phi = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let u_alpha = |x: f64| -> f64 {
        (-half_cells..half_cells)
            .map(|j| {
                let d = (j as f64 + 0.5) * h;
                d.abs().ln() * phi(x + d) * h
            })
            .sum()
    };
    let coarse = 2001;
    let xs: Vec<f64> = (0..coarse).map(|i| -10.0 + 20.0 * i as f64 / (coarse - 1) as f64).collect();
    let w: Vec<f64> = xs.iter().map(|&x| (-0.5 * x * x + 2.0 * u_alpha(x)).exp()).collect();
    let mass: f64 = w.iter().sum();
    let oracle: f64 = xs.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>() / mass;
    println!("one-step m2 {m2:.6} vs oracle {oracle:.6}");
    assert!(m2 > 1.0);
    assert!((m2 - oracle).abs() < 2e-3);
}

#[test]
fn self_consistency_gaussian_and_quartic() {
    for v in [PotentialSpec::gaussian(), PotentialSpec::quartic()] {
        for c in [0.5, 2.0] {
            let sol = solve(&v, c);
            let (next, _) = fixed_point_step(&sol.rho, c, &v).unwrap();
            assert!(sol.residual <= 1e-10);
            assert!(next.sup_distance(&sol.rho) <= 1e-10);
            assert!(sol.rho.values().iter().all(|r| *r > 0.0));
        }
    }
}

#[test]
fn stieltjes_residual_small_and_converging() {
    let v = PotentialSpec::gaussian();
    let grid = default_grid(&v, 1.0).unwrap();
    let coarse = solve_on(&v, 1.0, &grid);
    let fine = solve_on(&v, 1.0, &grid.refined());
    for z in [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0)] {
        let r0 = stieltjes_residual(&coarse, &v, z).unwrap();
        let r1 = stieltjes_residual(&fine, &v, z).unwrap();
        println!("z = {z}: residual {r0:.3e} -> {r1:.3e}");
        assert!(r0 < 1e-3);
        assert!(r1 <= 0.5 * r0);
    }
    // c = 0 reduces to the alpha identity 1 + z S + S' = 0
    let alpha = solve(&v, 0.0);
    assert!(stieltjes_residual(&alpha, &v, Complex64::new(0.0, 2.0)).unwrap() < 1e-6);
    let table = PotentialSpec::tabulated(vec![-1.0, 0.0, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
    assert!(stieltjes_residual(&alpha, &table, Complex64::i()).is_err());
}

#[test]
fn grid_refinement_stability() {
    let v = PotentialSpec::gaussian();
    let grid = default_grid(&v, 1.0).unwrap();
    let coarse = solve_on(&v, 1.0, &grid);
    let fine = solve_on(&v, 1.0, &grid.refined());
    let diff = (0..grid.len())
        .map(|i| (coarse.rho.values()[i] - fine.rho.values()[2 * i]).abs())
        .fold(0.0, f64::max);
    println!("refinement sup change {diff:.3e}");
    assert!(diff < 1e-4);
}

#[test]
fn interpolates_to_alpha_as_coupling_vanishes() {
    let v = PotentialSpec::gaussian();
    let grid = default_grid(&v, 0.5).unwrap();
    let alpha = reference_density(&v, &grid).unwrap().density;
    let distances: Vec<f64> = [0.5, 0.1, 0.02]
        .iter()
        .map(|&c| solve_on(&v, c, &grid).rho.sup_distance(&alpha))
        .collect();
    assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");
}

#[test]
fn equilibrium_minimizes_free_energy() {
    let v = PotentialSpec::gaussian();
    let c = 1.0;
    let sol = solve(&v, c);
    let grid = *sol.grid();
    let h_min = free_energy(&sol.rho, c, &v).unwrap();
    let alpha = reference_density(&v, &grid).unwrap().density;
    assert!(h_min <= free_energy(&alpha, c, &v).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gamma = Gamma::new(1.0, 1.0).unwrap();
    for _ in 0..100 {
        // projected Dirichlet noise: mix rho_c with rho_c reweighted by
        // independent unit-mean gamma weights
        let t: f64 = rng.random_range(0.01..0.5);
        let noisy: Vec<f64> = sol.rho.values().iter().map(|r| r * gamma.sample(&mut rng)).collect();
        let noisy = DensityOnGrid::normalized(grid, noisy).unwrap();
        let mixed: Vec<f64> = sol
            .rho
            .values()
            .iter()
            .zip(noisy.values())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        let perturbed = DensityOnGrid::normalized(grid, mixed).unwrap();
        let h = free_energy(&perturbed, c, &v).unwrap();
        assert!(h >= h_min - 1e-12);
        if perturbed.sup_distance(&sol.rho) > 1e-3 {
            assert!(h > h_min);
        }
    }
}
