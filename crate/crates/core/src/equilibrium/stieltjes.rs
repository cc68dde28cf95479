use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{DensityOnGrid, PotentialSpec};

use super::EquilibriumSolution;

fn off_axis(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Stieltjes transform needs a finite z off the real axis, got {z}"
        )));
    }
    Ok(())
}

fn trapezoid_complex(rho: &DensityOnGrid, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let grid = rho.grid();
    rho.values()
        .iter()
        .enumerate()
        .map(|(i, r)| f(grid.node(i)) * (grid.weight(i) * r))
        .sum()
}

/// `S(z) = ∫ rho(x) / (x - z) dx`.
pub fn stieltjes_transform(rho: &DensityOnGrid, z: Complex64) -> Result<Complex64> {
    off_axis(z)?;
    Ok(trapezoid_complex(rho, |x| (x - z).inv()))
}

/// `S'(z) = ∫ rho(x) / (x - z)^2 dx`.
pub fn stieltjes_derivative(rho: &DensityOnGrid, z: Complex64) -> Result<Complex64> {
    off_axis(z)?;
    Ok(trapezoid_complex(rho, |x| (x - z).powi(-2)))
}

/// `|∫ V'(x) rho_c(x) / (x - z) dx + c S(z)^2 + S'(z)|`, which vanishes for
/// the exact equilibrium density.
pub fn stieltjes_residual(sol: &EquilibriumSolution, v: &PotentialSpec, z: Complex64) -> Result<f64> {
    off_axis(z)?;
    v.derivative(0.0)?;
    let rho = &sol.rho;
    let drift = trapezoid_complex(rho, |x| {
        Complex64::new(v.derivative(x).unwrap_or(f64::NAN), 0.0) / (x - z)
    });
    let s = stieltjes_transform(rho, z)?;
    let ds = stieltjes_derivative(rho, z)?;
    Ok((drift + sol.c * s * s + ds).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Grid;

    #[test]
    fn uniform_transform_at_i() {
        let grid = Grid::new(-1.0, 1.0, 4001).unwrap();
        let rho = DensityOnGrid::new(grid, vec![0.5; 4001]).unwrap();
        let s = stieltjes_transform(&rho, Complex64::i()).unwrap();
        assert!(s.re.abs() < 1e-12);
        assert!((s.im - std::f64::consts::FRAC_PI_4).abs() < 1e-6, "{s}");
    }

    #[test]
    fn leading_moment_and_symmetry() {
        let grid = Grid::new(-8.0, 8.0, 1601).unwrap();
        let rho = DensityOnGrid::from_fn(grid, |x| (-x * x / 2.0).exp()).unwrap();
        let z = Complex64::new(0.0, 1e4);
        let lead = stieltjes_transform(&rho, z).unwrap() * z;
        assert!((lead + 1.0).norm() < 1e-3);
        for t in [0.5, 1.0, 3.0] {
            let s = stieltjes_transform(&rho, Complex64::new(0.0, t)).unwrap();
            assert!(s.re.abs() < 1e-12, "Re S(i{t}) = {}", s.re);
        }
    }

    #[test]
    fn real_axis_rejected() {
        let grid = Grid::new(-1.0, 1.0, 11).unwrap();
        let rho = DensityOnGrid::new(grid, vec![0.5; 11]).unwrap();
        assert!(stieltjes_transform(&rho, Complex64::new(0.3, 0.0)).is_err());
        assert!(stieltjes_derivative(&rho, Complex64::new(0.3, 0.0)).is_err());
    }
}
