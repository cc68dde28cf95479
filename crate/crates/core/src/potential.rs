//! Confining potentials, the uniform grids everything is discretized on, and
//! the reference measure `alpha = exp(-V) / Z`.
//!
//! All integrals over a [`Grid`] use the trapezoid rule. This is the only
//! quadrature rule used for normalization anywhere in the crate, so a density
//! normalized here integrates to one under every other module's integrals.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GROWTH_FLOOR: f64 = 5.0;

/// Tail mass of `exp(-V)` allowed outside a grid handed to
/// [`reference_density`].
pub const REFERENCE_TAIL_TOLERANCE: f64 = 1e-10;

/// Uniform grid `lo = x_0 < x_1 < ... < x_{n-1} = hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "grid needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid over `[lo, hi]` whose spacing is at most `max_spacing`.
    pub fn with_spacing(lo: f64, hi: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {max_spacing}"
            )));
        }
        let cells = ((hi - lo) / max_spacing).ceil().max(2.0) as usize;
        Self::new(lo, hi, cells + 1)
    }

    /// The grid with every cell split in two. Every node of `self` is a node
    /// of the refined grid (at index `2 i`).
    pub fn refined(&self) -> Self {
        Self {
            lo: self.lo,
            hi: self.hi,
            n: 2 * self.n - 1,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Node `i`, measured from the nearer endpoint so that a grid with
    /// `lo = -hi` has exactly mirrored nodes.
    pub fn node(&self, i: usize) -> f64 {
        let back = self.n - 1 - i;
        if back < i {
            self.hi - back as f64 * self.spacing()
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let inner: f64 = values[1..self.n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[self.n - 1]))
    }

    /// Whether the nodes are symmetric about the origin.
    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi
    }
}

/// Nonnegative density sampled at the nodes of a [`Grid`], understood as the
/// piecewise-linear interpolant of its node values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOnGrid {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityOnGrid {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "density has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "density values must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Builds the density and rescales it to unit trapezoid mass.
    pub fn normalized(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let mut density = Self::new(grid, values)?;
        let mass = density.integral();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Normalization(format!(
                "density has trapezoid mass {mass}"
            )));
        }
        density.values.iter_mut().for_each(|v| *v /= mass);
        Ok(density)
    }

    /// Density of `f(x)` on the grid, normalized.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::normalized(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    pub fn is_normalized(&self) -> bool {
        (self.integral() - 1.0).abs() <= 1e-9
    }

    /// Trapezoid integral of `f(x) rho(x)`.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let weighted: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(self.grid.node(i)) * v)
            .collect();
        self.grid.trapezoid(&weighted)
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.expectation(|x| x.powi(k))
    }

    /// Linear interpolation between nodes, zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        let h = self.grid.spacing();
        let s = (x - lo) / h;
        let i = (s.floor() as usize).min(self.grid.len() - 2);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn sup_distance(&self, other: &DensityOnGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn default_growth_floor() -> f64 {
    DEFAULT_GROWTH_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `V(x) = x^2 / 2`.
    Gaussian,
    /// `V(x) = sum_k coefficients[k] x^k`, even degree, positive leading term.
    EvenPolynomial { coefficients: Vec<f64> },
    /// Linear interpolation of `(x, values)`; outside the table the last
    /// segment's slope is continued with unit curvature.
    Tabulated { x: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_growth_floor")]
    pub growth_floor: f64,
}

impl PotentialSpec {
    pub fn gaussian() -> Self {
        Self {
            kind: PotentialKind::Gaussian,
            shift: 0.0,
            growth_floor: DEFAULT_GROWTH_FLOOR,
        }
    }

    pub fn even_polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let spec = Self {
            kind: PotentialKind::EvenPolynomial { coefficients },
            shift: 0.0,
            growth_floor: DEFAULT_GROWTH_FLOOR,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `V(x) = x^4`.
    pub fn quartic() -> Self {
        Self::even_polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0]).expect("x^4 is admissible")
    }

    pub fn tabulated(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spec = Self {
            kind: PotentialKind::Tabulated { x, values },
            shift: 0.0,
            growth_floor: DEFAULT_GROWTH_FLOOR,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a two-column `x,value` CSV table. A non-numeric first line is
    /// treated as a header.
    pub fn from_table_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::InadmissiblePotential(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if lineno == 0 => continue,
                _ => {
                    return Err(Error::InadmissiblePotential(format!(
                        "{}:{}: non-numeric row",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Self::tabulated(xs, vs)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_growth_floor(mut self, growth_floor: f64) -> Self {
        self.growth_floor = growth_floor;
        self
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, PotentialKind::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(Error::InadmissiblePotential("shift is not finite".into()));
        }
        match &self.kind {
            PotentialKind::Gaussian => Ok(()),
            PotentialKind::EvenPolynomial { coefficients } => {
                let degree = coefficients.len().checked_sub(1);
                match degree {
                    Some(d) if d >= 2 && d % 2 == 0 => {}
                    _ => {
                        return Err(Error::InadmissiblePotential(format!(
                            "polynomial must have even degree >= 2, got {} coefficients",
                            coefficients.len()
                        )))
                    }
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InadmissiblePotential(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
                if !(coefficients[coefficients.len() - 1] > 0.0) {
                    return Err(Error::InadmissiblePotential(
                        "leading coefficient must be positive".into(),
                    ));
                }
                Ok(())
            }
            PotentialKind::Tabulated { x, values } => {
                if x.len() != values.len() || x.len() < 2 {
                    return Err(Error::InadmissiblePotential(
                        "table needs at least two (x, value) rows".into(),
                    ));
                }
                if x.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::InadmissiblePotential(
                        "table entries must be finite".into(),
                    ));
                }
                if x.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InadmissiblePotential(
                        "table x column must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Gaussian => 0.5 * x * x,
            PotentialKind::EvenPolynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            PotentialKind::Tabulated { x: xs, values } => {
                let last = xs.len() - 1;
                if x < xs[0] {
                    let slope = (values[1] - values[0]) / (xs[1] - xs[0]);
                    let d = x - xs[0];
                    values[0] + slope * d + 0.5 * d * d
                } else if x > xs[last] {
                    let slope = (values[last] - values[last - 1]) / (xs[last] - xs[last - 1]);
                    let d = x - xs[last];
                    values[last] + slope * d + 0.5 * d * d
                } else {
                    let j = xs.partition_point(|&t| t <= x).clamp(1, last);
                    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                    values[j - 1] * (1.0 - t) + values[j] * t
                }
            }
        }
    }

    /// `V(x)` including the shift. Callers that need the error path use
    /// [`eval_potential`].
    pub fn value(&self, x: f64) -> f64 {
        self.eval_raw(x) + self.shift
    }

    /// `V'(x)`; tabulated potentials have no derivative.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Gaussian => Ok(x),
            PotentialKind::EvenPolynomial { coefficients } => Ok(coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)),
            PotentialKind::Tabulated { .. } => Err(Error::Unsupported(
                "tabulated potentials carry no derivative".into(),
            )),
        }
    }

    /// Checks `V >= 0` on `[lo, hi]` (scanned on a fine grid) and the
    /// superlogarithmic growth screen at both endpoints.
    pub fn check_admissible(&self, lo: f64, hi: f64) -> Result<()> {
        self.validate()?;
        let scan = Grid::with_spacing(lo, hi, 1e-2)?;
        if let Some(x) = scan.nodes().into_iter().find(|&x| self.value(x) < 0.0) {
            return Err(Error::InadmissiblePotential(format!(
                "V({x}) = {} is negative on the working domain; raise the shift",
                self.value(x)
            )));
        }
        for end in [lo, hi] {
            let ratio = self.value(end) / (1.0 + end * end).ln();
            if !(ratio >= self.growth_floor) {
                return Err(Error::InadmissiblePotential(format!(
                    "V(x)/log(1+x^2) = {ratio:.3} at x = {end} is below the growth floor {}",
                    self.growth_floor
                )));
            }
        }
        Ok(())
    }
}

pub fn eval_potential(v: &PotentialSpec, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x = {x} is not finite")));
    }
    let value = v.value(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InadmissiblePotential(format!(
            "V({x}) evaluated to {value}"
        )))
    }
}

/// `Lambda (1 + x^2)^(kappa/2) exp(-V(x))`.
pub fn envelope_bound(v: &PotentialSpec, kappa: f64, lambda: f64, x: f64) -> f64 {
    lambda * (1.0 + x * x).powf(0.5 * kappa) * (-v.value(x)).exp()
}

/// Integral of `f` from `start` to `+inf` (`direction = 1`) or `-inf`
/// (`direction = -1`), by composite Simpson on panels of width 1/100 until the
/// integrand is decreasing and a panel adds nothing at double precision.
pub(crate) fn tail_mass(f: impl Fn(f64) -> f64, start: f64, direction: f64) -> f64 {
    const PANEL: f64 = 0.01;
    const MAX_PANELS: usize = 200_000;
    let mut total = 0.0;
    let mut a = start;
    let mut fa = f(a);
    for _ in 0..MAX_PANELS {
        let b = a + direction * PANEL;
        let fm = f(0.5 * (a + b));
        let fb = f(b);
        let panel = PANEL / 6.0 * (fa + 4.0 * fm + fb);
        total += panel;
        if fb <= fa && (panel <= 1e-17 * total || fb == 0.0) {
            break;
        }
        a = b;
        fa = fb;
    }
    total
}

fn envelope_tail(v: &PotentialSpec, kappa: f64, start: f64, direction: f64) -> f64 {
    tail_mass(|x| envelope_bound(v, kappa, 1.0, x), start, direction)
}

/// Smallest `L >= 0` with `tail(direction * L) < target`.
fn tail_endpoint(v: &PotentialSpec, kappa: f64, target: f64, direction: f64) -> Result<f64> {
    let tail = |l: f64| envelope_tail(v, kappa, direction * l, direction);
    let mut hi = 1.0;
    while tail(hi) >= target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InadmissiblePotential(
                "envelope tail never falls below the requested mass".into(),
            ));
        }
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    if tail(lo) < target {
        return Ok(lo);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Interval `[lo, hi]` outside of which the `kappa`-envelope (with
/// `Lambda = 1`) has mass below `eps`, split evenly between the two tails.
pub fn choose_truncation(v: &PotentialSpec, kappa: f64, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be >= 0, got {kappa}")));
    }
    v.validate()?;
    let right = tail_endpoint(v, kappa, 0.5 * eps, 1.0)?;
    let left = tail_endpoint(v, kappa, 0.5 * eps, -1.0)?;
    let (lo, hi) = (-left, right);
    for end in [lo, hi] {
        let ratio = v.value(end) / (1.0 + end * end).ln();
        if !(ratio >= v.growth_floor) {
            return Err(Error::InadmissiblePotential(format!(
                "V(x)/log(1+x^2) = {ratio:.3} at truncation endpoint {end} is below the growth floor {}",
                v.growth_floor
            )));
        }
    }
    Ok((lo, hi))
}

/// `alpha = exp(-V) / Z` on a grid, with `Z` the trapezoid normalizer.
#[derive(Debug, Clone)]
pub struct ReferenceDensity {
    pub density: DensityOnGrid,
    pub z: f64,
}

pub fn reference_density(v: &PotentialSpec, grid: &Grid) -> Result<ReferenceDensity> {
    v.validate()?;
    let tail = tail_mass(|x| (-v.value(x)).exp(), grid.lo(), -1.0)
        + tail_mass(|x| (-v.value(x)).exp(), grid.hi(), 1.0);
    if !(tail < REFERENCE_TAIL_TOLERANCE) {
        return Err(Error::InadequateDomain(format!(
            "mass of exp(-V) outside [{}, {}] is {tail:.3e}",
            grid.lo(),
            grid.hi()
        )));
    }
    let weights: Vec<f64> = grid
        .nodes()
        .into_iter()
        .map(|x| (-v.value(x)).exp())
        .collect();
    let z = grid.trapezoid(&weights);
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Normalization(format!(
            "integral of exp(-V) over the grid is {z}; the grid misses the potential well"
        )));
    }
    let values = weights.into_iter().map(|w| w / z).collect();
    Ok(ReferenceDensity {
        density: DensityOnGrid::new(*grid, values)?,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn potential_values() {
        let g = PotentialSpec::gaussian();
        assert_eq!(eval_potential(&g, 0.0).unwrap(), 0.0);
        assert_eq!(eval_potential(&g, 2.0).unwrap(), 2.0);
        let q = PotentialSpec::quartic();
        assert!((eval_potential(&q, 1.5).unwrap() - 5.0625).abs() < 1e-14);
        assert!(eval_potential(&g, f64::NAN).is_err());
    }

    #[test]
    fn polynomial_validation() {
        assert!(PotentialSpec::even_polynomial(vec![0.0, 0.0, 0.0, 1.0]).is_err());
        assert!(PotentialSpec::even_polynomial(vec![0.0, 0.0, -1.0]).is_err());
        assert!(PotentialSpec::even_polynomial(vec![1.0]).is_err());
        let p = PotentialSpec::even_polynomial(vec![1.0, 0.0, 0.5]).unwrap();
        assert_eq!(p.derivative(2.0).unwrap(), 2.0);
    }

    #[test]
    fn tabulated_interpolates_and_extrapolates() {
        let t = PotentialSpec::tabulated(vec![-1.0, 0.0, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
        assert!((t.value(0.5) - 0.25).abs() < 1e-15);
        assert!((t.value(-0.25) - 0.125).abs() < 1e-15);
        // slope 0.5 continued, unit curvature
        assert!((t.value(3.0) - (0.5 + 0.5 * 2.0 + 2.0)).abs() < 1e-14);
        assert!((t.value(-3.0) - (0.5 + 0.5 * 2.0 + 2.0)).abs() < 1e-14);
        assert!(t.derivative(0.0).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn table_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "x,value\n-1,0.5\n0,0\n1,0.5\n").unwrap();
        let t = PotentialSpec::from_table_csv(&path).unwrap();
        assert!((t.value(0.5) - 0.25).abs() < 1e-15);
        std::fs::write(&path, "x,value\n1,0.5\n0,0\n").unwrap();
        assert!(PotentialSpec::from_table_csv(&path).is_err());
    }

    #[test]
    fn gaussian_reference_is_standard_normal() {
        let grid = Grid::new(-8.0, 8.0, 1601).unwrap();
        let r = reference_density(&PotentialSpec::gaussian(), &grid).unwrap();
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.z - sqrt_2pi).abs() < 1e-10, "Z = {}", r.z);
        for (i, v) in r.density.values().iter().enumerate() {
            let x = grid.node(i);
            assert!((v - (-0.5 * x * x).exp() / sqrt_2pi).abs() < 1e-10);
        }
        assert!(r.density.is_normalized());
    }

    #[test]
    fn quartic_normalizer() {
        // 2 Gamma(5/4) from an independent adaptive quadrature of exp(-x^4).
        let grid = Grid::new(-6.0, 6.0, 1201).unwrap();
        let r = reference_density(&PotentialSpec::quartic(), &grid).unwrap();
        assert!((r.z - 1.812_804_954_1).abs() < 1e-8, "Z = {}", r.z);
    }

    #[test]
    fn narrow_grid_rejected() {
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        assert!(matches!(
            reference_density(&PotentialSpec::gaussian(), &grid),
            Err(Error::InadequateDomain(_))
        ));
    }

    #[test]
    fn envelope_examples() {
        let g = PotentialSpec::gaussian();
        assert!((envelope_bound(&g, 2.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((envelope_bound(&g, 2.0, 1.0, 1.0) - 2.0 * (-0.5f64).exp()).abs() < 1e-14);
        assert!((envelope_bound(&g, 4.0, 3.0, 2.0) - 75.0 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn truncation_examples() {
        let g = PotentialSpec::gaussian();
        let (lo, hi) = choose_truncation(&g, 2.0, 1e-10).unwrap();
        assert!(lo <= -7.0 && hi >= 7.0, "[{lo}, {hi}]");
        assert!((lo + hi).abs() < 1e-9);
        // the default growth floor rejects the short eps = 1e-2 interval
        assert!(choose_truncation(&g, 2.0, 1e-2).is_err());
        let loose = g.clone().with_growth_floor(1.0);
        let (lo2, hi2) = choose_truncation(&loose, 2.0, 1e-2).unwrap();
        assert!(lo2 >= lo && hi2 <= hi);
        let (lo4, hi4) = choose_truncation(&PotentialSpec::quartic(), 2.0, 1e-10).unwrap();
        assert!(lo4 >= lo && hi4 <= hi);
    }

    #[test]
    fn truncation_tail_matches_oracle() {
        // Right tail of (1+x^2) exp(-x^2/2) beyond L has the closed form
        // 2 sqrt(2 pi) Q(L) + L exp(-L^2/2); at L = 7 both tails exceed 1e-10.
        let l = 7.0f64;
        let q = 0.5 * statrs::function::erf::erfc(l / 2f64.sqrt());
        let closed = 2.0 * (2.0 * std::f64::consts::PI).sqrt() * q + l * (-0.5 * l * l).exp();
        let numeric = tail_mass(|x| (1.0 + x * x) * (-0.5 * x * x).exp(), l, 1.0);
        assert!((numeric - closed).abs() < 1e-6 * closed, "{numeric} vs {closed}");
        assert!(2.0 * closed > 1e-10);
    }

    #[test]
    fn value_at_interpolates() {
        let grid = Grid::new(0.0, 2.0, 3).unwrap();
        let d = DensityOnGrid::new(grid, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.value_at(0.5), 0.5);
        assert_eq!(d.value_at(2.0), 0.0);
        assert_eq!(d.value_at(-1.0), 0.0);
        assert!((d.integral() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn reference_density_normalized_and_even(
            pad in 0.0f64..2.0,
            n in 50usize..600,
            a2 in 0.2f64..2.0,
            a4 in 0.01f64..1.0,
        ) {
            let v = PotentialSpec::even_polynomial(vec![0.0, 0.0, a2, 0.0, a4])
                .unwrap()
                .with_growth_floor(0.0);
            let (_, hi) = choose_truncation(&v, 0.0, 1e-11).unwrap();
            let half = hi + pad;
            let grid = Grid::new(-half, half, 2 * n + 1).unwrap();
            let r = reference_density(&v, &grid).unwrap();
            prop_assert!((r.density.integral() - 1.0).abs() < 1e-9);
            let vals = r.density.values();
            for i in 0..vals.len() {
                prop_assert_eq!(vals[i], vals[vals.len() - 1 - i]);
            }
            // envelope with Lambda >= 1/Z dominates alpha
            for (i, a) in vals.iter().enumerate() {
                let x = grid.node(i);
                prop_assert!(envelope_bound(&v, 2.0, 1.0 / r.z, x) >= *a);
            }
        }

        #[test]
        fn truncation_monotone_in_eps(e1 in -12.0f64..-6.0, e2 in -12.0f64..-6.0) {
            let (small, large) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let g = PotentialSpec::gaussian().with_growth_floor(1.0);
            let (lo1, hi1) = choose_truncation(&g, 3.0, 10f64.powf(small)).unwrap();
            let (lo2, hi2) = choose_truncation(&g, 3.0, 10f64.powf(large)).unwrap();
            prop_assert!(lo1 <= lo2 && hi1 >= hi2);
        }
    }
}
