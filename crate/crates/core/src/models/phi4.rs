use super::{BoundaryCondition, Coupling, SiteSet};
use crate::error::{invalid, Result};
use crate::wasserstein::{DiscreteDistribution, Metric};

/// φ⁴ lattice field restricted to a symmetric grid of `grid_points` values
/// on `[−X, X]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi4Grid {
    pub sites: SiteSet,
    pub a: f64,
    pub b: f64,
    pub grid_points: usize,
    /// `X`; defaults to [`default_half_width`].
    pub half_width: Option<f64>,
    pub couplings: Vec<Coupling>,
    pub boundary: BoundaryCondition,
}

/// Smallest `X ≥ max(4, (40/a)^{1/4})` with `u(X) − min u ≥ 40`, so
/// the neglected tail of `e^{−u}` is far below `1e−12`.
pub fn default_half_width(a: f64, b: f64) -> f64 {
    let mut x = 4.0f64.max((40.0 / a).powf(0.25));
    let u = |x: f64| a * x.powi(4) - b * x * x;
    let u_min = if b > 0.0 { -b * b / (4.0 * a) } else { 0.0 };
    while u(x) - u_min < 40.0 {
        x *= 1.1;
    }
    x
}

impl Phi4Grid {
    /// Open chain with nearest-neighbour coupling `kappa`.
    pub fn chain(n: usize, a: f64, b: f64, kappa: f64, grid_points: usize) -> Self {
        Phi4Grid {
            sites: SiteSet::numbered(n),
            a,
            b,
            grid_points,
            half_width: None,
            couplings: (0..n.saturating_sub(1)).map(|i| Coupling::pair(i, i + 1, kappa)).collect(),
            boundary: BoundaryCondition::free(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(invalid(format!("φ⁴ needs a > 0 and finite b, got a = {}, b = {}", self.a, self.b)));
        }
        if self.grid_points < 16 {
            return Err(invalid(format!("φ⁴ grid needs at least 16 points, got {}", self.grid_points)));
        }
        if let Some(x) = self.half_width {
            if !(x > 0.0) {
                return Err(invalid("φ⁴ grid half-width must be > 0"));
            }
        }
        if self.couplings.iter().any(|c| !c.strength.is_finite()) {
            return Err(invalid("φ⁴ couplings must be finite"));
        }
        Ok(())
    }

    pub fn x_max(&self) -> f64 {
        self.half_width.unwrap_or_else(|| default_half_width(self.a, self.b))
    }

    pub fn grid_metric(&self) -> Result<Metric> {
        symmetric_grid(self.grid_points, self.x_max())
    }
}

/// Uniform grid of `g` points on `[−x_max, x_max]`.
pub fn symmetric_grid(g: usize, x_max: f64) -> Result<Metric> {
    if g < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let h = 2.0 * x_max / (g - 1) as f64;
    Metric::line((0..g).map(|k| -x_max + k as f64 * h).collect())
}

#[derive(Debug, Clone)]
pub struct Phi4SingleSite {
    /// Grid-restricted single-site measure `∝ e^{−u}` with trapezoid weights.
    pub m: DiscreteDistribution,
    pub sigma2: f64,
    pub mean: f64,
}

/// Single-site measure `m ∝ e^{−(a x⁴ − b x²)}` on a symmetric grid and its
/// variance.
pub fn phi4_single_site(a: f64, b: f64, grid: &Metric) -> Result<Phi4SingleSite> {
    if !(a > 0.0) {
        return Err(invalid(format!("φ⁴ single-site measure needs a > 0, got {a}")));
    }
    let points = grid.line_points().ok_or_else(|| invalid("φ⁴ grid must be a line metric"))?;
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| points[i].total_cmp(&points[j]));
    let sym = (0..n).all(|k| (points[order[k]] + points[order[n - 1 - k]]).abs() < 1e-12);
    if !sym {
        return Err(invalid("φ⁴ grid must be symmetric about 0"));
    }
    let u = |x: f64| a * x.powi(4) - b * x * x;
    let u_min = points.iter().map(|&x| u(x)).fold(f64::INFINITY, f64::min);
    let mut w = vec![0.0; n];
    for (k, &idx) in order.iter().enumerate() {
        let left = if k > 0 { points[idx] - points[order[k - 1]] } else { 0.0 };
        let right = if k + 1 < n { points[order[k + 1]] - points[idx] } else { 0.0 };
        w[idx] = 0.5 * (left + right) * (-(u(points[idx]) - u_min)).exp();
    }
    let m = DiscreteDistribution::from_unnormalized(&w)?;
    let mean = m.expect(|k| points[k]);
    let sigma2 = m.expect(|k| points[k] * points[k]);
    Ok(Phi4SingleSite { m, sigma2, mean })
}
