use crate::error::{invalid, Result};

/// Centered Gaussian on ℝ² with unit variances and correlation `rho`.
///
/// Handled analytically: conditionals are `N(ρ x_j, 1 − ρ²)` and the W1
/// distance between two such conditionals is the distance of their means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianConditional {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianPair {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(invalid(format!("Gaussian correlation must satisfy |ρ| < 1, got {rho}")));
        }
        Ok(GaussianPair { rho })
    }

    /// Law of `x_site` given the other coordinate `other`.
    pub fn conditional(&self, site: usize, other: f64) -> Result<GaussianConditional> {
        if site > 1 {
            return Err(invalid("Gaussian pair has sites 0 and 1 only"));
        }
        Ok(GaussianConditional { mean: self.rho * other, variance: 1.0 - self.rho * self.rho })
    }

    /// W1 between equal-variance Gaussians is the gap between the means.
    pub fn conditional_w1(&self, a: &GaussianConditional, b: &GaussianConditional) -> f64 {
        debug_assert!((a.variance - b.variance).abs() < 1e-15);
        (a.mean - b.mean).abs()
    }

    /// Interdependence coefficient `sup |ρ x − ρ y| / |x − y| = |ρ|`.
    pub fn coefficient(&self) -> f64 {
        self.rho.abs()
    }

    /// Single-site gradient gap `1 / σ²` of the conditional law.
    pub fn lambda0(&self) -> f64 {
        1.0 / (1.0 - self.rho * self.rho)
    }

    /// Exact gradient Poincaré constant `1 / λ_max(Γ)`.
    pub fn exact_gradient_gap(&self) -> f64 {
        1.0 / (1.0 + self.rho.abs())
    }

    /// Matrix of the heat-bath generator on `span{x₁, x₂}`:
    /// `L x₁ = ρ x₂ − x₁`, `L x₂ = ρ x₁ − x₂`.
    pub fn linear_generator(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, self.rho, self.rho, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_moments() {
        let g = GaussianPair::new(0.6).unwrap();
        let c = g.conditional(0, 2.0).unwrap();
        assert!((c.mean - 1.2).abs() < 1e-15);
        assert!((c.variance - 0.64).abs() < 1e-15);
        assert!(GaussianPair::new(1.0).is_err());
    }
}
