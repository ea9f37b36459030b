use crate::error::{invalid, Result};
use crate::tolerance::INPUT_WEIGHT_TOL;

/// Probability measure with finite support inside `{0, .., space_size-1}`.
///
/// Zero-weight atoms are dropped on construction, so every stored weight is
/// strictly positive and the weights sum to one within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    space_size: usize,
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(space_size: usize, support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(invalid("support and weights differ in length"));
        }
        let mut seen = vec![false; space_size];
        for &a in &support {
            if a >= space_size {
                return Err(invalid(format!("support point {a} outside space of size {space_size}")));
            }
            if seen[a] {
                return Err(invalid(format!("support point {a} repeated")));
            }
            seen[a] = true;
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > INPUT_WEIGHT_TOL {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        let (support, weights): (Vec<usize>, Vec<f64>) =
            support.into_iter().zip(weights).filter(|&(_, w)| w > 0.0).map(|(a, w)| (a, w / total)).unzip();
        Ok(DiscreteDistribution { space_size, support, weights })
    }

    /// From a full weight vector over the space.
    pub fn from_dense(weights: &[f64]) -> Result<Self> {
        Self::new(weights.len(), (0..weights.len()).collect(), weights.to_vec())
    }

    /// Normalises nonnegative masses; used for conditionals built from
    /// unnormalised Boltzmann weights.
    pub fn from_unnormalized(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid("masses must have positive finite total"));
        }
        let w: Vec<f64> = masses.iter().map(|m| m / total).collect();
        Self::from_dense(&w)
    }

    pub fn point_mass(space_size: usize, a: usize) -> Result<Self> {
        Self::new(space_size, vec![a], vec![1.0])
    }

    pub fn uniform(space_size: usize) -> Result<Self> {
        Self::from_dense(&vec![1.0 / space_size as f64; space_size])
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space_size];
        for (&a, &w) in self.support.iter().zip(&self.weights) {
            out[a] = w;
        }
        out
    }

    pub fn mass(&self, a: usize) -> f64 {
        self.support.iter().position(|&s| s == a).map_or(0.0, |k| self.weights[k])
    }

    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.support.iter().zip(&self.weights).map(|(&a, &w)| w * f(a)).sum()
    }
}
