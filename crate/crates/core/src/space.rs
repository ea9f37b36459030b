//! Mixed-radix indexing of finite product spaces.
//!
//! A configuration `x = (x_0, ..., x_{n-1})` with `x_i < q_i` is stored as
//! `x_0 + q_0 (x_1 + q_1 (x_2 + ...))`, i.e. little-endian over the ordered
//! site list. Every table in the crate (joint measures, functions, generator
//! rows) uses this order.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl ProductSpace {
    /// Errors if the product overflows or exceeds `cap`.
    pub fn new(radices: Vec<usize>, cap: usize) -> Result<Self> {
        if radices.is_empty() {
            return Err(crate::error::invalid("product space needs at least one site"));
        }
        if radices.contains(&0) {
            return Err(crate::error::invalid("every site needs a nonempty spin space"));
        }
        let mut strides = Vec::with_capacity(radices.len());
        let mut size: usize = 1;
        for &q in &radices {
            strides.push(size);
            size = size.checked_mul(q).filter(|&s| s <= cap).ok_or(Error::SizeLimit {
                what: "product space",
                needed: radices.iter().try_fold(1usize, |a, &b| a.checked_mul(b)).unwrap_or(usize::MAX),
                cap,
            })?;
        }
        Ok(ProductSpace { radices, strides, size })
    }

    pub fn uniform(n_sites: usize, q: usize, cap: usize) -> Result<Self> {
        Self::new(vec![q; n_sites], cap)
    }

    pub fn n_sites(&self) -> usize {
        self.radices.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radix(&self, site: usize) -> usize {
        self.radices[site]
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        debug_assert_eq!(x.len(), self.radices.len());
        x.iter().zip(&self.strides).map(|(&v, &s)| v * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut x = Vec::with_capacity(self.radices.len());
        for &q in &self.radices {
            x.push(index % q);
            index /= q;
        }
        x
    }

    pub fn decode_into(&self, mut index: usize, x: &mut [usize]) {
        for (slot, &q) in x.iter_mut().zip(&self.radices) {
            *slot = index % q;
            index /= q;
        }
    }

    #[inline]
    pub fn value_at(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.radices[site]
    }

    /// Index of the configuration equal to `index` except that `site` holds `value`.
    #[inline]
    pub fn with_value(&self, index: usize, site: usize, value: usize) -> usize {
        let cur = self.value_at(index, site);
        index - cur * self.strides[site] + value * self.strides[site]
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(move |k| self.decode(k))
    }

    /// Hamming-type additive distance `Σ_i d(x_i, y_i)`.
    pub fn l1_distance(&self, a: usize, b: usize, site_distance: impl Fn(usize, usize) -> f64) -> f64 {
        (0..self.n_sites())
            .map(|i| {
                let (u, v) = (self.value_at(a, i), self.value_at(b, i));
                if u == v {
                    0.0
                } else {
                    site_distance(u, v)
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_order() {
        let s = ProductSpace::new(vec![2, 3], 100).unwrap();
        assert_eq!(s.size(), 6);
        assert_eq!(s.encode(&[1, 0]), 1);
        assert_eq!(s.encode(&[0, 1]), 2);
        assert_eq!(s.decode(5), vec![1, 2]);
        for k in 0..6 {
            assert_eq!(s.encode(&s.decode(k)), k);
        }
        assert_eq!(s.with_value(5, 1, 0), 1);
        assert_eq!(s.value_at(5, 1), 2);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(ProductSpace::uniform(13, 2, 4096), Err(Error::SizeLimit { needed: 8192, .. })));
        assert!(ProductSpace::uniform(12, 2, 4096).is_ok());
    }
}
