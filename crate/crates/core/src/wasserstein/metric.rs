use crate::error::{invalid, Result};

const METRIC_TOL: f64 = 1e-12;

/// Distance on a finite spin space `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Trivial,
    Table {
        d: Vec<f64>,
        embedding: Option<Vec<Vec<f64>>>,
        /// Set when the table is `|p_a - p_b|` for real points `p`.
        line: Option<Vec<f64>>,
    },
}

impl Metric {
    /// `d(a, b) = 1` whenever `a ≠ b`.
    pub fn trivial(n: usize) -> Self {
        Metric { n, kind: Kind::Trivial }
    }

    /// Arbitrary distance table; symmetry, zero diagonal and the triangle
    /// inequality are checked.
    pub fn table(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("metric table must be square"));
        }
        let d: Vec<f64> = rows.into_iter().flatten().collect();
        validate(n, &d)?;
        Ok(Metric { n, kind: Kind::Table { d, embedding: None, line: None } })
    }

    /// Euclidean distance between embedded points.
    pub fn euclidean(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(invalid("metric needs at least one point"));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
            return Err(invalid("embedding points must share one dimension and be finite"));
        }
        let mut d = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                d[a * n + b] = points[a].iter().zip(&points[b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if d[a * n + b] <= 0.0 {
                    return Err(invalid(format!("embedding points {a} and {b} coincide")));
                }
            }
        }
        let line = (dim == 1).then(|| points.iter().map(|p| p[0]).collect());
        Ok(Metric { n, kind: Kind::Table { d, embedding: Some(points), line } })
    }

    /// `d(a, b) = |p_a - p_b|` for real points.
    pub fn line(points: Vec<f64>) -> Result<Self> {
        Self::euclidean(points.into_iter().map(|p| vec![p]).collect())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.kind, Kind::Trivial)
    }

    pub fn line_points(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Table { line: Some(p), .. } => Some(p),
            _ => None,
        }
    }

    pub fn embedding(&self) -> Option<&[Vec<f64>]> {
        match &self.kind {
            Kind::Table { embedding: Some(e), .. } => Some(e),
            _ => None,
        }
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        match &self.kind {
            Kind::Trivial => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            Kind::Table { d, .. } => d[a * self.n + b],
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            Kind::Trivial => {
                if self.n > 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Table { d, .. } => d.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Short tag used in reports.
    pub fn tag(&self) -> &'static str {
        match &self.kind {
            Kind::Trivial => "trivial",
            Kind::Table { line: Some(_), .. } => "line",
            Kind::Table { embedding: Some(_), .. } => "euclidean",
            Kind::Table { .. } => "table",
        }
    }
}

fn validate(n: usize, d: &[f64]) -> Result<()> {
    for a in 0..n {
        if d[a * n + a].abs() > METRIC_TOL {
            return Err(invalid(format!("metric: d({a},{a}) = {} ≠ 0", d[a * n + a])));
        }
        for b in 0..n {
            let v = d[a * n + b];
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("metric: d({a},{b}) = {v} must be finite and ≥ 0")));
            }
            if (v - d[b * n + a]).abs() > METRIC_TOL {
                return Err(invalid(format!("metric: d({a},{b}) ≠ d({b},{a})")));
            }
            if a != b && v <= 0.0 {
                return Err(invalid(format!("metric: distinct points {a},{b} at distance 0")));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if d[a * n + b] > d[a * n + c] + d[c * n + b] + METRIC_TOL {
                    return Err(invalid(format!("metric: triangle inequality fails for ({a},{b}) via {c}")));
                }
            }
        }
    }
    Ok(())
}

/// How a model's spin space should be metrised.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricChoice {
    Trivial,
    /// Euclidean distance of the model's natural spin embedding.
    Euclidean,
    Table(Metric),
}

impl MetricChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trivial" => Some(MetricChoice::Trivial),
            "euclidean" | "embedded" => Some(MetricChoice::Euclidean),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_distances() {
        let m = Metric::trivial(3);
        assert_eq!(m.distance(1, 1), 0.0);
        assert_eq!(m.distance(0, 2), 1.0);
        assert_eq!(m.diameter(), 1.0);
    }

    #[test]
    fn rejects_triangle_violation() {
        let bad = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        assert!(Metric::table(bad).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(Metric::table(asym).is_err());
    }

    #[test]
    fn line_metric_from_points() {
        let m = Metric::line(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(m.distance(0, 2), 3.0);
        assert_eq!(m.tag(), "line");
        assert_eq!(m.diameter(), 3.0);
    }
}
