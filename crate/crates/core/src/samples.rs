//! Sample containers: MCMC states, their score gradients and integrand columns.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Points `x⁽ⁱ⁾`, score gradients `∇log p(x⁽ⁱ⁾)` and named integrand columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Matrix,
    gradients: Matrix,
    integrands: Vec<(String, Vec<f64>)>,
}

impl SampleSet {
    pub fn new(points: Matrix, gradients: Matrix, integrands: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if points.rows() != gradients.rows() || points.cols() != gradients.cols() {
            return Err(Error::Dimension(alloc::format!(
                "points are {}x{} but gradients are {}x{}",
                points.rows(),
                points.cols(),
                gradients.rows(),
                gradients.cols()
            )));
        }
        if points.cols() == 0 {
            return Err(Error::Empty("sample dimension"));
        }
        for (name, col) in &integrands {
            if col.len() != points.rows() {
                return Err(Error::Dimension(alloc::format!(
                    "integrand {name:?} has {} values for {} points",
                    col.len(),
                    points.rows()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("integrand values"));
            }
        }
        if points.as_slice().iter().chain(gradients.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("points or gradients"));
        }
        let mut seen = BTreeSet::new();
        for (name, _) in &integrands {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(alloc::format!("duplicate integrand name {name:?}")));
            }
        }
        Ok(SampleSet { points, gradients, integrands })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn gradients(&self) -> &Matrix {
        &self.gradients
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn gradient(&self, i: usize) -> &[f64] {
        self.gradients.row(i)
    }

    pub fn integrands(&self) -> &[(String, Vec<f64>)] {
        &self.integrands
    }

    pub fn integrand(&self, name: &str) -> Option<&[f64]> {
        self.integrands.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Adds (or replaces) an integrand column.
    pub fn with_integrand(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(Error::Dimension(alloc::format!(
                "integrand {name:?} has {} values for {} points",
                values.len(),
                self.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("integrand values"));
        }
        match self.integrands.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = values,
            None => self.integrands.push((name, values)),
        }
        Ok(self)
    }

    /// Rows `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> SampleSet {
        SampleSet {
            points: self.points.select_rows(idx),
            gradients: self.gradients.select_rows(idx),
            integrands: self
                .integrands
                .iter()
                .map(|(n, v)| (n.clone(), idx.iter().map(|&i| v[i]).collect()))
                .collect(),
        }
    }

    /// Drops every row whose point is bitwise equal to an earlier one.
    pub fn dedupe(&self) -> SampleSet {
        let keep = distinct_rows(&self.points);
        if keep.len() == self.len() {
            return self.clone();
        }
        self.select(&keep)
    }
}

/// Indices of the first occurrence of each bitwise-distinct row.
pub fn distinct_rows(points: &Matrix) -> Vec<usize> {
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    (0..points.rows())
        .filter(|&i| seen.insert(points.row(i).iter().map(|v| v.to_bits()).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(rows: &[[f64; 2]]) -> SampleSet {
        let n = rows.len();
        let pts = Matrix::from_fn(n, 2, |i, j| rows[i][j]);
        let grads = Matrix::from_fn(n, 2, |i, j| -rows[i][j]);
        let f: Vec<f64> = (0..n).map(|i| i as f64).collect();
        SampleSet::new(pts, grads, vec![("f".into(), f)]).unwrap()
    }

    #[test]
    fn dedupe_keeps_first_occurrences() {
        let s = set(&[[0.0, 1.0], [0.5, 1.0], [0.0, 1.0], [0.5, 1.0], [2.0, 2.0]]);
        let d = s.dedupe();
        assert_eq!(d.len(), 3);
        assert_eq!(d.integrand("f").unwrap(), &[0.0, 1.0, 4.0]);
        assert_eq!(d.dedupe(), d);
    }

    #[test]
    fn dedupe_identity_and_collapse() {
        let s = set(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(s.dedupe(), s);
        let all = set(&[[3.0, 3.0]; 4]);
        assert_eq!(all.dedupe().len(), 1);
    }

    #[test]
    fn negative_zero_is_bitwise_distinct() {
        let s = set(&[[0.0, 0.0], [-0.0, 0.0]]);
        assert_eq!(s.dedupe().len(), 2);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let pts = Matrix::zeros(2, 2);
        let grads = Matrix::zeros(2, 1);
        assert!(SampleSet::new(pts.clone(), grads, vec![]).is_err());
        let bad = SampleSet::new(pts.clone(), pts.clone(), vec![("f".into(), vec![1.0])]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
        let nan = SampleSet::new(pts.clone(), pts, vec![("f".into(), vec![1.0, f64::NAN])]);
        assert!(matches!(nan, Err(Error::NonFinite(_))));
    }
}
