use std::f64::consts::FRAC_PI_2;

use super::{DataError, Matrix};

/// Per-column min-max scaling onto `[0, pi/2]`, fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(matrix: &Matrix) -> Result<Self, DataError> {
        if matrix.rows() == 0 {
            return Err(DataError::Empty);
        }
        let mut min = vec![f64::INFINITY; matrix.cols()];
        let mut max = vec![f64::NEG_INFINITY; matrix.cols()];
        for row in matrix.iter_rows() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::Invalid(format!("non-finite value in column {j}")));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Constant training columns map to 0; values outside the training range
    /// are clamped into `[0, pi/2]`.
    pub fn transform(&self, matrix: &Matrix) -> Result<Matrix, DataError> {
        if matrix.cols() != self.min.len() {
            return Err(DataError::Invalid(format!(
                "expected {} columns, got {}",
                self.min.len(),
                matrix.cols()
            )));
        }
        let mut out = matrix.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span > 0.0 {
                    ((*v - self.min[j]) / span * FRAC_PI_2).clamp(0.0, FRAC_PI_2)
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn examples() {
        let m = Matrix::from_rows(&[vec![0.0, 3.0], vec![5.0, 3.0], vec![10.0, 3.0]]).unwrap();
        let s = MinMaxScaler::fit(&m).unwrap();
        let t = s.transform(&m).unwrap();
        assert_eq!(t.get(0, 0), 0.0);
        assert!((t.get(1, 0) - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(t.get(2, 0), FRAC_PI_2);
        assert!((0..3).all(|i| t.get(i, 1) == 0.0));

        let test = Matrix::from_rows(&[vec![12.0, 9.0], vec![-1.0, 3.0]]).unwrap();
        let t = s.transform(&test).unwrap();
        assert_eq!(t.get(0, 0), FRAC_PI_2);
        assert_eq!(t.get(1, 0), 0.0);
        assert!(s.transform(&Matrix::zeros(1, 3)).is_err());
    }

    proptest! {
        #[test]
        fn range_is_respected(values in prop::collection::vec(-1e6f64..1e6, 3..60), probe in -2e6f64..2e6) {
            let m = Matrix::new(values.len() / 3, 3, values[..values.len() / 3 * 3].to_vec()).unwrap();
            let s = MinMaxScaler::fit(&m).unwrap();
            for v in s.transform(&m).unwrap().as_slice() {
                prop_assert!((0.0..=FRAC_PI_2).contains(v));
            }
            let t = s.transform(&Matrix::new(1, 3, vec![probe; 3]).unwrap()).unwrap();
            for v in t.as_slice() {
                prop_assert!((0.0..=FRAC_PI_2).contains(v));
            }
        }
    }
}
