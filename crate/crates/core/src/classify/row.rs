use crate::preprocess::BinaryVector;

/// A feature vector the linear learners can consume.
pub trait FeatureRow: Sync {
    /// Smallest dimension that holds every nonzero entry.
    fn min_dim(&self) -> usize;

    fn for_each_nonzero(&self, f: impl FnMut(usize, f64));

    fn dot(&self, w: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each_nonzero(|j, x| s += w[j] * x);
        s
    }

    fn add_scaled_to(&self, scale: f64, w: &mut [f64]) {
        self.for_each_nonzero(|j, x| w[j] += scale * x);
    }
}

impl FeatureRow for BinaryVector {
    fn min_dim(&self) -> usize {
        BinaryVector::min_dim(self)
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        for &j in self.indices() {
            f(j, 1.0);
        }
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.indices().iter().map(|&j| w[j]).sum()
    }
}

impl FeatureRow for Vec<f64> {
    fn min_dim(&self) -> usize {
        self.len()
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        for (j, &x) in self.iter().enumerate() {
            if x != 0.0 {
                f(j, x);
            }
        }
    }
}

pub(crate) fn check_dims<R: FeatureRow>(rows: &[R], dim: usize) -> crate::Result<()> {
    match rows.iter().map(FeatureRow::min_dim).max() {
        Some(m) if m > dim => Err(crate::Error::DimensionMismatch {
            expected: dim,
            got: m - 1,
        }),
        _ => Ok(()),
    }
}
