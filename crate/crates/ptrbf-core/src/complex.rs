//! Complex vectors and matrices, and the complex-valued samplers used by
//! every initializer.
//!
//! The complex variance convention throughout the crate is the total
//! variance `Var[z] = Var[Re z] + Var[Im z]`. A sampler with variance s
//! therefore draws real and imaginary parts independently with variance
//! s/2 each.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;

pub type Cx = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dims must be positive");
        CMat {
            rows,
            cols,
            data: vec![Cx::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows_data: Vec<Vec<Cx>>) -> Result<Self> {
        let rows = rows_data.len();
        if rows == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let cols = rows_data[0].len();
        if cols == 0 || rows_data.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged or empty matrix rows".into()));
        }
        Ok(CMat {
            rows,
            cols,
            data: rows_data.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Cx] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Cx] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cx> {
        self.data.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Cx> {
        self.data.iter_mut()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// y = A x. Errors when x length differs from the column count.
    pub fn matvec(&self, x: &[Cx]) -> Result<Vec<Cx>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec: {} columns vs input length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Cx::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Cx;
    fn index(&self, (r, c): (usize, usize)) -> &Cx {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cx {
        &mut self.data[r * self.cols + c]
    }
}

/// Squared Euclidean distance between two equal-length real slices.
pub fn squared_l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "squared_l2_distance: lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Complex distribution with independent real/imaginary parts of equal
/// variance. `variance` is the total complex variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexUniformSpec {
    pub mean: Cx,
    pub variance: f64,
}

impl ComplexUniformSpec {
    pub fn new(mean: Cx, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::Parameter(format!(
                "complex uniform variance must be nonnegative, got {variance}"
            )));
        }
        Ok(ComplexUniformSpec { mean, variance })
    }

    pub fn zero_mean(variance: f64) -> Result<Self> {
        Self::new(Cx::new(0.0, 0.0), variance)
    }

    /// Half-width of the per-component uniform: a^2/3 = variance/2.
    pub fn half_width(&self) -> f64 {
        (1.5 * self.variance).sqrt()
    }

    pub fn sample(&self, rng: &mut Prng) -> Cx {
        if self.variance == 0.0 {
            return self.mean;
        }
        let a = self.half_width();
        let u = Uniform::new_inclusive(-a, a);
        Cx::new(self.mean.re + u.sample(rng), self.mean.im + u.sample(rng))
    }
}

/// Matrix of i.i.d. complex uniform samples.
pub fn sample_complex_uniform(
    rng: &mut Prng,
    spec: ComplexUniformSpec,
    rows: usize,
    cols: usize,
) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for z in m.iter_mut() {
        *z = spec.sample(rng);
    }
    m
}

pub fn sample_complex_uniform_vec(rng: &mut Prng, spec: ComplexUniformSpec, len: usize) -> Vec<Cx> {
    (0..len).map(|_| spec.sample(rng)).collect()
}

/// Circular complex Gaussian sampler (total variance `variance`).
/// Provided as the non-default alternative to the uniform law.
pub fn sample_complex_gaussian(rng: &mut Prng, mean: Cx, variance: f64, len: usize) -> Result<Vec<Cx>> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::Parameter(format!(
            "complex gaussian variance must be nonnegative, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(vec![mean; len]);
    }
    let n = Normal::new(0.0, (variance / 2.0).sqrt())
        .map_err(|e| Error::Parameter(format!("normal distribution: {e}")))?;
    Ok((0..len)
        .map(|_| Cx::new(mean.re + n.sample(rng), mean.im + n.sample(rng)))
        .collect())
}

/// Fisher-Yates shuffle driven by the crate PRNG.
pub fn shuffle_indices(rng: &mut Prng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Pooled mean and total complex variance (population convention, divide
/// by the sample count) of a stream of complex values.
pub fn mean_and_total_variance<'a>(values: impl Iterator<Item = &'a Cx> + Clone) -> (Cx, f64) {
    let mut n = 0usize;
    let mut sum = Cx::new(0.0, 0.0);
    for z in values.clone() {
        sum += z;
        n += 1;
    }
    assert!(n > 0, "variance of empty stream");
    let mean = sum / n as f64;
    let var = values
        .map(|z| {
            let d = z - mean;
            d.re * d.re + d.im * d.im
        })
        .sum::<f64>()
        / n as f64;
    (mean, var)
}
