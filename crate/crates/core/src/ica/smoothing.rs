use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingMethod {
    MovingAverage,
    SavitzkyGolay,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub method: SmoothingMethod,
    /// Odd number of samples in the filter window.
    pub window_points: usize,
    /// Savitzky-Golay polynomial order; ignored by the other methods.
    pub polynomial_order: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self::savitzky_golay(25, 3)
    }
}

impl SmoothingConfig {
    pub fn savitzky_golay(window_points: usize, polynomial_order: usize) -> Self {
        Self {
            method: SmoothingMethod::SavitzkyGolay,
            window_points,
            polynomial_order,
        }
    }

    pub fn moving_average(window_points: usize) -> Self {
        Self {
            method: SmoothingMethod::MovingAverage,
            window_points,
            polynomial_order: 0,
        }
    }

    pub fn none() -> Self {
        Self {
            method: SmoothingMethod::None,
            window_points: 1,
            polynomial_order: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == SmoothingMethod::None {
            return Ok(());
        }
        if self.window_points < 3 || self.window_points % 2 == 0 {
            return Err(Error::Domain(format!(
                "smoothing window must be an odd count >= 3, got {}",
                self.window_points
            )));
        }
        if self.method == SmoothingMethod::SavitzkyGolay
            && self.polynomial_order >= self.window_points
        {
            return Err(Error::Domain(format!(
                "polynomial order {} must be below the window size {}",
                self.polynomial_order, self.window_points
            )));
        }
        Ok(())
    }

    /// Smooths `y` sample-by-sample, treating the samples as equally spaced.
    /// Series shorter than the window are returned unchanged.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if self.method == SmoothingMethod::None || y.len() < self.window_points {
            return Ok(y.to_vec());
        }
        Ok(match self.method {
            SmoothingMethod::MovingAverage => moving_average(y, self.window_points),
            SmoothingMethod::SavitzkyGolay => {
                savitzky_golay(y, self.window_points, self.polynomial_order)
            }
            SmoothingMethod::None => unreachable!(),
        })
    }
}

/// Centered moving average; the window shrinks symmetrically at the ends.
fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = y.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &y[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Least-squares polynomial weights that evaluate the fit over offsets
/// `-half..=half` at offset `at` (in units of the sample spacing).
fn sg_weights(half: usize, order: usize, at: f64) -> Vec<f64> {
    let m = order + 1;
    let h = half.max(1) as f64;
    // Offsets are scaled to [-1, 1] to keep the normal equations well conditioned.
    let xs: Vec<f64> = (0..=2 * half)
        .map(|k| (k as f64 - half as f64) / h)
        .collect();
    let mut ata = vec![vec![0.0; m]; m];
    for &x in &xs {
        let pw: Vec<f64> = (0..m).map(|j| x.powi(j as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                ata[r][c] += pw[r] * pw[c];
            }
        }
    }
    // weights = e(at)^T (A^T A)^-1 A^T; solve (A^T A) z = e(at) once.
    let x0 = at / h;
    let rhs: Vec<f64> = (0..m).map(|j| x0.powi(j as i32)).collect();
    let z = solve(ata, rhs);
    xs.iter()
        .map(|&x| (0..m).map(|j| z[j] * x.powi(j as i32)).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting for the small symmetric systems above.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Savitzky-Golay filter. The first and last `half` samples are taken from
/// the polynomial fitted to the first and last full window.
fn savitzky_golay(y: &[f64], window: usize, order: usize) -> Vec<f64> {
    let half = window / 2;
    let n = y.len();
    let centre = sg_weights(half, order, 0.0);
    let dot = |w: &[f64], start: usize| -> f64 {
        w.iter()
            .zip(&y[start..start + window])
            .map(|(a, b)| a * b)
            .sum()
    };
    let mut out = vec![0.0; n];
    for i in half..n - half {
        out[i] = dot(&centre, i - half);
    }
    for i in 0..half {
        let w = sg_weights(half, order, i as f64 - half as f64);
        out[i] = dot(&w, 0);
        let w = sg_weights(half, order, half as f64 - i as f64);
        out[n - 1 - i] = dot(&w, n - window);
    }
    out
}
