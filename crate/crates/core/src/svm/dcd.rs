//! Dual coordinate descent for L2-regularized linear SVMs.
//!
//! For squared hinge the dual is
//! `min_a 0.5 a'Qa + (D/2)|a|^2 - sum(a)`, `a >= 0`, with
//! `Q_ij = y_i y_j x_i.x_j` and `D = 1/(2C)`; for hinge `D = 0` and `a <= C`.
//! The primal weights are kept in sync as `w = sum a_i y_i x_i`.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Loss, SvmConfig};
use crate::error::{Error, Result};
use crate::features::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    /// Feature weights, followed by the bias weight when enabled.
    pub weights: Vec<f64>,
    /// Dual variables in input row order.
    pub alpha: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub max_violation: f64,
}

fn diag_and_bound(config: &SvmConfig) -> (f64, f64) {
    match config.loss {
        Loss::SquaredHinge => (0.5 / config.c, f64::INFINITY),
        Loss::Hinge => (0.0, config.c),
    }
}

fn cmp_rows(x: &SparseMatrix, y: &[f64], a: usize, b: usize) -> Ordering {
    let (ia, va) = x.row(a);
    let (ib, vb) = x.row(b);
    let pa = ia.iter().zip(va);
    let pb = ib.iter().zip(vb);
    for ((ja, xa), (jb, xb)) in pa.zip(pb) {
        let o = ja.cmp(jb).then(xa.total_cmp(xb));
        if o != Ordering::Equal {
            return o;
        }
    }
    ia.len().cmp(&ib.len()).then(y[a].total_cmp(&y[b]))
}

/// Solves one binary problem with labels in `{-1, +1}`.
///
/// Coordinates are visited in a fresh seeded permutation each epoch, applied
/// to the rows in canonical sorted order, so the result depends on the
/// multiset of `(x, y)` pairs rather than on input order.
pub fn train_binary(x: &SparseMatrix, y: &[f64], config: &SvmConfig) -> Result<BinarySolution> {
    config.validate()?;
    let n = x.rows();
    if n == 0 {
        return Err(Error::domain("cannot train on an empty matrix"));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if let Some((row, col)) = x.find_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::domain(format!("binary labels must be +1 or -1, got {bad}")));
    }

    let dim = x.cols();
    let bias = if config.use_bias { 1.0 } else { 0.0 };
    let (diag, upper) = diag_and_bound(config);
    let qd: Vec<f64> = (0..n).map(|i| x.row_sq_norm(i) + bias * bias + diag).collect();

    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&a, &b| cmp_rows(x, y, a, b));

    let mut w = vec![0.0; dim + usize::from(config.use_bias)];
    let mut alpha = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order = canonical.clone();
    let mut epochs = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;

    while epochs < config.max_epochs {
        epochs += 1;
        order.copy_from_slice(&canonical);
        order.shuffle(&mut rng);
        max_violation = 0.0f64;
        for &i in &order {
            if qd[i] <= 0.0 {
                continue;
            }
            let yi = y[i];
            let margin = x.row_dot(i, &w) + if config.use_bias { w[dim] } else { 0.0 };
            let g = yi * margin - 1.0 + diag * alpha[i];
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= upper {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-14 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, upper);
                let step = (alpha[i] - old) * yi;
                let (idx, val) = x.row(i);
                for (&j, &v) in idx.iter().zip(val) {
                    w[j] += step * v;
                }
                if config.use_bias {
                    w[dim] += step * bias;
                }
            }
        }
        if max_violation < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(BinarySolution { weights: w, alpha, epochs, converged, max_violation })
}

/// Dual objective in its maximization form; equals the primal optimum at
/// convergence.
pub fn dual_objective(weights: &[f64], alpha: &[f64], config: &SvmConfig) -> f64 {
    let (diag, _) = diag_and_bound(config);
    let w2: f64 = weights.iter().map(|v| v * v).sum();
    let a2: f64 = alpha.iter().map(|a| a * a).sum();
    alpha.iter().sum::<f64>() - 0.5 * w2 - 0.5 * diag * a2
}

pub fn primal_objective(x: &SparseMatrix, y: &[f64], weights: &[f64], config: &SvmConfig) -> f64 {
    let dim = x.cols();
    let w2: f64 = weights.iter().map(|v| v * v).sum();
    let loss: f64 = (0..x.rows())
        .map(|i| {
            let margin = x.row_dot(i, weights) + if config.use_bias { weights[dim] } else { 0.0 };
            let slack = (1.0 - y[i] * margin).max(0.0);
            match config.loss {
                Loss::SquaredHinge => slack * slack,
                Loss::Hinge => slack,
            }
        })
        .sum();
    0.5 * w2 + config.c * loss
}
