//! Reference solvers used only by tests. They share no code with the
//! library's implementations.
#![allow(dead_code)]

/// Dense projected-gradient solver for the linear SVM dual
/// `min 0.5 a'Qa - sum(a)`, `0 <= a <= upper`, where
/// `Q_ij = y_i y_j (x_i.x_j + bias^2) + diag * [i == j]`.
pub struct DualOracle {
    pub alpha: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

pub fn solve_dual(rows: &[Vec<f64>], y: &[f64], c: f64, squared_hinge: bool, use_bias: bool, tol: f64) -> DualOracle {
    let n = rows.len();
    let (diag, upper) = if squared_hinge { (0.5 / c, f64::INFINITY) } else { (0.0, c) };
    let b2 = if use_bias { 1.0 } else { 0.0 };
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum::<f64>() + b2;
            q[i][j] = y[i] * y[j] * dot + if i == j { diag } else { 0.0 };
        }
    }
    let lipschitz = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-12);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let grad: Vec<f64> = (0..n).map(|i| q[i].iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>() - 1.0).collect();
        let violation = (0..n)
            .map(|i| {
                if alpha[i] <= 0.0 {
                    grad[i].min(0.0).abs()
                } else if alpha[i] >= upper {
                    grad[i].max(0.0).abs()
                } else {
                    grad[i].abs()
                }
            })
            .fold(0.0, f64::max);
        if violation < tol || iterations >= 5_000_000 {
            break;
        }
        for i in 0..n {
            alpha[i] = (alpha[i] - step * grad[i]).clamp(0.0, upper);
        }
        iterations += 1;
    }
    let d = rows.first().map_or(0, Vec::len);
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    for i in 0..n {
        for j in 0..d {
            weights[j] += alpha[i] * y[i] * rows[i][j];
        }
        bias += alpha[i] * y[i] * b2;
    }
    DualOracle { alpha, weights, bias, iterations }
}

impl DualOracle {
    /// Dual objective in maximization form.
    pub fn dual_value(&self, c: f64, squared_hinge: bool) -> f64 {
        let diag = if squared_hinge { 0.5 / c } else { 0.0 };
        let w2: f64 = self.weights.iter().map(|v| v * v).sum::<f64>() + self.bias * self.bias;
        self.alpha.iter().sum::<f64>() - 0.5 * w2 - 0.5 * diag * self.alpha.iter().map(|a| a * a).sum::<f64>()
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }
}

/// Greedy agglomeration that merges, at each step, the pair of clusters whose
/// union increases the within-cluster sum of squares the least. Returns the
/// merge heights `sqrt(2 * delta_sse)`.
pub fn brute_force_ward_heights(points: &[Vec<f64>]) -> Vec<f64> {
    fn sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
        let d = points[0].len();
        let mut centroid = vec![0.0; d];
        for &m in members {
            for k in 0..d {
                centroid[k] += points[m][k];
            }
        }
        for v in &mut centroid {
            *v /= members.len() as f64;
        }
        members.iter().map(|&m| points[m].iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sum()
    }
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut union = clusters[a].clone();
                union.extend(&clusters[b]);
                let delta = sse(points, &union) - sse(points, &clusters[a]) - sse(points, &clusters[b]);
                if delta < best.0 {
                    best = (delta, a, b);
                }
            }
        }
        let (delta, a, b) = best;
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        heights.push((2.0 * delta.max(0.0)).sqrt());
    }
    heights
}

/// Law-area case counts of the reference court corpus.
pub const LAW_AREA_COUNTS: [(&str, u64); 8] = [
    ("CHAMBRE_SOCIALE", 33139),
    ("CHAMBRE_CIVILE_1", 20838),
    ("CHAMBRE_CIVILE_2", 19772),
    ("CHAMBRE_CRIMINELLE", 18476),
    ("CHAMBRE_COMMERCIALE", 18339),
    ("CHAMBRE_CIVILE_3", 15095),
    ("ASSEMBLEE_PLENIERE", 544),
    ("CHAMBRE_MIXTE", 222),
];

/// First-word ruling label counts of the reference corpus.
pub const FIRST_WORD_RULING_COUNTS: [(&str, u64); 6] = [
    ("rejet", 68516),
    ("cassation", 53813),
    ("irrecevabilite", 2737),
    ("qpc", 409),
    ("annulation", 377),
    ("non-lieu", 246),
];

/// Full (multi-word) ruling label counts of the reference corpus.
pub const FULL_RULING_COUNTS: [(&str, u64); 8] = [
    ("cassation", 37659),
    ("cassation sans renvoi", 2078),
    ("cassation partielle", 9543),
    ("cassation partielle sans renvoi", 1015),
    ("cassation partielle cassation", 1162),
    ("cassation partielle rejet cassation", 906),
    ("rejet", 67981),
    ("irrecevabilite", 2376),
];

/// Decade histogram of the reference corpus as (decade start, count). 1880
/// appears twice in the source listing and both rows are kept.
pub const DECADE_COUNTS: [(i32, usize); 21] = [
    (1880, 1),
    (1810, 2),
    (1820, 2),
    (1830, 1),
    (1840, 4),
    (1850, 9),
    (1860, 9),
    (1950, 84),
    (1970, 23964),
    (1990, 16693),
    (2010, 4541),
    (1870, 8),
    (1880, 10),
    (1890, 8),
    (1910, 2),
    (1920, 17),
    (1930, 29),
    (1940, 15),
    (1960, 4797),
    (1980, 18233),
    (2000, 12577),
];
