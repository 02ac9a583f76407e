//! Agglomerative clustering with Ward linkage.
//!
//! Node ids follow the usual linkage convention: leaves are `0..n`, the
//! cluster created by merge `i` is `n + i`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_labels: Vec<String>,
    pub merges: Vec<Merge>,
}

/// Clusters the rows of `points` with Ward linkage.
///
/// Distances are tracked squared and updated with the Lance-Williams Ward
/// recurrence; reported heights are the unsquared distances. Equal distances
/// merge the pair with the smallest `(left, right)` node ids first.
pub fn ward_cluster(points: &[Vec<f64>], leaf_labels: Vec<String>) -> Result<Dendrogram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::domain("ward clustering needs at least 2 points"));
    }
    if leaf_labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: leaf_labels.len() });
    }
    let dim = points[0].len();
    for (row, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
        if let Some(col) = p.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }

    let mut dsq = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            dsq[i][j] = d;
            dsq[j][i] = d;
        }
    }
    // slot -> (node id, size) for active clusters
    let mut active: Vec<Option<(usize, usize)>> = (0..n).map(|i| Some((i, 1))).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            let Some((id_i, _)) = active[i] else { continue };
            for j in (i + 1)..n {
                let Some((id_j, _)) = active[j] else { continue };
                let key = (dsq[i][j], id_i.min(id_j), id_i.max(id_j));
                let better = match best {
                    None => true,
                    Some((d, lo, hi, _, _)) => key.0 < d || (key.0 == d && (key.1, key.2) < (lo, hi)),
                };
                if better {
                    best = Some((key.0, key.1, key.2, i, j));
                }
            }
        }
        let (d_st, left, right, s, t) = best.expect("at least two active clusters");
        let size_s = active[s].expect("active").1;
        let size_t = active[t].expect("active").1;
        for v in 0..n {
            if v == s || v == t {
                continue;
            }
            let Some((_, size_v)) = active[v] else { continue };
            let (nv, ns, nt) = (size_v as f64, size_s as f64, size_t as f64);
            let updated = ((nv + ns) * dsq[v][s] + (nv + nt) * dsq[v][t] - nv * d_st) / (nv + ns + nt);
            dsq[s][v] = updated;
            dsq[v][s] = updated;
        }
        let size = size_s + size_t;
        active[s] = Some((n + step, size));
        active[t] = None;
        merges.push(Merge { left, right, height: d_st.max(0.0).sqrt(), size });
    }

    Ok(Dendrogram { leaf_labels, merges })
}

/// Undoes the last `k - 1` merges and returns the leaf indices of each of the
/// `k` clusters, clusters ordered by their smallest leaf.
pub fn cut_leaf_indices(d: &Dendrogram, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = d.leaf_labels.len();
    if k == 0 || k > n {
        return Err(Error::config(format!("cannot cut {n} leaves into {k} clusters")));
    }
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for m in &d.merges[..n - k] {
        let mut joined = members[m.left].take().expect("left child unmerged");
        joined.extend(members[m.right].take().expect("right child unmerged"));
        members.push(Some(joined));
    }
    let mut clusters: Vec<Vec<usize>> = members
        .into_iter()
        .flatten()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    clusters.sort_by_key(|c| c[0]);
    Ok(clusters)
}

/// Like [`cut_leaf_indices`] with leaf labels in place of indices.
pub fn cut_dendrogram(d: &Dendrogram, k: usize) -> Result<Vec<Vec<String>>> {
    Ok(cut_leaf_indices(d, k)?.into_iter().map(|c| c.into_iter().map(|i| d.leaf_labels[i].clone()).collect()).collect())
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaf_labels.len()
    }

    /// `{"leaves": [...], "merges": [[left, right, height, size], ...]}`
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "leaves": self.leaf_labels,
            "merges": self
                .merges
                .iter()
                .map(|m| json!([m.left, m.right, m.height, m.size]))
                .collect::<Vec<_>>(),
        })
    }

    /// Newick tree whose root-to-leaf path lengths equal the merge heights.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        let height_of = |id: usize| if id < n { 0.0 } else { self.merges[id - n].height };
        let mut out = String::new();
        if let Some(root) = self.merges.len().checked_sub(1) {
            self.write_newick(n + root, &height_of, &mut out);
        }
        out.push(';');
        out
    }

    fn write_newick(&self, id: usize, height_of: &dyn Fn(usize) -> f64, out: &mut String) {
        let n = self.n_leaves();
        if id < n {
            out.push_str(&newick_label(&self.leaf_labels[id]));
            return;
        }
        let m = &self.merges[id - n];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_newick(child, height_of, out);
            out.push_str(&format!(":{}", m.height - height_of(child)));
        }
        out.push(')');
    }
}

fn newick_label(label: &str) -> String {
    if label.chars().any(|c| " ()[]':;,".contains(c)) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}
