//! N-gram vocabularies, sparse count vectors and the type-token ratio.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::TokenSeq;

/// Inclusive n-gram order range, `1 <= min <= max <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct NgramRange {
    min: usize,
    max: usize,
}

impl NgramRange {
    pub const UNIGRAMS: NgramRange = NgramRange { min: 1, max: 1 };
    pub const UNI_AND_BIGRAMS: NgramRange = NgramRange { min: 1, max: 2 };

    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 1 || min > max || max > 2 {
            return Err(Error::config(format!("invalid n-gram range ({min}, {max})")));
        }
        Ok(NgramRange { min, max })
    }

    /// `(1, n)`
    pub fn up_to(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn min(&self) -> usize {
        self.min
    }

    pub fn max(&self) -> usize {
        self.max
    }

    /// Contiguous n-grams of `tokens`, unigrams first.
    pub fn ngrams<'a>(&self, tokens: &'a [String]) -> impl Iterator<Item = std::borrow::Cow<'a, str>> + 'a {
        let (min, max) = (self.min, self.max);
        (min..=max).flat_map(move |n| {
            tokens.windows(n).map(move |w| {
                if n == 1 {
                    std::borrow::Cow::Borrowed(w[0].as_str())
                } else {
                    std::borrow::Cow::Owned(w.join(" "))
                }
            })
        })
    }
}

impl Default for NgramRange {
    fn default() -> Self {
        NgramRange::UNIGRAMS
    }
}

impl TryFrom<(usize, usize)> for NgramRange {
    type Error = Error;

    fn try_from((min, max): (usize, usize)) -> Result<Self> {
        NgramRange::new(min, max)
    }
}

impl From<NgramRange> for (usize, usize) {
    fn from(r: NgramRange) -> Self {
        (r.min, r.max)
    }
}

/// Term to column mapping; columns follow lexicographic term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    ngram_range: NgramRange,
}

impl Vocabulary {
    pub fn from_terms(terms: impl IntoIterator<Item = String>, ngram_range: NgramRange) -> Self {
        let terms: Vec<String> = terms.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index, ngram_range }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, col: usize) -> Option<&str> {
        self.terms.get(col).map(String::as_str)
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }
}

/// All distinct n-grams across `docs`.
pub fn build_vocabulary(docs: &[TokenSeq], ngram_range: NgramRange) -> Vocabulary {
    let mut terms = HashSet::new();
    for doc in docs {
        for g in ngram_range.ngrams(doc) {
            if !terms.contains(g.as_ref()) {
                terms.insert(g.into_owned());
            }
        }
    }
    Vocabulary::from_terms(terms, ngram_range)
}

/// Sparse vector with strictly increasing indices and nonzero values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        SparseVector { dim, indices: Vec::new(), values: Vec::new() }
    }

    /// Builds from unordered `(index, value)` pairs; duplicate indices are
    /// summed and zeros dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i + 1 });
            }
            *acc.entry(i).or_default() += v;
        }
        let (indices, values) = acc.into_iter().filter(|&(_, v)| v != 0.0).unzip();
        Ok(SparseVector { dim, indices, values })
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Occurrence counts of in-vocabulary n-grams.
pub fn vectorize(tokens: &[String], vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for g in vocab.ngram_range.ngrams(tokens) {
        if let Some(i) = vocab.index_of(&g) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    let (indices, values) = counts.into_iter().unzip();
    SparseVector { dim: vocab.len(), indices, values }
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn from_rows(rows: &[SparseVector], cols: usize) -> Result<Self> {
        let mut m = SparseMatrix { cols, indptr: vec![0], indices: Vec::new(), values: Vec::new() };
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    /// Dense rows; zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = SparseMatrix { cols, indptr: vec![0], indices: Vec::new(), values: Vec::new() };
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            let v = SparseVector::from_pairs(cols, r.iter().copied().enumerate())?;
            m.push_row(&v)?;
        }
        Ok(m)
    }

    fn push_row(&mut self, row: &SparseVector) -> Result<()> {
        if row.dim != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: row.dim });
        }
        for (i, v) in row.iter() {
            if v != 0.0 {
                self.indices.push(i);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// `(column indices, values)` of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_vector(&self, i: usize) -> SparseVector {
        let (idx, val) = self.row(i);
        SparseVector { dim: self.cols, indices: idx.to_vec(), values: val.to_vec() }
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut m = SparseMatrix { cols: self.cols, indptr: vec![0], indices: Vec::new(), values: Vec::new() };
        for &r in rows {
            let (idx, val) = self.row(r);
            m.indices.extend_from_slice(idx);
            m.values.extend_from_slice(val);
            m.indptr.push(m.indices.len());
        }
        m
    }

    /// `w · x_i` for a dense `w` of at least `cols` entries.
    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| w[j] * v).sum()
    }

    pub fn row_sq_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum()
    }

    /// First non-finite entry, as `(row, col)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        (0..self.rows()).find_map(|r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).find(|(_, v)| !v.is_finite()).map(|(&c, _)| (r, c))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|r| {
                let mut d = vec![0.0; self.cols];
                for (&c, &v) in self.row(r).0.iter().zip(self.row(r).1) {
                    d[c] = v;
                }
                d
            })
            .collect()
    }

    /// Writes the triplet text format: a `rows cols nnz` header, then one
    /// `row col value` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.rows(), self.cols, self.nnz())?;
        for r in 0..self.rows() {
            for (&c, &v) in self.row(r).0.iter().zip(self.row(r).1) {
                writeln!(out, "{r} {c} {v:?}")?;
            }
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let bad = |ordinal: usize, reason: &str| Error::MalformedRecord { ordinal, reason: reason.into() };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let header = header?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(usize::from_str)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(1, "header must be `rows cols nnz`"))?;
        let [rows, cols, nnz] = h[..] else { return Err(bad(1, "header must be `rows cols nnz`")) };
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        let mut seen = 0;
        for (i, line) in lines {
            let line = line?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [r, c, v] = parts[..] else { return Err(bad(i + 1, "expected `row col value`")) };
            let r: usize = r.parse().map_err(|_| bad(i + 1, "bad row"))?;
            let c: usize = c.parse().map_err(|_| bad(i + 1, "bad column"))?;
            let v: f64 = v.parse().map_err(|_| bad(i + 1, "bad value"))?;
            if r >= rows || c >= cols {
                return Err(bad(i + 1, "entry outside declared shape"));
            }
            per_row[r].push((c, v));
            seen += 1;
        }
        if seen != nnz {
            return Err(bad(1, &format!("header declares {nnz} entries, found {seen}")));
        }
        let vecs = per_row.into_iter().map(|p| SparseVector::from_pairs(cols, p)).collect::<Result<Vec<_>>>()?;
        SparseMatrix::from_rows(&vecs, cols)
    }
}

/// Distinct tokens over total tokens; 0 for an empty sequence.
pub fn type_token_ratio(tokens: &[String]) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<&str> = tokens.iter().map(String::as_str).collect();
    distinct.len() as f64 / tokens.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    BowOnly,
    TtrOnly,
    BowPlusTtr,
}

impl FeatureMode {
    pub fn uses_bow(self) -> bool {
        !matches!(self, FeatureMode::TtrOnly)
    }

    pub fn uses_ttr(self) -> bool {
        !matches!(self, FeatureMode::BowOnly)
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bow" | "bow_only" => Ok(FeatureMode::BowOnly),
            "ttr" | "ttr_only" => Ok(FeatureMode::TtrOnly),
            "bow+ttr" | "bow_plus_ttr" => Ok(FeatureMode::BowPlusTtr),
            other => Err(Error::config(format!("unknown feature mode {other:?}"))),
        }
    }
}

/// Combines count features with an optional type-token ratio column.
pub fn assemble_features(x: SparseMatrix, ttr: Option<&[f64]>, mode: FeatureMode) -> Result<SparseMatrix> {
    if mode == FeatureMode::BowOnly {
        return Ok(x);
    }
    let ttr = ttr.ok_or_else(|| Error::config("feature mode needs type-token ratios"))?;
    if ttr.len() != x.rows() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: ttr.len() });
    }
    let cols = if mode == FeatureMode::TtrOnly { 1 } else { x.cols() + 1 };
    let rows: Vec<SparseVector> = (0..x.rows())
        .map(|r| {
            let mut v = if mode == FeatureMode::TtrOnly { SparseVector::empty(1) } else { x.row_vector(r) };
            v.dim = cols;
            if ttr[r] != 0.0 {
                v.indices.push(cols - 1);
                v.values.push(ttr[r]);
            }
            v
        })
        .collect();
    SparseMatrix::from_rows(&rows, cols)
}
