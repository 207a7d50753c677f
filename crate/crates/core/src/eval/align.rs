//! Supervised orthogonal mapping between two embedding spaces.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::embedding::{EmbeddingSpace, Vector};
use crate::error::{Error, Result};
use crate::linalg;

/// An orthogonal map from a test space into a gold space.
#[derive(Clone, Debug)]
pub struct AlignmentMap {
    w: Array2<f64>,
    dictionary: Vec<(String, String)>,
    pub singular_values: Vec<f64>,
    pub converged: bool,
}

impl AlignmentMap {
    pub fn identity(dim: usize) -> Self {
        AlignmentMap {
            w: Array2::eye(dim),
            dictionary: Vec::new(),
            singular_values: vec![1.0; dim],
            converged: true,
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn dictionary(&self) -> &[(String, String)] {
        &self.dictionary
    }

    pub fn apply(&self, v: ArrayView1<'_, f64>) -> Vector {
        self.w.dot(&v)
    }

    pub fn orthogonality_defect(&self) -> f64 {
        linalg::orthogonality_defect(&self.w)
    }

    /// Ratio of the largest to the smallest singular value of the
    /// cross-covariance; infinite when it is rank deficient.
    pub fn condition(&self) -> f64 {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        let min = self.singular_values.last().copied().unwrap_or(0.0);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Fit `W = argmin_{WᵀW = I} Σ ‖W x_i − y_i‖²` over dictionary pairs
/// `(test word, gold word)` by SVD of the cross-covariance `Σ y_i x_iᵀ`.
///
/// Pairs are sorted first, so the result does not depend on dictionary order.
pub fn fit_alignment(
    test: &EmbeddingSpace,
    gold: &EmbeddingSpace,
    dictionary: &[(String, String)],
) -> Result<AlignmentMap> {
    if test.dim() != gold.dim() {
        return Err(Error::Dimension {
            expected: gold.dim(),
            actual: test.dim(),
        });
    }
    if dictionary.is_empty() {
        return Err(Error::Invalid("empty alignment dictionary".into()));
    }
    let mut pairs = dictionary.to_vec();
    pairs.sort();
    pairs.dedup();
    let d = test.dim();
    let mut cross = Array2::<f64>::zeros((d, d));
    for (x_word, y_word) in &pairs {
        let x = test
            .get(x_word)
            .ok_or_else(|| Error::MissingEmbedding(x_word.clone()))?;
        let y = gold
            .get(y_word)
            .ok_or_else(|| Error::MissingEmbedding(y_word.clone()))?;
        for i in 0..d {
            let yi = y[i];
            let mut row = cross.row_mut(i);
            row.scaled_add(yi, &x);
        }
    }
    let svd = linalg::svd(&cross);
    let map = AlignmentMap {
        w: svd.u.dot(&svd.v.t()),
        dictionary: pairs,
        singular_values: svd.sigma,
        converged: svd.converged,
    };
    if !map.converged || map.condition() > 1e12 {
        log::warn!(
            "alignment cross-covariance is ill conditioned (condition {:.3e}, converged {})",
            map.condition(),
            map.converged
        );
    }
    Ok(map)
}

/// Every word present in both spaces, except `exclude`, paired with itself.
pub fn shared_dictionary<'a>(
    test: &EmbeddingSpace,
    gold: &EmbeddingSpace,
    exclude: impl IntoIterator<Item = &'a str>,
) -> Vec<(String, String)> {
    let exclude: BTreeSet<&str> = exclude.into_iter().collect();
    let mut out: Vec<(String, String)> = test
        .words()
        .iter()
        .filter(|w| gold.contains(w) && !exclude.contains(w.as_str()))
        .map(|w| (w.clone(), w.clone()))
        .collect();
    out.sort();
    out
}

/// Read `word<TAB>word` lines.
pub fn read_dictionary<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected word<TAB>word"))?;
        out.push((a.to_string(), b.to_string()));
    }
    Ok(out)
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_dictionary(BufReader::new(file))
}
