//! Rank correlation and exact binomial sign tests.

use crate::error::{Error, Result};

/// 1-based ranks; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|x| x.is_nan()) {
        return Err(Error::Undefined("ranking NaN".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(ranks)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Undefined(format!(
            "correlation needs two equal-length sequences of at least 2 values (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation with a constant sequence".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64> {
    if pred.len() != gold.len() || pred.len() < 2 {
        return Err(Error::Undefined(format!(
            "spearman needs equal lengths of at least 2 (got {} and {})",
            pred.len(),
            gold.len()
        )));
    }
    pearson(&average_ranks(pred)?, &average_ranks(gold)?)
}

/// Two-sided exact binomial test of `wins` against `losses` under p = 1/2.
/// Ties must be removed by the caller.
pub fn sign_test(wins: u64, losses: u64) -> Result<f64> {
    let n = wins + losses;
    if n == 0 {
        return Err(Error::Undefined("sign test without any non-tied comparison".into()));
    }
    let k = wins.min(losses);
    if 2 * k >= n {
        return Ok(1.0);
    }
    // log P(X = i) for i = 0..=k, built from the ratio of consecutive terms
    let mut log_terms = Vec::with_capacity(k as usize + 1);
    let mut log_term = -(n as f64) * std::f64::consts::LN_2;
    log_terms.push(log_term);
    for i in 0..k {
        log_term += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        log_terms.push(log_term);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail: f64 = log_terms.iter().map(|t| (t - peak).exp()).sum();
    Ok((2.0 * tail * peak.exp()).min(1.0))
}
