#![allow(dead_code)]

pub mod desk;
pub mod skipgram;
pub mod synth;

use mimic::model::{Mode, Model, Params};
use mimic::ngram::{NgramConfig, NgramVocab};
use mimic::Vector;
use ndarray::{Array1, Array2};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const WORDS: [&str; 6] = ["walking", "talking", "stalker", "balking", "walker", "chalk"];

pub fn normal_vec<R: Rng>(rng: &mut R, d: usize, std: f64) -> Vector {
    let n = Normal::new(0.0, std).unwrap();
    Array1::from_shape_fn(d, |_| n.sample(rng))
}

pub fn normal_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize, std: f64) -> Array2<f64> {
    let n = Normal::new(0.0, std).unwrap();
    Array2::from_shape_fn((rows, cols), |_| n.sample(rng))
}

/// A model over [`WORDS`] with every parameter tensor perturbed away from its
/// initial value, so no gradient term vanishes by symmetry.
pub fn random_model<R: Rng>(rng: &mut R, d: usize, attention: bool) -> Model {
    let vocab = NgramVocab::build(
        WORDS,
        NgramConfig {
            min_count: 1,
            ..Default::default()
        },
    );
    let rows = vocab.len();
    let params = Params {
        ngrams: normal_mat(rng, rows, d, 0.5),
        a: Array2::eye(d) + normal_mat(rng, d, d, 0.3),
        u: normal_vec(rng, 2 * d, 0.3),
        b: rng.random_range(-0.5..0.5),
        m: Array2::eye(d) + normal_mat(rng, d, d, 0.3),
    };
    Model::from_parts(vocab, params, attention).unwrap()
}

/// Context vectors sharing a common offset, so attention normalizers stay
/// well away from zero.
pub fn random_contexts<R: Rng>(rng: &mut R, m: usize, d: usize) -> Vec<Vector> {
    let base = normal_vec(rng, d, 1.0);
    (0..m).map(|_| &base + &normal_vec(rng, d, 0.6)).collect()
}

pub fn loss_at(model: &Model, word: &str, ctx: &[Vector], target: &Vector, mode: Mode) -> f64 {
    let out = model.forward(word, ctx.to_vec(), mode).unwrap().output;
    let diff = out - target;
    diff.dot(&diff)
}

fn slot(p: &mut Params, tensor: usize, i: usize) -> &mut f64 {
    match tensor {
        0 => &mut p.ngrams.as_slice_mut().unwrap()[i],
        1 => &mut p.a.as_slice_mut().unwrap()[i],
        2 => &mut p.u.as_slice_mut().unwrap()[i],
        3 => &mut p.b,
        _ => &mut p.m.as_slice_mut().unwrap()[i],
    }
}

/// Central finite differences of the loss with respect to every parameter.
pub fn numeric_gradient(model: &Model, word: &str, ctx: &[Vector], target: &Vector, mode: Mode, h: f64) -> Params {
    let p = model.params();
    let sizes = [p.ngrams.len(), p.a.len(), p.u.len(), 1, p.m.len()];
    let mut out = Params::zeros(p.ngrams.nrows(), p.dim());
    let mut probe = model.clone();
    for (tensor, &size) in sizes.iter().enumerate() {
        for i in 0..size {
            let orig = *slot(probe.params_mut(), tensor, i);
            *slot(probe.params_mut(), tensor, i) = orig + h;
            let plus = loss_at(&probe, word, ctx, target, mode);
            *slot(probe.params_mut(), tensor, i) = orig - h;
            let minus = loss_at(&probe, word, ctx, target, mode);
            *slot(probe.params_mut(), tensor, i) = orig;
            *slot(&mut out, tensor, i) = (plus - minus) / (2.0 * h);
        }
    }
    out
}

/// `||a - n|| / max(||a||, ||n||)`, zero when both vanish.
pub fn relative_error<'a>(a: impl IntoIterator<Item = &'a f64>, n: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut d2, mut a2, mut n2) = (0.0, 0.0, 0.0);
    for (x, y) in a.into_iter().zip(n) {
        d2 += (x - y) * (x - y);
        a2 += x * x;
        n2 += y * y;
    }
    let scale = a2.max(n2).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        d2.sqrt() / scale
    }
}

/// Per-tensor relative errors: n-grams, A, u, b, M.
pub fn tensor_errors(analytic: &Params, numeric: &Params) -> [f64; 5] {
    [
        relative_error(analytic.ngrams.iter(), numeric.ngrams.iter()),
        relative_error(analytic.a.iter(), numeric.a.iter()),
        relative_error(analytic.u.iter(), numeric.u.iter()),
        relative_error([analytic.b].iter(), [numeric.b].iter()),
        relative_error(analytic.m.iter(), numeric.m.iter()),
    ]
}

/// Ranks by counting: `#smaller + (#equal + 1) / 2`.
pub fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson correlation of the brute-force ranks.
pub fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// `num / den` to double precision for arbitrarily large integers.
fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    let (sn, sd) = (num.bits().saturating_sub(64), den.bits().saturating_sub(64));
    let top = (num >> sn).to_f64().unwrap() / (den >> sd).to_f64().unwrap();
    top * 2f64.powi(sn as i32 - sd as i32)
}

/// Exact two-sided binomial sign test via big-integer tail sums.
pub fn exact_sign_test(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    let k = wins.min(losses);
    let mut tail = BigUint::zero();
    for i in 0..=k {
        tail += binomial(n, i);
    }
    ratio(&(tail * 2u32), &(BigUint::one() << n)).min(1.0)
}
