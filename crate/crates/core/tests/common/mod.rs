//! Brute-force metric references written from the definitions with exact
//! rational arithmetic, plus random fixtures with plenty of score ties.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView1};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i64>;

pub fn q(n: usize, d: usize) -> Q {
    Q::new(n as i64, d as i64)
}

pub fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Rank 1 = highest score; equal scores ordered by label index.
pub fn brute_rank(s: ArrayView1<'_, f64>, l: usize) -> usize {
    1 + (0..s.len()).filter(|&m| s[m] > s[l] || (s[m] == s[l] && m < l)).count()
}

pub struct Fixture {
    pub scores: Array2<f64>,
    pub truth: Array2<u8>,
    pub pred: Array2<u8>,
}

pub fn fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=20);
    let l = rng.random_range(2..=8);
    // a coarse grid forces ties
    let scores = Array2::from_shape_fn((n, l), |_| f64::from(rng.random_range(0..=10u8)) / 10.0);
    let truth = Array2::from_shape_fn((n, l), |_| u8::from(rng.random::<f64>() < 0.4));
    let pred = Array2::from_shape_fn((n, l), |_| u8::from(rng.random::<f64>() < 0.5));
    Fixture { scores, truth, pred }
}

pub fn relevant_sets(f: &Fixture) -> Vec<Vec<usize>> {
    f.truth
        .rows()
        .into_iter()
        .map(|r| (0..r.len()).filter(|&j| r[j] == 1).collect())
        .collect()
}

pub fn brute_ap(f: &Fixture) -> Option<Q> {
    let mut total = Q::from_integer(0);
    let mut used = 0;
    for (i, rel) in relevant_sets(f).iter().enumerate() {
        if rel.is_empty() {
            continue;
        }
        let s = f.scores.row(i);
        let mut inst = Q::from_integer(0);
        for &l in rel {
            let r = brute_rank(s, l);
            let above = rel.iter().filter(|&&m| brute_rank(s, m) <= r).count();
            inst += q(above, r);
        }
        total += inst / Q::from_integer(rel.len() as i64);
        used += 1;
    }
    (used > 0).then(|| total / Q::from_integer(used))
}

pub fn brute_oe(f: &Fixture) -> Option<Q> {
    let mut misses = 0;
    let mut used = 0;
    for (i, rel) in relevant_sets(f).iter().enumerate() {
        if rel.is_empty() {
            continue;
        }
        let s = f.scores.row(i);
        let top = (0..s.len()).find(|&l| brute_rank(s, l) == 1).unwrap();
        misses += usize::from(!rel.contains(&top));
        used += 1;
    }
    (used > 0).then(|| q(misses, used))
}

pub fn brute_rl(f: &Fixture) -> Option<Q> {
    let mut total = Q::from_integer(0);
    let mut used = 0;
    for (i, rel) in relevant_sets(f).iter().enumerate() {
        let l = f.scores.ncols();
        if rel.is_empty() || rel.len() == l {
            continue;
        }
        let s = f.scores.row(i);
        let irr: Vec<usize> = (0..l).filter(|j| !rel.contains(j)).collect();
        let bad = rel.iter().flat_map(|&a| irr.iter().map(move |&b| (a, b))).filter(|&(a, b)| s[a] <= s[b]).count();
        total += q(bad, rel.len() * irr.len());
        used += 1;
    }
    (used > 0).then(|| total / Q::from_integer(used))
}

pub fn brute_cv(f: &Fixture) -> Option<Q> {
    let mut total = 0;
    let mut used = 0;
    for (i, rel) in relevant_sets(f).iter().enumerate() {
        if rel.is_empty() {
            continue;
        }
        let s = f.scores.row(i);
        total += rel.iter().map(|&l| brute_rank(s, l)).max().unwrap() - 1;
        used += 1;
    }
    (used > 0).then(|| q(total, used))
}

pub fn brute_hl(f: &Fixture) -> Q {
    let wrong = f.pred.iter().zip(f.truth.iter()).filter(|(a, b)| a != b).count();
    q(wrong, f.pred.len())
}

pub fn brute_auc(scores: &[f64], truth: &[bool]) -> Option<Q> {
    let pos: Vec<f64> = scores.iter().zip(truth).filter(|(_, &t)| t).map(|(&s, _)| s).collect();
    let neg: Vec<f64> = scores.iter().zip(truth).filter(|(_, &t)| !t).map(|(&s, _)| s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut twice = 0;
    for &p in &pos {
        for &n in &neg {
            twice += if p > n { 2 } else if p == n { 1 } else { 0 };
        }
    }
    Some(q(twice, 2 * pos.len() * neg.len()))
}

pub fn brute_class_f1(pred: &[usize], truth: &[usize], c: usize) -> Q {
    let tp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t == c).count();
    let fp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t != c).count();
    let fn_ = pred.iter().zip(truth).filter(|(&p, &t)| p != c && t == c).count();
    if tp == 0 {
        return Q::from_integer(0);
    }
    let precision = q(tp, tp + fp);
    let recall = q(tp, tp + fn_);
    Q::from_integer(2) * precision * recall / (precision + recall)
}

pub fn assert_close(got: f64, want: Q, what: &str) {
    let w = to_f64(want);
    assert!((got - w).abs() <= 1e-12, "{what}: got {got}, want {want} ({w})");
}
