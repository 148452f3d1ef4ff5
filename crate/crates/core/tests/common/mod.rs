#![allow(dead_code)]

use igc_core::model::{admissible_rho_interval, linspace};
use igc_core::{CorrelationStructure, Polynomial, SmallMatrix};
use rand::Rng;

pub const SIGMAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Nine interior points of the admissible interval (`[0]` for the
/// uncorrelated structures).
pub fn nine_rhos(s: CorrelationStructure) -> Vec<f64> {
    match admissible_rho_interval(s) {
        None => vec![0.0],
        Some(iv) => {
            let pts = linspace(iv.lo, iv.hi, 11);
            pts[1..10].to_vec()
        }
    }
}

/// Random SPD `n x n` matrix `L L^T + 0.1 I` with entries of `L` in `[-1, 1]`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize) -> SmallMatrix {
    let mut l = SmallMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            l.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    let mut c = SmallMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { 0.1 } else { 0.0 };
            for k in 0..n {
                s += l.get(i, k) * l.get(j, k);
            }
            c.set(i, j, s);
        }
    }
    c
}

/// Random polynomial with total degree `<= max_degree` and up to eight terms.
pub fn random_polynomial<R: Rng>(rng: &mut R, n: usize, max_degree: u32) -> Polynomial {
    let terms = rng.random_range(1..=8);
    let mut out = Vec::new();
    for _ in 0..terms {
        let mut exps = vec![0u32; n];
        let deg = rng.random_range(0..=max_degree);
        for _ in 0..deg {
            exps[rng.random_range(0..n)] += 1;
        }
        out.push((exps, rng.random_range(-2.0..2.0)));
    }
    Polynomial::from_terms(n, out)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
