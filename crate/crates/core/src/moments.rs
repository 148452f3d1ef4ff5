//! Exact Gaussian expectations of polynomials.
//!
//! For `X ~ N(mu, C)` and a polynomial `f`,
//!
//! ```text
//! E[f(X)] = exp( 1/2 * sum_{h,k} c_hk d_h d_k ) f |_{x = mu}
//! ```
//!
//! The operator series terminates because each application of the
//! covariance-contracted Laplacian lowers the degree by two.
//! [`isserlis_oracle`] evaluates the same expectation by expanding around
//! the mean and summing over pair partitions, as an independent check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SmallMatrix;
use crate::model::{covariance_matrix, mean_vector, MacroVar, ModelSpec, ThetaPoint};

/// Coefficients below this magnitude are dropped after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-30;

pub const ORACLE_MAX_DEGREE: u32 = 6;
pub const ORACLE_MAX_VARS: usize = 3;

/// Multivariate polynomial with real coefficients over `x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Mul,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1.0)
    }

    /// The coordinate `x_i` (zero-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Vec<u32>, coeff: f64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    /// Sums repeated exponents; panics if an exponent vector has the wrong length.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: f64) {
        assert_eq!(exponents.len(), self.nvars, "exponent vector length mismatch");
        let v = self.terms.get(&exponents).copied().unwrap_or(0.0) + c;
        if v.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&exponents);
        } else {
            self.terms.insert(exponents, v);
        }
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(-1.0))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = Self::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, &c)| (e.clone(), c * s)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.checked_mul(self).expect("same nvars");
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * e[i] as f64);
        }
        out
    }

    /// `sum_{h,k} c_hk d_h d_k f`.
    pub fn covariance_laplacian(&self, cov: &SmallMatrix) -> Self {
        let n = self.nvars;
        let mut out = Self::zero(n);
        for h in 0..n {
            let dh = self.derivative(h);
            if dh.is_zero() {
                continue;
            }
            for k in 0..n {
                let c = cov.get(h, k);
                if c == 0.0 {
                    continue;
                }
                let dhk = dh.derivative(k);
                for (e, &v) in &dhk.terms {
                    out.add_term(e.clone(), c * v);
                }
            }
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(if *c < 0.0 { " - " } else { " + " })?;
            } else if *c < 0.0 {
                f.write_str("-")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

pub fn poly_arith(a: &Polynomial, b: &Polynomial, op: PolyOp) -> Result<Polynomial> {
    match op {
        PolyOp::Add => a.checked_add(b),
        PolyOp::Mul => a.checked_mul(b),
    }
}

fn check_moment_inputs(f: &Polynomial, mu: &[f64], cov: &SmallMatrix) -> Result<()> {
    let n = f.nvars();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mu.len(),
        });
    }
    if cov.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cov.dim(),
        });
    }
    Ok(())
}

/// `E[f(X)]` for `X ~ N(mu, cov)` via the exponentiated covariance operator.
pub fn gaussian_expectation(f: &Polynomial, mu: &[f64], cov: &SmallMatrix) -> Result<f64> {
    check_moment_inputs(f, mu, cov)?;
    let mut term = f.clone();
    let mut total = term.evaluate(mu);
    let mut k = 1.0;
    loop {
        // k-th term: (1/2)^k / k! * L^k f
        term = term.covariance_laplacian(cov).scale(0.5 / k);
        if term.is_zero() {
            break;
        }
        total += term.evaluate(mu);
        k += 1.0;
    }
    Ok(total)
}

/// `E[f(X)]` by shifting to central coordinates and applying Isserlis'
/// theorem to every central monomial.
pub fn isserlis_oracle(f: &Polynomial, mu: &[f64], cov: &SmallMatrix) -> Result<f64> {
    check_moment_inputs(f, mu, cov)?;
    if f.nvars() > ORACLE_MAX_VARS || f.degree() > ORACLE_MAX_DEGREE {
        return Err(Error::OracleLimit {
            max_degree: ORACLE_MAX_DEGREE,
            max_vars: ORACLE_MAX_VARS,
        });
    }
    let mut total = 0.0;
    for (exps, c) in f.terms() {
        total += c * shifted_monomial_expectation(exps, mu, cov);
    }
    Ok(total)
}

/// `E[prod (mu_i + Y_i)^{a_i}]` with `Y ~ N(0, cov)`, by binomial expansion.
fn shifted_monomial_expectation(exps: &[u32], mu: &[f64], cov: &SmallMatrix) -> f64 {
    let n = exps.len();
    let mut sum = 0.0;
    let mut b = vec![0u32; n];
    loop {
        let mut weight = 1.0;
        for i in 0..n {
            weight *= binomial(exps[i], b[i]) * mu[i].powi((exps[i] - b[i]) as i32);
        }
        if weight != 0.0 {
            let mut idx = Vec::new();
            for (i, &bi) in b.iter().enumerate() {
                idx.extend(std::iter::repeat_n(i, bi as usize));
            }
            sum += weight * central_moment(&idx, cov);
        }
        // odometer over 0..=exps[i]
        let mut i = 0;
        loop {
            if i == n {
                return sum;
            }
            if b[i] < exps[i] {
                b[i] += 1;
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

/// `E[Y_{i1} ... Y_{ik}]`: sum over perfect matchings of covariance products.
fn central_moment(indices: &[usize], cov: &SmallMatrix) -> f64 {
    if indices.is_empty() {
        return 1.0;
    }
    if indices.len() % 2 == 1 {
        return 0.0;
    }
    let first = indices[0];
    let rest = &indices[1..];
    let mut acc = 0.0;
    for j in 0..rest.len() {
        let c = cov.get(first, rest[j]);
        if c == 0.0 {
            continue;
        }
        let remaining: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &v)| v)
            .collect();
        acc += c * central_moment(&remaining, cov);
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Score `d/d theta_i log p(x | theta)` as a polynomial in `x`.
///
/// Uses `-1/2 tr(P dC) + dmu^T P (x - mu) + 1/2 (x - mu)^T P dC P (x - mu)`
/// with `P = C^{-1}`, which is at most quadratic in `x`.
pub fn score_polynomial(spec: &ModelSpec, theta: ThetaPoint, index: usize) -> Result<Polynomial> {
    let vars = spec.macro_vars();
    let var = *vars.get(index).ok_or(Error::IndexOutOfRange {
        structure: spec.structure(),
        index,
        dim: vars.len(),
    })?;
    let n = spec.micro_dim();
    let t = spec.effective_theta(theta);
    let cov = covariance_matrix(spec, theta);
    let prec = cov.inverse()?;
    let mean = mean_vector(spec, theta);

    // centred coordinates x_i - mu
    let centred: Vec<Polynomial> = (0..n)
        .map(|i| {
            Polynomial::var(n, i)
                .checked_add(&Polynomial::constant(n, -mean[i]))
                .expect("same nvars")
        })
        .collect();

    let linear_form = |w: &[f64]| -> Polynomial {
        let mut acc = Polynomial::zero(n);
        for (wi, di) in w.iter().zip(&centred) {
            acc = acc.checked_add(&di.scale(*wi)).expect("same nvars");
        }
        acc
    };

    match var {
        MacroVar::Mu => {
            // dmu/dmu = (1, ..., 1)
            let w = prec.mul_vec(&vec![1.0; n]);
            Ok(linear_form(&w))
        }
        MacroVar::Sigma => {
            let dcov = spec.template().scaled(2.0 * t.sigma());
            let pdc = prec.matmul(&dcov);
            let m = pdc.matmul(&prec);
            let mut s = Polynomial::constant(n, -0.5 * pdc.trace());
            for h in 0..n {
                for k in 0..n {
                    let c = 0.5 * m.get(h, k);
                    if c == 0.0 {
                        continue;
                    }
                    let q = centred[h].checked_mul(&centred[k]).expect("same nvars");
                    s = s.checked_add(&q.scale(c)).expect("same nvars");
                }
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CorrelationStructure;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn arithmetic_examples() {
        let sq = poly_arith(&x(1, 0), &x(1, 0), PolyOp::Mul).unwrap();
        assert_eq!(sq, Polynomial::monomial(vec![2], 1.0));

        let a = x(2, 0).checked_add(&x(2, 1)).unwrap();
        let b = x(2, 0).checked_sub(&x(2, 1)).unwrap();
        let p = poly_arith(&a, &b, PolyOp::Mul).unwrap();
        let expect = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], -1.0)]);
        assert_eq!(p, expect);

        let shifted = x(1, 0).checked_add(&Polynomial::constant(1, -1.0)).unwrap();
        let expect = Polynomial::from_terms(1, [(vec![2], 1.0), (vec![1], -2.0), (vec![0], 1.0)]);
        assert_eq!(shifted.pow(2), expect);
    }

    #[test]
    fn mismatched_nvars_is_an_error() {
        assert!(matches!(
            poly_arith(&x(1, 0), &x(2, 0), PolyOp::Add),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = x(2, 0).checked_sub(&x(2, 0)).unwrap();
        assert!(p.is_zero());
        let tiny = Polynomial::from_terms(1, [(vec![1], 1.0), (vec![1], -1.0 + 1e-31)]);
        assert!(tiny.is_zero());
    }

    #[test]
    fn degree_of_product() {
        let a = x(3, 0).pow(2).checked_add(&x(3, 1)).unwrap();
        let b = x(3, 2).pow(3);
        assert_eq!(a.checked_mul(&b).unwrap().degree(), 5);
    }

    #[test]
    fn expectation_examples() {
        let s: f64 = 1.7;
        let var = SmallMatrix::from_rows(&[&[s * s]]);
        let x2 = x(1, 0).pow(2);
        assert!((gaussian_expectation(&x2, &[0.0], &var).unwrap() - s * s).abs() < 1e-14);
        let x4 = x(1, 0).pow(4);
        assert!((gaussian_expectation(&x4, &[0.0], &var).unwrap() - 3.0 * s.powi(4)).abs() < 1e-12);

        let cov = SmallMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let prod = x(2, 0).checked_mul(&x(2, 1)).unwrap();
        let v = gaussian_expectation(&prod, &[1.5, -2.0], &cov).unwrap();
        assert!((v - (0.3 + 1.5 * -2.0)).abs() < 1e-14);
    }

    #[test]
    fn oracle_examples() {
        let one = SmallMatrix::from_rows(&[&[1.0]]);
        assert_eq!(isserlis_oracle(&x(1, 0).pow(2), &[0.0], &one).unwrap(), 1.0);

        let rho = 0.4;
        let cov = SmallMatrix::from_rows(&[&[1.0, rho], &[rho, 1.0]]);
        let f = x(2, 0).pow(2).checked_mul(&x(2, 1).pow(2)).unwrap();
        let v = isserlis_oracle(&f, &[0.0, 0.0], &cov).unwrap();
        assert!((v - (1.0 + 2.0 * rho * rho)).abs() < 1e-15);

        let var = SmallMatrix::from_rows(&[&[2.5]]);
        assert_eq!(isserlis_oracle(&x(1, 0).pow(3), &[0.0], &var).unwrap(), 0.0);
    }

    #[test]
    fn oracle_rejects_high_degree() {
        let one = SmallMatrix::from_rows(&[&[1.0]]);
        assert!(matches!(
            isserlis_oracle(&x(1, 0).pow(7), &[0.0], &one),
            Err(Error::OracleLimit { .. })
        ));
    }

    #[test]
    fn expectation_of_one_is_one() {
        let cov = SmallMatrix::from_rows(&[&[2.0, 0.3, 0.0], &[0.3, 1.0, 0.1], &[0.0, 0.1, 4.0]]);
        assert_eq!(
            gaussian_expectation(&Polynomial::one(3), &[1.0, 2.0, 3.0], &cov).unwrap(),
            1.0
        );
    }

    #[test]
    fn score_examples() {
        let mono1 = ModelSpec::uncorrelated(CorrelationStructure::Mono1);
        let theta = ThetaPoint::new(0.7, 1.0).unwrap();
        let s = score_polynomial(&mono1, theta, 0).unwrap();
        let expect = Polynomial::from_terms(1, [(vec![1], 1.0), (vec![0], -0.7)]);
        assert_eq!(s, expect);

        let mono2 = ModelSpec::uncorrelated(CorrelationStructure::Mono2);
        let sigma: f64 = 1.3;
        let s = score_polynomial(&mono2, ThetaPoint::new(0.0, sigma).unwrap(), 0).unwrap();
        assert!((s.coeff(&[0]) + 1.0 / sigma).abs() < 1e-15);
        assert!((s.coeff(&[2]) - 1.0 / sigma.powi(3)).abs() < 1e-15);
        assert_eq!(s.coeff(&[1]), 0.0);

        assert!(matches!(
            score_polynomial(&mono2, theta, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn scores_are_at_most_quadratic() {
        let theta = ThetaPoint::new(-0.4, 1.8).unwrap();
        for s in CorrelationStructure::ALL {
            let spec = if s.is_correlated() {
                ModelSpec::new(s, 0.3).unwrap()
            } else {
                ModelSpec::uncorrelated(s)
            };
            for i in 0..s.macro_dim() {
                assert!(score_polynomial(&spec, theta, i).unwrap().degree() <= 2);
            }
        }
    }

    #[test]
    fn scores_have_zero_mean() {
        let theta = ThetaPoint::new(1.1, 0.6).unwrap();
        for s in CorrelationStructure::ALL {
            let spec = if s.is_correlated() {
                ModelSpec::new(s, -0.2).unwrap()
            } else {
                ModelSpec::uncorrelated(s)
            };
            let cov = covariance_matrix(&spec, theta);
            let mean = mean_vector(&spec, theta);
            for i in 0..s.macro_dim() {
                let sp = score_polynomial(&spec, theta, i).unwrap();
                let e = gaussian_expectation(&sp, &mean, &cov).unwrap();
                assert!(e.abs() < 1e-12, "{s} score {i} has mean {e}");
            }
        }
    }
}
