//! Fisher-Rao metric, Levi-Civita connection and curvature on the
//! parameter manifold.
//!
//! Components are indexed in the order of [`ModelSpec::macro_vars`]: index 0
//! is `mu` and index 1 is `sigma` for the two-dimensional structures, while
//! the one-dimensional structures use index 0 for their single coordinate.
//!
//! Every implemented metric has the form `(k_mu dmu^2 + k_sigma dsigma^2) / sigma^2`
//! with constants depending on `rho` only. Rescaling `mu` by `sqrt(k_mu)` and
//! `sigma` by `sqrt(k_sigma)` maps it onto `k_sigma` times the Poincare
//! half-plane, so the exact sectional curvature is `-1 / k_sigma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{covariance_matrix, mean_vector, CorrelationStructure, MacroVar, ModelSpec, ThetaPoint};
use crate::moments::{gaussian_expectation, score_polynomial};

pub const MAX_MACRO: usize = 2;

pub type Matrix2 = [[f64; MAX_MACRO]; MAX_MACRO];
pub type Gamma = [[[f64; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
pub type Riemann = [[[[f64; MAX_MACRO]; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor {
    dim: usize,
    components: Matrix2,
}

impl MetricTensor {
    pub fn new(dim: usize, components: Matrix2) -> Self {
        assert!((1..=MAX_MACRO).contains(&dim));
        Self { dim, components }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut c = [[0.0; MAX_MACRO]; MAX_MACRO];
        for (i, &v) in entries.iter().enumerate() {
            c[i][i] = v;
        }
        Self::new(entries.len(), c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim);
        self.components[i][j]
    }

    pub fn components(&self) -> &Matrix2 {
        &self.components
    }

    pub fn determinant(&self) -> f64 {
        let g = &self.components;
        match self.dim {
            1 => g[0][0],
            _ => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        }
    }

    pub fn inverse(&self) -> Result<Matrix2> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMetric(det));
        }
        let g = &self.components;
        let mut inv = [[0.0; MAX_MACRO]; MAX_MACRO];
        match self.dim {
            1 => inv[0][0] = 1.0 / g[0][0],
            _ => {
                inv[0][0] = g[1][1] / det;
                inv[1][1] = g[0][0] / det;
                inv[0][1] = -g[0][1] / det;
                inv[1][0] = -g[1][0] / det;
            }
        }
        Ok(inv)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.components[i][j] * u[i] * v[j];
            }
        }
        s
    }

    /// Largest entrywise relative difference to `other`. Entries are scaled
    /// by `sqrt(|g_ii g_jj|)` as well, so an off-diagonal zero compared with
    /// rounding noise does not count as a full relative error.
    pub fn max_relative_difference(&self, other: &MetricTensor) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.components[i][j];
                let b = other.components[i][j];
                let diag = (other.components[i][i] * other.components[j][j]).abs().sqrt();
                let scale = a.abs().max(b.abs()).max(diag);
                let d = if scale == 0.0 { 0.0 } else { (a - b).abs() / scale };
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// `(k_mu, k_sigma)` with `g = diag(k_mu, k_sigma) / sigma^2` for the
/// two-dimensional structures.
pub fn metric_coefficients(spec: &ModelSpec) -> Result<(f64, f64)> {
    let r = spec.rho();
    match spec.structure() {
        CorrelationStructure::Mono3 => Ok((1.0, 2.0)),
        CorrelationStructure::BivariateStrong => Ok((2.0 / (1.0 + r), 4.0)),
        CorrelationStructure::TrivariateWeak => Ok(((3.0 + r) / (1.0 + r), 6.0)),
        CorrelationStructure::TrivariateMildlyWeak => Ok(((3.0 - 4.0 * r) / (1.0 - 2.0 * r * r), 6.0)),
        CorrelationStructure::TrivariateStrong => Ok((3.0 / (1.0 + 2.0 * r), 6.0)),
        s @ (CorrelationStructure::Mono1 | CorrelationStructure::Mono2) => Err(Error::NotTwoDimensional(s)),
    }
}

/// Hand-derived metric for each structure.
pub fn fisher_closed_form(spec: &ModelSpec, theta: ThetaPoint) -> MetricTensor {
    let sigma = spec.effective_theta(theta).sigma();
    let s2 = sigma * sigma;
    match spec.structure() {
        CorrelationStructure::Mono1 => MetricTensor::diagonal(&[1.0]),
        CorrelationStructure::Mono2 => MetricTensor::diagonal(&[2.0 / s2]),
        _ => {
            let (kmu, ksig) = metric_coefficients(spec).expect("two-dimensional");
            MetricTensor::diagonal(&[kmu / s2, ksig / s2])
        }
    }
}

/// Metric from `g_ij = E[s_i s_j]`, evaluated with the moment engine.
pub fn fisher_numeric(spec: &ModelSpec, theta: ThetaPoint) -> Result<MetricTensor> {
    let m = spec.structure().macro_dim();
    let cov = covariance_matrix(spec, theta);
    let mean = mean_vector(spec, theta);
    let scores = (0..m)
        .map(|i| score_polynomial(spec, theta, i))
        .collect::<Result<Vec<_>>>()?;
    let mut c = [[0.0; MAX_MACRO]; MAX_MACRO];
    for i in 0..m {
        for j in i..m {
            let f = scores[i].checked_mul(&scores[j])?;
            let v = gaussian_expectation(&f, &mean, &cov)?;
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    Ok(MetricTensor::new(m, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChristoffelMethod {
    Analytic,
    FiniteDifference,
}

/// `gamma[k][i][j]` is the connection coefficient with upper index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelSymbols {
    dim: usize,
    gamma: Gamma,
}

impl ChristoffelSymbols {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        assert!(k < self.dim && i < self.dim && j < self.dim);
        self.gamma[k][i][j]
    }

    pub fn raw(&self) -> &Gamma {
        &self.gamma
    }

    /// Largest `|gamma[k][i][j] - gamma[k][j][i]|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    worst = worst.max((self.gamma[k][i][j] - self.gamma[k][j][i]).abs());
                }
            }
        }
        worst
    }

    /// `-gamma^k_ij v^i v^j`.
    pub fn acceleration(&self, v: &[f64]) -> [f64; MAX_MACRO] {
        let mut a = [0.0; MAX_MACRO];
        for k in 0..self.dim {
            let mut s = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    s += self.gamma[k][i][j] * v[i] * v[j];
                }
            }
            a[k] = -s;
        }
        a
    }
}

/// Central-difference step for metric and connection derivatives.
pub fn fd_step(sigma: f64) -> f64 {
    1e-5 * sigma.max(1.0)
}

fn shifted(theta: ThetaPoint, var: MacroVar, delta: f64) -> Result<ThetaPoint> {
    match var {
        MacroVar::Mu => ThetaPoint::new(theta.mu() + delta, theta.sigma()),
        MacroVar::Sigma => ThetaPoint::new(theta.mu(), theta.sigma() + delta),
    }
}

pub fn christoffel(spec: &ModelSpec, theta: ThetaPoint, method: ChristoffelMethod) -> Result<ChristoffelSymbols> {
    match method {
        ChristoffelMethod::Analytic => christoffel_analytic(spec, theta),
        ChristoffelMethod::FiniteDifference => christoffel_fd(spec, theta),
    }
}

fn christoffel_analytic(spec: &ModelSpec, theta: ThetaPoint) -> Result<ChristoffelSymbols> {
    let sigma = spec.effective_theta(theta).sigma();
    let mut gamma = [[[0.0; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
    let dim = spec.structure().macro_dim();
    match spec.structure() {
        // constant metric
        CorrelationStructure::Mono1 => {}
        // g = 2 / sigma^2
        CorrelationStructure::Mono2 => gamma[0][0][0] = -1.0 / sigma,
        _ => {
            let (kmu, ksig) = metric_coefficients(spec)?;
            let g11 = kmu / (sigma * sigma);
            let g22 = ksig / (sigma * sigma);
            let dg11 = -2.0 * kmu / sigma.powi(3);
            let dg22 = -2.0 * ksig / sigma.powi(3);
            if g11 == 0.0 || g22 == 0.0 {
                return Err(Error::SingularMetric(g11 * g22));
            }
            gamma[0][0][1] = dg11 / (2.0 * g11);
            gamma[0][1][0] = gamma[0][0][1];
            gamma[1][0][0] = -dg11 / (2.0 * g22);
            gamma[1][1][1] = dg22 / (2.0 * g22);
        }
    }
    Ok(ChristoffelSymbols { dim, gamma })
}

fn christoffel_fd(spec: &ModelSpec, theta: ThetaPoint) -> Result<ChristoffelSymbols> {
    let vars = spec.macro_vars();
    let dim = vars.len();
    let g = fisher_closed_form(spec, theta);
    let ginv = g.inverse()?;
    let h = fd_step(theta.sigma());

    // dg[l][i][j] = d g_ij / d theta^l
    let mut dg = [[[0.0; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
    for (l, &var) in vars.iter().enumerate() {
        let gp = fisher_closed_form(spec, shifted(theta, var, h)?);
        let gm = fisher_closed_form(spec, shifted(theta, var, -h)?);
        for i in 0..dim {
            for j in 0..dim {
                dg[l][i][j] = (gp.get(i, j) - gm.get(i, j)) / (2.0 * h);
            }
        }
    }

    let mut gamma = [[[0.0; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for l in 0..dim {
                    s += ginv[k][l] * (dg[i][l][j] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    Ok(ChristoffelSymbols { dim, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// Fully covariant `R_ijkl`.
    pub riemann: Riemann,
    /// Sectional curvature of the plane spanned by the coordinate basis.
    pub sectional: f64,
    /// Set for the one-dimensional structures, which are flat.
    pub flat_one_dimensional: bool,
}

impl CurvatureReport {
    fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in &self.riemann {
            for b in a {
                for c in b {
                    for &d in c {
                        m = m.max(d.abs());
                    }
                }
            }
        }
        m
    }

    /// Relative defects of `R_ijkl = -R_jikl` and `R_ijkl = -R_ijlk`,
    /// normalised by the largest component.
    pub fn antisymmetry_defects(&self) -> (f64, f64) {
        let scale = self.max_abs();
        if scale == 0.0 {
            return (0.0, 0.0);
        }
        let r = &self.riemann;
        let (mut first, mut second): (f64, f64) = (0.0, 0.0);
        for i in 0..MAX_MACRO {
            for j in 0..MAX_MACRO {
                for k in 0..MAX_MACRO {
                    for l in 0..MAX_MACRO {
                        first = first.max((r[i][j][k][l] + r[j][i][k][l]).abs());
                        second = second.max((r[i][j][k][l] + r[i][j][l][k]).abs());
                    }
                }
            }
        }
        (first / scale, second / scale)
    }
}

/// Riemann tensor from finite-difference derivatives of the analytic
/// connection, lowered with `R_ijkl = g_lh R^h_ijk`, and the sectional
/// curvature with the Gram-determinant denominator.
pub fn sectional_curvature(spec: &ModelSpec, theta: ThetaPoint) -> Result<CurvatureReport> {
    let zero = [[[[0.0; MAX_MACRO]; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
    if !spec.structure().is_two_dimensional() {
        return Ok(CurvatureReport {
            riemann: zero,
            sectional: 0.0,
            flat_one_dimensional: true,
        });
    }
    let vars = spec.macro_vars();
    let g = fisher_closed_form(spec, theta);
    let gam = christoffel_analytic(spec, theta)?.gamma;
    let h = fd_step(theta.sigma());

    // dgam[a][h][j][k] = d gamma^h_jk / d theta^a
    let mut dgam = [[[[0.0; MAX_MACRO]; MAX_MACRO]; MAX_MACRO]; MAX_MACRO];
    for (a, &var) in vars.iter().enumerate() {
        let plus = christoffel_analytic(spec, shifted(theta, var, h)?)?.gamma;
        let minus = christoffel_analytic(spec, shifted(theta, var, -h)?)?.gamma;
        for hh in 0..MAX_MACRO {
            for j in 0..MAX_MACRO {
                for k in 0..MAX_MACRO {
                    dgam[a][hh][j][k] = (plus[hh][j][k] - minus[hh][j][k]) / (2.0 * h);
                }
            }
        }
    }

    // R^h_ijk = d_i G^h_jk - d_j G^h_ik + G^l_jk G^h_il - G^l_ik G^h_jl
    let mut mixed = zero;
    for hh in 0..MAX_MACRO {
        for i in 0..MAX_MACRO {
            for j in 0..MAX_MACRO {
                for k in 0..MAX_MACRO {
                    let mut v = dgam[i][hh][j][k] - dgam[j][hh][i][k];
                    for l in 0..MAX_MACRO {
                        v += gam[l][j][k] * gam[hh][i][l] - gam[l][i][k] * gam[hh][j][l];
                    }
                    mixed[hh][i][j][k] = v;
                }
            }
        }
    }

    let mut riemann = zero;
    for i in 0..MAX_MACRO {
        for j in 0..MAX_MACRO {
            for k in 0..MAX_MACRO {
                for l in 0..MAX_MACRO {
                    riemann[i][j][k][l] = (0..MAX_MACRO).map(|hh| g.get(l, hh) * mixed[hh][i][j][k]).sum();
                }
            }
        }
    }

    let xi = [1.0, 0.0];
    let eta = [0.0, 1.0];
    let gram = g.inner(&xi, &xi) * g.inner(&eta, &eta) - g.inner(&xi, &eta).powi(2);
    if gram.abs() < f64::MIN_POSITIVE {
        return Err(Error::DegenerateBasis(gram));
    }
    let mut num = 0.0;
    for i in 0..MAX_MACRO {
        for j in 0..MAX_MACRO {
            for k in 0..MAX_MACRO {
                for l in 0..MAX_MACRO {
                    num += riemann[i][j][k][l] * xi[i] * eta[j] * eta[k] * xi[l];
                }
            }
        }
    }
    Ok(CurvatureReport {
        riemann,
        sectional: num / gram,
        flat_one_dimensional: false,
    })
}

/// Sectional curvature at two macro-states of the same model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureConstancy {
    pub first: f64,
    pub second: f64,
    pub difference: f64,
}

pub fn curvature_constancy(spec: &ModelSpec, a: ThetaPoint, b: ThetaPoint) -> Result<CurvatureConstancy> {
    let first = sectional_curvature(spec, a)?.sectional;
    let second = sectional_curvature(spec, b)?.sectional;
    Ok(CurvatureConstancy {
        first,
        second,
        difference: second - first,
    })
}
