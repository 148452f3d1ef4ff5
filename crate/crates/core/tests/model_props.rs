mod common;

use igc_core::complexity::simpson;
use igc_core::model::{admissible_rho_interval, covariance_matrix, log_density};
use igc_core::{CorrelationStructure, ModelSpec, ThetaPoint};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn structure() -> impl Strategy<Value = CorrelationStructure> {
    proptest::sample::select(CorrelationStructure::ALL.to_vec())
}

/// Admissible spec with `rho` drawn from the interval shrunk by `margin`
/// at each end.
fn spec_with_margin(s: CorrelationStructure, u: f64, margin: f64) -> ModelSpec {
    match admissible_rho_interval(s) {
        None => ModelSpec::uncorrelated(s),
        Some(iv) => {
            let lo = iv.lo + margin;
            let hi = iv.hi - margin;
            ModelSpec::new(s, lo + u * (hi - lo)).unwrap()
        }
    }
}

proptest! {
    #[test]
    fn covariance_is_symmetric_positive_definite(
        s in structure(), u in 0.0..1.0f64, mu in -5.0..5.0f64, sigma in 0.05..20.0f64,
    ) {
        let spec = spec_with_margin(s, u, 1e-6);
        let c = covariance_matrix(&spec, ThetaPoint::new(mu, sigma).unwrap());
        prop_assert!(c.is_symmetric());
        let n = c.dim();
        let m = DMatrix::from_fn(n, n, |i, j| c.get(i, j));
        let eig = SymmetricEigen::new(m);
        prop_assert!(eig.eigenvalues.iter().all(|&l| l > 0.0), "{:?}", eig.eigenvalues);
    }

    #[test]
    fn density_respects_template_symmetry(
        s in proptest::sample::select(vec![
            CorrelationStructure::TrivariateWeak,
            CorrelationStructure::TrivariateMildlyWeak,
            CorrelationStructure::TrivariateStrong,
        ]),
        u in 0.0..1.0f64,
        x in proptest::array::uniform3(-4.0..4.0f64),
        mu in -2.0..2.0f64,
        sigma in 0.2..3.0f64,
    ) {
        let spec = spec_with_margin(s, u, 1e-3);
        let theta = ThetaPoint::new(mu, sigma).unwrap();
        let base = log_density(&spec, theta, &x).unwrap();
        let perms: Vec<[usize; 3]> = match s {
            CorrelationStructure::TrivariateWeak => vec![[1, 0, 2]],
            CorrelationStructure::TrivariateMildlyWeak => vec![[0, 2, 1]],
            _ => vec![[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]],
        };
        for p in perms {
            let y = [x[p[0]], x[p[1]], x[p[2]]];
            let v = log_density(&spec, theta, &y).unwrap();
            prop_assert!((v - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }
}

fn integrate_density(spec: &ModelSpec, theta: ThetaPoint, panels: usize) -> f64 {
    let (lo, hi) = (theta.mu() - 10.0 * theta.sigma(), theta.mu() + 10.0 * theta.sigma());
    let p = |x: &[f64]| log_density(spec, theta, x).unwrap().exp();
    match spec.micro_dim() {
        1 => simpson(|a| p(&[a]), lo, hi, panels),
        2 => simpson(|a| simpson(|b| p(&[a, b]), lo, hi, panels), lo, hi, panels),
        _ => simpson(
            |a| simpson(|b| simpson(|c| p(&[a, b, c]), lo, hi, panels), lo, hi, panels),
            lo,
            hi,
            panels,
        ),
    }
}

#[test]
fn densities_normalise() {
    let theta = ThetaPoint::new(0.7, 1.3).unwrap();
    for s in CorrelationStructure::ALL {
        let rhos: Vec<f64> = match admissible_rho_interval(s) {
            None => vec![0.0],
            Some(iv) => vec![0.4 * iv.lo, 0.0, 0.4 * iv.hi],
        };
        for rho in rhos {
            let spec = ModelSpec::new(s, rho).unwrap();
            let panels = if spec.micro_dim() == 3 { 80 } else { 200 };
            let total = integrate_density(&spec, spec.effective_theta(theta), panels);
            assert!((total - 1.0).abs() < 1e-6, "{spec}: {total}");
        }
    }
}
