//! Geodesic flow on the parameter manifold.
//!
//! States are carried in `(mu, sigma)` slots for every structure; the
//! pinned coordinate of a one-dimensional structure keeps zero velocity.
//!
//! For the two-dimensional structures the closed-form geodesics are
//!
//! ```text
//! sigma(t) = 2 s0 e^{a t} / (1 + e^{2 a t})          = s0 sech(a t)
//! mu(t)    = -2 s0 B sgn(A1) / (1 + e^{2 a t})         = -s0 B sgn(A1) (1 - tanh(a t))
//! ```
//!
//! with decay rate `a = s0 sqrt(A(rho))` and `mu`-scale `B` per structure.
//! They are evaluated in terms of `e^{-2 a t}` so that large `a t` neither
//! overflows nor cancels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel, fisher_closed_form, ChristoffelMethod};
use crate::model::{CorrelationStructure, ModelSpec, ThetaPoint};

/// Integration aborts once `sigma` falls below this value.
pub const SIGMA_FLOOR: f64 = 1e-12;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 10.0;

/// Tangent vector in `(mu, sigma)` slots.
pub type Velocity = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants")]
pub struct GeodesicConstants {
    sigma0: f64,
    a1: f64,
    a2: f64,
}

#[derive(Deserialize)]
struct RawConstants {
    sigma0: f64,
    a1: f64,
    a2: f64,
}

impl TryFrom<RawConstants> for GeodesicConstants {
    type Error = Error;

    fn try_from(raw: RawConstants) -> Result<Self> {
        GeodesicConstants::new(raw.sigma0, raw.a1, raw.a2)
    }
}

impl Default for GeodesicConstants {
    fn default() -> Self {
        Self {
            sigma0: 1.0,
            a1: 1.0,
            a2: 1.0,
        }
    }
}

impl GeodesicConstants {
    /// All three constants must be finite and strictly positive.
    pub fn new(sigma0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(Error::InvalidConstants("sigma0 must be > 0"));
        }
        if !(a1.is_finite() && a1 > 0.0) {
            return Err(Error::InvalidConstants("A1 must be > 0"));
        }
        if !(a2.is_finite() && a2 > 0.0) {
            return Err(Error::InvalidConstants("A2 must be > 0"));
        }
        Ok(Self { sigma0, a1, a2 })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a1_sign(&self) -> f64 {
        self.a1.signum()
    }
}

/// Decay rate `a(rho) = sigma0 * sqrt(A(rho))` of a two-dimensional structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFunction {
    pub structure: CorrelationStructure,
    /// `A(rho)`.
    pub amplitude: f64,
    pub value: f64,
}

pub fn decay_rate(spec: &ModelSpec, constants: &GeodesicConstants) -> Result<RateFunction> {
    let a1 = constants.a1();
    let r = spec.rho();
    let amplitude = match spec.structure() {
        CorrelationStructure::Mono3 => a1 * a1 / 2.0,
        CorrelationStructure::BivariateStrong => a1 * a1 / (2.0 * (1.0 + r)),
        CorrelationStructure::TrivariateWeak => a1 * a1 * (3.0 + r) / (6.0 * (1.0 + r)),
        CorrelationStructure::TrivariateMildlyWeak => a1 * a1 * (3.0 - 4.0 * r) / (6.0 * (1.0 - 2.0 * r * r)),
        CorrelationStructure::TrivariateStrong => a1 * a1 / (2.0 * (1.0 + 2.0 * r)),
        s => return Err(Error::NotTwoDimensional(s)),
    };
    Ok(RateFunction {
        structure: spec.structure(),
        amplitude,
        value: constants.sigma0() * amplitude.sqrt(),
    })
}

/// Magnitude `B` of the `mu` excursion, `mu(0) = -sigma0 * B * sgn(A1)`.
pub fn mu_scale(spec: &ModelSpec, constants: &GeodesicConstants) -> Result<f64> {
    let r = spec.rho();
    match spec.structure() {
        CorrelationStructure::Mono3 => Ok(2f64.sqrt()),
        CorrelationStructure::BivariateStrong => Ok((2.0 * (1.0 + r)).sqrt()),
        CorrelationStructure::TrivariateWeak
        | CorrelationStructure::TrivariateMildlyWeak
        | CorrelationStructure::TrivariateStrong => {
            let rate = decay_rate(spec, constants)?;
            Ok(constants.a1().abs() / rate.amplitude.sqrt())
        }
        s => Err(Error::NotTwoDimensional(s)),
    }
}

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `1 - tanh(x)` without the cancellation at large `x`.
fn one_minus_tanh(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-2.0 * x).exp();
        2.0 * e / (1.0 + e)
    } else {
        1.0 - x.tanh()
    }
}

pub fn closed_form_geodesic(spec: &ModelSpec, constants: &GeodesicConstants, tau: f64) -> Result<ThetaPoint> {
    match spec.structure() {
        CorrelationStructure::Mono1 => ThetaPoint::new(constants.a1() * tau + constants.a2(), 1.0),
        CorrelationStructure::Mono2 => ThetaPoint::new(0.0, constants.a1() * (constants.a2() * tau).exp()),
        _ => {
            let a = decay_rate(spec, constants)?.value;
            let b = mu_scale(spec, constants)?;
            let s0 = constants.sigma0();
            let x = a * tau;
            let sigma = s0 * sech(x);
            let mu = -s0 * b * constants.a1_sign() * one_minus_tanh(x);
            ThetaPoint::new(mu, sigma).map_err(|_| Error::ManifoldBoundary { tau, sigma })
        }
    }
}

/// Analytic `tau`-derivative of [`closed_form_geodesic`].
pub fn closed_form_velocity(spec: &ModelSpec, constants: &GeodesicConstants, tau: f64) -> Result<Velocity> {
    match spec.structure() {
        CorrelationStructure::Mono1 => Ok([constants.a1(), 0.0]),
        CorrelationStructure::Mono2 => {
            let a2 = constants.a2();
            Ok([0.0, constants.a1() * a2 * (a2 * tau).exp()])
        }
        _ => {
            let a = decay_rate(spec, constants)?.value;
            let b = mu_scale(spec, constants)?;
            let s0 = constants.sigma0();
            let x = a * tau;
            let sh = sech(x);
            Ok([s0 * b * constants.a1_sign() * a * sh * sh, -s0 * a * sh * x.tanh()])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub theta: ThetaPoint,
    pub velocity: Velocity,
}

/// Initial state matching the closed form at `tau = 0`.
pub fn closed_form_initial_state(spec: &ModelSpec, constants: &GeodesicConstants) -> Result<GeodesicState> {
    Ok(GeodesicState {
        theta: closed_form_geodesic(spec, constants, 0.0)?,
        velocity: closed_form_velocity(spec, constants, 0.0)?,
    })
}

/// `-Gamma^k_ij v^i v^j` in `(mu, sigma)` slots.
pub fn geodesic_rhs(spec: &ModelSpec, state: &GeodesicState) -> Result<Velocity> {
    let vars = spec.macro_vars();
    let gamma = christoffel(spec, state.theta, ChristoffelMethod::Analytic)?;
    let v: Vec<f64> = vars.iter().map(|var| state.velocity[var.slot()]).collect();
    let acc = gamma.acceleration(&v);
    let mut out = [0.0; 2];
    for (i, var) in vars.iter().enumerate() {
        out[var.slot()] = acc[i];
    }
    Ok(out)
}

/// `g_ij v^i v^j`.
pub fn speed_squared(spec: &ModelSpec, theta: ThetaPoint, velocity: Velocity) -> f64 {
    let g = fisher_closed_form(spec, theta);
    let v: Vec<f64> = spec.macro_vars().iter().map(|var| velocity[var.slot()]).collect();
    g.inner(&v, &v)
}

/// `g_mumu * dmu/dtau`, conserved because `mu` does not enter the metric.
/// `None` when `mu` is not a macro-variable.
pub fn cyclic_momentum(spec: &ModelSpec, theta: ThetaPoint, velocity: Velocity) -> Option<f64> {
    if spec.structure() == CorrelationStructure::Mono2 {
        return None;
    }
    let g = fisher_closed_form(spec, theta);
    Some(g.get(0, 0) * velocity[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<ThetaPoint>,
    pub velocities: Vec<Velocity>,
}

impl GeodesicTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest coordinate deviation from the closed-form geodesic.
    pub fn max_deviation(&self, spec: &ModelSpec, constants: &GeodesicConstants) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (t, p) in self.times.iter().zip(&self.points) {
            let c = closed_form_geodesic(spec, constants, *t)?;
            worst = worst.max((p.mu() - c.mu()).abs()).max((p.sigma() - c.sigma()).abs());
        }
        Ok(worst)
    }

    /// Largest relative drift of `g(v, v)` from its initial value.
    pub fn speed_drift(&self, spec: &ModelSpec) -> f64 {
        let s: Vec<f64> = self
            .points
            .iter()
            .zip(&self.velocities)
            .map(|(p, v)| speed_squared(spec, *p, *v))
            .collect();
        relative_drift(&s)
    }

    /// Largest relative drift of the cyclic momentum, if it exists.
    pub fn momentum_drift(&self, spec: &ModelSpec) -> Option<f64> {
        let m: Option<Vec<f64>> = self
            .points
            .iter()
            .zip(&self.velocities)
            .map(|(p, v)| cyclic_momentum(spec, *p, *v))
            .collect();
        m.map(|m| relative_drift(&m))
    }
}

fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = first.abs();
    values
        .iter()
        .map(|v| {
            if scale == 0.0 {
                v.abs()
            } else {
                (v - first).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

fn state_from(tau: f64, y: [f64; 4]) -> Result<GeodesicState> {
    if !(y[1] >= SIGMA_FLOOR) || !y.iter().all(|v| v.is_finite()) {
        return Err(Error::ManifoldBoundary { tau, sigma: y[1] });
    }
    Ok(GeodesicState {
        theta: ThetaPoint::new(y[0], y[1]).map_err(|_| Error::ManifoldBoundary { tau, sigma: y[1] })?,
        velocity: [y[2], y[3]],
    })
}

fn derivative(spec: &ModelSpec, tau: f64, y: [f64; 4]) -> Result<[f64; 4]> {
    let state = state_from(tau, y)?;
    let acc = geodesic_rhs(spec, &state)?;
    Ok([y[2], y[3], acc[0], acc[1]])
}

fn axpy(y: [f64; 4], h: f64, k: [f64; 4]) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Classical fixed-step RK4 from `tau = 0` to `t_end`; the final step is
/// shortened so that the last sample lands exactly on `t_end`.
pub fn integrate_geodesic(
    spec: &ModelSpec,
    initial: GeodesicState,
    t_end: f64,
    step: f64,
) -> Result<GeodesicTrajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidIntegration("step must be > 0"));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidIntegration("t_end must be > 0"));
    }
    let mut initial = initial;
    // pinned coordinates do not move
    for slot in 0..2 {
        if !spec.macro_vars().iter().any(|v| v.slot() == slot) {
            initial.velocity[slot] = 0.0;
        }
    }

    let full_steps = (t_end / step * (1.0 - 1e-12)).floor() as usize;
    let mut times = Vec::with_capacity(full_steps + 2);
    for i in 0..=full_steps {
        times.push(i as f64 * step);
    }
    if t_end - times[times.len() - 1] > step * 1e-9 {
        times.push(t_end);
    } else {
        *times.last_mut().expect("non-empty") = t_end;
    }

    let mut y = [
        initial.theta.mu(),
        initial.theta.sigma(),
        initial.velocity[0],
        initial.velocity[1],
    ];
    let mut points = Vec::with_capacity(times.len());
    let mut velocities = Vec::with_capacity(times.len());
    points.push(initial.theta);
    velocities.push(initial.velocity);

    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let k1 = derivative(spec, t0, y)?;
        let k2 = derivative(spec, t0 + 0.5 * h, axpy(y, 0.5 * h, k1))?;
        let k3 = derivative(spec, t0 + 0.5 * h, axpy(y, 0.5 * h, k2))?;
        let k4 = derivative(spec, t1, axpy(y, h, k3))?;
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let state = state_from(t1, y)?;
        points.push(state.theta);
        velocities.push(state.velocity);
    }

    Ok(GeodesicTrajectory {
        times,
        points,
        velocities,
    })
}

/// Central-difference check that the closed form solves the geodesic
/// equations: the largest `|theta'' + Gamma theta' theta'|` over the grid.
pub fn geodesic_residual(spec: &ModelSpec, constants: &GeodesicConstants, tau_grid: &[f64]) -> Result<f64> {
    const H: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    for &tau in tau_grid {
        let p = closed_form_geodesic(spec, constants, tau + H)?.coords();
        let c = closed_form_geodesic(spec, constants, tau)?;
        let m = closed_form_geodesic(spec, constants, tau - H)?.coords();
        let cc = c.coords();
        let mut vel = [0.0; 2];
        let mut acc = [0.0; 2];
        for k in 0..2 {
            vel[k] = (p[k] - m[k]) / (2.0 * H);
            acc[k] = (p[k] - 2.0 * cc[k] + m[k]) / (H * H);
        }
        let rhs = geodesic_rhs(
            spec,
            &GeodesicState {
                theta: c,
                velocity: vel,
            },
        )?;
        for k in 0..2 {
            worst = worst.max((acc[k] - rhs[k]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linspace;
    use CorrelationStructure::*;

    fn theta(mu: f64, sigma: f64) -> ThetaPoint {
        ThetaPoint::new(mu, sigma).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let spec = ModelSpec::uncorrelated(Mono3);
        let v = 0.8;
        let sigma = 1.0;
        let acc = geodesic_rhs(
            &spec,
            &GeodesicState {
                theta: theta(0.0, sigma),
                velocity: [0.0, v],
            },
        )
        .unwrap();
        assert_eq!(acc[0], 0.0);
        assert!((acc[1] - v * v / sigma).abs() < 1e-15);

        let rho = 0.3;
        let sigma = 1.7;
        let u = 1.2;
        let spec = ModelSpec::new(BivariateStrong, rho).unwrap();
        let acc = geodesic_rhs(
            &spec,
            &GeodesicState {
                theta: theta(0.5, sigma),
                velocity: [u, 0.0],
            },
        )
        .unwrap();
        assert!((acc[1] + u * u / (2.0 * (1.0 + rho) * sigma)).abs() < 1e-15);
        assert_eq!(acc[0], 0.0);

        let acc = geodesic_rhs(
            &spec,
            &GeodesicState {
                theta: theta(0.5, sigma),
                velocity: [0.0, 0.0],
            },
        )
        .unwrap();
        assert_eq!(acc, [0.0, 0.0]);
    }

    #[test]
    fn mono1_is_a_straight_line() {
        let spec = ModelSpec::uncorrelated(Mono1);
        let c = GeodesicConstants::new(1.0, 1.5, 0.25).unwrap();
        let traj = integrate_geodesic(&spec, closed_form_initial_state(&spec, &c).unwrap(), 5.0, 1e-2).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.points) {
            assert!((p.mu() - (1.5 * t + 0.25)).abs() < 1e-12);
            assert_eq!(p.sigma(), 1.0);
        }
    }

    #[test]
    fn mono2_is_exponential() {
        let spec = ModelSpec::uncorrelated(Mono2);
        let c = GeodesicConstants::new(1.0, 0.8, 0.6).unwrap();
        let traj = integrate_geodesic(&spec, closed_form_initial_state(&spec, &c).unwrap(), 5.0, 1e-3).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.points) {
            assert!((p.sigma() - 0.8 * (0.6 * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn mono3_integration_tracks_closed_form() {
        let spec = ModelSpec::uncorrelated(Mono3);
        let c = GeodesicConstants::default();
        let traj = integrate_geodesic(&spec, closed_form_initial_state(&spec, &c).unwrap(), 10.0, 1e-3).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        assert!(traj.max_deviation(&spec, &c).unwrap() <= 1e-6);
    }

    #[test]
    fn closed_form_boundary_values() {
        let c = GeodesicConstants::new(1.3, 0.7, 1.0).unwrap();
        for s in CorrelationStructure::TWO_DIMENSIONAL {
            let spec = if s.is_correlated() {
                ModelSpec::new(s, 0.25).unwrap()
            } else {
                ModelSpec::uncorrelated(s)
            };
            let p = closed_form_geodesic(&spec, &c, 0.0).unwrap();
            assert!((p.sigma() - 1.3).abs() < 1e-15);
            let far = closed_form_geodesic(&spec, &c, 200.0).unwrap();
            assert!(far.sigma() < 1e-20 && far.mu().abs() < 1e-20);
        }
        let rho = -0.35;
        let spec = ModelSpec::new(BivariateStrong, rho).unwrap();
        let p = closed_form_geodesic(&spec, &c, 0.0).unwrap();
        assert!((p.mu() + 1.3 * (2.0 * (1.0 + rho)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn residual_examples() {
        let grid = linspace(0.1, 5.0, 50);
        let c = GeodesicConstants::default();
        let cases = [
            ModelSpec::uncorrelated(Mono3),
            ModelSpec::new(BivariateStrong, 0.9).unwrap(),
            ModelSpec::new(TrivariateStrong, -0.4).unwrap(),
        ];
        for spec in cases {
            let r = geodesic_residual(&spec, &c, &grid).unwrap();
            assert!(r <= 1e-5, "{spec}: residual {r}");
        }
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(GeodesicConstants::new(1.0, -1.0, 1.0).is_err());
        assert!(GeodesicConstants::new(0.0, 1.0, 1.0).is_err());
        assert!(GeodesicConstants::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bad_integration_setup() {
        let spec = ModelSpec::uncorrelated(Mono3);
        let init = closed_form_initial_state(&spec, &GeodesicConstants::default()).unwrap();
        assert!(matches!(
            integrate_geodesic(&spec, init, 1.0, 0.0),
            Err(Error::InvalidIntegration(_))
        ));
        assert!(matches!(
            integrate_geodesic(&spec, init, -1.0, 0.1),
            Err(Error::InvalidIntegration(_))
        ));
    }

    #[test]
    fn vertical_geodesic_hits_boundary() {
        // pure sigma motion: sigma(t) = sigma0 e^{-c t}, falls under the floor
        let spec = ModelSpec::uncorrelated(Mono3);
        let init = GeodesicState {
            theta: theta(0.0, 1.0),
            velocity: [0.0, -10.0],
        };
        let err = integrate_geodesic(&spec, init, 10.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::ManifoldBoundary { .. }));
    }
}
