use std::io::Write;

use igc_core::complexity::{
    amplification_ratio, asymptotic_coefficient, closed_form_ratio, complexity_report, ratio_curve, reference_notes,
    ComplexityReport, GrowthLaw, RatioCurve, ReferenceNote, VolumeMode,
};
use igc_core::geodesics::{
    closed_form_geodesic, closed_form_initial_state, cyclic_momentum, geodesic_residual, integrate_geodesic,
    speed_squared, GeodesicConstants,
};
use igc_core::geometry::{
    curvature_constancy, fisher_closed_form, fisher_numeric, metric_coefficients, sectional_curvature,
};
use igc_core::{CorrelationStructure, Error as CoreError, ModelSpec, ThetaPoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RhoSpec, RunConfig};
use crate::error::CliError;
use crate::output::{emit, num, opt, write_json, write_table, Table};

/// Specs for `s`. With an explicit `--structure` every requested `rho` must
/// be admissible; when sweeping all structures, inadmissible values are
/// skipped and the uncorrelated structures get `rho = 0`.
fn specs_for(config: &RunConfig, s: CorrelationStructure) -> Result<Vec<ModelSpec>, CliError> {
    let strict = config.structure.is_some();
    if !strict && !s.is_correlated() {
        return Ok(vec![ModelSpec::uncorrelated(s)]);
    }
    let mut out = Vec::new();
    for rho in config.rhos_for(s) {
        match ModelSpec::new(s, rho) {
            Ok(spec) => out.push(spec),
            Err(e) if strict => return Err(e.into()),
            Err(_) => {}
        }
    }
    Ok(out)
}

fn all_specs(config: &RunConfig) -> Result<Vec<ModelSpec>, CliError> {
    let mut out = Vec::new();
    for s in config.structures() {
        out.extend(specs_for(config, s)?);
    }
    Ok(out)
}

fn is_json(config: &RunConfig) -> bool {
    config.format == Some(Format::Json)
}

fn rows_par<T: Sync, F>(items: &[T], f: F) -> Result<Vec<Vec<String>>, CliError>
where
    F: Fn(&T) -> Result<Vec<String>, CliError> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

pub fn metric(config: &RunConfig) -> Result<(), CliError> {
    let mut points = Vec::new();
    for spec in all_specs(config)? {
        for &sigma in &config.sigma {
            points.push((spec, ThetaPoint::new(config.mu, sigma)?));
        }
    }
    let mut table = Table::new(&[
        "structure",
        "rho",
        "mu",
        "sigma",
        "g11",
        "g12",
        "g22",
        "g11_numeric",
        "g12_numeric",
        "g22_numeric",
        "max_relative_difference",
        "K",
    ]);
    let rows = rows_par(&points, |(spec, theta)| {
        let closed = fisher_closed_form(spec, *theta);
        let numeric = fisher_numeric(spec, *theta)?;
        let k = sectional_curvature(spec, *theta)?.sectional;
        let two = closed.dim() == 2;
        let cell = |g: &igc_core::geometry::MetricTensor, i: usize, j: usize| {
            if two || (i == 0 && j == 0) {
                num(g.get(i, j))
            } else {
                String::new()
            }
        };
        Ok(vec![
            spec.structure().to_string(),
            num(spec.rho()),
            num(theta.mu()),
            num(theta.sigma()),
            cell(&closed, 0, 0),
            cell(&closed, 0, 1),
            cell(&closed, 1, 1),
            cell(&numeric, 0, 0),
            cell(&numeric, 0, 1),
            cell(&numeric, 1, 1),
            num(numeric.max_relative_difference(&closed)),
            num(k),
        ])
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    emit(config.out.as_deref(), |w| write_table(w, &table, is_json(config)))
}

pub fn curvature(config: &RunConfig) -> Result<(), CliError> {
    let mut points = Vec::new();
    for spec in all_specs(config)? {
        for &sigma in &config.sigma {
            points.push((spec, ThetaPoint::new(config.mu, sigma)?));
        }
    }
    let mut table = Table::new(&[
        "structure",
        "rho",
        "mu",
        "sigma",
        "K",
        "R_1212",
        "antisymmetry_first_pair",
        "antisymmetry_second_pair",
        "flat",
        "K_other_point",
        "K_difference",
    ]);
    let rows = rows_par(&points, |(spec, theta)| {
        let r = sectional_curvature(spec, *theta)?;
        let (a, b) = r.antisymmetry_defects();
        // constancy diagnostic against a second, well separated point
        let other = ThetaPoint::new(theta.mu() + 1.0, 2.0 * theta.sigma())?;
        let c = curvature_constancy(spec, *theta, other)?;
        Ok(vec![
            spec.structure().to_string(),
            num(spec.rho()),
            num(theta.mu()),
            num(theta.sigma()),
            num(r.sectional),
            num(r.riemann[0][1][0][1]),
            num(a),
            num(b),
            r.flat_one_dimensional.to_string(),
            num(c.second),
            num(c.difference),
        ])
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    emit(config.out.as_deref(), |w| write_table(w, &table, is_json(config)))
}

fn single_spec(config: &RunConfig, default: CorrelationStructure) -> Result<ModelSpec, CliError> {
    let s = config.structure.unwrap_or(default);
    let rho = match &config.rho {
        RhoSpec::List(list) if list.len() == 1 => list[0],
        RhoSpec::List(_) => return Err(CliError::Config("this command takes a single --rho value".into())),
        RhoSpec::Grid { .. } => 0.0,
    };
    Ok(ModelSpec::new(s, rho)?)
}

pub fn geodesic(config: &RunConfig) -> Result<(), CliError> {
    let spec = single_spec(config, CorrelationStructure::Mono3)?;
    let c = &config.constants;
    let init = closed_form_initial_state(&spec, c)?;
    let traj = integrate_geodesic(&spec, init, config.tau, config.step)?;

    let mut table = Table::new(&[
        "tau",
        "mu_numeric",
        "sigma_numeric",
        "mu_closed",
        "sigma_closed",
        "speed",
        "conserved_momentum",
    ]);
    let last = traj.len() - 1;
    let mut sampled = Vec::new();
    for i in (0..traj.len()).filter(|&i| i % config.stride == 0 || i == last) {
        let (t, p, v) = (traj.times[i], traj.points[i], traj.velocities[i]);
        let closed = closed_form_geodesic(&spec, c, t)?;
        sampled.push(t);
        table.push(vec![
            num(t),
            num(p.mu()),
            num(p.sigma()),
            num(closed.mu()),
            num(closed.sigma()),
            num(speed_squared(&spec, p, v).sqrt()),
            opt(cyclic_momentum(&spec, p, v)),
        ]);
    }
    table.footer("max_residual", num(geodesic_residual(&spec, c, &sampled)?));
    table.footer("max_deviation", num(traj.max_deviation(&spec, c)?));
    table.footer("speed_drift", num(traj.speed_drift(&spec)));
    table.footer("momentum_drift", opt(traj.momentum_drift(&spec)));
    emit(config.out.as_deref(), |w| write_table(w, &table, is_json(config)))
}

pub fn igc(config: &RunConfig) -> Result<(), CliError> {
    let specs = all_specs(config)?;
    let reports = specs
        .par_iter()
        .map(|spec| complexity_report(spec, &config.constants, config.mode, &[config.tau]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "structure",
        "rho",
        "growth",
        "decay_rate",
        "coefficient",
        "reference_coefficient",
        "exponent",
        "plateau_variation",
        "plateau_passed",
        "igc_at_tau",
    ]);
    let mut failures = 0;
    for r in &reports {
        let (growth, coefficient) = match r.growth {
            GrowthLaw::InverseTime { coefficient } => ("inverse_time", coefficient),
            GrowthLaw::Linear { slope } => ("linear", slope),
        };
        failures += usize::from(!r.plateau_passed);
        table.push(vec![
            r.spec.structure().to_string(),
            num(r.spec.rho()),
            growth.to_string(),
            opt(r.decay_rate),
            num(coefficient),
            opt(r.reference_coefficient),
            num(r.exponent),
            opt(r.plateau_variation),
            r.plateau_passed.to_string(),
            opt(r.igc.first().map(|p| p.1)),
        ]);
    }
    emit(config.out.as_deref(), |w| write_table(w, &table, is_json(config)))?;
    if failures > 0 {
        return Err(CliError::Diagnostic(format!("{failures} plateau test(s) failed")));
    }
    Ok(())
}

type Cell = (Option<f64>, Option<f64>, bool);

pub fn figure1(config: &RunConfig) -> Result<(), CliError> {
    let structures = CorrelationStructure::CORRELATED;
    let rhos = config.union_rhos(&structures);
    let c = &config.constants;
    let bases: Vec<Result<f64, CoreError>> = structures
        .par_iter()
        .map(|&s| asymptotic_coefficient(&ModelSpec::uncorrelated(s), c, config.mode))
        .collect();

    // (closed form, fitted, fit failed) per structure
    let cells: Vec<Vec<Cell>> = rhos
        .par_iter()
        .map(|&rho| {
            structures
                .iter()
                .zip(&bases)
                .map(|(&s, base)| match ModelSpec::new(s, rho) {
                    Err(_) => (None, None, false),
                    Ok(spec) => {
                        let closed = closed_form_ratio(s, rho).ok();
                        let fit = match base {
                            Ok(b) => asymptotic_coefficient(&spec, c, config.mode).ok().map(|v| v / b),
                            Err(_) => None,
                        };
                        (closed, fit, fit.is_none())
                    }
                })
                .collect()
        })
        .collect();

    let mut header = vec!["rho".to_string()];
    for s in structures {
        header.push(format!("R_{}", s.name().replace('-', "_")));
    }
    for s in structures {
        header.push(format!("R_{}_fit", s.name().replace('-', "_")));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    let mut failures = 0;
    for (rho, row) in rhos.iter().zip(&cells) {
        let mut out = vec![num(*rho)];
        out.extend(row.iter().map(|c| opt(c.0)));
        out.extend(row.iter().map(|c| opt(c.1)));
        failures += row.iter().filter(|c| c.2).count();
        table.push(out);
    }
    emit(config.out.as_deref(), |w| write_table(w, &table, is_json(config)))?;
    if failures > 0 {
        return Err(CliError::Diagnostic(format!(
            "{failures} fitted ratio(s) failed the plateau test"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationSample {
    pub rho: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub structure: CorrelationStructure,
    pub metric_coefficients: Option<(f64, f64)>,
    pub complexity: Vec<ComplexityReport>,
    pub ratio_curve: Option<RatioCurve>,
    pub amplification: Option<Vec<AmplificationSample>>,
    pub reference_notes: Vec<ReferenceNote>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: VolumeMode,
    pub constants: GeodesicConstants,
    pub tau: f64,
    pub structures: Vec<StructureReport>,
}

impl Report {
    pub fn failed_diagnostics(&self) -> usize {
        self.structures.iter().map(|s| s.diagnostics.len()).sum()
    }
}

fn structure_report(config: &RunConfig, s: CorrelationStructure) -> Result<StructureReport, CliError> {
    let c = &config.constants;
    let explicit = matches!(config.rho, RhoSpec::List(_));
    let specs = if explicit || !s.is_correlated() {
        specs_for(config, s)?
    } else {
        vec![ModelSpec::uncorrelated(s)]
    };
    let taus = igc_core::model::linspace(0.0, config.tau, 11);
    let mut diagnostics = Vec::new();
    let mut complexity = Vec::new();
    for spec in &specs {
        let r = complexity_report(spec, c, config.mode, &taus)?;
        if !r.plateau_passed {
            diagnostics.push(format!(
                "{spec}: plateau test failed (variation {:e})",
                r.plateau_variation.unwrap_or(f64::NAN)
            ));
        }
        complexity.push(r);
    }

    let ratio = if s.is_correlated() {
        let rhos: Vec<f64> = specs_for(config, s)?.iter().map(|p| p.rho()).collect();
        match ratio_curve(s, &rhos, c, config.mode) {
            Ok(curve) => Some(curve),
            Err(e @ CoreError::PlateauFailure { .. }) => {
                diagnostics.push(format!("ratio curve: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let amplification = match (s, &ratio) {
        (CorrelationStructure::TrivariateStrong, Some(curve)) => Some(
            curve
                .samples
                .iter()
                .filter_map(|p| {
                    amplification_ratio(p.rho)
                        .ok()
                        .map(|value| AmplificationSample { rho: p.rho, value })
                })
                .collect(),
        ),
        _ => None,
    };

    let first = specs.first().copied().unwrap_or(ModelSpec::uncorrelated(s));
    Ok(StructureReport {
        structure: s,
        metric_coefficients: metric_coefficients(&first).ok(),
        complexity,
        ratio_curve: ratio,
        amplification,
        reference_notes: reference_notes(&first, c)?,
        diagnostics,
    })
}

pub fn build_report(config: &RunConfig) -> Result<Report, CliError> {
    let structures = config
        .structures()
        .par_iter()
        .map(|&s| structure_report(config, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        mode: config.mode,
        constants: config.constants,
        tau: config.tau,
        structures,
    })
}

pub fn report(config: &RunConfig) -> Result<(), CliError> {
    if config.format == Some(Format::Csv) {
        return Err(CliError::Config("report is emitted as JSON only".into()));
    }
    let r = build_report(config)?;
    emit(config.out.as_deref(), |w: &mut dyn Write| write_json(w, &r))?;
    match r.failed_diagnostics() {
        0 => Ok(()),
        n => Err(CliError::Diagnostic(format!("{n} convergence diagnostic(s) failed"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CommonArgs;

    fn config(structure: CorrelationStructure, rho: Vec<f64>) -> RunConfig {
        RunConfig::resolve(CommonArgs {
            structure: Some(structure),
            rho: Some(rho),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = build_report(&config(CorrelationStructure::TrivariateStrong, vec![-0.2, 0.0, 0.3])).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn mono1_report_is_linear() {
        let r = build_report(&config(CorrelationStructure::Mono1, vec![0.0])).unwrap();
        let c = &r.structures[0].complexity[0];
        match c.growth {
            GrowthLaw::Linear { slope } => assert!((slope - 0.5).abs() < 1e-9),
            g => panic!("{g:?}"),
        }
    }

    #[test]
    fn strict_structure_rejects_inadmissible_rho() {
        let cfg = config(CorrelationStructure::TrivariateMildlyWeak, vec![0.71]);
        let err = specs_for(&cfg, CorrelationStructure::TrivariateMildlyWeak).unwrap_err();
        assert!(matches!(err, CliError::Core(CoreError::InadmissibleRho { .. })));
    }
}
