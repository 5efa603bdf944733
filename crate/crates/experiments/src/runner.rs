//! Seeded Monte-Carlo trials and aggregation into result rows.
//!
//! Trial `t` draws from a ChaCha8 stream keyed by `(seed, t)`, so results do
//! not depend on thread scheduling and every sweep value sees the same random
//! numbers.

use std::collections::BTreeMap;
use std::time::Instant;

use aod_precoder::{
    aeb, alt_opt_ls_admm, deg, design_digital_precoder, quant_bound_factor, random_power_normalized,
    verify_quantization_bound, AllocationConfig, AltOptConfig, ChannelState, Complex, Diagnostics, DigitalDesign,
    Error as CoreError, Factors, Geometry, Matrix, OutputPairing, QuantBoundRow, QuantizerSpec, State,
    UncertaintySet,
};
use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Scenario, SweepPoint, SweepVar};
use crate::error::{ExperimentError, Result};

pub const METHOD_DIGITAL: &str = "digital";
pub const METHOD_HYBRID: &str = "hybrid";
pub const METHOD_PROPOSED: &str = "proposed";

/// One aggregated CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_name: String,
    pub sweep_value: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub sweep_name: String,
    pub sweep_value: String,
    pub wall_time_ms: f64,
}

/// Per-trial values behind the aggregated rows, keyed by method then metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_value: String,
    pub trial: usize,
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<Diagnostics<f64>>,
}

impl TrialRecord {
    fn new(sweep_value: &str, trial: usize) -> Self {
        Self {
            sweep_value: sweep_value.to_string(),
            trial,
            values: BTreeMap::new(),
            diagnostics: Vec::new(),
        }
    }

    fn put(&mut self, method: &str, metric: impl Into<String>, value: f64) {
        self.values.entry(method.to_string()).or_default().insert(metric.into(), value);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub timing: Vec<TimingRow>,
    pub trials: Vec<TrialRecord>,
    /// Mean bound table, filled by the quantization-bound scenario.
    pub bounds: Vec<QuantBoundRow>,
    /// Failed internal checks; the caller reports them after writing outputs.
    pub violations: Vec<String>,
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Sample mean and standard deviation (n - 1 denominator, zero for one sample).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    info!(
        "{} sweep over {} with {} trials, seed {}",
        cfg.scenario.name(),
        cfg.sweep_name(),
        cfg.trials,
        cfg.seed
    );
    match cfg.scenario {
        Scenario::Decomp => run_points(cfg, decomp_trial),
        Scenario::Aeb => run_aeb(cfg),
        Scenario::Quantbound => run_quantbound(cfg),
    }
}

fn alt_opt_config(cfg: &ExperimentConfig, seed: u64) -> AltOptConfig {
    AltOptConfig {
        i_max: cfg.i_max,
        k_max: cfg.k_max,
        seed,
        pairing: cfg.pairing,
        ..AltOptConfig::default()
    }
}

/// Runs the factorization and checks feasibility and, for refitted output, power.
fn decompose(
    f_opt: &Matrix,
    n_rf: usize,
    power: f64,
    bits: QuantizerSpec,
    cfg: &AltOptConfig,
) -> std::result::Result<(Factors, Diagnostics<f64>), ExperimentError> {
    let (factors, diag) = alt_opt_ls_admm(f_opt, n_rf, power, bits, cfg)?;
    let n_tx = f_opt.rows();
    if !bits.is_feasible(&factors.f_rf, n_tx, 1e-9) {
        return Err(ExperimentError::Assertion(format!("F_RF violates the {bits}-bit phase constraint")));
    }
    if cfg.pairing == OutputPairing::Refit && ((factors.power() - power) / power).abs() > 1e-6 {
        return Err(ExperimentError::Assertion(format!(
            "hybrid power {} differs from P = {power}",
            factors.power()
        )));
    }
    Ok((factors, diag))
}

fn aggregate(cfg: &ExperimentConfig, label: &str, records: &[TrialRecord]) -> Vec<ResultRow> {
    let mut series: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in records {
        for (method, metrics) in &r.values {
            for (metric, &v) in metrics {
                series.entry((method, metric)).or_default().push(v);
            }
        }
    }
    series
        .into_iter()
        .map(|((method, metric), values)| {
            let (mean, std) = mean_std(&values);
            ResultRow {
                sweep_name: cfg.sweep_name().to_string(),
                sweep_value: label.to_string(),
                method: method.to_string(),
                metric: metric.to_string(),
                mean,
                std,
                trials: values.len(),
                seed: cfg.seed,
            }
        })
        .collect()
}

fn run_points<F>(cfg: &ExperimentConfig, trial_fn: F) -> Result<RunOutput>
where
    F: Fn(&ExperimentConfig, &SweepPoint, usize) -> Result<TrialRecord> + Sync,
{
    let mut out = RunOutput::default();
    for point in cfg.points()? {
        let start = Instant::now();
        let records = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial_fn(cfg, &point, t))
            .collect::<Result<Vec<_>>>()?;
        finish_point(cfg, &point.label, records, start, &mut out);
    }
    Ok(out)
}

fn finish_point(cfg: &ExperimentConfig, label: &str, records: Vec<TrialRecord>, start: Instant, out: &mut RunOutput) {
    out.rows.extend(aggregate(cfg, label, &records));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    debug!("{} = {label}: {} trials in {ms:.1} ms", cfg.sweep_name(), records.len());
    out.timing.push(TimingRow {
        sweep_name: cfg.sweep_name().to_string(),
        sweep_value: label.to_string(),
        wall_time_ms: ms,
    });
    out.trials.extend(records);
}

fn decomp_trial(cfg: &ExperimentConfig, point: &SweepPoint, t: usize) -> Result<TrialRecord> {
    let power = cfg.power();
    let mut rng = trial_rng(cfg.seed, t);
    let f_opt: Matrix = random_power_normalized(point.n_tx, cfg.m_pilots, power, &mut rng);
    let alt = alt_opt_config(cfg, rng.gen());
    let (_, diag) = decompose(&f_opt, point.n_rf, power, point.bits, &alt)?;
    let mut rec = TrialRecord::new(&point.label, t);
    rec.put(METHOD_PROPOSED, "decp_err", diag.final_decp_err());
    rec.put(METHOD_PROPOSED, "decp_err_listing", diag.listing_decp_err);
    rec.put(METHOD_PROPOSED, "draws", diag.draws as f64);
    if cfg.diagnostics {
        rec.diagnostics.push(diag);
    }
    Ok(rec)
}

/// Uncertainty sets of each digital design: one per UE, plus a joint one for several UEs.
pub fn designs(cfg: &ExperimentConfig) -> Result<Vec<(String, Vec<UncertaintySet<f64>>)>> {
    let sets = cfg
        .ue_angles
        .iter()
        .map(|&c| UncertaintySet::new(deg(c), cfg.half_width()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut out: Vec<_> = sets
        .iter()
        .enumerate()
        .map(|(i, s)| (format!("ue{}", i + 1), vec![*s]))
        .collect();
    match sets.len() {
        1 => {}
        2 => out.push(("both".into(), sets)),
        _ => out.push(("all".into(), sets)),
    }
    Ok(out)
}

pub fn nominal_state(cfg: &ExperimentConfig, n_tx: usize) -> Result<State> {
    let geom = Geometry::half_wavelength(n_tx)?;
    Ok(ChannelState::new(0.0, Complex::new(cfg.beta, 0.0), cfg.sigma_n(), 1.0, geom)?)
}

/// Angles (degrees) at which the bound is reported for a sweep point.
fn evaluation_angles(cfg: &ExperimentConfig, point: &SweepPoint) -> Vec<f64> {
    if cfg.ue_angles.len() > 1 && cfg.sweep != Some(SweepVar::Aod) {
        cfg.ue_angles.clone()
    } else {
        point.aod_deg.clone()
    }
}

pub fn aeb_metric(design: &str, angle_deg: f64) -> String {
    format!("aeb_{design}_at_{angle_deg}")
}

/// Bound at `theta_deg`; degenerate precoders give infinity rather than an error.
pub fn aeb_at(f: &Matrix, nominal: &State, theta_deg: f64) -> Result<f64> {
    match aeb(f, &nominal.at_angle(deg(theta_deg))) {
        Ok(v) => Ok(v),
        Err(CoreError::DegenerateBound(_) | CoreError::SingularFim) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

fn run_aeb(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let power = cfg.power();
    let mut out = RunOutput::default();
    for point in cfg.points()? {
        let start = Instant::now();
        let nominal = nominal_state(cfg, point.n_tx)?;
        let angles = evaluation_angles(cfg, &point);
        let mut built: Vec<(String, DigitalDesign<f64>, Vec<f64>)> = Vec::new();
        for (name, sets) in designs(cfg)? {
            let design = design_digital_precoder(&nominal, &sets, cfg.m_pilots, power, &AllocationConfig::default())?;
            let digital = angles
                .iter()
                .map(|&a| aeb_at(&design.f_opt, &nominal, a))
                .collect::<Result<Vec<_>>>()?;
            built.push((name, design, digital));
        }
        let records = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                let mut rec = TrialRecord::new(&point.label, t);
                for (name, design, digital) in &built {
                    let alt = alt_opt_config(cfg, rng.gen());
                    let (factors, diag) = decompose(&design.f_opt, point.n_rf, power, point.bits, &alt)?;
                    let hybrid = factors.product();
                    for (&a, &d) in angles.iter().zip(digital) {
                        let metric = aeb_metric(name, a);
                        let h = aeb_at(&hybrid, &nominal, a)?;
                        rec.put(METHOD_DIGITAL, metric.clone(), d);
                        rec.put(METHOD_HYBRID, metric.clone(), h);
                        if !d.is_finite() || !h.is_finite() {
                            rec.put(METHOD_HYBRID, format!("{metric}_degenerate"), 1.0);
                        }
                    }
                    rec.put(METHOD_HYBRID, format!("decp_err_{name}"), diag.final_decp_err());
                    if cfg.diagnostics {
                        rec.diagnostics.push(diag);
                    }
                }
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()?;
        finish_point(cfg, &point.label, records, start, &mut out);
    }
    Ok(out)
}

/// Resolutions checked by the bound scenario: the sweep values, or 1 to 8 bits.
pub fn bound_resolutions(cfg: &ExperimentConfig) -> Result<Vec<(String, QuantizerSpec)>> {
    if cfg.sweep == Some(SweepVar::Bits) {
        Ok(cfg.points()?.into_iter().map(|p| (p.label, p.bits)).collect())
    } else {
        Ok((1..=8).map(|b| (b.to_string(), QuantizerSpec::Finite(b))).collect())
    }
}

fn run_quantbound(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let power = cfg.power();
    let resolutions = bound_resolutions(cfg)?;
    let start = Instant::now();
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let f_opt: Matrix = random_power_normalized(cfg.n_tx, cfg.m_pilots, power, &mut rng);
            let alt = alt_opt_config(cfg, rng.gen());
            let (star, _) = decompose(&f_opt, cfg.n_rf, power, QuantizerSpec::Infinite, &alt)?;
            let mut records = Vec::with_capacity(resolutions.len());
            let mut violations = Vec::new();
            for (label, spec) in &resolutions {
                let mut rec = TrialRecord::new(label, t);
                match verify_quantization_bound(&f_opt, &star.f_rf, &star.f_bb, *spec) {
                    Ok(rep) => {
                        for (metric, v) in [
                            ("factor", rep.factor),
                            ("C", rep.c),
                            ("true_error", rep.true_error),
                            ("quantized_error", rep.quantized_error),
                            ("decp_ub", rep.decp_ub),
                            ("relative_gap", rep.relative_gap()),
                            ("bound_holds", 1.0),
                        ] {
                            rec.put(METHOD_PROPOSED, metric, v);
                        }
                    }
                    Err(CoreError::BoundViolation { excess, allowance }) => {
                        rec.put(METHOD_PROPOSED, "bound_holds", 0.0);
                        violations.push(format!(
                            "trial {t}, B = {label}: error grew by {excess:e}, bound allows {allowance:e}"
                        ));
                    }
                    Err(e) => return Err(e.into()),
                }
                records.push(rec);
            }
            Ok((records, violations))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = RunOutput::default();
    let mut by_label: Vec<Vec<TrialRecord>> = vec![Vec::new(); resolutions.len()];
    for (records, violations) in per_trial {
        for (slot, rec) in by_label.iter_mut().zip(records) {
            slot.push(rec);
        }
        out.violations.extend(violations);
    }
    for ((label, spec), records) in resolutions.iter().zip(&by_label) {
        let rows = aggregate(cfg, label, records);
        let mean_of = |m: &str| rows.iter().find(|r| r.metric == m).map_or(f64::NAN, |r| r.mean);
        out.bounds.push(QuantBoundRow {
            bits: spec.to_string(),
            factor: quant_bound_factor(*spec),
            c: mean_of("C"),
            true_error: mean_of("true_error"),
            decp_ub: mean_of("decp_ub"),
        });
        out.rows.extend(rows);
    }
    for row in &mut out.rows {
        row.sweep_name = SweepVar::Bits.name().to_string();
    }
    out.timing.push(TimingRow {
        sweep_name: SweepVar::Bits.name().to_string(),
        sweep_value: "all".into(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    out.trials = by_label.into_iter().flatten().collect();
    Ok(out)
}

/// One-shot design and factorization at the first sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignDump {
    pub config: ExperimentConfig,
    pub power_w: f64,
    pub sigma_n: f64,
    pub n_tx: usize,
    pub n_rf: usize,
    pub bits: QuantizerSpec,
    pub grid_angles_deg: Vec<Vec<f64>>,
    pub power_weights: Vec<f64>,
    pub max_aeb: f64,
    pub uniform_max_aeb: f64,
    pub allocation_iterations: usize,
    pub f_opt: Matrix,
    pub f_rf: Matrix,
    pub f_bb: Matrix,
    pub diagnostics: Diagnostics<f64>,
    pub aeb: Vec<AngleBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleBound {
    pub angle_deg: f64,
    pub digital: f64,
    pub hybrid: f64,
}

pub fn run_design(cfg: &ExperimentConfig) -> Result<DesignDump> {
    let cfg = ExperimentConfig {
        scenario: Scenario::Aeb,
        ..cfg.clone()
    };
    cfg.validate()?;
    let point = cfg.points()?.remove(0);
    let power = cfg.power();
    let nominal = nominal_state(&cfg, point.n_tx)?;
    let (_, sets) = designs(&cfg)?.pop().expect("at least one design");
    let design = design_digital_precoder(&nominal, &sets, cfg.m_pilots, power, &AllocationConfig::default())?;
    let mut rng = trial_rng(cfg.seed, 0);
    let alt = alt_opt_config(&cfg, rng.gen());
    let (factors, diagnostics) = decompose(&design.f_opt, point.n_rf, power, point.bits, &alt)?;
    let hybrid = factors.product();
    let mut angles = cfg.ue_angles.clone();
    angles.extend(point.aod_deg.iter().filter(|a| !cfg.ue_angles.contains(a)));
    let aeb = angles
        .iter()
        .map(|&a| {
            Ok(AngleBound {
                angle_deg: a,
                digital: aeb_at(&design.f_opt, &nominal, a)?,
                hybrid: aeb_at(&hybrid, &nominal, a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignDump {
        power_w: power,
        sigma_n: cfg.sigma_n(),
        n_tx: point.n_tx,
        n_rf: point.n_rf,
        bits: point.bits,
        grid_angles_deg: design
            .codebook
            .grid_angles
            .iter()
            .map(|g| g.iter().map(|t| t.to_degrees()).collect())
            .collect(),
        power_weights: design.report.allocation.q.clone(),
        max_aeb: design.report.max_aeb,
        uniform_max_aeb: design.report.uniform_max_aeb,
        allocation_iterations: design.report.iterations,
        f_opt: design.f_opt,
        f_rf: factors.f_rf,
        f_bb: factors.f_bb,
        diagnostics,
        aeb,
        config: cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepValue;

    fn small(scenario: Scenario) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            n_tx: 6,
            n_rf: 3,
            m_pilots: 4,
            trials: 3,
            i_max: 3,
            k_max: 10,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn trial_streams_are_distinct_and_repeatable() {
        let a: u64 = trial_rng(1, 0).gen();
        let b: u64 = trial_rng(1, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(1, 0).gen::<u64>());
    }

    #[test]
    fn decomp_rows_and_archive_agree() {
        let cfg = ExperimentConfig {
            sweep: Some(SweepVar::NRf),
            values: vec![SweepValue::Int(2), SweepValue::Int(6)],
            ..small(Scenario::Decomp)
        };
        let out = run(&cfg).unwrap();
        assert_eq!(out.timing.len(), 2);
        assert_eq!(out.trials.len(), 6);
        for row in &out.rows {
            assert_eq!(row.trials, 3);
            assert!(row.std >= 0.0);
            let values: Vec<f64> = out
                .trials
                .iter()
                .filter(|t| t.sweep_value == row.sweep_value)
                .map(|t| t.values[&row.method][&row.metric])
                .collect();
            let (m, s) = mean_std(&values);
            assert_eq!((m, s), (row.mean, row.std));
        }
        let square = out.rows.iter().find(|r| r.sweep_value == "6" && r.metric == "decp_err").unwrap();
        assert!(square.mean < 1e-9);
    }

    #[test]
    fn aeb_rows_cover_designs_and_angles() {
        let cfg = ExperimentConfig {
            ue_angles: vec![0.0, 40.0],
            ..small(Scenario::Aeb)
        };
        let out = run(&cfg).unwrap();
        for design in ["ue1", "ue2", "both"] {
            for angle in [0.0, 40.0] {
                let metric = aeb_metric(design, angle);
                for method in [METHOD_DIGITAL, METHOD_HYBRID] {
                    let row = out.rows.iter().find(|r| r.metric == metric && r.method == method);
                    assert!(row.is_some(), "{method} {metric}");
                }
            }
        }
        let digital = out.rows.iter().find(|r| r.method == METHOD_DIGITAL).unwrap();
        assert_eq!(digital.std, 0.0);
    }

    #[test]
    fn bound_rows_hold() {
        let cfg = small(Scenario::Quantbound);
        let out = run(&cfg).unwrap();
        assert!(out.violations.is_empty());
        assert_eq!(out.bounds.len(), 8);
        assert!(out.rows.iter().filter(|r| r.metric == "bound_holds").all(|r| r.mean == 1.0));
    }

    #[test]
    fn design_dump_is_consistent() {
        let cfg = ExperimentConfig {
            n_tx: 8,
            n_rf: 4,
            m_pilots: 4,
            ..Default::default()
        };
        let dump = run_design(&cfg).unwrap();
        assert_eq!(dump.f_opt.shape(), (8, 4));
        assert_eq!(dump.f_rf.shape(), (8, 4));
        assert!((dump.f_opt.frobenius_norm_sq() - 0.01).abs() < 1e-12);
        assert_eq!(dump.aeb.len(), 1);
        assert!(dump.aeb[0].hybrid >= dump.aeb[0].digital * 0.5);
    }
}
