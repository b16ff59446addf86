//! Ratio estimation from a sample of essential graphs.
//!
//! With the sample uniform over essential graphs, the fraction R of essential
//! DAGs in it converts the exact essential-DAG count into estimates of the
//! essential-graph/DAG ratio, and the fraction R' of essential DAGs per
//! connected sampled graph does the same for the connected variants:
//!
//!   #EGs/#DAGs   ~ (#EDAGs/#DAGs)  / R
//!   #CEGs/#CDAGs ~ (#EDAGs/#CDAGs) / R'
//!   #CEGs/#EGs   ~ connected fraction of the sample
//!
//! Point estimates are carried as exact ratios of integer tallies, so feeding
//! the complete essential-graph set reproduces exact values with zero error;
//! floats are derived views.

use num_bigint::BigUint;
use serde::Serialize;

use crate::counts::{BigCount, ExactRatio};
use crate::error::{Error, Result};
use crate::mcmc::SampleRecord;

/// Estimator knobs beyond the sampling protocol.
#[derive(Clone, Copy, Debug, Default)]
pub struct EstimatorOptions {
    /// Count only connected essential DAGs in the numerator of R'.
    ///
    /// The double-counting identity behind the connected estimate reads R'
    /// literally as "essential DAGs per connected sampled graph", so the
    /// default numerator includes disconnected essential DAGs. This switch
    /// exists for sensitivity analysis only.
    pub strict_connected_r_prime: bool,
}

/// The four ratio estimates with their ingredients and standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub sample_size: u64,
    /// Sampled essential DAGs.
    pub edag_count: u64,
    /// Sampled graphs with connected skeleton.
    pub connected_count: u64,
    /// Numerator used for r_prime (differs from edag_count only under the
    /// strict-connected option).
    pub r_prime_numerator: u64,
    /// R: essential-DAG fraction of the sample.
    pub r: f64,
    /// R': essential DAGs per connected sampled graph.
    pub r_prime: f64,
    pub est_eg_dag: f64,
    pub est_ceg_cdag: f64,
    pub est_ceg_eg: f64,
    /// Exact-rational forms of the three estimates above.
    pub est_eg_dag_exact: ExactRatio,
    pub est_ceg_cdag_exact: ExactRatio,
    pub est_ceg_eg_exact: ExactRatio,
    /// Exact #CDAGs/#DAGs, carried for table output next to the estimates.
    pub exact_cdag_dag: ExactRatio,
    /// Mean changed_fraction across chains; kernel-health diagnostic.
    pub mean_changed_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub est_n_egs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub est_n_cegs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_eg_dag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_ceg_eg: Option<f64>,
    /// Set when any tally entering a ratio numerator is below 30.
    pub low_count_warning: bool,
}

/// Integer tallies of a record sequence; order-free by construction.
fn tally(records: &[SampleRecord]) -> Result<(usize, u64, u64, u64, u64, f64)> {
    let first = records.first().ok_or(Error::EmptySample)?;
    let n = first.n;
    let mut edags = 0u64;
    let mut connected = 0u64;
    let mut connected_edags = 0u64;
    let mut changed_sum = 0.0;
    for rec in records {
        if rec.n != n {
            return Err(Error::MixedSampleN(n, rec.n));
        }
        if rec.is_edag {
            edags += 1;
        }
        if rec.is_connected {
            connected += 1;
        }
        if rec.is_edag && rec.is_connected {
            connected_edags += 1;
        }
        changed_sum += rec.changed_fraction;
    }
    let size = records.len() as u64;
    Ok((
        n,
        size,
        edags,
        connected,
        connected_edags,
        changed_sum / size as f64,
    ))
}

/// Builds the point estimates from a sample and the exact counts for its
/// node count. Fails with `DegenerateSample` when no essential DAG or no
/// connected graph was sampled, since the ratios are then undefined.
pub fn estimate(
    records: &[SampleRecord],
    edags: &BigCount,
    dags: &BigCount,
    cdags: &BigCount,
) -> Result<EstimateReport> {
    estimate_with(records, edags, dags, cdags, EstimatorOptions::default())
}

pub fn estimate_with(
    records: &[SampleRecord],
    edags: &BigCount,
    dags: &BigCount,
    cdags: &BigCount,
    options: EstimatorOptions,
) -> Result<EstimateReport> {
    let (n, size, edag_count, connected_count, connected_edags, mean_changed) = tally(records)?;
    if edag_count == 0 {
        return Err(Error::DegenerateSample(
            "no essential DAG in the sample; increase chains or steps",
        ));
    }
    if connected_count == 0 {
        return Err(Error::DegenerateSample(
            "no connected graph in the sample; increase chains or steps",
        ));
    }
    let r_prime_numerator = if options.strict_connected_r_prime {
        connected_edags
    } else {
        edag_count
    };
    if r_prime_numerator == 0 {
        return Err(Error::DegenerateSample(
            "no connected essential DAG in the sample",
        ));
    }

    // est_eg_dag = (edags/dags) / (edag_count/size) = edags*size / (dags*edag_count)
    let est_eg_dag_exact = ExactRatio::new(
        edags * BigUint::from(size),
        dags * BigUint::from(edag_count),
    );
    // est_ceg_cdag = (edags/cdags) / (numer/connected)
    let est_ceg_cdag_exact = ExactRatio::new(
        edags * BigUint::from(connected_count),
        cdags * BigUint::from(r_prime_numerator),
    );
    let est_ceg_eg_exact = ExactRatio::new(BigUint::from(connected_count), BigUint::from(size));
    let exact_cdag_dag = ExactRatio::new(cdags.clone(), dags.clone());

    Ok(EstimateReport {
        n,
        sample_size: size,
        edag_count,
        connected_count,
        r_prime_numerator,
        r: edag_count as f64 / size as f64,
        r_prime: r_prime_numerator as f64 / connected_count as f64,
        est_eg_dag: est_eg_dag_exact.to_f64(),
        est_ceg_cdag: est_ceg_cdag_exact.to_f64(),
        est_ceg_eg: est_ceg_eg_exact.to_f64(),
        est_eg_dag_exact,
        est_ceg_cdag_exact,
        est_ceg_eg_exact,
        exact_cdag_dag,
        mean_changed_fraction: mean_changed,
        est_n_egs: None,
        est_n_cegs: None,
        se_r: None,
        se_eg_dag: None,
        se_ceg_eg: None,
        low_count_warning: edag_count < 30 || connected_count < 30 || r_prime_numerator < 30,
    })
}

/// Fills the binomial/delta-method standard errors. Needs sample_size >= 2.
pub fn standard_errors(report: &EstimateReport) -> EstimateReport {
    assert!(report.sample_size >= 2, "standard errors need sample_size >= 2");
    let m = report.sample_size as f64;
    let r = report.r;
    let se_r = (r * (1.0 - r) / m).sqrt();
    let edag_dag_ratio = report.est_eg_dag * r; // (edags/dags) recovered
    let c = report.est_ceg_eg;
    let mut out = report.clone();
    out.se_r = Some(se_r);
    out.se_eg_dag = Some(edag_dag_ratio * se_r / (r * r));
    out.se_ceg_eg = Some((c * (1.0 - c) / m).sqrt());
    out
}

/// Converts the ratio estimates into approximate essential-graph counts:
/// est #EGs = est(#EGs/#DAGs) * #DAGs and est #CEGs = est(#CEGs/#EGs) * est #EGs.
pub fn approx_counts(report: &EstimateReport, dags: &BigCount) -> (f64, f64) {
    let dags_f = ExactRatio::new(dags.clone(), BigUint::from(1u32)).to_f64();
    let est_n_egs = report.est_eg_dag * dags_f;
    let est_n_cegs = report.est_ceg_eg * est_n_egs;
    (est_n_egs, est_n_cegs)
}

/// `approx_counts`, recorded into the report.
pub fn with_approx_counts(report: &EstimateReport, dags: &BigCount) -> EstimateReport {
    let (egs, cegs) = approx_counts(report, dags);
    let mut out = report.clone();
    out.est_n_egs = Some(egs);
    out.est_n_cegs = Some(cegs);
    out
}
