use serde::Serialize;
use shiftlab_core::ideals::{
    density_trace, lower_density_estimate, peak_density_estimate, rat_to_f64,
    upper_density_estimate,
};
use shiftlab_core::natset::NatSet;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::output::{write_csv, write_json};
use crate::CliError;

#[derive(Debug, Serialize)]
struct RuleSummary {
    rule: String,
    horizon: u64,
    upper: f64,
    lower: f64,
    peak: f64,
    upper_exact: String,
    lower_exact: String,
}

#[derive(Debug, Serialize)]
struct TracePoint {
    rule: String,
    n: u64,
    mu: f64,
    mu_exact: String,
}

pub fn cmd_density(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = cfg.horizon();
    let stride = match cfg.density.stride {
        0 => (horizon / 100).max(1),
        s => s,
    };
    let out = cfg.out_dir();
    let mut summaries = Vec::new();
    let mut points = Vec::new();
    for rule in &cfg.density.rules {
        let s = NatSet::parse(rule, horizon).map_err(|e| CliError::Validation(e.to_string()))?;
        let trace = density_trace(&s, horizon, stride).map_err(CliError::runtime)?;
        for (n, mu) in &trace.values {
            points.push(TracePoint {
                rule: rule.clone(),
                n: *n,
                mu: rat_to_f64(mu),
                mu_exact: mu.to_string(),
            });
        }
        let upper = upper_density_estimate(&s, horizon).map_err(CliError::runtime)?;
        let lower = lower_density_estimate(&s, horizon).map_err(CliError::runtime)?;
        let peak = peak_density_estimate(&s, horizon).map_err(CliError::runtime)?;
        summaries.push(RuleSummary {
            rule: rule.clone(),
            horizon,
            upper: rat_to_f64(&upper),
            lower: rat_to_f64(&lower),
            peak: rat_to_f64(&peak),
            upper_exact: upper.to_string(),
            lower_exact: lower.to_string(),
        });
    }
    let trace_path = match cfg.format() {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        p.rule.clone(),
                        p.n.to_string(),
                        format!("{:.12}", p.mu),
                        p.mu_exact.clone(),
                    ]
                })
                .collect();
            write_csv(&out, "density_trace.csv", &["rule", "n", "mu", "mu_exact"], &rows)?
        }
        OutputFormat::Json => write_json(&out, "density_trace.json", &points)?,
    };
    let summary_path = write_json(&out, "density_summary.json", &summaries)?;
    for s in &summaries {
        println!(
            "{}: upper {:.6} lower {:.6} peak {:.6} (exact upper {})",
            s.rule, s.upper, s.lower, s.peak, s.upper_exact
        );
    }
    println!("trace: {}", trace_path.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}
