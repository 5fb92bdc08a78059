use serde::Serialize;
use shiftlab_core::shifts::{bayart_ruzsa_report, WeightSequence};

use crate::config::{parse_rat, ExperimentConfig};
use crate::output::write_json;
use crate::CliError;

#[derive(Debug, Serialize)]
struct CriterionVerdict {
    family: String,
    p: f64,
    horizon: u64,
    classification: String,
    partial_sum: Option<f64>,
    terms: u64,
}

pub fn build_weights(cfg: &ExperimentConfig) -> Result<Option<WeightSequence>, CliError> {
    let c = &cfg.criterion;
    match c.family.as_str() {
        "constant" => Ok(Some(WeightSequence::constant(parse_rat(&c.lambda)?))),
        "fratio" => {
            if !(c.fpow >= 1.0 && c.fpow.is_finite()) {
                return Err(CliError::Validation(format!(
                    "fratio exponent must be in [1, inf), got {}",
                    c.fpow
                )));
            }
            Ok(Some(WeightSequence::fratio(c.fpow)))
        }
        "explicit" => {
            let head = c
                .head
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(WeightSequence::explicit(head, parse_rat(&c.tail)?)))
        }
        _ => Ok(None),
    }
}

pub fn cmd_criterion(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = cfg.horizon();
    let verdict = match build_weights(cfg)? {
        Some(w) => {
            let rep = bayart_ruzsa_report(&w, cfg.criterion.p, horizon).map_err(CliError::runtime)?;
            CriterionVerdict {
                family: w.family_name(),
                p: cfg.criterion.p,
                horizon,
                classification: format!("{:?}", rep.classification),
                partial_sum: Some(rep.partial_sum),
                terms: rep.terms,
            }
        }
        // unsupported family: an Unknown verdict, not an error
        None => CriterionVerdict {
            family: cfg.criterion.family.clone(),
            p: cfg.criterion.p,
            horizon,
            classification: "Unknown".into(),
            partial_sum: None,
            terms: 0,
        },
    };
    let path = write_json(&cfg.out_dir(), "criterion.json", &verdict)?;
    println!(
        "{}: {} (partial sum {:?} over {} terms)",
        verdict.family, verdict.classification, verdict.partial_sum, verdict.terms
    );
    println!("verdict: {}", path.display());
    Ok(())
}
