//! Builder for a block vector whose orbit hits every scheduled target
//! cylinder exactly, on an arithmetic progression of positive lower density.
//!
//! Target i's rescaled copy is planted at positions o_i + k*P (o_i = i*G,
//! P = T*G): the block at start n carries y_{n+l} = s_l / (w_{1+l}...w_{n+l}),
//! so (T^n y)_l = s_l exactly for l below the support length, and every
//! later block contributes at most S_max * growth^{-G} to any coordinate.
//! Requires the summability certificate for the weight rule; without it no
//! such vector exists in the space.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::dyadic::{Dyadic, Rat};
use crate::error::{Error, Result};
use crate::ideals::rat_to_f64;
use crate::natset::NatSet;
use crate::shifts::{
    bayart_ruzsa_report, Block, BlockValues, NormCertificate, SeqVector, SeriesClass, Space,
    WeightRule, WeightSequence,
};

#[derive(Debug, Clone, Serialize)]
pub struct FhcSchedule {
    /// target values, trailing zeros trimmed
    pub targets: Vec<Vec<Rat>>,
    /// spacing between consecutive targets' block starts
    pub gap: u64,
    /// period of each target's progression: targets.len() * gap
    pub period: u64,
    pub p: f64,
}

impl FhcSchedule {
    pub fn offset(&self, i: usize) -> u64 {
        i as u64 * self.gap
    }

    /// The progression of block starts for target i; a guaranteed subset of
    /// the visit set of target i's cylinder.
    pub fn progression(&self, i: usize, horizon: u64) -> NatSet {
        NatSet::arithmetic(self.offset(i), self.period, horizon)
    }

    /// Exact lower density of each progression.
    pub fn certified_lower_density(&self) -> Rat {
        Rat::new(1.into(), (self.period as i64).into())
    }

    pub fn prefix_len(&self, i: usize) -> u64 {
        self.targets[i].len().max(1) as u64
    }
}

fn effective_growth(w: &WeightSequence) -> Option<Rat> {
    match &w.rule {
        WeightRule::Constant(l) if l.abs() > Rat::one() => Some(l.abs()),
        WeightRule::Explicit { tail, .. } if tail.abs() > Rat::one() => Some(tail.abs()),
        _ => None,
    }
}

/// Plans block placement for the given targets. `epsilon` is the smallest
/// cylinder radius the schedule must serve: the gap is sized so that at a
/// scheduled visit every coordinate outside the exact-hit prefix stays
/// strictly below it.
pub fn fhc_schedule(
    w: &WeightSequence,
    p: f64,
    targets: Vec<Vec<Rat>>,
    epsilon: &Rat,
) -> Result<FhcSchedule> {
    let report = bayart_ruzsa_report(w, p, 64)?;
    if report.classification != SeriesClass::Convergent {
        return Err(Error::NoFhcCertificate(format!(
            "{:?} for {}",
            report.classification,
            w.family_name()
        )));
    }
    if !w.all_at_least_one() {
        return Err(Error::WeightBelowOne(0));
    }
    let growth = effective_growth(w).ok_or_else(|| {
        Error::NoFhcCertificate(format!("no growth bound for {}", w.family_name()))
    })?;
    assert!(*epsilon > Rat::zero());
    let m_max = targets.iter().map(|t| t.len() as u64).max().unwrap_or(0).max(1);
    let s_max = targets
        .iter()
        .flatten()
        .map(|v| rat_to_f64(&v.abs()))
        .fold(1.0f64, f64::max);
    let log_growth = rat_to_f64(&growth).log2();
    let tail_gap = ((s_max / rat_to_f64(epsilon)).log2() / log_growth).ceil() as u64 + 1;
    let gap = (m_max + 1).max(tail_gap);
    let period = targets.len() as u64 * gap;
    Ok(FhcSchedule {
        targets,
        gap,
        period,
        p,
    })
}

/// Materializes the scheduled vector up to `horizon` with exact dyadic
/// coordinates and a geometric-tail norm certificate.
pub fn fhc_vector(w: &WeightSequence, sched: &FhcSchedule, horizon: u64) -> Result<SeqVector> {
    let growth = effective_growth(w).ok_or(Error::NotExact)?;
    let mut blocks = Vec::new();
    for (i, target) in sched.targets.iter().enumerate() {
        if target.is_empty() {
            continue; // the zero target: its blocks are identically zero
        }
        let mut start = sched.offset(i);
        while start + target.len() as u64 - 1 <= horizon {
            let values = target
                .iter()
                .enumerate()
                .map(|(l, s)| {
                    let l = l as u64;
                    if s.is_zero() || start == 0 {
                        // a block at offset 0 is hit by T^0: empty weight
                        // product, no rescaling
                        return Ok(Dyadic::from_rat(s.clone()));
                    }
                    let prod = w.product_exact(1 + l, start + l)?;
                    Ok(Dyadic::from_rat(s.clone()).div(&prod))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(Block {
                offset: start,
                values: BlockValues::Exact(values),
            });
            match start.checked_add(sched.period) {
                Some(next) => start = next,
                None => break,
            }
        }
    }
    let s_max = sched
        .targets
        .iter()
        .flatten()
        .map(|v| rat_to_f64(&v.abs()))
        .fold(1.0f64, f64::max);
    let m_max = sched.targets.iter().map(|t| t.len()).max().unwrap_or(1) as f64;
    let g = rat_to_f64(&growth);
    let certificate = NormCertificate::GeometricTail {
        c: s_max * g.powf(m_max),
        r: 1.0 / g,
    };
    SeqVector::new(blocks, Space::Lp { p: sched.p }, horizon, Some(certificate))
}
