//! Carves a vector z out of a hitting vector y by restricting y to a union
//! of windows chosen along its own visit schedule, so that the orbit of z
//! still enters every target cylinder, and does so along index sets carrying
//! prescribed submeasure mass.
//!
//! Stage t serves the pair (i, j) = h(t) (Cantor unpairing): a finite set
//! F_t inside the visit set of target i is chosen greedily subject to
//!   (a) min F_t > max F_{t-1} + m_{i(t-1)}   (windows stay disjoint),
//!   (b) the p-norm of y past min F_t is at most 2^{-t} / ||T||^{max F_{t-1}}
//!       (later windows survive the shift by any earlier stage's index),
//!   (c) phi(F_t) >= t                        (mass accumulates).
//! The representative g_{i,j} = min F_t then satisfies the error chain
//!   || T^{g_{i,j}} z - s^(i) ||_p <= 2^{-j} (i+2) + 2^{-t}.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::constructions::targets::{pair, unpair};
use crate::dyadic::Rat;
use crate::error::{Error, Result};
use crate::ideals::Lscsm;
use crate::natset::NatSet;
use crate::shifts::{NormCertificate, SeqVector, WeightSequence};

/// h: stage -> (target index, cylinder exponent).
pub fn stage_pair(t: usize) -> (usize, u32) {
    let (a, b) = unpair(&BigUint::from(t));
    (a.to_usize().unwrap(), b.to_u32().unwrap())
}

/// h^{-1}: (target index, cylinder exponent) -> stage.
pub fn pair_stage(i: usize, j: u32) -> usize {
    pair(&BigUint::from(i), &BigUint::from(j))
        .to_usize()
        .unwrap()
}

/// Suffix table of log2 ||y restricted to [from, infinity)||_p, built once so
/// stage selection can probe many candidate cut points cheaply.
pub struct TailTable {
    coords: Vec<u64>,
    /// log2 of the p-th-power suffix sums over the materialized support
    suffix_logp: Vec<f64>,
    cert: Option<(f64, f64, u64)>,
    p: f64,
}

fn log_add2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

impl TailTable {
    pub fn new(y: &SeqVector, p: f64) -> Result<Self> {
        let cert = match y.certificate {
            None => return Err(Error::MissingNormCertificate),
            Some(NormCertificate::FiniteSupport) => None,
            Some(NormCertificate::GeometricTail { c, r }) => {
                let n0 = y.blocks().last().map(|b| b.end()).unwrap_or(0);
                Some((c, r, n0))
            }
        };
        let coords = y.support();
        let mut suffix_logp = vec![f64::NEG_INFINITY; coords.len()];
        let mut acc = f64::NEG_INFINITY;
        for (idx, &n) in coords.iter().enumerate().rev() {
            let l = y.coeff_log(n)?;
            acc = log_add2(acc, p * l.log2);
            suffix_logp[idx] = acc;
        }
        Ok(TailTable {
            coords,
            suffix_logp,
            cert,
            p,
        })
    }

    /// log2 || y restricted to [from, infinity) ||_p, certificate tail
    /// included; NEG_INFINITY when the suffix is empty.
    pub fn tail_log2(&self, from: u64) -> f64 {
        let idx = self.coords.partition_point(|&n| n < from);
        let mut sum = if idx < self.coords.len() {
            self.suffix_logp[idx]
        } else {
            f64::NEG_INFINITY
        };
        if let Some((c, r, n0)) = self.cert {
            let start = from.max(n0);
            let tail = self.p * c.log2()
                + self.p * start as f64 * r.log2()
                - (1.0 - r.powf(self.p)).log2();
            sum = log_add2(sum, tail);
        }
        sum / self.p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EqBlocks {
    /// F_t, sorted, one per stage t = 0..=t_max
    pub f_sets: Vec<Vec<u64>>,
    /// window length per target: largest constrained coordinate of s^(i)
    pub m: Vec<u64>,
    pub p: f64,
    /// log2 of the operator norm bound ||T|| = sup_n |w_n|
    pub op_log2: f64,
}

impl EqBlocks {
    /// Representative g_{i,j} = min F_{h^{-1}(i,j)}, when that stage was built.
    pub fn g(&self, i: usize, j: u32) -> Option<u64> {
        let t = pair_stage(i, j);
        self.f_sets.get(t).map(|f| f[0])
    }

    /// The restriction windows [g_t, g_t + m_{i(t)}], sorted and disjoint.
    pub fn intervals(&self) -> Vec<(u64, u64)> {
        self.f_sets
            .iter()
            .enumerate()
            .map(|(t, f)| {
                let (i, _) = stage_pair(t);
                (f[0], f[0] + self.m[i])
            })
            .collect()
    }
}

/// Greedy stage-by-stage selection of the F_t. `visit_sets[i]` must be a
/// subset of the visit set of target i's cylinders (for our exact-hit y the
/// scheduled progression works for every radius at once), `m[i]` the largest
/// constrained coordinate of target i.
pub fn eq_build_blocks(
    y: &SeqVector,
    w: &WeightSequence,
    visit_sets: &[NatSet],
    m: &[u64],
    phi: &Lscsm,
    t_max: usize,
    horizon: u64,
) -> Result<EqBlocks> {
    let op = w.sup_bound();
    // NaN must fail this gate too
    if op.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Precondition(format!(
            "operator norm bound {op} <= 1; the tail condition needs ||T|| > 1"
        )));
    }
    let op_log2 = op.log2();
    let p = match y.space {
        crate::shifts::Space::Lp { p } => p,
        crate::shifts::Space::C0 => {
            return Err(Error::Precondition(
                "window selection is an l^p construction".into(),
            ))
        }
    };
    let tails = TailTable::new(y, p)?;

    let mut f_sets: Vec<Vec<u64>> = Vec::with_capacity(t_max + 1);
    // F_{-1} = {0}, m_{-1} = 0
    let mut prev_max = 0u64;
    let mut prev_window = 0u64;
    for t in 0..=t_max {
        let (i, _) = stage_pair(t);
        let s = visit_sets.get(i).ok_or_else(|| Error::Precondition(format!(
            "stage {t} addresses target {i} but only {} visit sets were supplied",
            visit_sets.len()
        )))?;
        if i >= m.len() {
            return Err(Error::Precondition(format!("no window length for target {i}")));
        }
        let elems = s.elements_upto(horizon.min(y.horizon.saturating_sub(m[i])))?;
        // (b) bound on the cut point, log2 domain
        let need = -(t as f64) - prev_max as f64 * op_log2;
        let start = elems
            .iter()
            .position(|&n| n > prev_max + prev_window && tails.tail_log2(n) <= need)
            .ok_or(Error::HorizonExhausted {
                stage: t as u64,
                reason: format!("no visit of target {i} satisfies the tail bound 2^{need:.1}"),
            })?;
        // (c): extend until the submeasure mass reaches t
        let mut f: Vec<u64> = vec![elems[start]];
        let mut k = start + 1;
        while phi.eval(&f) < t as f64 {
            if k >= elems.len() {
                return Err(Error::HorizonExhausted {
                    stage: t as u64,
                    reason: format!(
                        "visits of target {i} exhausted at mass {} < {t}",
                        phi.eval(&f)
                    ),
                });
            }
            f.push(elems[k]);
            k += 1;
        }
        prev_max = *f.last().unwrap();
        prev_window = m[i];
        f_sets.push(f);
    }
    Ok(EqBlocks {
        f_sets,
        m: m.to_vec(),
        p,
        op_log2,
    })
}

/// z = y restricted to the union of the stage windows.
pub fn eq_vector(y: &SeqVector, blocks: &EqBlocks) -> Result<SeqVector> {
    let restricted = y.restrict_to_intervals(&blocks.intervals())?;
    // the restriction has finite support regardless of y's tail certificate
    SeqVector::new(
        restricted.blocks().to_vec(),
        y.space,
        y.horizon,
        Some(NormCertificate::FiniteSupport),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct EqError {
    pub i: usize,
    pub j: u32,
    pub t: usize,
    pub g: u64,
    /// measured || T^g z - s^(i) ||_p (may underflow to 0 for tiny tails)
    pub measured: f64,
    /// 2^{-j} (i+2) + 2^{-t}
    pub bound: f64,
}

/// Measures the orbit error at every representative whose next stage exists
/// (the chain bound borrows condition (b) of stage t+1).
pub fn eq_error_report(
    w: &WeightSequence,
    z: &SeqVector,
    blocks: &EqBlocks,
    targets: &[Vec<Rat>],
) -> Result<Vec<EqError>> {
    let p = blocks.p;
    let support = z.support();
    let mut out = Vec::new();
    for t in 0..blocks.f_sets.len().saturating_sub(1) {
        let (i, j) = stage_pair(t);
        let g = blocks.f_sets[t][0];
        let mi = blocks.m[i];
        // constrained prefix, exact: expect zeros at an exact-hit schedule
        let mut prefix_pow = 0.0f64;
        for l in 0..=mi {
            let got = crate::shifts::shift_coord_exact(w, z, g, l)?.to_rat();
            let want = targets[i].get(l as usize).cloned().unwrap_or_default();
            let diff = crate::ideals::rat_to_f64(&(got - want)).abs();
            if diff > 0.0 {
                prefix_pow += diff.powf(p);
            }
        }
        // coordinates past the window: later windows, shifted and reweighted
        let mut tail_logp = f64::NEG_INFINITY;
        let idx = support.partition_point(|&n| n <= g + mi);
        for &n in &support[idx..] {
            let jj = n - g;
            let c = z.coeff_log(n)?;
            if c.sign == 0 {
                continue;
            }
            let lw = w.product_log2(1 + jj, n)?;
            tail_logp = log_add2(tail_logp, p * (c.log2 + lw));
        }
        let measured = (prefix_pow + (tail_logp).exp2()).powf(1.0 / p);
        let bound = (-(j as f64)).exp2() * (i as f64 + 2.0) + (-(t as f64)).exp2();
        out.push(EqError {
            i,
            j,
            t,
            g,
            measured,
            bound,
        });
    }
    Ok(out)
}
