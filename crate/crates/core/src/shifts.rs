//! Weighted backward shift dynamics on block-sparse sequence vectors.
//!
//! The shift acts by (T^n x)_j = w_{1+j} w_{2+j} ... w_{n+j} x_{n+j}. Weight
//! products span hundreds of orders of magnitude at large horizons, so every
//! family gets a closed-form log2 route alongside the exact rational route
//! (available when the rule is rational-valued).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::dyadic::{Dyadic, Rat, SignedLog};
use crate::error::{Error, Result};
use crate::ideals::{in_ideal_at_horizon, rat_to_f64, IdealSpec, Membership};
use crate::natset::NatSet;

/// Closed-form weight families. `FRatio(p)` is w_n = f(n+1)/f(n) for
/// f(n) = ((n+2) ln(n+2))^{1/p}, the decreasing-to-1 family of the
/// nonequivalence construction.
#[derive(Debug, Clone)]
pub enum WeightRule {
    Constant(Rat),
    FRatio { p: f64 },
    Explicit { head: Vec<Rat>, tail: Rat },
}

#[derive(Debug, Clone)]
pub struct WeightSequence {
    pub rule: WeightRule,
    /// cumulative log2 of head weights for Explicit (index i = product of w_0..w_{i-1})
    head_log2: Vec<f64>,
}

fn fratio_f(n: u64, p: f64) -> f64 {
    let x = (n + 2) as f64;
    (x * x.ln()).powf(1.0 / p)
}

fn log2_fratio_f(n: u64, p: f64) -> f64 {
    let x = (n + 2) as f64;
    (x.log2() + x.ln().log2()) / p
}

impl WeightSequence {
    pub fn constant(lambda: Rat) -> Self {
        assert!(!lambda.is_zero(), "weights must be nonzero");
        WeightSequence {
            rule: WeightRule::Constant(lambda),
            head_log2: Vec::new(),
        }
    }

    pub fn constant_int(lambda: i64) -> Self {
        Self::constant(Rat::from_integer(BigInt::from(lambda)))
    }

    pub fn fratio(p: f64) -> Self {
        assert!(p >= 1.0);
        WeightSequence {
            rule: WeightRule::FRatio { p },
            head_log2: Vec::new(),
        }
    }

    pub fn explicit(head: Vec<Rat>, tail: Rat) -> Self {
        assert!(head.iter().all(|w| !w.is_zero()) && !tail.is_zero());
        let mut head_log2 = Vec::with_capacity(head.len() + 1);
        let mut acc = 0.0f64;
        head_log2.push(0.0);
        for w in &head {
            acc += rat_to_f64(&w.abs()).log2();
            head_log2.push(acc);
        }
        WeightSequence {
            rule: WeightRule::Explicit { head, tail },
            head_log2,
        }
    }

    /// w_n as f64.
    pub fn weight_f64(&self, n: u64) -> f64 {
        match &self.rule {
            WeightRule::Constant(l) => rat_to_f64(l),
            WeightRule::FRatio { p } => fratio_f(n + 1, *p) / fratio_f(n, *p),
            WeightRule::Explicit { head, tail } => {
                if (n as usize) < head.len() {
                    rat_to_f64(&head[n as usize])
                } else {
                    rat_to_f64(tail)
                }
            }
        }
    }

    /// w_n exact, when the rule is rational-valued.
    pub fn weight_exact(&self, n: u64) -> Result<Rat> {
        match &self.rule {
            WeightRule::Constant(l) => Ok(l.clone()),
            WeightRule::FRatio { .. } => Err(Error::NotExact),
            WeightRule::Explicit { head, tail } => Ok(if (n as usize) < head.len() {
                head[n as usize].clone()
            } else {
                tail.clone()
            }),
        }
    }

    /// True when every weight is >= 1 (checkable from the rule shape).
    pub fn all_at_least_one(&self) -> bool {
        match &self.rule {
            WeightRule::Constant(l) => *l >= Rat::one(),
            WeightRule::FRatio { .. } => true, // strictly decreasing to 1 from above
            WeightRule::Explicit { head, tail } => {
                head.iter().all(|w| *w >= Rat::one()) && *tail >= Rat::one()
            }
        }
    }

    /// Declared operator norm bound sup_n |w_n| as f64.
    pub fn sup_bound(&self) -> f64 {
        match &self.rule {
            WeightRule::Constant(l) => rat_to_f64(&l.abs()),
            WeightRule::FRatio { p } => fratio_f(1, *p) / fratio_f(0, *p),
            WeightRule::Explicit { head, tail } => head
                .iter()
                .map(|w| rat_to_f64(&w.abs()))
                .fold(rat_to_f64(&tail.abs()), f64::max),
        }
    }

    /// log2 of w_n w_{n+1} ... w_k (absolute values); closed form per family.
    pub fn product_log2(&self, n: u64, k: u64) -> Result<f64> {
        if n > k {
            return Err(Error::EmptyProductRange(n, k));
        }
        let count = k - n + 1;
        Ok(match &self.rule {
            WeightRule::Constant(l) => count as f64 * rat_to_f64(&l.abs()).log2(),
            WeightRule::FRatio { p } => log2_fratio_f(k + 1, *p) - log2_fratio_f(n, *p),
            WeightRule::Explicit { head, tail } => {
                let h = head.len() as u64;
                let lo = n.min(h);
                let hi = (k + 1).min(h);
                let head_part = self.head_log2[hi as usize] - self.head_log2[lo as usize];
                let tail_count = (k + 1).saturating_sub(h.max(n));
                head_part + tail_count as f64 * rat_to_f64(&tail.abs()).log2()
            }
        })
    }

    /// Exact w_n ... w_k as a dyadic-scaled rational, when available.
    pub fn product_exact(&self, n: u64, k: u64) -> Result<Dyadic> {
        if n > k {
            return Err(Error::EmptyProductRange(n, k));
        }
        let count = (k - n + 1) as u32;
        match &self.rule {
            WeightRule::Constant(l) => Ok(Dyadic::from_rat(l.clone()).powi(count)),
            WeightRule::FRatio { .. } => Err(Error::NotExact),
            WeightRule::Explicit { head, tail } => {
                let mut acc = Dyadic::one();
                for i in n..=k {
                    let w = if (i as usize) < head.len() {
                        head[i as usize].clone()
                    } else {
                        tail.clone()
                    };
                    acc = acc.mul(&Dyadic::from_rat(w));
                }
                Ok(acc)
            }
        }
    }

    /// w_n ... w_k as f64 through the log2 route (1e-12 relative slack).
    pub fn product_f64(&self, n: u64, k: u64) -> Result<f64> {
        Ok(self.product_log2(n, k)?.exp2())
    }

    pub fn family_name(&self) -> String {
        match &self.rule {
            WeightRule::Constant(l) => format!("constant:{l}"),
            WeightRule::FRatio { p } => format!("fratio:{p}"),
            WeightRule::Explicit { head, .. } => format!("explicit[{}]", head.len()),
        }
    }
}

/// w_n w_{n+1} ... w_k, exact when the rule allows, else via summed logs.
pub fn weight_product(w: &WeightSequence, n: u64, k: u64) -> Result<f64> {
    match w.product_exact(n, k) {
        Ok(d) => Ok(d.to_f64()),
        Err(Error::NotExact) => w.product_f64(n, k),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Space {
    Lp { p: f64 },
    C0,
}

/// Structural finite-norm certificate; numeric tail sums are never trusted
/// on their own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormCertificate {
    FiniteSupport,
    /// |x_n| <= C * r^n beyond the materialized blocks, with r < 1.
    GeometricTail { c: f64, r: f64 },
}

#[derive(Debug, Clone)]
pub enum BlockValues {
    Exact(Vec<Dyadic>),
    F64(Vec<f64>),
}

impl BlockValues {
    pub fn len(&self) -> usize {
        match self {
            BlockValues::Exact(v) => v.len(),
            BlockValues::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub offset: u64,
    pub values: BlockValues,
}

impl Block {
    pub fn end(&self) -> u64 {
        self.offset + self.values.len() as u64
    }
}

/// Block-sparse, prefix-materializable sequence vector. Coordinates beyond
/// `horizon` are not materialized and may not be queried.
#[derive(Debug, Clone)]
pub struct SeqVector {
    blocks: Vec<Block>,
    pub space: Space,
    pub horizon: u64,
    pub certificate: Option<NormCertificate>,
}

impl SeqVector {
    pub fn new(
        mut blocks: Vec<Block>,
        space: Space,
        horizon: u64,
        certificate: Option<NormCertificate>,
    ) -> Result<Self> {
        blocks.retain(|b| !b.values.is_empty());
        blocks.sort_by_key(|b| b.offset);
        for pair in blocks.windows(2) {
            if pair[0].end() > pair[1].offset {
                return Err(Error::Precondition(format!(
                    "overlapping blocks at offsets {} and {}",
                    pair[0].offset, pair[1].offset
                )));
            }
        }
        Ok(SeqVector {
            blocks,
            space,
            horizon,
            certificate,
        })
    }

    pub fn zero(space: Space, horizon: u64) -> Self {
        SeqVector {
            blocks: Vec::new(),
            space,
            horizon,
            certificate: Some(NormCertificate::FiniteSupport),
        }
    }

    /// Standard unit vector e_i.
    pub fn unit(i: u64, space: Space, horizon: u64) -> Self {
        SeqVector {
            blocks: vec![Block {
                offset: i,
                values: BlockValues::Exact(vec![Dyadic::one()]),
            }],
            space,
            horizon,
            certificate: Some(NormCertificate::FiniteSupport),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn support_len(&self) -> usize {
        self.blocks.iter().map(|b| b.values.len()).sum()
    }

    fn locate(&self, n: u64) -> Option<(&Block, usize)> {
        let idx = self.blocks.partition_point(|b| b.end() <= n);
        let b = self.blocks.get(idx)?;
        if n >= b.offset {
            Some((b, (n - b.offset) as usize))
        } else {
            None
        }
    }

    pub fn check_horizon(&self, n: u64) -> Result<()> {
        if n > self.horizon {
            return Err(Error::VectorHorizon(n, self.horizon));
        }
        Ok(())
    }

    /// Exact coordinate; errors past the horizon or on f64-backed blocks.
    pub fn coeff_exact(&self, n: u64) -> Result<Dyadic> {
        self.check_horizon(n)?;
        match self.locate(n) {
            None => Ok(Dyadic::zero()),
            Some((b, i)) => match &b.values {
                BlockValues::Exact(v) => Ok(v[i].clone()),
                BlockValues::F64(_) => Err(Error::NotExact),
            },
        }
    }

    pub fn coeff_f64(&self, n: u64) -> Result<f64> {
        self.check_horizon(n)?;
        Ok(match self.locate(n) {
            None => 0.0,
            Some((b, i)) => match &b.values {
                BlockValues::Exact(v) => v[i].to_f64(),
                BlockValues::F64(v) => v[i],
            },
        })
    }

    /// Signed log2 of a coordinate, for wide-exponent orbit evaluation.
    pub fn coeff_log(&self, n: u64) -> Result<SignedLog> {
        self.check_horizon(n)?;
        Ok(match self.locate(n) {
            None => SignedLog::zero(),
            Some((b, i)) => match &b.values {
                BlockValues::Exact(v) => match v[i].log2_abs() {
                    None => SignedLog::zero(),
                    Some(l) => SignedLog {
                        sign: v[i].sign(),
                        log2: l,
                    },
                },
                BlockValues::F64(v) => {
                    if v[i] == 0.0 {
                        SignedLog::zero()
                    } else {
                        SignedLog {
                            sign: if v[i] > 0.0 { 1 } else { -1 },
                            log2: v[i].abs().log2(),
                        }
                    }
                }
            },
        })
    }

    /// Indices of nonzero materialized coordinates.
    pub fn support(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.support_len());
        for b in &self.blocks {
            for i in 0..b.values.len() {
                let nz = match &b.values {
                    BlockValues::Exact(v) => !v[i].is_zero(),
                    BlockValues::F64(v) => v[i] != 0.0,
                };
                if nz {
                    out.push(b.offset + i as u64);
                }
            }
        }
        out
    }

    /// Restriction y|S: keep coordinates in the given sorted index intervals.
    pub fn restrict_to_intervals(&self, intervals: &[(u64, u64)]) -> Result<SeqVector> {
        let mut blocks = Vec::new();
        for &(lo, hi) in intervals {
            for b in &self.blocks {
                let s = b.offset.max(lo);
                let e = b.end().min(hi + 1);
                if s >= e {
                    continue;
                }
                let i0 = (s - b.offset) as usize;
                let i1 = (e - b.offset) as usize;
                let values = match &b.values {
                    BlockValues::Exact(v) => BlockValues::Exact(v[i0..i1].to_vec()),
                    BlockValues::F64(v) => BlockValues::F64(v[i0..i1].to_vec()),
                };
                blocks.push(Block { offset: s, values });
            }
        }
        SeqVector::new(blocks, self.space, self.horizon, self.certificate)
    }
}

/// Basic pointwise-open cylinder: first k+1 coordinates within radius
/// epsilon of rational centers, with strict inequality (boundary hits count
/// as non-visits).
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub centers: Vec<Rat>,
    pub radius: Rat,
}

impl Cylinder {
    pub fn new(centers: Vec<Rat>, radius: Rat) -> Self {
        assert!(radius > Rat::zero());
        assert!(!centers.is_empty());
        Cylinder { centers, radius }
    }

    pub fn around_prefix(target: &SeqVector, k: u64, radius: Rat) -> Result<Self> {
        let centers = (0..=k)
            .map(|j| target.coeff_exact(j).map(|d| d.to_rat()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cylinder::new(centers, radius))
    }

    pub fn k(&self) -> u64 {
        self.centers.len() as u64 - 1
    }

    pub fn contains_f64(&self, coords: &[f64]) -> bool {
        let eps = rat_to_f64(&self.radius);
        self.centers
            .iter()
            .zip(coords)
            .all(|(c, &v)| (v - rat_to_f64(c)).abs() < eps)
            && coords.len() == self.centers.len()
    }
}

/// (T^n x)_j for j < prefix_len, exact. Requires an exact weight rule and
/// exact blocks.
pub fn shift_apply_exact(
    w: &WeightSequence,
    x: &SeqVector,
    n: u64,
    prefix_len: u64,
) -> Result<Vec<Dyadic>> {
    (0..prefix_len)
        .map(|j| shift_coord_exact(w, x, n, j))
        .collect()
}

pub fn shift_coord_exact(w: &WeightSequence, x: &SeqVector, n: u64, j: u64) -> Result<Dyadic> {
    let c = x.coeff_exact(n + j)?;
    if n == 0 {
        return Ok(c);
    }
    if c.is_zero() {
        return Ok(Dyadic::zero());
    }
    Ok(w.product_exact(1 + j, n + j)?.mul(&c))
}

/// (T^n x)_j through the wide-exponent log2 route; saturates rather than
/// over/underflowing.
pub fn shift_coord_f64(w: &WeightSequence, x: &SeqVector, n: u64, j: u64) -> Result<f64> {
    let c = x.coeff_log(n + j)?;
    if n == 0 || c.sign == 0 {
        return Ok(c.to_f64());
    }
    let lw = w.product_log2(1 + j, n + j)?;
    let sign = if w.all_positive_range(1 + j, n + j) {
        c.sign
    } else {
        // sign of the product for possibly-negative explicit heads
        c.sign * w.product_sign(1 + j, n + j)
    };
    Ok(SignedLog {
        sign,
        log2: c.log2 + lw,
    }
    .to_f64())
}

impl WeightSequence {
    fn all_positive_range(&self, n: u64, k: u64) -> bool {
        match &self.rule {
            WeightRule::Constant(l) => l.is_positive(),
            WeightRule::FRatio { .. } => true,
            WeightRule::Explicit { head, tail } => {
                tail.is_positive()
                    && head
                        .iter()
                        .enumerate()
                        .all(|(i, w)| (i as u64) < n || (i as u64) > k || w.is_positive())
            }
        }
    }

    fn product_sign(&self, n: u64, k: u64) -> i8 {
        let mut sign = 1i8;
        for i in n..=k {
            let neg = match &self.rule {
                WeightRule::Constant(l) => l.is_negative(),
                WeightRule::FRatio { .. } => false,
                WeightRule::Explicit { head, tail } => {
                    if (i as usize) < head.len() {
                        head[i as usize].is_negative()
                    } else {
                        tail.is_negative()
                    }
                }
            };
            if neg {
                sign = -sign;
            }
        }
        sign
    }
}

pub fn shift_apply_f64(
    w: &WeightSequence,
    x: &SeqVector,
    n: u64,
    prefix_len: u64,
) -> Result<Vec<f64>> {
    (0..prefix_len)
        .map(|j| shift_coord_f64(w, x, n, j))
        .collect()
}

/// Explicit visit set { n <= N : T^n x in U }.
pub fn orbit_visits(
    w: &WeightSequence,
    x: &SeqVector,
    u: &Cylinder,
    n_max: u64,
) -> Result<NatSet> {
    let k = u.k();
    x.check_horizon(n_max + k)?;
    let mut visits = Vec::new();
    let eps = rat_to_f64(&u.radius);
    let centers: Vec<f64> = u.centers.iter().map(rat_to_f64).collect();
    'outer: for n in 0..=n_max {
        for j in 0..=k {
            let v = shift_coord_f64(w, x, n, j)?;
            if (v - centers[j as usize]).abs() >= eps {
                continue 'outer;
            }
        }
        visits.push(n);
    }
    Ok(NatSet::explicit(visits))
}

/// l^p norm; exact sums on exact finite support when p is a positive
/// integer, else binary64 through logs. Requires a norm certificate.
pub fn p_norm(x: &SeqVector, p: f64) -> Result<f64> {
    if x.certificate.is_none() {
        return Err(Error::MissingNormCertificate);
    }
    let mut sum = 0.0f64;
    for b in x.blocks() {
        match &b.values {
            BlockValues::Exact(v) => {
                for d in v {
                    if let Some(l) = d.log2_abs() {
                        sum += (l * p).exp2();
                    }
                }
            }
            BlockValues::F64(v) => {
                for &f in v {
                    sum += f.abs().powf(p);
                }
            }
        }
    }
    if let Some(NormCertificate::GeometricTail { c, r }) = x.certificate {
        let n0 = x.blocks.last().map(|b| b.end()).unwrap_or(0);
        sum += c.powf(p) * r.powf(p * n0 as f64) / (1.0 - r.powf(p));
    }
    Ok(sum.powf(1.0 / p))
}

/// Exact p-th power of the l^p norm for integer p on exact blocks.
pub fn p_norm_pow_exact(x: &SeqVector, p: u32) -> Result<Dyadic> {
    let mut sum = Dyadic::zero();
    for b in x.blocks() {
        match &b.values {
            BlockValues::Exact(v) => {
                for d in v {
                    sum = sum.add(&d.abs().powi(p));
                }
            }
            BlockValues::F64(_) => return Err(Error::NotExact),
        }
    }
    Ok(sum)
}

pub fn sup_norm(x: &SeqVector) -> Result<f64> {
    if x.certificate.is_none() {
        return Err(Error::MissingNormCertificate);
    }
    let mut best = 0.0f64;
    for b in x.blocks() {
        match &b.values {
            BlockValues::Exact(v) => {
                for d in v {
                    best = best.max(d.to_f64().abs());
                }
            }
            BlockValues::F64(v) => {
                for &f in v {
                    best = best.max(f.abs());
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesClass {
    Convergent,
    Divergent,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct BayartRuzsaReport {
    pub partial_sum: f64,
    pub classification: SeriesClass,
    pub terms: u64,
}

/// Partial sum of sum_n 1/(w_0...w_n)^p together with the analytic verdict
/// for the supported families: convergence of the series characterizes norm
/// (upper) frequent hypercyclicity of the shift.
pub fn bayart_ruzsa_report(w: &WeightSequence, p: f64, n_max: u64) -> Result<BayartRuzsaReport> {
    if p < 1.0 {
        return Err(Error::Precondition("p must be >= 1".into()));
    }
    let mut partial_sum = 0.0f64;
    for n in 0..=n_max {
        let l = w.product_log2(0, n)?;
        partial_sum += (-p * l).exp2();
    }
    let classification = match &w.rule {
        WeightRule::Constant(l) => {
            if l.abs() > Rat::one() {
                SeriesClass::Convergent
            } else {
                SeriesClass::Divergent
            }
        }
        // sum 1/(w_0...w_n)^p = sum f(0)^p / ((n+3) ln(n+3)), a divergent
        // Abel-type series
        WeightRule::FRatio { .. } => SeriesClass::Divergent,
        // head is finite, so only the eventual tail weight decides
        WeightRule::Explicit { tail, .. } => {
            if tail.abs() > Rat::one() {
                SeriesClass::Convergent
            } else {
                SeriesClass::Divergent
            }
        }
    };
    Ok(BayartRuzsaReport {
        partial_sum,
        classification,
        terms: n_max + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClusterVerdict {
    IsClusterEvidence,
    NotClusterEvidence,
    Undecided,
}

/// Builds the cylinder around the target prefix, collects orbit visits, and
/// classifies the visit set against the ideal at the horizon.
#[allow(clippy::too_many_arguments)]
pub fn cluster_point_check(
    w: &WeightSequence,
    x: &SeqVector,
    target: &SeqVector,
    k: u64,
    epsilon: Rat,
    ideal: &IdealSpec,
    n_max: u64,
    delta: &Rat,
) -> Result<(ClusterVerdict, NatSet)> {
    let u = Cylinder::around_prefix(target, k, epsilon)?;
    let visits = orbit_visits(w, x, &u, n_max)?;
    let verdict = match in_ideal_at_horizon(ideal, &visits, n_max, delta)? {
        Membership::Positive => ClusterVerdict::IsClusterEvidence,
        Membership::InIdeal => ClusterVerdict::NotClusterEvidence,
        Membership::Undecided => ClusterVerdict::Undecided,
    };
    Ok((verdict, visits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn weight_product_examples() {
        let w = WeightSequence::constant_int(2);
        assert_eq!(weight_product(&w, 1, 3).unwrap(), 8.0);
        assert_eq!(weight_product(&w, 5, 5).unwrap(), 2.0);
        assert!(weight_product(&w, 3, 1).is_err());
    }

    #[test]
    fn fratio_telescoping_matches_direct_product() {
        let w = WeightSequence::fratio(2.0);
        for &(n, k) in &[(1u64, 50u64), (3, 200), (10, 1000)] {
            let telescoped = w.product_f64(n, k).unwrap();
            let direct: f64 = (n..=k).map(|i| w.weight_f64(i)).product();
            assert!(
                (telescoped - direct).abs() / direct < 1e-9,
                "({n},{k}): {telescoped} vs {direct}"
            );
        }
    }

    #[test]
    fn shift_apply_examples() {
        let w = WeightSequence::constant_int(2);
        let e1 = SeqVector::unit(1, Space::Lp { p: 2.0 }, 100);
        let out = shift_apply_exact(&w, &e1, 1, 3).unwrap();
        assert_eq!(out[0], Dyadic::from_int(2));
        assert!(out[1].is_zero() && out[2].is_zero());

        // n = 0 returns the prefix unchanged
        let out = shift_apply_exact(&w, &e1, 0, 3).unwrap();
        assert!(out[0].is_zero());
        assert_eq!(out[1], Dyadic::one());

        // w_n = n rule via explicit head: (T e_2)_1 = w_2 * 1 = 2
        let head: Vec<Rat> = (0..10).map(|n| r(n.max(1), 1)).collect();
        let w = WeightSequence::explicit(head, r(1, 1));
        let e2 = SeqVector::unit(2, Space::Lp { p: 2.0 }, 100);
        let out = shift_apply_exact(&w, &e2, 1, 2).unwrap();
        assert!(out[0].is_zero());
        assert_eq!(out[1], Dyadic::from_int(2));
    }

    #[test]
    fn orbit_visits_examples() {
        let w = WeightSequence::constant_int(2);
        let space = Space::Lp { p: 2.0 };
        let zero = SeqVector::zero(space, 1000);
        let u0 = Cylinder::new(vec![r(0, 1)], r(1, 2));
        let visits = orbit_visits(&w, &zero, &u0, 10).unwrap();
        assert_eq!(visits.elements_upto(10).unwrap(), (0..=10).collect::<Vec<_>>());

        let e1 = SeqVector::unit(1, space, 1000);
        let u = Cylinder::new(vec![r(2, 1)], r(1, 2));
        let visits = orbit_visits(&w, &e1, &u, 10).unwrap();
        assert_eq!(visits.elements_upto(10).unwrap(), vec![1]);

        let u1 = Cylinder::new(vec![r(1, 1)], r(1, 2));
        let visits = orbit_visits(&w, &zero, &u1, 10).unwrap();
        assert!(visits.elements_upto(10).unwrap().is_empty());
    }

    #[test]
    fn norms() {
        let space = Space::Lp { p: 2.0 };
        let e0 = SeqVector::unit(0, space, 10);
        assert!((p_norm(&e0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p_norm(&e0, 3.5).unwrap() - 1.0).abs() < 1e-12);
        let zero = SeqVector::zero(space, 10);
        assert_eq!(p_norm(&zero, 1.0).unwrap(), 0.0);
        assert_eq!(sup_norm(&zero).unwrap(), 0.0);
    }

    #[test]
    fn restriction_norm_monotone() {
        let space = Space::Lp { p: 2.0 };
        let vals = BlockValues::Exact(vec![
            Dyadic::from_int(3),
            Dyadic::from_int(-4),
            Dyadic::from_int(5),
        ]);
        let y = SeqVector::new(
            vec![Block {
                offset: 2,
                values: vals,
            }],
            space,
            10,
            Some(NormCertificate::FiniteSupport),
        )
        .unwrap();
        let restricted = y.restrict_to_intervals(&[(3, 3)]).unwrap();
        assert!(p_norm(&restricted, 2.0).unwrap() <= p_norm(&y, 2.0).unwrap());
        assert!((p_norm(&restricted, 2.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bayart_ruzsa_examples() {
        let w = WeightSequence::constant_int(2);
        let rep = bayart_ruzsa_report(&w, 2.0, 50).unwrap();
        assert_eq!(rep.classification, SeriesClass::Convergent);
        let expected: f64 = (0..=50u32).map(|n| 0.25f64.powi(n as i32 + 1)).sum();
        assert!((rep.partial_sum - expected).abs() < 1e-9);
        assert!((rep.partial_sum - 1.0 / 3.0).abs() < 1e-6);

        let w1 = WeightSequence::constant_int(1);
        assert_eq!(
            bayart_ruzsa_report(&w1, 2.0, 10).unwrap().classification,
            SeriesClass::Divergent
        );

        let wf = WeightSequence::fratio(1.0);
        let rep = bayart_ruzsa_report(&wf, 1.0, 100_000).unwrap();
        assert_eq!(rep.classification, SeriesClass::Divergent);
        // partial sums drift like log log N
        let rep_small = bayart_ruzsa_report(&wf, 1.0, 10_000).unwrap();
        assert!(rep.partial_sum > rep_small.partial_sum + 1e-3);
    }

    #[test]
    fn cluster_check_examples() {
        let w = WeightSequence::constant_int(2);
        let space = Space::Lp { p: 2.0 };
        let zero = SeqVector::zero(space, 2000);
        let (verdict, _) = cluster_point_check(
            &w,
            &zero,
            &zero,
            0,
            r(1, 2),
            &IdealSpec::DensityZero,
            1000,
            &r(1, 10),
        )
        .unwrap();
        assert_eq!(verdict, ClusterVerdict::IsClusterEvidence);

        let e1 = SeqVector::unit(1, space, 2000);
        let mut target = SeqVector::zero(space, 10);
        target = SeqVector::new(
            vec![Block {
                offset: 0,
                values: BlockValues::Exact(vec![Dyadic::from_int(5)]),
            }],
            target.space,
            10,
            Some(NormCertificate::FiniteSupport),
        )
        .unwrap();
        let (verdict, _) = cluster_point_check(
            &w,
            &e1,
            &target,
            0,
            r(1, 2),
            &IdealSpec::Fin,
            100,
            &r(1, 10),
        )
        .unwrap();
        assert_eq!(verdict, ClusterVerdict::NotClusterEvidence);
    }
}
