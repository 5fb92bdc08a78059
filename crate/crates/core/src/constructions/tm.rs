//! Stagewise embedding of triangle points into shift orbits.
//!
//! Each stage t appends a zero run of length (x_t+1)*mhat_t followed by a
//! rescaled copy of m_hat_t consecutive coordinates of the reference vector
//! y; the index map iota sends the copy's orbit times back to y's orbit
//! times, coordinate-for-coordinate. All stage bookkeeping is exact big
//! integers — materialized stage lengths outgrow u64 after a few dozen
//! stages.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cantor::{delta_check, BairePoint};
use crate::dyadic::Rat;
use crate::error::{Error, Result};

use crate::natset::NatSet;
use crate::shifts::{
    shift_coord_exact, shift_coord_f64, Block, BlockValues, NormCertificate, SeqVector,
    WeightSequence,
};

#[derive(Debug, Clone, Serialize)]
pub struct TmStage {
    pub t: u64,
    pub x_t: u64,
    pub k_t: u64,
    pub m: BigUint,
    /// m + k_t
    pub m_hat: BigUint,
    /// running sum of m_hat
    pub alpha: BigUint,
    /// running sum of (x+1) m_hat
    pub beta: BigUint,
    /// running sum of (x+2) m_hat; total length through this stage
    pub gamma: BigUint,
}

#[derive(Debug, Clone, Serialize)]
pub struct TMSchedule {
    pub stages: Vec<TmStage>,
}

/// Stage tolerance 2^{-t-1}.
pub fn epsilon_t(t: u64) -> Rat {
    Rat::new(1.into(), num_bigint::BigInt::from(2u8).pow(t as u32 + 1))
}

/// How the per-stage density requirement is discharged.
pub enum BuildMode<'a> {
    /// Literal smallest-m scan of the finite-horizon visit sets.
    Empirical {
        visit_sets: &'a [NatSet],
        horizon: u64,
    },
    /// The visit sets contain arithmetic progressions of the given period;
    /// a closed-form (conservative) stage bound replaces the scan, so the
    /// schedule is not horizon-limited.
    Certified { period: u64 },
}

fn stage_floor(t: u64, k_t: u64, alpha_prev: &BigUint, gamma_prev: &BigUint) -> BigUint {
    // m_t > max{k_t, t^2 * alpha_{t-1}} (the t=0 case degenerates to k_0);
    // additionally m_t >= gamma_{t-1} so that the whole prefix built so far
    // fits inside one copy length (needed by the boundary density bound)
    let quad = alpha_prev * (t * t);
    (BigUint::from(k_t) + 1u32)
        .max(quad + 1u32)
        .max(gamma_prev.clone())
}

/// Smallest m such that mu_{alpha+m'}(S \ [0,alpha)) stays above
/// (1-eps)*target for every m' in [m, horizon-alpha], per visit set.
fn empirical_stage_m(
    visit_sets: &[NatSet],
    upto_j: usize,
    alpha: u64,
    eps: &Rat,
    targets: &[Rat],
    horizon: u64,
) -> Result<BigUint> {
    let mut best = BigUint::one();
    for (j, s) in visit_sets.iter().enumerate().take(upto_j + 1) {
        let elems = s.elements_upto(horizon)?;
        // counts[idx] = |S \ [0,alpha) ∩ [0, alpha+m]| as m runs upward
        let tail: Vec<u64> = elems.into_iter().filter(|&e| e >= alpha).collect();
        let threshold = (Rat::one() - eps) * &targets[j];
        let mut good_from: Option<u64> = None;
        let mut count = tail.len() as u64;
        let mut idx = tail.len();
        // sweep m downward, maintaining the count of elements <= alpha+m
        let mut m = horizon - alpha;
        loop {
            while idx > 0 && tail[idx - 1] > alpha + m {
                idx -= 1;
                count -= 1;
            }
            let mu = Rat::new((count as i64).into(), ((alpha + m + 1) as i64).into());
            if mu >= threshold {
                good_from = Some(m);
            } else {
                break;
            }
            if m == 1 {
                break;
            }
            m -= 1;
        }
        match good_from {
            Some(g) => best = best.max(BigUint::from(g)),
            None => {
                return Err(Error::HorizonExhausted {
                    stage: upto_j as u64,
                    reason: format!("visit set {j} never meets its density threshold"),
                })
            }
        }
    }
    Ok(best)
}

/// Builds a schedule for the triangle point `x` (x_t <= t) with cylinder
/// prefix lengths `ks` (nondecreasing), one stage per prefix entry.
pub fn tm_build_schedule(x: &BairePoint, ks: &[u64], mode: BuildMode) -> Result<TMSchedule> {
    if !delta_check(x) {
        return Err(Error::Precondition("point outside the triangle".into()));
    }
    let t_count = x.prefix.len().min(ks.len());
    if t_count == 0 {
        return Err(Error::Precondition("empty schedule request".into()));
    }
    if ks.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::Precondition("prefix lengths must be nondecreasing".into()));
    }
    let mut stages: Vec<TmStage> = Vec::with_capacity(t_count);
    let mut alpha = BigUint::zero();
    let mut beta = BigUint::zero();
    let mut gamma = BigUint::zero();
    for t in 0..t_count as u64 {
        let k_t = ks[t as usize];
        let x_t = x.prefix[t as usize];
        let floor = stage_floor(t, k_t, &alpha, &gamma);
        let eps = epsilon_t(t);
        let m = match &mode {
            BuildMode::Empirical {
                visit_sets,
                horizon,
            } => {
                let alpha_u = alpha.to_u64().ok_or(Error::HorizonExhausted {
                    stage: t,
                    reason: "stage offset exceeds the vector horizon".into(),
                })?;
                if alpha_u >= *horizon {
                    return Err(Error::HorizonExhausted {
                        stage: t,
                        reason: "stage offset exceeds the vector horizon".into(),
                    });
                }
                let targets: Vec<Rat> = visit_sets
                    .iter()
                    .map(|s| crate::ideals::lower_density_estimate(s, *horizon))
                    .collect::<Result<Vec<_>>>()?;
                let scanned = empirical_stage_m(
                    visit_sets,
                    t as usize,
                    alpha_u,
                    &eps,
                    &targets,
                    *horizon,
                )?;
                let m = scanned.max(floor.clone());
                if &alpha + &m > BigUint::from(*horizon) {
                    return Err(Error::HorizonExhausted {
                        stage: t,
                        reason: "smallest admissible stage length exceeds the horizon".into(),
                    });
                }
                m
            }
            BuildMode::Certified { period } => {
                // mu_{alpha+m}(A \ [0,alpha)) >= (m+1-P)/(P(alpha+m+1));
                // requiring (m+1) eps >= (1-eps) alpha + P with eps = 2^{-t-1}
                // gives the conservative closed form below.
                let twopow = BigUint::from(2u8).pow(t as u32 + 1);
                let bound = (&twopow - 1u32) * &alpha + BigUint::from(*period) * &twopow;
                bound.max(floor.clone())
            }
        };
        let m_hat = &m + k_t;
        alpha += &m_hat;
        beta += &m_hat * (x_t + 1);
        gamma += &m_hat * (x_t + 2);
        stages.push(TmStage {
            t,
            x_t,
            k_t,
            m,
            m_hat,
            alpha: alpha.clone(),
            beta: beta.clone(),
            gamma: gamma.clone(),
        });
    }
    Ok(TMSchedule { stages })
}

impl TMSchedule {
    fn gamma_prev(&self, t: usize) -> BigUint {
        if t == 0 {
            BigUint::zero()
        } else {
            self.stages[t - 1].gamma.clone()
        }
    }

    fn alpha_prev(&self, t: usize) -> BigUint {
        if t == 0 {
            BigUint::zero()
        } else {
            self.stages[t - 1].alpha.clone()
        }
    }

    /// Exact per-stage lower bound on the zero fraction: (x_t+1)/(x_t+3).
    pub fn stage_zero_bound(&self, t: usize) -> Rat {
        let x = self.stages[t].x_t as i64;
        Rat::new((x + 1).into(), (x + 3).into())
    }

    /// Exact zero density at the end of stage t counting only stage-t
    /// zeros: (x_t+1) mhat_t / (gamma_{t-1} + (x_t+2) mhat_t). Since
    /// gamma_{t-1} <= mhat_t this always dominates stage_zero_bound.
    pub fn stage_boundary_zero_lower(&self, t: usize) -> Rat {
        let s = &self.stages[t];
        let num = &s.m_hat * (s.x_t + 1);
        let den = self.gamma_prev(t) + &s.m_hat * (s.x_t + 2);
        Rat::new(
            num_bigint::BigInt::from(num),
            num_bigint::BigInt::from(den),
        )
    }

    /// Exact minimum of mu_{gamma_t - 1}(zero set) over stages t >= skip:
    /// through stage t exactly alpha_t positions are nonzero, so the zero
    /// count at the stage boundary is gamma_t - alpha_t. The boundary is
    /// where the running zero density dips lowest.
    pub fn zero_density_profile(&self, skip: usize) -> Rat {
        let mut best: Option<Rat> = None;
        for s in self.stages.iter().skip(skip) {
            let zeros = &s.gamma - &s.alpha;
            let v = Rat::new(
                num_bigint::BigInt::from(zeros),
                num_bigint::BigInt::from(s.gamma.clone()),
            );
            best = Some(match best {
                None => v,
                Some(b) => b.min(v),
            });
        }
        best.expect("nonempty schedule")
    }
}

/// Materializes z = s^(0) ⌢ s^(1) ⌢ … for the stages that fit below
/// `horizon`. Requires w_n >= 1 everywhere (otherwise the rescaled copies
/// are not norm-dominated by y).
pub fn tm_f(
    w: &WeightSequence,
    x: &BairePoint,
    y: &SeqVector,
    sched: &TMSchedule,
    horizon: u64,
) -> Result<SeqVector> {
    if !w.all_at_least_one() {
        return Err(Error::WeightBelowOne(0));
    }
    let mut blocks = Vec::new();
    for (t, stage) in sched.stages.iter().enumerate() {
        if x.prefix.len() <= t {
            break;
        }
        let Some(gamma) = stage.gamma.to_u64() else { break };
        if gamma > horizon {
            break;
        }
        let gamma_prev = sched.gamma_prev(t).to_u64().expect("monotone");
        let alpha_prev = sched.alpha_prev(t).to_u64().expect("monotone");
        let m_hat = stage.m_hat.to_u64().expect("bounded by gamma");
        let start = gamma_prev + (stage.x_t + 1) * m_hat;
        let values = (0..m_hat)
            .map(|v| {
                let src = alpha_prev + v;
                let pos = start + v;
                let yv = y.coeff_exact(src)?;
                if yv.is_zero() || pos == 0 {
                    return Ok(yv);
                }
                let prod = w.product_exact(src + 1, pos)?;
                Ok(yv.div(&prod))
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.push(Block {
            offset: start,
            values: BlockValues::Exact(values),
        });
    }
    SeqVector::new(blocks, y.space, horizon, Some(NormCertificate::FiniteSupport))
}

/// Index map: n = gamma_{t-1} + (x_t+1) mhat_t + u with u in [0, m_t) maps
/// to alpha_{t-1} + u; all other covered n map to 0.
pub fn tm_iota(sched: &TMSchedule, n: &BigUint) -> Result<BigUint> {
    let last = sched.stages.last().expect("nonempty schedule");
    if n >= &last.gamma {
        return Err(Error::Precondition(format!(
            "n = {n} beyond the scheduled length {}",
            last.gamma
        )));
    }
    let t = sched.stages.partition_point(|s| &s.gamma <= n);
    let stage = &sched.stages[t];
    let d = n - sched.gamma_prev(t);
    let lo = &stage.m_hat * (stage.x_t + 1);
    if d >= lo && d < &lo + &stage.m {
        Ok(sched.alpha_prev(t) + (d - lo))
    } else {
        Ok(BigUint::zero())
    }
}

/// Stage index of n within the schedule.
pub fn tm_stage_of(sched: &TMSchedule, n: &BigUint) -> Result<u64> {
    let last = sched.stages.last().expect("nonempty schedule");
    if n >= &last.gamma {
        return Err(Error::Precondition("n beyond the scheduled length".into()));
    }
    Ok(sched.stages.partition_point(|s| &s.gamma <= n) as u64)
}

/// Checks (T^n z)_j = (T^{iota(n)} y)_j for all j <= k_i, exactly when both
/// sides are exact, else within 1e-9 relative tolerance.
pub fn tm_claim_equivalence_check(
    w: &WeightSequence,
    y: &SeqVector,
    z: &SeqVector,
    sched: &TMSchedule,
    i: u64,
    n: u64,
) -> Result<bool> {
    let n_big = BigUint::from(n);
    let t = tm_stage_of(sched, &n_big)?;
    if t < i {
        return Err(Error::Precondition(format!("stage {t} of n below i = {i}")));
    }
    let iota = tm_iota(sched, &n_big)?;
    if iota.is_zero() {
        return Err(Error::Precondition("iota(n) = 0".into()));
    }
    let iota = iota.to_u64().ok_or(Error::Precondition("iota overflow".into()))?;
    let k_i = sched.stages[i as usize].k_t;
    for j in 0..=k_i {
        let exact = (|| -> Result<bool> {
            let lhs = shift_coord_exact(w, z, n, j)?;
            let rhs = shift_coord_exact(w, y, iota, j)?;
            Ok(lhs == rhs)
        })();
        match exact {
            Ok(eq) => {
                if !eq {
                    return Ok(false);
                }
            }
            Err(Error::NotExact) => {
                let lhs = shift_coord_f64(w, z, n, j)?;
                let rhs = shift_coord_f64(w, y, iota, j)?;
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                if (lhs - rhs).abs() > 1e-9 * scale {
                    return Ok(false);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Finite-horizon lower-density estimate of the zero set of the
/// materialized z.
pub fn tm_zero_density_check(z: &SeqVector, n_max: u64) -> Result<Rat> {
    z.check_horizon(n_max)?;
    let support: std::collections::BTreeSet<u64> =
        z.support().into_iter().filter(|&n| n <= n_max).collect();
    let zeros: Vec<u64> = (0..=n_max).filter(|n| !support.contains(n)).collect();
    let s = NatSet::explicit(zeros);
    crate::ideals::lower_density_estimate(&s, n_max)
}

/// The admissible orbit times of stage t: iota(n) != 0 there.
pub fn tm_admissible_range(sched: &TMSchedule, t: usize) -> Option<(u64, u64)> {
    let stage = &sched.stages[t];
    let gamma_prev = sched.gamma_prev(t).to_u64()?;
    let m_hat = stage.m_hat.to_u64()?;
    let m = stage.m.to_u64()?;
    let mut start = gamma_prev.checked_add((stage.x_t + 1).checked_mul(m_hat)?)?;
    // at the first stage alpha_prev = 0, so u = 0 would give iota(n) = 0,
    // colliding with the remaining-cases value; the copy map only applies
    // where iota(n) != 0
    if sched.alpha_prev(t).is_zero() {
        start += 1;
    }
    Some((start, gamma_prev.checked_add((stage.x_t + 1).checked_mul(m_hat)?)? + m - 1))
}
