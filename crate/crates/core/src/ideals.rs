//! Ideals on the naturals, submeasures, and density functionals with
//! finite-horizon estimation semantics.
//!
//! Densities are exact rationals; submeasure evaluations use binary64 with a
//! 1e-12 comparison slack. Finite horizons cannot decide ideal membership for
//! arbitrary rule sets, so classification has an explicit `Undecided` outcome.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::dyadic::Rat;
use crate::error::{Error, Result};
use crate::natset::NatSet;

pub const SUBMEASURE_SLACK: f64 = 1e-12;

fn rat(n: u64, d: u64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// mu_n(S) = |S ∩ [0, n]| / (n + 1), exact.
pub fn mu_n(s: &NatSet, n: u64) -> Result<Rat> {
    let count = s.count_prefix(n)?;
    Ok(rat(count, n + 1))
}

/// One pass over [0, N] recording the running mu values and the extrema of
/// mu over the tail window [ceil(N/2), N].
struct DensitySweep {
    max_in_window: (u64, u64), // (count, n) attaining the max
    min_in_window: (u64, u64),
    sup_all: (u64, u64),
}

// compare c1/(n1+1) vs c2/(n2+1) by cross multiplication
fn mu_lt(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0 as u128) * (b.1 as u128 + 1) < (b.0 as u128) * (a.1 as u128 + 1)
}

fn density_sweep(s: &NatSet, n_max: u64) -> Result<DensitySweep> {
    s.check_horizon(n_max)?;
    let window_start = n_max.div_ceil(2);
    let mut count: u64 = 0;
    let mut max_in_window = (0u64, window_start);
    let mut min_in_window = (u64::MAX, 0u64);
    let mut sup_all = (0u64, 0u64);
    for n in 0..=n_max {
        if s.contains(n)? {
            count += 1;
        }
        let cur = (count, n);
        if mu_lt(sup_all, cur) {
            sup_all = cur;
        }
        if n >= window_start {
            if min_in_window.0 == u64::MAX || mu_lt(cur, min_in_window) {
                min_in_window = cur;
            }
            if mu_lt(max_in_window, cur) {
                max_in_window = cur;
            }
        }
    }
    Ok(DensitySweep {
        max_in_window,
        min_in_window,
        sup_all,
    })
}

/// Tail-window estimator of the upper asymptotic density d*:
/// max of mu_n(S) over n in [ceil(N/2), N].
pub fn upper_density_estimate(s: &NatSet, n_max: u64) -> Result<Rat> {
    if n_max < 2 {
        return Err(Error::HorizonTooSmall(n_max, 2));
    }
    let sw = density_sweep(s, n_max)?;
    Ok(rat(sw.max_in_window.0, sw.max_in_window.1 + 1))
}

/// Tail-window estimator of the lower asymptotic density, min over the same window.
pub fn lower_density_estimate(s: &NatSet, n_max: u64) -> Result<Rat> {
    if n_max < 2 {
        return Err(Error::HorizonTooSmall(n_max, 2));
    }
    let sw = density_sweep(s, n_max)?;
    Ok(rat(sw.min_in_window.0, sw.min_in_window.1 + 1))
}

/// sup_n mu_n(S) over the whole range [0, N]. Used where a construction
/// realizes each density peak once inside the horizon, so the peak rather
/// than the tail window is the faithful finite analogue of the limsup.
pub fn peak_density_estimate(s: &NatSet, n_max: u64) -> Result<Rat> {
    if n_max < 2 {
        return Err(Error::HorizonTooSmall(n_max, 2));
    }
    let sw = density_sweep(s, n_max)?;
    Ok(rat(sw.sup_all.0, sw.sup_all.1 + 1))
}

/// Sampled mu_n trace plus window extrema, for CSV export.
#[derive(Debug, Clone)]
pub struct DensityTrace {
    pub horizon: u64,
    /// (n, mu_n) sampled every `stride`.
    pub values: Vec<(u64, Rat)>,
    pub running_sup: Rat,
    pub running_inf_tail: Rat,
}

pub fn density_trace(s: &NatSet, n_max: u64, stride: u64) -> Result<DensityTrace> {
    if n_max < 2 {
        return Err(Error::HorizonTooSmall(n_max, 2));
    }
    let stride = stride.max(1);
    s.check_horizon(n_max)?;
    let window_start = n_max.div_ceil(2);
    let mut count = 0u64;
    let mut values = Vec::new();
    let mut sup = (0u64, 0u64);
    let mut inf_tail = (u64::MAX, 0u64);
    for n in 0..=n_max {
        if s.contains(n)? {
            count += 1;
        }
        let cur = (count, n);
        if mu_lt(sup, cur) {
            sup = cur;
        }
        if n >= window_start && (inf_tail.0 == u64::MAX || mu_lt(cur, inf_tail)) {
            inf_tail = cur;
        }
        if n % stride == 0 || n == n_max {
            values.push((n, rat(count, n + 1)));
        }
    }
    Ok(DensityTrace {
        horizon: n_max,
        values,
        running_sup: rat(sup.0, sup.1 + 1),
        running_inf_tail: rat(inf_tail.0, inf_tail.1 + 1),
    })
}

/// A lower semicontinuous submeasure, evaluated on explicit finite sets.
/// The axioms (empty set, monotonicity, subadditivity, finiteness on finite
/// sets) are checked by the property suite, not by construction.
type EvalFn = Arc<dyn Fn(&[u64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Lscsm {
    pub name: String,
    eval: EvalFn,
}

impl std::fmt::Debug for Lscsm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lscsm({})", self.name)
    }
}

impl Lscsm {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[u64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lscsm {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// Evaluate on an explicit sorted finite set.
    pub fn eval(&self, elems: &[u64]) -> f64 {
        (self.eval)(elems)
    }

    /// phi(S) = |S|.
    pub fn counting() -> Self {
        Lscsm::new("counting", |e| e.len() as f64)
    }

    /// phi(S) = sup_n |S ∩ [0,n]| / (n+1); the sup over a finite set is
    /// attained at one of its elements.
    pub fn sup_density() -> Self {
        Lscsm::new("sup-density", |e| {
            e.iter()
                .enumerate()
                .map(|(i, &x)| (i + 1) as f64 / (x + 1) as f64)
                .fold(0.0, f64::max)
        })
    }

    /// nu(S) = sup_n |S ∩ [2^n, 2^{n+1})| / 2^n.
    pub fn dyadic_block_sup() -> Self {
        Lscsm::new("dyadic-block-sup", |e| {
            let mut best: f64 = if e.contains(&0) { 1.0 } else { 0.0 };
            let mut idx = 0usize;
            for b in 0..63u32 {
                let lo = 1u64 << b;
                let hi = 2u64 << b;
                while idx < e.len() && e[idx] < lo {
                    idx += 1;
                }
                let mut cnt = 0u64;
                let mut j = idx;
                while j < e.len() && e[j] < hi {
                    cnt += 1;
                    j += 1;
                }
                if cnt > 0 {
                    best = best.max(cnt as f64 / lo as f64);
                }
                if idx >= e.len() {
                    break;
                }
            }
            best
        })
    }

    /// phi(S) = sum over n in S of 1/(n+1).
    pub fn harmonic() -> Self {
        Lscsm::new("harmonic", |e| e.iter().map(|&n| 1.0 / (n + 1) as f64).sum())
    }
}

/// || S ||_phi tail estimate: phi((S \ [0, m]) ∩ [0, N]).
/// Nonincreasing in the cut m for fixed N by monotonicity of phi.
pub fn exhaustive_norm_estimate(phi: &Lscsm, s: &NatSet, cut_m: u64, n_max: u64) -> Result<f64> {
    if cut_m > n_max {
        return Err(Error::Precondition(format!(
            "cut m={cut_m} exceeds horizon N={n_max}"
        )));
    }
    let elems: Vec<u64> = s
        .elements_upto(n_max)?
        .into_iter()
        .filter(|&x| x > cut_m)
        .collect();
    Ok(phi.eval(&elems))
}

/// Computable description of an ideal on the naturals.
#[derive(Debug, Clone)]
pub enum IdealSpec {
    Fin,
    DensityZero,
    LogDensityZero,
    Summable,
    CountablyGenerated(Vec<NatSet>),
    FromLscsmFin(Lscsm),
    FromLscsmExh(Lscsm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    InIdeal,
    Positive,
    Undecided,
}

/// Finite-horizon surrogate for "S in I" vs "S in I+". Thresholds make the
/// estimation semantics explicit; `Undecided` is a first-class outcome.
pub fn in_ideal_at_horizon(
    ideal: &IdealSpec,
    s: &NatSet,
    n_max: u64,
    delta: &Rat,
) -> Result<Membership> {
    if delta <= &Rat::zero() {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let delta_f = rat_to_f64(delta);
    match ideal {
        IdealSpec::Fin => {
            let count = s.count_prefix(n_max)? as f64;
            if count > 1.0 / delta_f {
                Ok(Membership::Positive)
            } else if s.is_explicit() {
                Ok(Membership::InIdeal)
            } else {
                Ok(Membership::Undecided)
            }
        }
        IdealSpec::DensityZero => {
            let est = upper_density_estimate(s, n_max)?;
            let half = delta / Rat::from_integer(BigInt::from(2));
            if est >= *delta {
                Ok(Membership::Positive)
            } else if est < half {
                Ok(Membership::InIdeal)
            } else {
                Ok(Membership::Undecided)
            }
        }
        IdealSpec::LogDensityZero => {
            // sum_{k in S ∩ (0,n]} 1/k against log(n), tail window max
            let est = log_density_estimate(s, n_max)?;
            if est >= delta_f {
                Ok(Membership::Positive)
            } else if est < delta_f / 2.0 {
                Ok(Membership::InIdeal)
            } else {
                Ok(Membership::Undecided)
            }
        }
        IdealSpec::Summable => {
            let half_h = n_max / 2;
            let p_half = partial_harmonic(s, half_h)?;
            let p_full = partial_harmonic(s, n_max)?;
            if p_full > 1.0 / delta_f {
                Ok(Membership::Positive)
            } else if p_full - p_half < delta_f / 2.0 {
                // mass accretion stalled inside the horizon
                Ok(Membership::InIdeal)
            } else {
                Ok(Membership::Undecided)
            }
        }
        IdealSpec::CountablyGenerated(gens) => {
            if gens.is_empty() {
                return Err(Error::Precondition(
                    "CountablyGenerated needs at least one generator".into(),
                ));
            }
            let mut uncovered = None;
            'outer: for n in s.elements_upto(n_max)? {
                for g in gens {
                    if g.contains(n)? {
                        continue 'outer;
                    }
                }
                uncovered = Some(n);
                break;
            }
            match uncovered {
                // a point outside every generator witnesses S ⊄ any finite union
                Some(_) => Ok(Membership::Positive),
                None if s.is_explicit() => Ok(Membership::InIdeal),
                None => Ok(Membership::Undecided),
            }
        }
        IdealSpec::FromLscsmFin(phi) => {
            // Fin(phi): S in I iff phi(S) = infinity
            let half = phi.eval(&s.elements_upto(n_max / 2)?);
            let full = phi.eval(&s.elements_upto(n_max)?);
            if full > 1.0 / delta_f {
                Ok(Membership::InIdeal)
            } else if full - half <= delta_f {
                Ok(Membership::Positive)
            } else {
                Ok(Membership::Undecided)
            }
        }
        IdealSpec::FromLscsmExh(phi) => {
            // Exh(phi): S in I iff the phi-mass at infinity vanishes
            let est = exhaustive_norm_estimate(phi, s, n_max / 2, n_max)?;
            if est >= delta_f {
                Ok(Membership::Positive)
            } else if est < delta_f / 2.0 {
                Ok(Membership::InIdeal)
            } else {
                Ok(Membership::Undecided)
            }
        }
    }
}

fn partial_harmonic(s: &NatSet, n_max: u64) -> Result<f64> {
    Ok(s.elements_upto(n_max)?
        .iter()
        .map(|&n| 1.0 / (n + 1) as f64)
        .sum())
}

fn log_density_estimate(s: &NatSet, n_max: u64) -> Result<f64> {
    s.check_horizon(n_max)?;
    let window_start = n_max.div_ceil(2).max(2);
    let mut sum = 0.0f64;
    let mut best = 0.0f64;
    for n in 1..=n_max {
        if s.contains(n)? {
            sum += 1.0 / n as f64;
        }
        if n >= window_start {
            best = best.max(sum / (n as f64).ln());
        }
    }
    Ok(best)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let d = crate::dyadic::Dyadic::from_rat(r.clone());
        d.to_f64()
    })
}

/// Randomized check of the lscsm axioms on pairs of finite subsets of
/// [0, max_elem]. Returns a counterexample description on failure.
pub fn check_lscsm_axioms(
    phi: &Lscsm,
    trials: u32,
    max_elem: u64,
    rng: &mut impl Rng,
) -> std::result::Result<(), String> {
    if phi.eval(&[]) != 0.0 {
        return Err(format!("{}: phi(empty) = {} != 0", phi.name, phi.eval(&[])));
    }
    for _ in 0..trials {
        let a = random_subset(max_elem, rng);
        let b = random_subset(max_elem, rng);
        let union = merge(&a, &b);
        let fa = phi.eval(&a);
        let fb = phi.eval(&b);
        let fu = phi.eval(&union);
        if !fa.is_finite() || !fb.is_finite() {
            return Err(format!("{}: infinite value on a finite set", phi.name));
        }
        if fu > fa + fb + SUBMEASURE_SLACK {
            return Err(format!(
                "{}: subadditivity fails: phi(A∪B)={fu} > {fa}+{fb} (A={a:?}, B={b:?})",
                phi.name
            ));
        }
        // monotonicity: A ∩ B ⊆ A
        let inter: Vec<u64> = a.iter().copied().filter(|x| b.contains(x)).collect();
        let fi = phi.eval(&inter);
        if fi > fa + SUBMEASURE_SLACK {
            return Err(format!(
                "{}: monotonicity fails: phi(A∩B)={fi} > phi(A)={fa} (A={a:?}, B={b:?})",
                phi.name
            ));
        }
    }
    Ok(())
}

fn random_subset(max_elem: u64, rng: &mut impl Rng) -> Vec<u64> {
    (0..=max_elem).filter(|_| rng.gen_bool(0.3)).collect()
}

fn merge(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = a.iter().chain(b.iter()).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use num_traits::Signed;
    use super::*;
    use num_traits::One;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn mu_n_examples() {
        assert_eq!(mu_n(&NatSet::empty(), 9).unwrap(), Rat::zero());
        assert_eq!(
            mu_n(&NatSet::explicit(vec![0, 2, 4, 6, 8]), 9).unwrap(),
            r(5, 10)
        );
        assert_eq!(mu_n(&NatSet::explicit(vec![0, 1, 2, 3]), 3).unwrap(), Rat::one());
    }

    #[test]
    fn mu_n_horizon_error() {
        let s = NatSet::evens(5);
        assert!(mu_n(&s, 6).is_err());
    }

    #[test]
    fn density_estimates_evens() {
        let s = NatSet::evens(10_000);
        let up = upper_density_estimate(&s, 10_000).unwrap();
        let lo = lower_density_estimate(&s, 10_000).unwrap();
        let half = r(1, 2);
        let tol = r(1, 100);
        assert!((up.clone() - half.clone()).abs() < tol);
        assert!((lo.clone() - half).abs() < tol);
        assert!(lo <= up);
    }

    #[test]
    fn full_set_density_one() {
        let s = NatSet::full(100);
        assert_eq!(upper_density_estimate(&s, 100).unwrap(), Rat::one());
    }

    #[test]
    fn finite_set_density_bound() {
        let s = NatSet::explicit(vec![1, 5, 9]);
        let n = 1000u64;
        let up = upper_density_estimate(&s, n).unwrap();
        assert!(up <= r(3, (n / 2 + 1) as i64));
    }

    #[test]
    fn small_horizon_rejected() {
        assert!(upper_density_estimate(&NatSet::empty(), 1).is_err());
    }

    #[test]
    fn exhaustive_norm_examples() {
        let phi = Lscsm::sup_density();
        let s = NatSet::explicit(vec![1, 2, 3]);
        assert_eq!(exhaustive_norm_estimate(&phi, &s, 10, 100).unwrap(), 0.0);

        let evens = NatSet::evens(10_000);
        let est = exhaustive_norm_estimate(&phi, &evens, 100, 10_000).unwrap();
        assert!((est - 0.5).abs() < 0.02, "est = {est}");

        let h = Lscsm::harmonic();
        let omega = NatSet::full(100_000);
        let est = exhaustive_norm_estimate(&h, &omega, 10, 100_000).unwrap();
        assert!(est >= 2.0);
    }

    #[test]
    fn exhaustive_norm_nonincreasing_in_cut() {
        let phi = Lscsm::sup_density();
        let s = NatSet::evens(2000);
        let mut prev = f64::INFINITY;
        for m in [0u64, 10, 100, 500, 1000] {
            let est = exhaustive_norm_estimate(&phi, &s, m, 2000).unwrap();
            assert!(est <= prev + SUBMEASURE_SLACK);
            prev = est;
        }
    }

    #[test]
    fn ideal_membership_examples() {
        let d = r(1, 10);
        assert_eq!(
            in_ideal_at_horizon(&IdealSpec::DensityZero, &NatSet::evens(10_000), 10_000, &d)
                .unwrap(),
            Membership::Positive
        );
        let fin_d = r(1, 1000);
        assert_eq!(
            in_ideal_at_horizon(
                &IdealSpec::Fin,
                &NatSet::explicit((0..10).collect()),
                10_000,
                &fin_d
            )
            .unwrap(),
            Membership::InIdeal
        );
        let sq_d = r(1, 100);
        assert_eq!(
            in_ideal_at_horizon(&IdealSpec::Summable, &NatSet::squares(1_000_000), 1_000_000, &sq_d)
                .unwrap(),
            Membership::InIdeal
        );
    }

    #[test]
    fn countably_generated_membership() {
        let gens = vec![NatSet::evens(1000)];
        let ideal = IdealSpec::CountablyGenerated(gens);
        let d = r(1, 10);
        // odd element escapes the generator: positive, exactly
        assert_eq!(
            in_ideal_at_horizon(&ideal, &NatSet::explicit(vec![0, 3]), 100, &d).unwrap(),
            Membership::Positive
        );
        // explicit covered set is in the ideal, exactly
        assert_eq!(
            in_ideal_at_horizon(&ideal, &NatSet::explicit(vec![0, 2, 8]), 100, &d).unwrap(),
            Membership::InIdeal
        );
        // covered rule set stays undecided
        assert_eq!(
            in_ideal_at_horizon(&ideal, &NatSet::evens(1000), 100, &d).unwrap(),
            Membership::Undecided
        );
    }

    #[test]
    fn lscsm_axioms_hold_for_builtins() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::SeedableRng;
        for phi in [
            Lscsm::counting(),
            Lscsm::sup_density(),
            Lscsm::dyadic_block_sup(),
            Lscsm::harmonic(),
        ] {
            check_lscsm_axioms(&phi, 200, 64, &mut rng).unwrap();
        }
    }

    #[test]
    fn exh_classification_agrees_for_density_lscsms() {
        // Z = Exh(sup-density) = Exh(dyadic-block-sup) on the test corpus
        let n = 1 << 16;
        let corpus = [
            NatSet::evens(n),
            NatSet::squares(n),
            NatSet::interval_union(2, n),
            NatSet::empty(),
            NatSet::full(n),
        ];
        let d = r(1, 20);
        for s in &corpus {
            let a = in_ideal_at_horizon(&IdealSpec::FromLscsmExh(Lscsm::sup_density()), s, n, &d)
                .unwrap();
            let b = in_ideal_at_horizon(
                &IdealSpec::FromLscsmExh(Lscsm::dyadic_block_sup()),
                s,
                n,
                &d,
            )
            .unwrap();
            assert_eq!(a, b, "disagree on {}", s.name());
        }
    }
}
