//! Exact dyadic-scaled rationals.
//!
//! Block vectors built from Constant(2)-weighted shifts carry coordinates of
//! the form q * 2^e with q a small rational and |e| in the tens of thousands.
//! Storing the power of two apart from the fraction keeps products and
//! equality tests cheap where a plain `BigRational` would materialize
//! megabit integers.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Value `frac * 2^exp`, with all factors of two folded into `exp`
/// (so `frac` has odd numerator and denominator, and zero is `0 * 2^0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    frac: Rat,
    exp: i64,
}

fn v2(n: &BigInt) -> i64 {
    n.trailing_zeros().map(|z| z as i64).unwrap_or(0)
}

fn pow2_rat(e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << e as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

impl Dyadic {
    pub fn new(frac: Rat, exp: i64) -> Self {
        let mut d = Dyadic { frac, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            frac: Rat::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            frac: Rat::one(),
            exp: 0,
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::new(r, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from_integer(BigInt::from(n)))
    }

    /// Exact conversion; every finite f64 is a dyadic rational.
    pub fn from_f64(x: f64) -> Option<Self> {
        Rat::from_float(x).map(Self::from_rat)
    }

    pub fn pow2(e: i64) -> Self {
        Dyadic {
            frac: Rat::one(),
            exp: e,
        }
    }

    fn normalize(&mut self) {
        if self.frac.is_zero() {
            self.exp = 0;
            return;
        }
        let tn = v2(self.frac.numer());
        let td = v2(self.frac.denom());
        if tn > 0 || td > 0 {
            let shift = tn - td;
            self.frac = &self.frac * pow2_rat(-shift);
            self.exp += shift;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.frac.is_zero()
    }

    pub fn frac(&self) -> &Rat {
        &self.frac
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            frac: -self.frac.clone(),
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            frac: self.frac.abs(),
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::new(&self.frac * &other.frac, self.exp + other.exp)
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero dyadic");
        if self.is_zero() {
            return Self::zero();
        }
        Self::new(&self.frac / &other.frac, self.exp - other.exp)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let fa = &self.frac * pow2_rat(self.exp - e);
        let fb = &other.frac * pow2_rat(other.exp - e);
        Self::new(fa + fb, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn powi(&self, k: u32) -> Self {
        if k == 0 {
            return Self::one();
        }
        // the fraction is already free of 2-adic parts, so the power is too
        Dyadic {
            frac: num_traits::Pow::pow(&self.frac, k),
            exp: self.exp * k as i64,
        }
    }

    pub fn sign(&self) -> i8 {
        match self.frac.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// log2 of the absolute value; `None` for zero.
    pub fn log2_abs(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        Some(log2_bigint(self.frac.numer()) - log2_bigint(self.frac.denom()) + self.exp as f64)
    }

    /// Saturating conversion: overflow maps to +/-inf, deep underflow to 0.
    pub fn to_f64(&self) -> f64 {
        match self.log2_abs() {
            None => 0.0,
            Some(l) if l > 1030.0 => {
                if self.sign() > 0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Some(l) if l < -1080.0 => 0.0,
            Some(_) => {
                let f = self.frac.numer().to_f64().unwrap_or(f64::NAN)
                    / self.frac.denom().to_f64().unwrap_or(f64::NAN);
                if f.is_finite() && f != 0.0 {
                    f * (self.exp as f64).exp2()
                } else {
                    // frac itself out of f64 range; go through logs
                    let l = self.log2_abs().unwrap();
                    (self.sign() as f64) * l.exp2()
                }
            }
        }
    }

    /// Expands to a plain rational. Cheap only when `exp` is modest.
    pub fn to_rat(&self) -> Rat {
        &self.frac * pow2_rat(self.exp)
    }

    /// Exact comparison of absolute values.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // fast path: disjoint log2 intervals
        let la = self.log2_abs().unwrap();
        let lb = other.log2_abs().unwrap();
        if la + 0.5 < lb {
            return Ordering::Less;
        }
        if lb + 0.5 < la {
            return Ordering::Greater;
        }
        let e = self.exp.min(other.exp);
        let fa = self.frac.abs() * pow2_rat(self.exp - e);
        let fb = other.frac.abs() * pow2_rat(other.exp - e);
        fa.cmp(&fb)
    }

    /// Exact comparison of |self| against a nonnegative rational.
    pub fn cmp_abs_rat(&self, bound: &Rat) -> Ordering {
        self.cmp_abs(&Dyadic::from_rat(bound.clone()))
    }
}

fn log2_bigint(n: &BigInt) -> f64 {
    let m = n.magnitude();
    let bits = m.bits();
    if bits <= 53 {
        return m.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (m >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Signed log2 pair used by the fast orbit paths: `(sign, log2 |v|)`.
#[derive(Debug, Clone, Copy)]
pub struct SignedLog {
    pub sign: i8,
    pub log2: f64,
}

impl SignedLog {
    pub fn zero() -> Self {
        SignedLog {
            sign: 0,
            log2: f64::NEG_INFINITY,
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            let m = if self.log2 > 1030.0 {
                f64::INFINITY
            } else {
                self.log2.exp2()
            };
            self.sign as f64 * m
        }
    }
}

/// Shared pure membership rule; wrapped so set values stay cloneable.
pub type MemberFn = Arc<dyn Fn(u64) -> bool + Send + Sync>;
