//! Bijective enumeration of finitely supported rational sequences.
//!
//! A natural-number code is unfolded into a list of coordinate codes through
//! Cantor pairing (nil = 0, cons(h, t) = pair(h, t) + 1), and each coordinate
//! code into a rational through the Calkin-Wilf tree with sign interleaving.
//! The cons encoding makes the code of a length-L list at least L, so the
//! support length of the i-th target never exceeds max(1, i).

use std::collections::BTreeSet;

use num_bigint::BigUint;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dyadic::Rat;
use num_bigint::BigInt;

pub fn pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z+1) - 1)/2), the diagonal index
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = z - t;
    let a = &w - &b;
    (a, b)
}

/// Position (>= 1) of a positive rational in breadth-first Calkin-Wilf order.
pub fn cw_index(q: &Rat) -> BigUint {
    assert!(q.is_positive());
    let mut a = q.numer().magnitude().clone();
    let mut b = q.denom().magnitude().clone();
    // path bits leaf-to-root: 1 = right child (a+b)/b, 0 = left child a/(a+b)
    let mut bits: Vec<bool> = Vec::new();
    while !(a.is_one() && b.is_one()) {
        if a > b {
            // k consecutive right steps, Euclidean-batched
            let k = (&a - 1u32) / &b;
            a -= &b * &k;
            let k = k.to_u64().expect("path length fits u64") as usize;
            bits.resize(bits.len() + k, true);
        } else {
            let k = (&b - 1u32) / &a;
            b -= &a * &k;
            let k = k.to_u64().expect("path length fits u64") as usize;
            bits.resize(bits.len() + k, false);
        }
    }
    let mut idx = BigUint::one();
    for &bit in bits.iter().rev() {
        idx = &idx * 2u32 + if bit { 1u32 } else { 0u32 };
    }
    idx
}

/// Inverse of `cw_index`.
pub fn cw_rational(n: &BigUint) -> Rat {
    assert!(!n.is_zero());
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    let nbits = n.bits();
    // walk root-to-leaf along the binary digits below the leading 1
    for i in (0..nbits.saturating_sub(1)).rev() {
        if n.bit(i) {
            a = &a + &b;
        } else {
            b = &a + &b;
        }
    }
    Rat::new(BigInt::from(a), BigInt::from(b))
}

/// Code 0 <-> 0, 2k-1 <-> +q_k, 2k <-> -q_k.
pub fn rat_decode(c: &BigUint) -> Rat {
    if c.is_zero() {
        return Rat::zero();
    }
    let k = (c + 1u32) / 2u32;
    let q = cw_rational(&k);
    if (c % 2u32).is_one() {
        q
    } else {
        -q
    }
}

pub fn rat_encode(q: &Rat) -> BigUint {
    if q.is_zero() {
        return BigUint::zero();
    }
    let k = cw_index(&q.abs());
    if q.is_positive() {
        &k * 2u32 - 1u32
    } else {
        k * 2u32
    }
}

/// Decodes a code into the values of a finitely supported sequence. The
/// final list entry is shifted by one so the last value is never zero,
/// keeping the map bijective despite trailing-zero padding.
pub fn decode_sequence(code: &BigUint) -> Vec<Rat> {
    let mut codes: Vec<BigUint> = Vec::new();
    let mut rest = code.clone();
    while !rest.is_zero() {
        let (h, t) = unpair(&(rest - 1u32));
        codes.push(h);
        rest = t;
    }
    let n = codes.len();
    codes
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if i + 1 == n {
                rat_decode(&(c + 1u32))
            } else {
                rat_decode(&c)
            }
        })
        .collect()
}

/// Inverse of `decode_sequence`; trailing zeros are stripped first.
pub fn encode_sequence(values: &[Rat]) -> BigUint {
    let mut values = values.to_vec();
    while values.last().is_some_and(|v| v.is_zero()) {
        values.pop();
    }
    let n = values.len();
    let mut code = BigUint::zero();
    for (i, v) in values.iter().enumerate().rev() {
        let c = if i + 1 == n {
            rat_encode(v) - 1u32
        } else {
            rat_encode(v)
        };
        code = pair(&c, &code) + 1u32;
    }
    code
}

#[derive(Debug, Clone)]
pub enum EnumerationMode {
    /// Target i decodes code i directly.
    Generic,
    /// Greedy reordering that only admits code c as target i once the
    /// decoded values satisfy sup |v| <= 2^{i/p}; every code is still
    /// assigned eventually, so this is a permutation of the generic order.
    Rescaled { p: f64 },
}

#[derive(Debug)]
pub struct TargetEnumeration {
    pub mode: EnumerationMode,
    assigned: Vec<BigUint>,
    used: BTreeSet<BigUint>,
}

impl TargetEnumeration {
    pub fn new(mode: EnumerationMode) -> Self {
        TargetEnumeration {
            mode,
            assigned: Vec::new(),
            used: BTreeSet::new(),
        }
    }

    fn admits(&self, i: usize, values: &[Rat]) -> bool {
        match &self.mode {
            EnumerationMode::Generic => true,
            EnumerationMode::Rescaled { p } => {
                if values.len() > 1.max(i) {
                    return false;
                }
                let bound = (i as f64 / p).exp2();
                values
                    .iter()
                    .all(|v| crate::ideals::rat_to_f64(&v.abs()) <= bound)
            }
        }
    }

    pub fn code(&mut self, i: usize) -> BigUint {
        while self.assigned.len() <= i {
            let next = self.assigned.len();
            let code = match self.mode {
                EnumerationMode::Generic => BigUint::from(next),
                EnumerationMode::Rescaled { .. } => {
                    let mut c = BigUint::zero();
                    loop {
                        if !self.used.contains(&c) && self.admits(next, &decode_sequence(&c)) {
                            break c;
                        }
                        c += 1u32;
                    }
                }
            };
            self.used.insert(code.clone());
            self.assigned.push(code);
        }
        self.assigned[i].clone()
    }

    /// Values of the i-th target (trailing zeros trimmed).
    pub fn values(&mut self, i: usize) -> Vec<Rat> {
        let code = self.code(i);
        decode_sequence(&code)
    }

    /// Support-prefix length m_i of the i-th target, at least 1.
    pub fn prefix_len(&mut self, i: usize) -> u64 {
        self.values(i).len().max(1) as u64
    }
}
