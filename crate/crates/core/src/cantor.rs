//! Finite-universe combinatorics of the power set of the naturals:
//! hereditary families, basic clopen sets and their hat-relaxations, and the
//! Baire-space gadgets used in the complexity reduction.
//!
//! Subsets of [0, M] are bitmasks; exhaustive operations are guarded by
//! universe caps (2^16 subsets is tractable, and the decomposition's content
//! is fully exercised at that scale).

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natset::NatSet;

pub const CLOSURE_CAP: u32 = 20;
pub const EXHAUSTIVE_CAP: u32 = 16;

/// A family of subsets of the universe [0, bound], each subset a bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFamily {
    pub bound: u32,
    pub members: BTreeSet<u32>,
}

/// Symbolic Borel-class label attached to family constructors. Levels >= 3
/// are bookkeeping only; no computation is attempted there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorelClassLabel {
    /// hereditary closed
    HatPi1,
    /// countable union of hereditary closed
    HatSigma { level: u32 },
    /// countable intersection of the previous sigma level
    HatPi { level: u32 },
}

impl FiniteFamily {
    pub fn new(bound: u32, members: impl IntoIterator<Item = u32>) -> Result<Self> {
        if bound > CLOSURE_CAP {
            return Err(Error::UniverseTooLarge(bound, CLOSURE_CAP));
        }
        let universe_mask = mask_upto(bound);
        let members: BTreeSet<u32> = members.into_iter().collect();
        for &m in &members {
            if m & !universe_mask != 0 {
                return Err(Error::Precondition(format!(
                    "member {:?} exceeds universe [0,{bound}]",
                    mask_to_set(m)
                )));
            }
        }
        Ok(FiniteFamily { bound, members })
    }

    pub fn from_sets(bound: u32, sets: &[Vec<u32>]) -> Result<Self> {
        FiniteFamily::new(bound, sets.iter().map(|s| set_to_mask(s)))
    }

    pub fn to_sets(&self) -> Vec<Vec<u32>> {
        self.members.iter().map(|&m| mask_to_set(m)).collect()
    }

    pub fn contains_mask(&self, m: u32) -> bool {
        self.members.contains(&m)
    }

    pub fn is_hereditary(&self) -> bool {
        self.hereditarity_witness().is_none()
    }

    /// Some (member, missing subset) pair if not hereditary.
    pub fn hereditarity_witness(&self) -> Option<(u32, u32)> {
        for &m in &self.members {
            // dropping any single element must stay inside
            let mut bits = m;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                let sub = m & !low;
                if !self.members.contains(&sub) {
                    return Some((m, sub));
                }
                bits &= bits - 1;
            }
        }
        None
    }
}

pub fn mask_upto(bound: u32) -> u32 {
    if bound >= 31 {
        u32::MAX
    } else {
        (1u32 << (bound + 1)) - 1
    }
}

pub fn set_to_mask(s: &[u32]) -> u32 {
    s.iter().fold(0u32, |acc, &x| acc | (1 << x))
}

pub fn mask_to_set(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut i = 0u32;
    while m != 0 {
        if m & 1 != 0 {
            out.push(i);
        }
        m >>= 1;
        i += 1;
    }
    out
}

/// Smallest hereditary family containing `fam`; idempotent and extensive.
pub fn hereditary_closure(fam: &FiniteFamily) -> Result<FiniteFamily> {
    if fam.bound > CLOSURE_CAP {
        return Err(Error::UniverseTooLarge(fam.bound, CLOSURE_CAP));
    }
    let mut closed: BTreeSet<u32> = BTreeSet::new();
    let mut stack: Vec<u32> = fam.members.iter().copied().collect();
    while let Some(m) = stack.pop() {
        if !closed.insert(m) {
            continue;
        }
        let mut bits = m;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            let sub = m & !low;
            if !closed.contains(&sub) {
                stack.push(sub);
            }
            bits &= bits - 1;
        }
    }
    Ok(FiniteFamily {
        bound: fam.bound,
        members: closed,
    })
}

/// Basic clopen set G_k determined by a finite set F_k:
/// G_k = { S : S ∩ [0, max F_k] = F_k }.
#[derive(Debug, Clone)]
pub struct BasicClopen {
    pub f_k: Vec<u64>,
}

impl BasicClopen {
    pub fn new(mut f_k: Vec<u64>) -> Self {
        f_k.sort_unstable();
        f_k.dedup();
        BasicClopen { f_k }
    }

    pub fn max(&self) -> Option<u64> {
        self.f_k.last().copied()
    }
}

/// Membership in the hat-relaxation Ghat_k = { S : F_k ⊆ S ∩ [0, max F_k] }.
/// With F_k empty, membership is vacuously true; callers never rely on that
/// edge case but it keeps the relaxation total.
pub fn hat_g_membership(f_k: &BasicClopen, s: &NatSet) -> Result<bool> {
    for &n in &f_k.f_k {
        if !s.contains(n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brute-force verification of the hat decomposition: writing
/// G = P([0,M]) \ F as the union of its basic clopen pieces G_k, the union
/// of the relaxed pieces Ghat_k covers exactly the same family.
pub fn verify_hat_decomposition(fam: &FiniteFamily) -> Result<bool> {
    if fam.bound > EXHAUSTIVE_CAP {
        return Err(Error::UniverseTooLarge(fam.bound, EXHAUSTIVE_CAP));
    }
    if let Some((m, sub)) = fam.hereditarity_witness() {
        return Err(Error::NotHereditary {
            member: mask_to_set(m),
            subset: mask_to_set(sub),
        });
    }
    let n_bits = fam.bound + 1;
    let total: u32 = 1u32 << n_bits;
    let universe_mask = mask_upto(fam.bound);

    // complement family G and its clopen pieces, one per element S of G
    let mut union_g = vec![false; total as usize];
    let mut union_ghat = vec![false; total as usize];
    for piece in 0..total {
        if fam.members.contains(&piece) {
            continue;
        }
        // G_piece = { A : A ∩ [0, max piece] = piece }. The piece 0 (empty
        // F_k) only occurs when the family itself is empty; both the strict
        // and the hat version then cover everything, matching the vacuous
        // convention.
        let below = if piece == 0 {
            0
        } else {
            mask_upto(31 - piece.leading_zeros())
        };
        for a in 0..total {
            let a = a & universe_mask;
            if a & below == piece {
                union_g[a as usize] = true;
            }
            if a & piece == piece {
                union_ghat[a as usize] = true;
            }
        }
    }
    Ok(union_g == union_ghat)
}

/// A point of Baire space given by a finite prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BairePoint {
    pub prefix: Vec<u64>,
}

impl BairePoint {
    pub fn new(prefix: Vec<u64>) -> Self {
        BairePoint { prefix }
    }
}

/// h(x) = (min{n, x_n}); a retraction of Baire space onto the triangle
/// { x : x_n <= n }.
pub fn baire_h(x: &BairePoint) -> BairePoint {
    BairePoint {
        prefix: x
            .prefix
            .iter()
            .enumerate()
            .map(|(n, &v)| v.min(n as u64))
            .collect(),
    }
}

/// True iff the prefix satisfies x_n <= n.
pub fn delta_check(x: &BairePoint) -> bool {
    x.prefix.iter().enumerate().all(|(n, &v)| v <= n as u64)
}

/// Random hereditary family over [0, bound] from `gens` random generators.
pub fn random_hereditary(bound: u32, gens: u32, rng: &mut impl Rng) -> Result<FiniteFamily> {
    let universe_mask = mask_upto(bound);
    let members: Vec<u32> = (0..gens)
        .map(|_| rng.gen::<u32>() & universe_mask)
        .collect();
    hereditary_closure(&FiniteFamily::new(bound, members)?)
}
