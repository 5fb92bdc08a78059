//! Subsets of the naturals with finite-horizon membership semantics.

use std::fmt;
use std::sync::Arc;

use crate::dyadic::MemberFn;
use crate::error::{Error, Result};

/// Either an explicit sorted finite set or a pure membership rule queryable
/// up to a declared horizon.
#[derive(Clone)]
pub enum NatSet {
    Explicit(Vec<u64>),
    Rule {
        name: String,
        f: MemberFn,
        horizon: u64,
    },
}

impl fmt::Debug for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatSet::Explicit(v) if v.len() <= 16 => write!(f, "NatSet::Explicit({v:?})"),
            NatSet::Explicit(v) => write!(f, "NatSet::Explicit(|{}| elements)", v.len()),
            NatSet::Rule { name, horizon, .. } => {
                write!(f, "NatSet::Rule({name}, horizon={horizon})")
            }
        }
    }
}

impl NatSet {
    pub fn explicit(mut elems: Vec<u64>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        NatSet::Explicit(elems)
    }

    pub fn rule(
        name: impl Into<String>,
        horizon: u64,
        f: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        NatSet::Rule {
            name: name.into(),
            f: Arc::new(f),
            horizon,
        }
    }

    pub fn empty() -> Self {
        NatSet::Explicit(Vec::new())
    }

    pub fn full(horizon: u64) -> Self {
        NatSet::rule("full", horizon, |_| true)
    }

    pub fn evens(horizon: u64) -> Self {
        NatSet::rule("evens", horizon, |n| n % 2 == 0)
    }

    pub fn odds(horizon: u64) -> Self {
        NatSet::rule("odds", horizon, |n| n % 2 == 1)
    }

    pub fn squares(horizon: u64) -> Self {
        NatSet::rule("squares", horizon, |n| {
            let r = (n as f64).sqrt().round() as u64;
            r * r == n || (r + 1) * (r + 1) == n || r.checked_sub(1).map(|s| s * s == n) == Some(true)
        })
    }

    pub fn arithmetic(start: u64, step: u64, horizon: u64) -> Self {
        assert!(step > 0);
        NatSet::rule(format!("ap start={start} step={step}"), horizon, move |n| {
            n >= start && (n - start).is_multiple_of(step)
        })
    }

    /// Union of the blocks [B^{2k}, B^{2k+1}) for k >= 0; 0 is never a
    /// member, and the pattern starts with [1, B) at k=0.
    pub fn interval_union(base: u64, horizon: u64) -> Self {
        assert!(base >= 2);
        NatSet::rule(format!("interval-union base={base}"), horizon, move |n| {
            if n == 0 {
                return false;
            }
            let mut lo: u128 = 1;
            loop {
                let hi = lo * base as u128;
                if (n as u128) < hi {
                    return (n as u128) >= lo;
                }
                let next = hi * base as u128;
                if (n as u128) < next {
                    return false;
                }
                lo = next;
                if lo > u64::MAX as u128 {
                    return false;
                }
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            NatSet::Explicit(v) => format!("explicit[{}]", v.len()),
            NatSet::Rule { name, .. } => name.clone(),
        }
    }

    /// Horizon up to which membership is queryable.
    pub fn horizon(&self) -> u64 {
        match self {
            NatSet::Explicit(_) => u64::MAX,
            NatSet::Rule { horizon, .. } => *horizon,
        }
    }

    pub fn check_horizon(&self, needed: u64) -> Result<()> {
        if needed > self.horizon() {
            return Err(Error::InsufficientHorizon {
                set: self.name(),
                horizon: self.horizon(),
                needed,
            });
        }
        Ok(())
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        self.check_horizon(n)?;
        Ok(match self {
            NatSet::Explicit(v) => v.binary_search(&n).is_ok(),
            NatSet::Rule { f, .. } => f(n),
        })
    }

    /// |S ∩ [0, n]|.
    pub fn count_prefix(&self, n: u64) -> Result<u64> {
        self.check_horizon(n)?;
        Ok(match self {
            NatSet::Explicit(v) => v.partition_point(|&x| x <= n) as u64,
            NatSet::Rule { f, .. } => (0..=n).filter(|&k| f(k)).count() as u64,
        })
    }

    /// Explicit elements in [0, n].
    pub fn elements_upto(&self, n: u64) -> Result<Vec<u64>> {
        self.check_horizon(n)?;
        Ok(match self {
            NatSet::Explicit(v) => v.iter().copied().take_while(|&x| x <= n).collect(),
            NatSet::Rule { f, .. } => (0..=n).filter(|&k| f(k)).collect(),
        })
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, NatSet::Explicit(_))
    }

    /// Parses the rule DSL used by config files:
    /// `evens`, `odds`, `squares`, `full`, `empty`,
    /// `interval-union base=B`, `ap start=A step=D`, `explicit:[a,b,c]`.
    pub fn parse(dsl: &str, horizon: u64) -> Result<NatSet> {
        let s = dsl.trim();
        match s {
            "evens" => return Ok(NatSet::evens(horizon)),
            "odds" => return Ok(NatSet::odds(horizon)),
            "squares" => return Ok(NatSet::squares(horizon)),
            "full" => return Ok(NatSet::full(horizon)),
            "empty" => return Ok(NatSet::empty()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("explicit:") {
            let inner = rest
                .trim()
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("expected explicit:[..] in `{s}`")))?;
            let mut elems = Vec::new();
            for tok in inner.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                elems.push(
                    tok.parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad element `{tok}`: {e}")))?,
                );
            }
            return Ok(NatSet::explicit(elems));
        }
        if let Some(rest) = s.strip_prefix("interval-union") {
            let base = parse_kv(rest, "base")?;
            if base < 2 {
                return Err(Error::Parse("interval-union needs base>=2".into()));
            }
            return Ok(NatSet::interval_union(base, horizon));
        }
        if let Some(rest) = s.strip_prefix("ap") {
            let start = parse_kv(rest, "start")?;
            let step = parse_kv(rest, "step")?;
            if step == 0 {
                return Err(Error::Parse("ap needs step>=1".into()));
            }
            return Ok(NatSet::arithmetic(start, step, horizon));
        }
        Err(Error::Parse(format!("unknown set rule `{s}`")))
    }
}

fn parse_kv(rest: &str, key: &str) -> Result<u64> {
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix(&format!("{key}=")) {
            return v
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad {key} `{v}`: {e}")));
        }
    }
    Err(Error::Parse(format!("missing {key}= parameter")))
}
