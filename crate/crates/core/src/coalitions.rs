//! Decisive-coalition rules and the regions they induce.
//!
//! Players are indexed from 0 in this API.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::SamplingRegion;

pub const MAX_PLAYERS: usize = 64;
const MAX_COALITIONS: usize = 100_000;

/// Bit set of players.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PlayerSet(pub u64);

impl PlayerSet {
    pub fn from_players(players: &[usize]) -> Self {
        Self(players.iter().fold(0u64, |acc, &i| acc | (1u64 << i)))
    }

    pub fn all(n: usize) -> Self {
        if n == 64 {
            Self(u64::MAX)
        } else {
            Self((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Self(1u64 << i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn without(&self, i: usize) -> Self {
        Self(self.0 & !(1u64 << i))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }

    pub fn min(&self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn max(&self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl fmt::Debug for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Antichain of minimal decisive coalitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionRule {
    n_players: usize,
    minimal: Vec<PlayerSet>,
}

/// Reduce a family of coalitions to its minimal elements.
pub fn normalize_rule(coalitions: &[PlayerSet], n: usize) -> Result<CoalitionRule> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::InvalidRule(format!("player count must lie in 1..={MAX_PLAYERS}, got {n}")));
    }
    if coalitions.is_empty() {
        return Err(Error::InvalidRule("at least one decisive coalition is required".into()));
    }
    let all = PlayerSet::all(n);
    for c in coalitions {
        if c.is_empty() {
            return Err(Error::InvalidRule("coalitions must be non-empty".into()));
        }
        if !c.is_subset(&all) {
            return Err(Error::InvalidRule(format!("coalition {c:?} names a player outside 0..{n}")));
        }
    }
    let mut sorted: Vec<PlayerSet> = coalitions.to_vec();
    sorted.sort_by_key(|c| (c.len(), c.0));
    sorted.dedup();
    let mut minimal: Vec<PlayerSet> = Vec::new();
    for c in sorted {
        if !minimal.iter().any(|m| m.is_subset(&c)) {
            minimal.push(c);
        }
    }
    minimal.sort();
    Ok(CoalitionRule { n_players: n, minimal })
}

fn subsets_of_size(n: usize, q: usize) -> Vec<PlayerSet> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..q).collect();
    loop {
        out.push(PlayerSet::from_players(&idx));
        let mut i = q;
        while i > 0 && idx[i - 1] == n - q + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..q {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CoalitionRule {
    /// Every single player can stop.
    pub fn unilateral(n: usize) -> Result<Self> {
        normalize_rule(&(0..n).map(PlayerSet::singleton).collect::<Vec<_>>(), n)
    }

    /// Only the grand coalition can stop.
    pub fn unanimity(n: usize) -> Result<Self> {
        normalize_rule(&[PlayerSet::all(n)], n)
    }

    /// All coalitions of at least `q` players.
    pub fn quota(q: usize, n: usize) -> Result<Self> {
        if q == 0 || q > n {
            return Err(Error::InvalidRule(format!("quota must lie in 1..={n}, got {q}")));
        }
        if binomial(n, q) > MAX_COALITIONS as f64 {
            return Err(Error::InvalidRule(format!("quota {q} of {n} has too many minimal coalitions")));
        }
        normalize_rule(&subsets_of_size(n, q), n)
    }

    /// Quota rule where the chair must belong to every decisive coalition.
    pub fn chair(q: usize, chair: usize, n: usize) -> Result<Self> {
        if chair >= n {
            return Err(Error::InvalidRule(format!("chair {chair} outside 0..{n}")));
        }
        let quota = Self::quota(q, n)?;
        let with_chair: Vec<PlayerSet> = quota
            .minimal
            .iter()
            .map(|c| if c.contains(chair) { *c } else { PlayerSet(c.0 | PlayerSet::singleton(chair).0) })
            .collect();
        normalize_rule(&with_chair, n)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn minimal_coalitions(&self) -> &[PlayerSet] {
        &self.minimal
    }

    pub fn is_decisive(&self, stopped: PlayerSet) -> bool {
        self.minimal.iter().any(|m| m.is_subset(&stopped))
    }

    /// Adds further coalitions and re-minimizes.
    pub fn extended(&self, extra: &[PlayerSet]) -> Result<Self> {
        let mut all = self.minimal.clone();
        all.extend_from_slice(extra);
        normalize_rule(&all, self.n_players)
    }

    /// True iff every decisive coalition of `self` is decisive under `other`.
    pub fn is_sub_rule_of(&self, other: &Self) -> bool {
        self.n_players == other.n_players && self.minimal.iter().all(|c| other.is_decisive(*c))
    }

    /// Players that can stop alone, and players in every decisive coalition.
    pub fn classify_players(&self) -> (PlayerSet, PlayerSet) {
        let uni = self.minimal.iter().filter(|c| c.len() == 1).fold(0u64, |acc, c| acc | c.0);
        let una = self.minimal.iter().fold(PlayerSet::all(self.n_players).0, |acc, c| acc & c.0);
        (PlayerSet(uni), PlayerSet(una))
    }
}

pub fn is_decisive(rule: &CoalitionRule, stopped: PlayerSet) -> bool {
    rule.is_decisive(stopped)
}

pub fn classify_players(rule: &CoalitionRule) -> (PlayerSet, PlayerSet) {
    rule.classify_players()
}

fn check_profile(rule: &CoalitionRule, profile: &[SamplingRegion]) -> Result<()> {
    if profile.len() != rule.n_players {
        return Err(Error::InvalidRule(format!("profile has {} regions for {} players", profile.len(), rule.n_players)));
    }
    let g = profile[0].grid();
    if profile.iter().any(|r| r.grid().points() != g.points()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `intersection over G in family of union over j in G (minus skip) of O_j`, with the
/// empty intersection equal to the full interior and empty unions empty.
fn intersect_unions<'a>(
    family: impl Iterator<Item = &'a PlayerSet>,
    skip: Option<usize>,
    profile: &[SamplingRegion],
) -> SamplingRegion {
    let grid = profile[0].grid().clone();
    let n = grid.len();
    let masks: Vec<&[bool]> = profile.iter().map(|r| r.mask()).collect();
    let coalitions: Vec<PlayerSet> = family.map(|c| skip.map_or(*c, |i| c.without(i))).collect();
    let mut mask = vec![false; n];
    for (k, m) in mask.iter_mut().enumerate().take(n - 1).skip(1) {
        *m = coalitions.iter().all(|c| c.iter().any(|j| masks[j][k]));
    }
    SamplingRegion::from_mask(grid, mask).expect("mask length matches grid")
}

/// Collective sampling region of a profile.
pub fn collective_region(rule: &CoalitionRule, profile: &[SamplingRegion]) -> Result<SamplingRegion> {
    check_profile(rule, profile)?;
    Ok(intersect_unions(rule.minimal.iter(), None, profile))
}

/// Collective region if `i` never stops (`C`) and if `i` always stops (`S`). The entry
/// `profile[i]` is ignored.
pub fn player_envelopes(rule: &CoalitionRule, i: usize, profile: &[SamplingRegion]) -> Result<(SamplingRegion, SamplingRegion)> {
    check_profile(rule, profile)?;
    if i >= rule.n_players {
        return Err(Error::InvalidRule(format!("player {i} outside 0..{}", rule.n_players)));
    }
    let grid = profile[0].grid().clone();
    let without_i: Vec<&PlayerSet> = rule.minimal.iter().filter(|c| !c.contains(i)).collect();
    let c = if without_i.is_empty() {
        SamplingRegion::full(grid.clone())
    } else {
        intersect_unions(without_i.into_iter(), None, profile)
    };
    let s = if rule.minimal.contains(&PlayerSet::singleton(i)) {
        SamplingRegion::empty(grid)
    } else {
        intersect_unions(rule.minimal.iter(), Some(i), profile)
    };
    Ok((c, s))
}
