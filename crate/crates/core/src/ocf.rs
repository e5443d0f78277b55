//! Ranking functions induced by penalty vectors, and rank / acceptance queries.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::csp::KappaVector;
use crate::kb::{Conditional, Formula, KnowledgeBase};
use crate::worlds::{build_partitions, display_order, formula_worlds, render_world, render_world_compact, World};

/// A rank: a natural number or infinity. Infinity orders above every number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Rank {
    pub fn finite(self) -> Option<u64> {
        match self {
            Rank::Finite(r) => Some(r),
            Rank::Infinite => None,
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => a.cmp(b),
            (Rank::Finite(_), Rank::Infinite) => Ordering::Less,
            (Rank::Infinite, Rank::Finite(_)) => Ordering::Greater,
            (Rank::Infinite, Rank::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(r) => write!(f, "{r}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("vector has {got} components but the knowledge base has {expected} rules")]
pub struct LengthMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Dense table of world ranks over a knowledge base's alphabet.
#[derive(Debug, Clone)]
pub struct RankingFunction<'kb> {
    kb: &'kb KnowledgeBase,
    ranks: Vec<u64>,
    source: KappaVector,
}

/// Each world's rank is the sum of the penalties of the rules it falsifies.
pub fn induced_ocf<'kb>(kb: &'kb KnowledgeBase, v: &KappaVector) -> Result<RankingFunction<'kb>, LengthMismatch> {
    if v.len() != kb.n() {
        return Err(LengthMismatch {
            expected: kb.n(),
            got: v.len(),
        });
    }
    let fm = build_partitions(kb);
    let mut ranks = vec![0u64; 1 << kb.m()];
    for (i, &penalty) in v.0.iter().enumerate() {
        for w in fm.falsifying(i).iter() {
            ranks[w.0 as usize] += penalty as u64;
        }
    }
    Ok(RankingFunction {
        kb,
        ranks,
        source: v.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldRank {
    pub world: String,
    pub rank: u64,
}

impl<'kb> RankingFunction<'kb> {
    pub fn kb(&self) -> &'kb KnowledgeBase {
        self.kb
    }

    pub fn source(&self) -> &KappaVector {
        &self.source
    }

    pub fn rank_of(&self, w: World) -> u64 {
        self.ranks[w.0 as usize]
    }

    /// Ranks indexed by world.
    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn min_rank(&self) -> u64 {
        self.ranks.iter().copied().min().unwrap_or(0)
    }

    /// Pointwise `self <= other` over all worlds.
    pub fn pointwise_le(&self, other: &RankingFunction<'_>) -> bool {
        self.ranks.iter().zip(&other.ranks).all(|(a, b)| a <= b)
    }

    /// Lowest rank of a world satisfying `f`; infinite when none does.
    pub fn rank_formula(&self, f: &Formula) -> Rank {
        formula_worlds(f)
            .iter()
            .map(|w| self.rank_of(w))
            .min()
            .map_or(Rank::Infinite, Rank::Finite)
    }

    /// `rank(AB) - rank(A)`, or infinite when `A` is unsatisfiable.
    pub fn rank_conditional(&self, c: &Conditional) -> Rank {
        match self.rank_formula(&c.antecedent) {
            Rank::Infinite => Rank::Infinite,
            Rank::Finite(a) => match self.rank_formula(&verifying(c)) {
                Rank::Finite(ab) => Rank::Finite(ab - a),
                // A satisfiable, AB not: the conditional can never be verified
                Rank::Infinite => Rank::Infinite,
            },
        }
    }

    /// Ranks of the verifying and falsifying parts, `(rank(AB), rank(A!B))`.
    pub fn conditional_ranks(&self, c: &Conditional) -> (Rank, Rank) {
        (self.rank_formula(&verifying(c)), self.rank_formula(&falsifying(c)))
    }

    /// Accepted iff `rank(AB) < rank(A!B)`.
    pub fn accepts(&self, c: &Conditional) -> bool {
        let (verify, falsify) = self.conditional_ranks(c);
        verify < falsify
    }

    /// Rows in display order: all-true world first.
    pub fn table(&self) -> Vec<WorldRank> {
        display_order(self.kb.m())
            .map(|w| WorldRank {
                world: render_world_compact(w, self.kb.atoms()),
                rank: self.rank_of(w),
            })
            .collect()
    }

    /// Plain-text table with one `world  rank` row per world.
    pub fn render_table(&self) -> String {
        let atoms = self.kb.atoms();
        let rows: Vec<(String, u64)> = display_order(self.kb.m())
            .map(|w| (render_world(w, atoms), self.rank_of(w)))
            .collect();
        let width = rows.iter().map(|(w, _)| w.len()).max().unwrap_or(0).max("world".len());
        let mut out = format!("{:<width$}  rank\n", "world");
        for (w, r) in rows {
            out.push_str(&format!("{w:<width$}  {r}\n"));
        }
        out
    }
}

fn verifying(c: &Conditional) -> Formula {
    c.antecedent.and(&c.consequent)
}

fn falsifying(c: &Conditional) -> Formula {
    c.antecedent.and(&c.consequent.negate())
}
