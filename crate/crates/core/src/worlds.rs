//! Possible worlds, world sets, and the three-valued reading of conditionals.
//!
//! A world over `m` atoms is an index in `[0, 2^m)`. Atom `i` (1-based)
//! is stored at bit `m - i`, so the first declared atom is the most
//! significant bit and index `2^m - 1` is the world where every atom holds.

use std::fmt;

use crate::kb::{Atom, Conditional, Formula, KnowledgeBase, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub u32);

impl World {
    /// Whether the atom with 1-based `index` is true in this world over `m` atoms.
    pub fn holds(self, index: usize, m: usize) -> bool {
        self.0 & (1 << (m - index)) != 0
    }
}

/// Every world over `m` atoms, all-true world first.
///
/// This is the reading order of the usual ranking tables: the first atom
/// varies slowest and positive literals come before negative ones.
pub fn display_order(m: usize) -> impl Iterator<Item = World> {
    (0..1u32 << m).rev().map(World)
}

/// Renders a world as space separated literals, e.g. `p b -f w -k`.
pub fn render_world(w: World, atoms: &[Atom]) -> String {
    let m = atoms.len();
    atoms
        .iter()
        .map(|a| {
            if w.holds(a.index, m) {
                a.name.clone()
            } else {
                format!("-{}", a.name)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a world without separators (`pb-fw-k`) when every atom name is a
/// single character, and falls back to [`render_world`] otherwise.
pub fn render_world_compact(w: World, atoms: &[Atom]) -> String {
    if atoms.iter().all(|a| a.name.chars().count() == 1) {
        render_world(w, atoms).replace(' ', "")
    } else {
        render_world(w, atoms)
    }
}

/// Dense bitset over the `2^m` worlds.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WorldSet {
    words: Vec<u64>,
    len: usize,
}

impl WorldSet {
    pub fn empty(m: usize) -> Self {
        let len = 1usize << m;
        WorldSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(m: usize) -> Self {
        let mut set = WorldSet::empty(m);
        for w in 0..set.len {
            set.insert(World(w as u32));
        }
        set
    }

    /// Number of worlds in the universe, `2^m`.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, w: World) {
        let i = w.0 as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, w: World) -> bool {
        let i = w.0 as usize;
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &WorldSet) -> WorldSet {
        self.zip_with(other, |a, b| a & !b)
    }

    fn zip_with(&self, other: &WorldSet, op: impl Fn(u64, u64) -> u64) -> WorldSet {
        assert_eq!(self.len, other.len, "world sets over different alphabets");
        WorldSet {
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
            len: self.len,
        }
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros();
                bits &= bits - 1;
                Some(World((i * 64) as u32 + tz))
            })
        })
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|w| w.0)).finish()
    }
}

/// Value of the generalized indicator function of a conditional in a world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorValue {
    /// `w |= AB`
    Verifies,
    /// `w |= A!B`
    Falsifies,
    /// `w |= !A`
    NotApplicable,
}

pub fn eval_term(t: &Term, w: World) -> bool {
    let (pos, neg) = (t.pos_mask(), t.neg_mask());
    w.0 & pos == pos && w.0 & neg == 0
}

pub fn eval_formula(f: &Formula, w: World) -> bool {
    f.terms().iter().any(|t| eval_term(t, w))
}

/// All worlds satisfying `f`. Each term's worlds are generated directly by
/// walking the subsets of its free atoms.
pub fn formula_worlds(f: &Formula) -> WorldSet {
    let m = f.terms()[0].len();
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut set = WorldSet::empty(m);
    for t in f.terms().iter().filter(|t| !t.is_contradictory()) {
        let free = full & !(t.pos_mask() | t.neg_mask());
        let mut sub = free;
        loop {
            set.insert(World(t.pos_mask() | sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    set
}

pub fn indicator(c: &Conditional, w: World) -> IndicatorValue {
    if !eval_formula(&c.antecedent, w) {
        IndicatorValue::NotApplicable
    } else if eval_formula(&c.consequent, w) {
        IndicatorValue::Verifies
    } else {
        IndicatorValue::Falsifies
    }
}

/// Per-conditional verifying and falsifying world sets.
#[derive(Debug, Clone)]
pub struct FalsificationMatrix {
    m: usize,
    verifying: Vec<WorldSet>,
    falsifying: Vec<WorldSet>,
}

impl FalsificationMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.verifying.len()
    }

    /// Worlds verifying conditional `i` (0-based).
    pub fn verifying(&self, i: usize) -> &WorldSet {
        &self.verifying[i]
    }

    /// Worlds falsifying conditional `i` (0-based).
    pub fn falsifying(&self, i: usize) -> &WorldSet {
        &self.falsifying[i]
    }

    /// Bitmask of the (0-based) conditionals falsified in `w`.
    pub fn falsified_mask(&self, w: World) -> u64 {
        self.falsifying
            .iter()
            .enumerate()
            .filter(|(_, f)| f.contains(w))
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }
}

pub fn build_partitions(kb: &KnowledgeBase) -> FalsificationMatrix {
    let (verifying, falsifying) = kb
        .conditionals()
        .iter()
        .map(|c| {
            let ante = formula_worlds(&c.antecedent);
            let cons = formula_worlds(&c.consequent);
            (ante.intersection(&cons), ante.difference(&cons))
        })
        .unzip();
    FalsificationMatrix {
        m: kb.m(),
        verifying,
        falsifying,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_formula, parse_kb};

    const PENGUINS: &str = "vars: p, b, f, w, k
rule: (f | b)
rule: (b | p)
rule: (!f | p)
rule: (w | b)
rule: (b | k)";

    fn world(atoms: &[Atom], lits: &str) -> World {
        // lits like "-p b f w k"
        let m = atoms.len();
        let mut bits = 0;
        for lit in lits.split_whitespace() {
            if !lit.starts_with('-') {
                let idx = atoms.iter().find(|a| a.name == lit).unwrap().index;
                bits |= 1 << (m - idx);
            }
        }
        World(bits)
    }

    #[test]
    fn term_evaluation() {
        let kb = parse_kb(PENGUINS).unwrap();
        let a = kb.atoms();
        let b = parse_formula("b", a).unwrap();
        assert!(eval_term(&b.terms()[0], world(a, "p b f w k")));
        let pnf = parse_formula("p, !f", a).unwrap();
        assert!(!eval_term(&pnf.terms()[0], world(a, "-p b f w k")));
        let top = parse_formula("top", a).unwrap();
        for w in 0..32 {
            assert!(eval_term(&top.terms()[0], World(w)));
        }
    }

    #[test]
    fn formula_world_counts() {
        let kb = parse_kb(PENGUINS).unwrap();
        let a = kb.atoms();
        let b = formula_worlds(&parse_formula("b", a).unwrap());
        assert_eq!(b.count(), 16);
        assert!(b.iter().all(|w| w.holds(2, 5)));
        assert_eq!(formula_worlds(&parse_formula("top", a).unwrap()).count(), 32);
        assert!(formula_worlds(&parse_formula("bot", a).unwrap()).is_empty());

        // brute force for p, !f
        let pnf = parse_formula("p, !f", a).unwrap();
        let expected: Vec<World> = (0..32).map(World).filter(|w| w.holds(1, 5) && !w.holds(3, 5)).collect();
        assert_eq!(expected.len(), 8);
        assert_eq!(formula_worlds(&pnf).iter().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn indicator_cases() {
        let kb = parse_kb(PENGUINS).unwrap();
        let a = kb.atoms();
        let fb = &kb.conditionals()[0];
        assert_eq!(indicator(fb, world(a, "-p b f w k")), IndicatorValue::Verifies);
        assert_eq!(indicator(fb, world(a, "p b -f w k")), IndicatorValue::Falsifies);
        assert_eq!(indicator(fb, world(a, "-p -b f w k")), IndicatorValue::NotApplicable);
    }

    #[test]
    fn penguin_partitions() {
        let kb = parse_kb(PENGUINS).unwrap();
        let fm = build_partitions(&kb);
        let count = |i: usize, v: IndicatorValue| {
            (0..32)
                .filter(|&w| indicator(&kb.conditionals()[i], World(w)) == v)
                .count()
        };
        assert_eq!(count(2, IndicatorValue::Verifies), 8);
        assert_eq!(count(2, IndicatorValue::Falsifies), 8);
        assert_eq!(fm.verifying(2).count(), 8);
        assert_eq!(fm.falsifying(2).count(), 8);
        assert_eq!(fm.verifying(0).count(), 8);
        assert_eq!(fm.falsifying(0).count(), 8);
        assert!(fm.verifying(0).iter().all(|w| w.holds(2, 5) && w.holds(3, 5)));
        assert!(fm.falsifying(0).iter().all(|w| w.holds(2, 5) && !w.holds(3, 5)));
    }

    #[test]
    fn unsatisfiable_antecedent_is_empty() {
        let kb = parse_kb("vars: a\nrule: (a | bot)").unwrap();
        let fm = build_partitions(&kb);
        assert!(fm.verifying(0).is_empty());
        assert!(fm.falsifying(0).is_empty());
    }

    #[test]
    fn rendering() {
        let kb = parse_kb(PENGUINS).unwrap();
        let a = kb.atoms();
        let w = world(a, "p b -f w -k");
        assert_eq!(render_world(w, a), "p b -f w -k");
        assert_eq!(render_world_compact(w, a), "pb-fw-k");
        assert_eq!(display_order(5).next(), Some(World(31)));
        assert_eq!(display_order(5).last(), Some(World(0)));
    }

    #[test]
    fn set_algebra() {
        let mut a = WorldSet::empty(7);
        let mut b = WorldSet::empty(7);
        for w in [1, 64, 100] {
            a.insert(World(w));
        }
        for w in [64, 127] {
            b.insert(World(w));
        }
        assert_eq!(a.union(&b).count(), 4);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), [World(64)]);
        assert_eq!(a.difference(&b).iter().map(|w| w.0).collect::<Vec<_>>(), [1, 100]);
        assert_eq!(WorldSet::full(3).count(), 8);
    }
}
