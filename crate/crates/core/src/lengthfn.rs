//! Lyndon length functions induced by word length: the Gromov-style product
//! `c(g,f)`, ball enumeration, the axioms (L1)-(L4) and the regularity
//! condition (R) audited on finite balls.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::expr::show_word;
use crate::ordvec::OrdVec;
use crate::word::{BlockWord, WordError};

#[derive(Debug, Error)]
pub enum LengthFnError {
    #[error("ball radius {0} exceeds cap {1}")]
    RadiusCap(usize, usize),
    #[error("c(g,f) is not in Z^n: {0}")]
    NonIntegralC(String),
    #[error("generator `{0}` is empty")]
    EmptyGenerator(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("membership oracle failure: {0}")]
    Oracle(String),
}

pub const DEFAULT_RADIUS: usize = 3;
pub const RADIUS_CAP: usize = 6;

/// A named set of group generators given as reduced words.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub names: Vec<String>,
    pub words: Vec<BlockWord>,
    pub rank: usize,
}

impl GeneratorSet {
    pub fn new(named: Vec<(String, BlockWord)>, rank: usize) -> Result<Self, LengthFnError> {
        let mut names = Vec::new();
        let mut words = Vec::new();
        for (n, w) in named {
            if w.is_empty() {
                return Err(LengthFnError::EmptyGenerator(n));
            }
            // every generator must admit a cyclic decomposition
            w.cyclic_decompose()?;
            names.push(n);
            words.push(w);
        }
        Ok(GeneratorSet { names, words, rank })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// `c(g,f) = (|g| + |f| - |g^{-1} * f|) / 2`, asserted integral and equal to
/// `|com(g,f)|`.
pub fn c_val(g: &BlockWord, f: &BlockWord) -> Result<OrdVec, LengthFnError> {
    let prod = g.inverse().mul(f)?;
    let twice = g.len().add(&f.len()).sub(&prod.len());
    let c = twice
        .halve()
        .map_err(|_| LengthFnError::NonIntegralC(format!("2c = {twice}")))?;
    let com = g.com(f)?.word.len();
    if c != com {
        return Err(LengthFnError::NonIntegralC(format!(
            "metric value {c} disagrees with |com| = {com}"
        )));
    }
    Ok(c)
}

/// All `*`-products of at most `r` generators and inverses, deduplicated by
/// canonical form and sorted deterministically.
pub fn ball(gs: &GeneratorSet, r: usize) -> Result<Vec<BlockWord>, LengthFnError> {
    if r > RADIUS_CAP {
        return Err(LengthFnError::RadiusCap(r, RADIUS_CAP));
    }
    let mut seen: BTreeSet<BlockWord> = BTreeSet::new();
    let mut frontier: Vec<BlockWord> = vec![BlockWord::empty(gs.rank)];
    seen.insert(BlockWord::empty(gs.rank));
    let mut steps: Vec<BlockWord> = Vec::new();
    for w in &gs.words {
        steps.push(w.clone());
        steps.push(w.inverse());
    }
    for _ in 0..r {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &steps {
                let h = g.mul(s)?;
                if seen.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(seen.into_iter().collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub g: String,
    pub f: Option<String>,
    pub h: Option<String>,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub status: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// (L4) is checked for g != 1 only: l(1^2) > l(1) fails at the identity.
    pub note: String,
    pub radius: Option<usize>,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == "pass")
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

const MAX_WITNESSES: usize = 16;

/// Verifies (L1), (L2) on all elements, (L3) on all triples and (L4) on all
/// non-identity elements of the sample. The sample is closed under inversion
/// before checking.
pub fn check_axioms(
    sample: &[BlockWord],
    alphabet: &Alphabet,
    rank: usize,
) -> Result<AxiomReport, LengthFnError> {
    let mut set: BTreeSet<BlockWord> = sample.iter().cloned().collect();
    set.insert(BlockWord::empty(rank));
    let closed: Vec<BlockWord> = {
        let mut s = set.clone();
        for w in &set {
            s.insert(w.inverse());
        }
        s.into_iter().collect()
    };
    let zero = OrdVec::zero(rank);

    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for g in &closed {
        if g.len() < zero {
            l1.push(Witness {
                g: show_word(g, alphabet),
                f: None,
                h: None,
                values: vec![g.len().to_string()],
            });
        }
        if g.len() != g.inverse().len() {
            l2.push(Witness {
                g: show_word(g, alphabet),
                f: None,
                h: None,
                values: vec![g.len().to_string(), g.inverse().len().to_string()],
            });
        }
    }
    if !BlockWord::empty(rank).len().is_zero() {
        l1.push(Witness {
            g: "1".into(),
            f: None,
            h: None,
            values: vec![],
        });
    }

    // Pairwise c-values once; the (L3) triple loop reads the cache.
    let n = closed.len();
    let mut cvals = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        for j in i..n {
            let c = c_val(&closed[i], &closed[j])?;
            cvals[i][j] = c.clone();
            cvals[j][i] = c;
        }
    }

    let mut l3 = Vec::new();
    'l3: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // c(g,f) > c(g,h) -> c(g,h) = c(f,h)
                if cvals[i][j] > cvals[i][k] && cvals[i][k] != cvals[j][k] {
                    l3.push(Witness {
                        g: show_word(&closed[i], alphabet),
                        f: Some(show_word(&closed[j], alphabet)),
                        h: Some(show_word(&closed[k], alphabet)),
                        values: vec![
                            cvals[i][j].to_string(),
                            cvals[i][k].to_string(),
                            cvals[j][k].to_string(),
                        ],
                    });
                    if l3.len() >= MAX_WITNESSES {
                        break 'l3;
                    }
                }
            }
        }
    }

    let mut l4 = Vec::new();
    for g in &closed {
        if g.is_empty() {
            continue;
        }
        let sq = g.mul(g)?;
        if sq.len() <= g.len() {
            l4.push(Witness {
                g: show_word(g, alphabet),
                f: None,
                h: None,
                values: vec![g.len().to_string(), sq.len().to_string()],
            });
        }
    }

    let mk = |axiom: &str, ws: Vec<Witness>| AxiomCheck {
        axiom: axiom.to_string(),
        status: if ws.is_empty() { "pass" } else { "fail" }.to_string(),
        witnesses: ws,
    };
    Ok(AxiomReport {
        note: "L4 checked for g != 1 only".to_string(),
        radius: None,
        checks: vec![mk("L1", l1), mk("L2", l2), mk("L3", l3), mk("L4", l4)],
    })
}

/// Outcome of a membership oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Member,
    NotMember,
    Inconclusive,
}

/// Checks the regularity condition: `com(g,h)` must lie in the subgroup for
/// every pair `g, h` in the ball of radius `r`.
pub fn check_regular(
    gs: &GeneratorSet,
    r: usize,
    alphabet: &Alphabet,
    membership: &mut dyn FnMut(&BlockWord) -> Result<Membership, String>,
) -> Result<AxiomReport, LengthFnError> {
    let b = ball(gs, r)?;
    let mut failures = Vec::new();
    let mut checked: BTreeSet<BlockWord> = BTreeSet::new();
    for (i, g) in b.iter().enumerate() {
        for h in &b[i + 1..] {
            let c = g.com(h)?.word;
            if c.is_empty() || !checked.insert(c.clone()) {
                continue;
            }
            match membership(&c).map_err(LengthFnError::Oracle)? {
                Membership::Member => {}
                Membership::NotMember | Membership::Inconclusive => {
                    failures.push(Witness {
                        g: show_word(g, alphabet),
                        f: Some(show_word(h, alphabet)),
                        h: None,
                        values: vec![show_word(&c, alphabet)],
                    });
                    if failures.len() >= MAX_WITNESSES {
                        break;
                    }
                }
            }
        }
        if failures.len() >= MAX_WITNESSES {
            break;
        }
    }
    Ok(AxiomReport {
        note: "com-closure audited against the membership oracle".to_string(),
        radius: Some(r),
        checks: vec![AxiomCheck {
            axiom: "R".to_string(),
            status: if failures.is_empty() { "pass" } else { "fail" }.to_string(),
            witnesses: failures,
        }],
    })
}
