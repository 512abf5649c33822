//! Finitely-described reduced `Z^n`-words.
//!
//! A [`BlockWord`] is a sequence of blocks over a finite alphabet: a `Run` is
//! a single letter repeated an integer number of times, a `Power` is a finite
//! primitive cyclically-reduced period raised to a `Z^n` exponent of height at
//! least two. The word denotes a function from the segment `[1, |w|]` of
//! `Z^n` to signed letters; `eval` realizes that function.
//!
//! All operations keep words in a canonical form, so structural equality is
//! semantic equality. The canonical form anchors every maximal periodic
//! stretch at its left end, keeps the exponent's least-significant coordinate
//! at most zero (integer surplus trails as explicit runs), and resolves
//! overlaps between adjacent periodic stretches in favour of the earlier one.
//!
//! Every multiplication routes through `com` (longest common initial
//! segment), which is computed block-structurally: periodic against periodic
//! material is decided by primitive-root and phase comparison, never by
//! unbounded scanning.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::alphabet::Letter;
use crate::ordvec::OrdVec;

/// Cap on the number of letters any operation may spell out explicitly.
const UNROLL_CAP: i64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("position out of domain")]
    OutOfDomain,
    #[error("empty word")]
    EmptyWord,
    #[error("malformed expression: {0}")]
    Malformed(String),
    #[error("block would have non-positive length")]
    NonPositiveBlockLength,
    #[error("not representable as a block word: {0}")]
    Unrepresentable(String),
    #[error("specialized exponent is not positive (N too small)")]
    NonPositiveSpecializedExponent,
}

/// One block of a reduced `Z^n`-word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    /// `letter` repeated `count >= 1` times.
    Run { letter: Letter, count: BigInt },
    /// `period^exp` with `period` primitive and cyclically reduced,
    /// `exp > 0` of height >= 2 and first coordinate <= 0.
    Power { period: Vec<Letter>, exp: OrdVec },
}

impl Block {
    pub fn len(&self, rank: usize) -> OrdVec {
        match self {
            Block::Run { count, .. } => {
                let mut v = vec![BigInt::zero(); rank];
                v[0] = count.clone();
                OrdVec::new(v).expect("rank in range")
            }
            Block::Power { period, exp } => exp.scale(&BigInt::from(period.len())),
        }
    }

    fn first_letter(&self) -> Letter {
        match self {
            Block::Run { letter, .. } => *letter,
            Block::Power { period, .. } => period[0],
        }
    }

    fn last_letter(&self) -> Letter {
        match self {
            Block::Run { letter, .. } => *letter,
            // A power of length m*k ends at phase m.
            Block::Power { period, .. } => period[period.len() - 1],
        }
    }
}

/// A reduced `Z^n`-word in canonical block form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockWord {
    rank: usize,
    blocks: Vec<Block>,
}

fn rot_left(p: &[Letter], k: usize) -> Vec<Letter> {
    let m = p.len();
    let k = k % m;
    let mut q = Vec::with_capacity(m);
    q.extend_from_slice(&p[k..]);
    q.extend_from_slice(&p[..k]);
    q
}

/// Reverse-and-invert a period; this is the pattern of the inverse stretch.
fn rev_inv(p: &[Letter]) -> Vec<Letter> {
    p.iter().rev().map(|l| l.inv()).collect()
}

/// Smallest period of a finite word (classic failure-function bound).
pub fn primitive_root_len(w: &[Letter]) -> usize {
    let n = w.len();
    let mut fail = vec![0usize; n];
    for i in 1..n {
        let mut j = fail[i - 1];
        while j > 0 && w[i] != w[j] {
            j = fail[j - 1];
        }
        if w[i] == w[j] {
            j += 1;
        }
        fail[i] = j;
    }
    let p = n - fail[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

fn is_reduced(letters: &[Letter]) -> bool {
    letters.windows(2).all(|w| !w[0].cancels(w[1]))
}

fn is_cyclically_reduced_letters(letters: &[Letter]) -> bool {
    !letters.is_empty()
        && is_reduced(letters)
        && !letters[letters.len() - 1].cancels(letters[0])
}

fn to_small(v: &BigInt) -> Result<i64, WordError> {
    v.to_i64()
        .filter(|k| k.abs() <= UNROLL_CAP)
        .ok_or_else(|| WordError::Unrepresentable("run material too long".into()))
}

/// Incremental constructor maintaining the canonical form.
///
/// The builder never performs free cancellation: callers must feed reduced
/// material (all cancellation in this crate happens through `com`).
pub struct WordBuilder {
    rank: usize,
    blocks: Vec<Block>,
}

struct ZoneInfo {
    power_idx: usize,
    /// Length of the explicit prefix after the power that continues its
    /// pattern.
    bound: i64,
    /// Whether the entire trailing section continues the pattern.
    fully_bound: bool,
}

impl WordBuilder {
    pub fn new(rank: usize) -> Self {
        WordBuilder {
            rank,
            blocks: Vec::new(),
        }
    }

    fn last_letter(&self) -> Option<Letter> {
        self.blocks.last().map(|b| b.last_letter())
    }

    /// The power-backed zone at the tail. `bound` is the longest prefix of
    /// the trailing explicit section that continues the power's pattern
    /// (phases 1, 2, ... after the power ends at phase m).
    fn power_zone(&self) -> Option<ZoneInfo> {
        let mut j = self.blocks.len();
        let mut trailing: Vec<(Letter, i64)> = Vec::new();
        let mut total: i64 = 0;
        while j > 0 {
            match &self.blocks[j - 1] {
                Block::Run { letter, count } => {
                    let c = count.to_i64()?;
                    trailing.push((*letter, c));
                    total += c;
                    j -= 1;
                }
                Block::Power { .. } => break,
            }
        }
        if j == 0 {
            return None;
        }
        let Block::Power { period, .. } = &self.blocks[j - 1] else {
            return None;
        };
        trailing.reverse();
        let m = period.len();
        let mut bound: i64 = 0;
        'scan: for (l, c) in &trailing {
            if m == 1 {
                if *l == period[0] {
                    bound += c;
                    continue;
                }
                break;
            }
            for _ in 0..*c {
                if period[(bound % m as i64) as usize] != *l {
                    break 'scan;
                }
                bound += 1;
            }
        }
        Some(ZoneInfo {
            power_idx: j - 1,
            bound,
            fully_bound: bound == total,
        })
    }

    /// Letter that would extend the tail power zone by one position.
    fn zone_continuation(&self, z: &ZoneInfo) -> Letter {
        let Block::Power { period, .. } = &self.blocks[z.power_idx] else {
            unreachable!()
        };
        let m = period.len();
        period[(z.bound as usize) % m]
    }

    pub fn push_letter(&mut self, l: Letter) {
        self.push_run(l, BigInt::one());
    }

    pub fn push_run(&mut self, l: Letter, count: BigInt) {
        assert!(count.is_positive(), "run count must be >= 1");
        if let Some(t) = self.last_letter() {
            assert!(!t.cancels(l), "builder fed unreduced material");
        }
        // Merge with a same-letter trailing run.
        if let Some(Block::Run { letter, count: c }) = self.blocks.last_mut() {
            if *letter == l {
                *c += count;
                self.absorb();
                return;
            }
        }
        self.blocks.push(Block::Run { letter: l, count });
        self.absorb();
    }

    /// Pulls full periods trailing a power back into its exponent while the
    /// exponent's first coordinate is negative.
    fn absorb(&mut self) {
        let Some(z) = self.power_zone() else { return };
        let (m, k1_neg) = {
            let Block::Power { period, exp } = &self.blocks[z.power_idx] else {
                unreachable!()
            };
            (period.len() as i64, exp.first().is_negative())
        };
        if !k1_neg || z.bound < m {
            return;
        }
        let take = {
            let Block::Power { exp, .. } = &self.blocks[z.power_idx] else {
                unreachable!()
            };
            let deficit = -exp.first().to_i64().unwrap_or(i64::MAX / m);
            deficit.min(z.bound / m)
        };
        if take <= 0 {
            return;
        }
        // Remove take*m letters from the front of the bound section.
        let mut remaining = take * m;
        let idx = z.power_idx + 1;
        while remaining > 0 {
            let Block::Run { count, .. } = &mut self.blocks[idx] else {
                unreachable!()
            };
            let c = count.to_i64().expect("bound counts fit");
            if c <= remaining {
                remaining -= c;
                self.blocks.remove(idx);
            } else {
                *count -= BigInt::from(remaining);
                remaining = 0;
            }
        }
        let Block::Power { exp, .. } = &mut self.blocks[z.power_idx] else {
            unreachable!()
        };
        let mut delta = OrdVec::zero(exp.rank());
        delta = delta.add(&OrdVec::one(exp.rank()).scale_i64(take));
        *exp = exp.add(&delta);
        // Re-merge runs that may have become adjacent.
        self.remerge_from(z.power_idx + 1);
    }

    fn remerge_from(&mut self, mut i: usize) {
        if i == 0 {
            i = 1;
        }
        while i < self.blocks.len() {
            let merge = match (&self.blocks[i - 1], &self.blocks[i]) {
                (Block::Run { letter: a, .. }, Block::Run { letter: b, .. }) => a == b,
                _ => false,
            };
            if merge {
                let Block::Run { count, .. } = self.blocks.remove(i) else {
                    unreachable!()
                };
                let Block::Run { count: c, .. } = &mut self.blocks[i - 1] else {
                    unreachable!()
                };
                *c += count;
            } else {
                i += 1;
            }
        }
    }

    /// Pushes a periodic stretch: `pattern` anchored at phase 1, of total
    /// length `len > 0`. The pattern must be primitive and cyclically
    /// reduced. Height-one stretches are spelled out as runs.
    pub fn push_stretch(&mut self, pattern: Vec<Letter>, len: OrdVec) -> Result<(), WordError> {
        assert!(!pattern.is_empty());
        debug_assert!(is_cyclically_reduced_letters(&pattern));
        debug_assert_eq!(primitive_root_len(&pattern), pattern.len());
        assert!(len.is_positive(), "stretch length must be positive");
        let m = pattern.len();
        if len.height() <= 1 {
            let c = to_small(len.first())?;
            self.spell(&pattern, 0, c);
            return Ok(());
        }

        let mut pattern = pattern;
        let mut len = len;

        // Merge with a tail zone of the same pattern class and phase.
        if let Some(z) = self.power_zone().filter(|z| z.fully_bound) {
            let p = {
                let Block::Power { period, .. } = &self.blocks[z.power_idx] else {
                    unreachable!()
                };
                period.clone()
            };
            if p.len() == m && rot_left(&p, (z.bound as usize) % m) == pattern {
                let power_len = {
                    let Block::Power { period, exp } = &self.blocks[z.power_idx] else {
                        unreachable!()
                    };
                    exp.scale(&BigInt::from(period.len()))
                };
                let mut total = power_len.add(&len);
                let mut bound_vec = OrdVec::zero(self.rank);
                bound_vec = bound_vec.add(&OrdVec::one(self.rank).scale_i64(z.bound));
                total = total.add(&bound_vec);
                self.blocks.truncate(z.power_idx);
                return self.push_stretch(p, total);
            }
        }

        // Donate leading letters claimed by earlier zones: either the tail
        // power's continuation, or the constant zone of the tail letter.
        let mut donations = 0usize;
        loop {
            let power_wants = self
                .power_zone()
                .filter(|z| z.fully_bound)
                .map(|z| self.zone_continuation(&z) == pattern[0])
                .unwrap_or(false);
            let const_wants = m >= 2 && self.last_letter() == Some(pattern[0]);
            if !(power_wants || const_wants) {
                break;
            }
            assert!(donations <= 4 * m + 8, "runaway donation loop");
            self.push_letter(pattern[0]);
            pattern = rot_left(&pattern, 1);
            len = len.sub(&OrdVec::one(self.rank));
            donations += 1;
            if !len.is_positive() || len.height() <= 1 {
                let c = to_small(len.first())?;
                self.spell(&pattern, 0, c);
                return Ok(());
            }
        }

        // Steal trailing whole runs that extend this stretch backward;
        // rotating right by the stolen count re-anchors the pattern.
        let stolen = self.backward_steal(&pattern);
        if stolen > 0 {
            let s = (stolen as usize) % m;
            pattern = rot_left(&pattern, (m - s) % m);
            len = len.add(&OrdVec::one(self.rank).scale_i64(stolen));
        }

        self.emit_power(pattern, len)
    }

    fn pattern_len_at(&self, idx: usize) -> usize {
        match &self.blocks[idx] {
            Block::Power { period, .. } => period.len(),
            Block::Run { .. } => 1,
        }
    }

    /// Steals trailing explicit letters that extend this stretch backward:
    /// the stretch's zone claims letters it matches going backward, except
    /// those belonging to an earlier zone — a preceding power's continuation
    /// prefix, or a constant run the stretch covers only partially.
    /// Returns the number of letters stolen; the caller extends the stretch
    /// and rotates the pattern right by that amount.
    fn backward_steal(&mut self, pattern: &[Letter]) -> i64 {
        let m = pattern.len();
        // The explicit tail section: trailing runs down to the last power.
        let mut j = self.blocks.len();
        while j > 0 && matches!(self.blocks[j - 1], Block::Run { .. }) {
            j -= 1;
        }
        if j == self.blocks.len() {
            return 0;
        }
        let mut runs: Vec<(Letter, i64)> = Vec::new();
        for b in &self.blocks[j..] {
            let Block::Run { letter, count } = b else {
                unreachable!()
            };
            let Some(c) = count.to_i64() else { return 0 };
            runs.push((*letter, c));
        }
        let total: i64 = runs.iter().map(|(_, c)| c).sum();

        // Letters matching the pattern read backward, in whole runs only: a
        // partially matched run is an earlier constant zone that survives.
        let mut matched = 0i64;
        'scan: for (l, c) in runs.iter().rev() {
            if m == 1 {
                if pattern[0] == *l {
                    matched += c;
                    continue;
                }
                break;
            }
            for t in 0..*c {
                let idx =
                    (m as i64 - 1 - ((matched + t) % m as i64)).rem_euclid(m as i64) as usize;
                if pattern[idx] != *l {
                    break 'scan;
                }
                if t + 1 == *c {
                    matched += c;
                    continue 'scan;
                }
                if t >= m as i64 {
                    break 'scan;
                }
            }
            break;
        }

        // A constant zone that extends into the preceding power (same last
        // letter) starts earlier than this stretch and keeps its run.
        if m >= 2 && matched == total && j > 0 {
            if let Block::Power { period, .. } = &self.blocks[j - 1] {
                if period[period.len() - 1] == runs[0].0 {
                    matched -= runs[0].1;
                }
            }
        }

        // Letters bound to the preceding power's zone (its pattern continued
        // into the section).
        let mut protected = 0i64;
        if j > 0 {
            if let Block::Power { period, .. } = &self.blocks[j - 1] {
                let mp = period.len();
                let mut phase = 0usize;
                'cont: for (l, c) in &runs {
                    if mp == 1 {
                        if *l == period[0] {
                            protected += c;
                            continue;
                        }
                        break;
                    }
                    for _ in 0..*c {
                        if period[phase % mp] != *l {
                            break 'cont;
                        }
                        protected += 1;
                        phase += 1;
                    }
                }
            }
        }

        let steal = matched.min(total - protected);
        if steal <= 0 {
            return 0;
        }
        // Remove `steal` letters from the back of the section.
        let mut remaining = steal;
        while remaining > 0 {
            let Some(Block::Run { count, .. }) = self.blocks.last_mut() else {
                unreachable!()
            };
            let c = count.to_i64().expect("section counts fit");
            if c <= remaining {
                remaining -= c;
                self.blocks.pop();
            } else {
                *count -= BigInt::from(remaining);
                remaining = 0;
            }
        }
        steal
    }

    /// Emits `pattern^(len)` with the exponent anchored so that its first
    /// coordinate is at most zero; integer surplus trails as explicit runs.
    fn emit_power(&mut self, pattern: Vec<Letter>, len: OrdVec) -> Result<(), WordError> {
        let m = pattern.len();
        let mb = BigInt::from(m);
        let rank = len.rank();
        let mut exp_coords = Vec::with_capacity(rank);
        let l1 = len.first().clone();
        let k1 = if l1.is_negative() {
            l1.div_floor(&mb)
        } else {
            BigInt::zero()
        };
        exp_coords.push(k1.clone());
        for i in 1..rank {
            let (q, r) = len.coord(i).div_rem(&mb);
            if !r.is_zero() {
                return Err(WordError::Unrepresentable(format!(
                    "stretch length {len} not alignable to period length {m}"
                )));
            }
            exp_coords.push(q);
        }
        let exp = OrdVec::new(exp_coords).expect("rank in range");
        assert!(exp.is_positive() && exp.height() >= 2);
        let surplus = to_small(&(l1 - &k1 * &mb))?;
        if let Some(t) = self.last_letter() {
            assert!(!t.cancels(pattern[0]), "builder fed unreduced material");
        }
        self.blocks.push(Block::Power {
            period: pattern.clone(),
            exp,
        });
        self.spell(&pattern, 0, surplus);
        Ok(())
    }

    /// Spells `count` letters of `pattern` starting at `phase` (0-based).
    fn spell(&mut self, pattern: &[Letter], phase: usize, count: i64) {
        let m = pattern.len();
        let mut i = 0i64;
        while i < count {
            let l = pattern[(phase + i as usize) % m];
            let mut c = 1i64;
            while i + c < count && pattern[(phase + (i + c) as usize) % m] == l {
                c += 1;
            }
            self.push_run(l, BigInt::from(c));
            i += c;
        }
    }

    pub fn push_block(&mut self, b: &Block) -> Result<(), WordError> {
        match b {
            Block::Run { letter, count } => {
                self.push_run(*letter, count.clone());
                Ok(())
            }
            Block::Power { period, exp } => {
                self.push_stretch(period.clone(), exp.scale(&BigInt::from(period.len())))
            }
        }
    }

    pub fn push_word(&mut self, w: &BlockWord) -> Result<(), WordError> {
        assert_eq!(self.rank, w.rank);
        for b in &w.blocks {
            self.push_block(b)?;
        }
        Ok(())
    }

    pub fn finish(self) -> BlockWord {
        BlockWord {
            rank: self.rank,
            blocks: self.blocks,
        }
    }
}

/// Result of [`BlockWord::com`]: the common prefix plus prefix flags.
#[derive(Debug, Clone)]
pub struct ComResult {
    pub word: BlockWord,
    /// `u` is exactly the common prefix (u is a prefix of v).
    pub u_is_prefix: bool,
    /// `v` is exactly the common prefix.
    pub v_is_prefix: bool,
}

#[derive(Clone)]
struct Cursor {
    idx: usize,
    consumed: OrdVec,
}

enum Head<'a> {
    Run(Letter, BigInt),
    Power(&'a [Letter], usize, OrdVec),
}

impl BlockWord {
    pub fn empty(rank: usize) -> Self {
        BlockWord {
            rank,
            blocks: Vec::new(),
        }
    }

    pub fn letter(rank: usize, l: Letter) -> Self {
        let mut b = WordBuilder::new(rank);
        b.push_letter(l);
        b.finish()
    }

    pub fn from_letters(rank: usize, letters: &[Letter]) -> Result<Self, WordError> {
        let mut out = Self::empty(rank);
        for &l in letters {
            out = out.mul(&Self::letter(rank, l))?;
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn len(&self) -> OrdVec {
        let mut total = OrdVec::zero(self.rank);
        for b in &self.blocks {
            total = total.add(&b.len(self.rank));
        }
        total
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.blocks.first().map(|b| b.first_letter())
    }

    pub fn last_letter(&self) -> Option<Letter> {
        self.blocks.last().map(|b| b.last_letter())
    }

    /// The letter at position `pos`, `1 <= pos <= |w|`.
    pub fn eval(&self, pos: &OrdVec) -> Result<Letter, WordError> {
        if pos.rank() != self.rank {
            return Err(WordError::RankMismatch(pos.rank(), self.rank));
        }
        if !pos.is_positive() {
            return Err(WordError::OutOfDomain);
        }
        let mut acc = OrdVec::zero(self.rank);
        for b in &self.blocks {
            let next = acc.add(&b.len(self.rank));
            if *pos <= next {
                let rel = pos.sub(&acc);
                return Ok(match b {
                    Block::Run { letter, .. } => *letter,
                    Block::Power { period, .. } => {
                        let m = BigInt::from(period.len());
                        let phase = (rel.first() - 1i32).mod_floor(&m);
                        period[phase.to_usize().expect("phase fits")]
                    }
                });
            }
            acc = next;
        }
        Err(WordError::OutOfDomain)
    }

    pub fn inverse(&self) -> Self {
        let mut b = WordBuilder::new(self.rank);
        for block in self.blocks.iter().rev() {
            match block {
                Block::Run { letter, count } => b.push_run(letter.inv(), count.clone()),
                Block::Power { period, exp } => {
                    // Block lengths have first coordinate divisible by m, so
                    // the inverse stretch is the reverse-inverted pattern.
                    b.push_stretch(rev_inv(period), exp.scale(&BigInt::from(period.len())))
                        .expect("inverse stretch is alignable");
                }
            }
        }
        b.finish()
    }

    fn head(&self, c: &Cursor) -> Option<Head<'_>> {
        let b = self.blocks.get(c.idx)?;
        Some(match b {
            Block::Run { letter, count } => Head::Run(*letter, count - c.consumed.first()),
            Block::Power { period, exp } => {
                let m = period.len();
                let phase = c
                    .consumed
                    .first()
                    .mod_floor(&BigInt::from(m))
                    .to_usize()
                    .expect("phase fits");
                let rem = exp.scale(&BigInt::from(m)).sub(&c.consumed);
                Head::Power(period, phase, rem)
            }
        })
    }

    fn advance(&self, c: &mut Cursor, t: &OrdVec) {
        c.consumed = c.consumed.add(t);
        let b = &self.blocks[c.idx];
        if c.consumed == b.len(self.rank) {
            c.idx += 1;
            c.consumed = OrdVec::zero(self.rank);
        }
    }

    /// Letter `j` positions ahead of the cursor, staying within its block.
    fn letter_ahead(&self, c: &Cursor, j: i64) -> Option<Letter> {
        let b = self.blocks.get(c.idx)?;
        let off = c.consumed.add(&OrdVec::one(self.rank).scale_i64(j));
        if off >= b.len(self.rank) {
            return None;
        }
        Some(match b {
            Block::Run { letter, .. } => *letter,
            Block::Power { period, .. } => {
                let m = BigInt::from(period.len());
                let phase = off.first().mod_floor(&m).to_usize().expect("phase fits");
                period[phase]
            }
        })
    }

    /// Longest common initial segment. Total within this class.
    pub fn com(&self, other: &Self) -> Result<ComResult, WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch(self.rank, other.rank));
        }
        let mut cu = Cursor {
            idx: 0,
            consumed: OrdVec::zero(self.rank),
        };
        let mut cv = cu.clone();
        let mut out = WordBuilder::new(self.rank);
        'outer: loop {
            let (hu, hv) = match (self.head(&cu), other.head(&cv)) {
                (Some(a), Some(b)) => (a, b),
                _ => break,
            };
            match (hu, hv) {
                (Head::Run(l, a), Head::Run(l2, b)) => {
                    if l != l2 {
                        break;
                    }
                    let t = a.min(b);
                    out.push_run(l, t.clone());
                    let tv = {
                        let mut v = OrdVec::zero(self.rank);
                        v = v.add(&OrdVec::one(self.rank).scale(&t));
                        v
                    };
                    self.advance(&mut cu, &tv);
                    other.advance(&mut cv, &tv);
                }
                (Head::Power(p, phase, rem), Head::Power(q, psi, rem2)) => {
                    if p.len() == q.len() && rot_left(p, phase) == rot_left(q, psi) {
                        let t = rem.clone().min(rem2.clone());
                        out.push_stretch(rot_left(p, phase), t.clone())?;
                        self.advance(&mut cu, &t);
                        other.advance(&mut cv, &t);
                    } else {
                        // Distinct primitive patterns diverge within m+m'.
                        let cap = (p.len() + q.len()) as i64 + 1;
                        for j in 0..cap {
                            let (a, b) = (self.letter_ahead(&cu, j), other.letter_ahead(&cv, j));
                            match (a, b) {
                                (Some(a), Some(b)) if a == b => continue,
                                (Some(_), Some(_)) => {
                                    // diverged after j common letters
                                    for i in 0..j {
                                        out.push_letter(self.letter_ahead(&cu, i).unwrap());
                                    }
                                    break 'outer;
                                }
                                _ => {
                                    // a block ended inside the scan window
                                    for i in 0..j {
                                        out.push_letter(self.letter_ahead(&cu, i).unwrap());
                                    }
                                    let tv = OrdVec::one(self.rank).scale_i64(j);
                                    if !tv.is_zero() {
                                        self.advance(&mut cu, &tv);
                                        other.advance(&mut cv, &tv);
                                    }
                                    continue 'outer;
                                }
                            }
                        }
                        unreachable!("primitive patterns agreed past the periodicity bound");
                    }
                }
                (Head::Run(l, a), Head::Power(q, psi, rem)) => {
                    let t = Self::run_vs_pattern(l, &a, q, psi, &rem);
                    match t {
                        None => break,
                        Some(tv) => {
                            if tv.is_zero() {
                                break;
                            }
                            out.push_run(l, tv.first().clone());
                            self.advance(&mut cu, &tv);
                            other.advance(&mut cv, &tv);
                        }
                    }
                }
                (Head::Power(p, phase, rem), Head::Run(l, b)) => {
                    let t = Self::run_vs_pattern(l, &b, p, phase, &rem);
                    match t {
                        None => break,
                        Some(tv) => {
                            if tv.is_zero() {
                                break;
                            }
                            out.push_run(l, tv.first().clone());
                            self.advance(&mut cu, &tv);
                            other.advance(&mut cv, &tv);
                        }
                    }
                }
            }
        }
        let word = out.finish();
        let u_is_prefix = cu.idx == self.blocks.len();
        let v_is_prefix = cv.idx == other.blocks.len();
        Ok(ComResult {
            word,
            u_is_prefix,
            v_is_prefix,
        })
    }

    /// How far a run of `l` (length `a`) matches a pattern from `phase`,
    /// capped by the pattern block's remaining length.
    fn run_vs_pattern(
        l: Letter,
        a: &BigInt,
        pattern: &[Letter],
        phase: usize,
        rem: &OrdVec,
    ) -> Option<OrdVec> {
        let m = pattern.len();
        let rank = rem.rank();
        if pattern[phase] != l {
            return None;
        }
        if m == 1 {
            let av = OrdVec::one(rank).scale(a);
            return Some(av.min(rem.clone()));
        }
        let mut t = 0i64;
        while BigInt::from(t) < *a && pattern[(phase + t as usize) % m] == l {
            t += 1;
            if t > m as i64 {
                break;
            }
        }
        let tv = OrdVec::one(rank).scale_i64(t);
        Some(tv.min(rem.clone()))
    }

    /// Restriction to `[1, upto]`.
    pub fn cut_prefix(&self, upto: &OrdVec) -> Result<Self, WordError> {
        if upto.is_zero() {
            return Ok(Self::empty(self.rank));
        }
        if !(upto.is_positive() && *upto <= self.len()) {
            return Err(WordError::OutOfDomain);
        }
        let mut b = WordBuilder::new(self.rank);
        let mut acc = OrdVec::zero(self.rank);
        for block in &self.blocks {
            let next = acc.add(&block.len(self.rank));
            if next <= *upto {
                b.push_block(block)?;
                if next == *upto {
                    break;
                }
            } else {
                let partial = upto.sub(&acc);
                match block {
                    Block::Run { letter, .. } => b.push_run(*letter, partial.first().clone()),
                    Block::Power { period, .. } => b.push_stretch(period.clone(), partial)?,
                }
                break;
            }
            acc = next;
        }
        Ok(b.finish())
    }

    /// Restriction to `[from+1, |w|]`, re-based at 1.
    pub fn cut_suffix(&self, from: &OrdVec) -> Result<Self, WordError> {
        if from.is_zero() {
            return Ok(self.clone());
        }
        if !(from.is_positive() && *from <= self.len()) {
            return Err(WordError::OutOfDomain);
        }
        let mut b = WordBuilder::new(self.rank);
        let mut acc = OrdVec::zero(self.rank);
        let mut copying = false;
        for block in &self.blocks {
            if copying {
                b.push_block(block)?;
                continue;
            }
            let next = acc.add(&block.len(self.rank));
            if next <= *from {
                let done = next == *from;
                acc = next;
                if done {
                    copying = true;
                }
                continue;
            }
            // split point inside this block
            let consumed = from.sub(&acc);
            let rem = next.sub(from);
            match block {
                Block::Run { letter, .. } => b.push_run(*letter, rem.first().clone()),
                Block::Power { period, .. } => {
                    let m = BigInt::from(period.len());
                    let shift = consumed
                        .first()
                        .mod_floor(&m)
                        .to_usize()
                        .expect("phase fits");
                    b.push_stretch(rot_left(period, shift), rem)?;
                }
            }
            copying = true;
        }
        Ok(b.finish())
    }

    /// `u * v`: multiplication with maximal cancellation.
    pub fn mul(&self, v: &Self) -> Result<Self, WordError> {
        let c = self.inverse().com(v)?;
        let clen = c.word.len();
        let keep_u = self.len().sub(&clen);
        let keep_v = v.len().sub(&clen);
        let mut b = WordBuilder::new(self.rank);
        if keep_u.is_positive() {
            b.push_word(&self.cut_prefix(&keep_u)?)?;
        }
        if keep_v.is_positive() {
            b.push_word(&v.cut_suffix(&clen)?)?;
        }
        Ok(b.finish())
    }

    /// Concatenation with normalization; the flag records whether the
    /// boundary was already reduced so that `uv = u ∘ v`.
    pub fn concat(&self, v: &Self) -> Result<(Self, bool), WordError> {
        let c = self.inverse().com(v)?;
        let reduced = c.word.is_empty();
        Ok((self.mul(v)?, reduced))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first_letter(), self.last_letter()) {
            (Some(f), Some(l)) => !f.cancels(l),
            _ => true,
        }
    }

    /// Unique decomposition `w = c^{-1} ∘ u ∘ c` with `u` cyclically reduced.
    pub fn cyclic_decompose(&self) -> Result<(Self, Self), WordError> {
        if self.is_empty() {
            return Err(WordError::EmptyWord);
        }
        let c_inv = self.com(&self.inverse())?.word;
        let clen = c_inv.len();
        let mid = self.cut_suffix(&clen)?;
        let ulen = mid.len().sub(&clen);
        assert!(ulen.is_positive(), "cyclic core must be nonempty");
        let u = mid.cut_prefix(&ulen)?;
        debug_assert!(u.is_cyclically_reduced());
        Ok((c_inv.inverse(), u))
    }

    /// Integer power via the cyclic decomposition.
    pub fn pow_int(&self, e: &BigInt) -> Result<Self, WordError> {
        if e.is_zero() || self.is_empty() {
            return Ok(Self::empty(self.rank));
        }
        let (base, e) = if e.is_negative() {
            (self.inverse(), -e)
        } else {
            (self.clone(), e.clone())
        };
        let reps = to_small(&e)?;
        let (c, u) = base.cyclic_decompose()?;
        let mut b = WordBuilder::new(self.rank);
        b.push_word(&c.inverse())?;
        for _ in 0..reps {
            b.push_word(&u)?;
        }
        b.push_word(&c)?;
        Ok(b.finish())
    }

    /// `Z^n`-exponent power: the base must have height-one length so that the
    /// length of the result is `|base| * e`.
    pub fn pow_vec(&self, e: &OrdVec) -> Result<Self, WordError> {
        if e.rank() != self.rank {
            return Err(WordError::RankMismatch(e.rank(), self.rank));
        }
        if e.height() <= 1 {
            return self.pow_int(e.first());
        }
        if self.is_empty() {
            return Ok(Self::empty(self.rank));
        }
        let (base, e) = if e.is_negative() {
            (self.inverse(), e.neg())
        } else {
            (self.clone(), e.clone())
        };
        if base.len().height() > 1 {
            return Err(WordError::Malformed(
                "base of an infinite power must be a finite word".into(),
            ));
        }
        let (c, u) = base.cyclic_decompose()?;
        let letters = u.to_finite_letters().expect("height-one core is finite");
        let root = primitive_root_len(&letters);
        let j = letters.len() / root;
        let pattern = letters[..root].to_vec();
        let exp = e.scale_i64(j as i64);
        let mut b = WordBuilder::new(self.rank);
        b.push_word(&c.inverse())?;
        b.push_stretch(pattern, exp.scale_i64(root as i64))?;
        b.push_word(&c)?;
        Ok(b.finish())
    }

    /// Spells the word out when it contains no infinite blocks.
    pub fn to_finite_letters(&self) -> Option<Vec<Letter>> {
        let mut out = Vec::new();
        for b in &self.blocks {
            match b {
                Block::Run { letter, count } => {
                    let c = count.to_i64()?;
                    if c > UNROLL_CAP {
                        return None;
                    }
                    out.extend(std::iter::repeat(*letter).take(c as usize));
                }
                Block::Power { .. } => return None,
            }
        }
        Some(out)
    }

    /// Deterministic total order: by length, then block structure.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.blocks.cmp(&other.blocks))
    }

    /// Rebuilds through a fresh builder; used by tests to verify canonicality.
    pub fn recanonicalize(&self) -> Result<Self, WordError> {
        let mut b = WordBuilder::new(self.rank);
        b.push_word(self)?;
        Ok(b.finish())
    }
}

impl PartialOrd for BlockWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.canonical_cmp(other))
    }
}

impl Ord for BlockWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_cmp(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    fn setup() -> (Alphabet, Letter, Letter, Letter) {
        let mut a = Alphabet::new();
        let x = Letter::new(a.intern("x").unwrap());
        let y = Letter::new(a.intern("y").unwrap());
        let z = Letter::new(a.intern("z").unwrap());
        (a, x, y, z)
    }

    fn pow(rank: usize, p: &[Letter], e: &[i64]) -> BlockWord {
        let mut b = WordBuilder::new(rank);
        b.push_stretch(
            p.to_vec(),
            OrdVec::from_i64s(e).scale_i64(p.len() as i64),
        )
        .unwrap();
        b.finish()
    }

    fn word(rank: usize, ls: &[Letter]) -> BlockWord {
        BlockWord::from_letters(rank, ls).unwrap()
    }

    #[test]
    fn run_merge_and_cancellation() {
        let (_, x, _, _) = setup();
        let w = word(2, &[x, x, x]);
        assert_eq!(w.blocks().len(), 1);
        assert_eq!(w.len(), OrdVec::from_i64s(&[3, 0]));
        let e = word(2, &[x, x.inv()]);
        assert!(e.is_empty());
    }

    #[test]
    fn eval_phase_rule() {
        let (_, x, y, z) = setup();
        let w = word(2, &[x, y, z]);
        assert_eq!(w.eval(&OrdVec::from_i64s(&[2, 0])).unwrap(), y);
        // (xy)^(0,1) has length (0,2)
        let p = pow(2, &[x, y], &[0, 1]);
        assert_eq!(p.len(), OrdVec::from_i64s(&[0, 2]));
        assert_eq!(p.eval(&OrdVec::from_i64s(&[3, 0])).unwrap(), x);
        assert_eq!(p.eval(&OrdVec::from_i64s(&[0, 1])).unwrap(), y);
        assert_eq!(p.eval(&OrdVec::from_i64s(&[0, 2])).unwrap(), y);
        assert!(p.eval(&OrdVec::from_i64s(&[1, 2])).is_err());
    }

    #[test]
    fn inverse_is_involutive_and_pointwise() {
        let (_, x, y, _) = setup();
        let p = pow(2, &[x, y], &[0, 1]);
        let inv = p.inverse();
        assert_eq!(inv.inverse(), p);
        assert_eq!(inv.len(), p.len());
        // eval(w^-1, b) = eval(w, |w|-b+1)^-1 at a few positions
        for b in [[1i64, 0], [2, 0], [-1, 1], [0, 2]] {
            let pos = OrdVec::from_i64s(&b);
            let mirror = p.len().sub(&pos).add(&OrdVec::one(2));
            assert_eq!(inv.eval(&pos).unwrap(), p.eval(&mirror).unwrap().inv());
        }
    }

    #[test]
    fn concat_with_power_tail() {
        let (_, x, _, _) = setup();
        // concat((x)^(0,1), x) keeps the run outside the exponent
        let p = pow(2, &[x], &[0, 1]);
        let (r, reduced) = p.concat(&word(2, &[x])).unwrap();
        assert!(reduced);
        assert_eq!(r.len(), OrdVec::from_i64s(&[1, 1]));
        assert_eq!(r.blocks().len(), 2);
        // and a negative-anchored exponent absorbs the run instead
        let q = pow(2, &[x], &[-1, 1]);
        let (r2, _) = q.concat(&word(2, &[x])).unwrap();
        assert_eq!(r2, pow(2, &[x], &[0, 1]));
    }

    #[test]
    fn com_examples() {
        let (_, x, y, z) = setup();
        let c = word(2, &[x, y]).com(&word(2, &[x, z])).unwrap();
        assert_eq!(c.word, word(2, &[x]));
        assert!(!c.u_is_prefix && !c.v_is_prefix);

        // com((x)^(0,1) y, (x)^(0,1) z) = (x)^(0,1)
        let p = pow(2, &[x], &[0, 1]);
        let u = p.mul(&word(2, &[y])).unwrap();
        let v = p.mul(&word(2, &[z])).unwrap();
        let c = u.com(&v).unwrap();
        assert_eq!(c.word, p);

        let c = word(2, &[x, y]).com(&word(2, &[y, z])).unwrap();
        assert!(c.word.is_empty());

        let c = word(2, &[x]).com(&word(2, &[x, z])).unwrap();
        assert!(c.u_is_prefix && !c.v_is_prefix);
    }

    #[test]
    fn star_examples() {
        let (_, x, y, _) = setup();
        let u = word(2, &[x, y]);
        assert!(u.mul(&u.inverse()).unwrap().is_empty());
        // star(xy, y^-1 x) = xx
        let v = word(2, &[y.inv(), x]);
        assert_eq!(u.mul(&v).unwrap(), word(2, &[x, x]));
        // full cancellation of an infinite block
        let p = pow(2, &[x], &[0, 1]);
        let pi = pow(2, &[x.inv()], &[0, 1]);
        let w = pi.mul(&word(2, &[y])).unwrap();
        assert_eq!(p.mul(&w).unwrap(), word(2, &[y]));
    }

    #[test]
    fn length_law_on_samples() {
        let (_, x, y, z) = setup();
        let p = pow(2, &[x], &[0, 1]);
        let cases = [
            (word(2, &[x, y]), word(2, &[y.inv(), z])),
            (p.mul(&word(2, &[y])).unwrap(), word(2, &[y.inv(), z])),
            (p.clone(), p.inverse()),
        ];
        for (u, v) in cases {
            let prod = u.mul(&v).unwrap();
            let c = u.inverse().com(&v).unwrap().word;
            let expected = u.len().add(&v.len()).sub(&c.len().scale_i64(2));
            assert_eq!(prod.len(), expected);
        }
    }

    #[test]
    fn cyclic_decomposition() {
        let (_, x, y, _) = setup();
        // x^-1 y x -> c = x, u = y
        let w = word(2, &[x.inv(), y, x]);
        let (c, u) = w.cyclic_decompose().unwrap();
        assert_eq!(c, word(2, &[x]));
        assert_eq!(u, word(2, &[y]));
        // cyclically reduced word is its own core
        let w = word(2, &[x, y]);
        let (c, u) = w.cyclic_decompose().unwrap();
        assert!(c.is_empty());
        assert_eq!(u, w);
        // (x)^(0,1) y (x^-1)^(0,1): conjugator is the infinite part
        let p = pow(2, &[x], &[0, 1]);
        let w = p.mul(&word(2, &[y])).unwrap().mul(&p.inverse()).unwrap();
        let (c, u) = w.cyclic_decompose().unwrap();
        assert_eq!(u, word(2, &[y]));
        assert_eq!(c, p.inverse());
        // reassembly
        let back = c.inverse().mul(&u).unwrap().mul(&c).unwrap();
        assert_eq!(back, w);
        assert!(BlockWord::empty(2).cyclic_decompose().is_err());
    }

    #[test]
    fn pow_vec_extracts_primitive_root() {
        let (_, x, y, _) = setup();
        // (xyxy)^(0,1) -> (xy)^(0,2)
        let base = word(2, &[x, y, x, y]);
        let w = base.pow_vec(&OrdVec::from_i64s(&[0, 1])).unwrap();
        assert_eq!(w, pow(2, &[x, y], &[0, 2]));
        // sampled positions agree with unrolled (xy)^K
        let unrolled: Vec<Letter> = std::iter::repeat([x, y]).take(30).flatten().collect();
        for i in 1..=10i64 {
            let pos = OrdVec::from_i64s(&[i, 0]);
            assert_eq!(w.eval(&pos).unwrap(), unrolled[(i - 1) as usize]);
        }
    }

    #[test]
    fn zone_overlap_resolution() {
        let (_, x, y, _) = setup();
        // x-power followed by an alternating power: the x-zone keeps the
        // overlap letter, so the run stays bound to the first power.
        let mut b = WordBuilder::new(2);
        b.push_stretch(vec![x], OrdVec::from_i64s(&[0, 1])).unwrap();
        b.push_stretch(vec![x, y], OrdVec::from_i64s(&[0, 2])).unwrap();
        let w = b.finish();
        assert_eq!(w.recanonicalize().unwrap(), w);
        assert_eq!(w.len(), OrdVec::from_i64s(&[0, 3]));
        // same function assembled differently
        let mut b2 = WordBuilder::new(2);
        b2.push_stretch(vec![x], OrdVec::from_i64s(&[1, 1])).unwrap();
        b2.push_stretch(vec![y, x], OrdVec::from_i64s(&[-2, 2])).unwrap();
        b2.push_letter(y);
        let w2 = b2.finish();
        assert_eq!(w, w2);
    }

    #[test]
    fn cut_round_trip() {
        let (_, x, y, z) = setup();
        let p = pow(2, &[x], &[0, 1]);
        let w = p.mul(&word(2, &[y, z])).unwrap();
        let total = w.len();
        for cut in [[1i64, 0], [0, 1], [-2, 1], [1, 1]] {
            let at = OrdVec::from_i64s(&cut);
            let a = w.cut_prefix(&at).unwrap();
            let b = w.cut_suffix(&at).unwrap();
            assert_eq!(a.len(), at);
            assert_eq!(b.len(), total.sub(&at));
            let (joined, reduced) = a.concat(&b).unwrap();
            assert!(reduced);
            assert_eq!(joined, w);
        }
    }

    #[test]
    fn com_of_word_with_itself() {
        let (_, x, y, _) = setup();
        let p = pow(2, &[x, y], &[0, 2]);
        let c = p.com(&p).unwrap();
        assert_eq!(c.word, p);
        assert!(c.u_is_prefix && c.v_is_prefix);
    }
}
