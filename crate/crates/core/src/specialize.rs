//! Specialization of `Z^n`-words to finite words, plus the independent
//! finite free-group arithmetic used as a testing oracle.
//!
//! The oracle side deliberately avoids the block-word code paths: products
//! and common prefixes here are computed on plain letter vectors.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::alphabet::Letter;
use crate::ordvec::OrdVec;
use crate::word::{Block, BlockWord, WordError};

/// Free reduction of a letter sequence.
pub fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        match out.last() {
            Some(&t) if t.cancels(l) => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

/// Product in the free group on reduced inputs.
pub fn free_mul(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    let mut joined = Vec::with_capacity(u.len() + v.len());
    joined.extend_from_slice(u);
    joined.extend_from_slice(v);
    free_reduce(&joined)
}

pub fn free_inverse(u: &[Letter]) -> Vec<Letter> {
    u.iter().rev().map(|l| l.inv()).collect()
}

/// Longest common prefix of two letter sequences.
pub fn longest_common_prefix(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    u.iter()
        .zip(v.iter())
        .take_while(|(a, b)| a == b)
        .map(|(a, _)| *a)
        .collect()
}

const SPECIALIZE_CAP: i64 = 1 << 22;

/// Replaces every `Power(p,(k1,k2))` of a rank-2 word by the finite run
/// `p^(k1 + k2*N)` and freely reduces.
pub fn specialize(w: &BlockWord, n: i64) -> Result<Vec<Letter>, WordError> {
    if w.rank() != 2 {
        return Err(WordError::RankMismatch(w.rank(), 2));
    }
    let mut letters = Vec::new();
    for b in w.blocks() {
        match b {
            Block::Run { letter, count } => {
                let c = count
                    .to_i64()
                    .filter(|c| *c <= SPECIALIZE_CAP)
                    .ok_or_else(|| WordError::Unrepresentable("run too long".into()))?;
                letters.extend(std::iter::repeat(*letter).take(c as usize));
            }
            Block::Power { period, exp } => {
                let k1 = exp.coord(0);
                let k2 = exp.coord(1);
                let e = k1 + k2 * BigInt::from(n);
                let e = e
                    .to_i64()
                    .filter(|e| *e <= SPECIALIZE_CAP)
                    .ok_or_else(|| WordError::Unrepresentable("exponent too large".into()))?;
                if e < 1 {
                    return Err(WordError::NonPositiveSpecializedExponent);
                }
                for _ in 0..e {
                    letters.extend_from_slice(period);
                }
            }
        }
    }
    Ok(free_reduce(&letters))
}

/// One specialization step on the most significant coordinate: a rank-n word
/// becomes a rank-(n-1) word with `k_{n-1} := k_{n-1} + k_n * N`.
pub fn specialize_top(w: &BlockWord, n: i64) -> Result<BlockWord, WordError> {
    let rank = w.rank();
    if rank < 2 {
        return Err(WordError::RankMismatch(rank, 2));
    }
    let new_rank = rank - 1;
    let mut b = crate::word::WordBuilder::new(new_rank);
    for block in w.blocks() {
        match block {
            Block::Run { letter, count } => b.push_run(*letter, count.clone()),
            Block::Power { period, exp } => {
                let mut coords: Vec<BigInt> = exp.coords()[..new_rank].to_vec();
                let top = exp.coord(rank - 1);
                coords[new_rank - 1] = &coords[new_rank - 1] + top * BigInt::from(n);
                let newexp = OrdVec::new(coords).expect("rank in range");
                if !newexp.is_positive() {
                    return Err(WordError::NonPositiveSpecializedExponent);
                }
                let len = newexp.scale_i64(period.len() as i64);
                b.push_stretch(period.clone(), len)?;
            }
        }
    }
    Ok(b.finish())
}

/// Iterated specialization, most significant coordinate first, down to a
/// finite word.
pub fn specialize_chain(w: &BlockWord, ns: &[i64]) -> Result<Vec<Letter>, WordError> {
    if w.rank() == 1 {
        return w
            .to_finite_letters()
            .ok_or_else(|| WordError::Unrepresentable("rank-1 word too long".into()));
    }
    if ns.is_empty() {
        return Err(WordError::Malformed(
            "not enough specialization parameters".into(),
        ));
    }
    if w.rank() == 2 {
        return specialize(w, ns[0]);
    }
    let stepped = specialize_top(w, ns[0])?;
    specialize_chain(&stepped, &ns[1..])
}

/// The specialization threshold `N0`: beyond it, specialized length
/// comparisons agree with the symbolic right-lex ones, so `com` and `*`
/// commute with specialization. The bound is the largest `|k1|` over power
/// blocks plus the largest run length plus one, times the lcm of the period
/// lengths: a specialized power then always outruns any explicit run it is
/// compared against, and phases stay aligned.
pub fn threshold_n0(words: &[&BlockWord]) -> i64 {
    let mut max_k1: i64 = 0;
    let mut max_run: i64 = 0;
    let mut lcm: i64 = 1;
    for w in words {
        for b in w.blocks() {
            match b {
                Block::Power { period, exp } => {
                    let k1 = exp.coord(0).to_i64().unwrap_or(i64::MAX / 4).abs();
                    max_k1 = max_k1.max(k1);
                    lcm = num_integer::lcm(lcm, period.len() as i64);
                }
                Block::Run { count, .. } => {
                    let c = count.to_i64().unwrap_or(i64::MAX / 4).abs();
                    max_run = max_run.max(c);
                }
            }
        }
    }
    (max_k1 + max_run + 1) * lcm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::expr::parse_word_str;

    fn alpha() -> Alphabet {
        Alphabet::from_names(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn specialize_examples() {
        let a = alpha();
        // (xy)^(0,1) at N=3 -> xyxyxy
        let w = parse_word_str("(x y)^(0,1)", &a, 2).unwrap();
        let s = specialize(&w, 3).unwrap();
        let expect = parse_word_str("x y x y x y", &a, 2).unwrap();
        assert_eq!(s, expect.to_finite_letters().unwrap());

        // words without blocks are unchanged
        let w = parse_word_str("x y z", &a, 2).unwrap();
        assert_eq!(
            specialize(&w, 17).unwrap(),
            w.to_finite_letters().unwrap()
        );

        // (x)^(-1,1) at N=4 -> xxx
        let w = parse_word_str("(x)^(-1,1)", &a, 2).unwrap();
        let s = specialize(&w, 4).unwrap();
        assert_eq!(s.len(), 3);

        // too small an N is an error
        assert!(matches!(
            specialize(&w, 1),
            Err(WordError::NonPositiveSpecializedExponent)
        ));
    }

    #[test]
    fn free_ops() {
        let a = alpha();
        let u = parse_word_str("x y", &a, 2).unwrap().to_finite_letters().unwrap();
        let v = parse_word_str("y^-1 x", &a, 2).unwrap().to_finite_letters().unwrap();
        let p = free_mul(&u, &v);
        let xx = parse_word_str("x x", &a, 2).unwrap().to_finite_letters().unwrap();
        assert_eq!(p, xx);
        assert_eq!(free_mul(&u, &free_inverse(&u)), Vec::new());
        assert_eq!(longest_common_prefix(&u, &xx), u[..1].to_vec());
    }

    #[test]
    fn threshold_guarantees_positivity() {
        let a = alpha();
        let w = parse_word_str("(x y)^(-3,1) z (x)^(-2,2)", &a, 2).unwrap();
        let n0 = threshold_n0(&[&w]);
        assert!(n0 >= 8); // (3+1) * lcm(2,1)
        assert!(specialize(&w, n0).is_ok());
    }

    #[test]
    fn chain_matches_rank2() {
        let a = alpha();
        let w = parse_word_str("(x y)^(0,1) z^2", &a, 2).unwrap();
        assert_eq!(
            specialize_chain(&w, &[5]).unwrap(),
            specialize(&w, 5).unwrap()
        );
    }
}
