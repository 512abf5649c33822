//! Property tests for the word algebra, cross-checked against independent
//! finite free-group arithmetic through the specialization oracle.

use proptest::prelude::*;

use znfree::alphabet::{Alphabet, Letter};
use znfree::ordvec::OrdVec;
use znfree::specialize::{
    free_mul, longest_common_prefix, specialize, threshold_n0,
};
use znfree::word::BlockWord;

fn alphabet() -> Alphabet {
    Alphabet::from_names(&["x", "y", "z"]).unwrap()
}

fn letters() -> Vec<Letter> {
    let a = alphabet();
    let x = Letter::new(a.lookup("x").unwrap());
    let y = Letter::new(a.lookup("y").unwrap());
    let z = Letter::new(a.lookup("z").unwrap());
    vec![x, y, z, x.inv(), y.inv(), z.inv()]
}

/// Primitive cyclically reduced patterns over {x,y,z}.
fn patterns() -> Vec<Vec<Letter>> {
    let ls = letters();
    let (x, y, z) = (ls[0], ls[1], ls[2]);
    vec![
        vec![x],
        vec![y],
        vec![z],
        vec![x.inv()],
        vec![x, y],
        vec![x, z],
        vec![y, x.inv()],
        vec![x, x, y],
        vec![x, y, z],
    ]
}

#[derive(Debug, Clone)]
enum Piece {
    Letters(Vec<usize>),
    Power { pat: usize, k1: i64, k2: i64 },
}

fn piece_strategy() -> impl Strategy<Value = Piece> {
    prop_oneof![
        prop::collection::vec(0usize..6, 1..4).prop_map(Piece::Letters),
        (0usize..9, -3i64..=3, 1i64..=3).prop_map(|(pat, k1, k2)| Piece::Power { pat, k1, k2 }),
    ]
}

fn build(pieces: &[Piece]) -> BlockWord {
    let ls = letters();
    let pats = patterns();
    let mut acc = BlockWord::empty(2);
    for p in pieces {
        let w = match p {
            Piece::Letters(idx) => {
                let seq: Vec<Letter> = idx.iter().map(|&i| ls[i]).collect();
                BlockWord::from_letters(2, &seq).unwrap()
            }
            Piece::Power { pat, k1, k2 } => {
                let base = BlockWord::from_letters(2, &pats[*pat]).unwrap();
                base.pow_vec(&OrdVec::from_i64s(&[*k1, *k2])).unwrap()
            }
        };
        acc = acc.mul(&w).unwrap();
    }
    acc
}

fn word_strategy() -> impl Strategy<Value = BlockWord> {
    prop::collection::vec(piece_strategy(), 1..5).prop_map(|ps| build(&ps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_form_is_stable(w in word_strategy()) {
        prop_assert_eq!(w.recanonicalize().unwrap(), w);
    }

    #[test]
    fn length_law(u in word_strategy(), v in word_strategy()) {
        let prod = u.mul(&v).unwrap();
        let c = u.inverse().com(&v).unwrap().word;
        let expected = u.len().add(&v.len()).sub(&c.len().scale_i64(2));
        prop_assert_eq!(prod.len(), expected);
    }

    #[test]
    fn anti_homomorphism(u in word_strategy(), v in word_strategy()) {
        let lhs = u.mul(&v).unwrap().inverse();
        let rhs = v.inverse().mul(&u.inverse()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn com_symmetry(u in word_strategy(), v in word_strategy()) {
        let a = u.com(&v).unwrap().word;
        let b = v.com(&u).unwrap().word;
        prop_assert_eq!(a, b);
        let own = u.com(&u).unwrap();
        prop_assert_eq!(own.word, u);
    }

    #[test]
    fn inverse_involution(u in word_strategy()) {
        prop_assert_eq!(u.inverse().len(), u.len());
        prop_assert_eq!(u.inverse().inverse(), u);
    }

    #[test]
    fn specialization_commutes(u in word_strategy(), v in word_strategy()) {
        let prod = u.mul(&v).unwrap();
        let c = u.com(&v).unwrap().word;
        let n0 = threshold_n0(&[&u, &v, &prod, &c]);
        let su = specialize(&u, n0).unwrap();
        let sv = specialize(&v, n0).unwrap();
        // star commutes with specialization
        let sp = specialize(&prod, n0).unwrap();
        prop_assert_eq!(sp, free_mul(&su, &sv));
        // com commutes with specialization
        let sc = specialize(&c, n0).unwrap();
        prop_assert_eq!(sc, longest_common_prefix(&su, &sv));
    }

    #[test]
    fn cyclic_decomposition_reassembles(u in word_strategy()) {
        if !u.is_empty() {
            let (c, core) = u.cyclic_decompose().unwrap();
            prop_assert!(core.is_cyclically_reduced());
            let back = c.inverse().mul(&core).unwrap().mul(&c).unwrap();
            prop_assert_eq!(back, u);
        }
    }

    #[test]
    fn eval_matches_specialization(u in word_strategy()) {
        // Reading the specialized word letter by letter agrees with eval at
        // the first few height-one positions, provided N is large enough
        // that no power block is shorter than the window.
        let n0 = threshold_n0(&[&u]) + 8;
        let s = specialize(&u, n0).unwrap();
        let take = s.len().min(6);
        for i in 0..take {
            let pos = OrdVec::from_i64s(&[(i as i64) + 1, 0]);
            if pos <= u.len() {
                prop_assert_eq!(u.eval(&pos).unwrap(), s[i]);
            }
        }
    }
}
