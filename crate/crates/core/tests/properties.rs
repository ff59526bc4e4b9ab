use diageff::invariants::{CellMonomial, CellPolynomial};
use diageff::markov::moves_for;
use diageff::membership::{classify_toric_point, mixture_to_toric};
use diageff::param::{mixture_point, toric_point, MixtureParams, ToricParams};
use diageff::rational::{q, qi};
use diageff::table::{apply_move, sufficient_statistic, MoveOutcome};
use diageff::{CountTable, ModelFamily, ModelDef, ProbTable, Q};
use proptest::prelude::*;

const SIZE: usize = 3;

fn monomial() -> impl Strategy<Value = CellMonomial> {
    prop::collection::vec(((0..SIZE, 0..SIZE), 1u32..3), 0..3)
        .prop_map(CellMonomial::from_exponents)
}

fn polynomial() -> impl Strategy<Value = CellPolynomial> {
    prop::collection::vec((monomial(), -5i64..=5), 0..5)
        .prop_map(|terms| CellPolynomial::from_terms(SIZE, terms.into_iter().map(|(m, c)| (m, qi(c)))))
}

fn positive_point() -> impl Strategy<Value = ProbTable> {
    prop::collection::vec(1i64..20, SIZE * SIZE).prop_map(|raw| {
        let total: i64 = raw.iter().sum();
        ProbTable::from_cells(SIZE, raw.into_iter().map(|x| q(x, total)).collect()).unwrap()
    })
}

fn count_table() -> impl Strategy<Value = CountTable> {
    prop::collection::vec(0u64..4, SIZE * SIZE).prop_map(|c| CountTable::from_cells(SIZE, c).unwrap())
}

fn positive_vec(len: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(1i64..50, len).prop_map(|v| v.into_iter().map(|x| q(x, 7)).collect())
}

fn simplex(len: usize, low: i64) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(low..30, len).prop_filter_map("all zero", |v| {
        let total: i64 = v.iter().sum();
        (total > 0).then(|| v.into_iter().map(|x| q(x, total)).collect())
    })
}

proptest! {
    #[test]
    fn addition_is_commutative_and_cancels(f in polynomial(), g in polynomial()) {
        prop_assert_eq!(f.clone() + g.clone(), g.clone() + f.clone());
        prop_assert!((f.clone() - f).is_zero());
    }

    #[test]
    fn multiplication_distributes(f in polynomial(), g in polynomial(), h in polynomial()) {
        prop_assert_eq!(&f * &(g.clone() + h.clone()), (&f * &g) + (&f * &h));
    }

    #[test]
    fn evaluation_is_a_ring_map(f in polynomial(), g in polynomial(), p in positive_point()) {
        let (fv, gv) = (f.eval(&p).unwrap(), g.eval(&p).unwrap());
        prop_assert_eq!((f.clone() + g.clone()).eval(&p).unwrap(), &fv + &gv);
        prop_assert_eq!((&f * &g).eval(&p).unwrap(), fv * gv);
    }

    #[test]
    fn display_parse_round_trip(f in polynomial()) {
        let text = f.to_string();
        prop_assert_eq!(CellPolynomial::parse(SIZE, &text).unwrap(), f);
    }

    #[test]
    fn moves_preserve_sufficient_statistic(t in count_table(), pick in 0usize..100, common in any::<bool>()) {
        let family = if common { ModelFamily::CommonDiagonalEffect } else { ModelFamily::DiagonalEffect };
        let model = ModelDef::toric(family, SIZE).unwrap();
        let moves = moves_for(&model).unwrap();
        let mv = &moves[pick % moves.len()];
        for sign in [1, -1] {
            if let MoveOutcome::Feasible(next) = apply_move(&t, mv, sign).unwrap() {
                prop_assert_eq!(sufficient_statistic(&next, &model).unwrap(), sufficient_statistic(&t, &model).unwrap());
                let back = apply_move(&next, mv, -sign).unwrap().feasible().unwrap();
                prop_assert_eq!(back, t.clone());
            }
        }
    }

    #[test]
    fn witnesses_recompose(zr in positive_vec(SIZE), zc in positive_vec(SIZE), zg in positive_vec(SIZE)) {
        let params = ToricParams::new(zr, zc, zg).unwrap();
        let verdict = classify_toric_point(&params).unwrap();
        if let Some(w) = verdict.witness() {
            prop_assert_eq!(mixture_point(w).unwrap(), toric_point(&params).unwrap().0);
        }
    }

    #[test]
    fn mixture_round_trip(a in 1i64..=30, r in simplex(SIZE, 1), c in simplex(SIZE, 1), d in simplex(SIZE, 0)) {
        let m = MixtureParams::new(q(a, 30), r, c, d).unwrap();
        let t = mixture_to_toric(&m).unwrap();
        prop_assert_eq!(toric_point(&t).unwrap().0, mixture_point(&m).unwrap());
        let back = classify_toric_point(&t).unwrap();
        prop_assert!(back.witness().is_some());
    }
}
