use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use twistlab::expr::{parse, Expr};
use twistlab::mapclass::{Atom, Factor};
use twistlab::word::{verify_inverse, Letter};
use twistlab::{
    abelianize, double_cover_h1, double_cover_lift, gamma_prime_member, mc_equal, twist_about, AutWitness, CurveSpec,
    Elementary, ElementaryTable, FreeMap, Interval, MappingClass, SurfaceModel, Word,
};

const RANK: usize = 3;

fn letters(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((1..=RANK as Letter, any::<bool>()).prop_map(|(i, s)| if s { i } else { -i }), 0..=max)
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    letters(max).prop_map(|ls| Word::reduce(RANK, ls).unwrap())
}

/// Nielsen move `x_i ↦ x_i x_j^{±1}` (or on the left), with its inverse.
fn nielsen() -> impl Strategy<Value = AutWitness> {
    (1..=RANK, 1..=RANK, any::<bool>(), any::<bool>()).prop_filter_map("i != j", |(i, j, right, inv)| {
        if i == j {
            return None;
        }
        let (xi, xj) = (i as Letter, if inv { -(j as Letter) } else { j as Letter });
        let mut f: Vec<Vec<Letter>> = (1..=RANK as Letter).map(|l| vec![l]).collect();
        let mut g = f.clone();
        f[i - 1] = if right { vec![xi, xj] } else { vec![xj, xi] };
        g[i - 1] = if right { vec![xi, -xj] } else { vec![-xj, xi] };
        Some(AutWitness::new(FreeMap::from_raw(RANK, f).unwrap(), FreeMap::from_raw(RANK, g).unwrap()).unwrap())
    })
}

fn automorphism() -> impl Strategy<Value = AutWitness> {
    prop::collection::vec(nielsen(), 0..6).prop_map(|ws| {
        ws.iter().fold(AutWitness::identity(RANK), |acc, w| acc.compose(w).unwrap())
    })
}

fn brute_force(ls: &[Letter], out: &mut BTreeSet<Vec<Letter>>, seen: &mut BTreeSet<Vec<Letter>>) {
    if !seen.insert(ls.to_vec()) {
        return;
    }
    let mut any = false;
    for i in 0..ls.len().saturating_sub(1) {
        if ls[i] == -ls[i + 1] {
            any = true;
            let next: Vec<Letter> = ls[..i].iter().chain(&ls[i + 2..]).copied().collect();
            brute_force(&next, out, seen);
        }
    }
    if !any {
        out.insert(ls.to_vec());
    }
}

fn tables() -> Vec<Arc<ElementaryTable>> {
    (1..=6).map(|k| ElementaryTable::for_crosscaps(k).unwrap()).collect()
}

fn class(k: usize, max: usize) -> impl Strategy<Value = MappingClass> {
    let t = ElementaryTable::for_crosscaps(k).unwrap();
    let names: Vec<Elementary> = t.entries().map(|(e, _)| *e).collect();
    prop::collection::vec((0..names.len(), any::<bool>()), 0..=max).prop_map(move |fs| {
        let factors = fs.into_iter().map(|(n, inv)| Factor::new(Atom::Elementary(names[n]), inv)).collect();
        MappingClass::from_factors(t.clone(), factors)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_confluent(ls in letters(12)) {
        let mut out = BTreeSet::new();
        brute_force(&ls, &mut out, &mut BTreeSet::new());
        prop_assert_eq!(out.len(), 1);
        let w = Word::reduce(RANK, ls).unwrap();
        prop_assert_eq!(out.into_iter().next().unwrap(), w.letters().to_vec());
        prop_assert_eq!(Word::reduce(RANK, w.letters().to_vec()).unwrap(), w);
    }

    #[test]
    fn multiply_laws(a in word(10), b in word(10), c in word(10)) {
        prop_assert_eq!(a.multiply(&b).unwrap().multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        prop_assert_eq!(a.multiply(&Word::identity(RANK)).unwrap(), a.clone());
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_empty());
        prop_assert_eq!(a.inverse().inverse(), a.clone());
        prop_assert_eq!(a.conjugate(&Word::identity(RANK)).unwrap(), a.clone());
        let oracle = b.multiply(&a).unwrap().multiply(&b.inverse()).unwrap();
        prop_assert_eq!(a.conjugate(&b).unwrap(), oracle);
    }

    #[test]
    fn apply_is_a_homomorphism(f in automorphism(), u in word(8), v in word(8)) {
        let f = f.forward();
        prop_assert_eq!(f.apply(&u.multiply(&v).unwrap()).unwrap(), f.apply(&u).unwrap().multiply(&f.apply(&v).unwrap()).unwrap());
        prop_assert_eq!(f.apply(&u.inverse()).unwrap(), f.apply(&u).unwrap().inverse());
        prop_assert_eq!(FreeMap::identity(RANK).apply(&u).unwrap(), u);
    }

    #[test]
    fn compose_is_associative(f in automorphism(), g in automorphism(), h in automorphism()) {
        let (f, g, h) = (f.forward(), g.forward(), h.forward());
        prop_assert_eq!(f.compose(g).unwrap().compose(h).unwrap(), f.compose(&g.compose(h).unwrap()).unwrap());
        prop_assert_eq!(FreeMap::identity(RANK).compose(f).unwrap(), f.clone());
        prop_assert_eq!(f.compose(&FreeMap::identity(RANK)).unwrap(), f.clone());
    }

    #[test]
    fn witnesses_stay_inverse(f in automorphism(), g in automorphism()) {
        let h = f.compose(&g.inverse()).unwrap().conjugate(&g).unwrap();
        prop_assert!(h.is_consistent());
        prop_assert!(verify_inverse(h.forward(), h.backward()));
        prop_assert_eq!(abelianize(h.forward()).determinant().abs(), 1);
    }

    #[test]
    fn evaluate_is_a_homomorphism_k5(a in class(5, 5), b in class(5, 5)) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.evaluate().unwrap(), a.evaluate().unwrap().compose(&b.evaluate().unwrap()).unwrap());
        let h = |m: &MappingClass| double_cover_h1(m).unwrap();
        prop_assert_eq!(h(&ab), &h(&a) * &h(&b));
        prop_assert_eq!(h(&ab).determinant().abs(), 1);
        let fa = a.evaluate().unwrap();
        let fb = b.evaluate().unwrap();
        prop_assert_eq!(double_cover_lift(&fa.compose(&fb).unwrap()).unwrap(),
            double_cover_lift(&fa).unwrap().compose(&double_cover_lift(&fb).unwrap()).unwrap());
    }

    #[test]
    fn classes_fix_boundary_and_character(a in class(6, 6)) {
        let m = SurfaceModel::new(6).unwrap();
        let f = a.evaluate().unwrap();
        prop_assert_eq!(f.apply(&m.boundary()).unwrap(), m.boundary());
        prop_assert!(twistlab::preserves_character(&f, &m.character()));
    }

    #[test]
    fn pushed_twists_are_conjugates(by in class(4, 4), n in 0usize..4) {
        let t = by.table().clone();
        let base = t.model().two_sided_intervals()[n];
        let c = CurveSpec::Basic(base).pushed(by.clone());
        let tw = twist_about(&t, &c).unwrap();
        let hat = by.witness().unwrap();
        let expected = hat.forward().compose(t.twist(base).unwrap().forward()).unwrap().compose(hat.backward()).unwrap();
        prop_assert_eq!(tw.evaluate().unwrap(), expected);
        let w = c.curve_word(&t.model()).unwrap();
        prop_assert_eq!(w, hat.forward().apply(&base.word(4)).unwrap());
        prop_assert!(c.is_two_sided(&t.model()).unwrap());
    }
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Identity),
        Just(Expr::Transposition),
        Just(Expr::BoundaryTwist),
        prop::sample::select(vec![(1, 2), (2, 3), (1, 4), (3, 4), (2, 5), (4, 5)]).prop_map(|(i, j)| Expr::Twist(i, j)),
        prop::sample::select(vec!["a", "v", "u1"]).prop_map(|s| Expr::Var(s.to_string())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), -3i64..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            inner.prop_map(|by| Expr::Conj { i: 1, j: 4, by: Box::new(by) }),
        ]
    })
}

proptest! {
    #[test]
    fn parse_print_round_trip(e in expr_strategy()) {
        let m = SurfaceModel::new(5).unwrap();
        prop_assert_eq!(parse(&e.to_string(), &m).unwrap(), e);
    }
}

#[test]
fn gamma_depends_only_on_the_class() {
    let t = ElementaryTable::for_crosscaps(4).unwrap();
    let env = Default::default();
    let lhs = twistlab::expr::mapping_class("T(1,2)*T(2,3)*T(1,2)", &t, &env).unwrap();
    let rhs = twistlab::expr::mapping_class("T(2,3)*T(1,2)*T(2,3)", &t, &env).unwrap();
    assert!(mc_equal(&lhs, &rhs).unwrap());
    for m in 2..=7 {
        assert_eq!(gamma_prime_member(&lhs, m).unwrap(), gamma_prime_member(&rhs, m).unwrap());
        assert_eq!(gamma_prime_member(&lhs.power(m), m).unwrap(), gamma_prime_member(&rhs.power(m), m).unwrap());
    }
    assert!(gamma_prime_member(&MappingClass::identity(t.clone()), 2).unwrap());
    assert!(gamma_prime_member(&lhs, 1).is_err());
}

#[test]
fn faithfulness_cross_check() {
    // distinct generators act by distinct automorphisms; on the Möbius band
    // the boundary twist is trivial, so k=1 is skipped
    for t in tables().into_iter().skip(1) {
        let maps: Vec<FreeMap> = t.entries().map(|(_, w)| w.forward().clone()).collect();
        for (n, f) in maps.iter().enumerate() {
            assert!(!f.is_identity(), "k={}", t.model().crosscaps());
            for g in &maps[n + 1..] {
                assert_ne!(f, g);
            }
        }
    }
}

#[test]
fn rank_lower_bound_examples() {
    let t = ElementaryTable::for_crosscaps(5).unwrap();
    let a = MappingClass::twist(t.clone(), 1, 2).unwrap();
    assert_eq!(twistlab::transvection_rank_lower_bound(&[a.clone(), a.power(2)]).unwrap(), 1);
    assert_eq!(twistlab::transvection_rank_lower_bound(&[]).unwrap(), 0);
    let b = MappingClass::twist(t.clone(), 2, 3).unwrap();
    assert!(twistlab::transvection_rank_lower_bound(&[a.clone(), b]).is_err());
    let fam: Vec<_> = [(1, 2), (3, 4), (1, 4)].iter().map(|&(i, j)| MappingClass::twist(t.clone(), i, j).unwrap()).collect();
    assert_eq!(twistlab::transvection_rank_lower_bound(&fam).unwrap(), 3);
}

#[test]
fn double_cover_lift_of_a_twist_is_functorial_on_a_product() {
    let t = ElementaryTable::for_crosscaps(3).unwrap();
    let a = t.twist(Interval { i: 1, j: 2 }).unwrap().forward().clone();
    let b = t.twist(Interval { i: 2, j: 3 }).unwrap().forward().clone();
    let la = double_cover_lift(&a).unwrap();
    assert_eq!(la.rank(), 5);
    assert_eq!(double_cover_lift(&a.compose(&b).unwrap()).unwrap(), la.compose(&double_cover_lift(&b).unwrap()).unwrap());
}
