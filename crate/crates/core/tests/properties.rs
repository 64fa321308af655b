use grassmann_core::derivation::{d0, dmm, dpp};
use grassmann_core::exterior::{b_omega_contract, b_omega_def, combinations, Form, MetricSpace, VolumeRoot};
use grassmann_core::harmonic::HarmonicModel;
use grassmann_core::parser;
use grassmann_core::poly::{mono_charge, Poly, UP1};
use grassmann_core::raising::Raiser;
use grassmann_core::scalar::Gq;
use grassmann_core::verify::random_ast;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn gq() -> impl Strategy<Value = Gq> {
    (-6i64..=6, 1i64..=4, -3i64..=3).prop_map(|(n, d, im)| {
        let re = Gq::ratio(n, d);
        &re + &(&Gq::int(im) * &Gq::i())
    })
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0usize..8, 0..4), -5i64..=5), 0..5).prop_map(|terms| {
        terms.into_iter().fold(Poly::zero(), |acc, (vars, c)| {
            let m = vars.iter().fold(Poly::int(c), |p, &v| p.mul(&Poly::var(v)));
            acc.add(&m)
        })
    })
}

fn form(n: usize, deg: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    let count = combinations(n, deg).len();
    prop::collection::vec((0..count, -3i64..=3), 0..6)
}

fn build(space: &std::sync::Arc<MetricSpace<Gq>>, deg: usize, terms: &[(usize, i64)]) -> Form<Gq> {
    let keys = combinations(space.dim(), deg);
    let mut f = Form::zero(space, deg);
    for &(k, c) in terms {
        f.add_term(&keys[k], Gq::int(c)).unwrap();
    }
    f
}

fn model() -> &'static HarmonicModel {
    static M: OnceLock<HarmonicModel> = OnceLock::new();
    M.get_or_init(|| HarmonicModel::build(1, 2, 1).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in gq(), b in gq(), c in gq()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        if let Some(inv) = a.inverse() {
            prop_assert_eq!(&a * &inv, Gq::one());
        } else {
            prop_assert!(a.is_zero());
        }
    }

    #[test]
    fn poly_ring(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn leibniz(a in poly(), b in poly(), v in 4usize..8) {
        let lhs = a.mul(&b).deriv(v);
        let rhs = a.deriv(v).mul(&b).add(&a.mul(&b.deriv(v)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn vertical_jacobi(a in poly()) {
        let (h, e, f) = (d0(), dpp(), dmm());
        // [[h,e],f] + [[e,f],h] + [[f,h],e] = 0
        let j = h.commutator(&e).commutator(&f)
            .add(&e.commutator(&f).commutator(&h))
            .add(&f.commutator(&h).commutator(&e));
        prop_assert!(j.apply(&a).is_zero());
        prop_assert_eq!(e.commutator(&f).apply(&a), h.apply(&a));
    }

    #[test]
    fn raising_inverts_dpp(a in poly()) {
        let g = a.mul(&Poly::var(UP1)).mul(&Poly::var(UP1 + 1));
        let charge2 = Poly::from_terms(
            g.terms().iter().filter(|(mono, _)| mono_charge(mono) == 2).map(|(k, v)| (k.clone(), v.clone())),
        );
        let f = Raiser::new().solve(&charge2, 32).unwrap();
        prop_assert_eq!(dpp().apply(&f), charge2);
        prop_assert!(d0().apply(&f).is_zero());
    }

    #[test]
    fn x_plus_annihilates_analytic(terms in prop::collection::vec((prop::collection::vec(0usize..4, 0..3), -3i64..=3), 1..4), k in 1u32..3) {
        let m = model();
        let h = terms.into_iter().fold(Poly::zero(), |acc, (vars, c)| {
            acc.add(&vars.iter().fold(Poly::int(c), |p, &v| p.mul(&Poly::var(v))))
        });
        let f = h.mul(&m.x_pm(0, false).pow(k)).mul(&m.x_pm(1, false));
        for x in &m.x_fields[0] {
            prop_assert!(x.apply(&f).is_zero());
        }
        prop_assert!(!m.x_fields[1][0].apply(&m.x_pm(0, false)).is_zero());
    }

    #[test]
    fn graded_commutativity(p in form(6, 2), q in form(6, 3)) {
        let s = MetricSpace::euclidean(6);
        let (a, b) = (build(&s, 2, &p), build(&s, 3, &q));
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        let c = build(&s, 1, &[(0, 1)]);
        prop_assert_eq!(b.wedge(&c).unwrap(), c.wedge(&b).unwrap().scale(&Gq::int(-1)));
    }

    #[test]
    fn hodge_twice(p in form(5, 2), q in form(6, 3)) {
        let s5 = MetricSpace::euclidean(5);
        let a = build(&s5, 2, &p);
        prop_assert_eq!(a.hodge().hodge(), a);
        let s6 = MetricSpace::euclidean(6);
        let b = build(&s6, 3, &q);
        prop_assert_eq!(b.hodge().hodge(), b.scale(&Gq::int(-1)));
    }

    #[test]
    fn contraction_identity_lorentzian(o in form(5, 4), w in form(5, 2), g in prop::collection::vec(1i64..=4, 5)) {
        let mut gram = vec![vec![Gq::zero(); 5]; 5];
        for (i, v) in g.iter().enumerate() {
            gram[i][i] = Gq::int(v * v);
        }
        gram[4][4] = Gq::int(-g[4] * g[4]);
        let s = MetricSpace::new(gram, 1, VolumeRoot::Principal).unwrap();
        let (om, wm) = (build(&s, 4, &o), build(&s, 2, &w));
        prop_assert_eq!(b_omega_def(&om, &wm).unwrap(), b_omega_contract(&om, &wm).unwrap());
    }

    #[test]
    fn parser_round_trip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_ast(&mut rng, depth);
        let text = parser::print(&a);
        let back = parser::parse(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(parser::print(&back), text);
    }

    #[test]
    fn parser_never_panics(s in "[-+*^()\\[\\],0-9a-z/ \n]{0,24}") {
        if let Err(e) = parser::parse(&s) {
            let at = format!("at {}:{}", e.pos().line, e.pos().col);
            prop_assert!(e.to_string().contains(&at), "{}", e);
        }
    }
}
