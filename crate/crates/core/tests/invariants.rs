use dyadic_lab::compactness::{bmo_norm, commutator_matrix, discretize, weighted_singular_values, KernelSpec};
use dyadic_lab::exponent::{rat, Exponent, Rational};
use dyadic_lab::extrapolation::{
    check_rdf, choose_rs_for_l2, limited_range_plan, lr_factorization, lr_rescale_t, lr_theta_p, rdf_weight, rescale_recip,
    self_improvement_r0,
};
use dyadic_lab::grid::{all_cubes, average, enumerate_cubes};
use dyadic_lab::sparse::sparse_form;
use dyadic_lab::spaces::pairing;
use dyadic_lab::weights::{ap_constant, limited_range_constant};
use dyadic_lab::{
    bilinear_maximal, cz_sparse_family, maximal, sparse_operator, verify_sparse, Cube, Grid, GridFunction, Lattice, Sampler,
    SpaceSpec, Weight,
};
use nalgebra::DMatrix;
use num_traits::{One, Signed};
use proptest::prelude::*;

fn grid(d: u32, l: u32) -> Grid {
    Grid::new(d, l).unwrap()
}

fn lattice() -> impl Strategy<Value = Lattice> {
    prop_oneof![Just(Lattice::Dyadic), Just(Lattice::Shifted)]
}

/// Exponent `n/d` drawn from small admissible rationals in `(1, 8]`.
fn exponent() -> impl Strategy<Value = Exponent> {
    (1i64..=8, 1i64..=6).prop_filter_map("p > 1", |(n, d)| {
        let p = rat(n * d + 1, d);
        (p > Rational::one()).then(|| Exponent::new(p).unwrap())
    })
}

/// Strictly increasing reciprocals `1 >= a > b > c > e >= 0` built from a
/// common denominator, returned as `(r, r~, s~, s)`.
fn ordered_tuple() -> impl Strategy<Value = (Exponent, Exponent, Exponent, Exponent)> {
    (2i64..40, proptest::collection::btree_set(0i64..40, 4)).prop_filter_map("ordered", |(den, set)| {
        let v: Vec<i64> = set.into_iter().filter(|&x| x <= den).collect();
        if v.len() < 4 {
            return None;
        }
        let e = |k: i64| Exponent::from_recip(rat(k, den)).unwrap();
        Some((e(v[3]), e(v[2]), e(v[1]), e(v[0])))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn maximal_is_sublinear_and_dominating(seed in any::<u64>(), d in 1u32..=2, lambda in -5.0f64..5.0, lat in lattice()) {
        let g = grid(d, if d == 1 { 7 } else { 4 });
        let mut s = Sampler::new(seed);
        let f = s.signed(g);
        let h = s.signed(g);
        let mf = maximal(&f, lat);
        prop_assert!(f.abs().le_within(&mf, 1e-12));
        let scaled = maximal(&f.scale(lambda), lat);
        for c in 0..g.cell_count() {
            prop_assert!((scaled.get(c) - lambda.abs() * mf.get(c)).abs() <= 1e-12 * (1.0 + mf.get(c)));
        }
        let sum = maximal(&f.zip_map(&h, |a, b| a + b).unwrap(), lat);
        let bound = mf.zip_map(&maximal(&h, lat), |a, b| a + b).unwrap();
        prop_assert!(sum.le_within(&bound, 1e-12));
        prop_assert!(mf.le_within(&maximal(&mf, lat), 1e-12));
    }

    #[test]
    fn averages_are_monotone_homogeneous_and_nested(seed in any::<u64>(), r1 in 0.5f64..4.0, dr in 0.0f64..4.0, lambda in -3.0f64..3.0) {
        let g = grid(2, 3);
        let f = Sampler::new(seed).signed(g);
        for q in enumerate_cubes(&g) {
            let cube = Cube::from(q);
            let a1 = average(&f, &cube, r1).unwrap();
            let a2 = average(&f, &cube, r1 + dr).unwrap();
            prop_assert!(a1 <= a2 * (1.0 + 1e-12));
            let al = average(&f.scale(lambda), &cube, r1).unwrap();
            prop_assert!((al - lambda.abs() * a1).abs() <= 1e-12 * (1.0 + a1));
            let children = q.children(&g);
            if !children.is_empty() {
                let signed_mean = |c: &Cube| c.sum(&g, f.values()) / c.cell_count(&g) as f64;
                let from_children: f64 = children.iter().map(|c| signed_mean(&Cube::from(*c))).sum::<f64>() / children.len() as f64;
                prop_assert!((from_children - signed_mean(&cube)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_constant_axioms(seed in any::<u64>(), p in exponent(), lambda in 0.01f64..100.0, lat in lattice()) {
        let g = grid(1, 6);
        let w = Sampler::new(seed).lognormal(g, 1.0);
        let pf = p.to_f64();
        let pp = p.conjugate().unwrap().to_f64();
        let ap = ap_constant(&w, pf, lat).unwrap().value;
        prop_assert!(ap >= 1.0);
        let dual = ap_constant(&w.inverse(), pp, lat).unwrap().value;
        prop_assert!((ap - dual).abs() <= 1e-10 * ap);
        let scaled = ap_constant(&w.scale(lambda).unwrap(), pf, lat).unwrap().value;
        prop_assert!((ap - scaled).abs() <= 1e-10 * ap);
        let reduced = limited_range_constant(&w, pf, 1.0, f64::INFINITY, lat).unwrap().value;
        prop_assert!((ap - reduced).abs() <= 1e-12 * ap);
        let wide = ap_constant(&w, pf, Lattice::Shifted).unwrap().value;
        prop_assert!(wide >= ap_constant(&w, pf, Lattice::Dyadic).unwrap().value);
    }

    #[test]
    fn sparse_domination_and_forms(seed in any::<u64>(), d in 1u32..=2, density in 0.05f64..1.0) {
        let g = grid(d, if d == 1 { 8 } else { 4 });
        let mut s = Sampler::new(seed);
        let f = s.sparse_support(g, density);
        prop_assume!(!f.is_zero());
        let h = s.nonnegative(g);
        let family = cz_sparse_family(&f, 2.0).unwrap();
        prop_assert!(verify_sparse(&family).unwrap().sparse);
        let t = sparse_operator(&family, &f).unwrap();
        prop_assert!(maximal(&f, Lattice::Dyadic).le_within(&t.scale(2.0), 1e-12));
        let form = sparse_form(&family, &f, &h).unwrap();
        let m11 = bilinear_maximal(&f, &h, Lattice::Dyadic, None).unwrap();
        prop_assert!(form <= 2.0 * m11.l1_norm() * (1.0 + 1e-12));
        let tg = pairing(&t, &h).unwrap();
        prop_assert!((tg - form).abs() <= 1e-12 * form.max(1.0));
        let lam = s.uniform(0.0, 4.0);
        let tl = sparse_operator(&family, &f.scale(lam)).unwrap();
        for c in 0..g.cell_count() {
            prop_assert!((tl.get(c) - lam * t.get(c)).abs() <= 1e-12 * (1.0 + t.get(c)));
        }
    }

    #[test]
    fn holder_lattice_and_fatou(seed in any::<u64>(), p in exponent(), variable in any::<bool>()) {
        let g = grid(1, 6);
        let mut s = Sampler::new(seed);
        let w = s.lognormal(g, 0.5);
        let x = if variable {
            let field = GridFunction::from_fn(g, |c| 1.5 + 2.0 * c[0]).unwrap();
            SpaceSpec::variable_lebesgue(&field, Some(&w)).unwrap()
        } else {
            SpaceSpec::weighted_lebesgue(g, p, Some(&w)).unwrap()
        };
        let xa = x.associate().unwrap();
        let f = s.signed(g);
        let h = s.signed(g);
        let lhs = pairing(&f, &h).unwrap();
        prop_assert!(lhs <= x.holder_constant() * x.norm(&f).unwrap() * xa.norm(&h).unwrap() * (1.0 + 1e-10));
        let smaller = f.zip_map(&h, |a, b| a.abs().min(b.abs())).unwrap();
        prop_assert!(x.norm(&smaller).unwrap() <= x.norm(&f).unwrap() * (1.0 + 1e-12));
        let mut prev = 0.0;
        for k in 1..=8 {
            let t = k as f64 / 8.0;
            let fk = f.map(|v| v.abs() * t);
            let nk = x.norm(&fk).unwrap();
            prop_assert!(nk >= prev);
            prev = nk;
        }
        prop_assert!((prev - x.norm(&f).unwrap()).abs() <= 1e-10 * prev);
        if variable {
            let nf = x.norm(&f).unwrap();
            prop_assert!((x.modular(&f.scale(1.0 / nf)).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn concavify_norm_identity(seed in any::<u64>(), p in exponent(), num in 1i64..8, den in 1i64..4) {
        let g = grid(1, 5);
        let mut s = Sampler::new(seed);
        let w = s.lognormal(g, 0.5);
        let r = rat(num, den);
        let rf = num as f64 / den as f64;
        let x = SpaceSpec::weighted_lebesgue(g, p, Some(&w)).unwrap();
        let xr = x.concavify(&r).unwrap();
        let f = s.signed(g);
        let lhs = xr.norm(&f).unwrap();
        let rhs = x.norm(&f.map(|v| v.abs().powf(1.0 / rf))).unwrap().powf(rf);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        prop_assert_eq!(x.concavify(&Rational::one()).unwrap(), x.clone());
    }

    #[test]
    fn rescale_chain_matches_closed_form(seed in any::<u64>(), (r, _rt, _st, s) in ordered_tuple()) {
        prop_assume!(r >= Exponent::one());
        let g = grid(1, 5);
        let mut smp = Sampler::new(seed);
        let w = smp.lognormal(g, 0.5);
        // Midpoint exponent so that r <= p <= s.
        let p = Exponent::from_recip((r.recip() + s.recip()) * rat(1, 2)).unwrap();
        let x = SpaceSpec::weighted_lebesgue(g, p.clone(), Some(&w)).unwrap();
        let res = x.rescale(&r, &s).unwrap();
        prop_assert_eq!(res.replay(&x).unwrap(), res.spec.clone());
        let expect = rescale_recip(p.recip(), &r, &s).unwrap();
        prop_assert_eq!(res.spec.constant_exponent().unwrap().recip().clone(), expect);
        prop_assert_eq!(res.spec.weight_power().unwrap(), (r.recip() - s.recip()).recip());
    }

    #[test]
    fn exponent_calculus_properties((r, rt, st, s) in ordered_tuple()) {
        prop_assume!(r >= Exponent::one());
        let t = lr_rescale_t(&r, &rt, &st, &s).unwrap();
        prop_assert!(t >= st);
        let (theta, p) = lr_theta_p(&r, &rt, &st, &s).unwrap();
        prop_assert!(theta.is_positive() && theta < Rational::one());
        prop_assert!(p > Exponent::one());
        for q in [rt.clone(), st.clone(), Exponent::from_recip((rt.recip() + st.recip()) * rat(1, 2)).unwrap()] {
            let fac = lr_factorization(&q, &r, &rt, &st, &s).unwrap();
            prop_assert_eq!(&fac.recip, q.recip());
            prop_assert!(fac.weight_power.is_one());
        }
    }

    #[test]
    fn self_improvement_bounds(b in 1i64..1000, c in 1i64..32, rs in 2i64..20) {
        let r_star = Exponent::ratio(rs, rs - 1);
        let r0 = self_improvement_r0(&rat(b, 1), &r_star, &rat(c, 1)).unwrap();
        prop_assert!(r0 > Exponent::one() && r0 <= r_star);
        let rp = r0.conjugate().unwrap();
        prop_assert!(rp.value().unwrap() >= rat(2 * b * c, 1));
    }

    #[test]
    fn choose_rs_gives_l2(r0n in 2i64..30, s0 in 2i64..30) {
        let r0 = Exponent::ratio(r0n + 1, r0n);
        let s0e = Exponent::int(s0);
        let c = choose_rs_for_l2(&r0, &s0e).unwrap();
        prop_assert_eq!(c.p, Exponent::int(2));
        prop_assert!(c.r <= r0 && c.s >= s0e);
        prop_assert!(c.theta.is_positive() && c.theta < Rational::one());
    }

    #[test]
    fn rdf_properties(seed in any::<u64>(), r in 1.0f64..4.0, b in 1.0f64..20.0) {
        let g = grid(1, 7);
        let f = Sampler::new(seed).signed(g);
        let rdf = rdf_weight(&f, r, b, 30, Lattice::Dyadic, None).unwrap();
        let check = check_rdf(&rdf, &f, Lattice::Dyadic, None).unwrap();
        prop_assert!(check.majorant_slack >= 0.0);
        prop_assert!(check.a1_holds);
    }

    #[test]
    fn commutator_structure(seed in any::<u64>()) {
        let g = grid(1, 6);
        let mut s = Sampler::new(seed);
        let b = s.signed(g);
        let b2 = s.signed(g);
        let a = discretize(&KernelSpec::hilbert(), g).unwrap();
        let c = commutator_matrix(&b, &a).unwrap();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(b.values()));
        let direct = &d * &a.matrix - &a.matrix * &d;
        prop_assert!((&direct - &c.matrix).abs().max() <= 1e-12 * a.matrix.abs().max());
        prop_assert_eq!(c.matrix.transpose(), c.matrix.clone());
        let s1c = weighted_singular_values(&c, None).unwrap()[0];
        let s1a = weighted_singular_values(&a, None).unwrap()[0];
        prop_assert!(s1c <= 2.0 * b.max_abs() * s1a * (1.0 + 1e-12));
        let sum = commutator_matrix(&b.zip_map(&b2, |x, y| x + y).unwrap(), &a).unwrap();
        let parts = &c.matrix + &commutator_matrix(&b2, &a).unwrap().matrix;
        prop_assert!((&sum.matrix - &parts).abs().max() <= 1e-12 * parts.abs().max());
    }

    #[test]
    fn bmo_invariances(seed in any::<u64>(), shift in -10.0f64..10.0, lambda in -4.0f64..4.0, lat in lattice()) {
        let g = grid(1, 7);
        let b = Sampler::new(seed).signed(g);
        let base = bmo_norm(&b, lat).unwrap().value;
        let shifted = bmo_norm(&b.map(|v| v + shift), lat).unwrap().value;
        prop_assert!((base - shifted).abs() <= 1e-12 * (1.0 + base + shift.abs()));
        let scaled = bmo_norm(&b.scale(lambda), lat).unwrap().value;
        prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-12 * (1.0 + base));
    }
}

#[test]
fn degenerate_plan_is_full_range() {
    let one = Exponent::one();
    let inf = Exponent::infinity();
    for p in [Exponent::ratio(3, 2), Exponent::int(2), Exponent::int(5)] {
        let plan = limited_range_plan([&one, &one], [&inf, &inf], &p, None).unwrap();
        assert_eq!(plan.legs[0].q, p.conjugate().unwrap());
        assert_eq!(plan.legs[0].midpoint, Exponent::int(2));
        assert_eq!(plan.legs[0].p_rs, p);
        assert_eq!(plan.alpha, rat(0, 1));
    }
}

#[test]
fn greedy_on_all_cubes_is_not_sparse() {
    let g = grid(1, 2);
    let family = dyadic_lab::SparseFamily::greedy(g, all_cubes(&g, Lattice::Dyadic)).unwrap();
    assert!(!verify_sparse(&family).unwrap().sparse);
}

#[test]
fn weight_of_ones_has_unit_constant() {
    let g = grid(2, 4);
    let w = Weight::constant(g, 1.0).unwrap();
    for lat in [Lattice::Dyadic, Lattice::Shifted] {
        assert_eq!(ap_constant(&w, 2.0, lat).unwrap().value, 1.0);
    }
}
