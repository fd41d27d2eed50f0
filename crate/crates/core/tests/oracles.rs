//! Checks against independent reference computations written out here from
//! first principles (direct loops over cubes and cells, closed forms).

use dyadic_lab::compactness::{bmo_norm, SymbolFunction};
use dyadic_lab::exponent::{rat, Exponent};
use dyadic_lab::extrapolation::{buckley_bound, buckley_constant, reverse_holder_check};
use dyadic_lab::maximal::MaximalOperator;
use dyadic_lab::opnorm::{operator_norm_lower_bound, TestSet};
use dyadic_lab::spaces::{convexity_check, product_norm};
use dyadic_lab::weights::{ainf_constant, ap_constant, limited_range_constant, power_weight};
use dyadic_lab::{Grid, GridFunction, Lattice, Sampler, SpaceSpec, Weight};

/// Cells `[lo, hi)` of the 1-d dyadic interval at `level`, `index`.
fn interval(l: u32, level: u32, index: usize) -> std::ops::Range<usize> {
    let len = 1usize << (l - level);
    index * len..(index + 1) * len
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn brute_ap_1d(w: &[f64], p: f64) -> f64 {
    let l = w.len().trailing_zeros();
    let pp = p / (p - 1.0);
    let mut best: f64 = 0.0;
    for level in 0..=l {
        for index in 0..1usize << level {
            let cells = &w[interval(l, level, index)];
            let a: Vec<f64> = cells.iter().map(|x| x.powf(p)).collect();
            let b: Vec<f64> = cells.iter().map(|x| x.powf(-pp)).collect();
            best = best.max(mean(&a).powf(1.0 / p) * mean(&b).powf(1.0 / pp));
        }
    }
    best
}

fn brute_ainf_1d(w: &[f64]) -> f64 {
    let l = w.len().trailing_zeros();
    let mut best: f64 = 0.0;
    for level in 0..=l {
        for index in 0..1usize << level {
            let q = interval(l, level, index);
            let mut integral = 0.0;
            for x in q.clone() {
                // Max over dyadic intervals containing x of the mean of w 1_Q.
                let mut m: f64 = 0.0;
                for k in 0..=l {
                    let j = x >> (l - k);
                    let cells = interval(l, k, j);
                    let s: f64 = cells.clone().filter(|c| q.contains(c)).map(|c| w[c]).sum();
                    m = m.max(s / cells.len() as f64);
                }
                integral += m;
            }
            let wq: f64 = w[q].iter().sum();
            best = best.max(integral / wq);
        }
    }
    best
}

#[test]
fn hand_enumerated_constants() {
    let g = Grid::new(1, 1).unwrap();
    let w = Weight::new(GridFunction::new(g, vec![2.0, 1.0]).unwrap()).unwrap();
    assert!((ap_constant(&w, 2.0, Lattice::Dyadic).unwrap().value - 1.25).abs() < 1e-12);
    assert!((ap_constant(&w.inverse(), 2.0, Lattice::Dyadic).unwrap().value - 1.25).abs() < 1e-12);
    assert!((ainf_constant(&w).unwrap().value - 7.0 / 6.0).abs() < 1e-12);
    let lr = limited_range_constant(&w, 2.0, 1.0, 4.0, Lattice::Dyadic).unwrap();
    assert!((lr.value - 8.5f64.powf(0.25) * 0.625f64.sqrt()).abs() < 1e-12);
}

#[test]
fn constants_match_brute_force() {
    let g = Grid::new(1, 6).unwrap();
    let mut s = Sampler::new(77);
    for _ in 0..10 {
        let w = s.lognormal(g, 1.0);
        for p in [1.5, 2.0, 4.0] {
            let got = ap_constant(&w, p, Lattice::Dyadic).unwrap().value;
            let want = brute_ap_1d(w.values(), p);
            assert!((got - want).abs() <= 1e-12 * want, "p = {p}: {got} vs {want}");
        }
        let got = ainf_constant(&w).unwrap().value;
        let want = brute_ainf_1d(w.values());
        assert!((got - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn power_weight_cell_averages() {
    let w = power_weight(Grid::new(1, 1).unwrap(), 1.0, [0.0, 0.0]).unwrap();
    assert_eq!(w.values(), &[0.25, 0.75]);
}

#[test]
fn power_weight_membership_trend() {
    let constant = |alpha: f64, l: u32| {
        let w = power_weight(Grid::new(1, l).unwrap(), alpha, [0.5, 0.0]).unwrap();
        ap_constant(&w, 2.0, Lattice::Dyadic).unwrap().value
    };
    for alpha in [-0.25, 0.25] {
        let (a, b) = (constant(alpha, 12), constant(alpha, 14));
        assert!((b - a).abs() < 1e-2 * a, "alpha = {alpha}: {a} -> {b}");
    }
    for alpha in [-0.75, 0.75] {
        let series: Vec<f64> = (6..=14).step_by(2).map(|l| constant(alpha, l)).collect();
        assert!(series.windows(2).all(|w| w[1] > 1.2 * w[0]), "alpha = {alpha}: {series:?}");
    }
}

#[test]
fn two_cell_luxembourg_root() {
    let g = Grid::new(1, 1).unwrap();
    let x = SpaceSpec::variable_lebesgue(&GridFunction::new(g, vec![2.0, 4.0]).unwrap(), None).unwrap();
    let one = GridFunction::constant(g, 1.0);
    assert!((x.norm(&one).unwrap() - 1.0).abs() < 1e-8);
    assert!((x.norm(&one.scale(2.0)).unwrap() - 2.0).abs() < 1e-9);
    // f = (1, 2): with v = 1/λ², v/2 + 8v² = 1, so v = (√129 - 1)/32.
    let f = GridFunction::new(g, vec![1.0, 2.0]).unwrap();
    let lambda = (32.0 / (129f64.sqrt() - 1.0)).sqrt();
    assert!((x.norm(&f).unwrap() - lambda).abs() < 1e-9 * lambda);
}

#[test]
fn concavified_lebesgue_agrees_with_direct_space() {
    let g = Grid::new(1, 6).unwrap();
    let mut s = Sampler::new(5);
    let w = s.lognormal(g, 0.6);
    let w2 = w.powf(2.0).unwrap();
    let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(4), Some(&w)).unwrap().concavify(&rat(2, 1)).unwrap();
    let y = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), Some(&w2)).unwrap();
    assert_eq!(x.constant_exponent(), Some(Exponent::int(2)));
    for _ in 0..20 {
        let f = s.signed(g);
        let direct: f64 = (f.values().iter().zip(w2.values()).map(|(a, b)| (a * b).powi(2)).sum::<f64>() * g.cell_volume()).sqrt();
        assert!((x.norm(&f).unwrap() - direct).abs() <= 1e-10 * direct);
        assert!((y.norm(&f).unwrap() - direct).abs() <= 1e-10 * direct);
    }
}

#[test]
fn factorization_through_rescaled_space() {
    let g = Grid::new(1, 8).unwrap();
    let mut s = Sampler::new(6);
    let w = s.lognormal(g, 0.8);
    let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), Some(&w)).unwrap();
    let (r, sx) = (Exponent::ratio(4, 3), Exponent::int(4));
    let xrs = x.rescale(&r, &sx).unwrap().spec;
    let l4 = SpaceSpec::weighted_lebesgue(g, Exponent::int(4), None).unwrap();
    let pointwise = xrs.concavify(&rat(1, 2)).unwrap().pointwise_product(&l4).unwrap();
    assert_eq!(pointwise, x);
    let l2 = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), None).unwrap();
    for _ in 0..100 {
        let h = s.signed(g);
        let want = x.norm(&h).unwrap();
        let prod = product_norm(&xrs, &l2, &rat(1, 2), &h).unwrap();
        assert!((prod.norm - want).abs() <= 1e-8 * want);
        assert!((prod.factored - want).abs() <= 1e-8 * want);
        assert!(prod.reconstruction_error < 1e-12);
    }
}

#[test]
fn duality_product_is_unweighted_l2() {
    let g = Grid::new(1, 7).unwrap();
    let mut s = Sampler::new(8);
    let w = s.lognormal(g, 1.0);
    for p in [Exponent::ratio(3, 2), Exponent::int(3)] {
        let x = SpaceSpec::weighted_lebesgue(g, p, Some(&w)).unwrap();
        let xa = x.associate().unwrap();
        for _ in 0..20 {
            let h = s.signed(g);
            let l2: f64 = (h.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume()).sqrt();
            let prod = product_norm(&x, &xa, &rat(1, 2), &h).unwrap();
            assert!((prod.norm - l2).abs() <= 1e-8 * l2);
            assert!((prod.factored - l2).abs() <= 1e-8 * l2);
        }
    }
}

#[test]
fn l4_is_not_2_concave() {
    let g = Grid::new(1, 5).unwrap();
    let l4 = SpaceSpec::weighted_lebesgue(g, Exponent::int(4), None).unwrap();
    let rep = convexity_check(&l4, &Exponent::one(), &Exponent::int(2), 10, 1).unwrap();
    assert!(rep.concavity_counterexample);
    // Disjoint halves by hand: (‖f‖⁴+‖g‖⁴)^{1/4} < (‖f‖²+‖g‖²)^{1/2}.
    let f = GridFunction::from_fn(g, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
    let h = GridFunction::from_fn(g, |x| if x[0] < 0.5 { 0.0 } else { 1.0 }).unwrap();
    let (nf, nh) = (l4.norm(&f).unwrap(), l4.norm(&h).unwrap());
    let combined = l4.norm(&f.zip_map(&h, |a, b| (a * a + b * b).sqrt()).unwrap()).unwrap();
    assert!(combined < (nf * nf + nh * nh).sqrt());
    let l1 = convexity_check(&SpaceSpec::weighted_lebesgue(g, Exponent::int(3), None).unwrap(), &Exponent::one(), &Exponent::infinity(), 10, 2).unwrap();
    assert!(!l1.convexity_counterexample);
}

#[test]
fn maximal_norm_stays_below_buckley() {
    let g = Grid::new(1, 8).unwrap();
    let mut s = Sampler::new(9);
    let op = MaximalOperator { lattice: Lattice::Dyadic };
    for p in [1.5f64, 2.0, 4.0] {
        let x = SpaceSpec::weighted_lebesgue(g, dyadic_lab::exponent::parse_rational(&p.to_string()).map(|q| Exponent::new(q).unwrap()).unwrap(), None).unwrap();
        let est = operator_norm_lower_bound(&op, &x, &TestSet::default()).unwrap();
        let upper = est.upper.clone().unwrap().value;
        assert_eq!(upper, buckley_bound(p, 1.0, buckley_constant(1)).unwrap());
        assert!(est.lower >= 1.0 && est.lower <= upper);
    }
    for _ in 0..10 {
        let w = s.lognormal(g, 0.7);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), Some(&w)).unwrap();
        let est = operator_norm_lower_bound(&op, &x, &TestSet { random: 8, ..TestSet::default() }).unwrap();
        assert!(est.lower <= est.upper.unwrap().value);
    }
}

#[test]
fn reverse_holder_fails_next_to_a_zero() {
    let w = power_weight(Grid::new(1, 10).unwrap(), 3.0, [0.0, 0.0]).unwrap();
    let rh = reverse_holder_check(&w, 4.0, Lattice::Dyadic).unwrap();
    assert!(!rh.pass);
    assert_eq!(rh.worst_cube.index[0], 0);
    // Continuum value on [0, t): (t¹²/13)^{1/4} / (t³/4).
    assert!(rh.worst_ratio <= 4.0 / 13f64.powf(0.25) + 1e-12);
}

#[test]
fn symbol_oscillation_scans() {
    let g = Grid::new(1, 8).unwrap();
    let widths = [0.25, 1.0, 4.0, 16.0];
    let osc: Vec<f64> = widths
        .iter()
        .map(|&r| bmo_norm(&SymbolFunction::bump(g, [0.5, 0.0], r).unwrap().b, Lattice::Dyadic).unwrap().value)
        .collect();
    assert!(osc.windows(2).all(|w| w[1] < w[0]), "{osc:?}");
    assert!(osc[3] < 1e-3);

    for l in 4..=12 {
        let jump = SymbolFunction::jump(Grid::new(1, l).unwrap()).unwrap();
        assert!(bmo_norm(&jump.b, Lattice::Dyadic).unwrap().value >= 0.25);
    }

    let logs: Vec<(f64, f64)> = [6, 8, 10, 12]
        .iter()
        .map(|&l| {
            let b = SymbolFunction::log_singular(Grid::new(1, l).unwrap()).unwrap().b;
            (bmo_norm(&b, Lattice::Dyadic).unwrap().value, b.max_abs())
        })
        .collect();
    for w in logs.windows(2) {
        assert!((w[1].0 - w[0].0).abs() < 0.05 * w[0].0, "{logs:?}");
        assert!(w[1].1 > w[0].1 + 1.0);
    }
}

#[test]
fn bmo_shift_distortion_is_bounded() {
    let g = Grid::new(1, 8).unwrap();
    let mut s = Sampler::new(12);
    for _ in 0..10 {
        let b = s.signed(g);
        let v = b.values();
        let shifted: Vec<f64> = (0..v.len()).map(|i| if i == 0 { v[0] } else { v[i - 1] }).collect();
        let a = bmo_norm(&b, Lattice::Shifted).unwrap().value;
        let c = bmo_norm(&GridFunction::new(g, shifted).unwrap(), Lattice::Shifted).unwrap().value;
        assert!(c < 2.0 * a && a < 2.0 * c);
    }
}
