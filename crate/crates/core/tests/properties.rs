mod common;

use dods_core::catalog::list_algebras;
use dods_core::symmetry::{flow, generic_jets, invariant_count, prolong, RANK_SAMPLES};
use dods_core::{Expr, JetPoint, Mode, VectorField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn expression(seed: u64) -> (String, Expr) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = common::random_source(&mut rng, 4);
    let e = Expr::parse(&src, &common::VARS).unwrap();
    (src, e)
}

fn jet() -> impl Strategy<Value = JetPoint> {
    (0.5..3.0f64, -2.0..2.0f64, 0.1..0.9f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(x, y, frac, ym, p)| JetPoint::new(x, y, x * frac, ym, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_numbers_match_differences(seed in any::<u64>(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let (src, e) = expression(seed);
        let pt = [x, y];
        for k in 0..2 {
            let (v, ad) = e.diff_eval_index(&pt, k, Mode::Unchecked).unwrap();
            prop_assert_eq!(v, e.eval(&pt));
            let fd = common::central_difference(|t| { let mut q = pt; q[k] = t; e.eval(&q) }, pt[k]);
            prop_assert!((ad - fd).abs() <= 1e-6 * ad.abs().max(1.0), "{} d{}: {} vs {}", src, k, ad, fd);
        }
    }

    #[test]
    fn second_derivative_matches_differenced_first(seed in any::<u64>(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let (src, e) = expression(seed);
        let pt = [x, y];
        let (v, d1, d2) = e.second_derivative(&pt, 0, Mode::Unchecked).unwrap();
        let (v0, g) = e.diff_eval_index(&pt, 0, Mode::Unchecked).unwrap();
        prop_assert!((v - v0).abs() <= 1e-12 * v0.abs().max(1.0));
        prop_assert!((d1 - g).abs() <= 1e-10 * g.abs().max(1.0));
        let fd = common::central_difference(|t| e.diff_eval_index(&[t, y], 0, Mode::Unchecked).unwrap().1, x);
        prop_assert!((d2 - fd).abs() <= 1e-6 * d2.abs().max(1.0), "{}: {} vs {}", src, d2, fd);
    }

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let (_, e) = expression(seed);
        let printed = e.to_string();
        let again = Expr::parse(&printed, &common::VARS).unwrap();
        prop_assert_eq!(again.node(), e.node());
        prop_assert_eq!(again.to_string(), printed);
        let (a, b) = (e.eval(&[x, y]), again.eval(&[x, y]));
        prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
    }

    #[test]
    fn prolongation_is_linear(j in jet(), a in -3.0..3.0f64, b in -3.0..3.0f64, i in 0usize..40, k in 0usize..40) {
        let fields: Vec<VectorField> = list_algebras().into_iter().flat_map(|r| r.basis).collect();
        let (u, v) = (&fields[i % fields.len()], &fields[k % fields.len()]);
        let (Ok(pu), Ok(pv)) = (prolong(u, &j), prolong(v, &j)) else { return Ok(()) };
        let pw = prolong(&u.combine(a, v, b).unwrap(), &j).unwrap();
        let (tu, tv, tw) = (pu.as_tangent(), pv.as_tangent(), pw.as_tangent());
        for c in 0..5 {
            let want = a * tu[c] + b * tv[c];
            prop_assert!((tw[c] - want).abs() <= 1e-10 * (1.0 + want.abs()), "{} {}: {} vs {}", u.label, v.label, tw[c], want);
        }
    }

    #[test]
    fn flows_compose(s in -0.5..0.5f64, t in -0.5..0.5f64, x in 0.5..2.0f64, y in -1.0..1.0f64, which in 0usize..4) {
        let field = [("1", "y"), ("x", "2*y"), ("-y", "x"), ("x^2/4", "x*y/4")][which];
        let v = VectorField::new(field.0, field.1).unwrap();
        let once = flow(&v, s + t, (x, y)).unwrap();
        let mid = flow(&v, s, (x, y)).unwrap();
        let twice = flow(&v, t, mid).unwrap();
        prop_assert!((once.0 - twice.0).abs() <= 1e-9 && (once.1 - twice.1).abs() <= 1e-9, "{:?} vs {:?}", once, twice);
        let back = flow(&v, -s, mid).unwrap();
        prop_assert!((back.0 - x).abs() <= 1e-9 && (back.1 - y).abs() <= 1e-9);
    }

    #[test]
    fn invariant_count_ignores_change_of_basis(index in 0usize..200, c in 0.5..2.0f64, d in -2.0..2.0f64) {
        let algebras: Vec<_> = list_algebras().into_iter().filter(|a| (2..=4).contains(&a.dim)).collect();
        let a = &algebras[index % algebras.len()];
        let k = invariant_count(&a.basis, RANK_SAMPLES, 0).unwrap();
        let mut mixed = a.basis.clone();
        mixed[0] = a.basis[0].combine(c, &a.basis[1], d).unwrap();
        mixed[1] = a.basis[1].combine(1.0, &a.basis[0], d).unwrap();
        // the new pair stays independent when c - d^2 != 0
        prop_assume!((c - d * d).abs() > 1e-3);
        prop_assert_eq!(invariant_count(&mixed, RANK_SAMPLES, 0).unwrap(), k, "{}", a.id);
    }
}

#[test]
fn generic_jets_are_causal() {
    for j in generic_jets(50, 4) {
        assert!(j.x_minus < j.x);
    }
}
