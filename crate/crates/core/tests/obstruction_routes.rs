use tractoria::curvature::{max_diff, scale_of, CurvatureBundle};
use tractoria::formula::{parse_table, Evaluator};
use tractoria::metrics::{builtin_from_query, lift_metric};
use tractoria::obstruction::{self, DIM8_TERMS};
use tractoria::tensor::TensorJet;
use tractoria::tractor::{self, Letter};
use tractoria::Error;

fn bundle(q: &str, point: &[f64], degree: usize) -> CurvatureBundle {
    CurvatureBundle::new(lift_metric(&builtin_from_query(q).unwrap(), point, degree).unwrap()).unwrap()
}

const P8: [f64; 8] = [0.1, 0.0, 0.2, -0.1, 0.0, 0.1, 0.0, 0.05];

#[test]
fn dim6_leading_term() {
    // h has degree 6 so the six-derivative linear part is nonzero; to first
    // order in ε only (1/16) Δ B survives, and B ≈ (1/3) ∇^c ∇^d C_dacb
    let b = bundle("poly_perturbation?n=6,seed=21,eps=0.001,d=6", &[0.1, -0.1, 0.2, 0.0, 0.1, 0.05], 6);
    let ob = obstruction::obstruction6_direct(&b).unwrap();
    let d4 = b.nabla_n(&b.weyl, 4).unwrap(); // [e, f, c, d, (d a c b)]
    let lin = TensorJet::einsum("eecddacb->ab", &[&d4], Some(&b)).unwrap().scale(1.0 / 48.0);
    let err = max_diff(&ob.b, &lin) / lin.max_abs_value();
    assert!(err < 0.05, "relative deviation {err}");
}

#[test]
fn dim8_table_factor_against_tractor_route() {
    let b = bundle("poly_perturbation?n=8,seed=5,eps=0.1,d=2,k=3", &P8, 8);
    let terms = parse_table(DIM8_TERMS, "ab").unwrap();
    let (s, _) = Evaluator::new(&b, &terms, 0).unwrap().sum(&terms, "ab").unwrap();
    let s = s.symmetrize(&[0, 1]).unwrap();
    let t = obstruction::obstruction8_tractor(&b).unwrap();
    let (x, y) = (s.values(), t.b.values());
    let ratio = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / y.iter().map(|q| q * q).sum::<f64>();
    assert!((ratio - 384.0).abs() < 1e-6 * 384.0, "S_(ab) / ℬ = {ratio}");
}

#[test]
fn dim8_operator_form_matches_expanded_formula() {
    // ℬ = −(1/384) Y^B Z^C_a Y^D Z^E_b 𝔟₂W
    let b = bundle("poly_perturbation?n=8,seed=6,eps=0.1,d=2,k=3", &P8, 8);
    let w = tractor::w_tractor(&b).unwrap();
    let bw = tractor::box2_dim8(&w, &b).unwrap();
    let c = tractor::coefficient(&bw, &Letter::parse_word("XZXZ").unwrap()).unwrap();
    let via_op = c.scale(-1.0 / 384.0);
    let t = obstruction::obstruction8_tractor(&b).unwrap();
    assert!(max_diff(&via_op, &t.b) <= 1e-10 * scale_of(&[&t.b]));
}

#[test]
fn dim6_divergence_and_trace() {
    let b = bundle("poly_perturbation?n=6,seed=22,eps=0.2,d=3", &[0.0, 0.1, -0.1, 0.2, 0.0, 0.1], 7);
    let r = obstruction::obstruction6_tractor(&b).unwrap();
    let d = &r.diagnostics;
    assert!(d.divergence_residual.unwrap() <= 1e-6 * d.scale);
    assert!(d.trace_residual <= 1e-6 * d.scale);
    assert!(d.symmetry_residual <= 1e-6 * d.scale);
}

#[test]
fn box1_requires_weight_and_dimension() {
    let b = bundle("poly_perturbation?n=6,seed=1,eps=0.1,d=2", &[0.0; 6], 4);
    let w = tractor::w_tractor(&b).unwrap();
    assert!(matches!(tractor::box1_alpha(&w.with_weight(-1.0), 0.5, &b), Err(Error::WrongWeight { .. })));
    let b4 = bundle("poly_perturbation?n=4,seed=1,eps=0.1,d=2", &[0.0; 4], 4);
    let w4 = tractor::w_tractor(&b4).unwrap();
    assert!(matches!(tractor::box1_alpha(&w4, 0.5, &b4), Err(Error::WrongDimension { .. })));
}

#[test]
fn dim4_w_is_bach_in_bottom_slot() {
    let b = bundle("poly_perturbation?n=4,seed=2,eps=0.2,d=3", &[0.1, 0.0, -0.1, 0.1], 4);
    let w = tractor::w_tractor(&b).unwrap();
    let (c, resid) = obstruction::bottom_slot(&w).unwrap();
    assert_eq!(resid, 0.0);
    // W = K(4) X Z X Z ℬ with K(4) = −8 and ℬ = −½B
    let obs = obstruction::obstruction4(&b).unwrap();
    assert!(max_diff(&c.scale(4.0), &obs.b.scale(-8.0).permute(&[1, 0])) < 1e-12);
}

#[test]
fn rescaling_preserves_the_tractor_pairing() {
    use tractoria::defcomplex::random_tensor;
    use tractoria::metrics::{lift_metric_with, rescale_metric, ConformalFactor};
    use tractoria::tensor::Slot;
    let spec = builtin_from_query("poly_perturbation?n=5,seed=3,eps=0.1,d=2").unwrap();
    let omega = ConformalFactor::parse("0.3*x0 - 0.2*x1*x2", 5).unwrap();
    let p = [0.1, 0.2, -0.1, 0.0, 0.0];
    let b = CurvatureBundle::new(lift_metric_with(&spec, &p, 2, &[&omega.omega]).unwrap()).unwrap();
    let hat = CurvatureBundle::new(lift_metric(&rescale_metric(&spec, &omega), &p, 2).unwrap()).unwrap();
    let om = b.chart().lift(&omega.omega).unwrap();
    for w in [-1.0, 0.0, 2.0] {
        let v = random_tensor(b.chart().space(), 5, 1, vec![Slot::TrLow], w, 4);
        let vh = tractor::rescale_components(&v, &om, &b).unwrap();
        let h = tractor::tractor_contract(&v, &v, &[(0, 0)], &b).unwrap().values()[0];
        let hh = tractor::tractor_contract(&vh, &vh, &[(0, 0)], &hat).unwrap().values()[0];
        let e = (2.0 * w * omega.omega.eval(&p).unwrap()).exp();
        assert!((hh - e * h).abs() <= 1e-9 * h.abs().max(1.0), "w = {w}: {hh} vs {}", e * h);
    }
}
