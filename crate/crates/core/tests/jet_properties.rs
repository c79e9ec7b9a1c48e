use proptest::prelude::*;
use tractoria::jets::{Jet, JetSpace, Univariate};

fn jet(coeffs: Vec<f64>) -> Jet {
    let space = JetSpace::get(2, 3);
    Jet::from_coeffs(&space, 3, coeffs).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 10)
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #[test]
    fn multiplication_commutes(a in coeffs(), b in coeffs()) {
        let (a, b) = (jet(a), jet(b));
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 1e-12));
    }

    #[test]
    fn multiplication_associates_and_distributes(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (jet(a), jet(b), jet(c));
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-11));
        let l = a.mul(&b.add(&c).unwrap()).unwrap();
        let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-11));
    }

    #[test]
    fn exp_of_negation_is_reciprocal(a in coeffs()) {
        let a = jet(a).scale(0.5);
        let p = a.apply(Univariate::Exp).unwrap().mul(&a.scale(-1.0).apply(Univariate::Exp).unwrap()).unwrap();
        let one = jet(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        prop_assert!(close(&p, &one, 1e-10));
    }

    #[test]
    fn log_inverts_exp(a in coeffs()) {
        let a = jet(a).scale(0.3);
        let back = a.apply(Univariate::Exp).unwrap().apply(Univariate::Log).unwrap();
        prop_assert!(close(&back, &a, 1e-10));
    }

    #[test]
    fn partial_obeys_leibniz(a in coeffs(), b in coeffs()) {
        let (a, b) = (jet(a), jet(b));
        let l = a.mul(&b).unwrap().partial(0).unwrap();
        let r = a.partial(0).unwrap().mul(&b.truncate(2)).unwrap()
            .add(&a.truncate(2).mul(&b.partial(0).unwrap()).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-11));
    }
}

#[test]
fn sqrt_matches_finite_differences() {
    // f(x, y) = sqrt(1 + x + 2y²) at (0.3, -0.2)
    let space = JetSpace::get(2, 2);
    let x = Jet::variable(&space, 2, 0, 0.3);
    let y = Jet::variable(&space, 2, 1, -0.2);
    let f = x.add(&y.mul(&y).unwrap().scale(2.0)).unwrap().add_scalar(1.0).apply(Univariate::Sqrt).unwrap();
    let g = |x: f64, y: f64| (1.0 + x + 2.0 * y * y).sqrt();
    let h = 1e-4;
    let fx = (g(0.3 + h, -0.2) - g(0.3 - h, -0.2)) / (2.0 * h);
    let fxy = (g(0.3 + h, -0.2 + h) - g(0.3 + h, -0.2 - h) - g(0.3 - h, -0.2 + h) + g(0.3 - h, -0.2 - h)) / (4.0 * h * h);
    assert!((f.derivative_value(&[1, 0]).unwrap() - fx).abs() < 1e-7);
    assert!((f.derivative_value(&[1, 1]).unwrap() - fxy).abs() < 1e-5);
}
