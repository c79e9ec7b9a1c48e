use nalgebra::DMatrix;
use tractoria::curvature::{max_diff, CurvatureBundle};
use tractoria::metrics::{builtin_from_query, lift_metric};
use tractoria::tensor::TensorJet;

#[test]
fn inverse_matches_nalgebra() {
    let spec = builtin_from_query("poly_perturbation?n=6,seed=11,eps=0.3,d=2").unwrap();
    let p = [0.2, -0.1, 0.0, 0.3, 0.1, -0.2];
    let m = lift_metric(&spec, &p, 1).unwrap();
    let g = DMatrix::from_row_slice(6, 6, &spec.eval(&p).unwrap());
    let gi = g.try_inverse().unwrap();
    for a in 0..6 {
        for b in 0..6 {
            assert!((m.g_inv.value(&[a, b]) - gi[(a, b)]).abs() < 1e-12);
        }
    }
}

#[test]
fn ricci_eigenvalues_of_einstein_product() {
    // S²(1) × S⁴(√3): Ric = g with eigenvalue 1 relative to g
    let spec = builtin_from_query("einstein_product?p=2,q=4").unwrap();
    let p = [0.1, 0.2, -0.1, 0.0, 0.3, 0.1];
    let b = CurvatureBundle::new(lift_metric(&spec, &p, 2).unwrap()).unwrap();
    let mixed = TensorJet::einsum("ab,bc->ac", &[&b.metric.g_inv.at_point(), &b.ricci.at_point()], None).unwrap();
    let m = DMatrix::from_row_slice(6, 6, &mixed.values());
    for ev in m.symmetric_eigenvalues().iter() {
        // mixed Ricci is symmetric here since the metric is diagonal
        assert!((ev - 1.0).abs() < 1e-10, "eigenvalue {ev}");
    }
    let scaled = b.ricci.at_point();
    assert!(max_diff(&scaled, &b.metric.g.at_point()) < 1e-10);
}
