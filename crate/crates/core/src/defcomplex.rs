//! Operators of the conformal deformation complex acting on ordinary tensors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::CurvatureBundle;
use crate::error::{Error, Result};
use crate::jets::JetSpace;
use crate::tensor::{Slot, TensorJet};

/// Tolerance for accepting an input as an algebraic Weyl tensor.
pub const WEYL_SYMMETRY_TOL: f64 = 1e-8;

fn require_rank(t: &TensorJet, slots: &[Slot], what: &str) -> Result<()> {
    if t.slots() != slots {
        return Err(Error::Arity(format!("{what} expects slots {slots:?}, got {:?}", t.slots())));
    }
    Ok(())
}

/// `v_a ↦ ∇_(a v_b)_0`, the trace-free symmetric part of `∇v`.
pub fn conformal_killing(v: &TensorJet, ctx: &CurvatureBundle) -> Result<TensorJet> {
    require_rank(v, &[Slot::Cov], "conformal_killing")?;
    let dv = ctx.nabla(v)?;
    let sym = dv.symmetrize(&[0, 1])?;
    let tr = TensorJet::einsum("aa->", &[&sym], Some(ctx))?;
    let g = ctx.metric.g.truncate(sym.degree());
    let pure = TensorJet::einsum(",ab->ab", &[&tr, &g], None)?;
    sym.axpy(-1.0 / ctx.n() as f64, &pure)
}

/// Largest residual (relative to the tensor's size) of the algebraic Weyl
/// symmetries: skew pairs, pair symmetry, first Bianchi, trace-freeness.
pub fn weyl_symmetry_residual(u: &TensorJet, ctx: &CurvatureBundle) -> Result<f64> {
    require_rank(u, &[Slot::Cov; 4], "algebraic Weyl tensor")?;
    let scale = u.max_abs_value().max(1.0);
    let mut worst = 0.0f64;
    let mut check = |t: TensorJet| worst = worst.max(t.max_abs_value() / scale);
    check(u.add(&u.permute(&[1, 0, 2, 3]))?);
    check(u.add(&u.permute(&[0, 1, 3, 2]))?);
    check(u.sub(&u.permute(&[2, 3, 0, 1]))?);
    check(u.antisymmetrize(&[0, 1, 2])?);
    check(TensorJet::einsum("abad->bd", &[u], Some(ctx))?);
    Ok(worst)
}

fn require_weyl(u: &TensorJet, ctx: &CurvatureBundle) -> Result<()> {
    let r = weyl_symmetry_residual(u, ctx)?;
    if r > WEYL_SYMMETRY_TOL {
        return Err(Error::Symmetry(format!(
            "input is not an algebraic Weyl tensor (residual {r:e})"
        )));
    }
    Ok(())
}

/// `U_abcd ↦ (∇^(a ∇^c) + P^ac) U_abcd`, an element of `E_(bd)`.
pub fn cstar(u: &TensorJet, ctx: &CurvatureBundle) -> Result<TensorJet> {
    require_weyl(u, ctx)?;
    let ddu = ctx.nabla_n(u, 2)?;
    let t1 = TensorJet::einsum("acabcd->bd", &[&ddu], Some(ctx))?;
    let t2 = TensorJet::einsum("caabcd->bd", &[&ddu], Some(ctx))?;
    let t3 = TensorJet::einsum("ac,abcd->bd", &[&ctx.schouten, u], Some(ctx))?;
    t1.add(&t2)?.scale(0.5).add(&t3)
}

/// `(n−3) ∇_[a U_bc]de − g_d[a ∇^s U_bc]se + g_e[a ∇^s U_bc]sd`, slots `[a, b, c, d, e]`.
pub fn weyl_bianchi(u: &TensorJet, ctx: &CurvatureBundle) -> Result<TensorJet> {
    let n = ctx.n();
    if n < 4 {
        return Err(Error::WrongDimension {
            expected: "at least 4".into(),
            actual: n,
        });
    }
    require_weyl(u, ctx)?;
    let du = ctx.nabla(u)?;
    let div = TensorJet::einsum("sbcse->bce", &[&du], Some(ctx))?;
    let g = ctx.metric.g.truncate(div.degree());
    // g_da div_bce laid out as [a, b, c, d, e]
    let gd = TensorJet::einsum("da,bce->abcde", &[&g, &div], None)?;
    let ge = TensorJet::einsum("ea,bcd->abcde", &[&g, &div], None)?;
    let first = du.antisymmetrize(&[0, 1, 2])?.scale((n - 3) as f64);
    first
        .sub(&gd.antisymmetrize(&[0, 1, 2])?)?
        .add(&ge.antisymmetrize(&[0, 1, 2])?)
}

/// Projects a covariant 4-tensor onto algebraic Weyl tensors for the metric of `ctx`.
pub fn weyl_projection(t: &TensorJet, ctx: &CurvatureBundle) -> Result<TensorJet> {
    require_rank(t, &[Slot::Cov; 4], "weyl_projection")?;
    let r = t
        .antisymmetrize(&[0, 1])?
        .antisymmetrize(&[2, 3])?;
    let r = r.add(&r.permute(&[2, 3, 0, 1]))?.scale(0.5);
    let r = r.sub(&r.antisymmetrize(&[0, 1, 2, 3])?)?;
    let ric = TensorJet::einsum("abad->bd", &[&r], Some(ctx))?;
    let sc = TensorJet::einsum("bb->", &[&ric], Some(ctx))?;
    let n = ctx.n() as f64;
    let g = ctx.metric.g.truncate(r.degree());
    let j = sc.scale(1.0 / (2.0 * (n - 1.0)));
    let p = ric
        .sub(&TensorJet::einsum(",ab->ab", &[&j, &g], None)?)?
        .scale(1.0 / (n - 2.0));
    let gp = TensorJet::einsum("ca,bd->abcd", &[&g, &p], None)?;
    let k = gp.sub(&gp.permute(&[1, 0, 2, 3]))?;
    let k = k.add(&k.permute(&[1, 0, 3, 2]))?;
    r.sub(&k)
}

/// A seeded random algebraic Weyl field of weight 2 whose components are jets
/// of the given degree with coefficients in [−1, 1].
pub fn random_weyl_field(ctx: &CurvatureBundle, degree: usize, seed: u64) -> Result<TensorJet> {
    let n = ctx.n();
    let space = ctx.chart().space().clone();
    if degree > ctx.degree() {
        return Err(Error::DegreeExhausted {
            op: "random_weyl_field",
            needed: degree,
            available: ctx.degree(),
        });
    }
    let t = random_tensor(&space, n, degree, vec![Slot::Cov; 4], 2.0, seed);
    weyl_projection(&t, ctx)
}

/// Seeded random jets (ChaCha8, uniform in [−1, 1]) in every component.
pub fn random_tensor(
    space: &std::sync::Arc<JetSpace>,
    n: usize,
    degree: usize,
    slots: Vec<Slot>,
    weight: f64,
    seed: u64,
) -> TensorJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TensorJet::zeros(space, n, degree, slots, weight);
    for v in t.data_mut() {
        *v = rng.gen_range(-1.0..=1.0);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::max_diff;
    use crate::expr::Expr;
    use crate::metrics::{builtin_from_query, lift_metric, lift_metric_with};

    fn bundle(q: &str, point: &[f64], degree: usize) -> CurvatureBundle {
        CurvatureBundle::new(lift_metric(&builtin_from_query(q).unwrap(), point, degree).unwrap()).unwrap()
    }

    #[test]
    fn killing_on_flat_constant_and_dilation() {
        let b = bundle("flat?n=4", &[0.5, 0.1, -0.2, 0.3], 3);
        let chart = b.chart();
        let constant: Vec<_> = [1.0, -2.0, 0.5, 3.0].iter().map(|&c| chart.constant(c)).collect();
        let c = TensorJet::from_jets(4, vec![Slot::Cov], 2.0, &constant).unwrap();
        assert!(conformal_killing(&c, &b).unwrap().max_abs_value() < 1e-14);
        // flat has no active coordinates, so use a chart where all four are active
        let m = lift_metric_with(&builtin_from_query("flat?n=4").unwrap(), &[0.5, 0.1, -0.2, 0.3], 3, &[&Expr::parse("x0+x1+x2+x3").unwrap()]).unwrap();
        let b = CurvatureBundle::new(m).unwrap();
        let x: Vec<_> = (0..4).map(|i| b.chart().coordinate(i)).collect();
        let dil = TensorJet::from_jets(4, vec![Slot::Cov], 2.0, &x).unwrap();
        let k = conformal_killing(&dil, &b).unwrap();
        assert!(k.max_abs_value() < 1e-14);
        assert!(b.nabla(&dil).unwrap().max_abs_value() > 0.5);
    }

    #[test]
    fn killing_is_trace_free_and_symmetric() {
        let b = bundle("poly_perturbation?n=4,seed=5,eps=0.1,d=2", &[0.1, 0.2, 0.0, -0.1], 3);
        let space = b.chart().space().clone();
        let v = random_tensor(&space, 4, 2, vec![Slot::Cov], 2.0, 11);
        let k = conformal_killing(&v, &b).unwrap();
        let tr = TensorJet::einsum("aa->", &[&k], Some(&b)).unwrap();
        assert!(tr.max_abs_value() < 1e-12);
        assert!(max_diff(&k, &k.permute(&[1, 0])) < 1e-14);
    }

    #[test]
    fn projection_produces_weyl_tensors() {
        let b = bundle("poly_perturbation?n=6,seed=1,eps=0.1,d=2", &[0.1; 6], 3);
        let u = random_weyl_field(&b, 2, 3).unwrap();
        assert!(weyl_symmetry_residual(&u, &b).unwrap() < 1e-12);
        assert!(weyl_symmetry_residual(&b.weyl, &b).unwrap() < 1e-10);
    }

    #[test]
    fn non_weyl_input_is_rejected() {
        let b = bundle("flat?n=4", &[0.0; 4], 2);
        let space = b.chart().space().clone();
        let t = random_tensor(&space, 4, 2, vec![Slot::Cov; 4], 2.0, 1);
        assert!(matches!(cstar(&t, &b), Err(Error::Symmetry(_))));
        assert!(matches!(weyl_bianchi(&t, &b), Err(Error::Symmetry(_))));
    }

    #[test]
    fn bianchi_operator_output_symmetries() {
        let b = bundle("poly_perturbation?n=6,seed=2,eps=0.1,d=2", &[0.0; 6], 3);
        let u = random_weyl_field(&b, 2, 7).unwrap();
        let bi = weyl_bianchi(&u, &b).unwrap();
        let s = bi.max_abs_value().max(1.0);
        let skew3 = bi.sub(&bi.antisymmetrize(&[0, 1, 2]).unwrap()).unwrap();
        let skew2 = bi.add(&bi.permute(&[0, 1, 2, 4, 3])).unwrap();
        assert!(skew3.max_abs_value() <= 1e-9 * s);
        assert!(skew2.max_abs_value() <= 1e-9 * s);
        assert!(bi.max_abs_value() > 1e-3);
    }
}
