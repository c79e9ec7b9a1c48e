//! The verification battery: identities and cross-route agreements with
//! tolerances relative to `max(1, largest term)`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{bach_from_weyl, max_diff, scale_of, weyl_divergence, CurvatureBundle};
use crate::defcomplex::{cstar, random_tensor, random_weyl_field, weyl_bianchi};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::metrics::{builtin_from_query, lift_metric, lift_metric_with, rescale_metric, ConformalFactor, MetricSpec};
use crate::obstruction::{self, Route};
use crate::tensor::{tractor_metric, Slot, TensorJet};
use crate::tractor::{self, Letter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
    Dim8,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            "dim8" => Ok(Suite::Dim8),
            other => Err(Error::InvalidParam(format!("unknown suite `{other}` (fast, full, dim8)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// Which identity or formula the check exercises.
    pub anchor: &'static str,
    /// Acceptance criterion the check belongs to.
    pub criterion: u8,
    /// Residual divided by the check's scale.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

type Run = Box<dyn Fn() -> Result<f64> + Send + Sync>;

/// A named check, run lazily.
pub struct Check {
    pub name: String,
    pub anchor: &'static str,
    pub criterion: u8,
    pub tolerance: f64,
    run: Run,
}

impl Check {
    fn new(name: impl Into<String>, anchor: &'static str, criterion: u8, tolerance: f64, run: impl Fn() -> Result<f64> + Send + Sync + 'static) -> Check {
        Check {
            name: name.into(),
            anchor,
            criterion,
            tolerance,
            run: Box::new(run),
        }
    }

    pub fn run(&self) -> CheckReport {
        let t = Instant::now();
        let out = (self.run)();
        let seconds = t.elapsed().as_secs_f64();
        let (residual, error) = match out {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        CheckReport {
            name: self.name.clone(),
            anchor: self.anchor,
            criterion: self.criterion,
            residual,
            tolerance: self.tolerance,
            // NaN compares false, so errors fail
            passed: residual <= self.tolerance,
            seconds,
            error,
        }
    }
}

/// Runs checks in parallel on the current rayon pool, keeping their order.
pub fn run_checks(checks: &[Check]) -> Vec<CheckReport> {
    checks.par_iter().map(Check::run).collect()
}

fn bundle(spec: &MetricSpec, point: &[f64], degree: usize) -> Result<CurvatureBundle> {
    CurvatureBundle::new(lift_metric(spec, point, degree)?)
}

fn query(q: &str) -> Result<MetricSpec> {
    builtin_from_query(q)
}

fn points(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-0.2..=0.2)).collect())
        .collect()
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

/// A fixed nontrivial polynomial conformal factor.
pub const OMEGA: &str = "0.1*x0 - 0.05*x1*x1 + 0.03*x0*x2 + 0.02*x3";

fn tol(n: usize) -> f64 {
    match n {
        0..=4 => 1e-7,
        5..=7 => 1e-6,
        _ => 1e-4,
    }
}

/// Agreement between zero tensors proves nothing.
fn nontrivial(b: &TensorJet) -> Result<()> {
    if b.max_abs_value() < 1e-8 {
        return Err(Error::Domain(format!("obstruction too small to compare ({:e})", b.max_abs_value())));
    }
    Ok(())
}

fn cross_route(q: String, point: Vec<f64>) -> Result<f64> {
    let spec = query(&q)?;
    let n = spec.dim;
    let b = bundle(&spec, &point, n)?;
    let d = obstruction::obstruction(&b, Route::Direct)?;
    let t = obstruction::obstruction(&b, Route::Tractor)?;
    nontrivial(&d.b)?;
    Ok(rel(max_diff(&d.b, &t.b), d.diagnostics.scale.max(t.diagnostics.scale)))
}

fn covariance(q: String, point: Vec<f64>, route: Route) -> Result<f64> {
    let spec = query(&q)?;
    let n = spec.dim;
    let omega = ConformalFactor::parse(OMEGA, n)?;
    let hat = rescale_metric(&spec, &omega);
    let b = obstruction::obstruction(&bundle(&spec, &point, n)?, route)?;
    let bh = obstruction::obstruction(&bundle(&hat, &point, n)?, route)?;
    nontrivial(&b.b)?;
    let w = omega.omega.eval(&point)?;
    let want = b.b.scale(((2.0 - n as f64) * w).exp());
    let scale = bh.diagnostics.scale.max(b.diagnostics.scale);
    Ok(rel(max_diff(&bh.b, &want), scale))
}

fn weyl_covariance(q: String, point: Vec<f64>) -> Result<f64> {
    let spec = query(&q)?;
    let n = spec.dim;
    let omega = ConformalFactor::parse(OMEGA, n)?;
    let hat = rescale_metric(&spec, &omega);
    let c = bundle(&spec, &point, 2)?.weyl.at_point();
    let ch = bundle(&hat, &point, 2)?.weyl.at_point();
    let w = omega.omega.eval(&point)?;
    Ok(rel(max_diff(&ch, &c.scale((2.0 * w).exp())), scale_of(&[&c, &ch])))
}

fn conformally_flat(n: usize) -> Result<f64> {
    let q = format!("conformally_flat?n={n},omega=0.2*x0 - 0.1*x1*x2 + 0.05*x0*x0*x3");
    let b = bundle(&query(&q)?, &vec![0.1; n], n)?;
    let route = if n == 8 { Route::Tractor } else { Route::Direct };
    let r = obstruction::obstruction(&b, route)?;
    Ok(rel(r.b.max_abs_value(), r.diagnostics.scale))
}

fn divergence(q: String, point: Vec<f64>) -> Result<f64> {
    let spec = query(&q)?;
    let n = spec.dim;
    let r = obstruction::obstruction(&bundle(&spec, &point, n + 1)?, Route::Direct)?;
    let d = r.diagnostics.divergence_residual.ok_or(Error::DegreeExhausted {
        op: "divergence",
        needed: 1,
        available: 0,
    })?;
    Ok(rel(d, r.diagnostics.scale))
}

fn einstein_obstruction() -> Result<f64> {
    let b = bundle(&query("einstein_product?p=2,q=4")?, &[0.1, -0.2, 0.05, 0.1, 0.0, -0.1], 6)?;
    let scale = scale_of(&[&b.riemann_lowered]);
    if b.weyl.max_abs_value() <= 0.1 * scale {
        return Err(Error::Domain("Weyl curvature unexpectedly small".into()));
    }
    let r = obstruction::obstruction6_direct(&b)?;
    Ok(rel(r.b.max_abs_value(), scale.max(r.diagnostics.scale)))
}

fn einstein_w_parallel() -> Result<f64> {
    let b = bundle(&query("einstein_product?p=2,q=4")?, &[0.1, -0.2, 0.05, 0.1, 0.0, -0.1], 4)?;
    let w = tractor::w_tractor(&b)?;
    let i = tractor::scale_tractor(&b).truncate(w.degree());
    let wi = tractor::tractor_contract(&w, &i, &[(3, 0)], &b)?;
    Ok(rel(wi.max_abs_value(), scale_of(&[&w, &b.riemann_lowered])))
}

fn d_x_identity(n: usize, seed: u64) -> Result<f64> {
    let spec = query(&format!("poly_perturbation?n={n},seed={seed},eps=0.1,d=2"))?;
    let b = bundle(&spec, &vec![0.05; n], 4)?;
    let mut worst = 0.0f64;
    for w in -3..=3 {
        let wf = w as f64;
        let v = random_tensor(b.chart().space(), n, 2, vec![Slot::TrLow], wf, seed.wrapping_add((w + 13) as u64));
        let xv = tractor::x_times(&v);
        let d = tractor::tractor_d(&xv, &b)?;
        let lhs = TensorJet::einsum("AAB->B", &[&d], Some(&b))?;
        let k = (n as f64 + 2.0 * wf + 2.0) * (n as f64 + wf);
        let want = v.at_point().scale(k);
        worst = worst.max(rel(max_diff(&lhs, &want), scale_of(&[&want, &lhs])));
    }
    Ok(worst)
}

fn metricity(n: usize, seed: u64) -> Result<f64> {
    let spec = query(&format!("poly_perturbation?n={n},seed={seed},eps=0.1,d=2"))?;
    let b = bundle(&spec, &vec![-0.05; n], 3)?;
    let u = random_tensor(b.chart().space(), n, 1, vec![Slot::TrLow], 1.0, seed + 1);
    let v = random_tensor(b.chart().space(), n, 1, vec![Slot::TrLow], -1.0, seed + 2);
    let h = tractor::tractor_contract(&u, &v, &[(0, 0)], &b)?;
    let lhs = b.nabla(&h)?;
    let du = b.nabla(&u)?;
    let dv = b.nabla(&v)?;
    let r1 = tractor::tractor_contract(&du, &v.truncate(0), &[(1, 0)], &b)?;
    let r2 = tractor::tractor_contract(&u.truncate(0), &dv, &[(0, 1)], &b)?;
    let rhs = r1.add(&r2)?;
    Ok(rel(max_diff(&lhs, &rhs), scale_of(&[&lhs, &r1, &r2])))
}

fn nabla_x(n: usize) -> Result<f64> {
    let spec = query(&format!("poly_perturbation?n={n},seed=3,eps=0.1,d=2"))?;
    let b = bundle(&spec, &vec![0.1; n], 2)?;
    let x = tractor::unit_tractor(b.chart(), Letter::X, 1.0).truncate(1);
    let dx = b.nabla(&x)?;
    // Z_Aa has frame components g_ab at 1 + b and nothing at the ends
    let mut z = TensorJet::zeros(dx.space(), n, 0, vec![Slot::Cov, Slot::TrLow], 0.0);
    for a in 0..n {
        for c in 0..n {
            z.set_value(&[a, 1 + c], b.metric.g.value(&[a, c]));
        }
    }
    Ok(max_diff(&dx, &z))
}

fn di_splitting() -> Result<f64> {
    let spec = query("poly_perturbation?n=6,seed=4,eps=0.1,d=3")?;
    let b = bundle(&spec, &[0.1, 0.0, -0.1, 0.05, 0.0, 0.2], 4)?;
    let di = tractor::di_splitting(&b.weyl, &b)?;
    let w = tractor::w_tractor(&b)?.scale(3.0);
    Ok(rel(max_diff(&di, &w), scale_of(&[&di, &w])))
}

fn w_symmetries(n: usize) -> Result<f64> {
    let spec = query(&format!("poly_perturbation?n={n},seed=5,eps=0.1,d=3"))?;
    let b = bundle(&spec, &vec![0.05; n], 4)?;
    let w = tractor::w_tractor(&b)?.at_point();
    let s = scale_of(&[&w]);
    let mut worst = 0.0f64;
    let mut acc = |t: TensorJet| worst = worst.max(t.max_abs_value() / s);
    acc(w.add(&w.permute(&[1, 0, 2, 3]))?);
    acc(w.add(&w.permute(&[0, 1, 3, 2]))?);
    acc(w.sub(&w.permute(&[2, 3, 0, 1]))?);
    acc(w.antisymmetrize(&[0, 1, 2])?);
    acc(TensorJet::einsum("ABAD->BD", &[&w], Some(&b))?);
    Ok(worst)
}

fn bottom_slot(q: String, point: Vec<f64>) -> Result<f64> {
    let spec = query(&q)?;
    let n = spec.dim;
    let r = obstruction::obstruction(&bundle(&spec, &point, n)?, Route::Tractor)?;
    let up = r.diagnostics.upper_slot_residual.unwrap_or(f64::NAN);
    Ok(rel(up, r.diagnostics.scale))
}

fn bianchi_dim4(seed: u64) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n=4,seed={seed},eps=0.1,d=3"))?, &[0.1, 0.0, 0.2, -0.1], 3)?;
    let u = random_weyl_field(&b, 2, seed + 7)?;
    let bi = weyl_bianchi(&u, &b)?;
    Ok(rel(bi.max_abs_value(), scale_of(&[&u, &b.nabla(&u)?])))
}

fn cstar_dim4(seed: u64) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n=4,seed={seed},eps=0.1,d=3"))?, &[0.0, 0.1, 0.0, 0.2], 4)?;
    let c = cstar(&b.weyl, &b)?;
    let bach = b.bach()?;
    Ok(rel(max_diff(&c, bach), scale_of(&[&c, bach])))
}

fn cotton_divergence(n: usize) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n={n},seed=6,eps=0.1,d=3"))?, &vec![0.1; n], 3)?;
    let lhs = b.cotton()?.scale(n as f64 - 3.0);
    let rhs = weyl_divergence(&b)?;
    Ok(rel(max_diff(&lhs, &rhs), scale_of(&[&lhs, &rhs])))
}

fn bach_forms(seed: u64) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n=4,seed={seed},eps=0.1,d=3"))?, &points(seed, 4, 1)[0], 4)?;
    let x = bach_from_weyl(&b)?;
    let y = b.bach()?;
    Ok(rel(max_diff(&x, y), scale_of(&[&x, y])))
}

fn dim4_obstruction(seed: u64) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n=4,seed={seed},eps=0.1,d=3"))?, &points(seed, 4, 1)[0], 5)?;
    let r = obstruction::obstruction4(&b)?;
    if max_diff(&r.b, &b.bach()?.scale(-0.5)) != 0.0 {
        return Err(Error::Domain("obstruction differs from −½ Bach".into()));
    }
    Ok(rel(r.diagnostics.divergence_residual.unwrap_or(f64::NAN), r.diagnostics.scale))
}

fn flat_curvature() -> Result<f64> {
    let mut worst = 0.0f64;
    for n in [3, 4, 6, 8] {
        let spec = query(&format!("flat?n={n}"))?;
        let m = lift_metric_with(&spec, &vec![0.3; n], 4, &[&Expr::parse("x0 + x1 + x2")?])?;
        let b = CurvatureBundle::new(m)?;
        for t in [&b.riemann_lowered, &b.ricci, &b.weyl, &b.schouten, b.cotton()?, b.bach()?] {
            worst = worst.max(t.data().iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    Ok(worst)
}

fn finite_differences(seed: u64) -> Result<f64> {
    let spec = query(&format!("poly_perturbation?n=4,seed={seed},eps=0.2,d=3"))?;
    let p = [0.1, -0.2, 0.05, 0.15];
    let m = lift_metric(&spec, &p, 2)?;
    let chart = &m.chart;
    let f = |x: &[f64]| spec.eval(x);
    let n = 4;
    let mut worst = 0.0f64;
    let h1 = 1e-4;
    let h2 = 1e-3;
    let shift = |v: &[(usize, f64)]| {
        let mut x = p.to_vec();
        for &(i, d) in v {
            x[i] += d;
        }
        x
    };
    for a in 0..n {
        let fp = f(&shift(&[(a, h1)]))?;
        let fm = f(&shift(&[(a, -h1)]))?;
        for e in 0..n * n {
            let fd = (fp[e] - fm[e]) / (2.0 * h1);
            let mut alpha = vec![0u8; chart.active_count()];
            if let Some(v) = chart.var(a) {
                alpha[v] = 1;
            }
            let jet = m.g.jet(&[e / n, e % n]).derivative_value(&alpha)?;
            let jet = if chart.var(a).is_some() { jet } else { 0.0 };
            worst = worst.max((fd - jet).abs());
        }
        for c in 0..n {
            let fpp = f(&shift(&[(a, h2), (c, h2)]))?;
            let fpm = f(&shift(&[(a, h2), (c, -h2)]))?;
            let fmp = f(&shift(&[(a, -h2), (c, h2)]))?;
            let fmm = f(&shift(&[(a, -h2), (c, -h2)]))?;
            for e in 0..n * n {
                let fd = (fpp[e] - fpm[e] - fmp[e] + fmm[e]) / (4.0 * h2 * h2);
                let jet = match (chart.var(a), chart.var(c)) {
                    (Some(va), Some(vc)) => {
                        let mut alpha = vec![0u8; chart.active_count()];
                        alpha[va] += 1;
                        alpha[vc] += 1;
                        m.g.jet(&[e / n, e % n]).derivative_value(&alpha)?
                    }
                    _ => 0.0,
                };
                worst = worst.max((fd - jet).abs());
            }
        }
    }
    Ok(worst)
}

fn sphere_closed_form() -> Result<f64> {
    let mut worst = 0.0f64;
    for (n, r) in [(4usize, 1.0f64), (5, 2.0), (6, 0.7)] {
        let b = bundle(&query(&format!("sphere_stereo?n={n},r={r}"))?, &points(n as u64, n, 1)[0], 2)?;
        let g = b.metric.g.at_point();
        let gg = TensorJet::einsum("ac,bd->abcd", &[&g, &g], None)?;
        let want = gg.sub(&gg.permute(&[0, 1, 3, 2]))?.scale(1.0 / (r * r));
        let s = scale_of(&[&want]);
        worst = worst.max(max_diff(&b.riemann_lowered, &want) / s);
        let sc = (n * (n - 1)) as f64 / (r * r);
        worst = worst.max((b.scalar.values()[0] - sc).abs() / sc.max(1.0));
        worst = worst.max(b.weyl.max_abs_value() / s);
    }
    Ok(worst)
}

fn hash_display() -> Result<f64> {
    let b = bundle(&query("poly_perturbation?n=6,seed=7,eps=0.2,d=3")?, &[0.1, 0.0, 0.2, -0.1, 0.0, 0.1], 4)?;
    let w = tractor::w_tractor(&b)?.at_point();
    let quarter = tractor::hash_double(&w, &w, &b)?.scale(0.25);
    let mut disp = TensorJet::zeros(w.space(), 6, 0, vec![Slot::TrLow; 4], -4.0);
    for spec in ["acbf,fade->bcde", "acdf,bafe->bcde", "acef,badf->bcde"] {
        disp = disp.sub(&TensorJet::einsum(spec, &[&w, &w], Some(&b))?)?;
    }
    Ok(rel(max_diff(&quarter, &disp), scale_of(&[&quarter, &disp])))
}

fn hash_associative() -> Result<f64> {
    let b = bundle(&query("poly_perturbation?n=6,seed=8,eps=0.2,d=3")?, &[0.0, 0.1, 0.0, 0.2, -0.1, 0.0], 4)?;
    let w = tractor::w_tractor(&b)?.at_point();
    let ww = tractor::hash_double(&w, &w, &b)?;
    let left = tractor::hash_double(&ww, &w, &b)?;
    let right = tractor::hash_double(&w, &ww, &b)?;
    Ok(rel(max_diff(&left, &right), scale_of(&[&left, &right])))
}

fn metric_annihilated(n: usize) -> Result<f64> {
    let b = bundle(&query(&format!("poly_perturbation?n={n},seed=9,eps=0.1,d=3"))?, &vec![0.0; n], 4)?;
    let w = tractor::w_tractor(&b)?.at_point();
    let h = tractor_metric(&b, false).at_point();
    let out = tractor::hash_double(&w, &h, &b)?;
    Ok(rel(out.max_abs_value(), scale_of(&[&w])))
}

fn w_rescaled() -> Result<f64> {
    let spec = query("poly_perturbation?n=5,seed=10,eps=0.1,d=3")?;
    let omega = ConformalFactor::parse(OMEGA, 5)?;
    let p = [0.1, 0.0, -0.1, 0.2, 0.0];
    let m = lift_metric_with(&spec, &p, 5, &[&omega.omega])?;
    let b = CurvatureBundle::new(m)?;
    let om = b.chart().lift(&omega.omega)?;
    let w = tractor::w_tractor(&b)?;
    let moved = tractor::rescale_components(&w, &om, &b)?;
    let hat = bundle(&rescale_metric(&spec, &omega), &p, 4)?;
    let wh = tractor::w_tractor(&hat)?;
    Ok(rel(max_diff(&moved, &wh), scale_of(&[&moved, &wh])))
}

/// Dimension-8 metrics used by the cross-route and bottom-slot checks.
pub fn dim8_metric(seed: u64) -> String {
    format!("poly_perturbation?n=8,seed={seed},eps=0.1,d=2,k=3")
}

/// Base point of the dimension-8 checks.
pub const DIM8_POINT: [f64; 8] = [0.1, 0.0, 0.2, -0.1, 0.0, 0.1, 0.0, 0.05];

fn fast_checks(seed: u64, full: bool) -> Vec<Check> {
    let mut c = Vec::new();
    let (nmetrics, npoints) = if full { (5, 2) } else { (2, 1) };
    for i in 0..nmetrics {
        let s = seed + i;
        for (j, p) in points(s, 6, npoints).into_iter().enumerate() {
            let q = format!("poly_perturbation?n=6,seed={s},eps=0.2,d=3");
            c.push(Check::new(format!("cross-route n=6 seed={s} point={j}"), "dim-6 direct formula vs tractor formula", 1, 1e-6, move || cross_route(q.clone(), p.clone())));
        }
    }
    for i in 0..5 {
        let s = seed + i;
        c.push(Check::new(format!("bach forms agree n=4 seed={s}"), "Bach via Weyl divergence vs via Cotton", 3, 1e-7, move || bach_forms(s)));
    }
    c.push(Check::new("obstruction n=4 is -1/2 Bach, divergence-free", "dim-4 obstruction, divergence-free", 3, 1e-6, move || dim4_obstruction(seed)));
    for n in [4usize, 6] {
        let q = format!("poly_perturbation?n={n},seed={seed},eps=0.2,d=3");
        let p = points(seed + 100, n, 1).remove(0);
        c.push(Check::new(format!("conformal covariance n={n}"), "obstruction has weight 2-n", 4, 1e-6, move || covariance(q.clone(), p.clone(), Route::Direct)));
    }
    {
        let q = format!("poly_perturbation?n=5,seed={seed},eps=0.1,d=3");
        let p = points(seed + 101, 5, 1).remove(0);
        c.push(Check::new("Weyl covariance n=5", "Weyl tensor has weight 2", 4, 1e-7, move || weyl_covariance(q.clone(), p.clone())));
    }
    c.push(Check::new("obstruction vanishes on einstein_product(2,4)", "vanishing on conformally Einstein metrics", 5, 1e-7, einstein_obstruction));
    c.push(Check::new("W annihilates the parallel tractor on einstein_product(2,4)", "W·I = 0 for Einstein scales", 5, 1e-7, einstein_w_parallel));
    for n in [4usize, 6] {
        c.push(Check::new(format!("conformally flat n={n}"), "vanishing on conformally flat metrics", 6, tol(n), move || conformally_flat(n)));
    }
    for n in [4usize, 6] {
        let q = format!("poly_perturbation?n={n},seed={seed},eps=0.2,d=3");
        let p = points(seed + 200, n, 1).remove(0);
        c.push(Check::new(format!("divergence-free n={n}"), "obstruction is divergence-free", 7, 1e-6, move || divergence(q.clone(), p.clone())));
    }
    for n in [4usize, 6, 8] {
        c.push(Check::new(format!("D_A X^A V n={n}"), "D_A X^A V = (n+2w+2)(n+w)V", 8, 1e-8, move || d_x_identity(n, seed)));
    }
    for n in [4usize, 6, 8] {
        c.push(Check::new(format!("tractor metricity n={n}"), "tractor connection preserves h", 8, 1e-9, move || metricity(n, seed)));
    }
    c.push(Check::new("nabla X = Z n=5", "∇_a X_A = Z_Aa", 8, 0.0, || nabla_x(5)));
    c.push(Check::new("DI(C) = 3W n=6", "splitting of the Weyl tensor reproduces W", 8, 1e-7, di_splitting));
    for n in [4usize, 6, 8] {
        c.push(Check::new(format!("W-tractor symmetries n={n}"), "W is trace-free with Weyl symmetries", 8, 1e-8, move || w_symmetries(n)));
    }
    {
        let q = format!("poly_perturbation?n=6,seed={seed},eps=0.2,d=3");
        let p = points(seed + 300, 6, 1).remove(0);
        c.push(Check::new("bottom-slot structure n=6", "obstruction occupies only the injecting slot", 8, 1e-6, move || bottom_slot(q.clone(), p.clone())));
    }
    c.push(Check::new("W-tractor conformally invariant n=5", "W in one scale rewritten to another", 8, 1e-6, w_rescaled));
    for s in [seed, seed + 1] {
        c.push(Check::new(format!("Weyl-Bianchi operator trivial n=4 seed={s}"), "Bi vanishes in dimension 4", 9, 1e-9, move || bianchi_dim4(s)));
    }
    c.push(Check::new("C* of Weyl is Bach n=4", "C*(C) = B in dimension 4", 9, 1e-7, move || cstar_dim4(seed)));
    for n in 4..=8usize {
        c.push(Check::new(format!("Weyl divergence is (n-3) Cotton n={n}"), "contracted Bianchi identity", 9, 1e-7, move || cotton_divergence(n)));
    }
    c.push(Check::new("flat metrics have zero curvature", "jet engine", 10, 1e-12, flat_curvature));
    c.push(Check::new("metric derivatives match finite differences", "jet engine", 10, 1e-5, move || finite_differences(seed)));
    c.push(Check::new("sphere curvature closed forms", "jet engine", 10, 1e-8, sphere_closed_form));
    c.push(Check::new("quarter double hash matches three-term display", "dim-6 expansion of W##W", 11, 1e-8, hash_display));
    c.push(Check::new("double hash associative on W", "(W##W)##W = W##(W##W)", 11, 1e-8, hash_associative));
    for n in [5usize, 6] {
        c.push(Check::new(format!("double hash annihilates h n={n}"), "hash action of W on the tractor metric", 11, 1e-10, move || metric_annihilated(n)));
    }
    c
}

fn dim8_checks(seed: u64) -> Vec<Check> {
    let mut c = Vec::new();
    for s in [seed, seed + 1] {
        let q = dim8_metric(s);
        c.push(Check::new(format!("cross-route n=8 seed={s}"), "dim-8 direct table vs tractor formula", 2, 1e-4, move || cross_route(q.clone(), DIM8_POINT.to_vec())));
    }
    let q = dim8_metric(seed);
    c.push(Check::new("conformal covariance n=8", "obstruction has weight 2-n", 4, 1e-4, move || covariance(q.clone(), DIM8_POINT.to_vec(), Route::Direct)));
    c.push(Check::new("conformally flat n=8", "vanishing on conformally flat metrics", 6, 1e-4, || conformally_flat(8)));
    let q = dim8_metric(seed + 2);
    c.push(Check::new("bottom-slot structure n=8", "obstruction occupies only the injecting slot", 8, 1e-4, move || bottom_slot(q.clone(), DIM8_POINT.to_vec())));
    c
}

pub fn suite_checks(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Fast => fast_checks(seed, false),
        Suite::Full => {
            let mut c = fast_checks(seed, true);
            c.extend(dim8_checks(seed));
            c
        }
        Suite::Dim8 => dim8_checks(seed),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckReport> {
    run_checks(&suite_checks(suite, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse_and_fast_is_large() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert!("slow".parse::<Suite>().is_err());
        assert!(suite_checks(Suite::Fast, 42).len() >= 20);
        assert!(suite_checks(Suite::Full, 42).len() > suite_checks(Suite::Fast, 42).len());
    }

    #[test]
    fn errors_fail_checks() {
        let c = Check::new("boom", "none", 0, 1.0, || Err(Error::Domain("x".into())));
        let r = c.run();
        assert!(!r.passed);
        assert!(r.error.is_some());
    }
}
