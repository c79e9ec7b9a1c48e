//! Levi-Civita connection and curvature of a lifted metric.
//!
//! Conventions: `[∇_a, ∇_b] v^c = R_ab^c_d v^d`, `Ric_bd = R_ab^a_d`,
//! `Ric = (n−2)P + J g`, and `∇` prepends its index, so slot 0 of `∇T`
//! is the derivative index.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metrics::{Chart, Metric};
use crate::tensor::{for_each_index, MetricPair, Slot, TensorJet};

/// Curvature of one metric at one point, computed as far as the jet degree allows.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub metric: Metric,
    /// `Γ^a_bc`, slots `[Con, Cov, Cov]`; not a tensor.
    pub gamma: TensorJet,
    /// `R_ab^c_d`.
    pub riemann: TensorJet,
    /// `R_abcd = g_ce R_ab^e_d`.
    pub riemann_lowered: TensorJet,
    pub ricci: TensorJet,
    pub scalar: TensorJet,
    pub schouten: TensorJet,
    pub j: TensorJet,
    pub weyl: TensorJet,
    /// Present when the metric degree is at least 3.
    pub cotton: Option<TensorJet>,
    /// Present when the metric degree is at least 4.
    pub bach: Option<TensorJet>,
    schouten_mixed: TensorJet,
}

impl MetricPair for CurvatureBundle {
    fn g(&self) -> &TensorJet {
        &self.metric.g
    }
    fn g_inv(&self) -> &TensorJet {
        &self.metric.g_inv
    }
}

impl CurvatureBundle {
    pub fn new(metric: Metric) -> Result<CurvatureBundle> {
        let degree = metric.chart.degree;
        if degree < 2 {
            return Err(Error::DegreeExhausted {
                op: "curvature",
                needed: 2,
                available: degree,
            });
        }
        let gamma = christoffel(&metric)?;
        let riemann = riemann(&gamma, &metric.chart)?;
        let riemann_lowered = TensorJet::einsum("ce,abed->abcd", &[&metric.g, &riemann], None)?;
        let (ricci, scalar) = ricci_scalar(&riemann, &metric)?;
        let (schouten, j) = schouten(&ricci, &scalar, &metric)?;
        let weyl = weyl(&riemann_lowered, &schouten, &metric)?;
        let schouten_mixed = TensorJet::einsum("ec,cb->eb", &[&schouten, &metric.g_inv], None)?;
        let mut bundle = CurvatureBundle {
            metric,
            gamma,
            riemann,
            riemann_lowered,
            ricci,
            scalar,
            schouten,
            j,
            weyl,
            cotton: None,
            bach: None,
            schouten_mixed,
        };
        if degree >= 3 {
            bundle.cotton = Some(cotton(&bundle)?);
        }
        if degree >= 4 {
            bundle.bach = Some(bach(&bundle)?);
        }
        Ok(bundle)
    }

    pub fn n(&self) -> usize {
        self.metric.chart.dim
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.metric.chart
    }

    pub fn degree(&self) -> usize {
        self.metric.chart.degree
    }

    pub fn cotton(&self) -> Result<&TensorJet> {
        self.cotton.as_ref().ok_or(Error::DegreeExhausted {
            op: "cotton",
            needed: 3,
            available: self.degree(),
        })
    }

    pub fn bach(&self) -> Result<&TensorJet> {
        self.bach.as_ref().ok_or(Error::DegreeExhausted {
            op: "bach",
            needed: 4,
            available: self.degree(),
        })
    }

    /// `∇T`, with Levi-Civita terms on tensor slots and the tractor connection
    /// on tractor slots. Densities carry no extra term in their own scale.
    pub fn nabla(&self, t: &TensorJet) -> Result<TensorJet> {
        nabla(
            t,
            &self.metric.chart,
            &self.gamma,
            Some((&self.metric.g, &self.schouten, &self.schouten_mixed)),
        )
    }

    /// `∇` applied `k` times.
    pub fn nabla_n(&self, t: &TensorJet, k: usize) -> Result<TensorJet> {
        let mut out = t.clone();
        for _ in 0..k {
            out = self.nabla(&out)?;
        }
        Ok(out)
    }

    /// `Δ = g^ab ∇_a ∇_b`.
    pub fn laplacian(&self, t: &TensorJet) -> Result<TensorJet> {
        let dd = self.nabla_n(t, 2)?;
        let r = dd.rank();
        let mut labels: String = "aa".into();
        let mut out = String::new();
        for k in 2..r {
            let c = char::from_u32('A' as u32 + k as u32).expect("label");
            labels.push(c);
            out.push(c);
        }
        // einsum labels must be chars; tractor and tensor slots both fine
        TensorJet::einsum(&format!("{labels}->{out}"), &[&dd], Some(self))
    }
}

/// One row of a connection matrix: `(column, coefficient jet)` pairs.
type Row = Vec<(usize, Vec<f64>)>;

fn nonzero(c: &[f64]) -> bool {
    c.iter().any(|&v| v != 0.0)
}

/// Covariant derivative given the Christoffel symbols; `tractor` carries
/// `(g_ab, P_ab, P_a^b)` and is required only when `t` has tractor slots.
pub fn nabla(
    t: &TensorJet,
    chart: &Chart,
    gamma: &TensorJet,
    tractor: Option<(&TensorJet, &TensorJet, &TensorJet)>,
) -> Result<TensorJet> {
    let d = t.degree();
    if d == 0 {
        return Err(Error::DegreeExhausted {
            op: "covariant_derivative",
            needed: 1,
            available: 0,
        });
    }
    let od = d - 1;
    let has_tractor = t.slots().iter().any(|s| s.is_tractor());
    if gamma.degree() < od {
        return Err(Error::DegreeExhausted {
            op: "covariant_derivative",
            needed: od + 2,
            available: gamma.degree() + 1,
        });
    }
    if has_tractor {
        match tractor {
            Some((_, p, _)) if p.degree() >= od => {}
            Some((_, p, _)) => {
                return Err(Error::DegreeExhausted {
                    op: "tractor_connection",
                    needed: od + 2,
                    available: p.degree() + 2,
                })
            }
            None => return Err(Error::Arity("tractor slots need the Schouten tensor".into())),
        }
    }
    let n = t.n();
    let space = t.space().clone();
    let so = space.len(od);
    let len = t.len();
    let mut slots = vec![Slot::Cov];
    slots.extend_from_slice(t.slots());
    let mut out = TensorJet::zeros(&space, n, od, slots, t.weight());
    let ext = t.extents();
    let mut strides = vec![1usize; ext.len()];
    for i in (0..ext.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * ext[i + 1];
    }
    let nz: Vec<bool> = (0..len).map(|c| nonzero(&t.component(c)[..so])).collect();
    let coef = |x: &TensorJet, flat: usize, s: f64| -> Vec<f64> {
        x.component(flat)[..so].iter().map(|v| v * s).collect()
    };
    let unit = |s: f64| -> Vec<f64> {
        let mut v = vec![0.0; so];
        v[0] = s;
        v
    };
    let kinds: Vec<Slot> = {
        let mut k: Vec<Slot> = t.slots().to_vec();
        k.sort_by_key(|s| *s as u8);
        k.dedup();
        k
    };
    let ts = t.stride();
    for e in 0..n {
        let base = e * len;
        if let Some(v) = chart.var(e) {
            let data = out.data_mut();
            for c in 0..len {
                if nz[c] || nonzero(&t.data()[c * ts..(c + 1) * ts]) {
                    space.partial_acc(
                        &mut data[(base + c) * so..(base + c + 1) * so],
                        &t.data()[c * ts..(c + 1) * ts],
                        v,
                        1.0,
                        od,
                    );
                }
            }
        }
        let gam = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        for kind in &kinds {
            let rows: Vec<Row> = match kind {
                Slot::Cov => (0..n)
                    .map(|b| {
                        (0..n)
                            .filter(|&c| nonzero(&gamma.component(gam(c, e, b))[..so]))
                            .map(|c| (c, coef(gamma, gam(c, e, b), -1.0)))
                            .collect()
                    })
                    .collect(),
                Slot::Con => (0..n)
                    .map(|b| {
                        (0..n)
                            .filter(|&c| nonzero(&gamma.component(gam(b, e, c))[..so]))
                            .map(|c| (c, coef(gamma, gam(b, e, c), 1.0)))
                            .collect()
                    })
                    .collect(),
                Slot::TrLow | Slot::TrUp => {
                    let (g, p, pm) = tractor.expect("checked above");
                    let mut low: Vec<Row> = vec![Vec::new(); n + 2];
                    low[0].push((1 + e, unit(-1.0)));
                    for b in 0..n {
                        let row = &mut low[1 + b];
                        for c in 0..n {
                            if nonzero(&gamma.component(gam(c, e, b))[..so]) {
                                row.push((1 + c, coef(gamma, gam(c, e, b), -1.0)));
                            }
                        }
                        if nonzero(&g.component(e * n + b)[..so]) {
                            row.push((n + 1, coef(g, e * n + b, 1.0)));
                        }
                        if nonzero(&p.component(e * n + b)[..so]) {
                            row.push((0, coef(p, e * n + b, 1.0)));
                        }
                        if nonzero(&pm.component(e * n + b)[..so]) {
                            low[n + 1].push((1 + b, coef(pm, e * n + b, -1.0)));
                        }
                    }
                    if *kind == Slot::TrLow {
                        low
                    } else {
                        let mut up: Vec<Row> = vec![Vec::new(); n + 2];
                        for (j, row) in low.into_iter().enumerate() {
                            for (i, c) in row {
                                up[i].push((j, c.into_iter().map(|v| -v).collect()));
                            }
                        }
                        up
                    }
                }
            };
            for (s, _) in t.slots().iter().enumerate().filter(|(_, k)| *k == kind) {
                let (st, ex) = (strides[s], ext[s]);
                let data = out.data_mut();
                for c in 0..len {
                    let i = (c / st) % ex;
                    for (j, cf) in &rows[i] {
                        let src = c + j * st - i * st;
                        if !nz[src] {
                            continue;
                        }
                        space.mul_acc(
                            &mut data[(base + c) * so..(base + c + 1) * so],
                            cf,
                            &t.data()[src * ts..src * ts + so],
                            1.0,
                            od,
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Coordinate partial derivatives `∂_e T`, prepended like `∇`.
pub fn partials(t: &TensorJet, chart: &Chart) -> Result<TensorJet> {
    let d = t.degree();
    if d == 0 {
        return Err(Error::DegreeExhausted {
            op: "partial",
            needed: 1,
            available: 0,
        });
    }
    let n = t.n();
    let space = t.space().clone();
    let so = space.len(d - 1);
    let mut slots = vec![Slot::Cov];
    slots.extend_from_slice(t.slots());
    let mut out = TensorJet::zeros(&space, n, d - 1, slots, t.weight());
    let len = t.len();
    for e in 0..n {
        if let Some(v) = chart.var(e) {
            let data = out.data_mut();
            for c in 0..len {
                let dst = (e * len + c) * so;
                space.partial_acc(&mut data[dst..dst + so], t.component(c), v, 1.0, d - 1);
            }
        }
    }
    Ok(out)
}

/// `Γ^a_bc = ½ g^ad (∂_b g_dc + ∂_c g_db − ∂_d g_bc)`.
pub fn christoffel(metric: &Metric) -> Result<TensorJet> {
    let dg = partials(&metric.g, &metric.chart)?;
    // first kind: Γ_dbc
    let a = dg.permute(&[1, 0, 2]);
    let b = dg.permute(&[1, 2, 0]);
    let first = a.add(&b)?.sub(&dg)?.scale(0.5);
    let g = TensorJet::einsum("ad,dbc->abc", &[&metric.g_inv, &first], None)?;
    Ok(g.with_weight(0.0))
}

/// `R_ab^c_d = ∂_a Γ^c_bd − ∂_b Γ^c_ad + Γ^c_ae Γ^e_bd − Γ^c_be Γ^e_ad`.
pub fn riemann(gamma: &TensorJet, chart: &Chart) -> Result<TensorJet> {
    let dg = partials(gamma, chart)?; // [a, c, b, d]
    let gg = TensorJet::einsum("cae,ebd->cabd", &[gamma, gamma], None)?;
    let q = dg.permute(&[0, 2, 1, 3]).add(&gg.permute(&[1, 2, 0, 3]))?; // [a, b, c, d]
    q.sub(&q.permute(&[1, 0, 2, 3]))
}

/// `Ric_bd = R_ab^a_d` and `Sc = g^bd Ric_bd`.
pub fn ricci_scalar(r: &TensorJet, metric: &Metric) -> Result<(TensorJet, TensorJet)> {
    let ric = r.trace_dual(0, 2)?;
    let sc = TensorJet::einsum("bd,bd->", &[&metric.g_inv, &ric], None)?;
    Ok((ric, sc))
}

/// `J = Sc / (2(n−1))`, `P = (Ric − J g)/(n−2)`.
pub fn schouten(ric: &TensorJet, sc: &TensorJet, metric: &Metric) -> Result<(TensorJet, TensorJet)> {
    let n = metric.chart.dim as f64;
    let j = sc.scale(1.0 / (2.0 * (n - 1.0)));
    let jg = TensorJet::einsum(",ab->ab", &[&j, &metric.g], None)?;
    let p = ric.sub(&jg)?.scale(1.0 / (n - 2.0));
    Ok((p, j))
}

/// `C_abcd = R_abcd − 2 g_c[a P_b]d − 2 g_d[b P_a]c`; zero when `n = 3`.
pub fn weyl(r_low: &TensorJet, p: &TensorJet, metric: &Metric) -> Result<TensorJet> {
    if metric.chart.dim == 3 {
        return Ok(TensorJet::zeros(r_low.space(), 3, r_low.degree(), vec![Slot::Cov; 4], 2.0));
    }
    // g_ca P_bd − g_cb P_ad + g_db P_ac − g_da P_bc
    let gp = TensorJet::einsum("ca,bd->abcd", &[&metric.g, p], None)?;
    let t = gp.sub(&gp.permute(&[1, 0, 2, 3]))?;
    let t = t.add(&t.permute(&[1, 0, 3, 2]))?;
    r_low.sub(&t)
}

/// `A_abc = ∇_b P_ca − ∇_c P_ba`.
pub fn cotton(bundle: &CurvatureBundle) -> Result<TensorJet> {
    let dp = bundle.nabla(&bundle.schouten)?; // [b, c, a]
    let x = dp.permute(&[2, 0, 1]); // [a, b, c] = ∇_b P_ca
    x.sub(&x.permute(&[0, 2, 1]))
}

/// `B_ab = ∇^c A_acb + P^dc C_dacb`.
pub fn bach(bundle: &CurvatureBundle) -> Result<TensorJet> {
    let da = bundle.nabla(bundle.cotton()?)?;
    let t1 = TensorJet::einsum("cacb->ab", &[&da], Some(bundle))?;
    let t2 = TensorJet::einsum("dc,dacb->ab", &[&bundle.schouten, &bundle.weyl], Some(bundle))?;
    t1.add(&t2)
}

/// `∇^c ∇^d C_acbd + ½ Ric^cd C_acbd`, the four-dimensional form of the Bach tensor.
pub fn bach_from_weyl(bundle: &CurvatureBundle) -> Result<TensorJet> {
    let ddc = bundle.nabla_n(&bundle.weyl, 2)?; // [c, d, a, c', b, d']
    let t1 = TensorJet::einsum("cdacbd->ab", &[&ddc], Some(bundle))?;
    let t2 = TensorJet::einsum("cd,acbd->ab", &[&bundle.ricci, &bundle.weyl], Some(bundle))?;
    t1.axpy(0.5, &t2)
}

/// `∇^d C_dabc`, equal to `(n−3) A_abc`.
pub fn weyl_divergence(bundle: &CurvatureBundle) -> Result<TensorJet> {
    let dc = bundle.nabla(&bundle.weyl)?;
    TensorJet::einsum("ddabc->abc", &[&dc], Some(bundle))
}

/// Largest base-point magnitude among the given tensors, at least 1.
pub fn scale_of(ts: &[&TensorJet]) -> f64 {
    ts.iter().fold(1.0f64, |m, t| m.max(t.max_abs_value()))
}

/// Largest base-point difference between two tensors of equal shape.
pub fn max_diff(a: &TensorJet, b: &TensorJet) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Index tuples over `n^k`, handy for residual scans.
pub fn indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_index(&vec![n; k], |i| out.push(i.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{builtin_from_query, lift_metric};

    fn bundle(q: &str, point: &[f64], degree: usize) -> CurvatureBundle {
        CurvatureBundle::new(lift_metric(&builtin_from_query(q).unwrap(), point, degree).unwrap()).unwrap()
    }

    #[test]
    fn flat_is_exactly_flat() {
        let b = bundle("flat?n=4", &[0.1, 0.2, 0.3, 0.4], 4);
        for t in [&b.gamma, &b.riemann, &b.ricci, &b.schouten, &b.weyl, b.cotton().unwrap(), b.bach().unwrap()] {
            assert!(t.max_abs_value() <= 1e-12);
        }
    }

    #[test]
    fn unit_sphere_closed_forms() {
        let n = 4;
        let b = bundle("sphere_stereo?n=4,r=1", &[0.2, -0.1, 0.3, 0.05], 3);
        let g = &b.metric.g;
        for i in indices(n, 4) {
            let (a, bb, c, d) = (i[0], i[1], i[2], i[3]);
            let want = g.value(&[a, c]) * g.value(&[bb, d]) - g.value(&[a, d]) * g.value(&[bb, c]);
            assert!((b.riemann_lowered.value(&i) - want).abs() < 1e-10);
        }
        for i in indices(n, 2) {
            let gv = g.value(&i);
            assert!((b.ricci.value(&i) - 3.0 * gv).abs() < 1e-10);
            assert!((b.schouten.value(&i) - 0.5 * gv).abs() < 1e-10);
        }
        assert!((b.scalar.values()[0] - 12.0).abs() < 1e-10);
        assert!((b.j.values()[0] - 2.0).abs() < 1e-10);
        assert!(b.weyl.max_abs_value() < 1e-10);
        assert!(b.cotton().unwrap().max_abs_value() < 1e-10);
    }

    #[test]
    fn weights_give_documented_total_orders() {
        let b = bundle("poly_perturbation?n=5,seed=2,eps=0.1,d=3", &[0.1; 5], 4);
        assert_eq!(b.riemann.total_order(), 2.0);
        assert_eq!(b.riemann_lowered.total_order(), 2.0);
        assert_eq!(b.ricci.total_order(), 2.0);
        assert_eq!(b.schouten.total_order(), 2.0);
        assert_eq!(b.j.total_order(), 2.0);
        assert_eq!(b.weyl.total_order(), 2.0);
        assert_eq!(b.cotton().unwrap().total_order(), 3.0);
        assert_eq!(b.bach().unwrap().total_order(), 4.0);
        assert_eq!(b.nabla(&b.weyl).unwrap().total_order(), 3.0);
    }

    #[test]
    fn metricity_and_symmetries() {
        let b = bundle("poly_perturbation?n=4,seed=9,eps=0.1,d=3", &[0.1, -0.2, 0.0, 0.3], 3);
        assert!(b.nabla(&b.metric.g).unwrap().max_abs_value() < 1e-12);
        let r = &b.riemann_lowered;
        assert!(max_diff(r, &r.permute(&[1, 0, 2, 3]).scale(-1.0)) < 1e-12);
        assert!(max_diff(r, &r.permute(&[2, 3, 0, 1])) < 1e-10);
        let bianchi = r.antisymmetrize(&[0, 1, 2]).unwrap();
        assert!(bianchi.max_abs_value() < 1e-10);
        assert!(max_diff(&b.ricci, &b.ricci.permute(&[1, 0])) < 1e-10);
        let tr = TensorJet::einsum("aa->", &[&b.schouten], Some(&b)).unwrap();
        assert!((tr.values()[0] - b.j.values()[0]).abs() < 1e-12);
        for pair in ["aacd->cd", "abad->bd", "abca->bc"] {
            let t = TensorJet::einsum(pair, &[&b.weyl], Some(&b)).unwrap();
            assert!(t.max_abs_value() < 1e-10, "{pair}");
        }
    }

    #[test]
    fn contracted_bianchi_identities() {
        let b = bundle("poly_perturbation?n=5,seed=4,eps=0.1,d=3", &[0.1, 0.0, -0.1, 0.2, 0.0], 4);
        // ∇^a Ric_ab = ½ ∇_b Sc
        let dric = b.nabla(&b.ricci).unwrap();
        let div = TensorJet::einsum("aab->b", &[&dric], Some(&b)).unwrap();
        let dsc = b.nabla(&b.scalar).unwrap();
        assert!(max_diff(&div, &dsc.scale(0.5)) < 1e-10);
        // (n−3) A = ∇^d C_dabc
        let lhs = b.cotton().unwrap().scale(2.0);
        assert!(max_diff(&lhs, &weyl_divergence(&b).unwrap()) < 1e-9);
        let bach = b.bach().unwrap();
        assert!(max_diff(bach, &bach.permute(&[1, 0])) < 1e-9);
    }

    #[test]
    fn degree_budget_is_enforced() {
        let m = lift_metric(&builtin_from_query("flat?n=4").unwrap(), &[0.0; 4], 1).unwrap();
        assert!(matches!(CurvatureBundle::new(m), Err(Error::DegreeExhausted { .. })));
        let b = bundle("flat?n=4", &[0.0; 4], 3);
        assert!(b.bach().is_err());
    }
}
