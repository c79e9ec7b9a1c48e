//! Tractor calculus in a chosen scale.
//!
//! A tractor is a [`TensorJet`] whose slots are lowered tractor slots. In the
//! scale of the bundle's metric a lowered standard tractor is
//! `V_A = σ Y_A + μ_b Z_A^b + ρ X_A`, stored as `(σ, μ_1..μ_n, ρ)`. A slot word
//! such as `[X, Z, X, Z]` names the coefficient of `X_A Z_B^b X_C Z_E^e`; it is
//! what contraction with `Y^A Z^B_b Y^C Z^E_e` extracts.

use std::sync::Arc;

use crate::curvature::CurvatureBundle;
use crate::error::{Error, Result};
use crate::jets::{Jet, Univariate};
use crate::metrics::Chart;
use crate::tensor::{for_each_index, MetricPair, Slot, TensorJet};

/// Tractors are tensor jets with lowered tractor slots.
pub type TractorJet = TensorJet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    Y,
    Z,
    X,
}

impl Letter {
    /// Weight shift of a coefficient carrying this letter.
    pub fn weight_shift(self) -> f64 {
        match self {
            Letter::Y | Letter::Z => 1.0,
            Letter::X => -1.0,
        }
    }

    pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
        word.chars()
            .map(|c| match c {
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                'X' => Ok(Letter::X),
                other => Err(Error::Arity(format!("`{other}` is not a slot letter"))),
            })
            .collect()
    }
}

fn frame_index(letter: Letter, n: usize, z: usize) -> usize {
    match letter {
        Letter::Y => 0,
        Letter::Z => 1 + z,
        Letter::X => n + 1,
    }
}

fn require_tractor(t: &TensorJet, what: &str) -> Result<()> {
    if t.slots().iter().any(|&s| s != Slot::TrLow) {
        return Err(Error::Arity(format!("{what} expects lowered tractor slots, got {:?}", t.slots())));
    }
    Ok(())
}

/// Coefficient of a slot word as an ordinary tensor: one covariant slot per `Z`,
/// weight `w + #Y + #Z − #X`.
pub fn coefficient(t: &TractorJet, word: &[Letter]) -> Result<TensorJet> {
    require_tractor(t, "coefficient")?;
    if word.len() != t.rank() {
        return Err(Error::Arity(format!("word of length {} for valence {}", word.len(), t.rank())));
    }
    let n = t.n();
    let nz = word.iter().filter(|&&l| l == Letter::Z).count();
    let weight = t.weight() + word.iter().map(|l| l.weight_shift()).sum::<f64>();
    let mut out = TensorJet::zeros(t.space(), n, t.degree(), vec![Slot::Cov; nz], weight);
    let stride = t.stride();
    let mut src = vec![0; word.len()];
    for_each_index(&vec![n; nz], |zi| {
        let mut k = 0;
        for (s, &l) in word.iter().enumerate() {
            let z = if l == Letter::Z {
                k += 1;
                zi[k - 1]
            } else {
                0
            };
            src[s] = frame_index(l, n, z);
        }
        let from = t.flat_index(&src);
        let to = out.flat_index(zi);
        out.data_mut()[to * stride..(to + 1) * stride].copy_from_slice(t.component(from));
    });
    Ok(out)
}

/// Adds `s · coef` into the slot word of `t`; `coef` has one covariant slot per `Z`.
pub fn add_word(t: &mut TractorJet, word: &[Letter], s: f64, coef: &TensorJet) -> Result<()> {
    let n = t.n();
    let nz = word.iter().filter(|&&l| l == Letter::Z).count();
    if coef.rank() != nz || word.len() != t.rank() {
        return Err(Error::Arity(format!(
            "word {word:?} does not fit a rank-{} coefficient in valence {}",
            coef.rank(),
            t.rank()
        )));
    }
    let so = t.stride();
    let sc = coef.stride();
    if sc < so {
        return Err(Error::DegreeExhausted {
            op: "add_word",
            needed: t.degree(),
            available: coef.degree(),
        });
    }
    let mut dst = vec![0; word.len()];
    for_each_index(&vec![n; nz], |zi| {
        let mut k = 0;
        for (s, &l) in word.iter().enumerate() {
            let z = if l == Letter::Z {
                k += 1;
                zi[k - 1]
            } else {
                0
            };
            dst[s] = frame_index(l, n, z);
        }
        let to = t.flat_index(&dst);
        let from = coef.flat_index(zi);
        let c = &coef.data()[from * sc..from * sc + so];
        for (o, v) in t.component_mut(to).iter_mut().zip(c) {
            *o += s * v;
        }
    });
    Ok(())
}

/// Slice along the first slot at frame index `i`.
pub fn slice0(t: &TensorJet, i: usize) -> TensorJet {
    let inner: Vec<Slot> = t.slots()[1..].to_vec();
    let mut out = TensorJet::zeros(t.space(), t.n(), t.degree(), inner, t.weight());
    let len = out.len() * t.stride();
    out.data_mut().copy_from_slice(&t.data()[i * len..(i + 1) * len]);
    out
}

/// Contracts listed slot pairs of two tractors through the tractor metric.
pub fn tractor_contract(u: &TractorJet, v: &TractorJet, pairs: &[(usize, usize)], metric: &dyn MetricPair) -> Result<TractorJet> {
    let mut vv = v.clone();
    for &(i, j) in pairs {
        if u.slots()[i] != Slot::TrLow || v.slots()[j] != Slot::TrLow {
            return Err(Error::Arity(format!("slots {i} and {j} are not both lowered tractor slots")));
        }
        vv = vv.flip(j, metric)?;
    }
    let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    u.contract_dual(&a, &vv, &b)
}

/// The tractor with a single frame component set to 1 (`X_A`, `Y_A`) in the chart space.
pub fn unit_tractor(chart: &Chart, letter: Letter, weight: f64) -> TractorJet {
    let n = chart.dim;
    let mut t = TensorJet::zeros(chart.space(), n, chart.degree, vec![Slot::TrLow], weight);
    let i = frame_index(letter, n, 0);
    t.component_mut(i)[0] = 1.0;
    t
}

/// Prepends a lowered tractor slot holding `X_A`.
pub fn x_times(t: &TensorJet) -> TensorJet {
    let n = t.n();
    let mut slots = vec![Slot::TrLow];
    slots.extend_from_slice(t.slots());
    let mut out = TensorJet::zeros(t.space(), n, t.degree(), slots, t.weight() + 1.0);
    let len = t.data().len();
    out.data_mut()[(n + 1) * len..(n + 2) * len].copy_from_slice(t.data());
    out
}

fn label(k: usize) -> char {
    char::from_u32('A' as u32 + k as u32).expect("label")
}

/// `□V = ΔV + w J V` with the tractor-coupled Laplacian.
pub fn tractor_box(v: &TractorJet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    if v.degree() < 2 {
        return Err(Error::DegreeExhausted {
            op: "box",
            needed: 2,
            available: v.degree(),
        });
    }
    let lap = ctx.laplacian(v)?;
    let w = v.weight();
    let j = ctx.j.truncate(lap.degree());
    let jv = v.truncate(lap.degree()).mul_scalar(&scalar_jet(&j), 0.0);
    Ok(lap.axpy(w, &jv.with_weight(lap.weight()))?.with_weight(w - 2.0))
}

fn scalar_jet(t: &TensorJet) -> Jet {
    Jet::from_coeffs(t.space(), t.degree(), t.data().to_vec()).expect("scalar")
}

/// `D_A V = (n+2w−2) w Y_A V + (n+2w−2) Z_A^a ∇_a V − X_A □V`, new leading slot.
pub fn tractor_d(v: &TractorJet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    let n = ctx.n();
    let w = v.weight();
    let bx = tractor_box(v, ctx)?;
    let d = bx.degree();
    let dv = ctx.nabla(v)?.truncate(d);
    let c = n as f64 + 2.0 * w - 2.0;
    let mut slots = vec![Slot::TrLow];
    slots.extend_from_slice(v.slots());
    let mut out = TensorJet::zeros(v.space(), n, d, slots, w - 1.0);
    let len = bx.data().len();
    let vv = v.truncate(d);
    let data = out.data_mut();
    for (o, x) in data[..len].iter_mut().zip(vv.data()) {
        *o = c * w * x;
    }
    for (o, x) in data[len..(n + 1) * len].iter_mut().zip(dv.data()) {
        *o = c * x;
    }
    for (o, x) in data[(n + 1) * len..].iter_mut().zip(bx.data()) {
        *o = -x;
    }
    Ok(out)
}

/// The W-tractor of the scale, valence 4 and weight −2.
pub fn w_tractor(ctx: &CurvatureBundle) -> Result<TractorJet> {
    let n = ctx.n();
    let nf = n as f64;
    let b = ctx.bach()?;
    let a = ctx.cotton()?;
    let d = b.degree();
    let mut w = TensorJet::zeros(ctx.chart().space(), n, d, vec![Slot::TrLow; 4], -2.0);
    use Letter::{X, Z};
    if n != 4 {
        add_word(&mut w, &[Z, Z, Z, Z], nf - 4.0, &ctx.weyl)?;
        // −2(n−4) Z_A^a Z_B^b X_[C Z_E]^e A_eab
        let aeab = a.permute(&[1, 2, 0]); // [a, b, e] = A_eab
        add_word(&mut w, &[Z, Z, X, Z], -(nf - 4.0), &aeab)?;
        add_word(&mut w, &[Z, Z, Z, X], nf - 4.0, &aeab)?;
        // −2(n−4) X_[A Z_B]^b Z_C^c Z_E^e A_bce
        add_word(&mut w, &[X, Z, Z, Z], -(nf - 4.0), a)?;
        add_word(&mut w, &[Z, X, Z, Z], nf - 4.0, a)?;
    }
    // 4 X_[A Z_B]^b X_[C Z_E]^e B_eb
    let bt = b.permute(&[1, 0]); // [b, e] = B_eb
    add_word(&mut w, &[X, Z, X, Z], 1.0, &bt)?;
    add_word(&mut w, &[X, Z, Z, X], -1.0, &bt)?;
    add_word(&mut w, &[Z, X, X, Z], -1.0, &bt)?;
    add_word(&mut w, &[Z, X, Z, X], 1.0, &bt)?;
    Ok(w)
}

/// The scale tractor `I = σY − (J/n)σX` for `σ = 1`, parallel exactly when the
/// scale is Einstein.
pub fn scale_tractor(ctx: &CurvatureBundle) -> TractorJet {
    let n = ctx.n();
    let j = &ctx.j;
    let mut t = TensorJet::zeros(j.space(), n, j.degree(), vec![Slot::TrLow], 0.0);
    t.component_mut(0)[0] = 1.0;
    let c: Vec<f64> = j.data().iter().map(|v| -v / n as f64).collect();
    t.component_mut(n + 1).copy_from_slice(&c);
    t
}

/// `R##T = Σ_{s,t} R^F_{E_s}^G_{E_t} T_{..F..G..}`, the double hash of a
/// valence-4 tractor `R` (read as a tensor square of endomorphisms acting
/// through its pairs `(0,1)` and `(2,3)`) on a tractor `T`; the diagonal terms
/// `s = t` act by the composite endomorphism `R^F_E^G_F`.
pub fn hash_double(r: &TractorJet, t: &TractorJet, metric: &dyn MetricPair) -> Result<TractorJet> {
    require_tractor(r, "hash_double")?;
    require_tractor(t, "hash_double")?;
    if r.rank() != 4 || t.rank() == 0 {
        return Err(Error::Arity(format!(
            "hash_double needs a valence-4 operator and a nonzero valence, got {} and {}",
            r.rank(),
            t.rank()
        )));
    }
    let d = r.degree().min(t.degree());
    let (r, t) = (r.truncate(d), t.truncate(d));
    let up = r.flip(0, metric)?.flip(2, metric)?; // [F^, E, G^, E']
    let k = t.rank();
    let mut out = TensorJet::zeros(t.space(), t.n(), d, t.slots().to_vec(), t.weight() + r.weight());
    // diagonal: M_E^G = R^F_E^G_F
    let m = up.trace_dual(0, 3)?; // [E, G^]
    for s in 0..k {
        let c = m.contract_dual(&[1], &t, &[s])?; // [E, rest]
        let mut perm: Vec<usize> = (1..k).collect();
        perm.insert(s, 0);
        out = out.add(&c.permute(&perm))?;
    }
    for s in 0..k {
        for u in 0..k {
            if s == u {
                continue;
            }
            let c = up.contract_dual(&[0, 2], &t, &[s, u])?; // [E_s, E_u, rest]
            let mut perm = vec![usize::MAX; k];
            perm[s] = 0;
            perm[u] = 1;
            let mut next = 2;
            for p in perm.iter_mut() {
                if *p == usize::MAX {
                    *p = next;
                    next += 1;
                }
            }
            out = out.add(&c.permute(&perm))?;
        }
    }
    Ok(out)
}

/// `(D_|I| R) ## D^|I| T`: the leading slot of each input is contracted and
/// takes no part in the hash action.
pub fn hash_double_excluding(dr: &TractorJet, dt: &TractorJet, metric: &dyn MetricPair) -> Result<TractorJet> {
    let n = dr.n();
    let d = dr.degree().min(dt.degree());
    let dt_up = dt.truncate(d).flip(0, metric)?;
    let dr = dr.truncate(d);
    let mut acc: Option<TensorJet> = None;
    for i in 0..n + 2 {
        let ri = slice0(&dr, i);
        let mut ti = slice0(&dt_up, i);
        ti = TensorJet::zeros(ti.space(), n, d, ti.slots().to_vec(), ti.weight()).add(&ti)?;
        let h = hash_double(&ri, &ti, metric)?;
        acc = Some(match acc {
            None => h,
            Some(a) => a.add(&h)?,
        });
    }
    acc.ok_or_else(|| Error::Arity("empty contraction".into()))
}

fn check_weight(t: &TensorJet, expected: f64) -> Result<()> {
    if (t.weight() - expected).abs() > 1e-12 {
        return Err(Error::WrongWeight {
            expected,
            actual: t.weight(),
        });
    }
    Ok(())
}

/// `□ + (α/(n−4)) W##` on tractors of weight `1 − n/2`.
pub fn box1_alpha(t: &TractorJet, alpha: f64, ctx: &CurvatureBundle) -> Result<TractorJet> {
    let n = ctx.n();
    if n == 4 {
        return Err(Error::WrongDimension {
            expected: "n ≠ 4".into(),
            actual: n,
        });
    }
    check_weight(t, 1.0 - n as f64 / 2.0)?;
    let w = w_tractor(ctx)?;
    box1_alpha_with(t, alpha, &w, ctx)
}

/// As [`box1_alpha`], reusing a precomputed W-tractor.
pub fn box1_alpha_with(t: &TractorJet, alpha: f64, w: &TractorJet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    let n = ctx.n();
    let bx = tractor_box(t, ctx)?;
    let h = hash_double(w, &t.truncate(bx.degree()), ctx)?;
    bx.axpy(alpha / (n as f64 - 4.0), &h)
}

/// The dimension-8 operator 𝔟₂ on valence-4 tractors of weight −2.
pub fn box2_dim8(t: &TractorJet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    let n = ctx.n();
    if n != 8 {
        return Err(Error::WrongDimension {
            expected: "8".into(),
            actual: n,
        });
    }
    require_tractor(t, "box2_dim8")?;
    if t.rank() != 4 {
        return Err(Error::Arity(format!("box2_dim8 needs valence 4, got {}", t.rank())));
    }
    check_weight(t, -2.0)?;
    let w = w_tractor(ctx)?;
    let parts = Box2Parts::new(t, &w, ctx)?;
    let out = parts
        .y_box_d
        .scale(-1.0)
        .axpy(-0.5, &parts.y_w_dt)?
        .axpy(-1.0 / 64.0, &parts.y_w_x_w)?
        .axpy(1.0 / 64.0, &parts.ww_t)?
        .axpy(1.0 / 16.0, &parts.dw_dt)?
        .axpy(1.0 / 32.0, &parts.w_w_t)?;
    Ok(out)
}

/// The separate terms entering 𝔟₂, all of weight −6 and equal degree.
pub struct Box2Parts {
    /// `Y^A □ D_A T`
    pub y_box_d: TractorJet,
    /// `Σ_placements Y^A W_A^P_B^Q D_P T_Q...`
    pub y_w_dt: TractorJet,
    /// `Y^A W##(X_A (W##T))`
    pub y_w_x_w: TractorJet,
    /// `(W##W)##T`
    pub ww_t: TractorJet,
    /// `(D_|I| W)##D^|I| T`
    pub dw_dt: TractorJet,
    /// `W##(W##T)`
    pub w_w_t: TractorJet,
}

impl Box2Parts {
    pub fn new(t: &TractorJet, w: &TractorJet, ctx: &CurvatureBundle) -> Result<Box2Parts> {
        let n = ctx.n();
        let yi = n + 1;
        let dt = tractor_d(t, ctx)?; // [P, B, C, D, E]
        let box_dt = tractor_box(&dt, ctx)?;
        let y_box_d = slice0(&box_dt, yi);
        let d = y_box_d.degree();
        let w = w.truncate(d.max(2));
        let tt = t.truncate(d);
        let wd = w.truncate(d);

        // Y^A W_A^P_B^Q → [P^, B, Q^]
        let wy = slice0(&w.flip(1, ctx)?.flip(3, ctx)?, yi).truncate(d);
        let dtd = dt.truncate(d);
        let mut y_w_dt = TensorJet::zeros(t.space(), n, d, vec![Slot::TrLow; 4], -6.0);
        for place in 0..4 {
            // contract P with slot 0 of D T and Q with slot 1 + place
            let c = wy.contract_dual(&[0, 2], &dtd, &[0, 1 + place])?; // [B, others...]
            let mut perm: Vec<usize> = (1..4).collect();
            perm.insert(place, 0);
            y_w_dt = y_w_dt.add(&c.permute(&perm).with_weight(-6.0))?;
        }

        let wt = hash_double(&wd, &tt, ctx)?;
        let xwt = x_times(&wt);
        let y_w_x_w = slice0(&hash_double(&wd, &xwt, ctx)?, yi);
        let ww = hash_double(&wd, &wd, ctx)?;
        let ww_t = hash_double(&ww, &tt, ctx)?;
        let dw = tractor_d(&w, ctx)?;
        let dw_dt = hash_double_excluding(&dw, &dt, ctx)?;
        let w_w_t = hash_double(&wd, &wt, ctx)?;
        let fix = |x: TensorJet| x.truncate(d).with_weight(-6.0);
        Ok(Box2Parts {
            y_box_d: fix(y_box_d),
            y_w_dt: fix(y_w_dt),
            y_w_x_w: fix(y_w_x_w),
            ww_t: fix(ww_t),
            dw_dt: fix(dw_dt),
            w_w_t: fix(w_w_t),
        })
    }
}

/// The splitting `u ↦ 𝔻I(u)` of a Weyl-symmetric `u ∈ E_abcd[2]` into a
/// valence-4 tractor of weight −2.
pub fn di_splitting(u: &TensorJet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    let r = crate::defcomplex::weyl_symmetry_residual(u, ctx)?;
    if r > crate::defcomplex::WEYL_SYMMETRY_TOL {
        return Err(Error::Symmetry(format!("𝔻I needs a Weyl-symmetric input (residual {r:e})")));
    }
    let n = ctx.n();
    let nf = n as f64;
    let du = ctx.nabla(u)?;
    let ddu = ctx.nabla(&du)?; // [x, y, b, c, e, f] = ∇_x ∇_y u_bcef
    let d = ddu.degree();
    let mut out = TensorJet::zeros(ctx.chart().space(), n, d, vec![Slot::TrLow; 4], -2.0);
    use Letter::{X, Z};
    // V_fbc = ∇^e u_efbc ; V'_cef = ∇^b u_bcef
    let v1 = TensorJet::einsum("eefbc->bcf", &[&du], Some(ctx))?; // [b, c, f]
    let v2 = TensorJet::einsum("bbcef->cef", &[&du], Some(ctx))?; // [c, e, f]
    add_word(&mut out, &[Z, Z, Z, Z], (nf - 4.0) * (nf - 3.0), &u.truncate(d))?;
    add_word(&mut out, &[Z, Z, X, Z], -(nf - 4.0), &v1.truncate(d))?;
    add_word(&mut out, &[Z, Z, Z, X], nf - 4.0, &v1.truncate(d))?;
    add_word(&mut out, &[X, Z, Z, Z], -(nf - 4.0), &v2.truncate(d))?;
    add_word(&mut out, &[Z, X, Z, Z], nf - 4.0, &v2.truncate(d))?;
    // S_cf = ∇^(b ∇^e) u_bcef + (n−3) P^be u_bcef
    let s1 = TensorJet::einsum("bebcef->cf", &[&ddu], Some(ctx))?;
    let s2 = TensorJet::einsum("ebbcef->cf", &[&ddu], Some(ctx))?;
    let s3 = TensorJet::einsum("be,bcef->cf", &[&ctx.schouten, u], Some(ctx))?;
    let s = s1.add(&s2)?.scale(0.5).axpy(nf - 3.0, &s3.truncate(d))?;
    add_word(&mut out, &[X, Z, X, Z], 1.0, &s)?;
    add_word(&mut out, &[X, Z, Z, X], -1.0, &s)?;
    add_word(&mut out, &[Z, X, X, Z], -1.0, &s)?;
    add_word(&mut out, &[Z, X, Z, X], 1.0, &s)?;
    Ok(out)
}

/// Rewrites the components of a tractor from the scale `g` to `ĝ = e^{2ω} g`.
/// `omega` is the jet of `ω` in the chart of `ctx` (degree at least 1).
pub fn rescale_components(v: &TractorJet, omega: &Jet, ctx: &CurvatureBundle) -> Result<TractorJet> {
    require_tractor(v, "rescale_components")?;
    let n = ctx.n();
    let chart = ctx.chart();
    if omega.degree() == 0 {
        return Err(Error::DegreeExhausted {
            op: "rescale_components",
            needed: 1,
            available: 0,
        });
    }
    let d = v.degree().min(omega.degree() - 1);
    let space = Arc::clone(chart.space());
    let upsilon: Vec<Jet> = (0..n)
        .map(|b| match chart.var(b) {
            Some(var) => omega.partial(var).map(|j| j.truncate(d)),
            None => Ok(Jet::zero(&space, d)),
        })
        .collect::<Result<_>>()?;
    let om = omega.truncate(d);
    let ep = om.apply(Univariate::Exp)?;
    let em = om.scale(-1.0).apply(Univariate::Exp)?;
    let gi = ctx.metric.g_inv.truncate(d);
    let up: Vec<Jet> = (0..n)
        .map(|c| {
            let mut s = Jet::zero(&space, d);
            for (b, ub) in upsilon.iter().enumerate() {
                s = s.add(&gi.jet(&[b, c]).mul(ub)?)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut norm = Jet::zero(&space, d);
    for (a, b) in upsilon.iter().zip(&up) {
        norm = norm.add(&a.mul(b)?)?;
    }
    let e = n + 2;
    let mut m = vec![Jet::zero(&space, d); e * e];
    m[0] = ep.clone();
    for b in 0..n {
        m[(1 + b) * e + 1 + b] = ep.clone();
        m[(1 + b) * e] = ep.mul(&upsilon[b])?;
        m[(n + 1) * e + 1 + b] = em.mul(&up[b])?.scale(-1.0);
    }
    m[(n + 1) * e + n + 1] = em.clone();
    m[(n + 1) * e] = em.mul(&norm)?.scale(-0.5);
    let mt = TensorJet::from_jets(n, vec![Slot::TrLow, Slot::TrUp], 0.0, &m)?;
    let mut out = v.truncate(d);
    for s in 0..v.rank() {
        let c = mt.contract_dual(&[1], &out, &[s])?; // [new, rest]
        let mut perm: Vec<usize> = (1..v.rank()).collect();
        perm.insert(s, 0);
        out = c.permute(&perm);
    }
    let overall = om.scale(v.weight()).apply(Univariate::Exp)?;
    Ok(out.mul_scalar(&overall, 0.0).with_weight(v.weight()))
}

/// Builds a tractor from per-word coefficient tensors.
pub fn from_words(n: usize, weight: f64, words: &[(&str, &TensorJet)]) -> Result<TractorJet> {
    let first = words
        .first()
        .ok_or_else(|| Error::Arity("no words supplied".into()))?;
    let k = first.0.len();
    let degree = words.iter().map(|(_, t)| t.degree()).min().unwrap_or(0);
    let mut out = TensorJet::zeros(first.1.space(), n, degree, vec![Slot::TrLow; k], weight);
    for (word, coef) in words {
        add_word(&mut out, &Letter::parse_word(word)?, 1.0, coef)?;
    }
    Ok(out)
}

/// Einstein summation over tractor labels, e.g. `"ABCE,E->ABC"`.
pub fn tractor_einsum(spec: &str, ops: &[&TensorJet], metric: &dyn MetricPair) -> Result<TensorJet> {
    TensorJet::einsum(spec, ops, Some(metric))
}

#[doc(hidden)]
pub fn labels(k: usize) -> String {
    (0..k).map(label).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::max_diff;
    use crate::defcomplex::random_tensor;
    use crate::metrics::{builtin_from_query, lift_metric};

    fn bundle(q: &str, point: &[f64], degree: usize) -> CurvatureBundle {
        CurvatureBundle::new(lift_metric(&builtin_from_query(q).unwrap(), point, degree).unwrap()).unwrap()
    }

    #[test]
    fn pairing_of_standard_tractor() {
        let b = bundle("poly_perturbation?n=4,seed=1,eps=0.1,d=2", &[0.1, 0.0, 0.2, -0.1], 2);
        let v = random_tensor(b.chart().space(), 4, 0, vec![Slot::TrLow], 1.0, 5);
        let h = tractor_contract(&v, &v, &[(0, 0)], &b).unwrap().values()[0];
        let vals = v.values();
        let mut want = 2.0 * vals[0] * vals[5];
        for a in 0..4 {
            for c in 0..4 {
                want += b.metric.g_inv.value(&[a, c]) * vals[1 + a] * vals[1 + c];
            }
        }
        assert!((h - want).abs() < 1e-12);
        let x = unit_tractor(b.chart(), Letter::X, 1.0);
        let y = unit_tractor(b.chart(), Letter::Y, -1.0);
        assert_eq!(tractor_contract(&x, &x, &[(0, 0)], &b).unwrap().values()[0], 0.0);
        assert_eq!(tractor_contract(&x, &y, &[(0, 0)], &b).unwrap().values()[0], 1.0);
    }

    #[test]
    fn nabla_x_is_z() {
        let b = bundle("poly_perturbation?n=4,seed=2,eps=0.1,d=2", &[0.1, 0.0, 0.2, -0.1], 3);
        let x = unit_tractor(b.chart(), Letter::X, 1.0).truncate(1);
        let dx = b.nabla(&x).unwrap(); // [a, A]
        for a in 0..4 {
            for i in 0..6 {
                let want = if (1..=4).contains(&i) { b.metric.g.value(&[a, i - 1]) } else { 0.0 };
                assert_eq!(dx.value(&[a, i]), want);
            }
        }
    }

    #[test]
    fn d_of_unit_density() {
        let b = bundle("poly_perturbation?n=5,seed=3,eps=0.1,d=2", &[0.0; 5], 4);
        let sigma = TensorJet::scalar(&b.chart().constant(1.0).truncate(2), 5, 1.0);
        let d = tractor_d(&sigma, &b).unwrap();
        let j = b.j.values()[0];
        assert!((d.value(&[0]) - 5.0).abs() < 1e-12);
        assert!((d.value(&[6]) + j).abs() < 1e-12);
        for a in 1..=5 {
            assert!(d.value(&[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_tractor_parallel_on_sphere() {
        let b = bundle("sphere_stereo?n=4,r=2", &[0.1, 0.2, -0.3, 0.0], 3);
        let i = scale_tractor(&b);
        assert!(b.nabla(&i).unwrap().max_abs_value() < 1e-10);
        let p = bundle("poly_perturbation?n=4,seed=1,eps=0.1,d=2", &[0.0; 4], 3);
        assert!(p.nabla(&scale_tractor(&p)).unwrap().max_abs_value() > 1e-3);
    }

    #[test]
    fn w_is_zero_when_conformally_flat() {
        let b = bundle("conformally_flat?n=5,omega=0.2*x0 - 0.1*x1*x2", &[0.1, 0.2, 0.3, 0.0, 0.0], 4);
        let w = w_tractor(&b).unwrap();
        assert!(w.max_abs_value() < 1e-10);
    }

    #[test]
    fn coefficient_words_round_trip() {
        let b = bundle("poly_perturbation?n=5,seed=4,eps=0.1,d=2", &[0.0; 5], 4);
        let w = w_tractor(&b).unwrap();
        let xzxz = coefficient(&w, &Letter::parse_word("XZXZ").unwrap()).unwrap();
        assert!(max_diff(&xzxz, &b.bach().unwrap().permute(&[1, 0])) < 1e-12);
        assert_eq!(xzxz.weight(), -2.0);
        let zzzz = coefficient(&w, &Letter::parse_word("ZZZZ").unwrap()).unwrap();
        assert!(max_diff(&zzzz, &b.weyl.at_point()) < 1e-12);
        assert_eq!(zzzz.weight(), 2.0);
        let yzzz = coefficient(&w, &Letter::parse_word("YZZZ").unwrap()).unwrap();
        assert_eq!(yzzz.max_abs_value(), 0.0);
    }

    #[test]
    fn hash_annihilates_tractor_metric() {
        let b = bundle("poly_perturbation?n=6,seed=5,eps=0.1,d=2", &[0.0; 6], 4);
        let w = w_tractor(&b).unwrap().at_point();
        let h = crate::tensor::tractor_metric(&b, false).at_point();
        let out = hash_double(&w, &h, &b).unwrap();
        assert!(out.max_abs_value() < 1e-10 * w.max_abs_value().max(1.0));
    }

    #[test]
    fn rescale_identity_and_pairing() {
        let b = bundle("poly_perturbation?n=4,seed=6,eps=0.1,d=2", &[0.1, 0.0, 0.0, 0.2], 3);
        let chart = b.chart();
        let v = random_tensor(chart.space(), 4, 1, vec![Slot::TrLow], 1.0, 9);
        let zero = chart.constant(0.0);
        let same = rescale_components(&v, &zero, &b).unwrap();
        assert!(max_diff(&same, &v.truncate(same.degree())) < 1e-15);
    }
}
