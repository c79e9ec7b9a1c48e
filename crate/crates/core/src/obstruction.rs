//! The Fefferman-Graham obstruction tensor in dimensions 4, 6 and 8, by direct
//! Levi-Civita formulas and by tractor formulas.

use crate::curvature::CurvatureBundle;
use crate::error::{Error, Result};
use crate::formula::{parse_table, Evaluator, Term};
use crate::tensor::{Slot, TensorJet};
use crate::tractor::{add_word, box1_alpha_with, coefficient, w_tractor, Box2Parts, Letter, TractorJet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    Tractor,
}

/// Residuals are absolute; compare them against `scale`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    /// `max(1, largest term magnitude)` of the evaluated formula.
    pub scale: f64,
    pub trace_residual: f64,
    pub symmetry_residual: f64,
    pub divergence_residual: Option<f64>,
    pub upper_slot_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ObstructionResult {
    pub dim: usize,
    /// `ℬ_ab`, weight `2 − n`.
    pub b: TensorJet,
    pub route: Route,
    pub diagnostics: Diagnostics,
}

/// The dimension-6 obstruction in terms of Bach, Cotton, Weyl and Schouten.
pub const DIM6_TERMS: &[&str] = &[
    "1/16 B_ab|cc",
    "-1/4 J B_ab",
    "1/8 B_cd C_acbd",
    "-1/2 P_cd A_(ab)d|c",
    "1/4 A_cad A_cbd",
    "-1/2 A_cad A_dbc",
    "-1/4 A_(ab)c J_|c",
    "1/4 P_cd P_de C_acbe",
];

/// The tensor `S_ab` of the dimension-8 formula, term by term.
pub const DIM8_TERMS: &[&str] = &[
    "-1 B_ab|ccdd",
    "10 B_ab|cc J",
    "-28 B_ab|cd P_cd",
    "24 B_ac|bd P_cd",
    "-4 B_cd|ee C_acbd",
    "-24 B_ac|d P_bc|d",
    "-24 B_cd|a P_bc|d",
    "56 B_ac|d P_bd|c",
    "-6 B_ab|c J_|c",
    "12 B_ac|b J_|c",
    "24 B_cd|a P_cd|b",
    "-32 B_ac|d P_cd|b",
    "-4 B_cd|e C_acbd|e",
    "4 B_ab J_|cc",
    "-16 B_cd P_cd|ab",
    "-40 B_cd P_ab|cd",
    "56 B_cd P_ac|bd",
    "-8 B_ac B_bc",
    "3 B_cd B_cd g_ab",
    "-24 B_ab J J",
    "-64 B_ac P_bd P_cd",
    "76 B_ab P_cd P_cd",
    "28 B_cd g_ab P_ce P_de",
    "16 B_cd J C_acbd",
    "32 B_cd P_ae C_bcde",
    "-24 B_cd P_ce C_adbe",
    "4 B_cd C_aeci C_bedi",
    "-8 B_cd C_aeci C_bide",
    "-8 A_acb J_|ddc",
    "-32 A_acb|de P_cd|e",
    "-16 A_acd|e A_bcd|e",
    "16 A_cda|e A_cdb|e",
    "-32 A_acb|d J_|cd",
    "32 A_cad|e P_be P_cd",
    "-64 A_abc|d P_cd J",
    "-128 A_acd|e P_bd P_ce",
    "-128 A_cad|e P_bd P_ce",
    "-608 A_acb|d P_ce P_de",
    "-32 A_cad|b P_ce P_de",
    "32 A_acd|e P_ei C_bcdi",
    "32 A_cad|e P_ei C_bcdi",
    "32 A_acd|e P_di C_bcei",
    "32 A_cad|e P_di C_bcei",
    "-64 A_abc|d P_ei C_cedi",
    "32 P_cd P_ei C_acbe|di",
    "32 P_cd J_|e C_acbe|d",
    "32 A_cde P_di C_acbe|i",
    "32 A_cde P_di C_acbi|e",
    "64 A_acd P_ei C_bcde|i",
    "64 A_cad P_ei C_bcde|i",
    "8 J_|c J_|d C_acbd",
    "-16 P_cd|e P_ci|e C_adbi",
    "32 A_cad J_|e C_bcde",
    "-32 A_cad J_|e C_becd",
    "-16 A_cde A_cdi C_aibe",
    "32 A_cde A_dci C_aibe",
    "-32 A_acd A_edi C_beci",
    "-32 A_cad A_dei C_beci",
    "-32 A_cad A_eic C_bide",
    "64 A_cad A_ebi C_cdei",
    "-32 A_cad A_ebi C_cedi",
    "-64 A_acd P_bd J_|c",
    "-64 A_cad P_bd J_|c",
    "-32 A_abc J J_|c",
    "-16 A_cda P_cd J_|b",
    "-224 A_acb P_cd J_|d",
    "-96 A_cad A_ecd P_be",
    "-192 A_cad A_cde P_be",
    "-224 A_acb P_de P_cd|e",
    "-96 A_abc A_dce P_de",
    "-320 A_cad A_ebd P_ce",
    "736 A_cad A_dbe P_ce",
    "-96 A_acd P_bd|e P_ce",
    "-96 A_cad P_bd|e P_ce",
    "-192 A_cad A_cbe P_de",
    "16 P_cd P_ce C_aidj C_biej",
    "-32 P_cd P_ce C_aidj C_bjei",
    "-32 P_cd P_ei C_ajbc C_deij",
    "4 g_ab P_cd P_ei C_cjek C_dijk",
    "-4 g_ab P_cd P_ei C_cejk C_djik",
    "-32 P_cd P_ei P_ei C_acbd",
    "32 P_cd P_ce J C_adbe",
    "-224 P_cd P_ei P_ce C_adbi",
    "150 g_ab P_cd P_ei P_ej C_cidj",
    "150 g_ab P_cd P_ei P_cj C_deij",
    "-32 P_ac P_de P_ci C_bdei",
    "-64 P_ac P_de P_di C_beci",
];

/// Overall factor in `ℬ = S_(ab) / 384`.
pub const DIM8_FACTOR: f64 = 1.0 / 384.0;

fn require_dim(ctx: &CurvatureBundle, n: usize) -> Result<()> {
    if ctx.n() != n {
        return Err(Error::WrongDimension {
            expected: n.to_string(),
            actual: ctx.n(),
        });
    }
    Ok(())
}

fn output_degree(ctx: &CurvatureBundle, order: usize, op: &'static str) -> Result<usize> {
    ctx.degree().checked_sub(order).ok_or(Error::DegreeExhausted {
        op,
        needed: order,
        available: ctx.degree(),
    })
}

/// `∇^a ℬ_ab`; in the trivialization of its own scale the density weight adds no term.
pub fn divergence(b: &TensorJet, ctx: &CurvatureBundle) -> Result<TensorJet> {
    if b.degree() == 0 {
        return Err(Error::DegreeExhausted {
            op: "divergence",
            needed: 1,
            available: 0,
        });
    }
    let db = ctx.nabla(b)?;
    TensorJet::einsum("aab->b", &[&db], Some(ctx))
}

fn diagnostics(b: &TensorJet, ctx: &CurvatureBundle, scale: f64, upper: Option<f64>) -> Result<Diagnostics> {
    let tr = TensorJet::einsum("aa->", &[b], Some(ctx))?.max_abs_value();
    let sym = b.sub(&b.permute(&[1, 0]))?.max_abs_value();
    let div = if b.degree() >= 1 {
        Some(divergence(b, ctx)?.max_abs_value())
    } else {
        None
    };
    Ok(Diagnostics {
        scale: scale.max(1.0),
        trace_residual: tr,
        symmetry_residual: sym,
        divergence_residual: div,
        upper_slot_residual: upper,
    })
}

fn result(dim: usize, b: TensorJet, route: Route, ctx: &CurvatureBundle, scale: f64, upper: Option<f64>) -> Result<ObstructionResult> {
    let diagnostics = diagnostics(&b, ctx, scale, upper)?;
    Ok(ObstructionResult {
        dim,
        b,
        route,
        diagnostics,
    })
}

/// `ℬ = −½ B` in dimension 4.
pub fn obstruction4(ctx: &CurvatureBundle) -> Result<ObstructionResult> {
    require_dim(ctx, 4)?;
    let bach = ctx.bach()?;
    let b = bach.scale(-0.5).with_weight(-2.0);
    let scale = bach.max_abs_value() * 0.5;
    result(4, b, Route::Direct, ctx, scale, None)
}

fn direct(ctx: &CurvatureBundle, table: &[&str], n: usize, op: &'static str) -> Result<(TensorJet, f64)> {
    require_dim(ctx, n)?;
    let d = output_degree(ctx, n, op)?;
    let terms: Vec<Term> = parse_table(table, "ab")?;
    let ev = Evaluator::new(ctx, &terms, d)?;
    ev.sum(&terms, "ab")
}

/// The eight-term dimension-6 formula.
pub fn obstruction6_direct(ctx: &CurvatureBundle) -> Result<ObstructionResult> {
    let (b, largest) = direct(ctx, DIM6_TERMS, 6, "obstruction6_direct")?;
    result(6, b.with_weight(-4.0), Route::Direct, ctx, largest, None)
}

/// `S_(ab) / 384` from the dimension-8 table.
pub fn obstruction8_direct(ctx: &CurvatureBundle) -> Result<ObstructionResult> {
    let (s, largest) = direct(ctx, DIM8_TERMS, 8, "obstruction8_direct")?;
    let b = s.symmetrize(&[0, 1])?.scale(DIM8_FACTOR).with_weight(-6.0);
    result(8, b, Route::Direct, ctx, largest * DIM8_FACTOR, None)
}

/// Splits a valence-4 tractor into its `XZXZ` coefficient and the largest
/// deviation from the pure form `4 c X_[A Z_B] X_[C Z_E]`.
pub fn bottom_slot(t: &TractorJet) -> Result<(TensorJet, f64)> {
    use Letter::{X, Z};
    let c = coefficient(t, &[X, Z, X, Z])?;
    let mut pure = TensorJet::zeros(t.space(), t.n(), t.degree(), vec![Slot::TrLow; 4], t.weight());
    add_word(&mut pure, &[X, Z, X, Z], 1.0, &c)?;
    add_word(&mut pure, &[X, Z, Z, X], -1.0, &c)?;
    add_word(&mut pure, &[Z, X, X, Z], -1.0, &c)?;
    add_word(&mut pure, &[Z, X, Z, X], 1.0, &c)?;
    let resid = t.sub(&pure)?.max_abs_value();
    Ok((c, resid))
}

/// `ℬ = (1/16) Y^B Z^C_a Y^D Z^E_b (□W + ¼ W##W)`.
pub fn obstruction6_tractor(ctx: &CurvatureBundle) -> Result<ObstructionResult> {
    require_dim(ctx, 6)?;
    output_degree(ctx, 6, "obstruction6_tractor")?;
    let w = w_tractor(ctx)?;
    let t = box1_alpha_with(&w, 0.5, &w, ctx)?;
    let (c, upper) = bottom_slot(&t)?;
    let f = 1.0 / 16.0;
    let bx = crate::tractor::tractor_box(&w, ctx)?;
    let scale = f * bx.max_abs_value().max(t.sub(&bx)?.max_abs_value());
    let b = c.scale(f).with_weight(-4.0);
    result(6, b, Route::Tractor, ctx, scale, Some(f * upper))
}

/// Weights of the parts of `Box2Parts` in the dimension-8 tractor formula,
/// before the overall `1/24576`.
pub const BOX2_WEIGHTS: [f64; 6] = [64.0, 32.0, 1.0, 0.0, -4.0, -3.0];

/// Overall factor of the dimension-8 tractor formula.
pub const BOX2_FACTOR: f64 = 1.0 / 24576.0;

/// `ℬ = (1/24576) Y^B Z^C_a Y^D Z^E_b (64 Y^A □D_A W + 32 Σ Y^A W_A^P_·^Q D_P W_..Q..
/// + Y^A W##X_A W##W − 3 W##W##W − 4 (D_|I|W)##D^|I|W)`.
pub fn obstruction8_tractor(ctx: &CurvatureBundle) -> Result<ObstructionResult> {
    require_dim(ctx, 8)?;
    output_degree(ctx, 8, "obstruction8_tractor")?;
    let w = w_tractor(ctx)?;
    let parts = Box2Parts::new(&w, &w, ctx)?;
    let list = [
        &parts.y_box_d,
        &parts.y_w_dt,
        &parts.y_w_x_w,
        &parts.ww_t,
        &parts.dw_dt,
        &parts.w_w_t,
    ];
    let mut total = list[0].scale(0.0);
    let mut largest = 0.0f64;
    for (p, &k) in list.iter().zip(&BOX2_WEIGHTS) {
        if k != 0.0 {
            largest = largest.max(k.abs() * p.max_abs_value());
            total = total.axpy(k, p)?;
        }
    }
    let (c, upper) = bottom_slot(&total)?;
    let b = c.scale(BOX2_FACTOR).with_weight(-6.0);
    result(8, b, Route::Tractor, ctx, largest * BOX2_FACTOR, Some(upper * BOX2_FACTOR))
}

/// Dispatches on the bundle's dimension.
pub fn obstruction(ctx: &CurvatureBundle, route: Route) -> Result<ObstructionResult> {
    match (ctx.n(), route) {
        (4, _) => obstruction4(ctx),
        (6, Route::Direct) => obstruction6_direct(ctx),
        (6, Route::Tractor) => obstruction6_tractor(ctx),
        (8, Route::Direct) => obstruction8_direct(ctx),
        (8, Route::Tractor) => obstruction8_tractor(ctx),
        (n, _) => Err(Error::WrongDimension {
            expected: "4, 6 or 8".into(),
            actual: n,
        }),
    }
}
