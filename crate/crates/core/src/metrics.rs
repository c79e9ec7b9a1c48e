//! Metric specifications, builtin test metrics and lifting to jets.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::jets::{Jet, JetSpace};
use crate::tensor::{MetricPair, Slot, TensorJet};

/// A metric given by closed-form entries on a single coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub dim: usize,
    pub signature: Vec<i8>,
    /// Full symmetric `dim × dim` matrix of entries.
    pub entries: Vec<Vec<Expr>>,
    pub name: Option<String>,
}

/// A conformal factor `ω`, relating `ĝ = e^{2ω} g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    pub omega: Expr,
}

impl ConformalFactor {
    pub fn parse(text: &str, dim: usize) -> Result<ConformalFactor> {
        Ok(ConformalFactor {
            omega: Expr::parse_in(text, dim)?,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    dim: usize,
    #[serde(default)]
    signature: Option<Vec<i8>>,
    entries: Vec<Vec<String>>,
    #[serde(default)]
    name: Option<String>,
}

fn entry_error(i: usize, j: usize, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("entry [{i}][{j}]: {message}"),
        },
        Error::UnknownIdentifier(s) => Error::UnknownIdentifier(format!("{s} in entry [{i}][{j}]")),
        other => other,
    }
}

/// Parses the JSON metric format. `entries` is either the full matrix or its
/// lower triangle (row `i` holding `i + 1` entries).
pub fn parse_metric(text: &str) -> Result<MetricSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = raw.dim;
    if n < 3 {
        return Err(Error::InvalidSpec(format!("dim must be at least 3, got {n}")));
    }
    if raw.entries.len() != n {
        return Err(Error::InvalidSpec(format!("{} entry rows for dim {n}", raw.entries.len())));
    }
    let triangular = raw.entries.iter().enumerate().all(|(i, r)| r.len() == i + 1);
    let full = raw.entries.iter().all(|r| r.len() == n);
    if !triangular && !full {
        return Err(Error::InvalidSpec(
            "entries must be a full n×n matrix or its lower triangle".into(),
        ));
    }
    let mut entries = vec![vec![Expr::Const(0.0); n]; n];
    for (i, row) in raw.entries.iter().enumerate() {
        for (j, text) in row.iter().enumerate() {
            entries[i][j] = Expr::parse_in(text, n).map_err(|e| entry_error(i, j, e))?;
        }
    }
    if full {
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidSpec(format!(
                        "entries [{i}][{j}] and [{j}][{i}] differ"
                    )));
                }
            }
        }
    } else {
        for i in 0..n {
            for j in i + 1..n {
                entries[i][j] = entries[j][i].clone();
            }
        }
    }
    let signature = match raw.signature {
        Some(s) if s.len() != n || s.iter().any(|&v| v != 1 && v != -1) => {
            return Err(Error::InvalidSpec("signature must list n entries of ±1".into()))
        }
        Some(s) => s,
        None => vec![1; n],
    };
    Ok(MetricSpec {
        dim: n,
        signature,
        entries,
        name: raw.name,
    })
}

impl MetricSpec {
    pub fn diagonal(dim: usize, factor: Expr, name: String) -> MetricSpec {
        let mut entries = vec![vec![Expr::Const(0.0); dim]; dim];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = factor.clone();
        }
        MetricSpec {
            dim,
            signature: vec![1; dim],
            entries,
            name: Some(name),
        }
    }

    /// Coordinates appearing in any entry.
    pub fn coords(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.entries.iter().flatten().flat_map(Expr::coords).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Serializes back to the JSON format (lower triangle).
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..=i).map(|j| self.entries[i][j].to_string()).collect())
            .collect();
        let mut v = serde_json::json!({
            "dim": self.dim,
            "signature": self.signature,
            "entries": entries,
        });
        if let Some(name) = &self.name {
            v["name"] = serde_json::Value::String(name.clone());
        }
        v
    }

    /// Plain metric matrix at a point.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.entries[i][j].eval(x)?;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }
}

/// `ĝ = e^{2ω} g` as expression trees.
pub fn rescale_metric(spec: &MetricSpec, omega: &ConformalFactor) -> MetricSpec {
    if omega.omega.is_zero() {
        return spec.clone();
    }
    let factor = Expr::call(Func::Exp, Expr::mul(Expr::Const(2.0), omega.omega.clone()));
    let entries = spec
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    if e.is_zero() {
                        e.clone()
                    } else {
                        Expr::mul(factor.clone(), e.clone())
                    }
                })
                .collect()
        })
        .collect();
    MetricSpec {
        dim: spec.dim,
        signature: spec.signature.clone(),
        entries,
        name: spec.name.as_ref().map(|n| format!("{n} (rescaled)")),
    }
}

/// Parameters of a builtin metric, kept as raw strings.
pub type Params = BTreeMap<String, String>;

/// Splits `k=v,k=v` on commas that are not inside parentheses.
pub fn parse_params(text: &str) -> Result<Params> {
    let mut out = Params::new();
    if text.trim().is_empty() {
        return Ok(out);
    }
    let mut depth = 0i32;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&text[start..]);
    for p in pieces {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::InvalidParam(format!("`{p}` is not key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn param<T: std::str::FromStr>(params: &Params, key: &str, default: Option<T>) -> Result<T> {
    match params.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| Error::InvalidParam(format!("{key} = `{v}` is not valid"))),
        None => default.ok_or_else(|| Error::InvalidParam(format!("missing parameter `{key}`"))),
    }
}

fn check_keys(params: &Params, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParam(format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "flat",
    "sphere_stereo",
    "conformally_flat",
    "einstein_product",
    "poly_perturbation",
];

/// One-line description and parameter list of each builtin.
pub fn builtin_help() -> Vec<(&'static str, &'static str)> {
    vec![
        ("flat", "n: identity metric"),
        ("sphere_stereo", "n, r=1: round sphere of radius r, 4r^4/(r^2+|x|^2)^2 δ"),
        ("conformally_flat", "n, omega=<expr>: e^{2ω} δ"),
        ("einstein_product", "p, q: S^p(1) × S^q(r), r^2 = (q-1)/(p-1), p,q ≥ 2"),
        (
            "poly_perturbation",
            "n, seed=0, eps=0.05, d=3, k=n: δ + eps·h with h random of degree d in x0..x{k-1}",
        ),
    ]
}

fn stereo_factor(coords: std::ops::Range<usize>, r: f64) -> Expr {
    // 4 r^4 / (r^2 + |x|^2)^2
    let mut s = Expr::Const(r * r);
    for i in coords {
        s = Expr::add(s, Expr::mul(Expr::coord(i), Expr::coord(i)));
    }
    Expr::div(Expr::Const(4.0 * r.powi(4)), Expr::pow(s, 2.0))
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParam(format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

/// Monomials in `k` variables of total degree ≤ `d`, graded then lexicographic.
fn monomials(k: usize, d: usize) -> Vec<Vec<usize>> {
    let space = JetSpace::get(k, d);
    (0..space.len(d))
        .map(|i| space.exponent(i).iter().map(|&e| e as usize).collect())
        .collect()
}

/// `δ + ε·h`: each `h_ij` (i ≤ j, row-major) is a random polynomial of degree ≤ `d`
/// in `x0..x{k-1}` whose coefficients, in graded-lex monomial order, are drawn
/// uniformly from [−1, 1] by ChaCha8 seeded with `seed`.
pub fn poly_perturbation(n: usize, seed: u64, eps: f64, d: usize, k: usize) -> Result<MetricSpec> {
    check_dim(n)?;
    if k == 0 || k > n {
        return Err(Error::InvalidParam(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monos = monomials(k, d);
    let mut entries = vec![vec![Expr::Const(0.0); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut h: Option<Expr> = None;
            for m in &monos {
                let c: f64 = rng.gen_range(-1.0..=1.0);
                let mut term = Expr::Const(eps * c);
                for (v, &e) in m.iter().enumerate() {
                    for _ in 0..e {
                        term = Expr::mul(term, Expr::coord(v));
                    }
                }
                h = Some(match h {
                    None => term,
                    Some(acc) => Expr::add(acc, term),
                });
            }
            let mut e = h.unwrap_or(Expr::Const(0.0));
            if i == j {
                e = Expr::add(Expr::Const(1.0), e);
            }
            entries[i][j] = e.clone();
            entries[j][i] = e;
        }
    }
    Ok(MetricSpec {
        dim: n,
        signature: vec![1; n],
        entries,
        name: Some(format!("poly_perturbation(n={n},seed={seed},eps={eps},d={d},k={k})")),
    })
}

pub fn builtin_metric(name: &str, params: &Params) -> Result<MetricSpec> {
    match name {
        "flat" => {
            check_keys(params, &["n"])?;
            let n = param(params, "n", None)?;
            check_dim(n)?;
            Ok(MetricSpec::diagonal(n, Expr::Const(1.0), format!("flat(n={n})")))
        }
        "sphere_stereo" => {
            check_keys(params, &["n", "r"])?;
            let n = param(params, "n", None)?;
            let r: f64 = param(params, "r", Some(1.0))?;
            check_dim(n)?;
            if r <= 0.0 {
                return Err(Error::InvalidParam(format!("radius must be positive, got {r}")));
            }
            Ok(MetricSpec::diagonal(n, stereo_factor(0..n, r), format!("sphere_stereo(n={n},r={r})")))
        }
        "conformally_flat" => {
            check_keys(params, &["n", "omega"])?;
            let n = param(params, "n", None)?;
            check_dim(n)?;
            let text: String = param(params, "omega", None)?;
            let omega = ConformalFactor::parse(&text, n)?;
            let flat = MetricSpec::diagonal(n, Expr::Const(1.0), String::new());
            let mut spec = rescale_metric(&flat, &omega);
            spec.name = Some(format!("conformally_flat(n={n},omega={text})"));
            Ok(spec)
        }
        "einstein_product" => {
            check_keys(params, &["p", "q"])?;
            let p: usize = param(params, "p", None)?;
            let q: usize = param(params, "q", None)?;
            if p < 2 || q < 2 {
                return Err(Error::InvalidParam(format!(
                    "einstein_product needs p, q ≥ 2, got p = {p}, q = {q}"
                )));
            }
            let r = (((q - 1) as f64) / ((p - 1) as f64)).sqrt();
            let n = p + q;
            let mut entries = vec![vec![Expr::Const(0.0); n]; n];
            let f1 = stereo_factor(0..p, 1.0);
            let f2 = stereo_factor(p..n, r);
            for (i, row) in entries.iter_mut().enumerate() {
                row[i] = if i < p { f1.clone() } else { f2.clone() };
            }
            Ok(MetricSpec {
                dim: n,
                signature: vec![1; n],
                entries,
                name: Some(format!("einstein_product(p={p},q={q})")),
            })
        }
        "poly_perturbation" => {
            check_keys(params, &["n", "seed", "eps", "d", "k"])?;
            let n = param(params, "n", None)?;
            let seed = param(params, "seed", Some(0))?;
            let eps = param(params, "eps", Some(0.05))?;
            let d = param(params, "d", Some(3))?;
            let k = param(params, "k", Some(n))?;
            poly_perturbation(n, seed, eps, d, k)
        }
        other => Err(Error::UnknownMetric(other.to_string())),
    }
}

/// `name?k=v,...` form used on the command line.
pub fn builtin_from_query(query: &str) -> Result<MetricSpec> {
    let (name, rest) = query.split_once('?').unwrap_or((query, ""));
    builtin_metric(name.trim(), &parse_params(rest)?)
}

/// The coordinate chart a computation lives in: base point, jet degree, and the
/// map from coordinates to jet variables. Coordinates no input depends on carry
/// no jet variable; every jet is constant along them.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    pub point: Vec<f64>,
    pub degree: usize,
    active: Vec<Option<usize>>,
    space: Arc<JetSpace>,
}

impl Chart {
    pub fn new(dim: usize, point: &[f64], degree: usize, active_coords: &[usize]) -> Result<Chart> {
        if point.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, metric has dim {dim}",
                point.len()
            )));
        }
        let mut active = vec![None; dim];
        for &c in active_coords {
            if c >= dim {
                return Err(Error::UnknownIdentifier(format!("x{c}")));
            }
            active[c] = Some(0);
        }
        // variables follow coordinate order
        let mut v = 0;
        for a in active.iter_mut().flatten() {
            *a = v;
            v += 1;
        }
        Ok(Chart {
            dim,
            point: point.to_vec(),
            degree,
            active,
            space: JetSpace::get(v, degree),
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Jet variable carried by coordinate `i`, if any.
    pub fn var(&self, i: usize) -> Option<usize> {
        self.active[i]
    }

    pub fn active_count(&self) -> usize {
        self.space.nvars()
    }

    pub fn coordinate(&self, i: usize) -> Jet {
        match self.active[i] {
            Some(v) => Jet::variable(&self.space, self.degree, v, self.point[i]),
            None => Jet::constant(&self.space, self.degree, self.point[i]),
        }
    }

    pub fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.space, self.degree, c)
    }

    pub fn lift(&self, e: &Expr) -> Result<Jet> {
        e.eval_jet(&|i| self.coordinate(i), &|c| self.constant(c))
    }

    /// Monomial exponent in chart coordinates for a jet coefficient index.
    pub fn coordinate_exponent(&self, mono: usize) -> Vec<u8> {
        let e = self.space.exponent(mono);
        self.active.iter().map(|a| a.map_or(0, |v| e[v])).collect()
    }
}

/// A metric lifted to jets at one point: `g_ab` (weight 2) and `g^ab` (weight −2).
#[derive(Debug, Clone)]
pub struct Metric {
    pub chart: Arc<Chart>,
    pub g: TensorJet,
    pub g_inv: TensorJet,
}

impl MetricPair for Metric {
    fn g(&self) -> &TensorJet {
        &self.g
    }
    fn g_inv(&self) -> &TensorJet {
        &self.g_inv
    }
}

pub fn lift_metric(spec: &MetricSpec, point: &[f64], degree: usize) -> Result<Metric> {
    lift_metric_with(spec, point, degree, &[])
}

/// Lifts with additional expressions (such as a conformal factor) sharing the chart.
pub fn lift_metric_with(spec: &MetricSpec, point: &[f64], degree: usize, extra: &[&Expr]) -> Result<Metric> {
    let mut coords = spec.coords();
    for e in extra {
        coords.extend(e.coords());
    }
    let chart = Chart::new(spec.dim, point, degree, &coords)?;
    lift_in_chart(spec, Arc::new(chart))
}

pub fn lift_in_chart(spec: &MetricSpec, chart: Arc<Chart>) -> Result<Metric> {
    let n = spec.dim;
    if chart.dim != n {
        return Err(Error::DimensionMismatch(format!("chart dim {} vs metric dim {n}", chart.dim)));
    }
    let mut jets = vec![chart.constant(0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = chart.lift(&spec.entries[i][j])?;
            jets[i * n + j] = v.clone();
            jets[j * n + i] = v;
        }
    }
    let inv = invert(&jets, n)?;
    Ok(Metric {
        g: TensorJet::from_jets(n, vec![Slot::Cov, Slot::Cov], 2.0, &jets)?,
        g_inv: TensorJet::from_jets(n, vec![Slot::Con, Slot::Con], -2.0, &inv)?,
        chart,
    })
}

/// Gauss-Jordan elimination over jets with partial pivoting on base values.
pub fn invert(m: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let space = Arc::clone(m[0].space());
    let degree = m.iter().map(Jet::degree).min().unwrap_or(0);
    let mut a: Vec<Jet> = m.iter().map(|j| j.truncate(degree)).collect();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(&space, degree, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let scales: Vec<f64> = (0..n)
        .map(|r| (0..n).fold(0.0f64, |s, c| s.max(a[r * n + c].value().abs())))
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[x * n + col]
                    .value()
                    .abs()
                    .partial_cmp(&a[y * n + col].value().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        let pv = a[piv * n + col].value();
        // negated so that a NaN pivot is also rejected
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let singular = !(pv.abs() > 1e-10 * scales[piv].max(f64::MIN_POSITIVE));
        if singular {
            return Err(Error::Singular { row: col, pivot: pv });
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
                inv.swap(piv * n + c, col * n + c);
            }
        }
        let r = a[col * n + col].recip()?;
        for c in 0..n {
            a[col * n + c] = a[col * n + c].mul(&r)?;
            inv[col * n + c] = inv[col * n + c].mul(&r)?;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            if f.coeffs().iter().all(|&v| v == 0.0) {
                continue;
            }
            for c in 0..n {
                let da = f.mul(&a[col * n + c])?;
                a[row * n + c] = a[row * n + c].sub(&da)?;
                let di = f.mul(&inv[col * n + c])?;
                inv[row * n + c] = inv[row * n + c].sub(&di)?;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> MetricSpec {
        builtin_from_query(s).unwrap()
    }

    #[test]
    fn flat_lift_is_identity() {
        let m = lift_metric(&q("flat?n=3"), &[0.3, -1.0, 2.0], 4).unwrap();
        assert_eq!(m.chart.active_count(), 0);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert_eq!(m.g.value(&[a, b]), want);
                assert_eq!(m.g_inv.value(&[a, b]), want);
            }
        }
    }

    #[test]
    fn sphere_at_origin() {
        let m = lift_metric(&q("sphere_stereo?n=3,r=1"), &[0.0; 3], 2).unwrap();
        assert_eq!(m.g.value(&[0, 0]), 4.0);
        assert_eq!(m.g.value(&[0, 1]), 0.0);
        assert_eq!(m.g_inv.value(&[2, 2]), 0.25);
    }

    #[test]
    fn einstein_product_radius() {
        let s = q("einstein_product?p=2,q=4");
        assert_eq!(s.dim, 6);
        // second block: 4 r^4 / r^4 = 4 at the origin regardless of r; slope differs
        let v = s.eval(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let r2: f64 = 3.0;
        assert!((v[2 * 6 + 2] - 4.0 * r2 * r2 / (r2 + 1.0).powi(2)).abs() < 1e-14);
        assert!(matches!(
            builtin_from_query("einstein_product?p=1,q=3"),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(builtin_from_query("torus?n=3"), Err(Error::UnknownMetric(_))));
        assert!(matches!(builtin_from_query("flat"), Err(Error::InvalidParam(_))));
        assert!(matches!(builtin_from_query("flat?n=3,z=1"), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn params_split_outside_parentheses() {
        let p = parse_params("n=4,omega=pow(1 + x0, 2) - x1").unwrap();
        assert_eq!(p["omega"], "pow(1 + x0, 2) - x1");
        let s = q("conformally_flat?n=4,omega=pow(1 + x0, 2) - x1");
        assert_eq!(s.coords(), vec![0, 1]);
    }

    #[test]
    fn poly_perturbation_is_seeded_and_symmetric() {
        let a = q("poly_perturbation?n=6,seed=42,eps=0.05,d=3");
        let b = q("poly_perturbation?n=6,seed=42,eps=0.05,d=3");
        assert_eq!(a, b);
        let v = a.eval(&[0.0; 6]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(v[i * 6 + j], v[j * 6 + i]);
            }
            assert!((v[i * 6 + i] - 1.0).abs() <= 0.05);
        }
        let sparse = q("poly_perturbation?n=8,seed=1,eps=0.02,d=2,k=4");
        assert_eq!(sparse.coords(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn inverse_contract() {
        let m = lift_metric(&q("poly_perturbation?n=4,seed=3,eps=0.1,d=2"), &[0.1, 0.2, -0.1, 0.3], 3).unwrap();
        let id = TensorJet::einsum("ac,cb->ab", &[&m.g_inv, &m.g], None).unwrap();
        assert_eq!(id.weight(), 0.0);
        for a in 0..4 {
            for b in 0..4 {
                let j = id.jet(&[a, b]);
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((j.value() - want).abs() < 1e-12);
                assert!(j.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let text = r#"{"dim": 3, "entries": [["x0"], ["0", "1"], ["0", "0", "1"]]}"#;
        let spec = parse_metric(text).unwrap();
        assert!(matches!(lift_metric(&spec, &[0.0; 3], 1), Err(Error::Singular { .. })));
    }

    #[test]
    fn json_forms() {
        let full = r#"{"dim": 3, "entries": [["1","x0","0"],["x0","1","0"],["0","0","1"]], "name": "t"}"#;
        let tri = r#"{"dim": 3, "entries": [["1"],["x0","1"],["0","0","1"]]}"#;
        let a = parse_metric(full).unwrap();
        let b = parse_metric(tri).unwrap();
        assert_eq!(a.entries, b.entries);
        let again = parse_metric(&a.to_json().to_string()).unwrap();
        assert_eq!(again.entries, a.entries);
        let asym = r#"{"dim": 3, "entries": [["1","x0","0"],["x1","1","0"],["0","0","1"]]}"#;
        assert!(matches!(parse_metric(asym), Err(Error::InvalidSpec(_))));
        let bad = r#"{"dim": 3, "entries": [["1"],["exp(","1"],["0","0","1"]]}"#;
        match parse_metric(bad) {
            Err(Error::Parse { column, message, .. }) => {
                assert_eq!(column, 4);
                assert!(message.contains("[1][0]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rescale_by_zero_is_identity() {
        let s = q("sphere_stereo?n=3");
        let w = ConformalFactor { omega: Expr::Const(0.0) };
        assert_eq!(rescale_metric(&s, &w), s);
    }
}
