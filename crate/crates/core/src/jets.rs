//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the plain monomial coefficients `c_α` of
//! `f(p + x) ≈ Σ_{|α| ≤ d} c_α x^α`. Coefficients are stored densely in
//! graded-lexicographic order, so truncating to a lower degree is a prefix
//! of the coefficient vector. All multiplication and differentiation tables
//! for a given variable count live in a shared [`JetSpace`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Enumeration of monomials plus the precomputed product and partial
/// derivative tables for jets in `nvars` variables up to `max_degree`.
pub struct JetSpace {
    nvars: usize,
    max_degree: usize,
    exponents: Vec<u8>,
    counts: Vec<usize>,
    mul: Vec<[u32; 3]>,
    mul_counts: Vec<usize>,
    partial: Vec<Vec<(u32, f64)>>,
    index: HashMap<Vec<u8>, u32>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("max_degree", &self.max_degree)
            .field("monomials", &self.len(self.max_degree))
            .finish()
    }
}

fn push_monomials(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=degree).rev() {
        prefix.push(e as u8);
        push_monomials(nvars, degree - e, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    /// Shared space for `nvars` variables, built for at least `degree`.
    pub fn get(nvars: usize, degree: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        if let Some(space) = guard.get(&nvars) {
            if space.max_degree >= degree {
                return Arc::clone(space);
            }
        }
        let space = Arc::new(JetSpace::build(nvars, degree));
        guard.insert(nvars, Arc::clone(&space));
        space
    }

    fn build(nvars: usize, max_degree: usize) -> JetSpace {
        let mut monomials: Vec<Vec<u8>> = Vec::new();
        let mut counts = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            if nvars == 0 {
                if d == 0 {
                    monomials.push(Vec::new());
                }
            } else {
                push_monomials(nvars, d, &mut Vec::new(), &mut monomials);
            }
            counts.push(monomials.len());
        }
        let index: HashMap<Vec<u8>, u32> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let degree_of = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut mul = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (i, a) in monomials.iter().enumerate() {
            let da = degree_of(a);
            for (j, b) in monomials.iter().enumerate() {
                if da + degree_of(b) > max_degree {
                    // graded order: all later b have degree at least as large
                    if degree_of(b) > max_degree - da {
                        break;
                    }
                    continue;
                }
                for v in 0..nvars {
                    sum[v] = a[v] + b[v];
                }
                let k = index[&sum];
                mul.push([i as u32, j as u32, k]);
            }
        }
        mul.sort_by_key(|t| (t[2], t[0], t[1]));
        let mul_counts = counts
            .iter()
            .map(|&c| mul.partition_point(|t| (t[2] as usize) < c))
            .collect();

        let mut partial = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let top = if max_degree == 0 { 0 } else { counts[max_degree - 1] };
            let mut table = Vec::with_capacity(top);
            for m in &monomials[..top] {
                let mut up = m.clone();
                up[v] += 1;
                table.push((index[&up], (m[v] as f64) + 1.0));
            }
            partial.push(table);
        }

        JetSpace {
            nvars,
            max_degree,
            exponents: monomials.concat(),
            counts,
            mul,
            mul_counts,
            partial,
            index,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of monomials of total degree at most `degree`.
    #[inline]
    pub fn len(&self, degree: usize) -> usize {
        self.counts[degree]
    }

    pub fn exponent(&self, index: usize) -> &[u8] {
        &self.exponents[index * self.nvars..(index + 1) * self.nvars]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.index.get(alpha).map(|&i| i as usize)
    }

    /// `out += coef * a * b`, truncated to `degree`.
    #[inline]
    pub fn mul_acc(&self, out: &mut [f64], a: &[f64], b: &[f64], coef: f64, degree: usize) {
        if degree == 0 {
            out[0] += coef * a[0] * b[0];
            return;
        }
        let n = self.counts[degree];
        let (out, a, b) = (&mut out[..n], &a[..n], &b[..n]);
        for t in &self.mul[..self.mul_counts[degree]] {
            out[t[2] as usize] += coef * a[t[0] as usize] * b[t[1] as usize];
        }
    }

    /// `out += coef * ∂_var a`, where `out` has degree `degree` (one less than `a`).
    #[inline]
    pub fn partial_acc(&self, out: &mut [f64], a: &[f64], var: usize, coef: f64, degree: usize) {
        let n = self.counts[degree];
        for (o, &(src, f)) in out[..n].iter_mut().zip(&self.partial[var][..n]) {
            *o += coef * f * a[src as usize];
        }
    }
}

/// Analytic functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Univariate {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Pow(f64),
}

impl Univariate {
    /// Taylor coefficients `f^{(k)}(x0)/k!` for `k = 0..=degree`.
    fn taylor(self, x0: f64, degree: usize) -> Result<Vec<f64>> {
        let mut c = Vec::with_capacity(degree + 1);
        match self {
            Univariate::Exp => {
                let e = x0.exp();
                let mut fact = 1.0;
                for k in 0..=degree {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    c.push(e / fact);
                }
            }
            Univariate::Log => {
                if x0 <= 0.0 {
                    return Err(Error::Domain(format!("log of non-positive value {x0}")));
                }
                c.push(x0.ln());
                for k in 1..=degree {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    c.push(sign / (k as f64 * x0.powi(k as i32)));
                }
            }
            Univariate::Sin | Univariate::Cos => {
                let (s, co) = x0.sin_cos();
                let cycle = match self {
                    Univariate::Sin => [s, co, -s, -co],
                    _ => [co, -s, -co, s],
                };
                let mut fact = 1.0;
                for k in 0..=degree {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    c.push(cycle[k % 4] / fact);
                }
            }
            Univariate::Sqrt => return Univariate::Pow(0.5).taylor(x0, degree),
            Univariate::Pow(r) => {
                let integral = r.fract() == 0.0;
                if !integral && x0 <= 0.0 {
                    return Err(Error::Domain(format!(
                        "non-integer power {r} of non-positive value {x0}"
                    )));
                }
                if integral && r < 0.0 && x0 == 0.0 {
                    return Err(Error::Domain(format!("negative power {r} of zero")));
                }
                // generalized binomial coefficients times x0^(r-k)
                let mut binom = 1.0;
                for k in 0..=degree {
                    if k > 0 {
                        binom *= (r - (k as f64 - 1.0)) / k as f64;
                    }
                    if binom == 0.0 {
                        c.push(0.0);
                        continue;
                    }
                    let p = r - k as f64;
                    let base = if integral { x0.powi(p as i32) } else { x0.powf(p) };
                    c.push(binom * base);
                }
            }
        }
        Ok(c)
    }
}

/// A truncated multivariate Taylor expansion of a scalar about a base point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    degree: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("degree", &self.degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>, degree: usize) -> Jet {
        assert!(degree <= space.max_degree, "degree beyond jet space");
        Jet {
            space: Arc::clone(space),
            degree,
            coeffs: vec![0.0; space.len(degree)],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, degree: usize, value: f64) -> Jet {
        let mut j = Jet::zero(space, degree);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `p + x_var`.
    pub fn variable(space: &Arc<JetSpace>, degree: usize, var: usize, base: f64) -> Jet {
        let mut j = Jet::constant(space, degree, base);
        if degree > 0 {
            let mut alpha = vec![0u8; space.nvars];
            alpha[var] = 1;
            let i = space.index_of(&alpha).expect("unit monomial");
            j.coeffs[i] = 1.0;
        }
        j
    }

    /// Builds a jet from coefficients in the space's monomial order.
    pub fn from_coeffs(space: &Arc<JetSpace>, degree: usize, coeffs: Vec<f64>) -> Result<Jet> {
        if coeffs.len() != space.len(degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a degree-{degree} jet with {} monomials",
                coeffs.len(),
                space.len(degree)
            )));
        }
        Ok(Jet {
            space: Arc::clone(space),
            degree,
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.space.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Plain monomial coefficient `c_α` (zero beyond the truncation degree).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        let d: usize = alpha.iter().map(|&e| e as usize).sum();
        if d > self.degree || alpha.len() != self.dim() {
            return 0.0;
        }
        self.space.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn truncate(&self, degree: usize) -> Jet {
        let degree = degree.min(self.degree);
        Jet {
            space: Arc::clone(&self.space),
            degree,
            coeffs: self.coeffs[..self.space.len(degree)].to_vec(),
        }
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "jets in {} and {} variables",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    fn bigger_space<'a>(&'a self, other: &'a Jet) -> &'a Arc<JetSpace> {
        if self.space.max_degree >= other.space.max_degree {
            &self.space
        } else {
            &other.space
        }
    }

    /// Truncated Cauchy product; the result degree is the smaller input degree.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let degree = self.degree.min(other.degree);
        let space = self.bigger_space(other);
        let mut out = Jet::zero(space, degree);
        space.mul_acc(&mut out.coeffs, &self.coeffs, &other.coeffs, 1.0, degree);
        Ok(out)
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet> {
        self.check_compatible(other)?;
        let degree = self.degree.min(other.degree);
        let n = self.space.len(degree);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Jet {
            space: Arc::clone(self.bigger_space(other)),
            degree,
            coeffs,
        })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `∂/∂x_var`; the result has degree one lower.
    pub fn partial(&self, var: usize) -> Result<Jet> {
        if var >= self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "partial along variable {var} of a jet in {} variables",
                self.dim()
            )));
        }
        if self.degree == 0 {
            return Err(Error::DegreeExhausted {
                op: "jet_partial",
                needed: 1,
                available: 0,
            });
        }
        let mut out = Jet::zero(&self.space, self.degree - 1);
        self.space
            .partial_acc(&mut out.coeffs, &self.coeffs, var, 1.0, self.degree - 1);
        Ok(out)
    }

    /// Value of `∂^α f` at the base point, i.e. `α!·c_α`.
    pub fn derivative_value(&self, alpha: &[u8]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "multi-index of length {} for a jet in {} variables",
                alpha.len(),
                self.dim()
            )));
        }
        let order: usize = alpha.iter().map(|&e| e as usize).sum();
        if order > self.degree {
            return Err(Error::DegreeExhausted {
                op: "jet_derivative_value",
                needed: order,
                available: self.degree,
            });
        }
        let fact: f64 = alpha
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        Ok(fact * self.coeff(alpha))
    }

    /// Composition `f ∘ self`, truncated to this jet's degree.
    pub fn apply(&self, f: Univariate) -> Result<Jet> {
        let x0 = self.coeffs[0];
        let taylor = f.taylor(x0, self.degree)?;
        let mut t = self.clone();
        t.coeffs[0] = 0.0;
        // Horner in the nilpotent part
        let mut acc = Jet::constant(&self.space, self.degree, taylor[self.degree]);
        for k in (0..self.degree).rev() {
            let mut next = Jet::constant(&self.space, self.degree, taylor[k]);
            self.space
                .mul_acc(&mut next.coeffs, &acc.coeffs, &t.coeffs, 1.0, self.degree);
            acc = next;
        }
        Ok(acc)
    }

    /// Integer power by repeated multiplication (exact for polynomial input).
    pub fn powi(&self, k: i32) -> Result<Jet> {
        if k < 0 {
            return self.powi(-k)?.apply(Univariate::Pow(-1.0));
        }
        let mut out = Jet::constant(&self.space, self.degree, 1.0);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn recip(&self) -> Result<Jet> {
        self.apply(Univariate::Pow(-1.0))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.mul(&other.recip()?)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, d: usize) -> Arc<JetSpace> {
        JetSpace::get(n, d)
    }

    #[test]
    fn monomial_counts_are_binomial() {
        let s = space(3, 4);
        // C(3 + d, d)
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(1), 4);
        assert_eq!(s.len(2), 10);
        assert_eq!(s.len(4), 35);
    }

    #[test]
    fn product_of_linear_factors() {
        let s = space(2, 2);
        let x = Jet::variable(&s, 2, 0, 1.0);
        let y = Jet::variable(&s, 2, 1, 1.0);
        let p = x.mul(&y).unwrap();
        assert_eq!(p.coeff(&[0, 0]), 1.0);
        assert_eq!(p.coeff(&[1, 0]), 1.0);
        assert_eq!(p.coeff(&[0, 1]), 1.0);
        assert_eq!(p.coeff(&[1, 1]), 1.0);
        assert_eq!(p.coeff(&[2, 0]), 0.0);
    }

    #[test]
    fn square_truncates_at_degree_one() {
        let s = space(1, 1);
        let x = Jet::variable(&s, 1, 0, 0.0);
        let sq = x.mul(&x).unwrap();
        assert!(sq.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = Jet::constant(&space(2, 1), 1, 1.0);
        let b = Jet::constant(&space(3, 1), 1, 1.0);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn exp_taylor() {
        let s = space(1, 3);
        let x = Jet::variable(&s, 3, 0, 0.0);
        let e = x.apply(Univariate::Exp).unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (k, w) in want.iter().enumerate() {
            assert!((e.coeff(&[k as u8]) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn sin_at_half_pi() {
        let s = space(1, 2);
        let x = Jet::variable(&s, 2, 0, std::f64::consts::FRAC_PI_2);
        let v = x.apply(Univariate::Sin).unwrap();
        assert!((v.coeff(&[0]) - 1.0).abs() < 1e-15);
        assert!(v.coeff(&[1]).abs() < 1e-15);
        assert!((v.coeff(&[2]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_is_geometric_series() {
        let s = space(1, 2);
        let x = Jet::variable(&s, 2, 0, 1.0);
        let r = x.apply(Univariate::Pow(-1.0)).unwrap();
        assert_eq!(r.coeffs(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn log_and_sqrt_need_positive_base() {
        let s = space(1, 2);
        let x = Jet::variable(&s, 2, 0, -1.0);
        assert!(matches!(x.apply(Univariate::Log), Err(Error::Domain(_))));
        assert!(matches!(x.apply(Univariate::Sqrt), Err(Error::Domain(_))));
        assert!(x.apply(Univariate::Pow(2.0)).is_ok());
        assert!(x.apply(Univariate::Pow(-3.0)).is_ok());
    }

    #[test]
    fn partial_derivative() {
        let s = space(2, 2);
        let x = Jet::variable(&s, 2, 0, 0.0);
        let y = Jet::variable(&s, 2, 1, 0.0);
        // 1 + x + xy
        let f = x.mul(&y).unwrap().add(&x).unwrap().add_scalar(1.0);
        let dx = f.partial(0).unwrap();
        assert_eq!(dx.degree(), 1);
        assert_eq!(dx.coeff(&[0, 0]), 1.0);
        assert_eq!(dx.coeff(&[0, 1]), 1.0);
        assert_eq!(dx.coeff(&[1, 0]), 0.0);
        let c = Jet::constant(&s, 2, 3.0).partial(1).unwrap();
        assert!(c.coeffs().iter().all(|&v| v == 0.0));
        assert!(matches!(
            Jet::constant(&s, 0, 1.0).partial(0),
            Err(Error::DegreeExhausted { .. })
        ));
    }

    #[test]
    fn derivative_value_uses_factorials() {
        let s = space(1, 2);
        let x = Jet::variable(&s, 2, 0, 0.0);
        let f = x.mul(&x).unwrap().scale(3.0).add_scalar(1.0);
        assert_eq!(f.derivative_value(&[2]).unwrap(), 6.0);
        assert_eq!(f.derivative_value(&[0]).unwrap(), 1.0);
        assert!(matches!(
            f.derivative_value(&[3]),
            Err(Error::DegreeExhausted { .. })
        ));
    }
}
