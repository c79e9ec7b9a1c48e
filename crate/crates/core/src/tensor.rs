//! Jet-valued tensors with tensor and tractor slots.
//!
//! Components are stored densely and component-major: component `c` occupies
//! `data[c * stride .. (c + 1) * stride]` with `stride` the monomial count of the
//! tensor's degree. Slot indices are row-major, the last slot varying fastest.
//! Tractor slots have extent `n + 2` and use the frame order
//! `0 = Y`-coefficient, `1..=n` = `Z` components, `n + 1 = X`-coefficient.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Lower tensor index.
    Cov,
    /// Upper tensor index.
    Con,
    /// Lower tractor index.
    TrLow,
    /// Upper tractor index; only appears transiently inside contractions.
    TrUp,
}

impl Slot {
    pub fn extent(self, n: usize) -> usize {
        match self {
            Slot::Cov | Slot::Con => n,
            Slot::TrLow | Slot::TrUp => n + 2,
        }
    }

    pub fn is_tractor(self) -> bool {
        matches!(self, Slot::TrLow | Slot::TrUp)
    }

    fn dual(self) -> Slot {
        match self {
            Slot::Cov => Slot::Con,
            Slot::Con => Slot::Cov,
            Slot::TrLow => Slot::TrUp,
            Slot::TrUp => Slot::TrLow,
        }
    }
}

/// Metric data needed to raise and lower indices: `g_ab` and `g^ab` as jets.
pub trait MetricPair {
    fn g(&self) -> &TensorJet;
    fn g_inv(&self) -> &TensorJet;
}

#[derive(Clone)]
pub struct TensorJet {
    space: Arc<JetSpace>,
    n: usize,
    degree: usize,
    slots: Vec<Slot>,
    weight: f64,
    data: Vec<f64>,
}

impl std::fmt::Debug for TensorJet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TensorJet")
            .field("n", &self.n)
            .field("degree", &self.degree)
            .field("slots", &self.slots)
            .field("weight", &self.weight)
            .finish()
    }
}

fn count(slots: &[Slot], n: usize) -> usize {
    slots.iter().map(|s| s.extent(n)).product()
}

/// Row-major strides for the given extents.
fn strides(extents: &[usize]) -> Vec<usize> {
    let mut s = vec![1; extents.len()];
    for i in (0..extents.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * extents[i + 1];
    }
    s
}

/// Calls `f` for every multi-index in row-major order.
pub fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = extents.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0; extents.len()];
    for _ in 0..total {
        f(&idx);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < extents[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            let s = if i % 2 == 0 { sign } else { -sign };
            rec(prefix, rest, s, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), 1.0, &mut out);
    out
}

impl TensorJet {
    pub fn zeros(space: &Arc<JetSpace>, n: usize, degree: usize, slots: Vec<Slot>, weight: f64) -> TensorJet {
        let stride = space.len(degree);
        TensorJet {
            space: Arc::clone(space),
            n,
            degree,
            data: vec![0.0; count(&slots, n) * stride],
            slots,
            weight,
        }
    }

    pub fn scalar(jet: &Jet, n: usize, weight: f64) -> TensorJet {
        TensorJet {
            space: Arc::clone(jet.space()),
            n,
            degree: jet.degree(),
            slots: Vec::new(),
            weight,
            data: jet.coeffs().to_vec(),
        }
    }

    /// Builds a tensor from one jet per component (row-major order).
    pub fn from_jets(n: usize, slots: Vec<Slot>, weight: f64, jets: &[Jet]) -> Result<TensorJet> {
        let first = jets
            .first()
            .ok_or_else(|| Error::Arity("no components supplied".into()))?;
        if jets.len() != count(&slots, n) {
            return Err(Error::Arity(format!(
                "{} components for slots {:?} in dimension {n}",
                jets.len(),
                slots
            )));
        }
        let degree = jets.iter().map(Jet::degree).min().unwrap_or(0);
        let space = Arc::clone(first.space());
        let stride = space.len(degree);
        let mut data = Vec::with_capacity(jets.len() * stride);
        for j in jets {
            data.extend_from_slice(&j.coeffs()[..stride]);
        }
        Ok(TensorJet {
            space,
            n,
            degree,
            slots,
            weight,
            data,
        })
    }

    /// Degree-0 tensor from plain values.
    pub fn from_values(space: &Arc<JetSpace>, n: usize, slots: Vec<Slot>, weight: f64, values: Vec<f64>) -> Result<TensorJet> {
        if values.len() != count(&slots, n) {
            return Err(Error::Arity(format!(
                "{} values for slots {:?} in dimension {n}",
                values.len(),
                slots
            )));
        }
        Ok(TensorJet {
            space: Arc::clone(space),
            n,
            degree: 0,
            slots,
            weight,
            data: values,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn with_weight(mut self, weight: f64) -> TensorJet {
        self.weight = weight;
        self
    }

    pub fn extents(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.extent(self.n)).collect()
    }

    pub fn stride(&self) -> usize {
        self.space.len(self.degree)
    }

    pub fn len(&self) -> usize {
        count(&self.slots, self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `cov − con − weight`; tractor slots do not count.
    pub fn total_order(&self) -> f64 {
        let cov = self.slots.iter().filter(|&&s| s == Slot::Cov).count() as f64;
        let con = self.slots.iter().filter(|&&s| s == Slot::Con).count() as f64;
        cov - con - self.weight
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.slots.len());
        let mut f = 0;
        for (i, s) in idx.iter().zip(&self.slots) {
            f = f * s.extent(self.n) + i;
        }
        f
    }

    pub fn component(&self, flat: usize) -> &[f64] {
        let s = self.stride();
        &self.data[flat * s..(flat + 1) * s]
    }

    pub fn component_mut(&mut self, flat: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[flat * s..(flat + 1) * s]
    }

    pub fn jet(&self, idx: &[usize]) -> Jet {
        let c = self.component(self.flat_index(idx)).to_vec();
        Jet::from_coeffs(&self.space, self.degree, c).expect("component length")
    }

    pub fn set_jet(&mut self, idx: &[usize], jet: &Jet) {
        let f = self.flat_index(idx);
        let s = self.stride();
        self.component_mut(f).copy_from_slice(&jet.coeffs()[..s]);
    }

    /// Value at the base point.
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx) * self.stride()]
    }

    pub fn set_value(&mut self, idx: &[usize], v: f64) {
        let f = self.flat_index(idx) * self.stride();
        self.data[f] = v;
    }

    /// Base-point values of all components in row-major order.
    pub fn values(&self) -> Vec<f64> {
        self.data.iter().step_by(self.stride()).copied().collect()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.data
            .iter()
            .step_by(self.stride())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn truncate(&self, degree: usize) -> TensorJet {
        if degree >= self.degree {
            return self.clone();
        }
        let old = self.stride();
        let new = self.space.len(degree);
        let mut data = Vec::with_capacity(self.len() * new);
        for c in self.data.chunks(old) {
            data.extend_from_slice(&c[..new]);
        }
        TensorJet {
            space: Arc::clone(&self.space),
            n: self.n,
            degree,
            slots: self.slots.clone(),
            weight: self.weight,
            data,
        }
    }

    /// Same tensor reduced to its base-point values.
    pub fn at_point(&self) -> TensorJet {
        self.truncate(0)
    }

    fn check_same_shape(&self, other: &TensorJet) -> Result<()> {
        if self.n != other.n || self.slots != other.slots {
            return Err(Error::Arity(format!(
                "cannot combine {:?} (n = {}) with {:?} (n = {})",
                self.slots, self.n, other.slots, other.n
            )));
        }
        if (self.weight - other.weight).abs() > 1e-12 {
            return Err(Error::WrongWeight {
                expected: self.weight,
                actual: other.weight,
            });
        }
        Ok(())
    }

    /// `self + s * other`, at the smaller degree.
    pub fn axpy(&self, s: f64, other: &TensorJet) -> Result<TensorJet> {
        self.check_same_shape(other)?;
        let degree = self.degree.min(other.degree);
        let mut out = self.truncate(degree);
        let (so, st) = (other.stride(), out.stride());
        for (c, oc) in out.data.chunks_mut(st).zip(other.data.chunks(so)) {
            for (a, b) in c.iter_mut().zip(oc) {
                *a += s * b;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &TensorJet) -> Result<TensorJet> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &TensorJet) -> Result<TensorJet> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> TensorJet {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Multiplies every component by a scalar jet of weight `w`.
    pub fn mul_scalar(&self, f: &Jet, weight: f64) -> TensorJet {
        let degree = self.degree.min(f.degree());
        let mut out = TensorJet::zeros(&self.space, self.n, degree, self.slots.clone(), self.weight + weight);
        let (si, so) = (self.stride(), out.stride());
        for c in 0..self.len() {
            self.space.mul_acc(
                &mut out.data[c * so..(c + 1) * so],
                &self.data[c * si..c * si + so],
                f.coeffs(),
                1.0,
                degree,
            );
        }
        out
    }

    /// Reorders slots: slot `i` of the result is slot `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> TensorJet {
        assert_eq!(perm.len(), self.slots.len(), "permutation length");
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let ext = self.extents();
        let in_strides = strides(&ext);
        let out_ext: Vec<usize> = perm.iter().map(|&p| ext[p]).collect();
        let map: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let stride = self.stride();
        let mut data = Vec::with_capacity(self.data.len());
        for_each_index(&out_ext, |idx| {
            let src: usize = idx.iter().zip(&map).map(|(i, s)| i * s).sum();
            data.extend_from_slice(&self.data[src * stride..(src + 1) * stride]);
        });
        TensorJet {
            space: Arc::clone(&self.space),
            n: self.n,
            degree: self.degree,
            slots: perm.iter().map(|&p| self.slots[p]).collect(),
            weight: self.weight,
            data,
        }
    }

    fn signed_average(&self, which: &[usize], skew: bool) -> Result<TensorJet> {
        if which.iter().any(|&s| self.slots[s] != self.slots[which[0]]) {
            return Err(Error::Arity(format!("cannot (anti)symmetrize mixed slots {which:?}")));
        }
        let perms = permutations(which.len());
        let mut out = TensorJet::zeros(&self.space, self.n, self.degree, self.slots.clone(), self.weight);
        let inv = 1.0 / perms.len() as f64;
        for (p, sign) in &perms {
            let mut full: Vec<usize> = (0..self.rank()).collect();
            for (k, &slot) in which.iter().enumerate() {
                full[slot] = which[p[k]];
            }
            let t = self.permute(&full);
            let s = if skew { *sign } else { 1.0 };
            for (o, v) in out.data.iter_mut().zip(&t.data) {
                *o += s * inv * v;
            }
        }
        Ok(out)
    }

    /// Average over permutations of the listed slots.
    pub fn symmetrize(&self, which: &[usize]) -> Result<TensorJet> {
        self.signed_average(which, false)
    }

    /// Signed average over permutations of the listed slots.
    pub fn antisymmetrize(&self, which: &[usize]) -> Result<TensorJet> {
        self.signed_average(which, true)
    }

    /// Contracts two slots of the same tensor; they must be dual kinds.
    pub fn trace_dual(&self, s1: usize, s2: usize) -> Result<TensorJet> {
        if s1 == s2 || self.slots[s1].dual() != self.slots[s2] {
            return Err(Error::Arity(format!(
                "cannot trace slots {s1} ({:?}) and {s2} ({:?}) directly",
                self.slots[s1], self.slots[s2]
            )));
        }
        let (a, b) = (s1.min(s2), s1.max(s2));
        let mut perm: Vec<usize> = (0..self.rank()).filter(|&i| i != a && i != b).collect();
        perm.push(a);
        perm.push(b);
        let t = self.permute(&perm);
        let m = self.slots[a].extent(self.n);
        let slots: Vec<Slot> = perm[..perm.len() - 2].iter().map(|&p| self.slots[p]).collect();
        let mut out = TensorJet::zeros(&self.space, self.n, self.degree, slots, self.weight);
        let stride = self.stride();
        for c in 0..out.len() {
            let dst = c * stride;
            for i in 0..m {
                let src = ((c * m + i) * m + i) * stride;
                for k in 0..stride {
                    out.data[dst + k] += t.data[src + k];
                }
            }
        }
        Ok(out)
    }

    /// Contracts slots `a_slots` of `self` against `b_slots` of `other`, pairwise,
    /// without any metric. Result slots: free slots of `self` then free slots of `other`.
    pub fn contract_dual(&self, a_slots: &[usize], other: &TensorJet, b_slots: &[usize]) -> Result<TensorJet> {
        if self.n != other.n || a_slots.len() != b_slots.len() {
            return Err(Error::Arity("contraction slot lists differ".into()));
        }
        for (&i, &j) in a_slots.iter().zip(b_slots) {
            if self.slots[i].dual() != other.slots[j] {
                return Err(Error::Arity(format!(
                    "slot {i} ({:?}) cannot pair with slot {j} ({:?}) without a metric",
                    self.slots[i], other.slots[j]
                )));
            }
        }
        let free_a: Vec<usize> = (0..self.rank()).filter(|i| !a_slots.contains(i)).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|i| !b_slots.contains(i)).collect();
        let pa: Vec<usize> = free_a.iter().chain(a_slots).copied().collect();
        let pb: Vec<usize> = b_slots.iter().chain(&free_b).copied().collect();
        let a = self.permute(&pa);
        let b = other.permute(&pb);
        let n = self.n;
        let m: usize = free_a.iter().map(|&i| self.slots[i].extent(n)).product();
        let k: usize = a_slots.iter().map(|&i| self.slots[i].extent(n)).product();
        let cols: usize = free_b.iter().map(|&j| other.slots[j].extent(n)).product();
        let slots: Vec<Slot> = free_a
            .iter()
            .map(|&i| self.slots[i])
            .chain(free_b.iter().map(|&j| other.slots[j]))
            .collect();
        let degree = self.degree.min(other.degree);
        let space = if self.space.max_degree() >= other.space.max_degree() {
            &self.space
        } else {
            &other.space
        };
        let mut out = TensorJet::zeros(space, n, degree, slots, self.weight + other.weight);
        matmul(space, &a.data, a.stride(), &b.data, b.stride(), &mut out.data, degree, m, k, cols);
        Ok(out)
    }

    /// Raises (or lowers) one slot using `g`, `g⁻¹` or the tractor metric.
    /// Raising a tensor slot shifts the weight by −2, lowering by +2.
    pub fn flip(&self, slot: usize, metric: &dyn MetricPair) -> Result<TensorJet> {
        let h;
        let m = match self.slots[slot] {
            Slot::Cov => metric.g_inv(),
            Slot::Con => metric.g(),
            Slot::TrLow => {
                h = tractor_metric(metric, true);
                &h
            }
            Slot::TrUp => {
                h = tractor_metric(metric, false);
                &h
            }
        };
        let c = self.contract_dual(&[slot], m, &[0])?;
        // the new slot sits last; move it back into place
        let r = self.rank();
        let mut perm: Vec<usize> = (0..r - 1).collect();
        perm.insert(slot, r - 1);
        Ok(c.permute(&perm))
    }

    /// Jet-level Einstein summation, e.g. `"abcd,cd->ab"`. Repeated labels are
    /// contracted, through the metric whenever both slots have the same variance.
    pub fn einsum(spec: &str, ops: &[&TensorJet], metric: Option<&dyn MetricPair>) -> Result<TensorJet> {
        let (lhs, out_labels) = spec
            .split_once("->")
            .ok_or_else(|| Error::Arity(format!("einsum spec `{spec}` lacks `->`")))?;
        let in_labels: Vec<Vec<char>> = lhs.split(',').map(|s| s.trim().chars().collect()).collect();
        let out_labels: Vec<char> = out_labels.trim().chars().collect();
        if in_labels.len() != ops.len() {
            return Err(Error::Arity(format!("einsum `{spec}` given {} operands", ops.len())));
        }
        let mut terms: Vec<(TensorJet, Vec<char>)> = Vec::new();
        for (t, labels) in ops.iter().zip(&in_labels) {
            if labels.len() != t.rank() {
                return Err(Error::Arity(format!(
                    "labels `{}` for a rank-{} tensor",
                    labels.iter().collect::<String>(),
                    t.rank()
                )));
            }
            let (t, labels) = self_traces((*t).clone(), labels.clone(), metric)?;
            terms.push((t, labels));
        }
        let mut iter = terms.into_iter();
        let (mut acc, mut acc_labels) = iter.next().expect("at least one operand");
        for (mut t, labels) in iter {
            let mut a_slots = Vec::new();
            let mut b_slots = Vec::new();
            for (j, l) in labels.iter().enumerate() {
                if let Some(i) = acc_labels.iter().position(|x| x == l) {
                    a_slots.push(i);
                    b_slots.push(j);
                }
            }
            for (&i, &j) in a_slots.iter().zip(&b_slots) {
                if acc.slots[i].dual() != t.slots[j] {
                    let m = metric.ok_or_else(|| {
                        Error::Arity("metric contraction requested without a metric".into())
                    })?;
                    t = t.flip(j, m)?;
                }
            }
            let new_labels: Vec<char> = acc_labels
                .iter()
                .enumerate()
                .filter(|(i, _)| !a_slots.contains(i))
                .map(|(_, &c)| c)
                .chain(labels.iter().enumerate().filter(|(j, _)| !b_slots.contains(j)).map(|(_, &c)| c))
                .collect();
            acc = acc.contract_dual(&a_slots, &t, &b_slots)?;
            acc_labels = new_labels;
        }
        if acc_labels.len() != out_labels.len() {
            return Err(Error::Arity(format!(
                "einsum `{spec}` leaves labels `{}`",
                acc_labels.iter().collect::<String>()
            )));
        }
        let perm: Vec<usize> = out_labels
            .iter()
            .map(|l| {
                acc_labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| Error::Arity(format!("output label `{l}` not among inputs")))
            })
            .collect::<Result<_>>()?;
        Ok(acc.permute(&perm))
    }
}

fn self_traces(mut t: TensorJet, mut labels: Vec<char>, metric: Option<&dyn MetricPair>) -> Result<(TensorJet, Vec<char>)> {
    loop {
        let mut pair = None;
        'outer: for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                if labels[i] == labels[j] {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else {
            return Ok((t, labels));
        };
        if t.slots[i].dual() != t.slots[j] {
            let m = metric.ok_or_else(|| Error::Arity("metric trace requested without a metric".into()))?;
            t = t.flip(j, m)?;
        }
        t = t.trace_dual(i, j)?;
        labels.remove(j);
        labels.remove(i);
    }
}

/// Tractor metric with both indices up (`upper`) or down, assembled from `g`.
/// Weights of the tensor metric are dropped: the tractor metric has weight 0.
pub fn tractor_metric(metric: &dyn MetricPair, upper: bool) -> TensorJet {
    let src = if upper { metric.g_inv() } else { metric.g() };
    let n = src.n();
    let slot = if upper { Slot::TrUp } else { Slot::TrLow };
    let mut h = TensorJet::zeros(src.space(), n, src.degree(), vec![slot, slot], 0.0);
    let e = n + 2;
    let stride = h.stride();
    h.data[(n + 1) * stride] = 1.0;
    h.data[(n + 1) * e * stride] = 1.0;
    for a in 0..n {
        for b in 0..n {
            let dst = ((1 + a) * e + 1 + b) * stride;
            h.data[dst..dst + stride].copy_from_slice(src.component(a * n + b));
        }
    }
    h
}

/// `out[m×c] += a[m×k] · b[k×c]` over jets truncated to `degree`.
#[allow(clippy::too_many_arguments)]
fn matmul(
    space: &JetSpace,
    a: &[f64],
    sa: usize,
    b: &[f64],
    sb: usize,
    out: &mut [f64],
    degree: usize,
    m: usize,
    k: usize,
    cols: usize,
) {
    if degree == 0 {
        for i in 0..m {
            for l in 0..k {
                let av = a[(i * k + l) * sa];
                if av == 0.0 {
                    continue;
                }
                let row = &mut out[i * cols..(i + 1) * cols];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += av * b[(l * cols + j) * sb];
                }
            }
        }
        return;
    }
    let so = space.len(degree);
    let nonzero = |d: &[f64], s: usize, c: usize| d[c * s..c * s + so].iter().any(|&v| v != 0.0);
    let b_nz: Vec<bool> = (0..k * cols).map(|c| nonzero(b, sb, c)).collect();
    for i in 0..m {
        for l in 0..k {
            let ac = i * k + l;
            if !nonzero(a, sa, ac) {
                continue;
            }
            let aj = &a[ac * sa..ac * sa + so];
            for j in 0..cols {
                let bc = l * cols + j;
                if !b_nz[bc] {
                    continue;
                }
                space.mul_acc(
                    &mut out[(i * cols + j) * so..(i * cols + j + 1) * so],
                    aj,
                    &b[bc * sb..bc * sb + so],
                    1.0,
                    degree,
                );
            }
        }
    }
}
