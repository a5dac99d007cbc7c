//! Finite graded models of differential forms, elements with coefficients
//! in the Novikov ring, and currents as finite duals.
//!
//! A graded element is a finite sum `sum c_i e_i` with the scalar written
//! on the left of the basis form. Moving a scalar `c` past a form of
//! degree `p` costs `(-1)^{|c| p}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::novikov::{fmt_q, Energy, Mono, NovikovElement, NovikovRing, Q};

/// Sparse vector over a basis.
pub type SparseVec = Vec<(usize, Q)>;

/// One basis form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisForm {
    pub label: String,
    pub degree: i64,
}

/// A finite commutative differential graded model with integration.
#[derive(Clone, Debug)]
pub struct FormModel {
    pub name: String,
    pub dim: i64,
    pub basis: Vec<BasisForm>,
    pub unit: usize,
    wedge: Vec<Vec<SparseVec>>,
    diff: Vec<SparseVec>,
    pub integral: Vec<Q>,
    restriction: Option<Vec<SparseVec>>,
    index: HashMap<String, usize>,
}

impl PartialEq for FormModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dim == other.dim
            && self.basis == other.basis
            && self.wedge == other.wedge
            && self.diff == other.diff
            && self.integral == other.integral
            && self.restriction == other.restriction
    }
}

fn add_sparse(v: &mut SparseVec, i: usize, q: Q) {
    if q.is_zero() {
        return;
    }
    if let Some(pos) = v.iter().position(|(j, _)| *j == i) {
        v[pos].1 += q;
        if v[pos].1.is_zero() {
            v.remove(pos);
        }
    } else {
        v.push((i, q));
        v.sort_by_key(|(j, _)| *j);
    }
}

/// A linear combination of basis labels.
pub type LabeledVec = Vec<(String, Q)>;

/// Raw description used to build a [`FormModel`].
#[derive(Clone, Debug, Default)]
pub struct ModelSpec {
    pub name: String,
    pub dim: i64,
    pub basis: Vec<(String, i64)>,
    pub unit: String,
    /// Triples `(a, b, out)`: `e_a ^ e_b = sum out`.
    pub wedge: Vec<(String, String, LabeledVec)>,
    /// `d e_a = sum out`.
    pub diff: Vec<(String, LabeledVec)>,
    pub integral: LabeledVec,
    /// Images of basis forms under restriction, labels in the target model.
    pub restriction: Option<Vec<(String, LabeledVec)>>,
}

impl FormModel {
    /// Builds a model; restriction labels are resolved against `target`.
    pub fn build(spec: &ModelSpec, target: Option<&FormModel>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut basis = Vec::new();
        for (i, (label, deg)) in spec.basis.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Parse(format!("{}: duplicate basis label `{label}`", spec.name)));
            }
            basis.push(BasisForm { label: label.clone(), degree: *deg });
        }
        let n = basis.len();
        let look = |l: &str| -> Result<usize> {
            index.get(l).copied().ok_or_else(|| Error::Parse(format!("{}: unknown basis label `{l}`", spec.name)))
        };
        let unit = look(&spec.unit)?;
        let mut wedge = vec![vec![SparseVec::new(); n]; n];
        let mut explicit = vec![vec![false; n]; n];
        for (a, b, out) in &spec.wedge {
            let (ia, ib) = (look(a)?, look(b)?);
            explicit[ia][ib] = true;
            for (c, q) in out {
                add_sparse(&mut wedge[ia][ib], look(c)?, q.clone());
            }
        }
        // The unit acts trivially unless stated otherwise.
        for x in 0..n {
            if !explicit[unit][x] {
                wedge[unit][x] = vec![(x, Q::one())];
            }
            if !explicit[x][unit] {
                wedge[x][unit] = vec![(x, Q::one())];
            }
        }
        let mut diff = vec![SparseVec::new(); n];
        for (a, out) in &spec.diff {
            let ia = look(a)?;
            for (c, q) in out {
                add_sparse(&mut diff[ia], look(c)?, q.clone());
            }
        }
        let mut integral = vec![Q::zero(); n];
        for (a, q) in &spec.integral {
            integral[look(a)?] += q.clone();
        }
        let restriction = match (&spec.restriction, target) {
            (None, _) => None,
            (Some(_), None) => return Err(Error::Config(format!("{}: restriction without target model", spec.name))),
            (Some(rows), Some(t)) => {
                let mut r = vec![SparseVec::new(); n];
                for (a, out) in rows {
                    let ia = look(a)?;
                    for (c, q) in out {
                        add_sparse(&mut r[ia], t.index_of(c)?, q.clone());
                    }
                }
                Some(r)
            }
        };
        Ok(FormModel { name: spec.name.clone(), dim: spec.dim, basis, unit, wedge, diff, integral, restriction, index })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].degree
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Usage(format!("{}: unknown basis label `{label}`", self.name)))
    }

    /// `e_a ^ e_b` as a sparse vector.
    pub fn wedge_basis(&self, a: usize, b: usize) -> &SparseVec {
        &self.wedge[a][b]
    }

    /// `d e_a` as a sparse vector.
    pub fn diff_basis(&self, a: usize) -> &SparseVec {
        &self.diff[a]
    }

    /// Restriction of `e_a`, if this model carries a restriction.
    pub fn restrict_basis(&self, a: usize) -> Option<&SparseVec> {
        self.restriction.as_ref().map(|r| &r[a])
    }

    pub fn has_restriction(&self) -> bool {
        self.restriction.is_some()
    }

    pub fn is_zero_differential(&self) -> bool {
        self.diff.iter().all(Vec::is_empty)
    }

    fn wedge_vec(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (a, p) in x {
            for (b, q) in y {
                for (c, r) in &self.wedge[*a][*b] {
                    add_sparse(&mut out, *c, p * q * r);
                }
            }
        }
        out
    }

    fn diff_vec(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (a, p) in x {
            for (c, r) in &self.diff[*a] {
                add_sparse(&mut out, *c, p * r);
            }
        }
        out
    }

    fn render_vec(&self, v: &SparseVec) -> String {
        if v.is_empty() {
            return "0".into();
        }
        v.iter().map(|(i, q)| format!("{}*{}", fmt_q(q), self.label(*i))).collect::<Vec<_>>().join(" + ")
    }

    /// Checks every model invariant and returns the witnesses of failure.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.len();
        let nm = &self.name;
        if self.degree(self.unit) != 0 {
            bad.push(format!("{nm}: unit has nonzero degree"));
        }
        for a in 0..n {
            let da = self.degree(a);
            if !(0..=self.dim).contains(&da) {
                bad.push(format!("{nm}: {} has degree {da} outside 0..={}", self.label(a), self.dim));
            }
            if !self.integral[a].is_zero() && da != self.dim {
                bad.push(format!("{nm}: integral nonzero on {} of degree {da}", self.label(a)));
            }
            for (c, _) in &self.diff[a] {
                if self.degree(*c) != da + 1 {
                    bad.push(format!("{nm}: d{} has a term {} of wrong degree", self.label(a), self.label(*c)));
                }
            }
            let dd = self.diff_vec(&self.diff[a]);
            if !dd.is_empty() {
                bad.push(format!("{nm}: dd{} = {}", self.label(a), self.render_vec(&dd)));
            }
            let s: Q = self.diff[a].iter().map(|(c, q)| q * &self.integral[*c]).sum();
            if !s.is_zero() {
                bad.push(format!("{nm}: integral of d{} is {}", self.label(a), fmt_q(&s)));
            }
            for b in 0..n {
                let db = self.degree(b);
                for (c, _) in &self.wedge[a][b] {
                    if self.degree(*c) != da + db {
                        bad.push(format!(
                            "{nm}: {}^{} has a term {} of wrong degree",
                            self.label(a),
                            self.label(b),
                            self.label(*c)
                        ));
                    }
                }
                let mut swapped: SparseVec = self.wedge[b][a].clone();
                if (da * db) % 2 != 0 {
                    for (_, q) in swapped.iter_mut() {
                        *q = -q.clone();
                    }
                }
                if swapped != self.wedge[a][b] {
                    bad.push(format!("{nm}: {}^{} violates graded commutativity", self.label(a), self.label(b)));
                }
                // d(a^b) = da^b + (-1)^|a| a^db
                let lhs = self.diff_vec(&self.wedge[a][b]);
                let mut rhs = self.wedge_vec(&self.diff[a], &vec![(b, Q::one())]);
                let sign = if da % 2 == 0 { Q::one() } else { -Q::one() };
                for (c, q) in self.wedge_vec(&vec![(a, Q::one())], &self.diff[b]) {
                    add_sparse(&mut rhs, c, q * &sign);
                }
                if lhs != rhs {
                    bad.push(format!("{nm}: Leibniz rule fails on ({}, {})", self.label(a), self.label(b)));
                }
                for c in 0..n {
                    let left = self.wedge_vec(&self.wedge[a][b], &vec![(c, Q::one())]);
                    let right = self.wedge_vec(&vec![(a, Q::one())], &self.wedge[b][c]);
                    if left != right {
                        bad.push(format!(
                            "{nm}: wedge not associative on ({}, {}, {})",
                            self.label(a),
                            self.label(b),
                            self.label(c)
                        ));
                    }
                }
            }
        }
        bad
    }

    /// Checks that the restriction into `target` is a degree-0 unital
    /// algebra map commuting with the differentials.
    pub fn validate_restriction(&self, target: &FormModel) -> Vec<String> {
        let Some(r) = &self.restriction else {
            return vec![format!("{}: no restriction map", self.name)];
        };
        let mut bad = Vec::new();
        let n = self.len();
        let unit_img = &r[self.unit];
        if *unit_img != vec![(target.unit, Q::one())] {
            bad.push(format!("{}: restriction of the unit is {}", self.name, target.render_vec(unit_img)));
        }
        for a in 0..n {
            for (c, _) in &r[a] {
                if target.degree(*c) != self.degree(a) {
                    bad.push(format!("{}: restriction of {} changes degree", self.name, self.label(a)));
                }
            }
            let rd: SparseVec = {
                let mut out = SparseVec::new();
                for (c, q) in &self.diff[a] {
                    for (e, p) in &r[*c] {
                        add_sparse(&mut out, *e, q * p);
                    }
                }
                out
            };
            if rd != target.diff_vec(&r[a]) {
                bad.push(format!("{}: restriction does not commute with d on {}", self.name, self.label(a)));
            }
            for b in 0..n {
                let mut lhs = SparseVec::new();
                for (c, q) in &self.wedge[a][b] {
                    for (e, p) in &r[*c] {
                        add_sparse(&mut lhs, *e, q * p);
                    }
                }
                if lhs != target.wedge_vec(&r[a], &r[b]) {
                    bad.push(format!(
                        "{}: restriction not multiplicative on ({}, {})",
                        self.name,
                        self.label(a),
                        self.label(b)
                    ));
                }
            }
        }
        bad
    }

    /// Pairing matrix `<e_a, e_b>` restricted to degrees `p` and `dim - p`.
    pub fn pairing_block(&self, p: i64) -> (Vec<usize>, Vec<usize>, linalg::Matrix) {
        let rows: Vec<usize> = (0..self.len()).filter(|&a| self.degree(a) == p).collect();
        let cols: Vec<usize> = (0..self.len()).filter(|&a| self.degree(a) == self.dim - p).collect();
        let m = rows
            .iter()
            .map(|&a| {
                cols.iter().map(|&b| self.wedge[a][b].iter().map(|(c, q)| q * &self.integral[*c]).sum()).collect()
            })
            .collect();
        (rows, cols, m)
    }

    /// Degreewise representatives of the cohomology of the model over the
    /// rationals, as dense vectors over the full basis.
    pub fn cohomology_reps(&self) -> BTreeMap<i64, Vec<Vec<Q>>> {
        let n = self.len();
        let mut out = BTreeMap::new();
        for p in 0..=self.dim {
            let here: Vec<usize> = (0..n).filter(|&a| self.degree(a) == p).collect();
            let next: Vec<usize> = (0..n).filter(|&a| self.degree(a) == p + 1).collect();
            let prev: Vec<usize> = (0..n).filter(|&a| self.degree(a) == p - 1).collect();
            // d restricted to degree p, rows indexed by degree p+1.
            let dmat: linalg::Matrix = next
                .iter()
                .map(|&c| {
                    here.iter()
                        .map(|&a| {
                            self.diff[a].iter().find(|(j, _)| *j == c).map(|(_, q)| q.clone()).unwrap_or_else(Q::zero)
                        })
                        .collect()
                })
                .collect();
            let ker = if next.is_empty() {
                (0..here.len())
                    .map(|j| (0..here.len()).map(|i| if i == j { Q::one() } else { Q::zero() }).collect())
                    .collect()
            } else {
                linalg::kernel(&dmat, here.len())
            };
            let mut span: Vec<Vec<Q>> = prev
                .iter()
                .map(|&a| {
                    here.iter()
                        .map(|&c| {
                            self.diff[a].iter().find(|(j, _)| *j == c).map(|(_, q)| q.clone()).unwrap_or_else(Q::zero)
                        })
                        .collect()
                })
                .collect();
            let mut reps = Vec::new();
            for v in ker {
                if !linalg::in_span(&span, &v, here.len()) {
                    span.push(v.clone());
                    let mut full = vec![Q::zero(); n];
                    for (k, &a) in here.iter().enumerate() {
                        full[a] = v[k].clone();
                    }
                    reps.push(full);
                }
            }
            out.insert(p, reps);
        }
        out
    }

    /// Pairing `<u, v>` of two dense rational vectors.
    pub fn pair_dense(&self, u: &[Q], v: &[Q]) -> Q {
        let mut s = Q::zero();
        for (a, x) in u.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in v.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                for (c, r) in &self.wedge[a][b] {
                    s += x * y * r * &self.integral[*c];
                }
            }
        }
        s
    }

    /// Whether the pairing between cohomology in degrees `p` and
    /// `dim - p` is perfect for every `p`.
    pub fn pairing_nondegenerate(&self) -> bool {
        let reps = self.cohomology_reps();
        (0..=self.dim).all(|p| {
            let a = &reps[&p];
            let b = &reps[&(self.dim - p)];
            if a.len() != b.len() {
                return false;
            }
            let m: linalg::Matrix = a.iter().map(|u| b.iter().map(|v| self.pair_dense(u, v)).collect()).collect();
            a.is_empty() || linalg::is_invertible(&m)
        })
    }
}

/// One term `q * m * e_idx` of a graded element, with cached degrees.
#[derive(Clone, Debug)]
pub struct Atom {
    pub idx: usize,
    pub mono: Mono,
    pub coeff: Q,
    pub form_degree: i64,
    pub scalar_parity: u8,
}

impl Atom {
    pub fn total_degree(&self, ring: &NovikovRing) -> i64 {
        self.form_degree + ring.degree(&self.mono)
    }
}

/// A form with Novikov coefficients, truncated at an energy cutoff.
#[derive(Clone, Debug)]
pub struct GradedElement {
    ring: Arc<NovikovRing>,
    model: Arc<FormModel>,
    cutoff: Energy,
    terms: BTreeMap<(usize, Mono), Q>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        self.model.name == other.model.name && self.terms == other.terms
    }
}

#[inline]
fn sign_q(parity: u8, q: Q) -> Q {
    if parity & 1 == 1 {
        -q
    } else {
        q
    }
}

impl GradedElement {
    pub fn zero(ring: &Arc<NovikovRing>, model: &Arc<FormModel>, cutoff: Energy) -> Self {
        GradedElement { ring: ring.clone(), model: model.clone(), cutoff, terms: BTreeMap::new() }
    }

    /// The basis form `e_i`.
    pub fn basis(ring: &Arc<NovikovRing>, model: &Arc<FormModel>, cutoff: Energy, i: usize) -> Self {
        let mut e = Self::zero(ring, model, cutoff);
        e.add_term(i, ring.one_mono(), Q::one());
        e
    }

    /// The unit form.
    pub fn one(ring: &Arc<NovikovRing>, model: &Arc<FormModel>, cutoff: Energy) -> Self {
        Self::basis(ring, model, cutoff, model.unit)
    }

    /// The basis form with the given label.
    pub fn labeled(ring: &Arc<NovikovRing>, model: &Arc<FormModel>, cutoff: Energy, label: &str) -> Result<Self> {
        Ok(Self::basis(ring, model, cutoff, model.index_of(label)?))
    }

    /// `c * e_i`.
    pub fn scalar_times(c: &NovikovElement, model: &Arc<FormModel>, i: usize) -> Self {
        let mut e = Self::zero(c.ring(), model, c.cutoff());
        for (m, q) in c.terms() {
            e.add_term(i, m.clone(), q.clone());
        }
        e
    }

    /// Builds `sum c_i e_i` from a sparse vector of rationals.
    pub fn from_sparse(ring: &Arc<NovikovRing>, model: &Arc<FormModel>, cutoff: Energy, v: &SparseVec) -> Self {
        let mut e = Self::zero(ring, model, cutoff);
        for (i, q) in v {
            e.add_term(*i, ring.one_mono(), q.clone());
        }
        e
    }

    pub fn ring(&self) -> &Arc<NovikovRing> {
        &self.ring
    }

    pub fn model(&self) -> &Arc<FormModel> {
        &self.model
    }

    pub fn cutoff(&self) -> Energy {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<(usize, Mono), Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `q * m * e_i`, respecting the cutoff.
    pub fn add_term(&mut self, i: usize, m: Mono, q: Q) {
        if q.is_zero() || self.ring.energy(&m) > self.cutoff {
            return;
        }
        let key = (i, m);
        match self.terms.get_mut(&key) {
            Some(slot) => {
                *slot += q;
                if slot.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, q);
            }
        }
    }

    fn same_model(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.model, &other.model) && self.model.name != other.model.name {
            return Err(Error::Config(format!("model mismatch: {} vs {}", self.model.name, other.model.name)));
        }
        if self.cutoff != other.cutoff {
            return Err(Error::Config("cutoff mismatch between graded elements".into()));
        }
        Ok(())
    }

    /// Adds `q * other` in place.
    pub fn add_scaled(&mut self, other: &Self, q: &Q) {
        debug_assert_eq!(self.model.name, other.model.name);
        for ((i, m), c) in &other.terms {
            self.add_term(*i, m.clone(), c * q);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_model(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Q::one());
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_model(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Q::one());
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, q: &Q) -> Self {
        let mut out = Self::zero(&self.ring, &self.model, self.cutoff);
        out.add_scaled(self, q);
        out
    }

    /// The same element with a lower cutoff.
    pub fn truncate(&self, e: Energy) -> Self {
        let cut = if e < self.cutoff { e } else { self.cutoff };
        let mut out = Self::zero(&self.ring, &self.model, cut);
        for ((i, m), q) in &self.terms {
            out.add_term(*i, m.clone(), q.clone());
        }
        out
    }

    /// Re-homes the element at another cutoff, dropping terms above it.
    pub fn with_cutoff(&self, e: Energy) -> Self {
        let mut out = Self::zero(&self.ring, &self.model, e);
        for ((i, m), q) in &self.terms {
            out.add_term(*i, m.clone(), q.clone());
        }
        out
    }

    /// Coefficient of `m * e_i`.
    pub fn coeff(&self, i: usize, m: &Mono) -> Q {
        self.terms.get(&(i, m.clone())).cloned().unwrap_or_else(Q::zero)
    }

    /// Terms as atoms.
    pub fn atoms(&self) -> Vec<Atom> {
        self.terms
            .iter()
            .map(|((i, m), q)| Atom {
                idx: *i,
                mono: m.clone(),
                coeff: q.clone(),
                form_degree: self.model.degree(*i),
                scalar_parity: self.ring.parity(m),
            })
            .collect()
    }

    /// Total degree if homogeneous; `None` for zero or mixed elements.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|(i, m)| self.model.degree(*i) + self.ring.degree(m));
        let d = it.next()?;
        if it.all(|x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Splits into homogeneous components keyed by total degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, GradedElement> {
        let mut out: BTreeMap<i64, GradedElement> = BTreeMap::new();
        for ((i, m), q) in &self.terms {
            let d = self.model.degree(*i) + self.ring.degree(m);
            out.entry(d).or_insert_with(|| Self::zero(&self.ring, &self.model, self.cutoff)).add_term(
                *i,
                m.clone(),
                q.clone(),
            );
        }
        out
    }

    /// Minimum energy over terms, `None` for zero.
    pub fn valuation(&self) -> Option<Energy> {
        self.terms.keys().map(|(_, m)| self.ring.energy(m)).min()
    }

    /// `c * self`, computed termwise as `(c c_i) e_i`.
    pub fn mul_scalar(&self, c: &NovikovElement) -> Self {
        let mut out = Self::zero(&self.ring, &self.model, self.cutoff);
        for (m1, q1) in c.terms() {
            for ((i, m2), q2) in &self.terms {
                if let Some((m, s)) = self.ring.mono_mul(m1, m2) {
                    out.add_term(*i, m, sign_q(s, q1 * q2));
                }
            }
        }
        out
    }

    /// Multiplies by the monomial `m` on the left.
    pub fn mul_mono(&self, m1: &Mono, q: &Q) -> Self {
        let mut out = Self::zero(&self.ring, &self.model, self.cutoff);
        for ((i, m2), q2) in &self.terms {
            if let Some((m, s)) = self.ring.mono_mul(m1, m2) {
                out.add_term(*i, m, sign_q(s, q * q2));
            }
        }
        out
    }

    /// `(c1 e1) ^ (c2 e2) = (-1)^{|e1||c2|} c1 c2 e1 ^ e2`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.same_model(other)?;
        let mut out = Self::zero(&self.ring, &self.model, self.cutoff);
        for ((a, m1), q1) in &self.terms {
            let pa = self.model.degree(*a);
            for ((b, m2), q2) in &other.terms {
                let Some((m, s)) = self.ring.mono_mul(m1, m2) else { continue };
                let s = s ^ ((pa.rem_euclid(2) as u8) & self.ring.parity(m2));
                let coef = sign_q(s, q1 * q2);
                for (c, r) in self.model.wedge_basis(*a, *b) {
                    out.add_term(*c, m.clone(), &coef * r);
                }
            }
        }
        Ok(out)
    }

    /// `d(c e) = (-1)^{|c|} c de`.
    pub fn differential(&self) -> Self {
        let mut out = Self::zero(&self.ring, &self.model, self.cutoff);
        for ((a, m), q) in &self.terms {
            let coef = sign_q(self.ring.parity(m), q.clone());
            for (c, r) in self.model.diff_basis(*a) {
                out.add_term(*c, m.clone(), &coef * r);
            }
        }
        out
    }

    /// Restriction `c e |-> c r(e)` into `target`.
    pub fn restrict(&self, target: &Arc<FormModel>) -> Result<Self> {
        if !self.model.has_restriction() {
            return Err(Error::Config(format!("{} has no restriction map", self.model.name)));
        }
        let mut out = Self::zero(&self.ring, target, self.cutoff);
        for ((a, m), q) in &self.terms {
            for (c, r) in self.model.restrict_basis(*a).into_iter().flatten() {
                out.add_term(*c, m.clone(), q * r);
            }
        }
        Ok(out)
    }

    /// `int (c e) = c int e`.
    pub fn integrate(&self) -> NovikovElement {
        let mut out = NovikovElement::zero(&self.ring, self.cutoff);
        for ((a, m), q) in &self.terms {
            let w = &self.model.integral[*a];
            if !w.is_zero() {
                out.add_term(m.clone(), q * w);
            }
        }
        out
    }

    /// Coefficient of the unit form as a Novikov element.
    pub fn unit_coefficient(&self) -> NovikovElement {
        let u = self.model.unit;
        NovikovElement::from_terms(
            &self.ring,
            self.cutoff,
            self.terms.iter().filter(|((i, _), _)| *i == u).map(|((_, m), q)| (m.clone(), q.clone())),
        )
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((i, m), q) in &self.terms {
            let unit = *i == self.model.unit;
            let factor = match (m.is_one(), unit) {
                (true, true) => None,
                (true, false) => Some(self.model.label(*i).to_string()),
                (false, true) => Some(m.render()),
                (false, false) => Some(format!("{}*{}", m.render(), self.model.label(*i))),
            };
            parts.push(match factor {
                None => fmt_q(q),
                Some(f) if q.is_one() => f,
                Some(f) if *q == -Q::one() => format!("-{f}"),
                Some(f) => format!("{}*{f}", fmt_q(q)),
            });
        }
        let mut s = parts.join(" + ");
        s = s.replace("+ -", "- ");
        s
    }

    /// Largest absolute coefficient, zero for the zero element.
    pub fn max_abs(&self) -> Q {
        self.terms.values().map(|q| q.abs()).max().unwrap_or_else(Q::zero)
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `<a, b> = int a ^ b`.
pub fn pairing(a: &GradedElement, b: &GradedElement) -> Result<NovikovElement> {
    Ok(a.wedge(b)?.integrate())
}

/// A current on a finite model, stored by its values on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Current {
    pub model_name: String,
    pub values: Vec<NovikovElement>,
}

impl Current {
    pub fn zero(ring: &Arc<NovikovRing>, model: &FormModel, cutoff: Energy) -> Self {
        Current { model_name: model.name.clone(), values: vec![NovikovElement::zero(ring, cutoff); model.len()] }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(NovikovElement::is_zero)
    }

    /// `lambda(sum c_i e_i) = sum c_i lambda(e_i)`.
    pub fn apply(&self, x: &GradedElement) -> Result<NovikovElement> {
        if x.model().name != self.model_name {
            return Err(Error::Config("current applied to a form of another model".into()));
        }
        let mut out = NovikovElement::zero(x.ring(), x.cutoff());
        for ((i, m), q) in x.terms() {
            for (m2, q2) in self.values[*i].terms() {
                if let Some((mm, s)) = x.ring().mono_mul(m, m2) {
                    out.add_term(mm, sign_q(s, q * q2));
                }
            }
        }
        Ok(out)
    }
}

/// `phi(xi)(e) = <e, xi>`.
pub fn phi_current(xi: &GradedElement) -> Result<Current> {
    let model = xi.model();
    let mut values = Vec::with_capacity(model.len());
    for i in 0..model.len() {
        let e = GradedElement::basis(xi.ring(), model, xi.cutoff(), i);
        values.push(pairing(&e, xi)?);
    }
    Ok(Current { model_name: model.name.clone(), values })
}

/// `(d lambda)(e) = (-1)^{|e|+1} lambda(de)`.
pub fn current_differential(
    z: &Current,
    ring: &Arc<NovikovRing>,
    model: &Arc<FormModel>,
    cutoff: Energy,
) -> Result<Current> {
    let mut values = Vec::with_capacity(model.len());
    for i in 0..model.len() {
        let de = GradedElement::basis(ring, model, cutoff, i).differential();
        let v = z.apply(&de)?;
        values.push(if (model.degree(i) + 1) % 2 != 0 { v.neg() } else { v });
    }
    Ok(Current { model_name: model.name.clone(), values })
}

/// Exterior algebra on the given degree-1 generators with zero
/// differential and integral 1 on the ordered top product.
pub fn exterior_spec(name: &str, gens: &[&str]) -> ModelSpec {
    let n = gens.len();
    let label = |mask: usize| -> String {
        if mask == 0 {
            return "1".into();
        }
        let mut s = String::new();
        for (j, g) in gens.iter().enumerate() {
            if mask >> j & 1 == 1 {
                s.push_str(g);
            }
        }
        s
    };
    let mut masks: Vec<usize> = (0..1usize << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let basis = masks.iter().map(|&m| (label(m), m.count_ones() as i64)).collect();
    let mut wedge = Vec::new();
    for &a in &masks {
        for &b in &masks {
            if a == 0 || b == 0 {
                continue;
            }
            let out = if a & b != 0 {
                vec![]
            } else {
                // Sign of merging the ordered generator lists.
                let mut inv = 0;
                for i in 0..n {
                    if a >> i & 1 == 1 {
                        inv += (b & ((1 << i) - 1)).count_ones();
                    }
                }
                let q = if inv % 2 == 0 { Q::one() } else { -Q::one() };
                vec![(label(a | b), q)]
            };
            wedge.push((label(a), label(b), out));
        }
    }
    ModelSpec {
        name: name.into(),
        dim: n as i64,
        basis,
        unit: "1".into(),
        wedge,
        diff: vec![],
        integral: vec![(label((1 << n) - 1), Q::one())],
        restriction: None,
    }
}
