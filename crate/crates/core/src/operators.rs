//! Operator families realized as finite tables of raw pushforwards, with
//! the sign prefactors applied centrally, the bounding-pair deformation,
//! axiom suites and bounding-pair checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{pairing, Atom, FormModel, GradedElement, LabeledVec, SparseVec};
use crate::novikov::{floor_div, fmt_energy, Energy, Mono, NovikovElement, NovikovRing, Q};
use crate::signs::{par, sigma_perm};

/// Side of the one-sided constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

/// Operator family, including the constraint index where present.
///
/// `Geodesic(0)` constrains `z0, w2, w1`; `Geodesic(m)` for `m >= 1`
/// constrains `z0, w1, z_m`; `Geodesic4(m)` constrains `z0, w2, w1, z_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Disk,
    Sphere,
    Geodesic(usize),
    Geodesic4(usize),
    Horocyclic,
    OneSide(Side, usize),
}

/// A kind with the constraint index forgotten; used for arity bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Disk,
    Sphere,
    Geodesic,
    Geodesic4,
    Horocyclic,
    OneSide(Side),
}

impl Kind {
    pub fn family(self) -> Family {
        match self {
            Kind::Disk => Family::Disk,
            Kind::Sphere => Family::Sphere,
            Kind::Geodesic(_) => Family::Geodesic,
            Kind::Geodesic4(_) => Family::Geodesic4,
            Kind::Horocyclic => Family::Horocyclic,
            Kind::OneSide(s, _) => Family::OneSide(s),
        }
    }

    /// The boundary constraint index, if the kind carries one.
    pub fn m(self) -> Option<usize> {
        match self {
            Kind::Geodesic(m) if m >= 1 => Some(m),
            Kind::Geodesic4(m) | Kind::OneSide(_, m) => Some(m),
            _ => None,
        }
    }

    /// The same family with constraint index `m`.
    pub fn with_m(self, m: usize) -> Kind {
        match self {
            Kind::Geodesic(_) => Kind::Geodesic(m),
            Kind::Geodesic4(_) => Kind::Geodesic4(m),
            Kind::OneSide(s, _) => Kind::OneSide(s, m),
            other => other,
        }
    }

    /// Degree of the operator before the Maslov term:
    /// output degree = inputs + shift - mu.
    pub fn degree_shift(self, k: usize, l: usize) -> i64 {
        let (k, l) = (k as i64, l as i64);
        match self {
            Kind::Disk | Kind::OneSide(..) => 2 - k - 2 * l,
            Kind::Geodesic(_) | Kind::Horocyclic => 3 - k - 2 * l,
            Kind::Geodesic4(_) => 4 - k - 2 * l,
            Kind::Sphere => 4 - 2 * l,
        }
    }

    /// First interior position (0-based) from which the operator is
    /// symmetric in its interior inputs.
    pub fn symmetric_from(self) -> usize {
        match self {
            Kind::Disk | Kind::Sphere => 0,
            Kind::Geodesic(0) | Kind::Geodesic4(_) | Kind::Horocyclic => 2,
            Kind::Geodesic(_) | Kind::OneSide(..) => 1,
        }
    }

    /// Number of interior points the constraint involves.
    pub fn min_l(self) -> usize {
        match self {
            Kind::Disk | Kind::Sphere => 0,
            Kind::Geodesic(0) | Kind::Geodesic4(_) | Kind::Horocyclic => 2,
            Kind::Geodesic(_) | Kind::OneSide(..) => 1,
        }
    }

    /// Sign prefactor parity from total input degrees.
    pub fn prefactor(self, eps: u8, alpha_sum: i64, k: usize, eta_sum: i64, n: i64) -> u8 {
        match self {
            Kind::Disk | Kind::Geodesic4(_) | Kind::OneSide(..) => eps,
            Kind::Geodesic(_) => par(eps as i64 + alpha_sum + k as i64),
            Kind::Horocyclic => par(eps as i64 + alpha_sum + eta_sum + n + 1),
            Kind::Sphere => 0,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Disk => write!(f, "disk"),
            Kind::Sphere => write!(f, "sphere"),
            Kind::Geodesic(m) => write!(f, "geodesic:{m}"),
            Kind::Geodesic4(m) => write!(f, "geodesic4:{m}"),
            Kind::Horocyclic => write!(f, "horocyclic"),
            Kind::OneSide(Side::Plus, m) => write!(f, "plus:{m}"),
            Kind::OneSide(Side::Minus, m) => write!(f, "minus:{m}"),
        }
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let m = || -> Result<usize> {
            tail.ok_or_else(|| Error::Parse(format!("kind `{s}` needs an index")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in kind `{s}`")))
        };
        let k = match head {
            "disk" if tail.is_none() => Kind::Disk,
            "sphere" if tail.is_none() => Kind::Sphere,
            "horocyclic" if tail.is_none() => Kind::Horocyclic,
            "geodesic" => Kind::Geodesic(m()?),
            "geodesic4" => {
                let m = m()?;
                if m == 0 {
                    return Err(Error::Parse("geodesic4 needs m >= 1".into()));
                }
                Kind::Geodesic4(m)
            }
            "plus" | "minus" => {
                let m = m()?;
                if m == 0 {
                    return Err(Error::Parse(format!("{head} needs m >= 1")));
                }
                Kind::OneSide(if head == "plus" { Side::Plus } else { Side::Minus }, m)
            }
            _ => return Err(Error::Parse(format!("unknown operator kind `{s}`"))),
        };
        Ok(k)
    }
}

/// Raw table: basis multi-index (boundary inputs, then interior inputs)
/// to an output vector.
pub type Table = HashMap<Vec<usize>, SparseVec>;

/// Sphere-class data: the class group of spheres, its map into the disk
/// classes and the relative-spin parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereData {
    pub rank: usize,
    /// `varpi[i]` is the image of the i-th generator.
    pub varpi: Vec<Vec<i64>>,
    pub w_s: Vec<u8>,
    pub effective: Vec<Vec<i64>>,
}

impl SphereData {
    pub fn varpi_of(&self, beta: &[i64], disk_rank: usize) -> Vec<i64> {
        let mut out = vec![0; disk_rank];
        for (b, img) in beta.iter().zip(&self.varpi) {
            for (o, x) in out.iter_mut().zip(img) {
                *o += b * x;
            }
        }
        out
    }

    pub fn w_s_of(&self, beta: &[i64]) -> u8 {
        par(beta.iter().zip(&self.w_s).map(|(b, w)| b * *w as i64).sum())
    }
}

/// One stored table together with its class.
#[derive(Clone, Debug)]
pub struct TableEntry {
    pub beta: Vec<i64>,
    pub table: Table,
}

/// A finite geometric backend.
#[derive(Clone, Debug)]
pub struct Backend {
    pub name: String,
    pub n: i64,
    pub ring: Arc<NovikovRing>,
    pub sphere: SphereData,
    pub l_model: Arc<FormModel>,
    pub x_model: Arc<FormModel>,
    pub pd_l: SparseVec,
    tables: BTreeMap<(Kind, usize, usize), Vec<TableEntry>>,
    arity: HashMap<Family, (usize, usize)>,
}

/// A table as supplied by a backend author, with basis labels.
#[derive(Clone, Debug)]
pub struct TableRecord {
    pub kind: Kind,
    pub beta: Vec<i64>,
    pub k: usize,
    pub l: usize,
    pub entries: Vec<(Vec<String>, Vec<String>, LabeledVec)>,
}

#[inline]
fn sign_q(parity: u8, q: Q) -> Q {
    if parity & 1 == 1 {
        -q
    } else {
        q
    }
}

impl Backend {
    /// Assembles a backend; structural problems are parse errors, semantic
    /// problems are left to [`Backend::validate`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        n: i64,
        ring: Arc<NovikovRing>,
        sphere: SphereData,
        l_model: Arc<FormModel>,
        x_model: Arc<FormModel>,
        pd_l: SparseVec,
        records: &[TableRecord],
    ) -> Result<Self> {
        if sphere.varpi.len() != sphere.rank || sphere.w_s.len() != sphere.rank {
            return Err(Error::Parse("sphere block: varpi and w_s must have one row per generator".into()));
        }
        if sphere.varpi.iter().any(|r| r.len() != ring.rank()) {
            return Err(Error::Parse("sphere block: varpi rows must match the class rank".into()));
        }
        let mut tables: BTreeMap<(Kind, usize, usize), Vec<TableEntry>> = BTreeMap::new();
        let mut arity: HashMap<Family, (usize, usize)> = HashMap::new();
        for rec in records {
            let beta_rank = if rec.kind == Kind::Sphere { sphere.rank } else { ring.rank() };
            if rec.beta.len() != beta_rank {
                return Err(Error::Parse(format!("{} table: class {:?} has wrong rank", rec.kind, rec.beta)));
            }
            if rec.kind == Kind::Sphere && rec.k != 0 {
                return Err(Error::Parse("sphere tables take no boundary inputs".into()));
            }
            let out_model = if rec.kind == Kind::Sphere { &x_model } else { &l_model };
            let mut table = Table::new();
            for (a, e, out) in &rec.entries {
                if a.len() != rec.k || e.len() != rec.l {
                    return Err(Error::Parse(format!(
                        "{} table at {:?}: entry arity ({}, {}) does not match ({}, {})",
                        rec.kind,
                        rec.beta,
                        a.len(),
                        e.len(),
                        rec.k,
                        rec.l
                    )));
                }
                let mut key = Vec::with_capacity(rec.k + rec.l);
                for x in a {
                    key.push(l_model.index_of(x).map_err(|e| Error::Parse(e.to_string()))?);
                }
                for x in e {
                    key.push(x_model.index_of(x).map_err(|e| Error::Parse(e.to_string()))?);
                }
                let mut vec = SparseVec::new();
                for (c, q) in out {
                    if q.is_zero() {
                        continue;
                    }
                    let ci = out_model.index_of(c).map_err(|e| Error::Parse(e.to_string()))?;
                    vec.push((ci, q.clone()));
                }
                vec.sort_by_key(|(i, _)| *i);
                if table.insert(key, vec).is_some() {
                    return Err(Error::Parse(format!("{} table at {:?}: duplicate entry", rec.kind, rec.beta)));
                }
            }
            let slot = tables.entry((rec.kind, rec.k, rec.l)).or_default();
            if slot.iter().any(|t| t.beta == rec.beta) {
                return Err(Error::Parse(format!(
                    "duplicate {} table for class {:?} at arity ({}, {})",
                    rec.kind, rec.beta, rec.k, rec.l
                )));
            }
            slot.push(TableEntry { beta: rec.beta.clone(), table });
            let a = arity.entry(rec.kind.family()).or_insert((0, 0));
            a.0 = a.0.max(rec.k);
            a.1 = a.1.max(rec.l);
        }
        let d = arity.entry(Family::Disk).or_insert((0, 0));
        d.0 = d.0.max(1);
        Ok(Backend { name: name.into(), n, ring, sphere, l_model, x_model, pd_l, tables, arity })
    }

    /// All stored tables in deterministic order.
    pub fn tables(&self) -> impl Iterator<Item = (&(Kind, usize, usize), &Vec<TableEntry>)> {
        self.tables.iter()
    }

    /// Mutable access used to construct mutation fixtures.
    pub fn table_mut(&mut self, kind: Kind, k: usize, l: usize, beta: &[i64]) -> Option<&mut Table> {
        self.tables.get_mut(&(kind, k, l))?.iter_mut().find(|t| t.beta == beta).map(|t| &mut t.table)
    }

    pub fn has_cell(&self, kind: Kind, k: usize, l: usize) -> bool {
        self.tables.contains_key(&(kind, k, l))
    }

    /// Largest boundary and interior arity of the family.
    pub fn max_arity(&self, fam: Family) -> (usize, usize) {
        self.arity.get(&fam).copied().unwrap_or((0, 0))
    }

    pub fn beta0(&self) -> Vec<i64> {
        self.ring.classes.beta0()
    }

    /// `PD([L])` as an element.
    pub fn pd(&self, cutoff: Energy) -> GradedElement {
        GradedElement::from_sparse(&self.ring, &self.x_model, cutoff, &self.pd_l)
    }

    fn class_energy(&self, kind: Kind, beta: &[i64]) -> Energy {
        if kind == Kind::Sphere {
            self.ring.classes.omega_of(&self.sphere.varpi_of(beta, self.ring.rank()))
        } else {
            self.ring.classes.omega_of(beta)
        }
    }

    fn class_mu(&self, kind: Kind, beta: &[i64]) -> i64 {
        if kind == Kind::Sphere {
            self.ring.classes.mu_of(&self.sphere.varpi_of(beta, self.ring.rank()))
        } else {
            self.ring.classes.mu_of(beta)
        }
    }

    /// Checks models, class data, admissibility and the degree axiom.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        bad.extend(self.l_model.validate());
        bad.extend(self.x_model.validate());
        bad.extend(self.x_model.validate_restriction(&self.l_model));
        if self.l_model.dim != self.n || self.x_model.dim != 2 * self.n {
            bad.push(format!(
                "dimensions: L-model {} and X-model {} do not match n = {}",
                self.l_model.dim, self.x_model.dim, self.n
            ));
        }
        if !self.l_model.pairing_nondegenerate() {
            bad.push("L-model pairing is degenerate".into());
        }
        if !self.x_model.pairing_nondegenerate() {
            bad.push("X-model pairing is degenerate".into());
        }
        for (i, _) in &self.pd_l {
            if self.x_model.degree(*i) != self.n {
                bad.push(format!("PD([L]) has a component {} not of degree n", self.x_model.label(*i)));
            }
        }
        if let Err(e) = self.ring.classes.check() {
            bad.push(e.to_string());
        }
        for b in &self.sphere.effective {
            let img = self.sphere.varpi_of(b, self.ring.rank());
            let w = self.ring.classes.omega_of(&img);
            if b.iter().any(|&x| x != 0) && w <= Energy::zero() {
                bad.push(format!("sphere class {b:?} has non-positive energy {}", fmt_energy(&w)));
            }
        }
        let b0 = self.beta0();
        for ((kind, k, l), entries) in &self.tables {
            for te in entries {
                let beta = &te.beta;
                let zero_class = beta.iter().all(|&x| x == 0);
                let mu = self.class_mu(*kind, beta);
                let w = self.class_energy(*kind, beta);
                let cell = format!("{kind} ({k},{l}) at {beta:?}");
                if !zero_class && w <= Energy::zero() {
                    bad.push(format!("{cell}: class has non-positive energy"));
                }
                if mu % 2 != 0 {
                    bad.push(format!("{cell}: odd Maslov index {mu}"));
                }
                if *kind != Kind::Sphere && !zero_class && mu < 2 && te.table.values().any(|v| !v.is_empty()) {
                    bad.push(format!("admissibility: {cell} is nonzero but mu = {mu} < 2"));
                }
                if *kind == Kind::Disk && *beta == b0 && ((*k, *l) == (1, 0) || (*k, *l) == (0, 0)) {
                    bad.push(format!("{cell}: this cell is fixed by definition and cannot carry a table"));
                }
                if *kind == Kind::Sphere && zero_class && *l <= 1 {
                    bad.push(format!("{cell}: this cell is fixed by definition and cannot carry a table"));
                }
                if *l < kind.min_l() || kind.m().is_some_and(|m| m > *k) {
                    bad.push(format!("{cell}: the constraint needs more marked points"));
                }
                let shift = kind.degree_shift(*k, *l) - mu;
                let mut keys: Vec<&Vec<usize>> = te.table.keys().collect();
                keys.sort();
                for key in keys {
                    let out_model = if *kind == Kind::Sphere { &self.x_model } else { &self.l_model };
                    let input: i64 = key
                        .iter()
                        .enumerate()
                        .map(|(j, &i)| if j < *k { self.l_model.degree(i) } else { self.x_model.degree(i) })
                        .sum();
                    for (c, _) in &te.table[key] {
                        if out_model.degree(*c) != input + shift {
                            bad.push(format!(
                                "degree axiom: {cell} entry {} has output {} of degree {}, expected {}",
                                self.render_key(*k, key),
                                out_model.label(*c),
                                out_model.degree(*c),
                                input + shift
                            ));
                        }
                    }
                }
            }
        }
        bad
    }

    /// Human-readable rendering of a table key.
    pub fn render_key(&self, k: usize, key: &[usize]) -> String {
        let a: Vec<&str> = key[..k].iter().map(|&i| self.l_model.label(i)).collect();
        let e: Vec<&str> = key[k..].iter().map(|&i| self.x_model.label(i)).collect();
        format!("({}; {})", a.join(","), e.join(","))
    }

    fn check_inputs(&self, kind: Kind, alpha: &[GradedElement], eta: &[GradedElement]) -> Result<()> {
        if kind == Kind::Sphere && !alpha.is_empty() {
            return Err(Error::Usage("sphere operators take no boundary inputs".into()));
        }
        for a in alpha {
            if a.model().name != self.l_model.name {
                return Err(Error::Usage(format!("boundary input lives on {}", a.model().name)));
            }
        }
        for e in eta {
            if e.model().name != self.x_model.name {
                return Err(Error::Usage(format!("interior input lives on {}", e.model().name)));
            }
        }
        if let Some(m) = kind.m() {
            if m > alpha.len() {
                return Err(Error::Usage(format!("{kind} needs at least {m} boundary inputs")));
            }
        }
        Ok(())
    }

    /// Sign-prefactored evaluation of one table, multiplied by `T^shift`.
    #[allow(clippy::too_many_arguments)]
    fn eval_table(
        &self,
        kind: Kind,
        table: &Table,
        alpha: &[Vec<Atom>],
        eta: &[Vec<Atom>],
        shift: &Mono,
        extra_parity: u8,
        out: &mut GradedElement,
    ) {
        let k = alpha.len();
        let l = eta.len();
        let mut key = vec![0usize; k + l];
        let ring = &*self.ring;
        // Integrand order: interior inputs, then boundary inputs.
        let slots: Vec<&Vec<Atom>> = eta.iter().chain(alpha.iter()).collect();
        struct State {
            mono: Mono,
            coeff: Q,
            parity: u8,
            form_par: u8,
            eps: i64,
            alpha_sum: i64,
            eta_sum: i64,
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(
            be: &Backend,
            ring: &NovikovRing,
            kind: Kind,
            table: &Table,
            slots: &[&Vec<Atom>],
            s: usize,
            k: usize,
            l: usize,
            key: &mut Vec<usize>,
            st: &State,
            shift: &Mono,
            extra: u8,
            out: &mut GradedElement,
        ) {
            if s == slots.len() {
                let Some(vec) = table.get(key.as_slice()) else { return };
                let kk = k as i64;
                let eps = par(st.eps + kk * (kk + 1) / 2 + 1);
                let pre = kind.prefactor(eps, st.alpha_sum, k, st.eta_sum, be.n);
                let Some((mono, s2)) = ring.mono_mul(&st.mono, shift) else { return };
                let parity = st.parity ^ pre ^ extra ^ s2;
                for (c, r) in vec {
                    out.add_term(*c, mono.clone(), sign_q(parity, &st.coeff * r));
                }
                return;
            }
            for atom in slots[s] {
                let Some((mono, sm)) = ring.mono_mul(&st.mono, &atom.mono) else { continue };
                let tot = atom.form_degree + ring.degree(&atom.mono);
                let (eps, alpha_sum, eta_sum) = if s < l {
                    (st.eps, st.alpha_sum, st.eta_sum + tot)
                } else {
                    let j = (s - l) as i64 + 1;
                    (st.eps + j * tot, st.alpha_sum + tot, st.eta_sum)
                };
                let pos = if s < l { k + s } else { s - l };
                key[pos] = atom.idx;
                let next = State {
                    mono,
                    coeff: &st.coeff * &atom.coeff,
                    parity: st.parity ^ sm ^ (atom.scalar_parity & st.form_par),
                    form_par: st.form_par ^ par(atom.form_degree),
                    eps,
                    alpha_sum,
                    eta_sum,
                };
                rec(be, ring, kind, table, slots, s + 1, k, l, key, &next, shift, extra, out);
            }
        }
        let st =
            State { mono: ring.one_mono(), coeff: Q::one(), parity: 0, form_par: 0, eps: 0, alpha_sum: 0, eta_sum: 0 };
        rec(self, ring, kind, table, &slots, 0, k, l, &mut key, &st, shift, extra_parity, out);
    }

    fn zero_out(&self, kind: Kind, cutoff: Energy) -> GradedElement {
        let m = if kind == Kind::Sphere { &self.x_model } else { &self.l_model };
        GradedElement::zero(&self.ring, m, cutoff)
    }

    /// `q^beta` for one class, without the `T^beta` factor.
    pub fn eval_class(
        &self,
        kind: Kind,
        beta: &[i64],
        alpha: &[GradedElement],
        eta: &[GradedElement],
        cutoff: Energy,
    ) -> Result<GradedElement> {
        self.check_inputs(kind, alpha, eta)?;
        let (k, l) = (alpha.len(), eta.len());
        let mut out = self.zero_out(kind, cutoff);
        let zero_class = beta.iter().all(|&x| x == 0);
        if kind == Kind::Disk && zero_class {
            if (k, l) == (1, 0) {
                return Ok(alpha[0].differential().with_cutoff(cutoff));
            }
            if (k, l) == (0, 0) {
                return Ok(out);
            }
        }
        if kind == Kind::Sphere && zero_class && l <= 1 {
            return Ok(out);
        }
        let Some(entries) = self.tables.get(&(kind, k, l)) else { return Ok(out) };
        let Some(te) = entries.iter().find(|t| t.beta == beta) else { return Ok(out) };
        let a: Vec<Vec<Atom>> = alpha.iter().map(GradedElement::atoms).collect();
        let e: Vec<Vec<Atom>> = eta.iter().map(GradedElement::atoms).collect();
        let ws = if kind == Kind::Sphere { self.sphere.w_s_of(beta) } else { 0 };
        self.eval_table(kind, &te.table, &a, &e, &self.ring.one_mono(), ws, &mut out);
        Ok(out)
    }

    /// `q = sum_beta T^beta q^beta` (spheres weighted by `T^{varpi beta}`),
    /// truncated at `cutoff`.
    pub fn eval(
        &self,
        kind: Kind,
        alpha: &[GradedElement],
        eta: &[GradedElement],
        cutoff: Energy,
        exclude_degenerate: bool,
    ) -> Result<GradedElement> {
        self.check_inputs(kind, alpha, eta)?;
        let (k, l) = (alpha.len(), eta.len());
        let mut out = self.zero_out(kind, cutoff);
        if kind == Kind::Disk && (k, l) == (1, 0) && !exclude_degenerate {
            out = alpha[0].differential().with_cutoff(cutoff);
        }
        let Some(entries) = self.tables.get(&(kind, k, l)) else { return Ok(out) };
        let a: Vec<Vec<Atom>> = alpha.iter().map(GradedElement::atoms).collect();
        let e: Vec<Vec<Atom>> = eta.iter().map(GradedElement::atoms).collect();
        if a.iter().chain(e.iter()).any(Vec::is_empty) {
            return Ok(out);
        }
        for te in entries {
            if self.class_energy(kind, &te.beta) > cutoff {
                continue;
            }
            let (shift, ws) = if kind == Kind::Sphere {
                let img = self.sphere.varpi_of(&te.beta, self.ring.rank());
                (self.ring.t_beta(&img), self.sphere.w_s_of(&te.beta))
            } else {
                (self.ring.t_beta(&te.beta), 0)
            };
            self.eval_table(kind, &te.table, &a, &e, &shift, ws, &mut out);
        }
        Ok(out)
    }

    /// The deformed operator `q^{gamma,b}` truncated at `cutoff`.
    pub fn deform(
        &self,
        pair: &BoundingPair,
        kind: Kind,
        alpha: &[GradedElement],
        eta: &[GradedElement],
        cutoff: Energy,
        exclude_degenerate: bool,
    ) -> Result<GradedElement> {
        self.check_inputs(kind, alpha, eta)?;
        let (k, l) = (alpha.len(), eta.len());
        let (max_k, max_l) = self.max_arity(kind.family());
        let t_max = match pair.gamma.valuation() {
            None => 0,
            Some(v) if v <= Energy::zero() => {
                return Err(Error::Precondition("gamma must have positive valuation".into()))
            }
            Some(v) => floor_div(cutoff, v).min(max_l.saturating_sub(l)),
        };
        let s_max = if kind == Kind::Sphere {
            0
        } else {
            match pair.b.valuation() {
                None => 0,
                Some(v) if v <= Energy::zero() => {
                    return Err(Error::Precondition("b must have positive valuation".into()))
                }
                Some(v) => floor_div(cutoff, v).min(max_k.saturating_sub(k)),
            }
        };
        let gamma = pair.gamma.with_cutoff(cutoff);
        let b = pair.b.with_cutoff(cutoff);
        let mut out = self.zero_out(kind, cutoff);
        let mut fact = Q::one();
        for t in 0..=t_max {
            if t > 0 {
                fact *= Q::from_integer(t.into());
            }
            let mut eta_t: Vec<GradedElement> = eta.to_vec();
            eta_t.extend(std::iter::repeat_n(gamma.clone(), t));
            let inv = Q::one() / fact.clone();
            for total in 0..=s_max {
                for comp in compositions(total, k + 1) {
                    let mut args = Vec::with_capacity(k + total);
                    for (j, &s) in comp.iter().enumerate() {
                        args.extend(std::iter::repeat_n(b.clone(), s));
                        if j < k {
                            args.push(alpha[j].clone());
                        }
                    }
                    let kind2 = match kind.m() {
                        Some(m) => kind.with_m(m + comp[..m].iter().sum::<usize>()),
                        None => kind,
                    };
                    let special = kind2 == Kind::Disk && args.len() == 1 && eta_t.is_empty();
                    if !special && !self.has_cell(kind2, args.len(), eta_t.len()) {
                        continue;
                    }
                    let v = self.eval(kind2, &args, &eta_t, cutoff, exclude_degenerate)?;
                    out.add_scaled(&v, &inv);
                }
            }
        }
        Ok(out)
    }

    /// Evaluates through `pair` when present, plainly otherwise.
    pub fn q(
        &self,
        pair: Option<&BoundingPair>,
        kind: Kind,
        alpha: &[GradedElement],
        eta: &[GradedElement],
        cutoff: Energy,
        exclude_degenerate: bool,
    ) -> Result<GradedElement> {
        match pair {
            Some(p) if !p.is_zero() => self.deform(p, kind, alpha, eta, cutoff, exclude_degenerate),
            _ => self.eval(kind, alpha, eta, cutoff, exclude_degenerate),
        }
    }

    /// All basis tuples of the given arity over the two models.
    pub fn basis_tuples(&self, k: usize, l: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        let (nl, nx) = (self.l_model.len(), self.x_model.len());
        let total = k + l;
        let mut idx = vec![0usize; total];
        loop {
            out.push((idx[..k].to_vec(), idx[k..].to_vec()));
            let mut p = total;
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                let lim = if p < k { nl } else { nx };
                idx[p] += 1;
                if idx[p] < lim {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    /// Basis elements for index lists.
    pub fn basis_inputs(&self, a: &[usize], e: &[usize], cutoff: Energy) -> (Vec<GradedElement>, Vec<GradedElement>) {
        (
            a.iter().map(|&i| GradedElement::basis(&self.ring, &self.l_model, cutoff, i)).collect(),
            e.iter().map(|&i| GradedElement::basis(&self.ring, &self.x_model, cutoff, i)).collect(),
        )
    }

    /// Degree of `T^beta` for a table class.
    pub fn class_degree(&self, kind: Kind, beta: &[i64]) -> i64 {
        self.class_mu(kind, beta)
    }
}

/// All weak compositions of `total` into `parts` parts, in lexicographic
/// order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    fn rec(rem: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in (0..=rem).rev() {
            cur.push(x);
            rec(rem - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out.reverse();
    out
}

/// A bulk deformation `gamma` on X and a boundary deformation `b` on L.
#[derive(Clone, Debug)]
pub struct BoundingPair {
    pub gamma: GradedElement,
    pub b: GradedElement,
}

impl BoundingPair {
    pub fn zero(be: &Backend, cutoff: Energy) -> Self {
        BoundingPair {
            gamma: GradedElement::zero(&be.ring, &be.x_model, cutoff),
            b: GradedElement::zero(&be.ring, &be.l_model, cutoff),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.is_zero() && self.b.is_zero()
    }
}

/// Outcome of the bounding-pair test.
#[derive(Clone, Debug, PartialEq)]
pub enum BpVerdict {
    /// `q_{0,0}^{gamma,b} = c * 1`.
    Bounding(NovikovElement),
    /// The failing component.
    NotBounding(String),
}

/// Checks `q_{0,0}^{gamma,b} = c * 1` with `v(c) > 0` and `|c| = 2` below
/// the cutoff.
pub fn bounding_pair_verify(be: &Backend, pair: &BoundingPair, cutoff: Energy) -> Result<BpVerdict> {
    if !pair.gamma.differential().is_zero() {
        return Ok(BpVerdict::NotBounding(format!("gamma is not closed: d gamma = {}", pair.gamma.differential())));
    }
    let q00 = be.deform(pair, Kind::Disk, &[], &[], cutoff, false)?;
    let unit = be.l_model.unit;
    for ((i, m), q) in q00.terms() {
        if *i != unit {
            let mut w = GradedElement::zero(&be.ring, &be.l_model, cutoff);
            w.add_term(*i, m.clone(), q.clone());
            return Ok(BpVerdict::NotBounding(format!("q_00 has a component {} off the unit", w.render())));
        }
    }
    let c = q00.unit_coefficient();
    for m in c.terms().keys() {
        if be.ring.degree(m) != 2 {
            return Ok(BpVerdict::NotBounding(format!("c has a term {} of degree {}", m.render(), be.ring.degree(m))));
        }
        if be.ring.energy(m) <= Energy::zero() {
            return Ok(BpVerdict::NotBounding(format!("c has a term {} of zero energy", m.render())));
        }
    }
    Ok(BpVerdict::Bounding(c))
}

/// The sufficient degree criterion for a bounding pair: closed inputs,
/// `b` built from forms of degree at most 1 with total degree 1, `gamma`
/// from forms of degree at most 2 with total degree 2, positive valuations
/// and `gamma|_L` of form degree 0.
pub fn bp_degree_criterion(be: &Backend, pair: &BoundingPair) -> bool {
    let ring = &be.ring;
    let ok_terms = |x: &GradedElement, max_form: i64, total: i64| {
        x.terms().keys().all(|(i, m)| {
            let f = x.model().degree(*i);
            f <= max_form && f + ring.degree(m) == total && ring.energy(m) > Energy::zero()
        })
    };
    if !pair.b.differential().is_zero() || !pair.gamma.differential().is_zero() {
        return false;
    }
    if !ok_terms(&pair.b, 1, 1) || !ok_terms(&pair.gamma, 2, 2) {
        return false;
    }
    match pair.gamma.restrict(&be.l_model) {
        Ok(r) => r.terms().keys().all(|(i, _)| be.l_model.degree(*i) == 0),
        Err(_) => false,
    }
}

/// Identifiers of the axiom checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Admissibility,
    Degree,
    Symmetry,
    Unit,
    FundamentalClass,
    Integration,
    GeodesicFundamentalClass,
    ConstrainedUnit,
    SphereUnit,
}

impl Axiom {
    pub const ALL: [Axiom; 9] = [
        Axiom::Admissibility,
        Axiom::Degree,
        Axiom::Symmetry,
        Axiom::Unit,
        Axiom::FundamentalClass,
        Axiom::Integration,
        Axiom::GeodesicFundamentalClass,
        Axiom::ConstrainedUnit,
        Axiom::SphereUnit,
    ];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Admissibility => "admissibility",
            Axiom::Degree => "degree",
            Axiom::Symmetry => "symmetry",
            Axiom::Unit => "unit",
            Axiom::FundamentalClass => "fundamental-class",
            Axiom::Integration => "integration",
            Axiom::GeodesicFundamentalClass => "geodesic-fundamental-class",
            Axiom::ConstrainedUnit => "constrained-unit",
            Axiom::SphereUnit => "sphere-unit",
        };
        f.write_str(s)
    }
}

/// Bounds for the axiom suites.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub max_k: usize,
    pub max_l: usize,
    pub energy: Energy,
}

/// Result of one axiom check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Cells `(kind, beta, k, l)` to probe: every stored table within caps
/// plus the cells fixed by definition.
fn probe_cells(be: &Backend, caps: &Caps) -> Vec<(Kind, Vec<i64>, usize, usize)> {
    let mut cells = Vec::new();
    let b0 = be.beta0();
    for ((kind, k, l), entries) in be.tables() {
        if *k > caps.max_k || *l > caps.max_l {
            continue;
        }
        for te in entries {
            cells.push((*kind, te.beta.clone(), *k, *l));
        }
    }
    for (k, l) in [(1usize, 0usize), (0, 1), (2, 0)] {
        if k <= caps.max_k
            && l <= caps.max_l
            && !cells.iter().any(|c| c.0 == Kind::Disk && c.1 == b0 && c.2 == k && c.3 == l)
        {
            cells.push((Kind::Disk, b0.clone(), k, l));
        }
    }
    if 1 <= caps.max_k
        && 1 <= caps.max_l
        && !cells.iter().any(|c| c.0 == Kind::Geodesic(1) && c.1 == b0 && c.2 == 1 && c.3 == 1)
    {
        cells.push((Kind::Geodesic(1), b0.clone(), 1, 1));
    }
    let s0 = vec![0; be.sphere.rank];
    if 2 <= caps.max_l && !cells.iter().any(|c| c.0 == Kind::Sphere && c.1 == s0 && c.3 == 2) {
        cells.push((Kind::Sphere, s0, 0, 2));
    }
    cells
}

/// Runs one axiom check over all cells within `caps`, with basis inputs.
pub fn check_axiom(be: &Backend, axiom: Axiom, caps: &Caps) -> Result<AxiomReport> {
    let e = caps.energy;
    let mut checked = 0;
    let mut bad = Vec::new();
    let b0 = be.beta0();
    match axiom {
        Axiom::Admissibility | Axiom::Degree => {
            for w in be.validate() {
                let is_adm = w.starts_with("admissibility") || w.contains("Maslov");
                let is_deg = w.starts_with("degree axiom");
                if (axiom == Axiom::Admissibility && is_adm) || (axiom == Axiom::Degree && is_deg) {
                    bad.push(w);
                }
            }
            checked = be.tables().map(|(_, v)| v.len()).sum();
        }
        _ => {
            for (kind, beta, k, l) in probe_cells(be, caps) {
                if be.class_energy(kind, &beta) > e {
                    continue;
                }
                for (ai, ei) in be.basis_tuples(k, l) {
                    let (alpha, eta) = be.basis_inputs(&ai, &ei, e);
                    let cell =
                        format!("{kind} at {beta:?} on {}", be.render_key(k, &[ai.clone(), ei.clone()].concat()));
                    let applies = match axiom {
                        Axiom::Symmetry => l >= 2,
                        Axiom::Unit => kind == Kind::Disk && ai.contains(&be.l_model.unit),
                        Axiom::FundamentalClass | Axiom::Integration => kind == Kind::Disk,
                        Axiom::GeodesicFundamentalClass => {
                            matches!(kind, Kind::Geodesic(m) if m >= 1) && ei.first() == Some(&be.x_model.unit)
                        }
                        Axiom::ConstrainedUnit => {
                            kind != Kind::Disk
                                && kind != Kind::Sphere
                                && ai.iter().enumerate().any(|(j, &i)| i == be.l_model.unit && Some(j + 1) != kind.m())
                        }
                        Axiom::SphereUnit => kind == Kind::Sphere && ei.contains(&be.x_model.unit),
                        _ => false,
                    };
                    if !applies {
                        continue;
                    }
                    checked += 1;
                    let val = be.eval_class(kind, &beta, &alpha, &eta, e)?;
                    match axiom {
                        Axiom::Symmetry => {
                            let start = kind.symmetric_from();
                            let degs: Vec<i64> = ei.iter().map(|&i| be.x_model.degree(i)).collect();
                            for j in start..l.saturating_sub(1) {
                                let mut s: Vec<usize> = (0..l).collect();
                                s.swap(j, j + 1);
                                let sign = sigma_perm(&s, &degs)?;
                                let permuted: Vec<GradedElement> = s.iter().map(|&x| eta[x].clone()).collect();
                                let v2 = be.eval_class(kind, &beta, &alpha, &permuted, e)?;
                                let expect = if sign == 1 { v2.neg() } else { v2 };
                                if val != expect {
                                    bad.push(format!(
                                        "{cell}: swapping interior inputs {} and {} breaks symmetry",
                                        j + 1,
                                        j + 2
                                    ));
                                }
                            }
                        }
                        Axiom::Unit => {
                            let i = ai.iter().position(|&x| x == be.l_model.unit).unwrap_or(0);
                            let expect = if beta == b0 && (k, l) == (2, 0) && i == 0 {
                                alpha[1].clone()
                            } else if beta == b0 && (k, l) == (2, 0) {
                                let d = be.l_model.degree(ai[0]);
                                if d % 2 != 0 {
                                    alpha[0].neg()
                                } else {
                                    alpha[0].clone()
                                }
                            } else {
                                GradedElement::zero(&be.ring, &be.l_model, e)
                            };
                            if val != expect {
                                bad.push(format!("{cell}: unit insertion gives {}, expected {}", val, expect));
                            }
                        }
                        Axiom::FundamentalClass => {
                            if !ei.contains(&be.x_model.unit) {
                                continue;
                            }
                            let expect = if beta == b0 && (k, l) == (0, 1) {
                                GradedElement::one(&be.ring, &be.l_model, e).neg()
                            } else {
                                GradedElement::zero(&be.ring, &be.l_model, e)
                            };
                            if val != expect {
                                bad.push(format!("{cell}: fundamental class gives {val}, expected {expect}"));
                            }
                        }
                        Axiom::Integration => {
                            let got = val.integrate();
                            let expect = if beta == b0 && (k, l) == (0, 1) {
                                eta[0].restrict(&be.l_model)?.integrate().neg()
                            } else if beta == b0 && (k, l) == (2, 0) {
                                let p = pairing(&alpha[0], &alpha[1])?;
                                if be.l_model.degree(ai[0]) % 2 != 0 {
                                    p.neg()
                                } else {
                                    p
                                }
                            } else {
                                NovikovElement::zero(&be.ring, e)
                            };
                            if got != expect {
                                bad.push(format!("{cell}: integral is {}, expected {}", got.render(), expect.render()));
                            }
                        }
                        Axiom::GeodesicFundamentalClass => {
                            let expect = if beta == b0 && (k, l) == (1, 1) && kind == Kind::Geodesic(1) {
                                if be.n % 2 != 0 {
                                    alpha[0].neg()
                                } else {
                                    alpha[0].clone()
                                }
                            } else {
                                GradedElement::zero(&be.ring, &be.l_model, e)
                            };
                            if val != expect {
                                bad.push(format!("{cell}: gives {val}, expected {expect}"));
                            }
                        }
                        Axiom::ConstrainedUnit => {
                            if !val.is_zero() {
                                bad.push(format!("{cell}: unit insertion gives {val}, expected 0"));
                            }
                        }
                        Axiom::SphereUnit => {
                            let i = ei.iter().position(|&x| x == be.x_model.unit).unwrap_or(0);
                            let zero_class = beta.iter().all(|&x| x == 0);
                            let expect = if zero_class && l == 2 {
                                eta[1 - i].clone()
                            } else {
                                GradedElement::zero(&be.ring, &be.x_model, e)
                            };
                            if val != expect {
                                bad.push(format!("{cell}: unit insertion gives {val}, expected {expect}"));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(AxiomReport { axiom, checked, violations: bad })
}

/// Runs every axiom check.
pub fn check_axioms(be: &Backend, caps: &Caps) -> Result<Vec<AxiomReport>> {
    Axiom::ALL.iter().map(|a| check_axiom(be, *a, caps)).collect()
}
