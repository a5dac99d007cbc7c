//! Cohomology over the truncated Novikov ring, the Floer and quantum
//! products, the module action, the closed-open and open-closed maps, the
//! current-side action and executable checks of the derived theorems.
//!
//! Every Novikov monomial below the cutoff is a separate rational
//! coordinate; kernels and images are computed degreewise by exact
//! elimination and all statements are valid below the cutoff.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{One, Zero};
use rayon::prelude::*;

use crate::backend::bundled;
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::model::{pairing, phi_current, Current, FormModel, GradedElement, SparseVec};
use crate::novikov::{fmt_energy, Energy, Mono, NovikovElement, NovikovRing, Q};
use crate::operators::{bounding_pair_verify, Backend, BoundingPair, BpVerdict, Kind};
use crate::report::{Check, Report, Section};
use crate::signs::par;

/// Monomials of energy at most `cutoff` in the monoid generated by the
/// classes the backend can produce, the extension variables and the
/// monomials of `extra`.
pub fn truncated_monomials(be: &Backend, extra: &[&GradedElement], cutoff: Energy) -> Result<Vec<Mono>> {
    let ring = &be.ring;
    let rank = ring.rank();
    let mut gens: BTreeSet<Mono> = BTreeSet::new();
    for ((kind, _, _), entries) in be.tables() {
        for en in entries {
            let beta = if *kind == Kind::Sphere { be.sphere.varpi_of(&en.beta, rank) } else { en.beta.clone() };
            gens.insert(ring.t_beta(&beta));
        }
    }
    for b in &ring.classes.effective {
        gens.insert(ring.t_beta(b));
    }
    for b in &be.sphere.effective {
        gens.insert(ring.t_beta(&be.sphere.varpi_of(b, rank)));
    }
    for j in 0..ring.n_vars() {
        gens.insert(ring.t_var(j));
    }
    for x in extra {
        for (_, m) in x.terms().keys() {
            gens.insert(m.clone());
        }
    }
    gens.remove(&ring.one_mono());
    for g in &gens {
        if ring.energy(g) <= Energy::zero() {
            return Err(Error::Precondition(format!(
                "monomial {} has energy {} and makes the truncated ring infinite",
                g.render(),
                fmt_energy(&ring.energy(g))
            )));
        }
    }
    let mut seen: BTreeSet<Mono> = BTreeSet::from([ring.one_mono()]);
    let mut frontier = vec![ring.one_mono()];
    while let Some(m) = frontier.pop() {
        for g in &gens {
            if let Some((p, _)) = ring.mono_mul(&m, g) {
                if ring.energy(&p) <= cutoff && seen.insert(p.clone()) {
                    frontier.push(p);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Generators of the maximal ideal among `monos`: the non-unit monomials
/// that are not products of two non-unit monomials of the list.
fn ideal_generators(ring: &NovikovRing, monos: &[Mono]) -> Vec<Mono> {
    let one = ring.one_mono();
    let pos: Vec<&Mono> = monos.iter().filter(|m| **m != one).collect();
    let products: BTreeSet<Mono> =
        pos.iter().flat_map(|a| pos.iter().filter_map(move |b| ring.mono_mul(a, b).map(|(p, _)| p))).collect();
    pos.into_iter().filter(|m| !products.contains(*m)).cloned().collect()
}

/// A model tensored with the truncated ring, flattened to rational
/// coordinates, together with an R-linear differential of degree one.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub name: String,
    pub ring: Arc<NovikovRing>,
    pub model: Arc<FormModel>,
    pub cutoff: Energy,
    pub monos: Vec<Mono>,
    /// Coordinate `c` is `monos-entry * basis form`.
    pub coords: Vec<(usize, Mono)>,
    pub degrees: Vec<i64>,
    index: BTreeMap<(usize, Mono), usize>,
    /// Image of each coordinate.
    pub columns: Vec<SparseVec>,
}

impl FilteredComplex {
    /// Evaluates `d` on every coordinate `m * e_i`.
    pub fn build(
        name: &str,
        ring: &Arc<NovikovRing>,
        model: &Arc<FormModel>,
        cutoff: Energy,
        monos: &[Mono],
        d: impl Fn(&GradedElement) -> Result<GradedElement> + Sync,
    ) -> Result<Self> {
        let mut coords = Vec::new();
        for m in monos {
            for i in 0..model.len() {
                coords.push((i, m.clone()));
            }
        }
        coords.sort_by_key(|(i, m)| (model.degree(*i) + ring.degree(m), m.clone(), *i));
        let degrees = coords.iter().map(|(i, m)| model.degree(*i) + ring.degree(m)).collect();
        let index = coords.iter().enumerate().map(|(c, k)| (k.clone(), c)).collect();
        let mut cx = FilteredComplex {
            name: name.into(),
            ring: ring.clone(),
            model: model.clone(),
            cutoff,
            monos: monos.to_vec(),
            coords,
            degrees,
            index,
            columns: vec![],
        };
        let columns = cx
            .coords
            .par_iter()
            .map(|(i, m)| {
                let mut x = GradedElement::zero(ring, model, cutoff);
                x.add_term(*i, m.clone(), Q::one());
                cx.flatten(&d(&x)?)
            })
            .collect::<Result<Vec<_>>>()?;
        cx.columns = columns;
        Ok(cx)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn flatten(&self, x: &GradedElement) -> Result<SparseVec> {
        x.terms()
            .iter()
            .map(|((i, m), q)| {
                self.index.get(&(*i, m.clone())).map(|&c| (c, q.clone())).ok_or_else(|| {
                    Error::Config(format!(
                        "coordinate {} {} lies outside the truncated complex",
                        m.render(),
                        self.model.label(*i)
                    ))
                })
            })
            .collect()
    }

    pub fn unflatten(&self, v: &SparseVec) -> GradedElement {
        let mut x = GradedElement::zero(&self.ring, &self.model, self.cutoff);
        for (c, q) in v {
            let (i, m) = &self.coords[*c];
            x.add_term(*i, m.clone(), q.clone());
        }
        x
    }

    fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (c, q) in v {
            for (r, w) in &self.columns[*c] {
                *acc.entry(*r).or_insert_with(Q::zero) += q * w;
            }
        }
        acc.into_iter().filter(|(_, q)| !q.is_zero()).collect()
    }

    /// The differential applied to an element of the complex.
    pub fn apply(&self, x: &GradedElement) -> Result<GradedElement> {
        Ok(self.unflatten(&self.apply_sparse(&self.flatten(x)?)))
    }

    /// Witnesses where the differential fails to have degree one or to
    /// square to zero.
    pub fn defects(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (c, col) in self.columns.iter().enumerate() {
            let (i, m) = &self.coords[c];
            let label = format!("{} {}", m.render(), self.model.label(*i));
            if let Some((r, _)) = col.iter().find(|(r, _)| self.degrees[*r] != self.degrees[c] + 1) {
                out.push(format!("d({label}) has a component of degree {}", self.degrees[*r]));
            }
            let dd = self.apply_sparse(col);
            if !dd.is_empty() {
                out.push(format!("d(d({label})) = {}", self.unflatten(&dd)));
            }
        }
        out
    }
}

/// Cohomology below the cutoff, presented by generator cycles.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub complex: FilteredComplex,
    /// Number of generators of the cohomology module in each degree:
    /// the dimension of cycles modulo boundaries and positive-energy
    /// multiples of cycles.
    pub ranks: BTreeMap<i64, usize>,
    /// Generator cycles in increasing degree.
    pub generators: Vec<GradedElement>,
    /// Echelon bases of the boundaries, by degree, in local coordinates.
    boundaries: BTreeMap<i64, Echelon>,
    local: BTreeMap<i64, Vec<usize>>,
}

/// Computes cycles, boundaries and generators degreewise.
pub fn cohomology_of(cx: FilteredComplex) -> Result<Presentation> {
    let defects = cx.defects();
    if !defects.is_empty() {
        return Err(Error::Validation(defects));
    }
    let mut local: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (c, &p) in cx.degrees.iter().enumerate() {
        local.entry(p).or_default().push(c);
    }
    let pos: BTreeMap<usize, usize> =
        local.values().flat_map(|cs| cs.iter().enumerate().map(|(k, &c)| (c, k))).collect();
    let dense = |v: &SparseVec, p: i64| -> Vec<Q> {
        let mut out = vec![Q::zero(); local.get(&p).map_or(0, Vec::len)];
        for (c, q) in v {
            out[pos[c]] = q.clone();
        }
        out
    };
    let mut kernels: BTreeMap<i64, Vec<Vec<Q>>> = BTreeMap::new();
    let mut boundaries: BTreeMap<i64, Echelon> = BTreeMap::new();
    for (&p, cs) in &local {
        let rows = local.get(&(p + 1)).map_or(0, Vec::len);
        let mut m: linalg::Matrix = vec![vec![Q::zero(); cs.len()]; rows];
        for (k, &c) in cs.iter().enumerate() {
            for (r, q) in &cx.columns[c] {
                m[pos[r]][k] = q.clone();
            }
        }
        kernels.insert(p, if rows == 0 { identity(cs.len()) } else { linalg::kernel(&m, cs.len()) });
        let mut e = Echelon::new();
        if let Some(prev) = local.get(&(p - 1)) {
            for &c in prev {
                e.insert(&dense(&cx.columns[c], p));
            }
        }
        boundaries.insert(p, e);
    }
    let ideal = ideal_generators(&cx.ring, &cx.monos);
    let mut ranks = BTreeMap::new();
    let mut generators = Vec::new();
    for (&p, cs) in &local {
        let mut span = boundaries[&p].clone();
        for g in &ideal {
            let q = p - cx.ring.degree(g);
            let Some(kq) = kernels.get(&q) else { continue };
            for k in kq {
                let v: SparseVec =
                    local[&q].iter().zip(k).filter(|(_, x)| !x.is_zero()).map(|(&c, x)| (c, x.clone())).collect();
                let prod = cx.unflatten(&v).mul_mono(g, &Q::one());
                span.insert(&dense(&cx.flatten(&prod)?, p));
            }
        }
        let mut count = 0;
        for k in &kernels[&p] {
            if span.insert(k) {
                count += 1;
                let v: SparseVec =
                    cs.iter().zip(k).filter(|(_, x)| !x.is_zero()).map(|(&c, x)| (c, x.clone())).collect();
                generators.push(cx.unflatten(&v));
            }
        }
        if count > 0 {
            ranks.insert(p, count);
        }
    }
    Ok(Presentation { complex: cx, ranks, generators, boundaries, local })
}

fn identity(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

impl Presentation {
    /// Ranks in increasing degree.
    pub fn rank_vector(&self) -> Vec<usize> {
        self.ranks.values().copied().collect()
    }

    pub fn is_closed(&self, x: &GradedElement) -> Result<bool> {
        Ok(self.complex.apply(x)?.is_zero())
    }

    /// Whether `x` is a boundary below the cutoff.
    pub fn is_exact(&self, x: &GradedElement) -> Result<bool> {
        let v = self.complex.flatten(x)?;
        let mut parts: BTreeMap<i64, SparseVec> = BTreeMap::new();
        for (c, q) in v {
            parts.entry(self.complex.degrees[c]).or_default().push((c, q));
        }
        for (p, part) in parts {
            let Some(cs) = self.local.get(&p) else { return Ok(false) };
            let mut dense = vec![Q::zero(); cs.len()];
            for (c, q) in part {
                let k = cs.binary_search(&c).expect("coordinate of this degree");
                dense[k] = q;
            }
            if !self.boundaries[&p].contains(&dense) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_class(&self, x: &GradedElement, y: &GradedElement) -> Result<bool> {
        self.is_exact(&x.sub(y)?)
    }

    /// Generators with their degrees, for reports.
    pub fn describe(&self) -> Vec<String> {
        self.generators.iter().map(|g| format!("deg {}: {}", g.degree().unwrap_or_default(), g.render())).collect()
    }
}

/// Sum of `f` over the homogeneous parts of `x`, each with its degree.
fn by_parts(x: &GradedElement, f: impl Fn(&GradedElement, i64) -> Result<GradedElement>) -> Result<GradedElement> {
    let mut out: Option<GradedElement> = None;
    for (p, part) in x.homogeneous_parts() {
        let v = f(&part, p)?;
        out = Some(match out {
            None => v,
            Some(acc) => acc.add(&v)?,
        });
    }
    match out {
        Some(v) => Ok(v),
        None => f(x, 0),
    }
}

fn signed(x: GradedElement, parity: u8) -> GradedElement {
    if parity == 1 {
        x.neg()
    } else {
        x
    }
}

/// HF(L) and QH(X) of a backend with a bounding pair, with every map
/// between them.
pub struct Floer<'a> {
    pub be: &'a Backend,
    pub pair: BoundingPair,
    pub cutoff: Energy,
    /// The curvature `q_00 = c * 1`.
    pub curvature: NovikovElement,
    pub hf: Presentation,
    pub qh: Presentation,
}

impl<'a> Floer<'a> {
    /// Fails with a precondition error unless the pair is bounding.
    pub fn new(be: &'a Backend, pair: BoundingPair, cutoff: Energy) -> Result<Self> {
        let pair = BoundingPair { gamma: pair.gamma.with_cutoff(cutoff), b: pair.b.with_cutoff(cutoff) };
        let curvature = match bounding_pair_verify(be, &pair, cutoff)? {
            BpVerdict::Bounding(c) => c,
            BpVerdict::NotBounding(w) => return Err(Error::Precondition(format!("not a bounding pair: {w}"))),
        };
        let monos = truncated_monomials(be, &[&pair.gamma, &pair.b], cutoff)?;
        let hf_cx = FilteredComplex::build("HF", &be.ring, &be.l_model, cutoff, &monos, |x| {
            be.q(Some(&pair), Kind::Disk, std::slice::from_ref(x), &[], cutoff, false)
        })?;
        let qh_cx = FilteredComplex::build("QH", &be.ring, &be.x_model, cutoff, &monos, |x| Ok(x.differential()))?;
        let hf = cohomology_of(hf_cx)?;
        let qh = cohomology_of(qh_cx)?;
        Ok(Floer { be, pair, cutoff, curvature, hf, qh })
    }

    fn q(&self, kind: Kind, alpha: &[GradedElement], eta: &[GradedElement]) -> Result<GradedElement> {
        self.be.q(Some(&self.pair), kind, alpha, eta, self.cutoff, false)
    }

    fn closed_hf(&self, x: &GradedElement, what: &str) -> Result<()> {
        if self.hf.is_closed(x)? {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what}: {} is not closed", x.render())))
        }
    }

    fn closed_qh(&self, x: &GradedElement, what: &str) -> Result<()> {
        if self.qh.is_closed(x)? {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what}: {} is not closed", x.render())))
        }
    }

    pub fn unit_l(&self) -> GradedElement {
        GradedElement::one(&self.be.ring, &self.be.l_model, self.cutoff)
    }

    pub fn unit_x(&self) -> GradedElement {
        GradedElement::one(&self.be.ring, &self.be.x_model, self.cutoff)
    }

    /// `(-1)^{|a1|} q_{2,0}(a1, a2)`.
    pub fn circ(&self, a1: &GradedElement, a2: &GradedElement) -> Result<GradedElement> {
        self.closed_hf(a1, "circ")?;
        self.closed_hf(a2, "circ")?;
        by_parts(a1, |p, d| Ok(signed(self.q(Kind::Disk, &[p.clone(), a2.clone()], &[])?, par(d))))
    }

    fn star_raw(&self, y1: &GradedElement, y2: &GradedElement) -> Result<GradedElement> {
        self.q(Kind::Sphere, &[], &[y1.clone(), y2.clone()])
    }

    /// `q_{empty,2}(y1, y2)`.
    pub fn star(&self, y1: &GradedElement, y2: &GradedElement) -> Result<GradedElement> {
        self.closed_qh(y1, "star")?;
        self.closed_qh(y2, "star")?;
        self.star_raw(y1, y2)
    }

    /// `(-1)^n q_{1,1;1}(a; y)`.
    pub fn circledast(&self, y: &GradedElement, a: &GradedElement) -> Result<GradedElement> {
        self.closed_qh(y, "circledast")?;
        self.closed_hf(a, "circledast")?;
        Ok(signed(self.q(Kind::Geodesic(1), std::slice::from_ref(a), std::slice::from_ref(y))?, par(self.be.n)))
    }

    fn co_raw(&self, y: &GradedElement) -> Result<GradedElement> {
        Ok(self.q(Kind::Disk, &[], std::slice::from_ref(y))?.neg())
    }

    /// `-q_{0,1}(y)`.
    pub fn co(&self, y: &GradedElement) -> Result<GradedElement> {
        self.closed_qh(y, "CO")?;
        self.co_raw(y)
    }

    /// Solves `<y, OC(a)>_X = <CO(y), a>_L` for every basis form `y`.
    pub fn oc(&self, a: &GradedElement) -> Result<GradedElement> {
        self.closed_hf(a, "OC")?;
        let x = &self.be.x_model;
        let ring = &self.be.ring;
        let basis: Vec<GradedElement> = (0..x.len()).map(|i| GradedElement::basis(ring, x, self.cutoff, i)).collect();
        let gram: Vec<Vec<Q>> = basis
            .iter()
            .map(|u| basis.iter().map(|v| Ok(pairing(u, v)?.constant_term())).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let rhs: Vec<NovikovElement> = basis.iter().map(|y| pairing(&self.co_raw(y)?, a)).collect::<Result<_>>()?;
        let monos: BTreeSet<Mono> = rhs.iter().flat_map(|r| r.terms().keys().cloned()).collect();
        let mut out = GradedElement::zero(ring, x, self.cutoff);
        for m in monos {
            let s = ring.parity(&m);
            let mat: linalg::Matrix = gram
                .iter()
                .enumerate()
                .map(|(j, row)| {
                    let flip = s == 1 && x.degree(j) % 2 != 0;
                    row.iter().map(|g| if flip { -g.clone() } else { g.clone() }).collect()
                })
                .collect();
            let b: Vec<Q> = rhs.iter().map(|r| r.terms().get(&m).cloned().unwrap_or_else(Q::zero)).collect();
            let c = linalg::solve(&mat, x.len(), &b)
                .ok_or_else(|| Error::Precondition("the pairing matrix of the X-model is degenerate".into()))?;
            for (i, ci) in c.into_iter().enumerate() {
                out.add_term(i, m.clone(), ci);
            }
        }
        Ok(out)
    }

    /// `(y * z)(e) = z(e * y)` on every basis form `e`.
    pub fn star_current(&self, y: &GradedElement, z: &Current) -> Result<Current> {
        self.closed_qh(y, "star_current")?;
        let x = &self.be.x_model;
        let values = (0..x.len())
            .map(|i| {
                let e = GradedElement::basis(&self.be.ring, x, self.cutoff, i);
                z.apply(&self.star_raw(&e, y)?)
            })
            .collect::<Result<_>>()?;
        Ok(Current { model_name: x.name.clone(), values })
    }

    pub fn phi_hat(&self, y: &GradedElement) -> Result<Current> {
        phi_current(y)
    }

    /// `T^beta * x` for a class of the disk group.
    pub fn t_times(&self, beta: &[i64], x: &GradedElement) -> GradedElement {
        x.mul_mono(&self.be.ring.t_beta(beta), &Q::one())
    }
}

/// The three derived theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremId {
    Algebra,
    Maps,
    Compare,
}

impl TheoremId {
    pub const ALL: [TheoremId; 3] = [TheoremId::Algebra, TheoremId::Maps, TheoremId::Compare];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Algebra => "algebra",
            TheoremId::Maps => "maps",
            TheoremId::Compare => "compare",
        }
    }
}

/// Runs `f` over `items` in parallel; the first witness in order wins.
fn check_all<T: Sync>(name: &str, items: &[T], f: impl Fn(&T) -> Result<Option<String>> + Sync) -> Result<Check> {
    let results: Vec<Result<Option<String>>> = items.par_iter().map(&f).collect();
    let mut witness = None;
    for r in results {
        if let Some(w) = r? {
            witness.get_or_insert(w);
        }
    }
    Ok(Check::from_witness(name, items.len(), witness))
}

fn pairs<T: Clone>(xs: &[T], ys: &[T]) -> Vec<(T, T)> {
    xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect()
}

fn triples<T: Clone>(xs: &[T]) -> Vec<(T, T, T)> {
    let mut out = Vec::new();
    for a in xs {
        for b in xs {
            for c in xs {
                out.push((a.clone(), b.clone(), c.clone()));
            }
        }
    }
    out
}

fn degree_is(x: &GradedElement, d: i64) -> bool {
    x.is_zero() || x.degree() == Some(d)
}

fn deg(x: &GradedElement) -> i64 {
    x.degree().unwrap_or_default()
}

fn mismatch(what: &str, lhs: &GradedElement, rhs: &GradedElement) -> Option<String> {
    Some(format!("{what}: {} vs {}", lhs.render(), rhs.render()))
}

/// Checks every displayed identity of the theorem on generator classes.
pub fn verify_theorem(id: TheoremId, fl: &Floer) -> Result<Section> {
    let mut s = Section::new(format!("theorem {}", id.name()));
    let hf = &fl.hf.generators;
    let qh = &fl.qh.generators;
    let n = fl.be.n;
    match id {
        TheoremId::Algebra => {
            s.line(format!("HF generators: {}", fl.hf.describe().join("; ")));
            s.check(Check::pass("d_floer^2 = 0", format!("{} coordinates", fl.hf.complex.dim())));
            let one = fl.unit_l();
            s.check(if fl.hf.is_closed(&one)? {
                Check::pass("unit is closed", "1")
            } else {
                Check::fail("unit is closed", format!("d(1) = {}", fl.hf.complex.apply(&one)?))
            });
            s.check(check_all("circ has degree 0", &pairs(hf, hf), |(a, b)| {
                let c = fl.circ(a, b)?;
                Ok((!degree_is(&c, deg(a) + deg(b))).then(|| format!("{} o {} = {}", a, b, c)))
            })?);
            s.check(check_all("1 o a = a = a o 1", hf, |a| {
                let l = fl.circ(&one, a)?;
                let r = fl.circ(a, &one)?;
                Ok(if !fl.hf.same_class(&l, a)? {
                    mismatch("1 o a", &l, a)
                } else if !fl.hf.same_class(&r, a)? {
                    mismatch("a o 1", &r, a)
                } else {
                    None
                })
            })?);
            s.check(check_all("associativity", &triples(hf), |(a, b, c)| {
                let l = fl.circ(&fl.circ(a, b)?, c)?;
                let r = fl.circ(a, &fl.circ(b, c)?)?;
                Ok((!fl.hf.same_class(&l, &r)?).then(|| format!("({a}, {b}, {c}): {l} vs {r}")))
            })?);
            s.check(check_all("<a1 o a2, a3> = <a1, a2 o a3>", &triples(hf), |(a, b, c)| {
                let l = pairing(&fl.circ(a, b)?, c)?;
                let r = pairing(a, &fl.circ(b, c)?)?;
                Ok((l != r).then(|| format!("({a}, {b}, {c}): {} vs {}", l.render(), r.render())))
            })?);
        }
        TheoremId::Maps => {
            s.line(format!("QH generators: {}", fl.qh.describe().join("; ")));
            let one_x = fl.unit_x();
            let one_l = fl.unit_l();
            s.check(check_all("CO has degree 0", qh, |y| {
                let c = fl.co(y)?;
                Ok((!degree_is(&c, deg(y))).then(|| format!("CO({y}) = {c}")))
            })?);
            let co1 = fl.co(&one_x)?;
            s.check(if fl.hf.same_class(&co1, &one_l)? {
                Check::pass("CO(1) = 1", co1.render())
            } else {
                Check::fail("CO(1) = 1", co1.render())
            });
            s.check(check_all("1 * y = y = y * 1", qh, |y| {
                let l = fl.star(&one_x, y)?;
                let r = fl.star(y, &one_x)?;
                Ok(if !fl.qh.same_class(&l, y)? {
                    mismatch("1 * y", &l, y)
                } else if !fl.qh.same_class(&r, y)? {
                    mismatch("y * 1", &r, y)
                } else {
                    None
                })
            })?);
            s.check(check_all("* associativity", &triples(qh), |(a, b, c)| {
                let l = fl.star(&fl.star(a, b)?, c)?;
                let r = fl.star(a, &fl.star(b, c)?)?;
                Ok((!fl.qh.same_class(&l, &r)?).then(|| format!("({a}, {b}, {c}): {l} vs {r}")))
            })?);
            s.check(check_all("<y1 * y2, y3> = <y1, y2 * y3>", &triples(qh), |(a, b, c)| {
                let l = pairing(&fl.star(a, b)?, c)?;
                let r = pairing(a, &fl.star(b, c)?)?;
                Ok((l != r).then(|| format!("({a}, {b}, {c}): {} vs {}", l.render(), r.render())))
            })?);
            s.check(check_all("CO(y1 * y2) = CO(y1) o CO(y2)", &pairs(qh, qh), |(a, b)| {
                let l = fl.co(&fl.star(a, b)?)?;
                let r = fl.circ(&fl.co(a)?, &fl.co(b)?)?;
                Ok((!fl.hf.same_class(&l, &r)?).then(|| format!("({a}, {b}): {l} vs {r}")))
            })?);
            s.check(check_all("CO(y) o a = (-1)^{|y||a|} a o CO(y)", &pairs(qh, hf), |(y, a)| {
                let co = fl.co(y)?;
                let l = fl.circ(&co, a)?;
                let r = signed(fl.circ(a, &co)?, par(deg(y) * deg(a)));
                Ok((!fl.hf.same_class(&l, &r)?).then(|| format!("({y}, {a}): {l} vs {r}")))
            })?);
            let x = &fl.be.x_model;
            let basis: Vec<GradedElement> =
                (0..x.len()).map(|i| GradedElement::basis(&fl.be.ring, x, fl.cutoff, i)).collect();
            s.check(check_all("<y, OC(a)> = <CO(y), a>", &pairs(hf, &basis), |(a, y)| {
                let l = pairing(y, &fl.oc(a)?)?;
                let r = pairing(&fl.co_raw(y)?, a)?;
                Ok((l != r).then(|| format!("({y}, {a}): {} vs {}", l.render(), r.render())))
            })?);
            s.check(check_all("OC is closed of degree n", hf, |a| {
                let o = fl.oc(a)?;
                Ok(if !degree_is(&o, deg(a) + n) {
                    Some(format!("OC({a}) = {o} is not of degree {}", deg(a) + n))
                } else if !fl.qh.is_closed(&o)? {
                    Some(format!("OC({a}) = {o} is not closed"))
                } else {
                    None
                })
            })?);
            let oc1 = fl.oc(&one_l)?;
            let pd = fl.be.pd(fl.cutoff);
            s.check(if fl.qh.same_class(&oc1, &pd)? {
                Check::pass("OC(1) = PD([L])", oc1.render())
            } else {
                Check::fail("OC(1) = PD([L])", format!("{} vs {}", oc1.render(), pd.render()))
            });
            s.check(check_all("OC(CO(y) o a) = y * OC(a)", &pairs(qh, hf), |(y, a)| {
                let l = fl.oc(&fl.circ(&fl.co(y)?, a)?)?;
                let r = fl.star(y, &fl.oc(a)?)?;
                Ok((!fl.qh.same_class(&l, &r)?).then(|| format!("({y}, {a}): {l} vs {r}")))
            })?);
            s.check(check_all("OC(CO(y)) = y * PD([L])", qh, |y| {
                let l = fl.oc(&fl.co(y)?)?;
                let r = fl.star(y, &pd)?;
                Ok((!fl.qh.same_class(&l, &r)?).then(|| format!("{y}: {l} vs {r}")))
            })?);
            let currents: Vec<Current> = basis.iter().map(|y| fl.phi_hat(y)).collect::<Result<_>>()?;
            s.check(check_all("1 * z = z", &currents, |z| {
                let l = fl.star_current(&one_x, z)?;
                Ok((&l != z).then(|| "1 * z differs from z".to_string()))
            })?);
            let yz: Vec<(GradedElement, GradedElement, usize)> = pairs(qh, qh)
                .into_iter()
                .flat_map(|(a, b)| (0..currents.len()).map(move |k| (a.clone(), b.clone(), k)))
                .collect();
            s.check(check_all("(y1 * y2) * z = y1 * (y2 * z)", &yz, |(a, b, k)| {
                let z = &currents[*k];
                let l = fl.star_current(&fl.star(a, b)?, z)?;
                let r = fl.star_current(a, &fl.star_current(b, z)?)?;
                Ok((l != r).then(|| format!("({a}, {b}, z{k})")))
            })?);
            s.check(check_all("phi(y1 * y2) = y1 * phi(y2)", &pairs(qh, qh), |(a, b)| {
                let l = fl.phi_hat(&fl.star(a, b)?)?;
                let r = fl.star_current(a, &fl.phi_hat(b)?)?;
                Ok((l != r).then(|| format!("({a}, {b})")))
            })?);
            s.check(if x.pairing_nondegenerate() {
                Check::pass("phi is bijective", format!("pairing of rank {}", x.len()))
            } else {
                Check::fail("phi is bijective", "degenerate pairing on the X-model")
            });
        }
        TheoremId::Compare => {
            let one_x = fl.unit_x();
            s.check(check_all("circledast has degree 0", &pairs(qh, hf), |(y, a)| {
                let c = fl.circledast(y, a)?;
                Ok((!degree_is(&c, deg(y) + deg(a))).then(|| format!("{y} (*) {a} = {c}")))
            })?);
            s.check(check_all("1 (*) a = a", hf, |a| {
                let l = fl.circledast(&one_x, a)?;
                Ok((!fl.hf.same_class(&l, a)?).then(|| format!("{a}: {l}")))
            })?);
            let yya: Vec<(GradedElement, GradedElement, GradedElement)> = pairs(qh, qh)
                .into_iter()
                .flat_map(|(a, b)| hf.iter().map(move |c| (a.clone(), b.clone(), c.clone())))
                .collect();
            s.check(check_all("(y2 * y1) (*) a = y2 (*) (y1 (*) a)", &yya, |(y2, y1, a)| {
                let l = fl.circledast(&fl.star(y2, y1)?, a)?;
                let r = fl.circledast(y2, &fl.circledast(y1, a)?)?;
                Ok((!fl.hf.same_class(&l, &r)?).then(|| format!("({y2}, {y1}, {a}): {l} vs {r}")))
            })?);
            s.check(check_all("y (*) a = CO(y) o a", &pairs(qh, hf), |(y, a)| {
                let l = fl.circledast(y, a)?;
                let r = fl.circ(&fl.co(y)?, a)?;
                Ok((!fl.hf.same_class(&l, &r)?).then(|| format!("({y}, {a}): {l} vs {r}")))
            })?);
        }
    }
    Ok(s)
}

/// Ranks, generators and product tables of HF or QH.
pub fn cohomology_section(fl: &Floer, which_hf: bool) -> Result<Section> {
    let mut s = Section::new(if which_hf { "HF(L)" } else { "QH(X)" });
    let pres = if which_hf { &fl.hf } else { &fl.qh };
    s.line(format!("valid below energy {}", fmt_energy(&fl.cutoff)));
    let ranks: Vec<String> = pres.ranks.iter().map(|(d, r)| format!("{d}:{r}")).collect();
    s.line(format!("ranks by degree: {}", ranks.join(" ")));
    for g in pres.describe() {
        s.line(format!("generator {g}"));
    }
    let gens = &pres.generators;
    if which_hf {
        s.line(format!("curvature c = {}", fl.curvature.render()));
        for (a, b) in pairs(gens, gens) {
            s.line(format!("{} o {} = {}", a, b, fl.circ(&a, &b)?));
        }
        for (y, a) in pairs(&fl.qh.generators, gens) {
            s.line(format!("{} (*) {} = {}", y, a, fl.circledast(&y, &a)?));
        }
    } else {
        for (a, b) in pairs(gens, gens) {
            s.line(format!("{} * {} = {}", a, b, fl.star(&a, &b)?));
        }
        for y in gens {
            s.line(format!("CO({}) = {}", y, fl.co(y)?));
        }
    }
    Ok(s)
}

/// Compares `x` with `T^beta * 1` when the cutoff reaches `omega(beta)`.
fn decide(
    name: &str,
    fl: &Floer,
    beta: &[i64],
    ok: impl FnOnce() -> Result<std::result::Result<String, String>>,
) -> Result<Check> {
    let need = fl.be.ring.classes.omega_of(beta);
    if fl.cutoff < need {
        return Ok(Check::undecidable(
            name,
            format!("not decidable below cutoff: needs energy {} > {}", fmt_energy(&need), fmt_energy(&fl.cutoff)),
        ));
    }
    Ok(match ok()? {
        Ok(v) => Check::pass(name, v),
        Err(w) => Check::fail(name, w),
    })
}

/// Replays the Clifford computation on the bundled backend.
pub fn clifford_example(cutoff: Energy) -> Result<Report> {
    let file = bundled("clifford")?;
    let be = file.build()?;
    let pair = file.pair(&be, cutoff)?;
    clifford_example_with(&be, pair, cutoff)
}

/// Replays the Clifford computation on `be`, which must have the Clifford
/// shape: one disk class `beta`, one sphere class and X-forms `y`, `y2`.
pub fn clifford_example_with(be: &Backend, pair: BoundingPair, cutoff: Energy) -> Result<Report> {
    let mut report = Report::new(format!("clifford example on `{}` below energy {}", be.name, fmt_energy(&cutoff)));
    let beta = vec![1i64];
    let ring = &be.ring;

    let mut s = Section::new("stage 1: classes");
    let img = be.sphere.varpi_of(&[1], ring.rank());
    let mu_img = ring.classes.mu_of(&img);
    s.line(format!(
        "varpi(beta_hat) = {img:?}, mu(varpi(beta_hat)) = {mu_img}, mu(beta) = {}",
        ring.classes.mu_of(&beta)
    ));
    s.check(if mu_img == 6 && mu_img == 3 * ring.classes.mu_of(&beta) && img == vec![3] {
        Check::pass("varpi(beta_hat) = 3 beta", "mu = 6 = 3 mu(beta)")
    } else {
        Check::fail("varpi(beta_hat) = 3 beta", format!("varpi = {img:?}, mu = {mu_img}"))
    });
    report.push(s);

    let y = GradedElement::labeled(ring, &be.x_model, cutoff, "y")?;
    let y2 = GradedElement::labeled(ring, &be.x_model, cutoff, "y2")?;
    let mut s = Section::new("stage 2: pairing with [L]");
    let pd = be.pd(cutoff);
    let p = pairing(&y, &pd)?;
    let r = y.restrict(&be.l_model)?.integrate();
    s.line(format!("<y, PD([L])> = {}, integral of y|_L = {}", p.render(), r.render()));
    s.check(if p.is_zero() && r.is_zero() {
        Check::pass("beta_hat . [L] = 0", "0")
    } else {
        Check::fail("beta_hat . [L] = 0", format!("{} / {}", p.render(), r.render()))
    });
    report.push(s);

    let mut s = Section::new("stage 3: bounding pair and HF");
    let fl = match Floer::new(be, pair, cutoff) {
        Ok(fl) => fl,
        Err(e) => {
            s.check(Check::fail("bounding pair", e.to_string()));
            report.push(s);
            return Ok(report);
        }
    };
    s.line(format!("q_00 = ({}) * 1", fl.curvature.render()));
    let hf_ranks = fl.hf.rank_vector();
    s.check(if hf_ranks == vec![1, 2, 1] {
        Check::pass("HF ranks", format!("{hf_ranks:?}"))
    } else {
        Check::fail("HF ranks", format!("{hf_ranks:?}"))
    });
    let qh_ranks = fl.qh.rank_vector();
    s.check(if qh_ranks == vec![1, 1, 1] {
        Check::pass("QH ranks", format!("{qh_ranks:?}"))
    } else {
        Check::fail("QH ranks", format!("{qh_ranks:?}"))
    });
    report.push(s);

    let one = fl.unit_l();
    let t1 = fl.t_times(&beta, &one);
    let t3 = fl.t_times(&[3], &one);
    let mut s = Section::new("stage 4: closed-open map");
    let co_y = fl.co(&y)?;
    s.line(format!("CO(y) = {co_y}"));
    s.check(decide("CO(y) = [T^beta]", &fl, &beta, || {
        Ok(if fl.hf.same_class(&co_y, &t1)? { Ok(co_y.render()) } else { Err(format!("CO(y) = {co_y}")) })
    })?);
    report.push(s);

    let mut s = Section::new("stage 5: quantum relation");
    let yy = fl.star(&y, &y)?;
    let yyy = fl.star(&yy, &y)?;
    let t3x = fl.t_times(&[3], &fl.unit_x());
    s.line(format!("y * y = {yy}"));
    s.line(format!("y * y * y = {yyy}"));
    s.check(if fl.qh.same_class(&yy, &y2)? {
        Check::pass("y * y = y2", yy.render())
    } else {
        Check::fail("y * y = y2", yy.render())
    });
    s.check(decide("y * y * y = T^{3 beta}", &fl, &[3], || {
        Ok(if yyy == t3x { Ok(yyy.render()) } else { Err(format!("y * y * y = {yyy}")) })
    })?);
    report.push(s);

    let mut s = Section::new("stage 6: cube of CO(y)");
    let cube = fl.circ(&fl.circ(&co_y, &co_y)?, &co_y)?;
    let co_yyy = fl.co(&yyy)?;
    s.line(format!("CO(y) o CO(y) o CO(y) = {cube}"));
    s.check(decide("CO(y)^3 = CO(y * y * y) = [T^{3 beta}]", &fl, &[3], || {
        Ok(if !fl.hf.same_class(&cube, &co_yyy)? {
            Err(format!("{cube} vs {co_yyy}"))
        } else if !fl.hf.same_class(&cube, &t3)? {
            Err(format!("{cube} vs T^[3]"))
        } else if fl.hf.is_exact(&t3)? {
            Err("T^[3] is exact, so the relation carries no information on lambda".into())
        } else {
            Ok("[T^[3]] is nonzero, lambda^3 = 1 branch".into())
        })
    })?);
    report.push(s);

    let mut s = Section::new("stage 7: module action");
    for a in &fl.hf.generators {
        s.line(format!("y (*) {} = {}", a, fl.circledast(&y, a)?));
    }
    let gens = fl.hf.generators.clone();
    s.check(decide("y (*) a = T^beta a on the HF basis", &fl, &beta, || {
        for a in &gens {
            let l = fl.circledast(&y, a)?;
            let r = fl.t_times(&beta, a);
            if !fl.hf.same_class(&l, &r)? {
                return Ok(Err(format!("y (*) {a} = {l}, expected {r}")));
            }
        }
        Ok(Ok(format!("{} generators", gens.len())))
    })?);
    report.push(s);

    let mut s = Section::new("result");
    s.line(format!(
        "CO(y) = [{}]",
        if fl.cutoff >= ring.classes.omega_of(&beta) { co_y.render() } else { "undecidable".into() }
    ));
    report.push(s);
    Ok(report)
}
