//! Structure equations as data, interpreted by one summation engine that
//! returns the full signed right-hand side.

use std::fmt;
use std::str::FromStr;

use num::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::GradedElement;
use crate::novikov::{Energy, Q};
use crate::operators::{Backend, BoundingPair, Kind, Side};
use crate::signs::{iota, m_prime, par, sigma_split, splittings, IotaArgs, IotaId, Pin, Splitting};

/// The seven structure equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquationId {
    Struc,
    Gstruc,
    Gzstruc,
    Hstruc,
    Ggstruc,
    Lstruc,
    Rstruc,
}

impl EquationId {
    pub const ALL: [EquationId; 7] = [
        EquationId::Struc,
        EquationId::Gstruc,
        EquationId::Gzstruc,
        EquationId::Hstruc,
        EquationId::Ggstruc,
        EquationId::Lstruc,
        EquationId::Rstruc,
    ];

    /// Whether the equation carries a boundary constraint index `m >= 1`.
    pub fn needs_m(self) -> bool {
        matches!(self, EquationId::Gstruc | EquationId::Ggstruc | EquationId::Lstruc | EquationId::Rstruc)
    }

    /// The operator whose moduli boundary the equation describes.
    pub fn base_kind(self, m: usize) -> Kind {
        match self {
            EquationId::Struc => Kind::Disk,
            EquationId::Gstruc => Kind::Geodesic(m),
            EquationId::Gzstruc => Kind::Geodesic(0),
            EquationId::Hstruc => Kind::Horocyclic,
            EquationId::Ggstruc => Kind::Geodesic4(m),
            EquationId::Lstruc => Kind::OneSide(Side::Plus, m),
            EquationId::Rstruc => Kind::OneSide(Side::Minus, m),
        }
    }

    /// The term schema of the equation.
    pub fn schema(self) -> Schema {
        use IRange::*;
        use Slot::*;
        let p1 = |part| vec![Pin { elem: 1, part }];
        let p12 = |part| vec![Pin { elem: 1, part }, Pin { elem: 2, part }];
        let bubble = |pins, range, sign, outer, inner| Term::Bubble { pins, range, sign, outer, inner };
        let (terms, notes): (Vec<Term>, Vec<&'static str>) = match self {
            EquationId::Struc => (vec![bubble(vec![], All, IotaId::Plain, Base, Disk)], vec![]),
            EquationId::Gstruc => (
                vec![
                    bubble(p1(0), All, IotaId::I1, BaseMPrime, Disk),
                    bubble(p1(1), Window, IotaId::I2, Disk, BaseInner),
                ],
                vec![],
            ),
            EquationId::Gzstruc => (
                vec![
                    bubble(p12(0), All, IotaId::I1, Geo0, Disk),
                    bubble(
                        vec![Pin { elem: 2, part: 0 }, Pin { elem: 1, part: 1 }],
                        All,
                        IotaId::I1,
                        GeoAtI,
                        Disk,
                    ),
                    bubble(p12(1), All, IotaId::I2, Disk, Geo0),
                    Term::SphereBubble { sign: SphereSign::Iota(IotaId::I3), outer: Disk },
                ],
                vec![
                    "second sum signed with sigma_{J1,J2} (iota1); the variant with sigma_{J2,J1} fails on the classical backend",
                    "fourth sum evaluated with outer arity (k, l1+1), the only arity matching its arguments",
                ],
            ),
            EquationId::Hstruc => (
                vec![
                    bubble(p12(0), All, IotaId::Plain, Horo, Disk),
                    bubble(p12(1), All, IotaId::I4, Disk, Horo),
                    Term::SphereBubble { sign: SphereSign::Sigma12, outer: Disk },
                    Term::DoubleBubble,
                ],
                vec![
                    "leading term uses the horocyclic operator",
                    "third sum evaluated with outer arity (k, l1+1)",
                    "last sum runs over k1+k2+k3 = k+2 with the second inner arity k3 and the pins on J2, J3",
                    "alpha^4 starts at position p = i2+k2-1 and the dagger sign uses i' = p",
                ],
            ),
            EquationId::Ggstruc => (
                vec![
                    bubble(p12(0), All, IotaId::Plain, BaseMPrime, Disk),
                    bubble(p12(1), Window, IotaId::Plain, Disk, BaseInner),
                    bubble(vec![Pin { elem: 2, part: 0 }, Pin { elem: 1, part: 1 }], Window, IotaId::I5, GeoAtI, GeoInner),
                    Term::SphereBubble { sign: SphereSign::Iota(IotaId::I6), outer: GeoAtM },
                ],
                vec![],
            ),
            EquationId::Lstruc => (
                vec![
                    bubble(p1(0), All, IotaId::Plain, BaseMPrime, Disk),
                    bubble(p1(1), Window, IotaId::Plain, Disk, BaseInner),
                    bubble(p1(1), After, IotaId::Plain, Disk, Disk),
                    Term::Final { negate: false },
                ],
                vec![],
            ),
            EquationId::Rstruc => (
                vec![
                    bubble(p1(0), All, IotaId::Plain, BaseMPrime, Disk),
                    bubble(p1(1), Window, IotaId::Plain, Disk, BaseInner),
                    bubble(p1(1), Before, IotaId::Plain, Disk, Disk),
                    Term::Final { negate: true },
                ],
                vec![],
            ),
        };
        Schema { id: self, terms, notes }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EquationId::Struc => "struc",
            EquationId::Gstruc => "gstruc",
            EquationId::Gzstruc => "gzstruc",
            EquationId::Hstruc => "hstruc",
            EquationId::Ggstruc => "ggstruc",
            EquationId::Lstruc => "lstruc",
            EquationId::Rstruc => "rstruc",
        };
        f.write_str(s)
    }
}

impl FromStr for EquationId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EquationId::ALL
            .iter()
            .copied()
            .find(|e| e.to_string() == s)
            .ok_or_else(|| Error::Usage(format!("unknown equation `{s}`")))
    }
}

/// Operator selected for an outer or inner slot of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Disk,
    Horo,
    Geo0,
    /// The equation's own operator.
    Base,
    /// The equation's family with constraint index `m'(m, i, k2)`.
    BaseMPrime,
    /// The equation's family with constraint index `m - i + 1`.
    BaseInner,
    /// `Geodesic(i)`.
    GeoAtI,
    /// `Geodesic(m - i + 1)`.
    GeoInner,
    /// `Geodesic(m)`.
    GeoAtM,
}

/// Admissible range of the attachment slot `i` (always `1 <= i <= k1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IRange {
    All,
    /// `m - k2 < i <= m`.
    Window,
    /// `m < i`.
    After,
    /// `i <= m - k2`.
    Before,
}

/// Sign of a sphere-bubbling term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereSign {
    Iota(IotaId),
    Sigma12,
}

/// One sum of an equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    /// `q_outer(a1 (x) q_inner(a2; e2) (x) a3; e1)` over `k1 + k2 = k + 1`,
    /// `i` in range and splittings obeying the pins.
    Bubble { pins: Vec<Pin>, range: IRange, sign: IotaId, outer: Slot, inner: Slot },
    /// `q_outer(a; q_sphere(e2) (x) e1)` over splittings with `1, 2` in `J2`.
    SphereBubble { sign: SphereSign, outer: Slot },
    /// Two disk bubbles on a plain disk, with `1` in `J3` and `2` in `J2`.
    DoubleBubble,
    /// `(+/-)(-1)^{iota7} q_{k,l;m}(a; e)`.
    Final { negate: bool },
}

/// Term schema of an equation, with the readings applied where the
/// displayed formula is ambiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub id: EquationId,
    pub terms: Vec<Term>,
    pub notes: Vec<&'static str>,
}

/// Everything fixed for one evaluation of a residual.
pub struct Ctx<'a> {
    pub be: &'a Backend,
    pub pair: Option<&'a BoundingPair>,
    pub cutoff: Energy,
    pub exclude_degenerate: bool,
}

impl Ctx<'_> {
    fn q(&self, kind: Kind, alpha: &[GradedElement], eta: &[GradedElement]) -> Result<GradedElement> {
        self.be.q(self.pair, kind, alpha, eta, self.cutoff, self.exclude_degenerate)
    }
}

fn resolve(slot: Slot, base: Kind, m: usize, i: usize, k2: usize) -> Result<Kind> {
    Ok(match slot {
        Slot::Disk => Kind::Disk,
        Slot::Horo => Kind::Horocyclic,
        Slot::Geo0 => Kind::Geodesic(0),
        Slot::Base => base,
        Slot::BaseMPrime => base.with_m(m_prime(m, i, k2)?),
        Slot::BaseInner => base.with_m(m + 1 - i),
        Slot::GeoAtI => Kind::Geodesic(i),
        Slot::GeoInner => Kind::Geodesic(m + 1 - i),
        Slot::GeoAtM => Kind::Geodesic(m),
    })
}

fn in_range(r: IRange, i: usize, m: usize, k2: usize) -> bool {
    match r {
        IRange::All => true,
        IRange::Window => i + k2 > m && i <= m,
        IRange::After => m < i,
        IRange::Before => i + k2 <= m,
    }
}

fn degree_of(x: &GradedElement) -> Result<i64> {
    if x.is_zero() {
        return Ok(0);
    }
    x.degree().ok_or_else(|| Error::Usage(format!("input {x} is not homogeneous")))
}

fn pick(eta: &[GradedElement], part: &[usize]) -> Vec<GradedElement> {
    part.iter().map(|&j| eta[j - 1].clone()).collect()
}

fn add_signed(acc: &mut GradedElement, v: &GradedElement, parity: u8) {
    acc.add_scaled(v, &if parity == 1 { -Q::one() } else { Q::one() });
}

/// Degrees and split data shared by the sign functions.
struct Degrees {
    alpha: Vec<i64>,
    eta: Vec<i64>,
    n: i64,
}

impl Degrees {
    fn part_sum(&self, part: &[usize]) -> i64 {
        part.iter().map(|&j| self.eta[j - 1]).sum()
    }

    fn args(&self, sp: &Splitting, i: usize, k: usize) -> IotaArgs {
        IotaArgs {
            eta1: self.part_sum(sp.part(0)),
            eta2: self.part_sum(sp.part(1)),
            alpha1: self.alpha[..i - 1].iter().sum(),
            i: i as i64,
            sigma12: sigma_split(sp.part(0), sp.part(1), &self.eta),
            sigma21: sigma_split(sp.part(1), sp.part(0), &self.eta),
            alpha: self.alpha.iter().sum(),
            k: k as i64,
            n: self.n,
        }
    }
}

/// `q(a; d eta)` with the Koszul sign for passing `d` across `eta`.
fn leading(
    ctx: &Ctx,
    kind: Kind,
    alpha: &[GradedElement],
    eta: &[GradedElement],
    degs: &Degrees,
) -> Result<GradedElement> {
    let mut acc = GradedElement::zero(
        &ctx.be.ring,
        if kind == Kind::Sphere { &ctx.be.x_model } else { &ctx.be.l_model },
        ctx.cutoff,
    );
    let mut before = 0i64;
    for j in 0..eta.len() {
        let d = eta[j].differential();
        if !d.is_zero() {
            let mut args = eta.to_vec();
            args[j] = d;
            let v = ctx.q(kind, alpha, &args)?;
            add_signed(&mut acc, &v, par(before));
        }
        before += degs.eta[j];
    }
    Ok(acc)
}

/// The full signed right-hand side of `schema` at the given inputs.
pub fn residual_with(
    schema: &Schema,
    ctx: &Ctx,
    m: usize,
    alpha: &[GradedElement],
    eta: &[GradedElement],
) -> Result<GradedElement> {
    let be = ctx.be;
    let eq = schema.id;
    let (k, l) = (alpha.len(), eta.len());
    if eq.needs_m() && (m == 0 || m > k) {
        return Err(Error::Usage(format!("{eq} needs 1 <= m <= k (got m = {m}, k = {k})")));
    }
    if !eq.needs_m() && m != 0 {
        return Err(Error::Usage(format!("{eq} takes no constraint index")));
    }
    let degs = Degrees {
        alpha: alpha.iter().map(degree_of).collect::<Result<_>>()?,
        eta: eta.iter().map(degree_of).collect::<Result<_>>()?,
        n: be.n,
    };
    let base = eq.base_kind(m);
    let mut acc = leading(ctx, base, alpha, eta, &degs)?.neg();
    for term in &schema.terms {
        match term {
            Term::Bubble { pins, range, sign, outer, inner } => {
                let splits = splittings(l, 2, pins);
                for k1 in 1..=k + 1 {
                    let k2 = k + 1 - k1;
                    for i in 1..=k1 {
                        if !in_range(*range, i, m, k2) {
                            continue;
                        }
                        let (a1, rest) = alpha.split_at(i - 1);
                        let (a2, a3) = rest.split_at(k2);
                        let ok = resolve(*outer, base, m, i, k2)?;
                        let ik = resolve(*inner, base, m, i, k2)?;
                        for sp in &splits {
                            let e1 = pick(eta, sp.part(0));
                            let e2 = pick(eta, sp.part(1));
                            let v = ctx.q(ik, a2, &e2)?;
                            if v.is_zero() {
                                continue;
                            }
                            let mut args = a1.to_vec();
                            args.push(v);
                            args.extend_from_slice(a3);
                            let w = ctx.q(ok, &args, &e1)?;
                            add_signed(&mut acc, &w, iota(*sign, &degs.args(sp, i, k)));
                        }
                    }
                }
            }
            Term::SphereBubble { sign, outer } => {
                let ok = resolve(*outer, base, m, 1, 0)?;
                for sp in splittings(l, 2, &[Pin { elem: 1, part: 1 }, Pin { elem: 2, part: 1 }]) {
                    let e2 = pick(eta, sp.part(1));
                    let v = ctx.q(Kind::Sphere, &[], &e2)?;
                    if v.is_zero() {
                        continue;
                    }
                    let mut args = vec![v];
                    args.extend(pick(eta, sp.part(0)));
                    let w = ctx.q(ok, alpha, &args)?;
                    let a = degs.args(&sp, 1, k);
                    let p = match sign {
                        SphereSign::Iota(id) => iota(*id, &a),
                        SphereSign::Sigma12 => a.sigma12,
                    };
                    add_signed(&mut acc, &w, p);
                }
            }
            Term::DoubleBubble => {
                let splits = splittings(l, 3, &[Pin { elem: 1, part: 2 }, Pin { elem: 2, part: 1 }]);
                for k1 in 2..=k + 2 {
                    for k2 in 0..=k + 2 - k1 {
                        let k3 = k + 2 - k1 - k2;
                        for i1 in 1..=k1 {
                            for i2 in i1 + 1..=k1 {
                                let p = i2 + k2 - 1;
                                let a1 = &alpha[..i1 - 1];
                                let a2 = &alpha[i1 - 1..i1 - 1 + k2];
                                let a3 = &alpha[i1 - 1 + k2..p - 1];
                                let a4 = &alpha[p - 1..p - 1 + k3];
                                let a5 = &alpha[p - 1 + k3..];
                                for sp in &splits {
                                    let v2 = ctx.q(Kind::Disk, a2, &pick(eta, sp.part(1)))?;
                                    if v2.is_zero() {
                                        continue;
                                    }
                                    let v3 = ctx.q(Kind::Disk, a4, &pick(eta, sp.part(2)))?;
                                    if v3.is_zero() {
                                        continue;
                                    }
                                    let mut args = a1.to_vec();
                                    args.push(v2);
                                    args.extend_from_slice(a3);
                                    args.push(v3);
                                    args.extend_from_slice(a5);
                                    let w = ctx.q(Kind::Disk, &args, &pick(eta, sp.part(0)))?;
                                    add_signed(&mut acc, &w, dagger(&degs, sp, i1, p, k));
                                }
                            }
                        }
                    }
                }
            }
            Term::Final { negate } => {
                let w = ctx.q(Kind::Geodesic(m), alpha, eta)?;
                let p = iota(IotaId::I7, &IotaArgs { eta1: degs.eta.iter().sum(), n: be.n, ..Default::default() });
                add_signed(&mut acc, &w, p ^ (*negate as u8));
            }
        }
    }
    Ok(acc)
}

/// `iota(a', e'; i1, J1) + iota(a, e; p, J')` for the three-part splitting.
fn dagger(degs: &Degrees, sp: &Splitting, i1: usize, p: usize, k: usize) -> u8 {
    let (j1, j2, j3) = (sp.part(0), sp.part(1), sp.part(2));
    let mut jp: Vec<usize> = j1.iter().chain(j2).copied().collect();
    jp.sort_unstable();
    let inner = IotaArgs {
        eta1: degs.part_sum(j1),
        eta2: degs.part_sum(j2),
        alpha1: degs.alpha[..i1 - 1].iter().sum(),
        i: i1 as i64,
        sigma12: sigma_split(j1, j2, &degs.eta),
        sigma21: sigma_split(j2, j1, &degs.eta),
        alpha: degs.alpha[..p - 1].iter().sum(),
        k: (p - 1) as i64,
        n: degs.n,
    };
    let outer = IotaArgs {
        eta1: degs.part_sum(&jp),
        eta2: degs.part_sum(j3),
        alpha1: degs.alpha[..p - 1].iter().sum(),
        i: p as i64,
        sigma12: sigma_split(&jp, j3, &degs.eta),
        sigma21: sigma_split(j3, &jp, &degs.eta),
        alpha: degs.alpha.iter().sum(),
        k: k as i64,
        n: degs.n,
    };
    iota(IotaId::Plain, &inner) ^ iota(IotaId::Plain, &outer)
}

/// The full signed right-hand side of `eq`; zero iff the equation holds
/// at these inputs below the cutoff.
#[allow(clippy::too_many_arguments)]
pub fn residual(
    eq: EquationId,
    be: &Backend,
    pair: Option<&BoundingPair>,
    m: usize,
    alpha: &[GradedElement],
    eta: &[GradedElement],
    cutoff: Energy,
    exclude_degenerate: bool,
) -> Result<GradedElement> {
    let ctx = Ctx { be, pair, cutoff, exclude_degenerate };
    residual_with(&eq.schema(), &ctx, m, alpha, eta)
}

/// Bounds for a structure-equation suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteCaps {
    pub max_k: usize,
    pub max_l: usize,
    /// Largest constraint index; `None` means every `m <= k`.
    pub max_m: Option<usize>,
    pub energy: Energy,
    pub exclude_degenerate: bool,
}

/// One failing input tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub inputs: String,
    pub residual: String,
}

/// Outcome of a suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub eq: EquationId,
    pub cases: usize,
    pub failures: usize,
    /// Largest absolute residual coefficient (exactly zero on a pass).
    pub max_residual: Q,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<&'static str>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Number of witnesses kept per report.
pub const MAX_WITNESSES: usize = 5;

/// Runs `schema` on every basis tuple within `caps`.
pub fn suite_with(schema: &Schema, be: &Backend, pair: Option<&BoundingPair>, caps: &SuiteCaps) -> Result<SuiteReport> {
    let eq = schema.id;
    let mut cells = Vec::new();
    for k in 0..=caps.max_k {
        for l in 0..=caps.max_l {
            let ms: Vec<usize> = if eq.needs_m() {
                let hi = caps.max_m.map_or(k, |x| x.min(k));
                (1..=hi).collect()
            } else {
                vec![0]
            };
            if l < eq.base_kind(1).min_l() {
                continue;
            }
            for m in ms {
                for (ai, ei) in be.basis_tuples(k, l) {
                    cells.push((k, l, m, ai, ei));
                }
            }
        }
    }
    let ctx = Ctx { be, pair, cutoff: caps.energy, exclude_degenerate: caps.exclude_degenerate };
    let results: Vec<Result<Option<(Witness, Q)>>> = cells
        .par_iter()
        .map(|(k, l, m, ai, ei)| {
            let (alpha, eta) = be.basis_inputs(ai, ei, caps.energy);
            let r = residual_with(schema, &ctx, *m, &alpha, &eta)?;
            if r.is_zero() {
                return Ok(None);
            }
            let mut key = ai.clone();
            key.extend(ei);
            let w = Witness { k: *k, l: *l, m: *m, inputs: be.render_key(*k, &key), residual: r.render() };
            Ok(Some((w, r.max_abs())))
        })
        .collect();
    let mut failures = 0;
    let mut max_residual = Q::zero();
    let mut witnesses = Vec::new();
    for r in results {
        if let Some((w, mx)) = r? {
            failures += 1;
            if mx > max_residual {
                max_residual = mx;
            }
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
    }
    Ok(SuiteReport { eq, cases: cells.len(), failures, max_residual, witnesses, notes: schema.notes.clone() })
}

/// Runs the suite of `eq`.
pub fn suite(eq: EquationId, be: &Backend, pair: Option<&BoundingPair>, caps: &SuiteCaps) -> Result<SuiteReport> {
    suite_with(&eq.schema(), be, pair, caps)
}
