//! The versioned backend file format, element expressions, and builders
//! for the bundled backends.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{exterior_spec, FormModel, GradedElement, ModelSpec};
use crate::novikov::{fmt_q, parse_energy, parse_q, ClassGroup, Energy, Mono, NovikovRing, Q};
use crate::operators::{Backend, BoundingPair, Kind, SphereData, TableRecord};

/// Schema tag every backend file must carry.
pub const SCHEMA: &str = "floer-qkernel/backend/v1";

/// Sparse vector keyed by basis label, coefficients as rational strings.
pub type LabelVec = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingBlock {
    pub rank: usize,
    pub omega: Vec<String>,
    pub mu: Vec<i64>,
    #[serde(default)]
    pub t_degrees: Vec<i64>,
    #[serde(default)]
    pub effective: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereBlock {
    pub rank: usize,
    pub varpi: Vec<Vec<i64>>,
    pub w_s: Vec<u8>,
    #[serde(default)]
    pub effective: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeEntry {
    pub a: String,
    pub b: String,
    pub out: LabelVec,
}

/// A model, either spelled out or given as an exterior algebra on
/// degree-one generators (with optional extra differential).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub name: String,
    pub dim: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<(String, i64)>,
    #[serde(default = "default_unit")]
    pub unit: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wedge: Vec<WedgeEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diff: BTreeMap<String, LabelVec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub integral: LabelVec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<BTreeMap<String, LabelVec>>,
}

fn default_unit() -> String {
    "1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryBlock {
    #[serde(default)]
    pub alpha: Vec<String>,
    #[serde(default)]
    pub eta: Vec<String>,
    pub out: LabelVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableBlock {
    pub kind: String,
    pub beta: Vec<i64>,
    pub k: usize,
    pub l: usize,
    pub entries: Vec<EntryBlock>,
}

/// Bounding pair given as element expressions (see [`parse_element`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBlock {
    #[serde(default = "zero_expr")]
    pub gamma: String,
    #[serde(default = "zero_expr")]
    pub b: String,
}

fn zero_expr() -> String {
    "0".into()
}

/// The whole backend document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendFile {
    pub schema: String,
    pub name: String,
    pub n: i64,
    pub ring: RingBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereBlock>,
    pub l_model: ModelBlock,
    pub x_model: ModelBlock,
    #[serde(default)]
    pub pd_l: LabelVec,
    pub tables: Vec<TableBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounding_pair: Option<PairBlock>,
}

fn label_vec(v: &LabelVec) -> Result<Vec<(String, Q)>> {
    v.iter().map(|(l, q)| Ok((l.clone(), parse_q(q)?))).collect()
}

impl ModelBlock {
    fn spec(&self) -> Result<ModelSpec> {
        let mut spec = match &self.exterior {
            Some(gens) => {
                if !self.basis.is_empty() || !self.wedge.is_empty() {
                    return Err(Error::Parse(format!(
                        "{}: an exterior model cannot also list basis or wedge",
                        self.name
                    )));
                }
                let g: Vec<&str> = gens.iter().map(String::as_str).collect();
                let mut s = exterior_spec(&self.name, &g);
                s.dim = self.dim;
                s
            }
            None => ModelSpec {
                name: self.name.clone(),
                dim: self.dim,
                basis: self.basis.clone(),
                unit: self.unit.clone(),
                wedge: self
                    .wedge
                    .iter()
                    .map(|w| Ok((w.a.clone(), w.b.clone(), label_vec(&w.out)?)))
                    .collect::<Result<_>>()?,
                diff: vec![],
                integral: vec![],
                restriction: None,
            },
        };
        spec.diff = self.diff.iter().map(|(a, v)| Ok((a.clone(), label_vec(v)?))).collect::<Result<_>>()?;
        if !self.integral.is_empty() || self.exterior.is_none() {
            spec.integral = label_vec(&self.integral)?;
        }
        spec.restriction = match &self.restriction {
            None => None,
            Some(r) => Some(r.iter().map(|(a, v)| Ok((a.clone(), label_vec(v)?))).collect::<Result<_>>()?),
        };
        Ok(spec)
    }
}

impl BackendFile {
    /// Parses a JSON document; every structural problem is a parse error.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: BackendFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported schema `{}`, expected `{SCHEMA}`", f.schema)));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("backend files serialize");
        s.push('\n');
        s
    }

    /// Builds the backend. Semantic checks are left to [`Backend::validate`].
    pub fn build(&self) -> Result<Backend> {
        let omega = self.ring.omega.iter().map(|s| parse_energy(s)).collect::<Result<Vec<Energy>>>()?;
        let classes = ClassGroup {
            rank: self.ring.rank,
            omega,
            mu: self.ring.mu.clone(),
            effective: self.ring.effective.clone(),
        };
        let ring = NovikovRing::new(classes, self.ring.t_degrees.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let sphere = match &self.sphere {
            Some(s) => {
                SphereData { rank: s.rank, varpi: s.varpi.clone(), w_s: s.w_s.clone(), effective: s.effective.clone() }
            }
            None => SphereData { rank: 0, varpi: vec![], w_s: vec![], effective: vec![] },
        };
        let l_model = Arc::new(FormModel::build(&self.l_model.spec()?, None)?);
        if self.x_model.restriction.is_none() {
            return Err(Error::Parse("the X-model must carry a restriction to the L-model".into()));
        }
        let x_model = Arc::new(FormModel::build(&self.x_model.spec()?, Some(&l_model))?);
        if l_model.name == x_model.name {
            return Err(Error::Parse("the two models need distinct names".into()));
        }
        let mut pd = Vec::new();
        for (lab, q) in &self.pd_l {
            let i = x_model.index_of(lab).map_err(|e| Error::Parse(e.to_string()))?;
            pd.push((i, parse_q(q)?));
        }
        pd.sort_by_key(|(i, _)| *i);
        let mut records = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            let kind: Kind = t.kind.parse()?;
            let entries = t
                .entries
                .iter()
                .map(|e| Ok((e.alpha.clone(), e.eta.clone(), label_vec(&e.out)?)))
                .collect::<Result<_>>()?;
            records.push(TableRecord { kind, beta: t.beta.clone(), k: t.k, l: t.l, entries });
        }
        Backend::new(&self.name, self.n, ring, sphere, l_model, x_model, pd, &records)
    }

    /// The declared bounding pair, or zero.
    pub fn pair(&self, be: &Backend, cutoff: Energy) -> Result<BoundingPair> {
        match &self.bounding_pair {
            None => Ok(BoundingPair::zero(be, cutoff)),
            Some(p) => Ok(BoundingPair {
                gamma: parse_element(be, &be.x_model, &p.gamma, cutoff)?,
                b: parse_element(be, &be.l_model, &p.b, cutoff)?,
            }),
        }
    }
}

/// Names of the bundled backends.
pub const BUNDLED: [&str; 2] = ["classical", "clifford"];

/// The shipped JSON text of a bundled backend.
pub fn bundled_text(name: &str) -> Result<&'static str> {
    match name {
        "classical" => Ok(include_str!("../data/classical_t4_t2.json")),
        "clifford" => Ok(include_str!("../data/clifford.json")),
        other => Err(Error::Usage(format!("no bundled backend named `{other}`"))),
    }
}

/// Parses a bundled backend document.
pub fn bundled(name: &str) -> Result<BackendFile> {
    BackendFile::from_json(bundled_text(name)?)
}

fn split_terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut depth = 0i32;
    let mut prev: Option<char> = None;
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        let at_sign = depth == 0 && (ch == '+' || ch == '-') && !matches!(prev, Some('^') | Some('*') | Some('/'));
        if at_sign {
            if !cur.is_empty() {
                out.push((neg, std::mem::take(&mut cur)));
            }
            neg = ch == '-';
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if !cur.is_empty() {
        out.push((neg, cur));
    }
    out
}

fn parse_mono_factor(ring: &NovikovRing, f: &str) -> Result<Option<Mono>> {
    if let Some(rest) = f.strip_prefix("T^") {
        let inner = rest.trim_start_matches('[').trim_end_matches(']');
        let beta: Vec<i64> = inner
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad class in `{f}`"))))
            .collect::<Result<_>>()?;
        if beta.len() != ring.rank() {
            return Err(Error::Parse(format!("class in `{f}` has rank {}, expected {}", beta.len(), ring.rank())));
        }
        return Ok(Some(ring.t_beta(&beta)));
    }
    if let Some(rest) = f.strip_prefix('t') {
        let (j, e) = match rest.split_once('^') {
            Some((j, e)) => (j, e),
            None => (rest, "1"),
        };
        if let (Ok(j), Ok(e)) = (j.parse::<usize>(), e.parse::<u32>()) {
            if j >= ring.n_vars() {
                return Err(Error::Parse(format!("variable t{j} does not exist in this ring")));
            }
            let mut m = ring.one_mono();
            m.kappa[j] = e;
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Parses an element expression such as `t0*e1 - 1/2*T^[1]*y + 3`.
///
/// Each term is a product of factors separated by `*`: rationals,
/// `T^[a,..]` (or `T^a` in rank one), `tj` or `tj^e`, and at most one
/// basis label, which must come last. A term without a label multiplies
/// the unit. Monomial factors are multiplied in order with their graded
/// signs.
pub fn parse_element(be: &Backend, model: &Arc<FormModel>, s: &str, cutoff: Energy) -> Result<GradedElement> {
    let ring = &be.ring;
    let mut out = GradedElement::zero(ring, model, cutoff);
    if s.trim() == "0" || s.trim().is_empty() {
        return Ok(out);
    }
    for (neg, term) in split_terms(s) {
        let factors: Vec<&str> = term.split('*').collect();
        let mut coeff = Q::from_integer(1.into());
        let mut mono = ring.one_mono();
        let mut idx = None;
        for (pos, f) in factors.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::Parse(format!("empty factor in `{term}`")));
            }
            if pos + 1 == factors.len() {
                if let Ok(i) = model.index_of(f) {
                    idx = Some(i);
                    continue;
                }
            }
            if let Some(m) = parse_mono_factor(ring, f)? {
                match ring.mono_mul(&mono, &m) {
                    Some((mm, sgn)) => {
                        mono = mm;
                        if sgn == 1 {
                            coeff = -coeff;
                        }
                    }
                    None => coeff = Q::from_integer(0.into()),
                }
                continue;
            }
            match parse_q(f) {
                Ok(q) => coeff *= q,
                Err(_) => return Err(Error::Parse(format!("unknown factor `{f}` in `{term}`"))),
            }
        }
        let i = idx.unwrap_or(model.unit);
        if neg {
            coeff = -coeff;
        }
        out.add_term(i, mono, coeff);
    }
    Ok(out)
}

fn entry(alpha: &[&str], eta: &[&str], out: &[(&str, Q)]) -> EntryBlock {
    EntryBlock {
        alpha: alpha.iter().map(|s| s.to_string()).collect(),
        eta: eta.iter().map(|s| s.to_string()).collect(),
        out: out.iter().map(|(l, q)| (l.to_string(), fmt_q(q))).collect(),
    }
}

fn table(kind: Kind, beta: Vec<i64>, k: usize, l: usize, entries: Vec<EntryBlock>) -> TableBlock {
    TableBlock { kind: kind.to_string(), beta, k, l, entries }
}

/// A model block given by exterior generators of degree one.
pub fn exterior_block(name: &str, gens: &[&str]) -> ModelBlock {
    ModelBlock {
        name: name.into(),
        dim: gens.len() as i64,
        exterior: Some(gens.iter().map(|s| s.to_string()).collect()),
        basis: vec![],
        unit: "1".into(),
        wedge: vec![],
        diff: BTreeMap::new(),
        integral: BTreeMap::new(),
        restriction: None,
    }
}

fn labels(v: &[(usize, Q)], m: &FormModel) -> Vec<(String, Q)> {
    v.iter().map(|(i, q)| (m.label(*i).to_string(), q.clone())).collect()
}

/// The classical tables every backend over `(L, X)` carries at the zero
/// class: restriction, the signed wedge on L, the wedge on X and the
/// geodesic fundamental-class operator.
pub fn classical_tables(l: &FormModel, x: &FormModel, n: i64, disk_rank: usize, sphere_rank: usize) -> Vec<TableBlock> {
    let b0 = vec![0; disk_rank];
    let one = Q::from_integer(1.into());
    let mut restr = Vec::new();
    for f in 0..x.len() {
        let r = labels(x.restrict_basis(f).expect("X-model has a restriction"), l);
        if !r.is_empty() {
            let r: Vec<(&str, Q)> = r.iter().map(|(s, q)| (s.as_str(), q.clone())).collect();
            restr.push(entry(&[], &[x.label(f)], &r));
        }
    }
    let mut wl = Vec::new();
    for a in 0..l.len() {
        for b in 0..l.len() {
            let w = labels(l.wedge_basis(a, b), l);
            if !w.is_empty() {
                let w: Vec<(&str, Q)> = w.iter().map(|(s, q)| (s.as_str(), q.clone())).collect();
                wl.push(entry(&[l.label(a), l.label(b)], &[], &w));
            }
        }
    }
    let mut wx = Vec::new();
    for a in 0..x.len() {
        for b in 0..x.len() {
            let w = labels(x.wedge_basis(a, b), x);
            if !w.is_empty() {
                let w: Vec<(&str, Q)> = w.iter().map(|(s, q)| (s.as_str(), q.clone())).collect();
                wx.push(entry(&[], &[x.label(a), x.label(b)], &w));
            }
        }
    }
    // Raw value (-1)^{n+1} (eta|_L ^ alpha), so that the prefactored
    // operator is (-1)^n alpha when eta = 1.
    let sign = if n % 2 == 0 { -one.clone() } else { one.clone() };
    let mut geo = Vec::new();
    for f in 0..x.len() {
        let r = x.restrict_basis(f).expect("X-model has a restriction");
        for a in 0..l.len() {
            let mut acc: Vec<(usize, Q)> = Vec::new();
            for (i, q) in r {
                for (c, w) in l.wedge_basis(*i, a) {
                    match acc.iter_mut().find(|(j, _)| j == c) {
                        Some(slot) => slot.1 += q * w * &sign,
                        None => acc.push((*c, q * w * &sign)),
                    }
                }
            }
            acc.retain(|(_, q)| *q != Q::from_integer(0.into()));
            if !acc.is_empty() {
                let w = labels(&acc, l);
                let w: Vec<(&str, Q)> = w.iter().map(|(s, q)| (s.as_str(), q.clone())).collect();
                geo.push(entry(&[l.label(a)], &[x.label(f)], &w));
            }
        }
    }
    let mut out = vec![
        table(Kind::Disk, b0.clone(), 0, 1, restr),
        table(Kind::Disk, b0.clone(), 2, 0, wl),
        table(Kind::Geodesic(1), b0, 1, 1, geo),
    ];
    if sphere_rank > 0 {
        out.push(table(Kind::Sphere, vec![0; sphere_rank], 0, 2, wx));
    }
    out
}

/// The classical backend: invariant forms on the torus `T^2` inside `T^4`
/// with tables only at the zero class.
pub fn classical_file() -> BackendFile {
    let l_model = exterior_block("L", &["e1", "e2"]);
    let mut x_model = exterior_block("X", &["f1", "f2", "f3", "f4"]);
    let lm = FormModel::build(&l_model.spec().expect("valid"), None).expect("valid");
    let xs = exterior_spec("X", &["f1", "f2", "f3", "f4"]);
    let mut restriction = BTreeMap::new();
    for (lab, _) in &xs.basis {
        let img = if lab.contains('3') || lab.contains('4') {
            BTreeMap::new()
        } else {
            let target = lab.replace('f', "e");
            BTreeMap::from([(target, "1".to_string())])
        };
        if !img.is_empty() {
            restriction.insert(lab.clone(), img);
        }
    }
    x_model.restriction = Some(restriction);
    let xm = FormModel::build(&x_model.spec().expect("valid"), Some(&lm)).expect("valid");
    let tables = classical_tables(&lm, &xm, 2, 1, 1);
    BackendFile {
        schema: SCHEMA.into(),
        name: "classical-t4-t2".into(),
        n: 2,
        ring: RingBlock { rank: 1, omega: vec!["1".into()], mu: vec![2], t_degrees: vec![], effective: vec![] },
        sphere: Some(SphereBlock { rank: 1, varpi: vec![vec![0]], w_s: vec![0], effective: vec![] }),
        l_model,
        x_model,
        pd_l: BTreeMap::from([("f3f4".to_string(), "1".to_string())]),
        tables,
        bounding_pair: None,
    }
}

/// The Clifford torus in the complex projective plane with the disk,
/// geodesic and sphere tables realizing the quantum relation.
pub fn clifford_file() -> BackendFile {
    let l_model = exterior_block("L", &["e1", "e2"]);
    let one = |s: &str| BTreeMap::from([(s.to_string(), "1".to_string())]);
    let x_model = ModelBlock {
        name: "X".into(),
        dim: 4,
        exterior: None,
        basis: vec![("1".into(), 0), ("y".into(), 2), ("y2".into(), 4)],
        unit: "1".into(),
        wedge: vec![
            WedgeEntry { a: "y".into(), b: "y".into(), out: one("y2") },
            WedgeEntry { a: "y".into(), b: "y2".into(), out: BTreeMap::new() },
            WedgeEntry { a: "y2".into(), b: "y".into(), out: BTreeMap::new() },
            WedgeEntry { a: "y2".into(), b: "y2".into(), out: BTreeMap::new() },
        ],
        diff: BTreeMap::new(),
        integral: one("y2"),
        restriction: Some(BTreeMap::from([("1".to_string(), one("1"))])),
    };
    let lm = FormModel::build(&l_model.spec().expect("valid"), None).expect("valid");
    let xm = FormModel::build(&x_model.spec().expect("valid"), Some(&lm)).expect("valid");
    let mut tables = classical_tables(&lm, &xm, 2, 1, 1);
    let q = |x: i64| Q::from_integer(x.into());
    tables.push(table(Kind::Disk, vec![1], 0, 0, vec![entry(&[], &[], &[("1", q(-3))])]));
    tables.push(table(Kind::Disk, vec![1], 0, 1, vec![entry(&[], &["y"], &[("1", q(1))])]));
    tables.push(table(Kind::Disk, vec![2], 0, 1, vec![entry(&[], &["y2"], &[("1", q(1))])]));
    for (beta, y) in [(1, "y"), (2, "y2")] {
        let entries = (0..lm.len()).map(|a| entry(&[lm.label(a)], &[y], &[(lm.label(a), q(-1))])).collect();
        tables.push(table(Kind::Geodesic(1), vec![beta], 1, 1, entries));
    }
    tables.push(table(
        Kind::Sphere,
        vec![1],
        0,
        2,
        vec![
            entry(&[], &["y", "y2"], &[("1", q(1))]),
            entry(&[], &["y2", "y"], &[("1", q(1))]),
            entry(&[], &["y2", "y2"], &[("y", q(1))]),
        ],
    ));
    BackendFile {
        schema: SCHEMA.into(),
        name: "clifford".into(),
        n: 2,
        ring: RingBlock {
            rank: 1,
            omega: vec!["1".into()],
            mu: vec![2],
            t_degrees: vec![0],
            effective: vec![vec![1], vec![2], vec![3]],
        },
        sphere: Some(SphereBlock { rank: 1, varpi: vec![vec![3]], w_s: vec![0], effective: vec![vec![1]] }),
        l_model,
        x_model,
        pd_l: BTreeMap::new(),
        tables,
        bounding_pair: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_shipped(name: &str, built: BackendFile, path: &str) {
        if std::env::var_os("FLOER_QKERNEL_REGEN").is_some() {
            std::fs::write(path, built.to_json()).unwrap();
        }
        let shipped = bundled(name).unwrap();
        assert_eq!(shipped, built, "{path} is out of date; rerun with FLOER_QKERNEL_REGEN=1");
    }

    #[test]
    fn shipped_files_match_builders() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
        check_shipped("classical", classical_file(), &format!("{dir}/classical_t4_t2.json"));
        check_shipped("clifford", clifford_file(), &format!("{dir}/clifford.json"));
    }

    #[test]
    fn shipped_backends_validate() {
        for name in BUNDLED {
            let be = bundled(name).unwrap().build().unwrap();
            assert!(be.validate().is_empty(), "{name}: {:?}", be.validate());
        }
    }

    #[test]
    fn element_expressions() {
        let be = bundled("clifford").unwrap().build().unwrap();
        let e = Energy::from_integer(5);
        let x = parse_element(&be, &be.l_model, "t0*e1 - 1/2*T^[1]*e1e2 + 3", e).unwrap();
        assert_eq!(x.terms().len(), 3);
        assert_eq!(x.coeff(be.l_model.unit, &be.ring.one_mono()), Q::from_integer(3.into()));
        let y = parse_element(&be, &be.x_model, "T^1*y", e).unwrap();
        assert_eq!(y.degree(), Some(4));
        assert!(parse_element(&be, &be.l_model, "q*e1", e).is_err());
        assert!(parse_element(&be, &be.l_model, "0", e).unwrap().is_zero());
    }

    #[test]
    fn schema_and_arity_errors_are_parse_errors() {
        let mut f = classical_file();
        f.schema = "other".into();
        assert!(matches!(BackendFile::from_json(&f.to_json()), Err(Error::Parse(_))));
        let mut f = classical_file();
        f.tables[0].entries[0].eta.push("1".into());
        assert!(matches!(f.build(), Err(Error::Parse(_))));
    }
}
