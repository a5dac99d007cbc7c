//! Cross-ratios on nodal genus-zero configurations and the constraint maps
//! built from them.
//!
//! Disk components use the upper half-plane model with boundary
//! `R ∪ {∞}`; spheres use the Riemann sphere. The doubled surface replaces
//! each disk by the sphere obtained from gluing it to its conjugate and
//! each sphere `S` by the pair `S`, `S̄`. All numerics are binary64 with the
//! tolerance [`TOL`].

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

pub type C = Complex64;

/// Tolerance for every approximate comparison in this module.
pub const TOL: f64 = 1e-9;

/// A point of `C ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum RiemannPoint {
    Finite(C),
    Infinity,
}

/// File representation: `[re, im]`, a bare real, or the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Pair([f64; 2]),
    Real(f64),
    Tag(String),
}

impl TryFrom<PointRepr> for RiemannPoint {
    type Error = String;

    fn try_from(r: PointRepr) -> std::result::Result<Self, String> {
        let p = match r {
            PointRepr::Pair([re, im]) => RiemannPoint::Finite(C::new(re, im)),
            PointRepr::Real(re) => RiemannPoint::Finite(C::new(re, 0.0)),
            PointRepr::Tag(s) if s == "inf" => return Ok(RiemannPoint::Infinity),
            PointRepr::Tag(s) => return Err(format!("expected [re, im], a number or \"inf\", got {s:?}")),
        };
        match p {
            RiemannPoint::Finite(z) if !(z.re.is_finite() && z.im.is_finite()) => {
                Err("coordinates must be finite; write \"inf\" for the point at infinity".into())
            }
            p => Ok(p),
        }
    }
}

impl From<RiemannPoint> for PointRepr {
    fn from(p: RiemannPoint) -> Self {
        match p {
            RiemannPoint::Finite(z) => PointRepr::Pair([z.re, z.im]),
            RiemannPoint::Infinity => PointRepr::Tag("inf".into()),
        }
    }
}

impl RiemannPoint {
    pub fn real(x: f64) -> Self {
        RiemannPoint::Finite(C::new(x, 0.0))
    }

    pub fn new(re: f64, im: f64) -> Self {
        RiemannPoint::Finite(C::new(re, im))
    }

    pub fn finite(self) -> Option<C> {
        match self {
            RiemannPoint::Finite(z) => Some(z),
            RiemannPoint::Infinity => None,
        }
    }

    pub fn conj(self) -> Self {
        match self {
            RiemannPoint::Finite(z) => RiemannPoint::Finite(z.conj()),
            RiemannPoint::Infinity => RiemannPoint::Infinity,
        }
    }

    /// On `R ∪ {∞}`, exactly.
    pub fn is_real(self) -> bool {
        match self {
            RiemannPoint::Finite(z) => z.im == 0.0,
            RiemannPoint::Infinity => true,
        }
    }

    /// Chordal distance on the Riemann sphere, at most 1.
    pub fn chordal(self, other: RiemannPoint) -> f64 {
        match (self, other) {
            (RiemannPoint::Infinity, RiemannPoint::Infinity) => 0.0,
            (RiemannPoint::Finite(z), RiemannPoint::Infinity) | (RiemannPoint::Infinity, RiemannPoint::Finite(z)) => {
                1.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (RiemannPoint::Finite(a), RiemannPoint::Finite(b)) => {
                (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }

    /// Counter-clockwise angle of a boundary point after the Cayley map,
    /// in `[0, 2π)`; `∞` sits at angle 0.
    fn boundary_angle(self) -> f64 {
        match self {
            RiemannPoint::Infinity => 0.0,
            RiemannPoint::Finite(z) => cayley(z).arg().rem_euclid(TAU),
        }
    }
}

impl fmt::Display for RiemannPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiemannPoint::Infinity => write!(f, "inf"),
            // Adding 0.0 turns a negative zero into a positive one.
            RiemannPoint::Finite(z) => write!(f, "{:.12}{:+.12}i", z.re + 0.0, z.im + 0.0),
        }
    }
}

/// A point of `[-∞, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The chart `z ↦ 1/2 + iz` onto `(1/2 + iR) ∪ {∞}`, sending both
    /// infinities to `∞`.
    pub fn pi(self) -> RiemannPoint {
        match self {
            ExtendedReal::Finite(t) => RiemannPoint::new(0.5, t),
            _ => RiemannPoint::Infinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::PosInf => write!(f, "+inf"),
            ExtendedReal::Finite(t) => write!(f, "{:.12}", t + 0.0),
        }
    }
}

/// The embedding `z ↦ z/√(1+z²)` of `[-∞, ∞]` onto `[-1, 1]`.
pub fn f_embed(t: ExtendedReal) -> f64 {
    match t {
        ExtendedReal::NegInf => -1.0,
        ExtendedReal::PosInf => 1.0,
        ExtendedReal::Finite(t) => t / (1.0 + t * t).sqrt(),
    }
}

/// Cayley map from the upper half-plane to the unit disk.
pub fn cayley(w: C) -> C {
    let i = C::i();
    (w - i) / (w + i)
}

/// Inverse of [`cayley`]; the boundary point 1 goes to `∞`.
pub fn cayley_inv(u: C) -> RiemannPoint {
    if (u - 1.0).norm() == 0.0 {
        return RiemannPoint::Infinity;
    }
    RiemannPoint::Finite(C::i() * (1.0 + u) / (1.0 - u))
}

/// `z ↦ (az + b)/(cz + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn apply(&self, p: RiemannPoint) -> RiemannPoint {
        match p {
            RiemannPoint::Infinity => {
                if self.c == C::new(0.0, 0.0) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite(self.a / self.c)
                }
            }
            RiemannPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == C::new(0.0, 0.0) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Real coefficients with positive determinant: an automorphism of the
    /// upper half-plane.
    pub fn preserves_upper_half_plane(&self) -> bool {
        let real = [self.a, self.b, self.c, self.d].iter().all(|x| x.im == 0.0);
        real && (self.a * self.d - self.b * self.c).re > 0.0
    }

    /// A random element of `PSL₂(C)` with entries of modulus at most 1,
    /// normalized to determinant 1.
    pub fn random_complex<R: Rng>(rng: &mut R) -> Mobius {
        loop {
            let mut e = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a, b, c, d) = (e(), e(), e(), e());
            let det = a * d - b * c;
            if det.norm() > 0.1 {
                let s = det.sqrt();
                return Mobius { a: a / s, b: b / s, c: c / s, d: d / s };
            }
        }
    }

    /// A random element of `PSL₂(R)`, normalized to determinant 1.
    pub fn random_real<R: Rng>(rng: &mut R) -> Mobius {
        loop {
            let mut e = || rng.gen_range(-1.0..1.0);
            let (a, b, c, d) = (e(), e(), e(), e());
            let det: f64 = a * d - b * c;
            if det > 0.1 {
                let s = det.sqrt();
                let r = |x: f64| C::new(x / s, 0.0);
                return Mobius { a: r(a), b: r(b), c: r(c), d: r(d) };
            }
        }
    }
}

/// `((x₂−x₃)(x₄−x₁))/((x₁−x₂)(x₃−x₄))` for points of one sphere, with at
/// most one coincident pair. Points at `∞` are handled by first moving all
/// four with `z ↦ 1/(z − s)` for a pole `s` far from every finite point.
pub fn cross_ratio_points(x: [RiemannPoint; 4]) -> Result<RiemannPoint> {
    for i in 0..4 {
        for j in i + 1..4 {
            for l in j + 1..4 {
                if x[i] == x[j] && x[j] == x[l] {
                    return Err(Error::Precondition(format!("three coincident points {}", x[i])));
                }
            }
        }
    }
    let z: [C; 4] = if x.iter().all(|p| p.finite().is_some()) {
        x.map(|p| p.finite().unwrap())
    } else {
        let fin: Vec<C> = x.iter().filter_map(|p| p.finite()).collect();
        let scale = 1.0 + fin.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = (0..8)
            .map(|t| C::from_polar(scale, 0.3 + t as f64 * TAU / 8.0))
            .max_by(|a, b| {
                let gap = |s: &C| fin.iter().map(|z| (z - s).norm()).fold(f64::INFINITY, f64::min);
                gap(a).total_cmp(&gap(b))
            })
            .unwrap();
        x.map(|p| match p {
            RiemannPoint::Infinity => C::new(0.0, 0.0),
            RiemannPoint::Finite(z) => 1.0 / (z - s),
        })
    };
    let coincide = |i: usize, j: usize| x[i] == x[j];
    if coincide(0, 1) || coincide(2, 3) {
        return Ok(RiemannPoint::Infinity);
    }
    let num = (z[1] - z[2]) * (z[3] - z[0]);
    let den = (z[0] - z[1]) * (z[2] - z[3]);
    Ok(RiemannPoint::Finite(num / den))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Disk,
    Sphere,
}

/// Two components glued at `at_a ∈ a` and `at_b ∈ b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub a: usize,
    pub at_a: RiemannPoint,
    pub b: usize,
    pub at_b: RiemannPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub component: usize,
    pub at: RiemannPoint,
}

/// A stable genus-zero nodal configuration with boundary marks
/// `z₀,…,z_k` and interior marks `w₁,…,w_l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalConfig {
    pub components: Vec<ComponentKind>,
    #[serde(default)]
    pub nodes: Vec<Node>,
    pub boundary_marks: Vec<Mark>,
    #[serde(default)]
    pub interior_marks: Vec<Mark>,
}

/// A marked point of the doubled surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkId {
    /// `z_j`, zero-based.
    Z(usize),
    /// `w_j`, one-based as in the constraint maps.
    W(usize),
    /// `w̄_j`, one-based.
    WBar(usize),
}

impl fmt::Display for MarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkId::Z(j) => write!(f, "z{j}"),
            MarkId::W(j) => write!(f, "w{j}"),
            MarkId::WBar(j) => write!(f, "wbar{j}"),
        }
    }
}

/// A point of the doubled surface: a component and a coordinate on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub comp: usize,
    pub at: RiemannPoint,
}

/// A component of the doubled surface and where it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoubledComponent {
    pub origin: usize,
    pub kind: ComponentKind,
    /// The conjugate copy of a sphere.
    pub conjugate: bool,
}

/// The doubled surface as a tree of spheres.
#[derive(Clone, Debug)]
pub struct Doubled {
    pub comps: Vec<DoubledComponent>,
    /// For each component, its nodes as (neighbour, coordinate here).
    adj: Vec<Vec<(usize, RiemannPoint)>>,
    /// Index of each original component and, for spheres, its conjugate.
    index: Vec<(usize, Option<usize>)>,
}

impl Doubled {
    /// `x^ν`: `x` itself if it lies on `ν`, otherwise the node of `ν` on the
    /// branch containing `x`.
    pub fn reduce(&self, nu: usize, x: SurfacePoint) -> Result<RiemannPoint> {
        if x.comp == nu {
            return Ok(x.at);
        }
        // Breadth-first search from ν, remembering the first hop.
        let n = self.comps.len();
        let mut first: Vec<Option<RiemannPoint>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[nu] = true;
        let mut queue = std::collections::VecDeque::new();
        for &(c, at) in &self.adj[nu] {
            if !seen[c] {
                seen[c] = true;
                first[c] = Some(at);
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            for &(d, _) in &self.adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    first[d] = first[c];
                    queue.push_back(d);
                }
            }
        }
        first[x.comp].ok_or_else(|| Error::Precondition(format!("component {} is not connected to {nu}", x.comp)))
    }

    /// The unique component on which three pairwise distinct points reduce
    /// to pairwise distinct points.
    pub fn root(&self, x: [SurfacePoint; 3]) -> Result<usize> {
        if x[0] == x[1] || x[1] == x[2] || x[0] == x[2] {
            return Err(Error::Precondition("root component needs three pairwise distinct points".into()));
        }
        let roots = self.roots(x)?;
        match roots.as_slice() {
            [nu] => Ok(*nu),
            _ => Err(Error::Precondition(format!("expected one root component, found {roots:?}"))),
        }
    }

    /// Every component on which the three points reduce to pairwise
    /// distinct points.
    pub fn roots(&self, x: [SurfacePoint; 3]) -> Result<Vec<usize>> {
        let mut out = vec![];
        for nu in 0..self.comps.len() {
            let r = [self.reduce(nu, x[0])?, self.reduce(nu, x[1])?, self.reduce(nu, x[2])?];
            if r[0] != r[1] && r[1] != r[2] && r[0] != r[2] {
                out.push(nu);
            }
        }
        Ok(out)
    }

    /// Cross-ratio of four points on the doubled surface.
    pub fn cross_ratio(&self, x: [SurfacePoint; 4]) -> Result<RiemannPoint> {
        let eq = |i: usize, j: usize| x[i] == x[j];
        for (i, j, l) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            if eq(i, j) && eq(j, l) {
                return Err(Error::Precondition("three of the four points coincide".into()));
            }
        }
        if eq(0, 1) && eq(2, 3) {
            return Ok(RiemannPoint::Infinity);
        }
        if eq(0, 2) && eq(1, 3) {
            return Ok(RiemannPoint::real(1.0));
        }
        if eq(0, 3) && eq(1, 2) {
            return Ok(RiemannPoint::real(0.0));
        }
        let (i, j, l) = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
            .into_iter()
            .find(|&(i, j, l)| !eq(i, j) && !eq(j, l) && !eq(i, l))
            .expect("at most one coincident pair leaves a distinct triple");
        let nu = self.root([x[i], x[j], x[l]])?;
        let r = [self.reduce(nu, x[0])?, self.reduce(nu, x[1])?, self.reduce(nu, x[2])?, self.reduce(nu, x[3])?];
        cross_ratio_points(r)
    }

    /// The doubled component of an original component; for spheres, the
    /// conjugate copy when `conjugate` is set.
    pub fn component_of(&self, origin: usize, conjugate: bool) -> usize {
        let (c, cbar) = self.index[origin];
        if conjugate {
            cbar.unwrap_or(c)
        } else {
            c
        }
    }
}

impl NodalConfig {
    /// One disk with the given boundary and interior marks.
    pub fn single_disk(boundary: Vec<RiemannPoint>, interior: Vec<C>) -> Self {
        NodalConfig {
            components: vec![ComponentKind::Disk],
            nodes: vec![],
            boundary_marks: boundary.into_iter().map(|at| Mark { component: 0, at }).collect(),
            interior_marks: interior.into_iter().map(|w| Mark { component: 0, at: RiemannPoint::Finite(w) }).collect(),
        }
    }

    /// Parse a JSON record and validate it.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: NodalConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("nodal config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// Number of boundary marks minus one.
    pub fn k(&self) -> usize {
        self.boundary_marks.len().saturating_sub(1)
    }

    pub fn l(&self) -> usize {
        self.interior_marks.len()
    }

    /// Check every structural invariant, collecting all violations.
    pub fn validate(&self) -> Result<()> {
        let mut w = vec![];
        let n = self.components.len();
        if n == 0 || !self.components.contains(&ComponentKind::Disk) {
            w.push("a configuration needs at least one disk component".to_string());
        }
        if self.boundary_marks.is_empty() {
            w.push("z0 is missing".to_string());
        }
        let mut special: Vec<Vec<(String, RiemannPoint)>> = vec![vec![]; n];
        for (i, nd) in self.nodes.iter().enumerate() {
            if nd.a >= n || nd.b >= n || nd.a == nd.b {
                w.push(format!("node {i} joins invalid components {} and {}", nd.a, nd.b));
                continue;
            }
            let (ka, kb) = (self.components[nd.a], self.components[nd.b]);
            let ok = match (ka, kb) {
                (ComponentKind::Disk, ComponentKind::Disk) => nd.at_a.is_real() && nd.at_b.is_real(),
                (ComponentKind::Disk, ComponentKind::Sphere) => upper(nd.at_a),
                (ComponentKind::Sphere, ComponentKind::Disk) => upper(nd.at_b),
                (ComponentKind::Sphere, ComponentKind::Sphere) => true,
            };
            if !ok {
                w.push(format!("node {i}: disks meet on the boundary, spheres at interior points of disks"));
            }
            special[nd.a].push((format!("node {i}"), nd.at_a));
            special[nd.b].push((format!("node {i}"), nd.at_b));
        }
        for (j, m) in self.boundary_marks.iter().enumerate() {
            if m.component >= n || self.components[m.component] != ComponentKind::Disk || !m.at.is_real() {
                w.push(format!("z{j} must lie on the boundary of a disk component"));
            } else {
                special[m.component].push((format!("z{j}"), m.at));
            }
        }
        for (j, m) in self.interior_marks.iter().enumerate() {
            let ok = m.component < n
                && match self.components[m.component] {
                    ComponentKind::Disk => upper(m.at),
                    ComponentKind::Sphere => true,
                };
            if !ok {
                w.push(format!("w{} must lie in the interior of a disk or on a sphere", j + 1));
            } else {
                special[m.component].push((format!("w{}", j + 1), m.at));
            }
        }
        for (c, pts) in special.iter().enumerate() {
            for (i, (na, pa)) in pts.iter().enumerate() {
                for (nb, pb) in &pts[i + 1..] {
                    if pa == pb {
                        w.push(format!("{na} and {nb} coincide on component {c}"));
                    }
                }
            }
        }
        if n > 0 && !self.is_tree() {
            w.push(format!("{n} components and {} nodes do not form a tree", self.nodes.len()));
        }
        if w.is_empty() {
            let order = self.boundary_order();
            if order != (0..self.boundary_marks.len()).collect::<Vec<_>>() {
                w.push(format!("boundary marks are not in counter-clockwise order: {order:?}"));
            }
        }
        if w.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(w))
        }
    }

    fn is_tree(&self) -> bool {
        let n = self.components.len();
        if self.nodes.len() + 1 != n {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for nd in &self.nodes {
            if nd.a >= n || nd.b >= n {
                return false;
            }
            let (ra, rb) = (find(&mut parent, nd.a), find(&mut parent, nd.b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// Indices of the boundary marks in the order met by walking the
    /// boundary of the nodal disk counter-clockwise from `z₀`.
    pub fn boundary_order(&self) -> Vec<usize> {
        let mut out = vec![];
        if let Some(z0) = self.boundary_marks.first() {
            self.walk_boundary(z0.component, None, z0.at, &mut out);
        }
        out
    }

    fn walk_boundary(&self, comp: usize, from: Option<usize>, start: RiemannPoint, out: &mut Vec<usize>) {
        enum Item {
            Mark(usize),
            Child(usize, RiemannPoint),
        }
        let mut items: Vec<(f64, Item)> = vec![];
        let key = |p: RiemannPoint| (p.boundary_angle() - start.boundary_angle()).rem_euclid(TAU);
        for (j, m) in self.boundary_marks.iter().enumerate() {
            if m.component == comp {
                items.push((key(m.at), Item::Mark(j)));
            }
        }
        for nd in &self.nodes {
            let both_disks =
                self.components[nd.a] == ComponentKind::Disk && self.components[nd.b] == ComponentKind::Disk;
            if !both_disks {
                continue;
            }
            if nd.a == comp && Some(nd.b) != from {
                items.push((key(nd.at_a), Item::Child(nd.b, nd.at_b)));
            } else if nd.b == comp && Some(nd.a) != from {
                items.push((key(nd.at_b), Item::Child(nd.a, nd.at_a)));
            }
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, it) in items {
            match it {
                Item::Mark(j) => out.push(j),
                Item::Child(c, at) => self.walk_boundary(c, Some(comp), at, out),
            }
        }
    }

    /// Build the doubled surface.
    pub fn double(&self) -> Doubled {
        let mut comps = vec![];
        let mut index = vec![];
        for (i, &kind) in self.components.iter().enumerate() {
            let c = comps.len();
            comps.push(DoubledComponent { origin: i, kind, conjugate: false });
            let cbar = (kind == ComponentKind::Sphere).then(|| {
                comps.push(DoubledComponent { origin: i, kind, conjugate: true });
                c + 1
            });
            index.push((c, cbar));
        }
        let mut adj = vec![vec![]; comps.len()];
        let mut link = |a: usize, pa: RiemannPoint, b: usize, pb: RiemannPoint| {
            adj[a].push((b, pa));
            adj[b].push((a, pb));
        };
        for nd in &self.nodes {
            let (a, abar) = index[nd.a];
            let (b, bbar) = index[nd.b];
            link(a, nd.at_a, b, nd.at_b);
            // Spheres also glue to each other's conjugates, and to the
            // conjugate half of a disk at the conjugate point.
            if abar.is_some() || bbar.is_some() {
                link(abar.unwrap_or(a), nd.at_a.conj(), bbar.unwrap_or(b), nd.at_b.conj());
            }
        }
        Doubled { comps, adj, index }
    }

    /// The point of the doubled surface carrying a mark.
    pub fn point(&self, d: &Doubled, id: MarkId) -> Result<SurfacePoint> {
        let missing = || Error::Usage(format!("mark {id} is not present (k = {}, l = {})", self.k(), self.l()));
        match id {
            MarkId::Z(j) => {
                let m = self.boundary_marks.get(j).ok_or_else(missing)?;
                Ok(SurfacePoint { comp: d.component_of(m.component, false), at: m.at })
            }
            MarkId::W(j) | MarkId::WBar(j) => {
                let m = j.checked_sub(1).and_then(|i| self.interior_marks.get(i)).ok_or_else(missing)?;
                let bar = matches!(id, MarkId::WBar(_));
                let at = if bar { m.at.conj() } else { m.at };
                Ok(SurfacePoint { comp: d.component_of(m.component, bar), at })
            }
        }
    }

    /// `x^ν` for a marked point and a doubled component `ν`.
    pub fn reduce_point(&self, nu: usize, x: MarkId) -> Result<RiemannPoint> {
        let d = self.double();
        if nu >= d.comps.len() {
            return Err(Error::Usage(format!("component {nu} of {}", d.comps.len())));
        }
        d.reduce(nu, self.point(&d, x)?)
    }

    pub fn root_component(&self, x: [MarkId; 3]) -> Result<usize> {
        let d = self.double();
        d.root([self.point(&d, x[0])?, self.point(&d, x[1])?, self.point(&d, x[2])?])
    }

    pub fn cross_ratio(&self, x: [MarkId; 4]) -> Result<RiemannPoint> {
        let d = self.double();
        let p = [self.point(&d, x[0])?, self.point(&d, x[1])?, self.point(&d, x[2])?, self.point(&d, x[3])?];
        d.cross_ratio(p)
    }

    /// `χ₀ = (z₀,w₁,w̄₂,w₂)` and `χ_m = (z₀,z_m,w̄₁,w₁)` for `m ≥ 1`.
    pub fn chi(&self, m: usize) -> Result<RiemannPoint> {
        if m > self.k() || self.boundary_marks.is_empty() {
            return Err(Error::Usage(format!("chi_{m} needs z_{m}, but k = {}", self.k())));
        }
        let quad = if m == 0 {
            [MarkId::Z(0), MarkId::W(1), MarkId::WBar(2), MarkId::W(2)]
        } else {
            [MarkId::Z(0), MarkId::Z(m), MarkId::WBar(1), MarkId::W(1)]
        };
        self.cross_ratio(quad)
    }

    /// `θ̂_m` through the normal form `φ(w) = (w−z₀)/(w−z_m)` on the root
    /// disk: `−x/(2y)` for `φ(w₁) = x+iy` with `y > 0`, and `∓∞` for
    /// `±x > 0` when `w₁` reduces to the boundary.
    pub fn theta_hat(&self, m: usize) -> Result<ExtendedReal> {
        if m == 0 || m > self.k() {
            return Err(Error::Usage(format!("theta_hat_{m} needs 1 <= m <= k = {}", self.k())));
        }
        let d = self.double();
        let pts = [self.point(&d, MarkId::Z(0))?, self.point(&d, MarkId::Z(m))?, self.point(&d, MarkId::W(1))?];
        let nu = d.root(pts)?;
        let r = [d.reduce(nu, pts[0])?, d.reduce(nu, pts[1])?, d.reduce(nu, pts[2])?];
        // Move ∞ away, if present, with the orientation-preserving real map
        // z ↦ −1/(z−s).
        let fin: Vec<f64> = r.iter().filter_map(|p| p.finite()).map(|z| z.re).collect();
        let s = fin.iter().fold(0.0f64, |a, x| a.max(x.abs())) + 1.0;
        let shift = Mobius { a: C::new(0.0, 0.0), b: C::new(-1.0, 0.0), c: C::new(1.0, 0.0), d: C::new(-s, 0.0) };
        let moved = if r.iter().any(|p| p.finite().is_none()) { r.map(|p| shift.apply(p)) } else { r };
        let [z0, zm, w] = moved.map(|p| p.finite().expect("the pole s lies on the real axis away from every mark"));
        let sign = (z0.re - zm.re).signum();
        let phi = (w - z0) / (w - zm) * sign;
        let (x, y) = (phi.re, phi.im);
        Ok(if y > 0.0 {
            ExtendedReal::Finite(-x / (2.0 * y))
        } else if x < 0.0 {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::NegInf
        })
    }

    /// `θ_m = f ∘ θ̂_m`.
    pub fn theta(&self, m: usize) -> Result<f64> {
        Ok(f_embed(self.theta_hat(m)?))
    }

    /// `χ₀ ∈ [0,1]` and `χ_m ∈ [0,1]`, within [`TOL`].
    pub fn predicate_geodesic4(&self, m: usize) -> Result<bool> {
        if m == 0 {
            return Err(Error::Usage("the geodesic pair constraint needs m >= 1".into()));
        }
        Ok(in_unit_interval(self.chi(0)?) && in_unit_interval(self.chi(m)?))
    }

    /// Whether `z₀, w₁, w₂` lie on a horocycle in counter-clockwise order,
    /// tested in the unit-disk model.
    pub fn predicate_horocycle(&self) -> Result<bool> {
        if self.components != [ComponentKind::Disk] {
            return Err(Error::Usage("the horocycle predicate needs a single disk component".into()));
        }
        if self.boundary_marks.is_empty() || self.l() < 2 {
            return Err(Error::Usage("the horocycle predicate needs z0, w1 and w2".into()));
        }
        let to_disk = |p: RiemannPoint| p.finite().map(cayley).unwrap_or(C::new(1.0, 0.0));
        Ok(on_horocycle(
            to_disk(self.boundary_marks[0].at),
            to_disk(self.interior_marks[0].at),
            to_disk(self.interior_marks[1].at),
        ))
    }

    /// Apply a reparametrization to every coordinate on one component.
    /// Disk components only accept automorphisms of the upper half-plane.
    pub fn reparametrize(&self, comp: usize, g: &Mobius) -> Result<NodalConfig> {
        if comp >= self.components.len() {
            return Err(Error::Usage(format!("component {comp} of {}", self.components.len())));
        }
        if self.components[comp] == ComponentKind::Disk && !g.preserves_upper_half_plane() {
            return Err(Error::Usage("disk reparametrizations must preserve the upper half-plane".into()));
        }
        let mut out = self.clone();
        for m in out.boundary_marks.iter_mut().chain(out.interior_marks.iter_mut()) {
            if m.component == comp {
                m.at = snap(self.components[comp], m.at, g.apply(m.at));
            }
        }
        for nd in &mut out.nodes {
            if nd.a == comp {
                nd.at_a = snap(self.components[comp], nd.at_a, g.apply(nd.at_a));
            }
            if nd.b == comp {
                nd.at_b = snap(self.components[comp], nd.at_b, g.apply(nd.at_b));
            }
        }
        Ok(out)
    }

    /// A random single-disk configuration with `k+1` boundary marks in
    /// counter-clockwise order and `l` interior marks.
    pub fn random_single_disk<R: Rng>(rng: &mut R, k: usize, l: usize) -> NodalConfig {
        let mut xs: Vec<f64> = (0..=k).map(|_| rng.gen_range(-4.0..4.0)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        while xs.len() < k + 1 {
            xs.push(xs.last().copied().unwrap_or(0.0) + 1.0);
        }
        let ws = (0..l).map(|_| C::new(rng.gen_range(-4.0..4.0), rng.gen_range(-2.0f64..2.0).exp())).collect();
        NodalConfig::single_disk(xs.into_iter().map(RiemannPoint::real).collect(), ws)
    }
}

/// Real maps send real points to real points; clear the rounding residue
/// in the imaginary part so boundary points stay exactly on the boundary.
fn snap(kind: ComponentKind, before: RiemannPoint, after: RiemannPoint) -> RiemannPoint {
    match (kind, before.is_real(), after) {
        (ComponentKind::Disk, true, RiemannPoint::Finite(z)) => RiemannPoint::real(z.re),
        _ => after,
    }
}

fn upper(p: RiemannPoint) -> bool {
    matches!(p, RiemannPoint::Finite(z) if z.im > 0.0)
}

fn in_unit_interval(p: RiemannPoint) -> bool {
    match p {
        RiemannPoint::Infinity => false,
        RiemannPoint::Finite(z) => z.im.abs() <= TOL && z.re >= -TOL && z.re <= 1.0 + TOL,
    }
}

/// Unit-disk model: is there a circle internally tangent to the unit circle
/// at `z0` through `w1` and `w2`, meeting `z0, w1, w2` counter-clockwise?
pub fn on_horocycle(z0: C, w1: C, w2: C) -> bool {
    if (z0.norm() - 1.0).abs() > TOL || w1.norm() >= 1.0 || w2.norm() >= 1.0 || (w1 - w2).norm() <= TOL {
        return false;
    }
    // Centre t·z0 and radius 1−t, fixed by passing through w1.
    let t = (1.0 - w1.norm_sqr()) / (2.0 * (1.0 - (w1 * z0.conj()).re));
    let centre = z0 * t;
    let radius = 1.0 - t;
    if ((w2 - centre).norm() - radius).abs() > TOL {
        return false;
    }
    let base = (z0 - centre).arg();
    let turn = |w: C| ((w - centre).arg() - base).rem_euclid(TAU);
    turn(w1) < turn(w2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_ratio_of_zero_one_two_three() {
        let p = [0.0, 1.0, 2.0, 3.0].map(RiemannPoint::real);
        assert_eq!(cross_ratio_points(p).unwrap(), RiemannPoint::real(-3.0));
    }

    #[test]
    fn infinity_is_handled_by_the_limit() {
        // (x₄−x₁)/(x₁−x₂) → −1 as x₁ → ∞, leaving −(x₂−x₃)/(x₃−x₄).
        let p = [RiemannPoint::Infinity, RiemannPoint::real(1.0), RiemannPoint::real(2.0), RiemannPoint::real(3.0)];
        let got = cross_ratio_points(p).unwrap().finite().unwrap();
        assert!((got - C::new(-1.0, 0.0)).norm() < 1e-12, "{got}");
    }

    #[test]
    fn points_round_trip_through_json() {
        let cfg =
            NodalConfig::single_disk(vec![RiemannPoint::Infinity, RiemannPoint::real(0.0)], vec![C::new(1.0, 2.0)]);
        assert_eq!(NodalConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
