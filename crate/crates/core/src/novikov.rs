//! Truncated arithmetic in the Novikov ring and its extension by formal
//! variables `t_0, ..., t_N`.
//!
//! Classes live in a free abelian group of finite rank. The energy `omega`
//! and the Maslov index `mu` are linear functionals on that group. Every
//! element carries an energy cutoff and terms above it are dropped.
//!
//! The extension variables are graded-commutative: two variables of odd
//! degree anticommute and an odd variable squares to zero. The classes
//! `T^beta` are central.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::rational::Ratio;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient.
pub type Q = BigRational;
/// Energy values and cutoffs.
pub type Energy = Ratio<i64>;

/// Builds an exact rational from an integer.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Builds an exact rational from a numerator and denominator.
pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-2/5"` or `"0.25"` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        let d: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((a, b)) = s.split_once('.') {
        let digits = format!("{a}{b}");
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(format!("bad decimal `{s}`")))?;
        let d = num::pow(BigInt::from(10), b.len());
        return Ok(Q::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    Ok(Q::from_integer(n))
}

/// Parses an energy value (small rational).
pub fn parse_energy(s: &str) -> Result<Energy> {
    let q = parse_q(s)?;
    let n = q.numer().to_i64();
    let d = q.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) => Ok(Energy::new(n, d)),
        _ => Err(Error::Parse(format!("energy `{s}` out of range"))),
    }
}

/// Formats a rational compactly (`3`, `-1/2`).
pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats an energy compactly.
pub fn fmt_energy(e: &Energy) -> String {
    if *e.denom() == 1 {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

/// A free abelian group of classes with energy and Maslov functionals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGroup {
    pub rank: usize,
    pub omega: Vec<Energy>,
    pub mu: Vec<i64>,
    pub effective: Vec<Vec<i64>>,
}

impl ClassGroup {
    /// The zero class of this group.
    pub fn beta0(&self) -> Vec<i64> {
        vec![0; self.rank]
    }

    pub fn omega_of(&self, beta: &[i64]) -> Energy {
        beta.iter().zip(&self.omega).fold(Energy::zero(), |acc, (b, w)| acc + *w * *b)
    }

    pub fn mu_of(&self, beta: &[i64]) -> i64 {
        beta.iter().zip(&self.mu).map(|(b, m)| b * m).sum()
    }

    /// Checks the structural invariants: matching lengths and nonnegative
    /// energy on effective classes.
    pub fn check(&self) -> Result<()> {
        if self.omega.len() != self.rank || self.mu.len() != self.rank {
            return Err(Error::Config(format!(
                "class group of rank {} has omega/mu of length {}/{}",
                self.rank,
                self.omega.len(),
                self.mu.len()
            )));
        }
        for b in &self.effective {
            if b.len() != self.rank {
                return Err(Error::Config(format!("effective class {b:?} has wrong rank")));
            }
            if self.omega_of(b) < Energy::zero() {
                return Err(Error::Config(format!("effective class {b:?} has negative energy")));
            }
        }
        Ok(())
    }
}

/// Ring descriptor: the class group together with the degrees of the
/// extension variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovRing {
    pub classes: ClassGroup,
    pub t_degrees: Vec<i64>,
}

impl NovikovRing {
    pub fn new(classes: ClassGroup, t_degrees: Vec<i64>) -> Result<Arc<Self>> {
        classes.check()?;
        Ok(Arc::new(NovikovRing { classes, t_degrees }))
    }

    pub fn rank(&self) -> usize {
        self.classes.rank
    }

    pub fn n_vars(&self) -> usize {
        self.t_degrees.len()
    }

    /// The monomial `1`.
    pub fn one_mono(&self) -> Mono {
        Mono { beta: vec![0; self.rank()], kappa: vec![0; self.n_vars()] }
    }

    /// The monomial `T^beta`.
    pub fn t_beta(&self, beta: &[i64]) -> Mono {
        Mono { beta: beta.to_vec(), kappa: vec![0; self.n_vars()] }
    }

    /// The monomial `t_j`.
    pub fn t_var(&self, j: usize) -> Mono {
        let mut m = self.one_mono();
        m.kappa[j] = 1;
        m
    }

    /// Energy of a monomial: `omega(beta) + sum kappa_j`.
    pub fn energy(&self, m: &Mono) -> Energy {
        let k: i64 = m.kappa.iter().map(|&x| x as i64).sum();
        self.classes.omega_of(&m.beta) + Energy::from_integer(k)
    }

    /// Degree of a monomial: `mu(beta) + sum kappa_j deg(t_j)`.
    pub fn degree(&self, m: &Mono) -> i64 {
        self.classes.mu_of(&m.beta) + m.kappa.iter().zip(&self.t_degrees).map(|(&k, &d)| k as i64 * d).sum::<i64>()
    }

    /// Degree parity of a monomial.
    pub fn parity(&self, m: &Mono) -> u8 {
        (self.degree(m).rem_euclid(2)) as u8
    }

    /// Product of two monomials with its graded-commutativity sign, or
    /// `None` when an odd variable would appear squared.
    pub fn mono_mul(&self, a: &Mono, b: &Mono) -> Option<(Mono, u8)> {
        let mut kappa = Vec::with_capacity(a.kappa.len());
        for (j, (&x, &y)) in a.kappa.iter().zip(&b.kappa).enumerate() {
            if self.t_degrees[j].rem_euclid(2) == 1 && x + y >= 2 {
                return None;
            }
            kappa.push(x + y);
        }
        let mut sign = 0u8;
        for i in 0..a.kappa.len() {
            if a.kappa[i] == 0 || self.t_degrees[i].rem_euclid(2) == 0 {
                continue;
            }
            for j in 0..i {
                if b.kappa[j] != 0 && self.t_degrees[j].rem_euclid(2) == 1 {
                    sign ^= ((a.kappa[i] * b.kappa[j]) % 2) as u8;
                }
            }
        }
        let beta = a.beta.iter().zip(&b.beta).map(|(x, y)| x + y).collect();
        Some((Mono { beta, kappa }, sign))
    }
}

/// A monomial `T^beta t^kappa`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub beta: Vec<i64>,
    pub kappa: Vec<u32>,
}

impl Mono {
    pub fn is_one(&self) -> bool {
        self.beta.iter().all(|&b| b == 0) && self.kappa.iter().all(|&k| k == 0)
    }

    /// Human-readable rendering, e.g. `T^[1] t0^2`.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.beta.iter().any(|&b| b != 0) {
            let b: Vec<String> = self.beta.iter().map(|x| x.to_string()).collect();
            parts.push(format!("T^[{}]", b.join(",")));
        }
        for (j, &k) in self.kappa.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(format!("t{j}")),
                _ => parts.push(format!("t{j}^{k}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Energy valuation, with `Infinite` as the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Energy),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<Energy> {
        match self {
            Valuation::Finite(e) => Some(e),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(e) => write!(f, "{}", fmt_energy(e)),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// A truncated element of the coefficient ring.
#[derive(Clone, Debug)]
pub struct NovikovElement {
    ring: Arc<NovikovRing>,
    cutoff: Energy,
    terms: BTreeMap<Mono, Q>,
}

impl PartialEq for NovikovElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl NovikovElement {
    pub fn zero(ring: &Arc<NovikovRing>, cutoff: Energy) -> Self {
        NovikovElement { ring: ring.clone(), cutoff, terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<NovikovRing>, cutoff: Energy) -> Self {
        Self::monomial(ring, cutoff, ring.one_mono(), Q::one())
    }

    /// `c * m`, dropped if the energy of `m` exceeds the cutoff.
    pub fn monomial(ring: &Arc<NovikovRing>, cutoff: Energy, m: Mono, c: Q) -> Self {
        let mut e = Self::zero(ring, cutoff);
        e.add_term(m, c);
        e
    }

    pub fn from_terms(ring: &Arc<NovikovRing>, cutoff: Energy, terms: impl IntoIterator<Item = (Mono, Q)>) -> Self {
        let mut e = Self::zero(ring, cutoff);
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn ring(&self) -> &Arc<NovikovRing> {
        &self.ring
    }

    pub fn cutoff(&self) -> Energy {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * m` in place, respecting the cutoff and dropping zeros.
    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() || self.ring.energy(&m) > self.cutoff {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.ring, &other.ring) && *self.ring != *other.ring {
            return Err(Error::Config("Novikov elements from different rings".into()));
        }
        if self.cutoff != other.cutoff {
            return Err(Error::Config(format!(
                "cutoff mismatch: {} vs {}",
                fmt_energy(&self.cutoff),
                fmt_energy(&other.cutoff)
            )));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, q: &Q) -> Self {
        if q.is_zero() {
            return Self::zero(&self.ring, self.cutoff);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = &*c * q;
        }
        out
    }

    /// Homogeneous degree, if all terms share one.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| self.ring.degree(m));
        let d = it.next()?;
        if it.all(|x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Splits into homogeneous components keyed by degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, NovikovElement> {
        let mut out: BTreeMap<i64, NovikovElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(self.ring.degree(m))
                .or_insert_with(|| Self::zero(&self.ring, self.cutoff))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// Coefficient of the monomial `1`.
    pub fn constant_term(&self) -> Q {
        self.terms.get(&self.ring.one_mono()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    fmt_q(c)
                } else if c.is_one() {
                    m.render()
                } else if *c == -Q::one() {
                    format!("-{}", m.render())
                } else {
                    format!("{}*{}", fmt_q(c), m.render())
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Coefficientwise sum, truncated at the shared cutoff.
pub fn nov_add(a: &NovikovElement, b: &NovikovElement) -> Result<NovikovElement> {
    a.compatible(b)?;
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), c.clone());
    }
    Ok(out)
}

/// Difference `a - b`.
pub fn nov_sub(a: &NovikovElement, b: &NovikovElement) -> Result<NovikovElement> {
    nov_add(a, &b.neg())
}

/// Distributive product with graded-commutativity signs, truncated.
pub fn nov_mul(a: &NovikovElement, b: &NovikovElement) -> Result<NovikovElement> {
    a.compatible(b)?;
    let ring = &a.ring;
    let mut out = NovikovElement::zero(ring, a.cutoff);
    for (ma, ca) in &a.terms {
        let ea = ring.energy(ma);
        for (mb, cb) in &b.terms {
            if ea + ring.energy(mb) > a.cutoff {
                continue;
            }
            if let Some((m, s)) = ring.mono_mul(ma, mb) {
                let c = ca * cb;
                out.add_term(m, if s == 1 { -c } else { c });
            }
        }
    }
    Ok(out)
}

/// Minimum energy over the stored terms, `+inf` for zero.
pub fn valuation(a: &NovikovElement) -> Valuation {
    a.terms.keys().map(|m| a.ring.energy(m)).min().map(Valuation::Finite).unwrap_or(Valuation::Infinite)
}

/// Drops terms above `e` and lowers the cutoff to `min(cutoff, e)`.
pub fn truncate(a: &NovikovElement, e: Energy) -> NovikovElement {
    let cutoff = if e < a.cutoff { e } else { a.cutoff };
    let mut out = NovikovElement::zero(&a.ring, cutoff);
    for (m, c) in &a.terms {
        out.add_term(m.clone(), c.clone());
    }
    out
}

/// Degree of a monomial under the given ring.
pub fn monomial_degree(ring: &NovikovRing, m: &Mono) -> i64 {
    ring.degree(m)
}

/// Largest integer `n` with `n * v <= e`, for `v > 0`.
pub fn floor_div(e: Energy, v: Energy) -> usize {
    if v <= Energy::zero() || e < Energy::zero() {
        return 0;
    }
    (e / v).floor().to_integer().max(0) as usize
}

/// Absolute value of the largest coefficient, used for residual norms.
pub fn max_abs_coeff(a: &NovikovElement) -> Q {
    a.terms.values().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(t_deg: Vec<i64>) -> Arc<NovikovRing> {
        NovikovRing::new(
            ClassGroup { rank: 1, omega: vec![Energy::from_integer(2)], mu: vec![2], effective: vec![vec![1]] },
            t_deg,
        )
        .unwrap()
    }

    fn e(n: i64) -> Energy {
        Energy::from_integer(n)
    }

    #[test]
    fn additive_identity_and_cancellation() {
        let r = ring(vec![0]);
        let tb = NovikovElement::monomial(&r, e(10), r.t_beta(&[1]), q_int(1));
        let z = NovikovElement::zero(&r, e(10));
        assert_eq!(nov_add(&tb, &z).unwrap(), tb);
        let a = tb.scale(&q_int(2));
        let b = tb.scale(&q_int(-2));
        assert!(nov_add(&a, &b).unwrap().terms().is_empty());
    }

    #[test]
    fn sum_truncates_high_energy_class() {
        let r = ring(vec![0]);
        // omega(beta) = 2, omega(3 beta) = 6 > cutoff 5.
        let a = NovikovElement::monomial(&r, e(5), r.t_beta(&[1]), q_int(1));
        let b = NovikovElement::monomial(&r, e(5), r.t_beta(&[3]), q_int(1));
        assert_eq!(nov_add(&a, &b).unwrap(), a);
    }

    #[test]
    fn product_of_classes_adds_exponents() {
        let r = ring(vec![0]);
        let a = NovikovElement::monomial(&r, e(10), r.t_beta(&[1]), q_int(1));
        let b = NovikovElement::monomial(&r, e(10), r.t_beta(&[2]), q_int(1));
        let p = nov_mul(&a, &b).unwrap();
        assert_eq!(p, NovikovElement::monomial(&r, e(10), r.t_beta(&[3]), q_int(1)));
        let one = NovikovElement::one(&r, e(10));
        assert_eq!(nov_mul(&one, &a).unwrap(), a);
    }

    #[test]
    fn even_variable_squares() {
        let r = ring(vec![0]);
        let m = r.mono_mul(&r.t_beta(&[1]), &r.t_var(0)).unwrap().0;
        let a = NovikovElement::monomial(&r, e(20), m, q_int(1));
        let sq = nov_mul(&a, &a).unwrap();
        let expect = Mono { beta: vec![2], kappa: vec![2] };
        assert_eq!(sq, NovikovElement::monomial(&r, e(20), expect, q_int(1)));
    }

    #[test]
    fn odd_variables_anticommute() {
        let r = ring(vec![1, 1]);
        let t0 = NovikovElement::monomial(&r, e(10), r.t_var(0), q_int(1));
        let t1 = NovikovElement::monomial(&r, e(10), r.t_var(1), q_int(1));
        let ab = nov_mul(&t0, &t1).unwrap();
        let ba = nov_mul(&t1, &t0).unwrap();
        assert_eq!(ab, ba.neg());
        assert!(nov_mul(&t0, &t0).unwrap().is_zero());
    }

    #[test]
    fn valuation_examples() {
        let r = ring(vec![1]);
        assert_eq!(valuation(&NovikovElement::one(&r, e(10))), Valuation::Finite(e(0)));
        assert_eq!(valuation(&NovikovElement::zero(&r, e(10))), Valuation::Infinite);
        // 3 T^beta t0^2 with omega(beta) = 2: valuation 2 + 2 = 4. The
        // variable must be even for t0^2 to survive.
        let r2 = ring(vec![0]);
        let m = Mono { beta: vec![1], kappa: vec![2] };
        let a = NovikovElement::monomial(&r2, e(10), m, q_int(3));
        assert_eq!(valuation(&a), Valuation::Finite(e(4)));
    }

    #[test]
    fn truncate_examples() {
        let r = ring(vec![0]);
        let tb = NovikovElement::monomial(&r, e(10), r.t_beta(&[1]), q_int(1));
        assert_eq!(truncate(&tb, e(2)), tb);
        assert!(truncate(&tb, e(1)).is_zero());
        let sum = NovikovElement::from_terms(
            &r,
            e(10),
            vec![(r.one_mono(), q_int(1)), (r.t_beta(&[1]), q_int(1)), (r.t_beta(&[2]), q_int(1))],
        );
        let expect = NovikovElement::from_terms(&r, e(2), vec![(r.one_mono(), q_int(1)), (r.t_beta(&[1]), q_int(1))]);
        let t = truncate(&sum, e(2));
        assert_eq!(t, expect);
        assert_eq!(t.cutoff(), e(2));
    }

    #[test]
    fn monomial_degree_examples() {
        let r = ring(vec![1]);
        assert_eq!(monomial_degree(&r, &r.one_mono()), 0);
        assert_eq!(monomial_degree(&r, &r.t_beta(&[1])), 2);
        let m = r.mono_mul(&r.t_beta(&[1]), &r.t_var(0)).unwrap().0;
        assert_eq!(monomial_degree(&r, &m), 3);
    }

    #[test]
    fn mismatched_cutoff_is_config_error() {
        let r = ring(vec![0]);
        let a = NovikovElement::one(&r, e(1));
        let b = NovikovElement::one(&r, e(2));
        assert!(matches!(nov_add(&a, &b), Err(Error::Config(_))));
        assert!(matches!(nov_mul(&a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("3").unwrap(), q_int(3));
        assert_eq!(parse_q("-2/4").unwrap(), q_frac(-1, 2));
        assert_eq!(parse_q("0.25").unwrap(), q_frac(1, 4));
        assert!(parse_q("x").is_err());
        assert!(parse_q("1/0").is_err());
    }
}
