//! Parity calculus for the q-operator formalism.
//!
//! Every function returns a parity in `{0, 1}`; a sign `(-1)^p` is applied
//! only where a coefficient is scaled. Degree arguments are total degrees
//! (form degree plus Novikov degree). Element indices in splittings are
//! 1-based, matching the labels of interior marked points.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parity of an integer.
#[inline]
pub fn par(x: i64) -> u8 {
    x.rem_euclid(2) as u8
}

/// Sum of a degree list.
pub fn deg_sum(degs: &[i64]) -> i64 {
    degs.iter().sum()
}

/// `eps(alpha) = sum_j j|alpha_j| + k(k+1)/2 + 1`.
pub fn epsilon(alpha: &[i64]) -> u8 {
    let k = alpha.len() as i64;
    let s: i64 = alpha.iter().enumerate().map(|(j, d)| (j as i64 + 1) * d).sum();
    par(s + k * (k + 1) / 2 + 1)
}

/// Koszul parity of reordering `eta` into `s . eta = (eta_{s(1)}, ..., eta_{s(l)})`.
///
/// `s` is 0-based: `s[j]` is the index of the entry placed at position `j`.
pub fn sigma_perm(s: &[usize], eta: &[i64]) -> Result<u8> {
    let l = eta.len();
    if s.len() != l {
        return Err(Error::Usage(format!("permutation of length {} on {l} entries", s.len())));
    }
    let mut inv = vec![usize::MAX; l];
    for (pos, &v) in s.iter().enumerate() {
        if v >= l || inv[v] != usize::MAX {
            return Err(Error::Usage(format!("{s:?} is not a permutation")));
        }
        inv[v] = pos;
    }
    let mut acc = 0i64;
    for j1 in 0..l {
        for j2 in (j1 + 1)..l {
            if inv[j1] > inv[j2] {
                acc += eta[j1] * eta[j2];
            }
        }
    }
    Ok(par(acc))
}

/// `sigma_{J1,J2} = sum over j1 in J1, j2 in J2 with j2 < j1 of |eta_j1||eta_j2|`.
///
/// Parts hold 1-based indices into `eta`.
pub fn sigma_split(j1: &[usize], j2: &[usize], eta: &[i64]) -> u8 {
    let mut acc = 0i64;
    for &a in j1 {
        for &b in j2 {
            if b < a {
                acc += eta[a - 1] * eta[b - 1];
            }
        }
    }
    par(acc)
}

/// An order-respecting partition of `[l]` into two or three tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub l: usize,
    pub parts: Vec<Vec<usize>>,
}

impl Splitting {
    pub fn part(&self, p: usize) -> &[usize] {
        &self.parts[p]
    }

    /// Sum of the degrees of the entries in part `p`.
    pub fn degree_of(&self, p: usize, eta: &[i64]) -> i64 {
        self.parts[p].iter().map(|&j| eta[j - 1]).sum()
    }

    /// Checks disjointness, coverage and ascending order.
    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.l];
        for part in &self.parts {
            if part.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &j in part {
                if j == 0 || j > self.l || seen[j - 1] {
                    return false;
                }
                seen[j - 1] = true;
            }
        }
        seen.into_iter().all(|x| x)
    }
}

/// A membership constraint: element `elem` (1-based) lies in part `part`
/// (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pin {
    pub elem: usize,
    pub part: usize,
}

/// All splittings of `[l]` into `n_parts` tuples obeying `pins`.
///
/// Assignments are enumerated in lexicographic order of the membership
/// vector `(part(1), ..., part(l))`. A pin naming an element beyond `l`
/// cannot be satisfied and yields no splittings.
pub fn splittings(l: usize, n_parts: usize, pins: &[Pin]) -> Vec<Splitting> {
    if pins.iter().any(|p| p.elem == 0 || p.elem > l || p.part >= n_parts) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut assign = vec![0usize; l];
    loop {
        let ok = pins.iter().all(|p| assign[p.elem - 1] == p.part);
        if ok {
            let mut parts = vec![Vec::new(); n_parts];
            for (j, &p) in assign.iter().enumerate() {
                parts[p].push(j + 1);
            }
            out.push(Splitting { l, parts });
        }
        // Advance the base-n_parts counter, last element fastest.
        let mut pos = l;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            assign[pos] += 1;
            if assign[pos] < n_parts {
                break;
            }
            assign[pos] = 0;
        }
    }
}

/// Identifier of a member of the iota family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IotaId {
    Plain,
    I0,
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
}

impl FromStr for IotaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "plain" | "iota" => IotaId::Plain,
            "0" => IotaId::I0,
            "1" => IotaId::I1,
            "2" => IotaId::I2,
            "3" => IotaId::I3,
            "4" => IotaId::I4,
            "5" => IotaId::I5,
            "6" => IotaId::I6,
            "7" => IotaId::I7,
            other => return Err(Error::Usage(format!("unknown iota id `{other}`"))),
        })
    }
}

impl fmt::Display for IotaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IotaId::Plain => "iota",
            IotaId::I0 => "iota0",
            IotaId::I1 => "iota1",
            IotaId::I2 => "iota2",
            IotaId::I3 => "iota3",
            IotaId::I4 => "iota4",
            IotaId::I5 => "iota5",
            IotaId::I6 => "iota6",
            IotaId::I7 => "iota7",
        };
        f.write_str(s)
    }
}

/// Arguments of the iota family. `sigma12` is `sigma_{J1,J2}` and
/// `sigma21` is `sigma_{J2,J1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IotaArgs {
    pub eta1: i64,
    pub eta2: i64,
    pub alpha1: i64,
    pub i: i64,
    pub sigma12: u8,
    pub sigma21: u8,
    pub alpha: i64,
    pub k: i64,
    pub n: i64,
}

impl IotaArgs {
    /// Total interior degree `|eta| = |eta^1| + |eta^2|`.
    pub fn eta(&self) -> i64 {
        self.eta1 + self.eta2
    }
}

/// Evaluates one member of the iota family.
pub fn iota(id: IotaId, a: &IotaArgs) -> u8 {
    let s12 = a.sigma12 as i64;
    let s21 = a.sigma21 as i64;
    par(match id {
        IotaId::Plain => a.eta1 + (a.eta2 + 1) * (a.alpha1 + a.i + 1) + s12,
        IotaId::I0 => a.eta1 + (a.eta2 + 1) * (a.alpha1 + a.i) + s21,
        IotaId::I1 => a.eta1 + (a.eta2 + 1) * (a.alpha1 + a.i) + s12,
        IotaId::I2 => a.eta1 + a.eta2 * (a.alpha1 + a.i + 1) + s12,
        IotaId::I3 => a.eta() + a.alpha + a.k + a.n + s21,
        IotaId::I4 => a.eta2 * (a.alpha1 + a.i + 1) + 1 + s12,
        IotaId::I5 => a.eta1 + a.eta2 * (a.alpha1 + a.i) + s12,
        IotaId::I6 => (a.eta1 + 1) * (a.eta2 + 1) + a.n,
        IotaId::I7 => a.eta() + a.n + 1,
    })
}

/// Position of the constraint after a boundary bubble of `k2` inputs
/// attached at slot `i`.
pub fn m_prime(m: usize, i: usize, k2: usize) -> Result<usize> {
    if m == 0 || i == 0 {
        return Err(Error::Usage(format!("m_prime needs m, i >= 1 (got m={m}, i={i})")));
    }
    Ok(if m < i {
        m
    } else if m < i + k2 {
        i
    } else {
        m + 1 - k2
    })
}

/// Orientation parity for swapping the factors of a fiber product.
pub fn fiber_sign_swap(dim_y1: i64, dim_y2: i64, dim_z: i64) -> u8 {
    par((dim_y1 + dim_z) * (dim_y2 + dim_z))
}

/// Orientation parity of the boundary term `Y1 x_Z dY2`.
pub fn fiber_sign_boundary(dim_y1: i64, dim_z: i64) -> u8 {
    par(dim_y1 + dim_z)
}

/// Parity of `dim M_{k+1,l}(beta) - constraints = n - 2 + k + 2l + mu - c`.
pub fn dim_moduli_parity(n: i64, k: i64, l: i64, mu: i64, constraints: i64) -> Result<u8> {
    if !(0..=2).contains(&constraints) {
        return Err(Error::Usage(format!("constraint count {constraints} not in 0..=2")));
    }
    Ok(par(n - 2 + k + 2 * l + mu - constraints))
}

/// Kind of boundary component a ledger describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LedgerCase {
    /// A disk bubble at the boundary; `g` counts geodesic constraints.
    BoundaryBubbling,
    /// A sphere bubble at an interior point.
    InteriorBubbling,
}

/// Parity bookkeeping for one boundary component.
///
/// `alpha` lists the total degrees of all `k = k1 + k2 - 1` boundary
/// inputs; `eta1`, `eta2` are the summed interior degrees of the two parts
/// and `sigma` is `sigma_{J1,J2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignLedger {
    pub case_id: LedgerCase,
    pub k1: usize,
    pub k2: usize,
    pub i: usize,
    pub g: u8,
    pub n: i64,
    pub alpha: Vec<i64>,
    pub eta1: i64,
    pub eta2: i64,
    pub sigma: u8,
}

/// The five successive parities of a boundary-bubbling sign derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaChain {
    pub d1: u8,
    pub d2: u8,
    pub d3: u8,
    pub d4: u8,
    pub d5: u8,
}

impl SignLedger {
    fn blocks(&self) -> Result<(&[i64], &[i64], &[i64])> {
        let k = self.k1 + self.k2;
        if self.k1 == 0 || self.i == 0 || self.i > self.k1 || self.alpha.len() + 1 != k {
            return Err(Error::Usage(format!(
                "incomplete ledger: k1={}, k2={}, i={}, {} boundary degrees",
                self.k1,
                self.k2,
                self.i,
                self.alpha.len()
            )));
        }
        let a = &self.alpha;
        let s = self.i - 1;
        Ok((&a[..s], &a[s..s + self.k2], &a[s + self.k2..]))
    }

    /// Parity of the output degree of the inner operator, from the degree
    /// axiom: `2 - k2 - 2 l2 + |alpha^2| + |eta^2| - mu + g`.
    pub fn inner_output_parity(&self) -> Result<i64> {
        let (_, a2, _) = self.blocks()?;
        Ok(par(deg_sum(a2) + self.eta2 + self.k2 as i64 + self.g as i64) as i64)
    }

    /// The closed form the chain should reach:
    /// `iota + eps(alpha) + n + |alpha| + |eta| + k + 1 + g(|eta^2| + |alpha^1| + i + 1)`.
    pub fn closed_form(&self) -> Result<u8> {
        let (a1, _, _) = self.blocks()?;
        let k = (self.k1 + self.k2 - 1) as i64;
        let args = IotaArgs {
            eta1: self.eta1,
            eta2: self.eta2,
            alpha1: deg_sum(a1),
            i: self.i as i64,
            sigma12: self.sigma,
            ..Default::default()
        };
        let g = self.g as i64;
        Ok(par(iota(IotaId::Plain, &args) as i64
            + epsilon(&self.alpha) as i64
            + self.n
            + deg_sum(&self.alpha)
            + self.eta1
            + self.eta2
            + k
            + 1
            + g * (self.eta2 + deg_sum(a1) + self.i as i64 + 1)))
    }
}

/// Runs the boundary-bubbling chain from its definitions.
pub fn delta_ledger(ledger: &SignLedger) -> Result<DeltaChain> {
    if ledger.case_id != LedgerCase::BoundaryBubbling {
        return Err(Error::Usage("the delta chain is defined for boundary bubbling only".into()));
    }
    let (a1, a2, a3) = ledger.blocks()?;
    let (k1, k2, i) = (ledger.k1 as i64, ledger.k2 as i64, ledger.i as i64);
    let k = k1 + k2 - 1;
    let g = ledger.g as i64;
    let (s1, s2, s3) = (deg_sum(a1), deg_sum(a2), deg_sum(a3));
    let e2 = ledger.eta2;
    let rdim = k2 + g;
    let d1 = k2 * (k1 + i) + i + ledger.n;
    let d2 = d1 + g * k1;
    let d3 = d2 + (s2 + e2) * s3 + e2 * s1 + ledger.sigma as i64;
    let d4 = d3 + (s2 + e2 + rdim) * s3;
    let mut outer = a1.to_vec();
    outer.push(ledger.inner_output_parity()?);
    outer.extend_from_slice(a3);
    let d5 = d4 + epsilon(&outer) as i64 + epsilon(a2) as i64 + g * (deg_sum(&ledger.alpha) + rdim + e2 + s2 + k + 1);
    Ok(DeltaChain { d1: par(d1), d2: par(d2), d3: par(d3), d4: par(d4), d5: par(d5) })
}

/// Free variables of the sign lemma for one case.
///
/// `mu_half` selects the Maslov index `2 * mu_half`; Maslov indices of an
/// oriented Lagrangian are even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaParams {
    pub k1: usize,
    pub k2: usize,
    pub i: usize,
    pub alpha: Vec<i64>,
    pub eta2: i64,
    pub l2: i64,
    pub mu_half: i64,
    pub g: u8,
    pub n: i64,
}

/// Left side minus right side of the sign lemma, modulo 2.
///
/// The inner output degree comes from the degree axiom
/// `2 - k2 - 2 l2 + |alpha^2| + |eta^2| - mu + g`.
pub fn lemma_signs_residual(p: &LemmaParams) -> Result<u8> {
    let k = p.k1 + p.k2;
    if p.k1 == 0 || p.i == 0 || p.i > p.k1 || p.alpha.len() + 1 != k {
        return Err(Error::Usage("lemma parameters do not describe a valid split".into()));
    }
    let s = p.i - 1;
    let (a1, a2, a3) = (&p.alpha[..s], &p.alpha[s..s + p.k2], &p.alpha[s + p.k2..]);
    let g = p.g as i64;
    let (k1, k2, i) = (p.k1 as i64, p.k2 as i64, p.i as i64);
    let inner = 2 - k2 - 2 * p.l2 + deg_sum(a2) + p.eta2 - 2 * p.mu_half + g;
    let mut outer = a1.to_vec();
    outer.push(inner);
    outer.extend_from_slice(a3);
    let lhs = epsilon(&outer) as i64 + epsilon(a2) as i64;
    let kk = k1 + k2 - 1;
    let rhs = epsilon(&p.alpha) as i64
        + deg_sum(&p.alpha)
        + kk
        + deg_sum(a1)
        + i * p.eta2
        + k2 * deg_sum(a3)
        + k1 * k2
        + i * k2
        + g * i;
    Ok(par(lhs - rhs))
}

/// Outcome of the exhaustive sign-lemma sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaGridReport {
    pub cases: usize,
    pub failures: Vec<LemmaParams>,
}

/// Enumerates every parity assignment with `1 <= k1 <= max_k1`,
/// `0 <= k2 <= max_k2`, `1 <= i <= k1`, individual boundary degrees in
/// `{0, 1}`, `|eta^2|`, `mu/2`, `g`, `n` in `{0, 1}`.
pub fn lemma_signs_grid(max_k1: usize, max_k2: usize) -> LemmaGridReport {
    let mut cases = 0;
    let mut failures = Vec::new();
    for k1 in 1..=max_k1 {
        for k2 in 0..=max_k2 {
            let k = k1 + k2 - 1;
            for i in 1..=k1 {
                for mask in 0u32..(1u32 << k) {
                    let alpha: Vec<i64> = (0..k).map(|j| ((mask >> j) & 1) as i64).collect();
                    for bits in 0u8..16 {
                        let p = LemmaParams {
                            k1,
                            k2,
                            i,
                            alpha: alpha.clone(),
                            eta2: (bits & 1) as i64,
                            l2: 1,
                            mu_half: ((bits >> 1) & 1) as i64,
                            g: (bits >> 2) & 1,
                            n: ((bits >> 3) & 1) as i64,
                        };
                        cases += 1;
                        if lemma_signs_residual(&p).unwrap_or(1) != 0 {
                            failures.push(p);
                        }
                    }
                }
            }
        }
    }
    LemmaGridReport { cases, failures }
}

/// Outcome of checking the delta chain against its closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaGridReport {
    pub cases: usize,
    pub failures: Vec<SignLedger>,
}

/// Sweeps boundary-bubbling ledgers over the same grid as the sign lemma,
/// with `|eta^1|` and `sigma` free as well.
pub fn delta_grid(max_k1: usize, max_k2: usize) -> DeltaGridReport {
    let mut cases = 0;
    let mut failures = Vec::new();
    for k1 in 1..=max_k1 {
        for k2 in 0..=max_k2 {
            let k = k1 + k2 - 1;
            for i in 1..=k1 {
                for mask in 0u32..(1u32 << k) {
                    let alpha: Vec<i64> = (0..k).map(|j| ((mask >> j) & 1) as i64).collect();
                    for bits in 0u8..32 {
                        let ledger = SignLedger {
                            case_id: LedgerCase::BoundaryBubbling,
                            k1,
                            k2,
                            i,
                            g: bits & 1,
                            n: ((bits >> 1) & 1) as i64,
                            alpha: alpha.clone(),
                            eta1: ((bits >> 2) & 1) as i64,
                            eta2: ((bits >> 3) & 1) as i64,
                            sigma: (bits >> 4) & 1,
                        };
                        cases += 1;
                        let ok = match (delta_ledger(&ledger), ledger.closed_form()) {
                            (Ok(c), Ok(f)) => c.d5 == f,
                            _ => false,
                        };
                        if !ok {
                            failures.push(ledger);
                        }
                    }
                }
            }
        }
    }
    DeltaGridReport { cases, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&[]), 1);
        // 1*1 + 2*2 + 3 + 1 = 9.
        assert_eq!(epsilon(&[1, 2]), 1);
        // 0 + 6 + 1 = 7.
        assert_eq!(epsilon(&[0, 0, 0]), 1);
    }

    #[test]
    fn sigma_perm_examples() {
        assert_eq!(sigma_perm(&[0, 1, 2], &[1, 1, 1]).unwrap(), 0);
        assert_eq!(sigma_perm(&[1, 0], &[1, 1]).unwrap(), 1);
        assert_eq!(sigma_perm(&[1, 0], &[2, 1]).unwrap(), 0);
        assert!(sigma_perm(&[0, 0], &[1, 1]).is_err());
    }

    #[test]
    fn sigma_split_examples() {
        assert_eq!(sigma_split(&[1, 2], &[], &[1, 1]), 0);
        assert_eq!(sigma_split(&[2], &[1], &[1, 1]), 1);
        assert_eq!(sigma_split(&[1], &[2], &[3, 5]), 0);
    }

    #[test]
    fn iota_examples() {
        let a = IotaArgs { i: 1, ..Default::default() };
        assert_eq!(iota(IotaId::Plain, &a), 0);
        let b = IotaArgs { eta1: 2, n: 2, ..Default::default() };
        assert_eq!(iota(IotaId::I7, &b), 1);
        let c = IotaArgs { eta1: 1, eta2: 1, n: 2, ..Default::default() };
        assert_eq!(iota(IotaId::I6, &c), 0);
        assert!("9".parse::<IotaId>().is_err());
    }

    #[test]
    fn m_prime_cases() {
        assert_eq!(m_prime(1, 2, 3).unwrap(), 1);
        assert_eq!(m_prime(3, 2, 3).unwrap(), 2);
        assert_eq!(m_prime(5, 2, 3).unwrap(), 3);
        assert_eq!(m_prime(2, 2, 1).unwrap(), 2);
        assert!(m_prime(0, 1, 1).is_err());
    }

    #[test]
    fn fiber_and_dimension_examples() {
        assert_eq!(fiber_sign_swap(0, 0, 0), 0);
        assert_eq!(fiber_sign_swap(2, 3, 1), 0);
        assert_eq!(fiber_sign_swap(1, 2, 0), 0);
        assert_eq!(fiber_sign_boundary(0, 0), 0);
        assert_eq!(fiber_sign_boundary(3, 1), 0);
        assert_eq!(fiber_sign_boundary(2, 1), 1);
        assert_eq!(dim_moduli_parity(2, 1, 0, 2, 0).unwrap(), 1);
        assert_eq!(dim_moduli_parity(2, 1, 0, 2, 2).unwrap(), dim_moduli_parity(2, 1, 0, 2, 0).unwrap());
        assert_eq!(dim_moduli_parity(3, 1, 0, 0, 1).unwrap(), 1);
        assert!(dim_moduli_parity(3, 1, 0, 0, 3).is_err());
    }

    #[test]
    fn splitting_enumeration_respects_pins() {
        let all = splittings(3, 2, &[]);
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(Splitting::is_valid));
        assert_eq!(all[0].parts, vec![vec![1, 2, 3], vec![]]);
        let pinned = splittings(3, 2, &[Pin { elem: 1, part: 0 }, Pin { elem: 2, part: 1 }]);
        assert_eq!(pinned.len(), 2);
        assert!(pinned.iter().all(|s| s.parts[0].contains(&1) && s.parts[1].contains(&2)));
        assert!(splittings(1, 2, &[Pin { elem: 2, part: 0 }]).is_empty());
        assert_eq!(splittings(0, 3, &[]).len(), 1);
    }

    #[test]
    fn delta_examples() {
        let ledger = SignLedger {
            case_id: LedgerCase::BoundaryBubbling,
            k1: 1,
            k2: 0,
            i: 1,
            g: 0,
            n: 0,
            alpha: vec![],
            eta1: 0,
            eta2: 0,
            sigma: 0,
        };
        let c = delta_ledger(&ledger).unwrap();
        assert_eq!(c.d1, 1);
        assert_eq!(c.d2, c.d1);
        assert_eq!(c.d5, ledger.closed_form().unwrap());
        let bad = SignLedger { alpha: vec![1], ..ledger.clone() };
        assert!(delta_ledger(&bad).is_err());
        let interior = SignLedger { case_id: LedgerCase::InteriorBubbling, ..ledger };
        assert!(delta_ledger(&interior).is_err());
    }

    #[test]
    fn lemma_examples() {
        let base = LemmaParams { k1: 1, k2: 1, i: 1, alpha: vec![0], eta2: 0, l2: 1, mu_half: 0, g: 0, n: 0 };
        assert_eq!(lemma_signs_residual(&base).unwrap(), 0);
        let g1 = LemmaParams { g: 1, ..base.clone() };
        assert_eq!(lemma_signs_residual(&g1).unwrap(), 0);
        let broken = LemmaParams { i: 2, ..base };
        assert!(lemma_signs_residual(&broken).is_err());
    }
}
