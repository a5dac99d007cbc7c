#![allow(dead_code)]

use floer_qkernel::backend::{
    bundled, classical_tables, exterior_block, parse_element, BackendFile, RingBlock, SphereBlock, SCHEMA,
};
use floer_qkernel::model::{exterior_spec, GradedElement};
use floer_qkernel::novikov::{fmt_q, parse_q, Energy};
use floer_qkernel::operators::Backend;
use std::collections::BTreeMap;

pub fn e(x: i64) -> Energy {
    Energy::from_integer(x)
}

pub fn load(name: &str) -> (BackendFile, Backend) {
    let f = bundled(name).unwrap();
    let be = f.build().unwrap();
    (f, be)
}

pub fn el(be: &Backend, on_x: bool, s: &str, cut: Energy) -> GradedElement {
    let m = if on_x { &be.x_model } else { &be.l_model };
    parse_element(be, m, s, cut).unwrap()
}

pub fn rebuild(f: &BackendFile) -> Backend {
    f.build().unwrap()
}

/// Negates every entry of the table `(kind, beta, k, l)`.
pub fn flip(f: &mut BackendFile, kind: &str, beta: &[i64], k: usize, l: usize) {
    let t =
        f.tables.iter_mut().find(|t| t.kind == kind && t.beta == beta && t.k == k && t.l == l).expect("table present");
    for en in &mut t.entries {
        for v in en.out.values_mut() {
            *v = fmt_q(&-parse_q(v).unwrap());
        }
    }
}

/// Negates the single entry of `(kind, beta, k, l)` at the given labels.
pub fn flip_entry(f: &mut BackendFile, kind: &str, k: usize, l: usize, alpha: &[&str], eta: &[&str]) {
    let t = f.tables.iter_mut().find(|t| t.kind == kind && t.beta == [0] && t.k == k && t.l == l).expect("table");
    let en = t.entries.iter_mut().find(|en| en.alpha == alpha && en.eta == eta).expect("entry");
    for v in en.out.values_mut() {
        *v = fmt_q(&-parse_q(v).unwrap());
    }
}

/// Exterior models of the Heisenberg nilmanifold `L` (with `dc = ab`) and
/// of `X = L x T^3`, with the classical operators at the zero class.
pub fn heisenberg() -> Backend {
    let mut l = exterior_block("L", &["a", "b", "c"]);
    l.diff = BTreeMap::from([("c".to_string(), BTreeMap::from([("ab".to_string(), "1".to_string())]))]);
    let mut x = exterior_block("X", &["a", "b", "c", "u", "v", "w"]);
    let xs = exterior_spec("X", &["a", "b", "c", "u", "v", "w"]);
    let mut restriction = BTreeMap::new();
    for (lab, _) in &xs.basis {
        if let Some(s) = lab.strip_prefix('c') {
            x.diff.insert(lab.clone(), BTreeMap::from([(format!("ab{s}"), "1".to_string())]));
        }
        if !lab.contains(['u', 'v', 'w']) {
            restriction.insert(lab.clone(), BTreeMap::from([(lab.clone(), "1".to_string())]));
        }
    }
    x.restriction = Some(restriction);
    let mut f = BackendFile {
        schema: SCHEMA.into(),
        name: "heisenberg".into(),
        n: 3,
        ring: RingBlock { rank: 1, omega: vec!["1".into()], mu: vec![2], t_degrees: vec![], effective: vec![] },
        sphere: Some(SphereBlock { rank: 1, varpi: vec![vec![0]], w_s: vec![0], effective: vec![] }),
        l_model: l,
        x_model: x,
        pd_l: BTreeMap::from([("uvw".to_string(), "1".to_string())]),
        tables: vec![],
        bounding_pair: None,
    };
    let be = rebuild(&f);
    f.tables = classical_tables(&be.l_model, &be.x_model, 3, 1, 1);
    let be = rebuild(&f);
    assert!(be.validate().is_empty(), "{:?}", be.validate());
    assert!(!be.l_model.is_zero_differential());
    be
}
