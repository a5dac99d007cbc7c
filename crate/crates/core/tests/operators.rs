use floer_qkernel::backend::{bundled, parse_element, BackendFile, EntryBlock, TableBlock};
use floer_qkernel::model::GradedElement;
use floer_qkernel::novikov::{q_int, Energy, NovikovElement};
use floer_qkernel::operators::{
    bounding_pair_verify, bp_degree_criterion, check_axioms, Axiom, Backend, BoundingPair, BpVerdict, Caps, Kind,
};
use floer_qkernel::signs::sigma_perm;
use std::collections::BTreeMap;

fn e(x: i64) -> Energy {
    Energy::from_integer(x)
}

fn load(name: &str) -> (BackendFile, Backend) {
    let f = bundled(name).unwrap();
    let be = f.build().unwrap();
    (f, be)
}

fn el(be: &Backend, on_x: bool, s: &str, cut: Energy) -> GradedElement {
    let m = if on_x { &be.x_model } else { &be.l_model };
    parse_element(be, m, s, cut).unwrap()
}

fn out(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn classical_and_clifford_pass_every_axiom() {
    for name in ["classical", "clifford"] {
        let (_, be) = load(name);
        let caps = Caps { max_k: 3, max_l: 2, energy: e(10) };
        for r in check_axioms(&be, &caps).unwrap() {
            assert!(r.passed(), "{name} {}: {:?}", r.axiom, r.violations);
        }
    }
}

#[test]
fn zero_energy_values() {
    let (_, be) = load("classical");
    let cut = e(4);
    let f1 = el(&be, true, "f1", cut);
    let f3 = el(&be, true, "f3", cut);
    let q = be.eval(Kind::Disk, &[], &[f1], cut, false).unwrap();
    assert_eq!(q, el(&be, false, "-e1", cut));
    assert!(be.eval(Kind::Disk, &[], &[f3], cut, false).unwrap().is_zero());
    let e1 = el(&be, false, "e1", cut);
    let e2 = el(&be, false, "e2", cut);
    // (-1)^{|a1|} a1 ^ a2 with |a1| odd.
    assert_eq!(be.eval(Kind::Disk, &[e1.clone(), e2.clone()], &[], cut, false).unwrap(), el(&be, false, "-e1e2", cut));
    let one = el(&be, false, "1", cut);
    assert_eq!(be.eval(Kind::Disk, &[one, e2.clone()], &[], cut, false).unwrap(), e2);
    // Disk (1,0) is the differential and (0,0) vanishes.
    assert!(be.eval(Kind::Disk, std::slice::from_ref(&e1), &[], cut, false).unwrap().is_zero());
    assert!(be.eval(Kind::Disk, &[], &[], cut, false).unwrap().is_zero());
    // Geodesic fundamental class: (-1)^n alpha with n = 2.
    let x1 = el(&be, true, "1", cut);
    assert_eq!(
        be.eval(Kind::Geodesic(1), std::slice::from_ref(&e1), std::slice::from_ref(&x1), cut, false).unwrap(),
        e1
    );
    // An interior unit kills every other operator.
    assert!(be.eval(Kind::Disk, std::slice::from_ref(&e1), &[x1], cut, false).unwrap().is_zero());
}

#[test]
fn odd_maslov_disk_table_is_inadmissible() {
    let (mut f, _) = load("classical");
    f.ring.mu = vec![1];
    f.tables.push(TableBlock {
        kind: "disk".into(),
        beta: vec![1],
        k: 1,
        l: 0,
        entries: vec![EntryBlock { alpha: vec!["e1e2".into()], eta: vec![], out: out(&[("e1e2", "1")]) }],
    });
    let be = f.build().unwrap();
    let caps = Caps { max_k: 2, max_l: 1, energy: e(4) };
    let reports = check_axioms(&be, &caps).unwrap();
    let adm = reports.iter().find(|r| r.axiom == Axiom::Admissibility).unwrap();
    assert!(adm.violations.iter().any(|v| v.contains("mu = 1")), "{:?}", adm.violations);
}

#[test]
fn bounding_pairs_at_zero() {
    let (_, be) = load("classical");
    let cut = e(6);
    match bounding_pair_verify(&be, &BoundingPair::zero(&be, cut), cut).unwrap() {
        BpVerdict::Bounding(c) => assert!(c.is_zero()),
        other => panic!("{other:?}"),
    }
    let (_, cl) = load("clifford");
    match bounding_pair_verify(&cl, &BoundingPair::zero(&cl, cut), cut).unwrap() {
        BpVerdict::Bounding(c) => {
            let expect = NovikovElement::monomial(&cl.ring, cut, cl.ring.t_beta(&[1]), q_int(3));
            assert_eq!(c, expect);
        }
        other => panic!("{other:?}"),
    }
    assert!(bp_degree_criterion(&be, &BoundingPair::zero(&be, cut)));
}

#[test]
fn degree_three_boundary_term_breaks_the_bounding_condition() {
    let (mut f, _) = load("clifford");
    f.tables.push(TableBlock {
        kind: "disk".into(),
        beta: vec![1],
        k: 1,
        l: 0,
        entries: vec![EntryBlock { alpha: vec!["e1".into()], eta: vec![], out: out(&[("1", "1")]) }],
    });
    let be = f.build().unwrap();
    assert!(be.validate().is_empty(), "{:?}", be.validate());
    let cut = e(6);
    let good = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*e1", cut) };
    assert!(matches!(bounding_pair_verify(&be, &good, cut).unwrap(), BpVerdict::Bounding(_)));
    let bad = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "T^[1]*e1", cut) };
    match bounding_pair_verify(&be, &bad, cut).unwrap() {
        BpVerdict::NotBounding(w) => assert!(w.contains("degree 4"), "{w}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn degree_criterion_examples() {
    let (_, cl) = load("clifford");
    let cut = e(6);
    // T^beta y has total degree 4, not 2.
    let p = BoundingPair { gamma: el(&cl, true, "T^[1]*y", cut), b: el(&cl, false, "0", cut) };
    assert!(!bp_degree_criterion(&cl, &p));
    let p = BoundingPair { gamma: el(&cl, true, "0", cut), b: el(&cl, false, "t0*e1", cut) };
    assert!(bp_degree_criterion(&cl, &p));
    let (mut f, _) = load("classical");
    f.ring.t_degrees = vec![1];
    let be = f.build().unwrap();
    let p = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*1", cut) };
    assert!(bp_degree_criterion(&be, &p));
    let p = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*e1", cut) };
    assert!(!bp_degree_criterion(&be, &p));
}

#[test]
fn deformation_is_stable_under_raising_the_cutoff() {
    let (_, be) = load("clifford");
    for cut in [e(1), e(2), e(3)] {
        let big = cut * 2;
        let p_small = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*e1 + t0*e2", cut) };
        let p_big = BoundingPair { gamma: el(&be, true, "0", big), b: el(&be, false, "t0*e1 + t0*e2", big) };
        for (kind, k, l) in [(Kind::Disk, 0, 0), (Kind::Disk, 1, 0), (Kind::Disk, 0, 1), (Kind::Geodesic(1), 1, 1)] {
            for ai in 0..be.l_model.len() {
                for xi in 0..be.x_model.len() {
                    let mk = |c: Energy| {
                        let a: Vec<GradedElement> =
                            (0..k).map(|_| GradedElement::basis(&be.ring, &be.l_model, c, ai)).collect();
                        let x: Vec<GradedElement> =
                            (0..l).map(|_| GradedElement::basis(&be.ring, &be.x_model, c, xi)).collect();
                        (a, x)
                    };
                    let (a, x) = mk(cut);
                    let small = be.deform(&p_small, kind, &a, &x, cut, false).unwrap();
                    let (a, x) = mk(big);
                    let large = be.deform(&p_big, kind, &a, &x, big, false).unwrap();
                    assert_eq!(small, large.truncate(cut), "{kind} at cutoff {cut}");
                }
            }
        }
    }
}

#[test]
fn zero_pair_deformation_is_plain_evaluation() {
    let (_, be) = load("clifford");
    let cut = e(4);
    let zero = BoundingPair::zero(&be, cut);
    let a = el(&be, false, "e1", cut);
    let y = el(&be, true, "y", cut);
    let plain = be.eval(Kind::Geodesic(1), std::slice::from_ref(&a), std::slice::from_ref(&y), cut, false).unwrap();
    assert_eq!(be.deform(&zero, Kind::Geodesic(1), &[a], &[y], cut, false).unwrap(), plain);
}

#[test]
fn gamma_deformation_of_curvature_is_minus_restriction() {
    let cut = e(4);
    let mut f = bundled("classical").unwrap();
    f.ring.t_degrees = vec![0];
    let be2 = f.build().unwrap();
    let gamma = el(&be2, true, "t0*f1f2", cut);
    let pair = BoundingPair { gamma: gamma.clone(), b: el(&be2, false, "0", cut) };
    let q00 = be2.deform(&pair, Kind::Disk, &[], &[], cut, false).unwrap();
    assert_eq!(q00, gamma.restrict(&be2.l_model).unwrap().neg());
}

#[test]
fn boundary_insertions_shift_the_constraint() {
    // Geodesic(1) with one b inserted before alpha_1 lands on Geodesic(2).
    let (mut f, _) = load("clifford");
    f.tables.push(TableBlock {
        kind: "geodesic:2".into(),
        beta: vec![1],
        k: 2,
        l: 1,
        entries: vec![EntryBlock {
            alpha: vec!["e1".into(), "1".into()],
            eta: vec!["y".into()],
            out: out(&[("1", "1")]),
        }],
    });
    let be = f.build().unwrap();
    let cut = e(4);
    let pair = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*e1", cut) };
    let one = el(&be, false, "1", cut);
    let y = el(&be, true, "y", cut);
    let v = be.deform(&pair, Kind::Geodesic(1), &[one], &[y], cut, false).unwrap();
    assert!(v.terms().keys().any(|(i, m)| *i == be.l_model.unit && m.kappa == vec![1]), "{v}");
}

#[test]
fn symmetry_under_all_permutations_from_transpositions() {
    let (mut f, be) = load("classical");
    // A graded-symmetric triple product on X at the zero sphere class.
    let x = &be.x_model;
    let mut entries = Vec::new();
    for a in 0..x.len() {
        for b in 0..x.len() {
            for c in 0..x.len() {
                let ab = GradedElement::basis(&be.ring, x, e(1), a)
                    .wedge(&GradedElement::basis(&be.ring, x, e(1), b))
                    .unwrap()
                    .wedge(&GradedElement::basis(&be.ring, x, e(1), c))
                    .unwrap();
                if ab.is_zero() {
                    continue;
                }
                let o = ab
                    .terms()
                    .iter()
                    .map(|((i, _), q)| (x.label(*i).to_string(), floer_qkernel::novikov::fmt_q(q)))
                    .collect();
                entries.push(EntryBlock {
                    alpha: vec![],
                    eta: vec![x.label(a).into(), x.label(b).into(), x.label(c).into()],
                    out: o,
                });
            }
        }
    }
    f.tables.push(TableBlock { kind: "sphere".into(), beta: vec![0], k: 0, l: 3, entries });
    let be = f.build().unwrap();
    let cut = e(2);
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for tuple in be.basis_tuples(0, 3) {
        let (_, eta) = be.basis_inputs(&[], &tuple.1, cut);
        let degs: Vec<i64> = tuple.1.iter().map(|&i| be.x_model.degree(i)).collect();
        let base = be.eval(Kind::Sphere, &[], &eta, cut, false).unwrap();
        for s in perms {
            let permuted: Vec<GradedElement> = s.iter().map(|&j| eta[j].clone()).collect();
            let v = be.eval(Kind::Sphere, &[], &permuted, cut, false).unwrap();
            let sign = sigma_perm(&s, &degs).unwrap();
            assert_eq!(base, if sign == 1 { v.neg() } else { v });
        }
    }
}
