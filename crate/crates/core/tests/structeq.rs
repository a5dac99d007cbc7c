mod common;

use common::{e, el, flip, flip_entry, heisenberg, load, rebuild};
use floer_qkernel::novikov::Q;
use floer_qkernel::operators::{Backend, BoundingPair};
use floer_qkernel::signs::IotaId;
use floer_qkernel::structeq::{residual, suite, suite_with, EquationId, SuiteCaps, Term};
use num::Zero;
use std::time::Instant;

fn caps(max_k: usize, max_l: usize, energy: i64) -> SuiteCaps {
    SuiteCaps { max_k, max_l, max_m: None, energy: e(energy), exclude_degenerate: false }
}

fn assert_all_pass(be: &Backend, pair: Option<&BoundingPair>, c: &SuiteCaps, label: &str) {
    for eq in EquationId::ALL {
        let r = suite(eq, be, pair, c).unwrap();
        assert!(r.cases > 0 || c.max_l < eq.base_kind(1).min_l(), "{label} {eq}: no cases");
        assert!(r.passed(), "{label} {eq}: {} of {} fail, e.g. {:?}", r.failures, r.cases, r.witnesses);
    }
}

#[test]
fn classical_satisfies_all_seven_within_a_minute() {
    let (_, be) = load("classical");
    let start = Instant::now();
    assert_all_pass(&be, None, &caps(3, 2, 10), "classical");
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "classical suites took {secs:.1}s");
}

#[test]
fn clifford_satisfies_all_seven_undeformed_and_deformed() {
    let (_, be) = load("clifford");
    assert_all_pass(&be, None, &caps(3, 2, 8), "clifford");
    let cut = e(3);
    let pair = BoundingPair { gamma: el(&be, true, "t0*y", cut), b: el(&be, false, "t0*e1 + 2*t0*e2", cut) };
    assert_all_pass(&be, Some(&pair), &caps(2, 2, 3), "clifford deformed");
}

#[test]
fn classical_satisfies_all_seven_deformed_by_odd_variables() {
    let (mut f, _) = load("classical");
    f.ring.t_degrees = vec![1, 0];
    let be = rebuild(&f);
    let cut = e(3);
    // t0 is odd, so t0*f1 has even total degree; gamma must have degree 2.
    let pair = BoundingPair { gamma: el(&be, true, "t0*t1*f1 + t1*f1f3", cut), b: el(&be, false, "t1*e2 + t0*1", cut) };
    assert_all_pass(&be, Some(&pair), &caps(2, 2, 3), "classical deformed");
}

#[test]
fn heisenberg_with_nonzero_differential_satisfies_all_seven() {
    let be = heisenberg();
    assert_all_pass(&be, None, &caps(1, 2, 4), "heisenberg");
    assert_all_pass(&be, None, &SuiteCaps { max_l: 1, ..caps(3, 1, 4) }, "heisenberg");
}

#[test]
fn excluding_degenerate_terms_changes_nothing_when_d_vanishes() {
    for name in ["classical", "clifford"] {
        let (_, be) = load(name);
        let cut = e(6);
        for eq in EquationId::ALL {
            for k in 0..=2 {
                for l in 0..=2 {
                    let ms: Vec<usize> = if eq.needs_m() { (1..=k).collect() } else { vec![0] };
                    for m in ms {
                        for (ai, ei) in be.basis_tuples(k, l).into_iter().step_by(7) {
                            let (a, h) = be.basis_inputs(&ai, &ei, cut);
                            let r0 = residual(eq, &be, None, m, &a, &h, cut, false).unwrap();
                            let r1 = residual(eq, &be, None, m, &a, &h, cut, true).unwrap();
                            assert_eq!(r0, r1, "{name} {eq} {ai:?} {ei:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn excluding_degenerate_terms_breaks_heisenberg() {
    let be = heisenberg();
    let c = SuiteCaps { exclude_degenerate: true, ..caps(1, 1, 4) };
    let r = suite(EquationId::Struc, &be, None, &c).unwrap();
    assert!(!r.passed());
}

#[test]
fn zero_pair_residual_equals_undeformed_residual() {
    let (_, be) = load("clifford");
    let cut = e(5);
    let zero = BoundingPair::zero(&be, cut);
    for eq in EquationId::ALL {
        for (ai, ei) in be.basis_tuples(2, 2).into_iter().step_by(5) {
            let m = if eq.needs_m() { 1 } else { 0 };
            let (a, h) = be.basis_inputs(&ai, &ei, cut);
            let r0 = residual(eq, &be, None, m, &a, &h, cut, false).unwrap();
            let r1 = residual(eq, &be, Some(&zero), m, &a, &h, cut, false).unwrap();
            assert_eq!(r0, r1, "{eq}");
        }
    }
}

#[test]
fn residuals_are_multilinear_with_odd_scalars() {
    let (mut f, _) = load("classical");
    f.ring.t_degrees = vec![1];
    flip(&mut f, "geodesic:1", &[0], 1, 1);
    let be = rebuild(&f);
    let cut = e(4);
    let eq = EquationId::Lstruc;
    let mut nonzero = 0;
    let t0 = el(&be, false, "t0*1", cut).unit_coefficient();
    for (k, l) in [(1, 1), (1, 2), (2, 1)] {
        for (ai, ei) in be.basis_tuples(k, l) {
            let (a, h) = be.basis_inputs(&ai, &ei, cut);
            let r = residual(eq, &be, None, 1, &a, &h, cut, false).unwrap();
            let cr = r.mul_scalar(&t0);
            let mut scaled_a = a.clone();
            scaled_a[k - 1] = el(&be, false, &format!("t0*{}", be.l_model.label(ai[k - 1])), cut);
            let mut scaled_h = h.clone();
            scaled_h[l - 1] = el(&be, true, &format!("t0*{}", be.x_model.label(ei[l - 1])), cut);
            for (slot, a2, h2) in [("alpha", &scaled_a, &h), ("eta", &a, &scaled_h)] {
                let got = residual(eq, &be, None, 1, a2, h2, cut, false).unwrap();
                assert!(got == cr || got == cr.neg(), "{slot} slot at {ai:?} {ei:?}: {got} vs {cr}");
            }
            if !r.is_zero() {
                nonzero += 1;
            }
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn flipped_geodesic_fundamental_class_fails_the_inhomogeneous_equations() {
    let (mut f, _) = load("classical");
    flip(&mut f, "geodesic:1", &[0], 1, 1);
    let be = rebuild(&f);
    let c = caps(2, 2, 4);
    for eq in [EquationId::Gzstruc, EquationId::Ggstruc, EquationId::Lstruc, EquationId::Rstruc] {
        let r = suite(eq, &be, None, &c).unwrap();
        assert!(!r.passed(), "{eq} should fail");
        assert!(!r.witnesses.is_empty() && r.max_residual > Q::zero());
    }
    // Every gstruc term is linear in the geodesic operators, so a global
    // sign flip is invisible to it.
    assert!(suite(EquationId::Gstruc, &be, None, &c).unwrap().passed());
    assert!(suite(EquationId::Struc, &be, None, &c).unwrap().passed());
}

#[test]
fn one_flipped_geodesic_entry_fails_gstruc() {
    let (mut f, _) = load("classical");
    flip_entry(&mut f, "geodesic:1", 1, 1, &["e1"], &["1"]);
    let be = rebuild(&f);
    let r = suite(EquationId::Gstruc, &be, None, &caps(2, 2, 4)).unwrap();
    assert!(!r.passed());
    assert!(r.witnesses.iter().all(|w| w.m >= 1 && w.m <= w.k));
}

#[test]
fn flipped_sphere_product_fails_the_bubbling_equations() {
    let (mut f, _) = load("classical");
    flip(&mut f, "sphere", &[0], 0, 2);
    let be = rebuild(&f);
    let c = caps(2, 2, 4);
    for eq in [EquationId::Gzstruc, EquationId::Hstruc, EquationId::Ggstruc] {
        assert!(!suite(eq, &be, None, &c).unwrap().passed(), "{eq} should fail");
    }
}

#[test]
fn noncommutative_disk_product_fails_struc() {
    let (mut f, _) = load("classical");
    flip_entry(&mut f, "disk", 2, 0, &["e1", "e2"], &[]);
    let be = rebuild(&f);
    let r = suite(EquationId::Struc, &be, None, &caps(2, 1, 4)).unwrap();
    assert!(!r.passed());
    assert!(r.witnesses.len() <= floer_qkernel::structeq::MAX_WITNESSES);
    assert!(r.witnesses.len() < r.failures || r.failures <= floer_qkernel::structeq::MAX_WITNESSES);
}

#[test]
fn gzstruc_with_the_swapped_split_sign_fails() {
    let (_, be) = load("classical");
    let mut schema = EquationId::Gzstruc.schema();
    match &mut schema.terms[1] {
        Term::Bubble { sign, .. } => *sign = IotaId::I0,
        other => panic!("unexpected term {other:?}"),
    }
    let r = suite_with(&schema, &be, None, &caps(1, 2, 4)).unwrap();
    assert!(!r.passed());
    assert!(suite(EquationId::Gzstruc, &be, None, &caps(1, 2, 4)).unwrap().passed());
}

#[test]
fn m_out_of_range_and_inhomogeneous_inputs_are_usage_errors() {
    let (_, be) = load("classical");
    let cut = e(2);
    let a = vec![el(&be, false, "e1", cut)];
    let h = vec![el(&be, true, "f1", cut)];
    assert!(residual(EquationId::Gstruc, &be, None, 0, &a, &h, cut, false).is_err());
    assert!(residual(EquationId::Gstruc, &be, None, 2, &a, &h, cut, false).is_err());
    assert!(residual(EquationId::Struc, &be, None, 1, &a, &h, cut, false).is_err());
    let mixed = vec![el(&be, false, "e1 + 1", cut)];
    assert!(residual(EquationId::Struc, &be, None, 0, &mixed, &h, cut, false).is_err());
}

#[test]
fn equation_names_round_trip() {
    for eq in EquationId::ALL {
        assert_eq!(eq.to_string().parse::<EquationId>().unwrap(), eq);
    }
    assert!("xstruc".parse::<EquationId>().is_err());
}
