mod common;

use common::{e, el, flip, heisenberg, load, rebuild};
use floer_qkernel::cohomology::{
    clifford_example, clifford_example_with, cohomology_of, truncated_monomials, verify_theorem, FilteredComplex,
    Floer, TheoremId,
};
use floer_qkernel::error::Error;
use floer_qkernel::model::GradedElement;
use floer_qkernel::novikov::{q_int, Energy};
use floer_qkernel::operators::{Backend, BoundingPair};
use floer_qkernel::report::Status;
use std::time::Instant;

fn floer(be: &Backend, cut: Energy) -> Floer<'_> {
    Floer::new(be, BoundingPair::zero(be, cut), cut).unwrap()
}

/// A complex on the L-model of the classical backend given by its values
/// on basis labels.
fn custom_complex(be: &Backend, images: &[(&str, &str)]) -> FilteredComplex {
    let cut = e(1);
    let monos = vec![be.ring.one_mono()];
    let table: Vec<(usize, GradedElement)> =
        images.iter().map(|(from, to)| (be.l_model.index_of(from).unwrap(), el(be, false, to, cut))).collect();
    FilteredComplex::build("custom", &be.ring, &be.l_model, cut, &monos, |x| {
        let mut out = GradedElement::zero(&be.ring, &be.l_model, cut);
        for ((i, _), q) in x.terms() {
            for (j, img) in &table {
                if i == j {
                    out.add_scaled(img, q);
                }
            }
        }
        Ok(out)
    })
    .unwrap()
}

#[test]
fn classical_ranks_and_cup_product() {
    let (_, be) = load("classical");
    let cut = e(10);
    let fl = floer(&be, cut);
    assert_eq!(fl.hf.rank_vector(), vec![1, 2, 1]);
    assert_eq!(fl.qh.rank_vector(), vec![1, 4, 6, 4, 1]);
    for a in 0..be.l_model.len() {
        for b in 0..be.l_model.len() {
            let x = GradedElement::basis(&be.ring, &be.l_model, cut, a);
            let y = GradedElement::basis(&be.ring, &be.l_model, cut, b);
            assert_eq!(fl.circ(&x, &y).unwrap(), x.wedge(&y).unwrap(), "{x} o {y}");
        }
    }
}

#[test]
fn clifford_quantum_cohomology_has_ranks_one_one_one() {
    let (_, be) = load("clifford");
    let fl = floer(&be, e(6));
    assert_eq!(fl.qh.rank_vector(), vec![1, 1, 1]);
    assert_eq!(fl.qh.ranks.keys().copied().collect::<Vec<_>>(), vec![0, 2, 4]);
    assert_eq!(fl.hf.rank_vector(), vec![1, 2, 1]);
}

#[test]
fn acyclic_two_term_complex_has_no_cohomology() {
    let (_, be) = load("classical");
    let cx = custom_complex(&be, &[("1", "e1"), ("e2", "e1e2")]);
    let p = cohomology_of(cx).unwrap();
    assert!(p.ranks.is_empty());
    assert!(p.generators.is_empty());
    assert!(p.is_exact(&el(&be, false, "e1", e(1))).unwrap());
}

#[test]
fn nonzero_square_is_reported_with_a_witness() {
    let (_, be) = load("classical");
    let cx = custom_complex(&be, &[("1", "e1"), ("e1", "e1e2")]);
    match cohomology_of(cx) {
        Err(Error::Validation(w)) => assert!(w.iter().any(|s| s.starts_with("d(d(1 1))")), "{w:?}"),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn all_three_theorems_hold_on_both_backends() {
    for (name, cut) in [("classical", 4), ("clifford", 6)] {
        let (_, be) = load(name);
        let fl = floer(&be, e(cut));
        for id in TheoremId::ALL {
            let s = verify_theorem(id, &fl).unwrap();
            for c in &s.checks {
                assert_eq!(c.status, Status::Pass, "{name} {}: {} ({})", id.name(), c.name, c.detail);
            }
            assert!(s.checks.len() >= 4);
        }
    }
}

#[test]
fn deformed_clifford_satisfies_the_theorems() {
    let (_, be) = load("clifford");
    let cut = e(4);
    let pair = BoundingPair { gamma: el(&be, true, "0", cut), b: el(&be, false, "t0*e1", cut) };
    let fl = Floer::new(&be, pair, cut).unwrap();
    for id in TheoremId::ALL {
        let s = verify_theorem(id, &fl).unwrap();
        assert!(s.checks.iter().all(|c| c.status == Status::Pass), "{:?}", s.checks);
    }
}

#[test]
fn flipped_module_action_fails_compare_with_a_witness() {
    let (mut f, _) = load("clifford");
    flip(&mut f, "geodesic:1", &[1], 1, 1);
    let be = rebuild(&f);
    let fl = floer(&be, e(6));
    let s = verify_theorem(TheoremId::Compare, &fl).unwrap();
    let c = s.checks.iter().find(|c| c.name == "y (*) a = CO(y) o a").unwrap();
    assert_eq!(c.status, Status::Fail);
    assert!(c.detail.contains("vs"));
}

#[test]
fn clifford_values() {
    let (_, be) = load("clifford");
    let cut = e(6);
    let fl = floer(&be, cut);
    let y = el(&be, true, "y", cut);
    let a = el(&be, false, "e1", cut);
    let one = el(&be, false, "1", cut);
    assert_eq!(fl.co(&y).unwrap(), el(&be, false, "T^[1]*1", cut));
    assert_eq!(fl.co(&el(&be, true, "1", cut)).unwrap(), one);
    assert_eq!(fl.circledast(&y, &a).unwrap(), el(&be, false, "T^[1]*e1", cut));
    assert_eq!(fl.circledast(&el(&be, true, "1", cut), &a).unwrap(), a);
    let yyy = fl.star(&fl.star(&y, &y).unwrap(), &y).unwrap();
    assert_eq!(yyy, el(&be, true, "T^[3]*1", cut));
    assert_eq!(fl.star(&el(&be, true, "1", cut), &y).unwrap(), y);
    assert_eq!(fl.oc(&one).unwrap(), be.pd(cut));
    let oc_co = fl.oc(&fl.co(&y).unwrap()).unwrap();
    assert_eq!(oc_co, fl.star(&y, &be.pd(cut)).unwrap());
    assert_eq!(fl.curvature.terms().get(&be.ring.t_beta(&[1])), Some(&q_int(3)));
    let z = fl.phi_hat(&y).unwrap();
    assert_eq!(fl.star_current(&el(&be, true, "1", cut), &z).unwrap(), z);
}

#[test]
fn clifford_replay_passes_quickly() {
    let start = Instant::now();
    let r = clifford_example(e(10)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(r.exit_code(), 0, "{}", r.render_text());
    let text = r.render_text();
    assert!(text.contains("CO(y) = [T^[1]]"), "{text}");
    assert!(text.contains("lambda^3 = 1 branch"));
}

#[test]
fn clifford_replay_below_three_beta_is_undecidable() {
    let r = clifford_example(e(2)).unwrap();
    assert_eq!(r.exit_code(), 3, "{}", r.render_text());
    let und: Vec<&str> = r.checks().filter(|c| c.status == Status::Undecidable).map(|c| c.name.as_str()).collect();
    assert_eq!(und.len(), 2, "{und:?}");
    assert!(r.checks().any(|c| c.name == "CO(y) = [T^beta]" && c.status == Status::Pass));
}

#[test]
fn clifford_replay_on_mutated_data_fails_a_stage() {
    let (mut f, _) = load("clifford");
    flip(&mut f, "disk", &[1], 0, 1);
    let be = rebuild(&f);
    let r = clifford_example_with(&be, BoundingPair::zero(&be, e(10)), e(10)).unwrap();
    assert_eq!(r.exit_code(), 1);
    let failed = r.checks().find(|c| c.status == Status::Fail).unwrap();
    assert!(!failed.detail.is_empty());
}

#[test]
fn results_are_stable_under_raising_the_cutoff() {
    let (_, be) = load("clifford");
    let lo = floer(&be, e(4));
    let hi = floer(&be, e(8));
    assert_eq!(lo.hf.rank_vector(), hi.hf.rank_vector());
    assert_eq!(lo.qh.rank_vector(), hi.qh.rank_vector());
    let y_lo = el(&be, true, "y", e(4));
    let y_hi = el(&be, true, "y", e(8));
    let s_lo = lo.star(&lo.star(&y_lo, &y_lo).unwrap(), &y_lo).unwrap();
    let s_hi = hi.star(&hi.star(&y_hi, &y_hi).unwrap(), &y_hi).unwrap();
    assert_eq!(s_hi.truncate(e(4)).with_cutoff(e(4)), s_lo);
}

#[test]
fn non_closed_inputs_are_rejected() {
    let be = heisenberg();
    let cut = e(2);
    let fl = floer(&be, cut);
    let c = el(&be, false, "c", cut);
    let one = el(&be, false, "1", cut);
    assert!(matches!(fl.circ(&c, &one), Err(Error::Precondition(_))));
    assert!(matches!(fl.oc(&c), Err(Error::Precondition(_))));
    assert_eq!(fl.hf.rank_vector(), vec![1, 2, 2, 1]);
}

#[test]
fn non_bounding_pairs_are_rejected() {
    let (_, be) = load("classical");
    let cut = e(3);
    let pair = BoundingPair { gamma: el(&be, true, "f1", cut), b: el(&be, false, "0", cut) };
    assert!(matches!(Floer::new(&be, pair, cut), Err(Error::Precondition(_))));
}

#[test]
fn monomial_closure_respects_the_cutoff() {
    let (_, be) = load("clifford");
    let ms = truncated_monomials(&be, &[], e(2)).unwrap();
    // T^a t0^b with a + b <= 2.
    assert_eq!(ms.len(), 6);
    assert!(ms.iter().all(|m| be.ring.energy(m) <= e(2)));
}
