//! Term values against independently computed references and the published bounds.

use std::sync::OnceLock;

use buchstab_bounds::oracle::riemann_fast;
use buchstab_bounds::sieve::aggregate::paper_bound;
use buchstab_bounds::sieve::{compute_parts, QuadratureConfig};
use buchstab_bounds::{compute_term, BuchstabTable, Enclosure, TermId};

fn table() -> &'static BuchstabTable {
    static T: OnceLock<BuchstabTable> = OnceLock::new();
    T.get_or_init(|| BuchstabTable::build(10.0, 1e-4).unwrap())
}

fn rigorous(id: TermId) -> Enclosure {
    compute_term(id, &QuadratureConfig::default(), table()).unwrap().enclosure
}

// Reference values from an adaptive double-precision quadrature of the same
// integrals with ω from a separate delay-equation solver.
const REFERENCE: [(TermId, f64); 8] = [
    (TermId::G1, 0.02861092136),
    (TermId::G2, 0.08606198923),
    (TermId::G3, 0.03099114516),
    (TermId::G6, 0.05986241142),
    (TermId::G1p, 0.02747490251),
    (TermId::G2p, 0.07793256742),
    (TermId::G3p, 0.02683465647),
    (TermId::G6p, 0.05017765179),
];

#[test]
fn double_integrals_match_reference_quadrature() {
    for (id, v) in REFERENCE {
        let e = rigorous(id);
        let dist = if e.contains(v) { 0.0 } else { (e.lo() - v).max(v - e.hi()) };
        assert!(dist <= 1e-9, "{id}: {e} vs {v}");
    }
}

#[test]
fn four_dimensional_terms_match_reference() {
    let g4 = rigorous(TermId::G4);
    assert!(g4.contains(6.0945e-5) && g4.width() <= 1e-6, "{g4}");
    let g4p = rigorous(TermId::G4p);
    assert!(g4p.contains(5.25e-5) && g4p.width() <= 1e-6, "{g4p}");
}

#[test]
fn published_bounds_hold() {
    for id in TermId::ALL {
        if let Some(b) = paper_bound(id, false) {
            assert!(b.holds(&rigorous(id)), "{id}");
        }
    }
}

#[test]
fn g1_parts_are_nonnegative_and_sum_deterministically() {
    let parts = compute_parts(TermId::G1, &QuadratureConfig::default(), table()).unwrap();
    assert_eq!(parts.len(), 2);
    assert!(parts.iter().all(|p| p.hi() >= 0.0 && p.lo() >= -1e-15), "{parts:?}");
    let ab = parts[0] + parts[1];
    let ba = parts[1] + parts[0];
    assert_eq!(ab.lo().to_bits(), ba.lo().to_bits());
    assert_eq!(ab.hi().to_bits(), ba.hi().to_bits());
    assert!(ab.overlaps(&rigorous(TermId::G1)));
}

#[test]
fn non_slab_terms_have_no_parts() {
    assert!(compute_parts(TermId::G4, &QuadratureConfig::default(), table()).is_err());
    assert!(compute_parts(TermId::G5, &QuadratureConfig::default(), table()).is_err());
}

#[test]
fn riemann_sums_converge_to_the_enclosure() {
    let coarse = riemann_fast(TermId::G1, 1000, 1.317).unwrap();
    let fine = riemann_fast(TermId::G1, 2000, 1.317).unwrap();
    // Below the width the term is certified to at the looser 5e-6 setting.
    assert!((coarse - fine).abs() < 5e-6, "{coarse} {fine}");
    assert!((fine - rigorous(TermId::G1).mid()).abs() < 5e-6);
    assert!((riemann_fast(TermId::G5, 10_000, 1.317).unwrap() - 29.0 / 72.0).abs() < 1e-6);
    assert!((riemann_fast(TermId::G7p, 10_000, 1.317).unwrap() - 0.268).abs() < 1e-9);
}

#[test]
fn tau_only_moves_the_tail_terms() {
    let at = |tau: f64, id| {
        let c = QuadratureConfig { tau, ..QuadratureConfig::default() };
        compute_term(id, &c, table()).unwrap().enclosure
    };
    assert_eq!(at(1.3, TermId::G5), at(1.317, TermId::G5));
    assert!(at(1.3, TermId::G7).hi() < at(1.317, TermId::G7).lo());
    assert!(at(1.25, TermId::G7).contains(0.0));
}
