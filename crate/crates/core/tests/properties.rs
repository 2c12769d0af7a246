//! Randomized invariants of the table, the term description and the aggregates.

use std::sync::OnceLock;

use proptest::prelude::*;

use buchstab_bounds::oracle::omega_f64;
use buchstab_bounds::sieve::aggregate::{solve_tau, total_s_with, FixedSum};
use buchstab_bounds::sieve::{f4, f4_cell, CellClass, Shape};
use buchstab_bounds::{BuchstabTable, Enclosure, TermId};

fn table() -> &'static BuchstabTable {
    static T: OnceLock<BuchstabTable> = OnceLock::new();
    T.get_or_init(|| BuchstabTable::build(10.0, 1e-4).unwrap())
}

proptest! {
    #[test]
    fn omega_encloses_independent_solution(u in 1.0f64..10.0) {
        let e = table().omega(Enclosure::point(u)).unwrap();
        // The independent solver is a plain trapezoid march, accurate to ~1e-8.
        prop_assert!((e.mid() - omega_f64(u)).abs() < 1e-7, "{u}: {e}");
        prop_assert!(e.hi() >= 0.5 && e.lo() <= 1.0);
    }

    #[test]
    fn omega_range_covers_its_points(a in 1.0f64..10.0, w in 0.0f64..0.05) {
        let b = (a + w).min(10.0);
        let range = table().omega(Enclosure::new(a, b).unwrap()).unwrap();
        for t in [0.0, 0.3, 0.7, 1.0] {
            let x = a + t * (b - a);
            prop_assert!(range.contains_enclosure(&table().omega(Enclosure::point(x)).unwrap()));
        }
    }

    #[test]
    fn g_is_nondecreasing(a in 1.0f64..9.9, d in 0.0f64..0.1) {
        let ga = table().g(Enclosure::point(a)).unwrap();
        let gb = table().g(Enclosure::point(a + d)).unwrap();
        prop_assert!(gb.hi() >= ga.lo());
    }

    #[test]
    fn inner_limits_are_ordered_or_empty(id_ix in 0usize..16, t in 0.0f64..=1.0) {
        let id = TermId::ALL[id_ix];
        if let Shape::Slab(parts) = id.spec().shape {
            for p in parts {
                let (a0, a1) = (p.alpha.0.to_f64(), p.alpha.1.to_f64());
                let alpha = a0 + t * (a1 - a0);
                let (lo, hi) = (p.lower.eval_f64(alpha), p.upper.eval_f64(alpha));
                // Empty ranges only at the endpoints, up to rounding.
                prop_assert!(lo <= hi + 1e-12, "{id} α={alpha}: [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn f4_cell_agrees_with_points(
        alpha in 8.0f64/7.0..7.0/6.0,
        b in prop::array::uniform3(0.05f64..0.25),
        w in 0.0f64..0.01,
    ) {
        let box_of = |x: f64| Enclosure::new(x, x + w).unwrap();
        let cls = f4_cell(box_of(alpha), box_of(b[0]), box_of(b[1]), box_of(b[2]));
        let corner = f4(alpha, b[0], b[1], b[2]);
        match cls {
            CellClass::Inside => prop_assert!(corner),
            CellClass::Outside => prop_assert!(!corner),
            _ => {}
        }
    }

    #[test]
    fn solved_tau_is_admissible(f in 0.3f64..0.99, w in 0.0f64..1e-4) {
        let fixed = FixedSum { value: Enclosure::new(f, f + w).unwrap(), primed: false };
        let sol = solve_tau(&fixed).unwrap();
        prop_assert!(total_s_with(sol.tau.lo(), &fixed).unwrap().hi() <= 1.0);
        let a: f64 = sol.admissible.parse().unwrap();
        prop_assert!(a <= sol.tau.lo() && sol.tau.lo() - a < 2e-4);
        prop_assert!(sol.total_at_admissible <= 1.0);
    }
}
