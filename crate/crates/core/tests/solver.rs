mod common;

use std::time::Duration;

use pats::solver::{
    minimize, solve_any, solve_exact, solve_mbpats, SearchBudget, Status, AREA_GUARD,
};
use pats::superreduce::{build_q, witness_theta};
use pats::{cell_tileset, color_census, verify_stream, Color, DensePattern, Pattern, TileSet};
use proptest::prelude::*;

fn two_color_3x3() -> impl Strategy<Value = DensePattern> {
    prop::collection::vec(any::<bool>(), 9).prop_map(|cells| {
        DensePattern::from_fn(3, 3, |x, y| {
            Color::new(if cells[(y - 1) * 3 + x - 1] { "p" } else { "q" })
        })
    })
}

fn small_pattern() -> impl Strategy<Value = DensePattern> {
    (1usize..=4, 1usize..=3, 1u8..=3).prop_flat_map(|(w, h, k)| {
        prop::collection::vec(0..k, w * h).prop_map(move |cells| {
            DensePattern::from_fn(w, h, |x, y| {
                Color::new(format!("c{}", cells[(y - 1) * w + x - 1]))
            })
        })
    })
}

fn respects(t: &TileSet, p: &dyn Pattern, budget: &SearchBudget) -> bool {
    let total_ok = budget.max_total_tiles.is_none_or(|m| t.len() <= m);
    let per_ok = budget
        .per_color_bounds
        .iter()
        .all(|(c, &n)| t.tiles_of_color(c).count() <= n);
    total_ok && per_ok && t.is_directed() && verify_stream(t, p).is_ok()
}

#[test]
fn guard_refuses_large_patterns() {
    let side = (AREA_GUARD as f64).sqrt() as usize + 1;
    let p = DensePattern::from_fn(side, side, |_, _| Color::new("u"));
    let r = solve_exact(&p, &SearchBudget::total(1));
    assert_eq!(r.status, Status::BudgetExceeded);
}

#[test]
fn checkerboard_needs_two() {
    let p = DensePattern::from_fn(4, 4, |x, y| {
        Color::new(if (x + y) % 2 == 0 { "b" } else { "w" })
    });
    let (m, t) = minimize(&p, None, &SearchBudget::default()).unwrap();
    assert_eq!(m, 2);
    verify_stream(&t, &p).unwrap();
}

#[test]
fn diagonal_pattern_bounds() {
    let p = common::diagonal_pattern();
    assert_eq!(
        solve_exact(&p, &SearchBudget::total(2)).status,
        Status::Infeasible
    );
    let per = SearchBudget::per_color(p.palette().iter().map(|c| (c.clone(), 1)));
    let r = solve_exact(&p, &per);
    assert!(respects(r.found().unwrap(), &p, &per));
    let tight = SearchBudget::per_color([(Color::new("1"), 0)]);
    assert_eq!(solve_exact(&p, &tight).status, Status::Infeasible);
}

/// A single complete block of the blowup of a one-color source, solved
/// under its three color bounds.
#[test]
fn one_block_blowup_meets_its_bounds() {
    let p = DensePattern::from_fn(1, 1, |_, _| Color::new("z"));
    let inst = build_q(&p).unwrap();
    assert_eq!((inst.ell, inst.m_b, inst.m_g), (13, 1, 5));
    let witness = witness_theta(&cell_tileset(&p), &p).unwrap();
    verify_stream(&witness, &inst.q).unwrap();
    let limits = SearchBudget::default().with_time_limit(Duration::from_secs(120));
    let r = solve_mbpats(&inst.q, inst.color_bounds(), &limits);
    let t = r.found().unwrap_or_else(|| panic!("status {:?}", r.status));
    let mut budget = limits.clone();
    budget.per_color_bounds.extend(inst.color_bounds());
    assert!(respects(t, &inst.q, &budget));
    let count = |ts: &TileSet, c: &str| ts.tiles_of_color(&Color::new(c)).count();
    for c in ["black", "gray"] {
        assert_eq!(count(t, c), count(&witness, c), "{c}");
    }
    assert!(count(t, "white") <= count(&witness, "white"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn minimum_matches_reference(p in two_color_3x3()) {
        let k = color_census(&p).num_colors();
        let limits = SearchBudget::default().with_time_limit(Duration::from_secs(30));
        match minimize(&p, Some(3), &limits) {
            Ok((m, t)) => {
                prop_assert!(verify_stream(&t, &p).is_ok());
                prop_assert_eq!(t.len(), m);
                let bound = vec![m; p.palette().len()];
                prop_assert!(common::naive_feasible(&p, m, &bound));
                if m > k {
                    let bound = vec![m - 1; p.palette().len()];
                    prop_assert!(!common::naive_feasible(&p, m - 1, &bound));
                }
            }
            Err(e) => {
                prop_assert_eq!(e.tiles, 3);
                let bound = vec![3; p.palette().len()];
                prop_assert!(!common::naive_feasible(&p, 3, &bound));
            }
        }
    }

    #[test]
    fn exact_search_is_deterministic(p in small_pattern(), m in 1usize..5) {
        let budget = SearchBudget::total(m);
        let a = solve_exact(&p, &budget);
        let b = solve_exact(&p, &budget);
        prop_assert_eq!(&a, &b);
        if let Some(t) = a.found() {
            prop_assert!(respects(t, &p, &budget));
        }
    }

    #[test]
    fn parallel_search_agrees(p in small_pattern(), m in 1usize..5) {
        let budget = SearchBudget::total(m);
        let seq = solve_exact(&p, &budget);
        let par = solve_any(&p, &budget);
        prop_assert_eq!(seq.found().is_some(), par.found().is_some());
        prop_assert_eq!(seq.status == Status::Infeasible, par.status == Status::Infeasible);
        if let Some(t) = par.found() {
            prop_assert!(respects(t, &p, &budget));
        }
    }

    #[test]
    fn per_color_bounds_are_respected(p in small_pattern(), cap in 1usize..3) {
        let budget = SearchBudget::per_color(p.palette().iter().map(|c| (c.clone(), cap)));
        let r = solve_exact(&p, &budget);
        match r.found() {
            Some(t) => prop_assert!(respects(t, &p, &budget)),
            None => {
                prop_assert_eq!(&r.status, &Status::Infeasible);
                let bound = vec![cap; p.palette().len()];
                prop_assume!(p.area() <= 4 && cap * p.palette().len() <= 4);
                prop_assert!(!common::naive_feasible(&p, cap * p.palette().len(), &bound));
            }
        }
    }
}
