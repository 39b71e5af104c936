mod common;

use pats::sat::{Cnf3, Literal};
use pats::satreduce::build_pattern;
use pats::superreduce::{
    assemble_isolated_supertile, bounds, build_q, decode_supertiles, parse_qdesc, portrayed_color,
    supertile_pattern, validate_source, validate_source_strict, witness_theta, write_qdesc,
    BlowupError, Bounds, BLACK, GRAY, WHITE,
};
use pats::{
    cell_tileset, color_census, glue_isomorphic, verify_stream, Color, DensePattern, Pattern,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn white() -> Color {
    Color::new(WHITE)
}

fn toy(w: usize, h: usize, seed: u64) -> DensePattern {
    common::distinct_pattern(w, h, &mut StdRng::seed_from_u64(seed))
}

#[test]
fn smallest_supertile_layout() {
    let s = supertile_pattern(1, 1, true, true).unwrap();
    assert_eq!((s.width(), s.height()), (13, 13));
    let whites: Vec<usize> = (2..13).filter(|&x| s.cell(x, 13) == &white()).collect();
    assert_eq!(whites, [3]);
    let whites: Vec<usize> = (2..13).filter(|&y| s.cell(13, y) == &white()).collect();
    assert_eq!(whites, [3]);
    assert_eq!(s.cell(7, 7).as_str(), BLACK);
    assert_eq!(s.cell(13, 13).as_str(), GRAY);
}

#[test]
fn neighbouring_colors_differ_in_four_cells() {
    let a = supertile_pattern(1, 5, true, true).unwrap();
    let b = supertile_pattern(2, 5, true, true).unwrap();
    let diff = (1..=a.height())
        .flat_map(|y| (1..=a.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| a.cell(x, y) != b.cell(x, y))
        .count();
    assert_eq!(diff, 4);
    for c in 1..=5 {
        for (bottom, left) in [(true, true), (true, false), (false, true), (false, false)] {
            let s = supertile_pattern(c, 5, bottom, left).unwrap();
            assert_eq!(color_census(&s).num_colors(), 3);
        }
    }
    assert!(matches!(
        supertile_pattern(6, 5, true, true),
        Err(BlowupError::Range { c: 6, k: 5 })
    ));
    assert!(supertile_pattern(0, 5, true, true).is_err());
}

#[test]
fn bounds_for_sixteen_colors() {
    let p = toy(4, 4, 1);
    assert_eq!(
        bounds(&p).unwrap(),
        Bounds {
            m_b: 1,
            m_w: 70,
            m_g: 35,
            ell: 88
        }
    );
    let inst = build_q(&p).unwrap();
    let q = &inst.q;
    assert_eq!((q.width(), q.height()), (354, 354));
    assert_eq!(color_census(q).num_colors(), 3);
    // Middle gadget row and column: gray counter run, then white at k+1.
    let mid = 4 * 88 + 1;
    assert!((1..=16).all(|x| q.cell(x, mid).as_str() == GRAY));
    assert_eq!(q.cell(17, mid), &white());
    assert!((1..=16).all(|y| q.cell(mid, y).as_str() == GRAY));
    assert_eq!(q.cell(mid, 17), &white());
    for (x, y) in [
        (mid - 1, mid - 1),
        (mid + 1, mid - 1),
        (mid - 1, mid + 1),
        (mid + 1, mid + 1),
    ] {
        assert_eq!(q.cell(x, y).as_str(), BLACK);
    }
    assert_eq!(q.cell(mid, mid).as_str(), GRAY);
}

#[test]
fn source_preconditions() {
    let flat = DensePattern::from_fn(2, 2, |_, _| Color::new("c"));
    assert!(matches!(
        validate_source(&flat),
        Err(BlowupError::Precondition(_))
    ));
    validate_source(&toy(4, 4, 2)).unwrap();
    let f = Cnf3::numbered(1, vec![[Literal::pos(0); 3]]);
    let pf = build_pattern(&f).pattern;
    validate_source(&pf).unwrap();
    validate_source_strict(&pf, &f).unwrap();
    let g = Cnf3::numbered(1, vec![[Literal::neg(0); 3]]);
    assert!(validate_source_strict(&pf, &g).is_err());
}

#[test]
fn witness_counts_and_structure_errors() {
    let p = toy(3, 3, 3);
    let k = 9;
    let theta = witness_theta(&cell_tileset(&p), &p).unwrap();
    let count = |c: &str| theta.tiles_of_color(&Color::new(c)).count();
    assert_eq!(count(BLACK), 1);
    assert_eq!(count(GRAY), 2 * k + 3);
    // The white bound budgets sixteen tiles for the or-gate; a source
    // without it needs eleven fewer.
    assert_eq!(count(WHITE), 5 * k - 3 * 6 + 14 - 11);
    assert_eq!(bounds(&p).unwrap().m_w, 5 * k - 3 * 6 + 14);
    assert!(theta.is_directed());
    verify_stream(&theta, &build_q(&p).unwrap().q).unwrap();
    assert!(common::gray_shape_errors(&theta, k).is_empty());

    // One tile per cell for six cells of one color: six supertile kinds
    // portray it, which overflows the white budget.
    let rep = DensePattern::from_fn(5, 4, |x, y| {
        if (2..=4).contains(&x) && (2..=3).contains(&y) {
            Color::new("mid")
        } else {
            Color::new(format!("b{x}_{y}"))
        }
    });
    assert!(matches!(
        witness_theta(&cell_tileset(&rep), &rep),
        Err(BlowupError::Structure(_))
    ));
}

#[test]
fn counters_name_every_block() {
    let p = toy(3, 2, 4);
    let inst = build_q(&p).unwrap();
    for by in 1..=2 {
        for bx in 1..=3 {
            let view = inst.supertile(bx, by);
            assert_eq!(view.has_left_column, bx > 1);
            assert_eq!(view.has_bottom_row, by > 1);
            assert_eq!(portrayed_color(&view).unwrap(), inst.q.block_color(bx, by));
            assert_eq!(&inst.colors[inst.q.block_color(bx, by) - 1], p.cell(bx, by));
        }
    }
}

#[test]
fn inconsistent_counters_are_malformed() {
    let p = toy(2, 2, 5);
    let inst = build_q(&p).unwrap();
    let mut view = inst.supertile(2, 2);
    let c = portrayed_color(&view).unwrap();
    let ell = inst.ell;
    // Move the right-column white cell one row up.
    view.pattern = view
        .pattern
        .with_cell(ell, c + 2, Color::new(GRAY))
        .with_cell(ell, c + 3, white());
    assert!(matches!(
        portrayed_color(&view),
        Err(BlowupError::MalformedSupertile { x: 2, y: 2, .. })
    ));
}

#[test]
fn trimmed_supertile_reads_its_color() {
    let k = 4;
    let view = pats::superreduce::SupertileView {
        x: 1,
        y: 1,
        has_bottom_row: false,
        has_left_column: true,
        pattern: supertile_pattern(1, k, false, true).unwrap(),
    };
    assert_eq!(portrayed_color(&view).unwrap(), 1);
    assert_eq!(view.pattern.cell(view.pattern.width(), 2), &white());
}

#[test]
fn decode_round_trip() {
    let p = toy(3, 2, 6);
    let t = cell_tileset(&p);
    let inst = build_q(&p).unwrap();
    let theta = witness_theta(&t, &p).unwrap();
    let back = decode_supertiles(&theta, &inst).unwrap();
    assert_eq!(back.len(), 6);
    verify_stream(&back, &p).unwrap();
    assert!(glue_isomorphic(&back, &t, false));
}

#[test]
fn complete_supertiles_follow_their_control_tile() {
    let p = toy(3, 3, 7);
    let inst = build_q(&p).unwrap();
    let theta = witness_theta(&cell_tileset(&p), &p).unwrap();
    let scan = common::scan_roles(&theta, &inst, true);
    let (wp, _) = inst.source_dims;
    let mut checked = 0;
    for (i, b) in scan.blocks.iter().enumerate() {
        let (bx, by) = (i % wp + 1, i / wp + 1);
        if bx == 1 || by == 1 {
            continue;
        }
        let a = &theta.tiles()[b.a.unwrap() as usize];
        let (grid, north, east) =
            assemble_isolated_supertile(&theta, inst.ell, &a.s, &a.w).unwrap();
        let seen: Vec<u32> = b.grid.iter().map(|t| t.unwrap()).collect();
        assert_eq!(grid, seen, "block ({bx},{by})");
        assert_eq!(Some(north), b.north);
        assert_eq!(Some(east), b.east);
        checked += 1;
    }
    assert_eq!(checked, 4);
}

#[test]
fn witness_roles_stay_apart() {
    let mut rng = StdRng::seed_from_u64(8);
    let p = common::bordered_pattern(4, 4, 1, &mut rng);
    let one_each = p
        .palette()
        .iter()
        .map(|c| (c.clone(), 1))
        .collect::<Vec<_>>();
    let budget = pats::solver::SearchBudget::per_color(one_each);
    let r = pats::solver::solve_exact(&p, &budget);
    let t = r.found().unwrap_or_else(|| panic!("status {:?}", r.status));
    let inst = build_q(&p).unwrap();
    let theta = witness_theta(t, &p).unwrap();
    let scan = common::scan_roles(&theta, &inst, false);
    assert!(common::white_role_clashes(&scan).is_empty());
    assert!(common::sharing_violations(&scan).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qdesc_round_trip(w in 2usize..6, h in 2usize..6, seed in any::<u64>()) {
        let p = toy(w, h, seed);
        let inst = build_q(&p).unwrap();
        let back = parse_qdesc(&write_qdesc(&inst)).unwrap();
        prop_assert_eq!(back.bounds(), inst.bounds());
        prop_assert_eq!(&back.colors, &inst.colors);
        prop_assert_eq!(back.source_dims, (w, h));
        for by in 1..=h {
            for bx in 1..=w {
                prop_assert_eq!(back.q.block_color(bx, by), inst.q.block_color(bx, by));
            }
        }
    }

    #[test]
    fn dimensions_and_bounds(w in 2usize..7, h in 2usize..7, seed in any::<u64>()) {
        let p = toy(w, h, seed);
        let k = w * h;
        let inst = build_q(&p).unwrap();
        let ell = 5 * k + 8;
        prop_assert_eq!(inst.ell, ell);
        prop_assert_eq!((inst.q.width(), inst.q.height()), (ell * w + 2, ell * h + 2));
        prop_assert_eq!((inst.m_b, inst.m_g), (1, 2 * k + 3));
        prop_assert_eq!(inst.m_w as i64, 5 * k as i64 - 3 * (w + h) as i64 + 14);
    }
}
