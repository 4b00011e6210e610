//! Chart-level Koszul homology, comparison isomorphisms, roofs and gluing.

use sheafstack::chart::{
    build_roof, build_roof_from_generators, comparison_map, fiber_product_generators, glue_koszul,
    koszul_homology_chart, restrict_chart, roof_comparison, ChartMorphism, LocalChart, SheafOnF,
};
use sheafstack::hilbert::length;
use sheafstack::matrix::PolyMatrix;
use sheafstack::module::{base_change, FpModule};
use sheafstack::order::MonomialOrder;
use sheafstack::poly::Polynomial;
use sheafstack::ring::{Ring, RingMap, RingPresentation};
use sheafstack::space::SpacePresentation;

fn poly_ring(names: &[&str]) -> Ring {
    RingPresentation::polynomial(
        names.iter().map(|s| s.to_string()).collect(),
        MonomialOrder::grevlex(names.len()),
    )
}

fn dual_numbers() -> Ring {
    let r = poly_ring(&["x"]);
    RingPresentation::quotient(&r, vec![r.parse("x^2").unwrap()])
}

/// Tautological rank-1 chart on a free sheaf over the given base.
fn free_chart(name: &str, base: &Ring, rank: usize) -> LocalChart {
    let f = FpModule::free(base.clone(), rank);
    LocalChart::on_single_piece(
        name,
        base.clone(),
        f,
        rank,
        PolyMatrix::identity(rank, base.nvars()),
    )
    .unwrap()
}

#[test]
fn full_sheaf_has_koszul_resolution_homology() {
    // H^0 = O_U and H^i = 0 for i > 0, on a rank-2 chart
    let base = poly_ring(&["x"]);
    let q = free_chart("Q", &base, 2);
    let a = SheafOnF::Full;
    let h0 = koszul_homology_chart(&q, &a, 0).unwrap();
    assert!(h0
        .base_module
        .presentation_eq(&FpModule::free(base.clone(), 1)));
    for i in 1..=2 {
        assert!(koszul_homology_chart(&q, &a, i)
            .unwrap()
            .base_module
            .is_zero_module());
    }
    // structural vanishing above the rank
    for i in 3..6 {
        assert!(koszul_homology_chart(&q, &a, i)
            .unwrap()
            .base_module
            .is_zero_module());
    }
}

#[test]
fn zero_section_gives_binomial_ranks() {
    let base = dual_numbers();
    let q = free_chart("Q", &base, 2);
    let a = SheafOnF::ZeroSection;
    for (i, expect) in [(0usize, 1usize), (1, 2), (2, 1)] {
        let h = koszul_homology_chart(&q, &a, i).unwrap();
        assert!(h
            .base_module
            .presentation_eq(&FpModule::free(base.clone(), expect)));
    }
}

#[test]
fn full_cone_over_dual_numbers() {
    // U = Q[x]/(x^2), rank 1, A = structure sheaf of the full cone:
    // H^0 has length 2, H^1 = 0
    let base = dual_numbers();
    let q = free_chart("Q", &base, 1);
    let a = SheafOnF::substack_on(&q, vec![]);
    let h0 = koszul_homology_chart(&q, &a, 0).unwrap();
    assert_eq!(length(&h0.base_module), Some(2));
    let h1 = koszul_homology_chart(&q, &a, 1).unwrap();
    assert!(h1.base_module.is_zero_module());
}

#[test]
fn restrict_by_one_is_isomorphic() {
    let base = poly_ring(&["x"]);
    let q = free_chart("Q", &base, 1);
    let (restricted, gamma) = restrict_chart(&q, &base.one()).unwrap();
    assert_eq!(restricted.rank, 1);
    let cm = comparison_map(&gamma, &SheafOnF::Full, 0).unwrap();
    assert!(cm.map.is_isomorphism());
}

#[test]
fn restrict_idempotent_locus() {
    // U = Q[x]/(x^2 - x) localized at x is the point x = 1
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let q = free_chart("Q", &r, 1);
    let (restricted, _) = restrict_chart(&q, &r.parse("x").unwrap()).unwrap();
    assert_eq!(length(&FpModule::free(restricted.base.clone(), 1)), Some(1));
    // restriction of a restriction composes
    let one = restricted.base.one();
    let (again, _) = restrict_chart(&restricted, &one).unwrap();
    assert_eq!(again.tower.len(), 2);
}

#[test]
fn empty_double_restriction_errors() {
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let q = free_chart("Q", &r, 2);
    let (at_zero, _) = restrict_chart(&q, &r.parse("x - 1").unwrap()).unwrap();
    let x_there = at_zero.from_piece.apply(&r.parse("x").unwrap());
    assert!(restrict_chart(&at_zero, &x_there).is_err());
}

#[test]
fn roof_of_chart_with_itself() {
    let base = dual_numbers();
    let q = free_chart("Q", &base, 1);
    let roof = build_roof(&q, &q).unwrap();
    // symmetric construction: both projections agree
    assert_eq!(roof.to_first.bundle_map, roof.to_second.bundle_map);
    let h = roof_comparison(&roof, &SheafOnF::Full, 0).unwrap();
    assert!(h.equals(&sheafstack::module::ModuleMap::identity(&h.source)));
}

#[test]
fn roof_rank_from_fiber_product() {
    // E rank 1 = F free, E' rank 2 -> F: the fiber product has rank 2
    let base = poly_ring(&["x"]);
    let f = FpModule::free(base.clone(), 1);
    let q1 =
        LocalChart::on_single_piece("Q1", base.clone(), f.clone(), 1, PolyMatrix::identity(1, 1))
            .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        base.clone(),
        f.clone(),
        2,
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    let gens = fiber_product_generators(&q1, &q2).unwrap();
    assert_eq!(gens.len(), 2);
    let roof = build_roof(&q1, &q2).unwrap();
    assert_eq!(roof.roof.rank, 2);
}

#[test]
fn roof_over_zero_sheaf_is_direct_sum() {
    // F = 0: the fiber product is all of E ⊕ E'
    let base = poly_ring(&["x"]);
    let zero_sheaf = FpModule::new(base.clone(), 1, vec![vec![base.one()]]);
    let q1 = LocalChart::on_single_piece(
        "Q1",
        base.clone(),
        zero_sheaf.clone(),
        1,
        PolyMatrix::new(1, 1, vec![base.zero()]),
    )
    .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        base.clone(),
        zero_sheaf,
        2,
        PolyMatrix::new(1, 2, vec![base.zero(), base.zero()]),
    )
    .unwrap();
    let gens = fiber_product_generators(&q1, &q2).unwrap();
    // spans E ⊕ E' of total rank 3
    assert_eq!(gens.len(), 3);
}

#[test]
fn comparison_identity_morphism() {
    let base = dual_numbers();
    let q = free_chart("Q", &base, 1);
    let id = ChartMorphism::new(
        q.clone(),
        q.clone(),
        RingMap::identity(base.clone()),
        PolyMatrix::identity(1, base.nvars()),
    )
    .unwrap();
    let cm = comparison_map(&id, &SheafOnF::Full, 0).unwrap();
    assert!(cm.map.is_isomorphism());
    assert!(cm
        .map
        .equals(&sheafstack::module::ModuleMap::identity(&cm.map.source)));
}

#[test]
fn comparison_rank_two_to_rank_one() {
    // rank-2 chart surjecting onto a rank-1 chart over the dual numbers:
    // the comparison is an isomorphism in degrees 0 and 1
    let base = dual_numbers();
    let f = FpModule::free(base.clone(), 1);
    let q1 = LocalChart::on_single_piece(
        "Q1",
        base.clone(),
        f.clone(),
        2,
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    let q2 =
        LocalChart::on_single_piece("Q2", base.clone(), f, 1, PolyMatrix::identity(1, 1)).unwrap();
    // morphism Q1 -> Q2 with bundle map = Q1's surjection
    let gamma = ChartMorphism::new(
        q1.clone(),
        q2.clone(),
        RingMap::identity(base.clone()),
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    // a substack cut out on Q2 by its fiber variable; pulled back on Q1
    let y_on_q2 = q2.fiber_polys()[0].clone();
    let mut ideals = std::collections::BTreeMap::new();
    ideals.insert("Q2".to_string(), vec![y_on_q2]);
    let a = SheafOnF::Substack(ideals);
    for i in 0..=1 {
        let cm = comparison_map(&gamma, &a, i).unwrap();
        assert!(cm.map.is_isomorphism(), "degree {}", i);
        assert_eq!(length(&cm.map.target), Some(2), "degree {}", i);
    }
    // degree 2 on the rank-2 side must die
    let h2 = comparison_map(&gamma, &a, 2).unwrap();
    assert!(h2.map.target.is_zero_module());
}

#[test]
fn roof_independence_on_distinct_roofs() {
    // three different roofs over the same pair of charts give the same
    // comparison
    let base = dual_numbers();
    let f = FpModule::free(base.clone(), 1);
    let q1 =
        LocalChart::on_single_piece("Q1", base.clone(), f.clone(), 1, PolyMatrix::identity(1, 1))
            .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        base.clone(),
        f,
        2,
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    let a = SheafOnF::Full;
    let canonical = fiber_product_generators(&q1, &q2).unwrap();
    let roof1 = build_roof(&q1, &q2).unwrap();
    // redundant generator added
    let mut gens2 = canonical.clone();
    let extra: Vec<Polynomial> = canonical[0]
        .iter()
        .zip(&canonical[1])
        .map(|(a, b)| a.add(b))
        .collect();
    gens2.push(extra);
    let roof2 = build_roof_from_generators(&q1, &q2, gens2).unwrap();
    // permuted generators
    let gens3: Vec<_> = canonical.iter().rev().cloned().collect();
    let roof3 = build_roof_from_generators(&q1, &q2, gens3).unwrap();
    for i in 0..=1 {
        let h1 = roof_comparison(&roof1, &a, i).unwrap();
        let h2 = roof_comparison(&roof2, &a, i).unwrap();
        let h3 = roof_comparison(&roof3, &a, i).unwrap();
        assert!(h1.equals(&h2), "degree {}", i);
        assert!(h1.equals(&h3), "degree {}", i);
    }
}

#[test]
fn functoriality_of_comparisons() {
    // restriction of a restriction: h(composite) = h(inner) ∘ h(outer)
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^3 - x").unwrap()]);
    let q = free_chart("Q", &r, 1);
    let (q1, g1) = restrict_chart(&q, &r.parse("x + 1").unwrap()).unwrap();
    let f2 = q1.from_piece.apply(&r.parse("x").unwrap());
    let (_, g2) = restrict_chart(&q1, &f2).unwrap();
    let composite = ChartMorphism::compose(&g1, &g2).unwrap();
    let a = SheafOnF::Full;
    let via_composite = comparison_map(&composite, &a, 0).unwrap();
    let via_steps = {
        let outer = comparison_map(&g1, &a, 0).unwrap();
        let inner = comparison_map(&g2, &a, 0).unwrap();
        // pull the outer comparison back along the second restriction
        let pulled_outer = sheafstack::module::base_change_map(&outer.map, &g2.base_map).unwrap();
        inner
            .map
            .compose(
                &sheafstack::module::ModuleMap::new(
                    pulled_outer.source.clone(),
                    inner.map.source.clone(),
                    pulled_outer.matrix.clone(),
                )
                .unwrap(),
            )
            .unwrap()
    };
    assert!(via_composite.map.equals(
        &sheafstack::module::ModuleMap::new(
            via_composite.map.source.clone(),
            via_composite.map.target.clone(),
            via_steps.matrix.clone(),
        )
        .unwrap()
    ));
}

#[test]
fn glue_single_chart() {
    let base = dual_numbers();
    let q = free_chart("Q", &base, 1);
    let glued = glue_koszul(&[q], &SheafOnF::Full, 0).unwrap();
    assert_eq!(glued.modules.len(), 1);
    assert_eq!(length(&glued.modules[0]), Some(2));
}

#[test]
fn glue_two_point_cover() {
    // U = {x^2 - x = 0} covered by the loci x != 0 and x != 1:
    // glued H^0 of the full sheaf has total length 2
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let space = SpacePresentation::principal_cover(
        r.clone(),
        vec![vec![r.parse("x").unwrap()], vec![r.parse("1 - x").unwrap()]],
    );
    let f0 = FpModule::free(space.piece(0).clone(), 1);
    let f1 = FpModule::free(space.piece(1).clone(), 1);
    let q0 = LocalChart::new(
        "Q0",
        space.clone(),
        0,
        vec![],
        &f0,
        1,
        PolyMatrix::identity(1, f0.ring().nvars()),
    )
    .unwrap();
    let q1 = LocalChart::new(
        "Q1",
        space.clone(),
        1,
        vec![],
        &f1,
        1,
        PolyMatrix::identity(1, f1.ring().nvars()),
    )
    .unwrap();
    let glued = glue_koszul(&[q0, q1], &SheafOnF::Full, 0).unwrap();
    let total: u64 = glued.modules.iter().map(|m| length(m).unwrap()).sum();
    assert_eq!(total, 2);
    // the overlap is empty, so there is no gluing map
    assert!(glued.gluing.is_empty());
}

#[test]
fn glue_three_chart_redundant_cover() {
    // three identical charts on one point: all comparisons reduce to the
    // identity and the cocycle holds
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x").unwrap()]);
    let space =
        SpacePresentation::principal_cover(r.clone(), vec![Vec::new(), Vec::new(), Vec::new()]);
    let charts: Vec<LocalChart> = (0..3)
        .map(|i| {
            let f = FpModule::free(space.piece(i).clone(), 1);
            LocalChart::new(
                format!("Q{}", i),
                space.clone(),
                i,
                vec![],
                &f,
                1,
                PolyMatrix::identity(1, f.ring().nvars()),
            )
            .unwrap()
        })
        .collect();
    let glued = glue_koszul(&charts, &SheafOnF::Full, 0).unwrap();
    assert_eq!(glued.gluing.len(), 3);
    for g in glued.gluing.values() {
        assert!(g.is_isomorphism());
    }
}

#[test]
fn restriction_of_roof_comparison_matches() {
    // restricting the roof comparison to a localization equals the roof
    // comparison of the restricted roof
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let f = FpModule::free(r.clone(), 1);
    let q1 = LocalChart::on_single_piece("Q1", r.clone(), f.clone(), 1, PolyMatrix::identity(1, 1))
        .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        r.clone(),
        f,
        2,
        PolyMatrix::new(1, 2, vec![r.one(), r.parse("x").unwrap()]),
    )
    .unwrap();
    let a = SheafOnF::Full;
    let roof = build_roof(&q1, &q2).unwrap();
    let h = roof_comparison(&roof, &a, 0).unwrap();
    // restrict both charts to x != 0 and compare there
    let loc = r.parse("x").unwrap();
    let (r1, _) = restrict_chart(&q1, &loc).unwrap();
    let (r2, _) = restrict_chart(&q2, &loc).unwrap();
    let roof_restricted = build_roof(&r1, &r2).unwrap();
    let h_restricted = roof_comparison(&roof_restricted, &a, 0).unwrap();
    // push the global comparison into the localization
    let step = &r1.from_piece;
    let pushed = base_change(&h.source, step);
    let pushed_map = sheafstack::module::ModuleMap::new(
        pushed,
        base_change(&h.target, step),
        h.matrix.map(|p| step.apply(p)),
    )
    .unwrap();
    let reinterpreted = sheafstack::module::ModuleMap::new(
        h_restricted.source.clone(),
        h_restricted.target.clone(),
        pushed_map.matrix.clone(),
    )
    .unwrap();
    assert!(reinterpreted.equals(&h_restricted));
}

#[test]
fn inconsistent_substack_data_is_reported() {
    // registering a restriction value that is not the pullback fails the
    // compatibility check of the comparison map
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let q = free_chart("Q", &r, 1);
    let (restricted, gamma) = restrict_chart(&q, &r.parse("x").unwrap()).unwrap();
    let y_total = q.fiber_polys()[0].clone();
    let mut ideals = std::collections::BTreeMap::new();
    ideals.insert("Q".to_string(), vec![y_total]);
    // on the restriction, claim the whole ring instead of the pullback
    ideals.insert(restricted.name.clone(), vec![]);
    let a = SheafOnF::Substack(ideals);
    let result = comparison_map(&gamma, &a, 0);
    assert!(matches!(
        result,
        Err(sheafstack::error::Error::InconsistentSheaf(_))
    ));
}

#[test]
fn chart_computations_are_thread_safe_and_deterministic() {
    // the same chart homology computed concurrently in several threads
    // agrees with the sequential result
    let base = dual_numbers();
    let q = free_chart("Q", &base, 2);
    let a = SheafOnF::ZeroSection;
    let sequential: Vec<usize> = (0..=2)
        .map(|i| koszul_homology_chart(&q, &a, i).unwrap().base_module.gens())
        .collect();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let q = q.clone();
            std::thread::spawn(move || {
                let a = SheafOnF::ZeroSection;
                (0..=2)
                    .map(|i| koszul_homology_chart(&q, &a, i).unwrap().base_module.gens())
                    .collect::<Vec<usize>>()
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), sequential);
    }
}

#[test]
fn glue_over_genuinely_overlapping_cover() {
    // the two-point locus covered by the whole space (x+1 is a unit
    // nowhere vanishing) and by the x != 0 locus: the overlap is one
    // point and the glued comparison there is exercised for real
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let space = SpacePresentation::principal_cover(
        r.clone(),
        vec![vec![r.parse("x + 1").unwrap()], vec![r.parse("x").unwrap()]],
    );
    let f0 = FpModule::free(space.piece(0).clone(), 1);
    let f1 = FpModule::free(space.piece(1).clone(), 1);
    let q0 = LocalChart::new(
        "Q0",
        space.clone(),
        0,
        vec![],
        &f0,
        1,
        PolyMatrix::identity(1, f0.ring().nvars()),
    )
    .unwrap();
    // rank-2 presentation on the smaller piece
    let ring1 = space.piece(1).clone();
    let q1 = LocalChart::new(
        "Q1",
        space.clone(),
        1,
        vec![],
        &f1,
        2,
        PolyMatrix::new(1, 2, vec![ring1.one(), ring1.parse("x").unwrap()]),
    )
    .unwrap();
    let glued = glue_koszul(&[q0.clone(), q1.clone()], &SheafOnF::Full, 0).unwrap();
    assert_eq!(glued.gluing.len(), 1);
    let g = glued.gluing.get(&(0, 1)).unwrap();
    assert!(g.is_isomorphism());
    // inclusion–exclusion over the cover gives the total length 2
    let family = sheafstack::ktheory::gysin(&[q0, q1], &SheafOnF::Full).unwrap();
    assert_eq!(family.euler_characteristic().unwrap(), 2);
}

#[test]
fn cocycle_on_three_localized_charts() {
    // three unit localizations of the doubled point: every pairwise and
    // triple overlap is nonempty, so the cocycle check runs through the
    // full tower bookkeeping
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2").unwrap()]);
    let space = SpacePresentation::principal_cover(
        r.clone(),
        vec![
            vec![r.parse("2").unwrap()],
            vec![r.parse("1 + x").unwrap()],
            vec![r.parse("3 + x").unwrap()],
        ],
    );
    let charts: Vec<LocalChart> = (0..3)
        .map(|i| {
            let f = FpModule::free(space.piece(i).clone(), 1);
            LocalChart::new(
                format!("Q{}", i),
                space.clone(),
                i,
                vec![],
                &f,
                1,
                PolyMatrix::identity(1, f.ring().nvars()),
            )
            .unwrap()
        })
        .collect();
    let glued = glue_koszul(&charts, &SheafOnF::Full, 0).unwrap();
    assert_eq!(glued.gluing.len(), 3);
    for m in &glued.modules {
        assert_eq!(length(m), Some(2));
    }
}

#[test]
fn roof_shares_one_value_across_consistent_substack_data() {
    // a substack registered on both charts with genuinely different
    // generator lists for the same ideal: the roof must accept it
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let f = FpModule::free(r.clone(), 1);
    let q1 = LocalChart::on_single_piece("Q1", r.clone(), f.clone(), 1, PolyMatrix::identity(1, 1))
        .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        r.clone(),
        f,
        2,
        PolyMatrix::new(1, 2, vec![r.one(), r.parse("x").unwrap()]),
    )
    .unwrap();
    // the graph of the section x inside each bundle: on Q1 the ideal
    // (y1 - x); on Q2 the matching pullback-consistent data
    let y_q1 = q1.total.parse("y1 - x").unwrap();
    // the roof pulls q1's fiber variable to w1 + x*w2 and q2's to
    // (w1, w2); consistency forces the Q2 ideal (y1 + x*y2 - x)
    let y_q2 = q2.total.parse("y1 + x*y2 - x").unwrap();
    let mut ideals = std::collections::BTreeMap::new();
    ideals.insert("Q1".into(), vec![y_q1]);
    ideals.insert("Q2".into(), vec![y_q2]);
    let a = SheafOnF::Substack(ideals);
    for i in 0..=1usize {
        let h = roof_comparison(&build_roof(&q1, &q2).unwrap(), &a, i).unwrap();
        assert!(h.is_isomorphism(), "degree {}", i);
    }
}

#[test]
fn roof_rejects_mismatched_substack_data() {
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let f = FpModule::free(r.clone(), 1);
    let q1 = LocalChart::on_single_piece("Q1", r.clone(), f.clone(), 1, PolyMatrix::identity(1, 1))
        .unwrap();
    let q2 = LocalChart::on_single_piece(
        "Q2",
        r.clone(),
        f,
        2,
        PolyMatrix::new(1, 2, vec![r.one(), r.parse("x").unwrap()]),
    )
    .unwrap();
    let mut ideals = std::collections::BTreeMap::new();
    ideals.insert("Q1".into(), vec![q1.total.parse("y1 - x").unwrap()]);
    // wrong data on the second chart
    ideals.insert("Q2".into(), vec![q2.total.parse("y1").unwrap()]);
    let a = SheafOnF::Substack(ideals);
    let result = roof_comparison(&build_roof(&q1, &q2).unwrap(), &a, 0);
    assert!(matches!(
        result,
        Err(sheafstack::error::Error::InconsistentSheaf(_))
    ));
}

#[test]
fn assignment_form_with_registered_compat() {
    // assignment-form data on a rank-2 to rank-1 morphism: the pullback
    // presentation differs from the registered one by a unit, recorded in
    // the compatibility matrix
    let base = dual_numbers();
    let fsheaf = FpModule::free(base.clone(), 1);
    let q1 = LocalChart::on_single_piece(
        "Q1",
        base.clone(),
        fsheaf.clone(),
        2,
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    let q2 = LocalChart::on_single_piece("Q2", base.clone(), fsheaf, 1, PolyMatrix::identity(1, 1))
        .unwrap();
    let gamma = ChartMorphism::new(
        q1.clone(),
        q2.clone(),
        RingMap::identity(base.clone()),
        PolyMatrix::new(1, 2, vec![base.one(), base.parse("x").unwrap()]),
    )
    .unwrap();
    // value on Q2: O/(y1); on Q1: the pullback scaled by the unit 2
    let v2 = FpModule::cyclic(q2.total.clone(), &[q2.total.parse("y1").unwrap()]);
    let v1 = FpModule::cyclic(q1.total.clone(), &[q1.total.parse("y1 + x*y2").unwrap()]);
    let mut values = std::collections::BTreeMap::new();
    values.insert("Q1".to_string(), v1);
    values.insert("Q2".to_string(), v2);
    let mut compat = std::collections::BTreeMap::new();
    compat.insert(
        ("Q1".to_string(), "Q2".to_string()),
        PolyMatrix::new(1, 1, vec![q1.total.parse("2").unwrap()]),
    );
    let a = SheafOnF::Assignment { values, compat };
    for i in 0..=1usize {
        let cm = comparison_map(&gamma, &a, i).unwrap();
        assert!(cm.map.is_isomorphism(), "degree {}", i);
    }
}

#[test]
fn glued_substack_over_overlapping_cover() {
    // the locus of x*y inside the trivial line bundle over two points:
    // glued through a cover whose overlap is one point
    let r0 = poly_ring(&["x"]);
    let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - x").unwrap()]);
    let space = SpacePresentation::principal_cover(
        r.clone(),
        vec![vec![r.parse("x + 1").unwrap()], vec![r.parse("x").unwrap()]],
    );
    let charts: Vec<LocalChart> = (0..2)
        .map(|i| {
            let f = FpModule::free(space.piece(i).clone(), 1);
            LocalChart::new(
                format!("Q{}", i),
                space.clone(),
                i,
                vec![],
                &f,
                1,
                PolyMatrix::identity(1, f.ring().nvars()),
            )
            .unwrap()
        })
        .collect();
    let mut ideals = std::collections::BTreeMap::new();
    for q in &charts {
        ideals.insert(q.name.clone(), vec![q.total.parse("x*y1").unwrap()]);
    }
    let a = SheafOnF::Substack(ideals);
    let family = sheafstack::ktheory::gysin(&charts, &a).unwrap();
    // hand count: H^0 has lengths (2, 1) with overlap 1; H^1 has lengths
    // (1, 1) with overlap 1; total chi = 2 - 1 = 1
    assert_eq!(family.euler_characteristic().unwrap(), 1);
}
