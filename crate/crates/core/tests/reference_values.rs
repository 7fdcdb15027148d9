//! Frozen values. Closed forms are checked against the constants they are
//! stated with; discrete values were produced by an independent evaluation
//! (mpmath at 50 digits for the transcendental roots, hand assembly for the
//! small meshes) and copied here.

use std::f64::consts::PI;

use deltaprime_core::closedform::{
    abc_inequality_check, halfplane_bottoms, interval_delta_prime, m_functions, minimax_star, omega_star, ordering_impossible,
    star_delta_bottom, wedge_trace_bound,
};
use deltaprime_core::forms::{
    assemble_delta, assemble_delta_prime, indicator_form_value, rayleigh, sample_test_function, BoundaryPolicy, TestFamily, TestVector,
};
use deltaprime_core::geometry::{
    adjacency_graph, build_canonical_partition, chromatic_colouring, edge_constant, CanonicalPartition, InteractionData,
};
use deltaprime_core::mesh::triangulate;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn half_plane_thresholds() {
    assert_eq!(halfplane_bottoms(1.0, 1.0).unwrap(), (-0.25, -4.0));
    assert!(ordering_impossible(1.0, 5.0).unwrap());
    let (d, dp) = halfplane_bottoms(1.0, 5.0).unwrap();
    assert!(close(dp, -0.16, 1e-15) && dp > d);
}

#[test]
fn star_and_wedge_constants() {
    assert_eq!(star_delta_bottom(1.0).unwrap(), -1.0 / 3.0);
    for alpha in [0.3, 1.0, 2.5, 7.0] {
        assert_eq!(wedge_trace_bound(alpha / 2.0, 2.0 * PI / 3.0).unwrap(), star_delta_bottom(alpha).unwrap());
    }
}

#[test]
fn edge_constants() {
    assert!(close(edge_constant(2).unwrap(), 4.0, 1e-15));
    assert!(close(edge_constant(3).unwrap(), 3.0, 1e-15));
    assert!(close(edge_constant(4).unwrap(), 2.0, 1e-15));
}

#[test]
fn chromatic_numbers() {
    let chi = |c: CanonicalPartition| chromatic_colouring(&adjacency_graph(&build_canonical_partition(&c).unwrap())).unwrap().chi;
    assert_eq!(chi(CanonicalPartition::Star3 { box_radius: 6.0 }), 3);
    assert_eq!(chi(CanonicalPartition::HalfPlane { box_radius: 6.0 }), 2);
    assert_eq!(chi(CanonicalPartition::K4Cells { box_radius: 6.0, radius: 2.0 }), 4);
    assert_eq!(chi(CanonicalPartition::Grid { box_radius: 6.0, nx: 3, ny: 3 }), 2);
}

#[test]
fn star_partition_shape() {
    let p = build_canonical_partition(&CanonicalPartition::Star3 { box_radius: 6.0 }).unwrap();
    assert_eq!(p.subdomain_count(), 3);
    assert_eq!(p.interfaces().len(), 3);
    for i in p.interfaces() {
        assert!(close(i.length, 6.0, 1e-12));
    }
}

#[test]
fn bump_partition_shape() {
    let bump = vec![[-1.0, 1.0], [1.0, 1.0], [1.0, 3.0], [-1.0, 3.0]];
    let p = build_canonical_partition(&CanonicalPartition::LineWithBump { box_radius: 8.0, bump }).unwrap();
    assert_eq!(p.subdomain_count(), 3);
    let total: f64 = p.interfaces().iter().map(|i| i.length).sum();
    assert!(close(total, 16.0 + 8.0, 1e-12));
}

#[test]
fn minimax_constants() {
    assert_eq!(m_functions(0.0, 1.0).unwrap(), (16.0 / 3.0, 4.0));
    assert!(close(omega_star(0.5).unwrap(), 0.094_080_766_295, 1e-11));
    for t in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let (m1, m2) = m_functions(omega_star(t).unwrap(), t).unwrap();
        assert!(close(m1, m2, 1e-12 * m1.abs()), "t = {t}");
    }
    let mm = minimax_star(1e-12).unwrap();
    let expected = (26.0 / (6.0 * 3f64.sqrt() + 1.0)).powi(2);
    assert!(close(mm.value, expected, 1e-12));
    assert!(close(mm.value, 5.208_630, 1e-6));
    assert!(close(mm.printed_value, 4.356_316, 1e-6));
    assert!(mm.discrepancy);
    assert_eq!(mm.branch_t_ge_1, 16.0 / 3.0);
}

#[test]
fn interval_roots() {
    let r = interval_delta_prime(2.0, 40.0).unwrap();
    assert!(close(r.epsilon, -1.0, 1e-10) && r.gap_to_threshold < 0.0);
    // mpmath: findroot(lambda k: 2*coth(k) - 2*k, 1.2)
    let r = interval_delta_prime(2.0, 1.0).unwrap();
    assert!(close(r.k_rate, 1.199_678_640_257_734, 1e-12), "{}", r.k_rate);
    assert!(close(r.epsilon, -1.439_228_839_890_645, 1e-11), "{}", r.epsilon);
}

#[test]
fn abc_tight_case() {
    let e = [1.0];
    let z = [0.0];
    let r = abc_inequality_check([&z, &z, &z], [&e, &e, &e], 0.0, 1.0).unwrap();
    assert_eq!((r.s, r.bound), (12.0, 12.0));
    let r = abc_inequality_check([&z, &z, &z], [&e, &e, &e], 0.5, 0.25).unwrap();
    assert!(close(r.bound, 12.0 + 9.0 * 0.5 / 0.25, 1e-12));
}

#[test]
fn coarse_half_plane_mesh() {
    let p = build_canonical_partition(&CanonicalPartition::HalfPlane { box_radius: 1.0 }).unwrap();
    let m = triangulate(&p, 0).unwrap();
    assert_eq!(m.triangles().len(), 4);
    assert_eq!(m.interface_edges().len(), 1);
    let d = InteractionData::uniform(&p, 1.0, 1.0).unwrap();
    let f = assemble_delta(&m, &d, BoundaryPolicy::Neumann).unwrap();
    let ones = vec![1.0; f.dim()];
    assert!(close(rayleigh(&f, &ones).unwrap(), -0.5, 1e-15));
}

#[test]
fn indicator_values() {
    let p = build_canonical_partition(&CanonicalPartition::Star3 { box_radius: 6.0 }).unwrap();
    let d = InteractionData::uniform(&p, 1.0, 2.0).unwrap();
    let m = triangulate(&p, 2).unwrap();
    let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
    assert!(close(indicator_form_value(&bf, 1).unwrap(), -6.0, 1e-12));

    let p = build_canonical_partition(&CanonicalPartition::Ngon { box_radius: 6.0, sides: 16, radius: 2.0 }).unwrap();
    let d = InteractionData::uniform(&p, 1.0, 2.0).unwrap();
    let m = triangulate(&p, 2).unwrap();
    let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
    let perimeter = 16.0 * 2.0 * 2.0 * (PI / 16.0).sin();
    assert!(close(indicator_form_value(&bf, 1).unwrap(), -perimeter / 2.0, 1e-12 * perimeter));
}

#[test]
fn transverse_profile_rayleigh() {
    let p = build_canonical_partition(&CanonicalPartition::HalfPlane { box_radius: 12.0 }).unwrap();
    let d = InteractionData::uniform(&p, 1.0, 1.0).unwrap();
    for levels in [3, 4, 5] {
        let m = triangulate(&p, levels).unwrap();
        let f = assemble_delta(&m, &d, BoundaryPolicy::Neumann).unwrap();
        let TestVector::Real(v) = sample_test_function(&m, &f, &TestFamily::TransverseExp { alpha: 1.0 }).unwrap() else {
            panic!("expected a real vector")
        };
        let q = rayleigh(&f, &v).unwrap();
        assert!(q > -0.25 && q <= -0.23, "levels {levels}: {q}");
    }
}
