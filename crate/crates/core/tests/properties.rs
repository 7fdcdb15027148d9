use std::f64::consts::PI;

use deltaprime_core::eigen::{lowest_eigenpairs, SolverOptions};
use deltaprime_core::forms::{
    apply_unitary, assemble_delta, assemble_delta_prime, assemble_robin, embed_continuous, BoundaryPolicy,
};
use deltaprime_core::geometry::{
    adjacency_graph, build_canonical_partition, chromatic_colouring, edge_constant, phase_assignment, CanonicalPartition,
    InteractionData, Partition,
};
use deltaprime_core::mesh::{mirror_nodes, reflect_split, triangulate, Axis};
use deltaprime_core::Complex64;
use proptest::prelude::*;

fn canonical(r: f64) -> Vec<CanonicalPartition> {
    vec![
        CanonicalPartition::HalfPlane { box_radius: r },
        CanonicalPartition::Wedge { box_radius: r, angle: 2.0 * PI / 3.0 },
        CanonicalPartition::Star3 { box_radius: r },
        CanonicalPartition::LineWithBump { box_radius: r, bump: vec![[-1.0, 1.0], [1.0, 1.0], [1.0, 2.0], [-1.0, 2.0]] },
        CanonicalPartition::Grid { box_radius: r, nx: 2, ny: 3 },
        CanonicalPartition::K4Cells { box_radius: r, radius: 0.5 * r },
        CanonicalPartition::Ngon { box_radius: r, sides: 7, radius: 0.5 * r },
    ]
}

fn arb_partition() -> impl Strategy<Value = CanonicalPartition> {
    let r = 3.0..12.0f64;
    prop_oneof![
        r.clone().prop_map(|r| CanonicalPartition::HalfPlane { box_radius: r }),
        (r.clone(), 0.2..PI).prop_map(|(r, a)| CanonicalPartition::Wedge { box_radius: r, angle: a }),
        r.clone().prop_map(|r| CanonicalPartition::Star3 { box_radius: r }),
        (r.clone(), 1usize..5, 1usize..5).prop_map(|(r, nx, ny)| CanonicalPartition::Grid { box_radius: r, nx, ny }),
        (r.clone(), 0.1..0.9f64).prop_map(|(r, s)| CanonicalPartition::K4Cells { box_radius: r, radius: s * r }),
        (r.clone(), 3usize..20, 0.1..0.9f64).prop_map(|(r, n, s)| CanonicalPartition::Ngon { box_radius: r, sides: n, radius: s * r }),
        (r, 0.1..0.4f64, 0.1..0.4f64).prop_map(|(r, w, h)| CanonicalPartition::LineWithBump {
            box_radius: r,
            bump: vec![[-w * r, h * r], [w * r, h * r], [0.0, 2.0 * h * r]],
        }),
    ]
}

fn build(c: &CanonicalPartition) -> Partition {
    build_canonical_partition(c).unwrap()
}

fn lcg(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partitions_tile_the_box(c in arb_partition()) {
        let p = build(&c);
        let total: f64 = (1..=p.subdomain_count()).map(|k| p.subdomain_area(k)).sum();
        prop_assert!((total - p.domain_area()).abs() <= 1e-9 * p.domain_area());
        for i in p.interfaces() {
            prop_assert!(i.k < i.l && i.length > 0.0);
        }
    }

    #[test]
    fn meshes_are_conforming(c in arb_partition(), levels in 0usize..3) {
        let p = build(&c);
        let m = triangulate(&p, levels).unwrap();
        prop_assert!(m.check(&p).is_ok());
    }

    #[test]
    fn phase_separation(c in arb_partition()) {
        let p = build(&c);
        let col = chromatic_colouring(&adjacency_graph(&p)).unwrap();
        let d = InteractionData::uniform(&p, 1.0, 1.0).unwrap();
        let ph = phase_assignment(&p, &col, &d).unwrap();
        let bound = edge_constant(col.chi).unwrap();
        for i in p.interfaces() {
            prop_assert!((ph.phase(i.k) - ph.phase(i.l)).norm_sqr() >= bound - 1e-12);
        }
    }

    #[test]
    fn form_ordering_for_admissible_beta(idx in 0usize..7, s in 0.05..1.0f64, alpha in 0.2..3.0f64, seed in any::<u64>()) {
        let p = build(&canonical(4.0)[idx]);
        let col = chromatic_colouring(&adjacency_graph(&p)).unwrap();
        let beta = s * edge_constant(col.chi).unwrap() / alpha;
        let d = InteractionData::uniform(&p, alpha, beta).unwrap();
        let ph = phase_assignment(&p, &col, &d).unwrap();
        let m = triangulate(&p, 2).unwrap();
        let cf = assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let f = lcg(seed, cf.dim());
        let g: Vec<Complex64> = embed_continuous(&bf, &cf, &f).unwrap().into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let lhs = bf.value_complex(&apply_unitary(&ph, &bf, &g).unwrap());
        let rhs = cf.value(&f);
        let scale = cf.stiffness.quad_form(&f) + cf.interaction.quad_form(&f).abs() + cf.mass(&f);
        prop_assert!(lhs <= rhs + 1e-11 * scale, "{lhs} > {rhs}");
    }

    #[test]
    fn reflection_split_recombines(angle in 0.3..PI, levels in 1usize..4, seed in any::<u64>()) {
        let p = build(&CanonicalPartition::Wedge { box_radius: 5.0, angle });
        let m = triangulate(&p, levels).unwrap();
        let f = lcg(seed, m.node_count());
        let (e, o) = reflect_split(&m, Axis::VERTICAL, &f).unwrap();
        let map = mirror_nodes(&m, Axis::VERTICAL).unwrap();
        for i in 0..f.len() {
            prop_assert!((e[i] + o[i] - f[i]).abs() <= 4.0 * f64::EPSILON);
            prop_assert_eq!(e[i], e[map[i]]);
            prop_assert_eq!(o[i], -o[map[i]]);
        }
        let form = assemble_robin(&m, &[1], 0.0, BoundaryPolicy::Neumann, &[]).unwrap();
        let (fv, ev, ov) = (form.from_nodal(&f), form.from_nodal(&e), form.from_nodal(&o));
        prop_assert!(form.stiffness.bilinear(&ev, &ov).abs() <= 1e-10 * form.stiffness.quad_form(&fv));
        prop_assert!(form.m.bilinear(&ev, &ov).abs() <= 1e-10 * form.m.quad_form(&fv));
    }

    #[test]
    fn dirichlet_constraint_never_lowers_lambda(idx in 0usize..7, pick in prop::collection::vec(any::<prop::sample::Index>(), 1..20)) {
        let p = build(&canonical(4.0)[idx]);
        let m = triangulate(&p, 2).unwrap();
        let free = assemble_robin(&m, &[1], 0.5, BoundaryPolicy::Dirichlet, &[]).unwrap();
        let nodes: Vec<usize> = pick.iter().map(|i| i.index(m.node_count())).collect();
        let pinned = assemble_robin(&m, &[1], 0.5, BoundaryPolicy::Dirichlet, &nodes).unwrap();
        prop_assume!(pinned.dim() > 0);
        let opts = SolverOptions { k: 1, tol: 1e-10, ..SolverOptions::default() };
        let a = lowest_eigenpairs(&free.a, &free.m, &opts).unwrap().eigenvalues[0];
        let b = lowest_eigenpairs(&pinned.a, &pinned.m, &opts).unwrap().eigenvalues[0];
        prop_assert!(b >= a - 1e-9 * a.abs().max(1.0), "{b} < {a}");
    }
}

#[test]
fn edge_constant_decreases() {
    let v: Vec<f64> = (2..60).map(|c| edge_constant(c).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn assembled_matrices_are_symmetric() {
    for c in canonical(4.0) {
        let p = build(&c);
        let d = InteractionData::uniform(&p, 1.3, 0.7).unwrap();
        let m = triangulate(&p, 2).unwrap();
        for f in [assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap(), assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap()] {
            assert_eq!(f.a.asymmetry(), 0.0, "{}", c.name());
            assert_eq!(f.m.asymmetry(), 0.0, "{}", c.name());
            let dense = deltaprime_core::eigen::Dense::from_rows(f.dim(), f.m.to_dense());
            assert!(dense.cholesky().is_ok(), "{}", c.name());
        }
    }
}

/// Lowest eigenvalue of the δ-form stays above `−α²/(4 sin²(φ/2))` for the
/// sharpest corner angle `φ`. Only geometries whose subdomains are truncated
/// wedges qualify: a bounded cell with Robin sides on opposite edges sits
/// strictly below the corner bound.
#[test]
fn semibounded_by_sharpest_corner() {
    let alpha = 1.5;
    let corners = [PI, 2.0 * PI / 3.0, 2.0 * PI / 3.0];
    for (c, phi) in canonical(6.0).iter().zip(corners) {
        let p = build(c);
        let d = InteractionData::uniform(&p, alpha, 1.0).unwrap();
        let m = triangulate(&p, 3).unwrap();
        let f = assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let lam = lowest_eigenpairs(&f.a, &f.m, &SolverOptions { k: 1, tol: 1e-10, ..SolverOptions::default() }).unwrap().eigenvalues[0];
        let bound = -alpha * alpha / (4.0 * (0.5 * phi).sin().powi(2));
        assert!(lam >= bound - 1e-9, "{}: {lam} < {bound}", c.name());
    }
}

#[test]
fn refinement_lowers_eigenvalues() {
    for c in canonical(4.0) {
        let p = build(&c);
        let d = InteractionData::uniform(&p, 1.0, 2.0).unwrap();
        let opts = SolverOptions { k: 3, tol: 1e-11, ..SolverOptions::default() };
        let mut prev: [Option<Vec<f64>>; 2] = [None, None];
        for levels in 1..4 {
            let m = triangulate(&p, levels).unwrap();
            let forms = [assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap(), assemble_delta_prime(&m, &d, BoundaryPolicy::Dirichlet).unwrap()];
            for (slot, f) in prev.iter_mut().zip(forms) {
                let l = lowest_eigenpairs(&f.a, &f.m, &opts).unwrap().eigenvalues;
                if let Some(q) = slot {
                    for (a, b) in l.iter().zip(q.iter()) {
                        assert!(*a <= b + 1e-9 * b.abs().max(1.0), "{} level {levels}: {a} > {b}", c.name());
                    }
                }
                *slot = Some(l);
            }
        }
    }
}

#[test]
fn seeded_solves_are_bitwise_reproducible() {
    let p = build(&CanonicalPartition::Star3 { box_radius: 5.0 });
    let d = InteractionData::uniform(&p, 1.0, 3.0).unwrap();
    let m = triangulate(&p, 5).unwrap();
    let f = assemble_delta_prime(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
    let opts = SolverOptions { k: 6, seed: 99, ..SolverOptions::default() };
    let a = lowest_eigenpairs(&f.a, &f.m, &opts).unwrap();
    let b = lowest_eigenpairs(&f.a, &f.m, &opts).unwrap();
    assert_eq!(a.eigenvalues.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.eigenvalues.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.iterations, b.iterations);
}
