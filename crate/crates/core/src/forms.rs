//! P1 finite element assembly of the δ-form on `H¹` and the δ′-form on the
//! broken space `⊕ H¹(Ω_k)`, together with the phase unitary and the analytic
//! test functions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cutoff::bump;
use crate::geometry::{InteractionData, PhaseAssignment};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{invalid, Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Space {
    Continuous,
    Broken,
}

/// Treatment of the outer boundary of the computational box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundaryPolicy {
    #[default]
    Dirichlet,
    Neumann,
}

/// Degrees of freedom as `(subdomain, node)` pairs. In the continuous space
/// the subdomain is recorded as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    dofs: Vec<(usize, usize)>,
    per_node: Vec<Vec<(usize, usize)>>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    /// `(subdomain, node)` of a dof.
    pub fn info(&self, dof: usize) -> (usize, usize) {
        self.dofs[dof]
    }

    /// Dof of `node` seen from `subdomain` (ignored in the continuous space).
    pub fn dof(&self, subdomain: usize, node: usize) -> Option<usize> {
        let list = &self.per_node[node];
        match list.as_slice() {
            [(0, d)] => Some(*d),
            _ => list.iter().find(|(s, _)| *s == subdomain).map(|(_, d)| *d),
        }
    }

    /// All `(subdomain, dof)` copies of a node.
    pub fn copies(&self, node: usize) -> &[(usize, usize)] {
        &self.per_node[node]
    }
}

/// Sparse pencil `(A, M)` of a discretized quadratic form.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    /// Form matrix `K − I`.
    pub a: CsrMatrix,
    pub m: CsrMatrix,
    /// Gradient part `K`.
    pub stiffness: CsrMatrix,
    /// Interaction part `I` (positive semidefinite for nonnegative strengths).
    pub interaction: CsrMatrix,
    pub dofs: DofMap,
    pub space: Space,
    pub boundary: BoundaryPolicy,
}

impl DiscreteForm {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// `fᵀ A f`.
    pub fn value(&self, f: &[f64]) -> f64 {
        self.a.quad_form(f)
    }

    /// Conjugate-bilinear form value of a complex vector.
    pub fn value_complex(&self, f: &[Complex64]) -> f64 {
        let (re, im) = split(f);
        self.a.quad_form(&re) + self.a.quad_form(&im)
    }

    pub fn mass(&self, f: &[f64]) -> f64 {
        self.m.quad_form(f)
    }

    pub fn mass_complex(&self, f: &[Complex64]) -> f64 {
        let (re, im) = split(f);
        self.m.quad_form(&re) + self.m.quad_form(&im)
    }

    /// Dof vector sampled from a function of position.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.dim()).map(|d| f(mesh.nodes()[self.dofs.info(d).1])).collect()
    }

    /// Continuous dof vector from a vector on all mesh nodes.
    pub fn from_nodal(&self, nodal: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|d| nodal[self.dofs.info(d).1]).collect()
    }

    /// Vector on all mesh nodes from a continuous dof vector (zero at removed
    /// nodes).
    pub fn to_nodal(&self, f: &[f64]) -> Result<Vec<f64>> {
        if self.space != Space::Continuous {
            return Err(Error::DofMismatch("nodal values need the continuous space".into()));
        }
        let mut out = alloc::vec![0.0; self.dofs.node_count()];
        for (d, &v) in f.iter().enumerate() {
            out[self.dofs.info(d).1] = v;
        }
        Ok(out)
    }
}

fn split(f: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (f.iter().map(|z| z.re).collect(), f.iter().map(|z| z.im).collect())
}

/// Element stiffness `K_ij = (e_i · e_j)/(4|T|)` with `e_i` the edge opposite
/// to vertex `i`.
fn element_stiffness(p: [Point; 3]) -> ([[f64; 3]; 3], f64) {
    let e = |i: usize| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [b[0] - a[0], b[1] - a[1]]
    };
    let edges = [e(0), e(1), e(2)];
    let area = 0.5 * (edges[2][0] * edges[1][1] - edges[2][1] * edges[1][0]).abs();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = (edges[i][0] * edges[j][0] + edges[i][1] * edges[j][1]) / (4.0 * area);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    (k, area)
}

fn edge_mass(len: f64) -> [[f64; 2]; 2] {
    let d = len / 3.0;
    let o = len / 6.0;
    [[d, o], [o, d]]
}

struct Assembly {
    a: TripletBuilder,
    m: TripletBuilder,
    k: TripletBuilder,
    i: TripletBuilder,
}

impl Assembly {
    fn new(n: usize) -> Self {
        Assembly { a: TripletBuilder::new(n, n), m: TripletBuilder::new(n, n), k: TripletBuilder::new(n, n), i: TripletBuilder::new(n, n) }
    }

    fn element(&mut self, dofs: [Option<usize>; 3], pts: [Point; 3]) {
        let (k, area) = element_stiffness(pts);
        for r in 0..3 {
            for c in 0..3 {
                if let (Some(dr), Some(dc)) = (dofs[r], dofs[c]) {
                    let mass = if r == c { area / 6.0 } else { area / 12.0 };
                    self.a.push(dr, dc, k[r][c]);
                    self.k.push(dr, dc, k[r][c]);
                    self.m.push(dr, dc, mass);
                }
            }
        }
    }

    /// Adds `−w · (Σ s_i u_{d_i})ᵀ E (Σ s_j u_{d_j})` style couplings: each
    /// entry of `terms` is `(dof, sign, local endpoint)`.
    fn coupling(&mut self, terms: &[(Option<usize>, f64, usize)], weight: f64, len: f64) {
        if weight == 0.0 {
            return;
        }
        let e = edge_mass(len);
        for &(dr, sr, lr) in terms {
            for &(dc, sc, lc) in terms {
                if let (Some(dr), Some(dc)) = (dr, dc) {
                    let v = weight * sr * sc * e[lr][lc];
                    self.a.push(dr, dc, -v);
                    self.i.push(dr, dc, v);
                }
            }
        }
    }

    fn finish(self, dofs: DofMap, space: Space, boundary: BoundaryPolicy) -> DiscreteForm {
        DiscreteForm { a: self.a.build(), m: self.m.build(), stiffness: self.k.build(), interaction: self.i.build(), dofs, space, boundary }
    }
}

fn continuous_dofs(mesh: &Mesh, bc: BoundaryPolicy, keep: impl Fn(usize) -> bool) -> DofMap {
    let mut dofs = Vec::new();
    let mut per_node = alloc::vec![Vec::new(); mesh.node_count()];
    for node in 0..mesh.node_count() {
        if keep(node) && !(bc == BoundaryPolicy::Dirichlet && mesh.is_outer_boundary(node)) {
            per_node[node].push((0, dofs.len()));
            dofs.push((0, node));
        }
    }
    DofMap { dofs, per_node }
}

fn broken_dofs(mesh: &Mesh, bc: BoundaryPolicy) -> DofMap {
    let subs = mesh.node_subdomains();
    let mut dofs = Vec::new();
    let mut per_node = alloc::vec![Vec::new(); mesh.node_count()];
    for node in 0..mesh.node_count() {
        if bc == BoundaryPolicy::Dirichlet && mesh.is_outer_boundary(node) {
            continue;
        }
        for &s in &subs[node] {
            per_node[node].push((s, dofs.len()));
            dofs.push((s, node));
        }
    }
    DofMap { dofs, per_node }
}

/// δ-form `‖∇f‖² − Σ α_kl ‖f|Σ_kl‖²` on continuous P1 functions.
pub fn assemble_delta(mesh: &Mesh, d: &InteractionData, bc: BoundaryPolicy) -> Result<DiscreteForm> {
    assemble_delta_with(mesh, &d.alpha, bc)
}

/// δ-form with strengths given directly per interface id, e.g. `α_Z`.
pub fn assemble_delta_with(mesh: &Mesh, alpha: &BTreeMap<usize, f64>, bc: BoundaryPolicy) -> Result<DiscreteForm> {
    for id in mesh.interface_lengths().keys() {
        if !alpha.contains_key(id) {
            return Err(Error::MissingInterface(*id));
        }
    }
    let dofs = continuous_dofs(mesh, bc, |_| true);
    let mut asm = Assembly::new(dofs.len());
    let nodes = mesh.nodes();
    for t in mesh.triangles() {
        asm.element(t.map(|v| dofs.dof(0, v)), t.map(|v| nodes[v]));
    }
    for e in mesh.interface_edges() {
        let [a, b] = e.nodes;
        asm.coupling(&[(dofs.dof(0, a), 1.0, 0), (dofs.dof(0, b), 1.0, 1)], alpha[&e.interface], e.length);
    }
    Ok(asm.finish(dofs, Space::Continuous, bc))
}

/// δ′-form `Σ_k ‖∇f_k‖² − Σ β_kl⁻¹ ‖f_k|Σ_kl − f_l|Σ_kl‖²` on the broken space.
pub fn assemble_delta_prime(mesh: &Mesh, d: &InteractionData, bc: BoundaryPolicy) -> Result<DiscreteForm> {
    for id in mesh.interface_lengths().keys() {
        d.beta(*id)?;
    }
    let dofs = broken_dofs(mesh, bc);
    let mut asm = Assembly::new(dofs.len());
    let nodes = mesh.nodes();
    for (t, &s) in mesh.triangles().iter().zip(mesh.triangle_domains()) {
        asm.element(t.map(|v| dofs.dof(s, v)), t.map(|v| nodes[v]));
    }
    for e in mesh.interface_edges() {
        let [a, b] = e.nodes;
        let terms = [
            (dofs.dof(e.k, a), 1.0, 0),
            (dofs.dof(e.k, b), 1.0, 1),
            (dofs.dof(e.l, a), -1.0, 0),
            (dofs.dof(e.l, b), -1.0, 1),
        ];
        asm.coupling(&terms, d.beta_inverse(e.interface)?, e.length);
    }
    Ok(asm.finish(dofs, Space::Broken, bc))
}

/// Robin form `‖∇f‖²_Ω − γ‖f|∂Ω ∩ Σ‖²` on the union `Ω` of the listed
/// subdomains, with continuous P1 functions. Nodes in `constrained` are
/// removed (zero trace there) in addition to the boundary policy.
pub fn assemble_robin(mesh: &Mesh, subdomains: &[usize], gamma: f64, bc: BoundaryPolicy, constrained: &[usize]) -> Result<DiscreteForm> {
    if !gamma.is_finite() {
        return Err(invalid("gamma", "must be finite"));
    }
    let inside = |s: usize| subdomains.contains(&s);
    let mut in_region = alloc::vec![false; mesh.node_count()];
    for (t, &s) in mesh.triangles().iter().zip(mesh.triangle_domains()) {
        if inside(s) {
            for &v in t {
                in_region[v] = true;
            }
        }
    }
    for &c in constrained {
        if c < in_region.len() {
            in_region[c] = false;
        }
    }
    let dofs = continuous_dofs(mesh, bc, |v| in_region[v]);
    let mut asm = Assembly::new(dofs.len());
    let nodes = mesh.nodes();
    for (t, &s) in mesh.triangles().iter().zip(mesh.triangle_domains()) {
        if inside(s) {
            asm.element(t.map(|v| dofs.dof(0, v)), t.map(|v| nodes[v]));
        }
    }
    for e in mesh.interface_edges() {
        if inside(e.k) != inside(e.l) {
            let [a, b] = e.nodes;
            asm.coupling(&[(dofs.dof(0, a), 1.0, 0), (dofs.dof(0, b), 1.0, 1)], gamma, e.length);
        }
    }
    Ok(asm.finish(dofs, Space::Continuous, bc))
}

/// Copies every node value of a continuous vector to all of its broken
/// duplicates.
pub fn embed_continuous(bf: &DiscreteForm, cf: &DiscreteForm, f: &[f64]) -> Result<Vec<f64>> {
    if bf.space != Space::Broken || cf.space != Space::Continuous {
        return Err(Error::DofMismatch("expected a broken and a continuous form".into()));
    }
    if bf.dofs.node_count() != cf.dofs.node_count() || bf.boundary != cf.boundary {
        return Err(Error::DofMismatch("forms are built on different meshes or boundary policies".into()));
    }
    if f.len() != cf.dim() {
        return Err(Error::DimensionMismatch { expected: cf.dim(), got: f.len() });
    }
    (0..bf.dim())
        .map(|d| {
            let node = bf.dofs.info(d).1;
            cf.dofs.dof(0, node).map(|c| f[c]).ok_or_else(|| Error::DofMismatch(format!("node {node} has no continuous dof")))
        })
        .collect()
}

/// `(U_Z f)_k = z_k f_k` on the broken space.
pub fn apply_unitary(ph: &PhaseAssignment, bf: &DiscreteForm, f: &[Complex64]) -> Result<Vec<Complex64>> {
    if bf.space != Space::Broken {
        return Err(Error::DofMismatch("the phase unitary acts on the broken space".into()));
    }
    if f.len() != bf.dim() {
        return Err(Error::DimensionMismatch { expected: bf.dim(), got: f.len() });
    }
    Ok(f.iter().enumerate().map(|(d, v)| ph.phase(bf.dofs.info(d).0) * v).collect())
}

/// `fᵀAf / fᵀMf`.
pub fn rayleigh(df: &DiscreteForm, f: &[f64]) -> Result<f64> {
    if f.len() != df.dim() {
        return Err(Error::DimensionMismatch { expected: df.dim(), got: f.len() });
    }
    let mass = df.mass(f);
    if !(mass > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(df.value(f) / mass)
}

pub fn rayleigh_complex(df: &DiscreteForm, f: &[Complex64]) -> Result<f64> {
    if f.len() != df.dim() {
        return Err(Error::DimensionMismatch { expected: df.dim(), got: f.len() });
    }
    let mass = df.mass_complex(f);
    if !(mass > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(df.value_complex(f) / mass)
}

/// Broken indicator vector of `Ω_k`.
pub fn indicator_vector(bf: &DiscreteForm, k: usize) -> Result<Vec<f64>> {
    if bf.space != Space::Broken {
        return Err(Error::DofMismatch("indicators live in the broken space".into()));
    }
    if bf.boundary != BoundaryPolicy::Neumann {
        return Err(Error::IndicatorNeedsNeumann);
    }
    Ok((0..bf.dim()).map(|d| if bf.dofs.info(d).0 == k { 1.0 } else { 0.0 }).collect())
}

/// δ′-form value of the indicator of `Ω_k`, i.e. `−Σ_l β_kl⁻¹ |Σ_kl|`.
pub fn indicator_form_value(bf: &DiscreteForm, k: usize) -> Result<f64> {
    Ok(bf.value(&indicator_vector(bf, k)?))
}

/// Analytic test functions sampled at the nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum TestFamily {
    /// `φ(x₁/n) e^{−α|x₂|/2}`.
    DeformationFn { n: f64, alpha: f64 },
    /// `e^{−α|x₂|/2}`.
    TransverseExp { alpha: f64 },
    /// `n^{−1/2} φ(|x₁ − c|/n) φ(|x₂|/n) sign(x₂) e^{−2|x₂|/β} e^{ipx₁}` in the
    /// frame with origin `origin`, `x₁` along the unit vector `direction` and
    /// `x₂` along its left normal. The sign is `+` on the dofs of subdomain
    /// `positive_side` and `−` elsewhere.
    WedgePsi { n: f64, p: f64, beta: f64, centre: f64, origin: Point, direction: Point, positive_side: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl TestVector {
    pub fn into_complex(self) -> Vec<Complex64> {
        match self {
            TestVector::Real(v) => v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            TestVector::Complex(v) => v,
        }
    }
}

/// Nodal interpolation of a test family into the dofs of `df`.
///
/// Compactly supported cutoffs along `x₁` must fit inside the box; the
/// transverse factors decay exponentially and are truncated by the box.
pub fn sample_test_function(mesh: &Mesh, df: &DiscreteForm, family: &TestFamily) -> Result<TestVector> {
    let r = mesh.box_radius();
    match *family {
        TestFamily::DeformationFn { n, alpha } => {
            if df.space != Space::Continuous {
                return Err(Error::DofMismatch("deformation_fn is a continuous family".into()));
            }
            if !(n > 0.0) {
                return Err(invalid("n", "must be positive"));
            }
            if 2.0 * n > r {
                return Err(Error::SupportExceedsBox(format!("cutoff support |x₁| < {} exceeds box radius {r}", 2.0 * n)));
            }
            Ok(TestVector::Real(df.interpolate(mesh, |x| bump(x[0] / n) * (-0.5 * alpha * x[1].abs()).exp())))
        }
        TestFamily::TransverseExp { alpha } => {
            if df.space != Space::Continuous {
                return Err(Error::DofMismatch("transverse_exp is a continuous family".into()));
            }
            Ok(TestVector::Real(df.interpolate(mesh, |x| (-0.5 * alpha * x[1].abs()).exp())))
        }
        TestFamily::WedgePsi { n, p, beta, centre, origin, direction, positive_side } => {
            if df.space != Space::Broken {
                return Err(Error::DofMismatch("wedge_psi_np is a broken family".into()));
            }
            if !(n > 0.0 && beta > 0.0) {
                return Err(invalid("n", "n and beta must be positive"));
            }
            let len = libm::hypot(direction[0], direction[1]);
            let d = [direction[0] / len, direction[1] / len];
            if centre - 2.0 * n < 0.0 {
                return Err(Error::SupportExceedsBox(format!("cutoff support reaches behind the origin (centre {centre}, n {n})")));
            }
            let far = [origin[0] + (centre + 2.0 * n) * d[0], origin[1] + (centre + 2.0 * n) * d[1]];
            if far[0].abs() > r || far[1].abs() > r {
                return Err(Error::SupportExceedsBox(format!("cutoff support along the ray ends at ({}, {}) outside the box", far[0], far[1])));
            }
            let scale = 1.0 / n.sqrt();
            let v = (0..df.dim())
                .map(|dof| {
                    let (s, node) = df.dofs.info(dof);
                    let x = mesh.nodes()[node];
                    let rel = [x[0] - origin[0], x[1] - origin[1]];
                    let x1 = rel[0] * d[0] + rel[1] * d[1];
                    let x2 = -rel[0] * d[1] + rel[1] * d[0];
                    let sign = if s == positive_side { 1.0 } else { -1.0 };
                    let amp = scale * bump((x1 - centre) / n) * bump(x2 / n) * sign * (-2.0 * x2.abs() / beta).exp();
                    Complex64::from_polar(amp, p * x1)
                })
                .collect();
            Ok(TestVector::Complex(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{adjacency_graph, build_canonical_partition, chromatic_colouring, phase_assignment, CanonicalPartition};
    use crate::mesh::triangulate;
    use crate::quadrature::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(spec: CanonicalPartition, levels: usize) -> (Mesh, crate::geometry::Partition) {
        let p = build_canonical_partition(&spec).unwrap();
        (triangulate(&p, levels).unwrap(), p)
    }

    #[test]
    fn constant_on_half_plane() {
        let (m, p) = setup(CanonicalPartition::HalfPlane { box_radius: 1.0 }, 2);
        let d = InteractionData::uniform(&p, 0.7, 1.0).unwrap();
        let df = assemble_delta(&m, &d, BoundaryPolicy::Neumann).unwrap();
        let one = alloc::vec![1.0; df.dim()];
        assert!((rayleigh(&df, &one).unwrap() + 0.7 * 2.0 / 4.0).abs() < 1e-14);
        assert!(df.a.is_symmetric() && df.m.is_symmetric());
    }

    #[test]
    fn free_form_nonnegative() {
        let (m, p) = setup(CanonicalPartition::Star3 { box_radius: 1.0 }, 2);
        let d = InteractionData::uniform(&p, 0.0, 1.0).unwrap();
        let df = assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f: Vec<f64> = (0..df.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(df.value(&f) >= 0.0);
        }
    }

    #[test]
    fn matches_quadrature() {
        let (m, p) = setup(CanonicalPartition::Wedge { box_radius: 2.0, angle: 1.0 }, 1);
        let d = InteractionData::uniform(&p, 1.3, 1.0).unwrap();
        let df = assemble_delta(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let g = |x: Point| (x[0] * 0.9).sin() + x[1] * x[1] - 0.3 * x[0] * x[1];
        let f = df.interpolate(&m, g);
        let nodal = df.to_nodal(&f).unwrap();
        // gradient energy of the interpolant by quadrature on each triangle
        let (gx, gw) = gauss_legendre(4);
        let mut grad = 0.0;
        for t in m.triangles() {
            let pts = t.map(|v| m.nodes()[v]);
            let vals = t.map(|v| nodal[v]);
            let det = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]);
            let dx = ((vals[1] - vals[0]) * (pts[2][1] - pts[0][1]) - (vals[2] - vals[0]) * (pts[1][1] - pts[0][1])) / det;
            let dy = ((vals[2] - vals[0]) * (pts[1][0] - pts[0][0]) - (vals[1] - vals[0]) * (pts[2][0] - pts[0][0])) / det;
            grad += 0.5 * det.abs() * (dx * dx + dy * dy);
        }
        let mut trace = 0.0;
        for e in m.interface_edges() {
            let (a, b) = (nodal[e.nodes[0]], nodal[e.nodes[1]]);
            for (x, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (x + 1.0);
                let v = a + s * (b - a);
                trace += 0.5 * w * e.length * v * v;
            }
        }
        let expected = grad - 1.3 * trace;
        assert!((df.value(&f) - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn broken_kernel_without_coupling() {
        let (m, p) = setup(CanonicalPartition::Star3 { box_radius: 1.0 }, 1);
        let d = InteractionData::uniform(&p, 1.0, f64::INFINITY).unwrap();
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
        for k in 1..=3 {
            let ind = indicator_vector(&bf, k).unwrap();
            assert!(bf.value(&ind).abs() < 1e-13);
            assert!(bf.a.mul(&ind).iter().all(|v| v.abs() < 1e-13));
        }
        assert!(indicator_form_value(&bf, 1).unwrap().abs() < 1e-13);
    }

    #[test]
    fn indicator_value_on_star() {
        let (m, p) = setup(CanonicalPartition::Star3 { box_radius: 6.0 }, 3);
        let d = InteractionData::uniform(&p, 1.0, 2.0).unwrap();
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
        assert!((indicator_form_value(&bf, 1).unwrap() + 6.0).abs() < 1e-12 * 6.0);
        let dir = assemble_delta_prime(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        assert_eq!(indicator_form_value(&dir, 1), Err(Error::IndicatorNeedsNeumann));
    }

    #[test]
    fn duplicate_counts() {
        let (m, p) = setup(CanonicalPartition::Star3 { box_radius: 1.0 }, 1);
        let d = InteractionData::uniform(&p, 1.0, 1.0).unwrap();
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
        let origin = m.nodes().iter().position(|x| *x == [0.0, 0.0]).unwrap();
        assert_eq!(bf.dofs.copies(origin).len(), 3);
        let inside = m.nodes().iter().position(|x| *x == [0.0, 0.5]).unwrap();
        assert_eq!(bf.dofs.copies(inside), [(1, bf.dofs.dof(1, inside).unwrap())]);
    }

    #[test]
    fn embedding_and_unitary() {
        let (m, p) = setup(CanonicalPartition::HalfPlane { box_radius: 2.0 }, 2);
        let d = InteractionData::uniform(&p, 1.0, 4.0).unwrap();
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Dirichlet).unwrap();
        let col = chromatic_colouring(&adjacency_graph(&p)).unwrap();
        let ph = phase_assignment(&p, &col, &d).unwrap();
        let cf = assemble_delta_with(&m, &ph.alpha_z, BoundaryPolicy::Dirichlet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f: Vec<f64> = (0..cf.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = embed_continuous(&bf, &cf, &f).unwrap();
        assert!(bf.interaction.quad_form(&e).abs() < 1e-14);
        let z = apply_unitary(&ph, &bf, &TestVector::Real(e).into_complex()).unwrap();
        for (dof, v) in z.iter().enumerate() {
            let (s, node) = bf.dofs.info(dof);
            let c = f[cf.dofs.dof(0, node).unwrap()];
            assert_eq!(*v, Complex64::new(if s == 1 { c } else { -c }, 0.0));
        }
        let lhs = bf.value_complex(&z);
        let rhs = cf.value(&f);
        assert!((lhs - rhs).abs() < 1e-12 * (rhs.abs() + cf.mass(&f)));
    }

    #[test]
    fn sample_families() {
        let (m, p) = setup(CanonicalPartition::HalfPlane { box_radius: 4.0 }, 2);
        let d = InteractionData::uniform(&p, 1.0, 2.0).unwrap();
        let cf = assemble_delta(&m, &d, BoundaryPolicy::Neumann).unwrap();
        let origin = cf.dofs.dof(0, m.nodes().iter().position(|x| *x == [0.0, 0.0]).unwrap()).unwrap();
        match sample_test_function(&m, &cf, &TestFamily::DeformationFn { n: 1.0, alpha: 1.0 }).unwrap() {
            TestVector::Real(v) => assert_eq!(v[origin], 1.0),
            _ => panic!("expected a real vector"),
        }
        assert!(matches!(
            sample_test_function(&m, &cf, &TestFamily::DeformationFn { n: 3.0, alpha: 1.0 }),
            Err(Error::SupportExceedsBox(_))
        ));
        let bf = assemble_delta_prime(&m, &d, BoundaryPolicy::Neumann).unwrap();
        let fam = TestFamily::WedgePsi { n: 0.5, p: 0.0, beta: 2.0, centre: 1.0, origin: [-3.0, 0.0], direction: [1.0, 0.0], positive_side: 1 };
        let v = sample_test_function(&m, &bf, &fam).unwrap().into_complex();
        let node = m.nodes().iter().position(|x| *x == [-2.0, 0.0]).unwrap();
        let (a, b) = (v[bf.dofs.dof(1, node).unwrap()], v[bf.dofs.dof(2, node).unwrap()]);
        assert!((a.re - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(a, -b);
    }
}
