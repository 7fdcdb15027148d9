//! Conforming triangulations of partitions with tagged interface edges.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::geometry::Partition;
use crate::{Error, Point, Result};

/// One mesh edge lying on an interface.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InterfaceEdge {
    pub interface: usize,
    /// Endpoints, ordered counter-clockwise as seen from the `k` side.
    pub nodes: [usize; 2],
    pub k: usize,
    pub l: usize,
    /// Unit normal pointing from `Ω_k` into `Ω_l`.
    pub normal: Point,
    pub length: f64,
}

/// A line `point + s·direction` used as a reflection axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub point: Point,
    pub direction: Point,
}

impl Axis {
    /// The line `x = 0`.
    pub const VERTICAL: Axis = Axis { point: [0.0, 0.0], direction: [0.0, 1.0] };

    pub fn reflect(&self, p: Point) -> Point {
        if *self == Axis::VERTICAL {
            return [-p[0], p[1]];
        }
        let n = libm::hypot(self.direction[0], self.direction[1]);
        let d = [self.direction[0] / n, self.direction[1] / n];
        let v = [p[0] - self.point[0], p[1] - self.point[1]];
        let t = v[0] * d[0] + v[1] * d[1];
        [self.point[0] + 2.0 * t * d[0] - v[0], self.point[1] + 2.0 * t * d[1] - v[1]]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    domains: Vec<usize>,
    interface_edges: Vec<InterfaceEdge>,
    outer: Vec<bool>,
    level: usize,
    box_radius: f64,
    subdomain_count: usize,
    interface_lengths: BTreeMap<usize, f64>,
    mirror_symmetric: bool,
}

impl Mesh {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Subdomain id of each triangle.
    pub fn triangle_domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn interface_edges(&self) -> &[InterfaceEdge] {
        &self.interface_edges
    }

    pub fn is_outer_boundary(&self, node: usize) -> bool {
        self.outer[node]
    }

    pub fn outer_boundary_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.outer[i]).collect()
    }

    pub fn refinement_level(&self) -> usize {
        self.level
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    pub fn subdomain_count(&self) -> usize {
        self.subdomain_count
    }

    /// Length of each interface as recorded by the partition.
    pub fn interface_lengths(&self) -> &BTreeMap<usize, f64> {
        &self.interface_lengths
    }

    /// Whether the triangulation was built symmetric about `x = 0`.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.mirror_symmetric
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    /// Sorted subdomain ids of the triangles touching each node.
    pub fn node_subdomains(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.nodes.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                let list: &mut Vec<usize> = &mut out[v];
                if let Err(pos) = list.binary_search(&self.domains[t]) {
                    list.insert(pos, self.domains[t]);
                }
            }
        }
        out
    }

    /// Plain-text dump: `v x y`, `t i j k domain`, `e i j interface k l`,
    /// with 1-based node indices.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        for p in &self.nodes {
            let _ = writeln!(s, "v {:.17e} {:.17e}", p[0], p[1]);
        }
        for (t, d) in self.triangles.iter().zip(&self.domains) {
            let _ = writeln!(s, "t {} {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1, d);
        }
        for e in &self.interface_edges {
            let _ = writeln!(s, "e {} {} {} {} {}", e.nodes[0] + 1, e.nodes[1] + 1, e.interface, e.k, e.l);
        }
        s
    }

    /// Verifies the mesh invariants against the partition it came from.
    pub fn check(&self, p: &Partition) -> Result<()> {
        for t in 0..self.triangles.len() {
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::Triangulation(format!("triangle {t} has non-positive area")));
            }
        }
        for k in 1..=p.subdomain_count() {
            let a: f64 = (0..self.triangles.len()).filter(|&t| self.domains[t] == k).map(|t| self.triangle_area(t)).sum();
            let target = p.subdomain_area(k);
            if ((a - target) / target).abs() > 1e-11 {
                return Err(Error::Triangulation(format!("subdomain {k} covered with area {a}, expected {target}")));
            }
        }
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        for e in &self.interface_edges {
            *sums.entry(e.interface).or_default() += e.length;
        }
        for iface in p.interfaces() {
            let s = sums.get(&iface.id).copied().unwrap_or(0.0);
            if ((s - iface.length) / iface.length).abs() > 1e-12 {
                return Err(Error::Triangulation(format!("interface {} has edge length {s}, expected {}", iface.id, iface.length)));
            }
        }
        Ok(())
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Ear clipping of a counter-clockwise simple polygon. Only strictly convex
/// ears containing no other polygon vertex (boundary included) are cut;
/// among those the best-shaped one goes first.
fn ear_clip(points: &[Point], ids: &[usize]) -> Result<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = (0..ids.len()).collect();
    let mut out = Vec::new();
    let scale = points.iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-13 * scale * scale;
    while ring.len() > 3 {
        let n = ring.len();
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            let (ia, ib, ic) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
            let (a, b, c) = (points[ia], points[ib], points[ic]);
            if cross(a, b, c) <= eps {
                continue;
            }
            let blocked = ring.iter().any(|&j| {
                j != ia && j != ib && j != ic && {
                    let q = points[j];
                    cross(a, b, q) >= -eps && cross(b, c, q) >= -eps && cross(c, a, q) >= -eps
                }
            });
            if blocked {
                continue;
            }
            let q = quality(a, b, c);
            if best.map_or(true, |(bq, _)| q > bq) {
                best = Some((q, i));
            }
        }
        let Some((_, i)) = best else {
            return Err(Error::Triangulation(String::from("no ear found; polygon is not simple")));
        };
        out.push([ids[ring[(i + n - 1) % n]], ids[ring[i]], ids[ring[(i + 1) % n]]]);
        ring.remove(i);
    }
    let (a, b, c) = (points[ring[0]], points[ring[1]], points[ring[2]]);
    if cross(a, b, c) <= eps {
        return Err(Error::Triangulation(String::from("degenerate final ear")));
    }
    out.push([ids[ring[0]], ids[ring[1]], ids[ring[2]]]);
    Ok(out)
}

fn quality(a: Point, b: Point, c: Point) -> f64 {
    let sq = |p: Point, q: Point| (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
    2.0 * libm::sqrt(3.0) * cross(a, b, c) / (sq(a, b) + sq(b, c) + sq(c, a))
}

/// Ear-clips every piece of the partition and refines `levels` times by
/// uniform midpoint subdivision.
pub fn triangulate(p: &Partition, levels: usize) -> Result<Mesh> {
    let verts = p.vertices();
    let tol = 1e-12 * p.box_radius();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut domains: Vec<usize> = Vec::new();
    let mirror = p.vertex_mirror();
    let pieces = p.pieces();
    let mut done: Vec<Option<Vec<[usize; 3]>>> = alloc::vec![None; pieces.len()];
    let is_right = |i: usize| {
        pieces[i].boundary.iter().all(|&v| verts[v][0] >= -tol) && pieces[i].boundary.iter().any(|&v| verts[v][0] > tol)
    };
    let order: Vec<usize> = (0..pieces.len()).filter(|&i| mirror.is_none() || !is_right(i)).chain((0..pieces.len()).filter(|&i| mirror.is_some() && is_right(i))).collect();
    for i in order {
        let piece = &pieces[i];
        let tris = match mirror {
            Some(map) if is_right(i) => {
                let mut image: Vec<usize> = piece.boundary.iter().map(|&v| map[v]).collect();
                image.sort_unstable();
                let partner = (0..pieces.len())
                    .find(|&j| {
                        let mut s = pieces[j].boundary.clone();
                        s.sort_unstable();
                        s == image && done[j].is_some()
                    })
                    .ok_or_else(|| Error::NotSymmetric(format!("piece {i} has no triangulated mirror partner")))?;
                done[partner].as_ref().unwrap().iter().map(|t| [map[t[0]], map[t[2]], map[t[1]]]).collect()
            }
            _ => {
                let pts: Vec<Point> = piece.boundary.iter().map(|&v| verts[v]).collect();
                ear_clip(&pts, &piece.boundary)?
            }
        };
        for t in &tris {
            triangles.push(*t);
            domains.push(piece.subdomain);
        }
        done[i] = Some(tris);
    }

    let mut tags: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for iface in p.interfaces() {
        for w in iface.polyline.windows(2) {
            tags.insert(key(w[0], w[1]), iface.id);
        }
    }
    let mut use_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for t in &triangles {
        for e in 0..3 {
            *use_count.entry(key(t[e], t[(e + 1) % 3])).or_default() += 1;
        }
    }
    let mut boundary: Vec<(usize, usize)> = use_count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();

    let mut nodes: Vec<Point> = verts.to_vec();
    for _ in 0..levels {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            *mid.entry(key(a, b)).or_insert_with(|| {
                let (pa, pb) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                nodes.len() - 1
            })
        };
        let mut fine = Vec::with_capacity(4 * triangles.len());
        let mut fine_domains = Vec::with_capacity(4 * triangles.len());
        for (t, &d) in triangles.iter().zip(&domains) {
            let [a, b, c] = *t;
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            fine.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            fine_domains.extend([d; 4]);
        }
        let mut fine_tags = BTreeMap::new();
        for (&(a, b), &id) in &tags {
            let m = mid[&(a, b)];
            fine_tags.insert(key(a, m), id);
            fine_tags.insert(key(m, b), id);
        }
        boundary = boundary
            .iter()
            .flat_map(|&(a, b)| {
                let m = mid[&(a, b)];
                [key(a, m), key(m, b)]
            })
            .collect();
        triangles = fine;
        domains = fine_domains;
        tags = fine_tags;
    }

    let mut outer = alloc::vec![false; nodes.len()];
    for &(a, b) in &boundary {
        outer[a] = true;
        outer[b] = true;
    }

    let mut sides: BTreeMap<(usize, usize), Vec<(usize, usize, usize)>> = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if tags.contains_key(&key(a, b)) {
                sides.entry(key(a, b)).or_default().push((domains[t], a, b));
            }
        }
    }
    let mut interface_edges = Vec::with_capacity(tags.len());
    for (e, &id) in &tags {
        let iface = p.interface(id).expect("tag refers to an interface");
        let s = sides.get(e).map(Vec::as_slice).unwrap_or(&[]);
        let on_k = s.iter().filter(|x| x.0 == iface.k).collect::<Vec<_>>();
        let on_l = s.iter().filter(|x| x.0 == iface.l).count();
        if s.len() != 2 || on_k.len() != 1 || on_l != 1 {
            return Err(Error::Triangulation(format!("interface edge {e:?} is not shared by one triangle on each side")));
        }
        let (_, a, b) = *on_k[0];
        let (pa, pb) = (nodes[a], nodes[b]);
        let length = libm::hypot(pb[0] - pa[0], pb[1] - pa[1]);
        interface_edges.push(InterfaceEdge {
            interface: id,
            nodes: [a, b],
            k: iface.k,
            l: iface.l,
            normal: [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length],
            length,
        });
    }
    interface_edges.sort_by_key(|e| (e.interface, key(e.nodes[0], e.nodes[1])));

    let mesh = Mesh {
        nodes,
        triangles,
        domains,
        interface_edges,
        outer,
        level: levels,
        box_radius: p.box_radius(),
        subdomain_count: p.subdomain_count(),
        interface_lengths: p.interfaces().iter().map(|i| (i.id, i.length)).collect(),
        mirror_symmetric: mirror.is_some(),
    };
    mesh.check(p)?;
    Ok(mesh)
}

/// Mirror node of every node under reflection across `axis`, paired through
/// quantized coordinates.
pub fn mirror_nodes(m: &Mesh, axis: Axis) -> Result<Vec<usize>> {
    let tol = 1e-12 * m.box_radius;
    let h = 1e3 * tol;
    let cell = |p: Point| ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64);
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, &p) in m.nodes.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut map = Vec::with_capacity(m.nodes.len());
    for &p in &m.nodes {
        let q = axis.reflect(p);
        let (cx, cy) = cell(q);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in list {
                        let r = m.nodes[j];
                        if libm::hypot(r[0] - q[0], r[1] - q[1]) <= tol {
                            found = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        match found {
            Some(j) => map.push(j),
            None => return Err(Error::NotSymmetric(format!("node ({}, {}) has no mirror node", p[0], p[1]))),
        }
    }
    Ok(map)
}

/// Even and odd parts `(f(x) ± f(x̂))/2` of a nodal vector.
pub fn reflect_split(m: &Mesh, axis: Axis, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.len() != m.node_count() {
        return Err(Error::DimensionMismatch { expected: m.node_count(), got: f.len() });
    }
    let map = mirror_nodes(m, axis)?;
    let even = (0..f.len()).map(|i| 0.5 * (f[i] + f[map[i]])).collect();
    let odd = (0..f.len()).map(|i| if map[i] == i { 0.0 } else { 0.5 * (f[i] - f[map[i]]) }).collect();
    Ok((even, odd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_canonical_partition, CanonicalPartition};
    use core::f64::consts::PI;

    fn mesh(spec: CanonicalPartition, levels: usize) -> Mesh {
        triangulate(&build_canonical_partition(&spec).unwrap(), levels).unwrap()
    }

    #[test]
    fn half_plane_coarse() {
        let m = mesh(CanonicalPartition::HalfPlane { box_radius: 1.0 }, 0);
        assert_eq!(m.triangles().len(), 4);
        assert_eq!(m.interface_edges().len(), 1);
        let e = &m.interface_edges()[0];
        assert_eq!(e.length, 2.0);
        assert_eq!((e.k, e.l), (1, 2));
        assert_eq!(e.normal, [0.0, -1.0]);
    }

    #[test]
    fn refinement_counts() {
        for spec in [
            CanonicalPartition::HalfPlane { box_radius: 2.0 },
            CanonicalPartition::Star3 { box_radius: 2.0 },
            CanonicalPartition::Wedge { box_radius: 2.0, angle: PI / 3.0 },
            CanonicalPartition::Ngon { box_radius: 3.0, sides: 7, radius: 1.0 },
        ] {
            let coarse = mesh(spec.clone(), 0).triangles().len();
            for l in 1..4 {
                assert_eq!(mesh(spec.clone(), l).triangles().len(), coarse * 4usize.pow(l as u32));
            }
        }
    }

    #[test]
    fn star_ray_edges() {
        let m = mesh(CanonicalPartition::Star3 { box_radius: 1.0 }, 2);
        for id in 1..=3 {
            let edges: Vec<_> = m.interface_edges().iter().filter(|e| e.interface == id).collect();
            assert_eq!(edges.len(), 4);
            for e in edges {
                assert!((e.length - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normals_point_from_k_to_l() {
        let p = build_canonical_partition(&CanonicalPartition::LineWithBump {
            box_radius: 8.0,
            bump: alloc::vec![[-1.0, 1.0], [1.0, 1.0], [1.0, 3.0], [-1.0, 3.0]],
        })
        .unwrap();
        let m = triangulate(&p, 2).unwrap();
        for e in m.interface_edges() {
            let (a, b) = (m.nodes()[e.nodes[0]], m.nodes()[e.nodes[1]]);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            if e.interface == 1 {
                // outward from the bump centred at (0, 2)
                assert!(e.normal[0] * (mid[0]) + e.normal[1] * (mid[1] - 2.0) > 0.0);
            } else {
                assert_eq!(e.normal, [0.0, -1.0]);
            }
        }
    }

    #[test]
    fn outer_boundary_flags() {
        let m = mesh(CanonicalPartition::HalfPlane { box_radius: 1.0 }, 3);
        for (i, p) in m.nodes().iter().enumerate() {
            let on = p[0].abs() == 1.0 || p[1].abs() == 1.0;
            assert_eq!(m.is_outer_boundary(i), on);
        }
    }

    #[test]
    fn export_format() {
        let m = mesh(CanonicalPartition::HalfPlane { box_radius: 1.0 }, 0);
        let text = m.export_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), m.node_count());
        assert_eq!(text.lines().filter(|l| l.starts_with("t ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 1);
    }

    #[test]
    fn reflection_parts() {
        let m = mesh(CanonicalPartition::Wedge { box_radius: 3.0, angle: 2.0 * PI / 3.0 }, 3);
        let map = mirror_nodes(&m, Axis::VERTICAL).unwrap();
        let sym: Vec<f64> = m.nodes().iter().map(|p| p[0] * p[0] + p[1]).collect();
        let (_, odd) = reflect_split(&m, Axis::VERTICAL, &sym).unwrap();
        assert!(odd.iter().all(|&v| v == 0.0));
        let anti: Vec<f64> = m.nodes().iter().map(|p| p[0] * p[1]).collect();
        let (even, _) = reflect_split(&m, Axis::VERTICAL, &anti).unwrap();
        assert!(even.iter().all(|&v| v == 0.0));
        for (i, p) in m.nodes().iter().enumerate() {
            assert_eq!(map[i] == i, p[0] == 0.0);
        }
        let skew = mesh(CanonicalPartition::LineWithBump { box_radius: 4.0, bump: alloc::vec![[0.5, 1.0], [2.0, 1.0], [1.0, 2.0]] }, 1);
        assert!(mirror_nodes(&skew, Axis::VERTICAL).is_err());
    }
}
