use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;


use super::{cross, dist, polygon_area};
use crate::{Error, Point, Result};

/// One simple polygon of a subdomain, as a counter-clockwise loop of vertex
/// indices. A subdomain may consist of several pieces glued along internal
/// cut edges (needed for subdomains with holes and for mirror-symmetric
/// meshing).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Piece {
    pub subdomain: usize,
    pub boundary: Vec<usize>,
}

/// A connected component of `Σ_kl`, stored as a polyline of vertex indices.
/// Closed curves repeat the first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Interface {
    pub id: usize,
    pub k: usize,
    pub l: usize,
    pub polyline: Vec<usize>,
    pub length: f64,
}

/// Serializable description of a partition; everything else is derived.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionSpec {
    pub box_radius: f64,
    /// Counter-clockwise convex polygon bounding the computational domain.
    pub outer: Vec<Point>,
    pub vertices: Vec<Point>,
    pub pieces: Vec<Piece>,
    /// Whether the partition is symmetric under `(x, y) ↦ (−x, y)`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub mirror_symmetric: bool,
}

/// A validated polygonal partition of a truncated plane.
///
/// Subdomains have ids `1..=n`. Interfaces are derived from polygon edges
/// shared by pieces of two different subdomains and numbered `1..=m`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "PartitionSpec", into = "PartitionSpec"))]
pub struct Partition {
    box_radius: f64,
    outer: Vec<Point>,
    vertices: Vec<Point>,
    pieces: Vec<Piece>,
    subdomain_count: usize,
    interfaces: Vec<Interface>,
    vertex_mirror: Option<Vec<usize>>,
}

impl TryFrom<PartitionSpec> for Partition {
    type Error = Error;
    fn try_from(spec: PartitionSpec) -> Result<Self> {
        Partition::new(spec)
    }
}

impl From<Partition> for PartitionSpec {
    fn from(p: Partition) -> Self {
        PartitionSpec {
            box_radius: p.box_radius,
            outer: p.outer,
            vertices: p.vertices,
            pieces: p.pieces,
            mirror_symmetric: p.vertex_mirror.is_some(),
        }
    }
}

fn bad(msg: impl Into<alloc::string::String>) -> Error {
    Error::InvalidPartition(msg.into())
}

impl Partition {
    /// Validates a partition description and derives its interfaces.
    pub fn new(spec: PartitionSpec) -> Result<Self> {
        let PartitionSpec { box_radius, outer, vertices, pieces, mirror_symmetric } = spec;
        if !(box_radius.is_finite() && box_radius > 0.0) {
            return Err(bad("box_radius must be a positive length"));
        }
        let tol = 1e-12 * box_radius;
        if outer.len() < 3 || polygon_area(&outer) <= 0.0 {
            return Err(bad("outer domain must be a counter-clockwise polygon"));
        }
        for i in 0..outer.len() {
            let (a, b, c) = (outer[i], outer[(i + 1) % outer.len()], outer[(i + 2) % outer.len()]);
            if cross(a, b, c) < -tol * box_radius {
                return Err(bad("outer domain must be convex"));
            }
        }
        if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(bad("vertex coordinates must be finite"));
        }
        if pieces.is_empty() {
            return Err(bad("partition has no pieces"));
        }

        // Merge coincident vertices and drop the unused ones.
        let mut canon: Vec<usize> = (0..vertices.len()).collect();
        for i in 0..vertices.len() {
            for j in 0..i {
                if canon[j] == j && dist(vertices[i], vertices[j]) <= tol {
                    canon[i] = j;
                    break;
                }
            }
        }
        let mut used = alloc::vec![false; vertices.len()];
        for piece in &pieces {
            for &v in &piece.boundary {
                if v >= vertices.len() {
                    return Err(bad(format!("vertex index {v} out of range")));
                }
                used[canon[v]] = true;
            }
        }
        let mut renumber = alloc::vec![usize::MAX; vertices.len()];
        let mut verts = Vec::new();
        for i in 0..vertices.len() {
            if canon[i] == i && used[i] {
                renumber[i] = verts.len();
                verts.push(vertices[i]);
            }
        }
        let mut pieces: Vec<Piece> = pieces
            .into_iter()
            .map(|p| {
                let mut loop_: Vec<usize> = p.boundary.iter().map(|&v| renumber[canon[v]]).collect();
                loop_.dedup();
                while loop_.len() > 1 && loop_.first() == loop_.last() {
                    loop_.pop();
                }
                Piece { subdomain: p.subdomain, boundary: loop_ }
            })
            .collect();

        let subdomain_count = pieces.iter().map(|p| p.subdomain).max().unwrap_or(0);
        for k in 1..=subdomain_count {
            if !pieces.iter().any(|p| p.subdomain == k) {
                return Err(bad(format!("subdomain ids must be 1..=n; id {k} has no piece")));
            }
        }
        if pieces.iter().any(|p| p.subdomain == 0) {
            return Err(bad("subdomain ids start at 1"));
        }

        // Insert vertices that lie inside an edge (T-junctions) so that
        // shared boundaries use identical vertex indices on both sides.
        for piece in &mut pieces {
            let mut out = Vec::with_capacity(piece.boundary.len());
            let n = piece.boundary.len();
            for i in 0..n {
                let a = piece.boundary[i];
                let b = piece.boundary[(i + 1) % n];
                out.push(a);
                let (pa, pb) = (verts[a], verts[b]);
                let len = dist(pa, pb);
                let mut inner: Vec<(f64, usize)> = Vec::new();
                for (v, &pv) in verts.iter().enumerate() {
                    if v == a || v == b || len == 0.0 {
                        continue;
                    }
                    let t = ((pv[0] - pa[0]) * (pb[0] - pa[0]) + (pv[1] - pa[1]) * (pb[1] - pa[1])) / (len * len);
                    if t * len <= tol || (1.0 - t) * len <= tol {
                        continue;
                    }
                    if (cross(pa, pb, pv) / len).abs() <= tol {
                        inner.push((t, v));
                    }
                }
                inner.sort_by(|x, y| x.0.total_cmp(&y.0));
                out.extend(inner.into_iter().map(|(_, v)| v));
            }
            piece.boundary = out;
        }

        for (i, piece) in pieces.iter().enumerate() {
            let pts: Vec<Point> = piece.boundary.iter().map(|&v| verts[v]).collect();
            if pts.len() < 3 {
                return Err(bad(format!("piece {i} has fewer than three vertices")));
            }
            let mut sorted = piece.boundary.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad(format!("piece {i} is not simple (repeated vertex)")));
            }
            if polygon_area(&pts) <= tol * box_radius {
                return Err(bad(format!("piece {i} is not counter-clockwise or has zero area")));
            }
            let n = pts.len();
            for e in 0..n {
                for f in e + 1..n {
                    let adjacent = f == e + 1 || (e == 0 && f == n - 1);
                    let (a, b) = (pts[e], pts[(e + 1) % n]);
                    let (c, d) = (pts[f], pts[(f + 1) % n]);
                    if adjacent {
                        // a spike doubles back along the previous edge
                        let (p, q, r) = if f == e + 1 { (a, b, d) } else { (c, a, b) };
                        if cross(p, q, r).abs() <= tol * dist(p, q).max(dist(q, r)) {
                            let dot = (q[0] - p[0]) * (r[0] - q[0]) + (q[1] - p[1]) * (r[1] - q[1]);
                            if dot < 0.0 {
                                return Err(bad(format!("piece {i} is not simple (spike)")));
                            }
                        }
                    } else if segments_touch(a, b, c, d, tol) {
                        return Err(bad(format!("piece {i} is not simple (self-intersection)")));
                    }
                }
            }
        }

        // Edge usage: each undirected edge is used once (outer boundary) or
        // twice with opposite orientations (shared by two pieces).
        let mut usage: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (pi, piece) in pieces.iter().enumerate() {
            let n = piece.boundary.len();
            for i in 0..n {
                let a = piece.boundary[i];
                let b = piece.boundary[(i + 1) % n];
                usage.entry((a.min(b), a.max(b))).or_default().push((pi, a < b));
            }
        }
        for (&(a, b), uses) in &usage {
            match uses.as_slice() {
                [_] => {
                    let (pa, pb) = (verts[a], verts[b]);
                    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    if !on_polygon_boundary(&outer, pa, tol) || !on_polygon_boundary(&outer, pb, tol) || !on_polygon_boundary(&outer, mid, tol) {
                        return Err(bad(format!("edge ({a}, {b}) belongs to one piece but is not on the outer boundary")));
                    }
                }
                [x, y] => {
                    if x.1 == y.1 {
                        return Err(bad(format!("pieces {} and {} overlap along edge ({a}, {b})", x.0, y.0)));
                    }
                }
                _ => return Err(bad(format!("edge ({a}, {b}) is shared by more than two pieces"))),
            }
        }
        let edges: Vec<(usize, usize)> = usage.keys().copied().collect();
        for (i, &(a, b)) in edges.iter().enumerate() {
            for &(c, d) in &edges[i + 1..] {
                let shared = a == c || a == d || b == c || b == d;
                if shared {
                    let (o, p, q) = if a == c {
                        (a, b, d)
                    } else if a == d {
                        (a, b, c)
                    } else if b == c {
                        (b, a, d)
                    } else {
                        (b, a, c)
                    };
                    let (po, pp, pq) = (verts[o], verts[p], verts[q]);
                    let dot = (pp[0] - po[0]) * (pq[0] - po[0]) + (pp[1] - po[1]) * (pq[1] - po[1]);
                    if cross(po, pp, pq).abs() <= tol * dist(po, pp).max(dist(po, pq)) && dot > 0.0 {
                        return Err(bad(format!("edges ({a}, {b}) and ({c}, {d}) overlap")));
                    }
                } else if segments_touch(verts[a], verts[b], verts[c], verts[d], tol) {
                    return Err(bad(format!("edges ({a}, {b}) and ({c}, {d}) cross")));
                }
            }
        }

        let outer_area = polygon_area(&outer);
        let total: f64 = pieces
            .iter()
            .map(|p| polygon_area(&p.boundary.iter().map(|&v| verts[v]).collect::<Vec<_>>()))
            .sum();
        if ((total - outer_area) / outer_area).abs() > 1e-9 {
            return Err(bad(format!("pieces cover area {total}, domain area is {outer_area}")));
        }

        let interfaces = derive_interfaces(&verts, &pieces, &usage);

        let vertex_mirror = if mirror_symmetric {
            Some(mirror_map(&verts, &pieces, tol)?)
        } else {
            None
        };

        Ok(Partition { box_radius, outer, vertices: verts, pieces, subdomain_count, interfaces, vertex_mirror })
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    /// Convex polygon bounding the computational domain.
    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Number `n` of subdomains (ids `1..=n`).
    pub fn subdomain_count(&self) -> usize {
        self.subdomain_count
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn interface(&self, id: usize) -> Option<&Interface> {
        self.interfaces.get(id.wrapping_sub(1))
    }

    pub fn interface_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.interfaces.iter().map(|i| i.id)
    }

    /// Mirror vertex of each vertex under `(x, y) ↦ (−x, y)`, if the
    /// partition was declared mirror-symmetric.
    pub fn vertex_mirror(&self) -> Option<&[usize]> {
        self.vertex_mirror.as_deref()
    }

    pub fn subdomain_area(&self, k: usize) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.subdomain == k)
            .map(|p| polygon_area(&p.boundary.iter().map(|&v| self.vertices[v]).collect::<Vec<_>>()))
            .sum()
    }

    pub fn domain_area(&self) -> f64 {
        polygon_area(&self.outer)
    }

    /// Total interface length `Σ_l |Σ_kl|` on the boundary of subdomain `k`.
    pub fn interface_length_of(&self, k: usize) -> f64 {
        self.interfaces.iter().filter(|i| i.k == k || i.l == k).map(|i| i.length).sum()
    }

    /// Whether subdomain `k` touches the boundary of the computational box.
    pub fn touches_outer(&self, k: usize) -> bool {
        let tol = 1e-12 * self.box_radius;
        self.pieces
            .iter()
            .filter(|p| p.subdomain == k)
            .flat_map(|p| p.boundary.iter())
            .any(|&v| on_polygon_boundary(&self.outer, self.vertices[v], tol))
    }
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let scale = dist(a, b).max(dist(c, d)).max(1e-300);
    let d1 = cross(c, d, a) / scale;
    let d2 = cross(c, d, b) / scale;
    let d3 = cross(a, b, c) / scale;
    let d4 = cross(a, b, d) / scale;
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, s: f64| {
        s.abs() <= tol
            && r[0] >= p[0].min(q[0]) - tol
            && r[0] <= p[0].max(q[0]) + tol
            && r[1] >= p[1].min(q[1]) - tol
            && r[1] <= p[1].max(q[1]) + tol
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

pub(crate) fn on_polygon_boundary(poly: &[Point], p: Point, tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = dist(a, b);
        let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
        (-tol..=1.0 + tol).contains(&t) && (cross(a, b, p) / len).abs() <= tol
    })
}

fn derive_interfaces(verts: &[Point], pieces: &[Piece], usage: &BTreeMap<(usize, usize), Vec<(usize, bool)>>) -> Vec<Interface> {
    let mut by_pair: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (&edge, uses) in usage {
        if let [x, y] = uses.as_slice() {
            let (k, l) = (pieces[x.0].subdomain, pieces[y.0].subdomain);
            if k != l {
                by_pair.entry((k.min(l), k.max(l))).or_default().push(edge);
            }
        }
    }
    let mut out = Vec::new();
    for ((k, l), segs) in by_pair {
        let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (s, &(a, b)) in segs.iter().enumerate() {
            incident.entry(a).or_default().push(s);
            incident.entry(b).or_default().push(s);
        }
        let mut taken = alloc::vec![false; segs.len()];
        let mut chains: Vec<Vec<usize>> = Vec::new();
        let walk = |start: usize, first: usize, taken: &mut Vec<bool>| {
            let mut chain = alloc::vec![start];
            let mut at = start;
            let mut seg = first;
            loop {
                taken[seg] = true;
                let (a, b) = segs[seg];
                at = if a == at { b } else { a };
                chain.push(at);
                if incident[&at].len() != 2 {
                    break;
                }
                match incident[&at].iter().copied().find(|&s| !taken[s]) {
                    Some(s) => seg = s,
                    None => break,
                }
            }
            chain
        };
        // open chains start at endpoints and branch points
        for (&v, inc) in &incident {
            if inc.len() != 2 {
                for &s in inc {
                    if !taken[s] {
                        chains.push(walk(v, s, &mut taken));
                    }
                }
            }
        }
        // remaining closed loops
        for s in 0..segs.len() {
            if !taken[s] {
                let start = segs[s].0;
                chains.push(walk(start, s, &mut taken));
            }
        }
        for chain in chains {
            let length = chain.windows(2).map(|w| dist(verts[w[0]], verts[w[1]])).sum();
            out.push(Interface { id: 0, k, l, polyline: chain, length });
        }
    }
    for (i, iface) in out.iter_mut().enumerate() {
        iface.id = i + 1;
    }
    out
}

fn mirror_map(verts: &[Point], pieces: &[Piece], tol: f64) -> Result<Vec<usize>> {
    let mut map = Vec::with_capacity(verts.len());
    for v in verts {
        let target = [-v[0], v[1]];
        match verts.iter().position(|w| dist(*w, target) <= tol) {
            Some(j) => map.push(j),
            None => return Err(Error::NotSymmetric(format!("vertex ({}, {}) has no mirror image", v[0], v[1]))),
        }
    }
    for (i, p) in pieces.iter().enumerate() {
        let left = p.boundary.iter().all(|&v| verts[v][0] <= tol);
        let right = p.boundary.iter().all(|&v| verts[v][0] >= -tol);
        if !left && !right {
            return Err(Error::NotSymmetric(format!("piece {i} straddles the mirror axis")));
        }
        if right && !left {
            let mut image: Vec<usize> = p.boundary.iter().map(|&v| map[v]).collect();
            image.sort_unstable();
            let found = pieces.iter().any(|q| {
                let mut s = q.boundary.clone();
                s.sort_unstable();
                s == image
            });
            if !found {
                return Err(Error::NotSymmetric(format!("piece {i} has no mirror piece")));
            }
        }
    }
    Ok(map)
}
