use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::partition::{Partition, PartitionSpec, Piece};
use super::{cross, dist, polygon_area};
use crate::{invalid, Point, Result};

/// The named partitions used throughout the experiments.
///
/// `Star3` lives on the regular hexagon of circumradius `box_radius` (so each
/// of the three rays has length exactly `box_radius`); all other variants live
/// on the square `[−R, R]²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum CanonicalPartition {
    /// Ω₁ = upper half, Ω₂ = lower half.
    HalfPlane { box_radius: f64 },
    /// Ω₁ = wedge of opening `angle` with bisector along +y and apex at the
    /// origin, Ω₂ = its complement.
    Wedge { box_radius: f64, angle: f64 },
    /// Three congruent sectors; rays at 30°, 150° and 270°.
    Star3 { box_radius: f64 },
    /// Ω₁ = bump polygon, Ω₂ = upper half minus the bump, Ω₃ = lower half.
    LineWithBump { box_radius: f64, bump: Vec<Point> },
    /// `nx × ny` congruent rectangular cells, ids row by row from the bottom left.
    Grid { box_radius: f64, nx: usize, ny: usize },
    /// Regular hexagon of circumradius `radius` cut into three rhombi plus the
    /// exterior; the neighbour graph is K₄.
    K4Cells { box_radius: f64, radius: f64 },
    /// Regular `sides`-gon of circumradius `radius` (Ω₁) and its exterior (Ω₂).
    Ngon { box_radius: f64, sides: usize, radius: f64 },
}

impl CanonicalPartition {
    pub fn box_radius(&self) -> f64 {
        match *self {
            Self::HalfPlane { box_radius }
            | Self::Wedge { box_radius, .. }
            | Self::Star3 { box_radius }
            | Self::LineWithBump { box_radius, .. }
            | Self::Grid { box_radius, .. }
            | Self::K4Cells { box_radius, .. }
            | Self::Ngon { box_radius, .. } => box_radius,
        }
    }

    /// Same geometry with a different truncation radius.
    pub fn with_box_radius(&self, r: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::HalfPlane { box_radius }
            | Self::Wedge { box_radius, .. }
            | Self::Star3 { box_radius }
            | Self::LineWithBump { box_radius, .. }
            | Self::Grid { box_radius, .. }
            | Self::K4Cells { box_radius, .. }
            | Self::Ngon { box_radius, .. } => *box_radius = r,
        }
        out
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::HalfPlane { .. } => "half_plane",
            Self::Wedge { .. } => "wedge",
            Self::Star3 { .. } => "star3",
            Self::LineWithBump { .. } => "line_with_bump",
            Self::Grid { .. } => "grid",
            Self::K4Cells { .. } => "k4_cells",
            Self::Ngon { .. } => "ngon",
        }
    }
}

struct Builder {
    r: f64,
    outer: Vec<Point>,
    vertices: Vec<Point>,
    pieces: Vec<Piece>,
}

impl Builder {
    fn new(r: f64, outer: Vec<Point>) -> Self {
        Builder { r, outer, vertices: Vec::new(), pieces: Vec::new() }
    }

    fn square(r: f64) -> Self {
        Self::new(r, alloc::vec![[-r, -r], [r, -r], [r, r], [-r, r]])
    }

    fn vertex(&mut self, p: Point) -> usize {
        let tol = 1e-12 * self.r;
        let p = [snap(p[0], self.r), snap(p[1], self.r)];
        if let Some(i) = self.vertices.iter().position(|q| dist(*q, p) <= tol) {
            return i;
        }
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn piece(&mut self, subdomain: usize, loop_: &[Point]) {
        let boundary = loop_.iter().map(|&p| self.vertex(p)).collect();
        self.pieces.push(Piece { subdomain, boundary });
    }

    /// First point where the ray `c + s·d`, `s > 0`, leaves the outer polygon.
    fn hit(&self, c: Point, d: Point) -> Point {
        let n = self.outer.len();
        let mut best: Option<(f64, Point)> = None;
        for i in 0..n {
            let (a, b) = (self.outer[i], self.outer[(i + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let den = d[0] * e[1] - d[1] * e[0];
            if den.abs() < 1e-300 {
                continue;
            }
            let w = [a[0] - c[0], a[1] - c[1]];
            let s = (w[0] * e[1] - w[1] * e[0]) / den;
            let u = (w[0] * d[1] - w[1] * d[0]) / den;
            if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) && best.map_or(true, |(bs, _)| s < bs) {
                let p = if u <= 1e-12 {
                    a
                } else if u >= 1.0 - 1e-12 {
                    b
                } else {
                    [a[0] + u * e[0], a[1] + u * e[1]]
                };
                best = Some((s, p));
            }
        }
        best.expect("ray from an interior point leaves a convex polygon").1
    }

    /// Outer corners strictly between the directions of `pa` and `pb` seen
    /// from `c`, sweeping counter-clockwise from `pa`.
    fn corners_between(&self, c: Point, pa: Point, pb: Point) -> Vec<Point> {
        let ang = |p: Point| libm::atan2(p[1] - c[1], p[0] - c[0]);
        let a0 = ang(pa);
        let mut span = ang(pb) - a0;
        while span <= 0.0 {
            span += 2.0 * PI;
        }
        let mut out: Vec<(f64, Point)> = self
            .outer
            .iter()
            .filter_map(|&q| {
                let mut t = ang(q) - a0;
                while t < 0.0 {
                    t += 2.0 * PI;
                }
                (t > 1e-12 && t < span - 1e-12).then_some((t, q))
            })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.into_iter().map(|(_, q)| q).collect()
    }

    /// Region between the rays from `c` through consecutive vertices `a`, `b`
    /// (counter-clockwise about `c`) outside the segment `ab`.
    fn annular_piece(&mut self, subdomain: usize, c: Point, a: Point, b: Point) {
        let ha = self.hit(c, [a[0] - c[0], a[1] - c[1]]);
        let hb = self.hit(c, [b[0] - c[0], b[1] - c[1]]);
        let mut loop_ = alloc::vec![a, ha];
        loop_.extend(self.corners_between(c, ha, hb));
        loop_.push(hb);
        loop_.push(b);
        self.piece(subdomain, &loop_);
    }

    fn finish(self, mirror_symmetric: bool) -> Result<Partition> {
        Partition::new(PartitionSpec {
            box_radius: self.r,
            outer: self.outer,
            vertices: self.vertices,
            pieces: self.pieces,
            mirror_symmetric,
        })
    }
}

fn snap(x: f64, r: f64) -> f64 {
    if x.abs() <= 1e-14 * r {
        0.0
    } else {
        x
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(invalid("box_radius", "must be a positive length"))
    }
}

/// Builds one of the named partitions.
pub fn build_canonical_partition(spec: &CanonicalPartition) -> Result<Partition> {
    let r = spec.box_radius();
    check_radius(r)?;
    match spec {
        CanonicalPartition::HalfPlane { .. } => {
            let mut b = Builder::square(r);
            b.piece(1, &[[-r, 0.0], [r, 0.0], [r, r], [-r, r]]);
            b.piece(2, &[[-r, -r], [r, -r], [r, 0.0], [-r, 0.0]]);
            b.finish(false)
        }
        CanonicalPartition::Wedge { angle, .. } => wedge(r, *angle),
        CanonicalPartition::Star3 { .. } => {
            let h = r * 3.0.sqrt() / 2.0;
            let v = [[h, 0.5 * r], [0.0, r], [-h, 0.5 * r], [-h, -0.5 * r], [0.0, -r], [h, -0.5 * r]];
            let mut b = Builder::new(r, v.to_vec());
            let o = [0.0, 0.0];
            for (j, sub) in [1, 1, 2, 2, 3, 3].into_iter().enumerate() {
                b.piece(sub, &[o, v[j], v[(j + 1) % 6]]);
            }
            b.finish(true)
        }
        CanonicalPartition::LineWithBump { bump, .. } => line_with_bump(r, bump),
        CanonicalPartition::Grid { nx, ny, .. } => {
            let (nx, ny) = (*nx, *ny);
            if nx == 0 || ny == 0 {
                return Err(invalid("grid", "cell counts must be positive"));
            }
            let x = |i: usize| -r + 2.0 * r * i as f64 / nx as f64;
            let y = |j: usize| -r + 2.0 * r * j as f64 / ny as f64;
            let mut b = Builder::square(r);
            for j in 0..ny {
                for i in 0..nx {
                    let cell = [[x(i), y(j)], [x(i + 1), y(j)], [x(i + 1), y(j + 1)], [x(i), y(j + 1)]];
                    b.piece(j * nx + i + 1, &cell);
                }
            }
            b.finish(false)
        }
        CanonicalPartition::K4Cells { radius, .. } => {
            let rho = *radius;
            if !(rho > 0.0 && rho < r) {
                return Err(invalid("radius", "must lie in (0, box_radius)"));
            }
            let h = rho * 3.0.sqrt() / 2.0;
            let v = [[h, 0.5 * rho], [0.0, rho], [-h, 0.5 * rho], [-h, -0.5 * rho], [0.0, -rho], [h, -0.5 * rho]];
            let o = [0.0, 0.0];
            let mut b = Builder::square(r);
            b.piece(1, &[o, v[5], v[0], v[1]]);
            b.piece(2, &[o, v[1], v[2], v[3]]);
            b.piece(3, &[o, v[3], v[4], v[5]]);
            for j in 0..6 {
                b.annular_piece(4, o, v[j], v[(j + 1) % 6]);
            }
            b.finish(false)
        }
        CanonicalPartition::Ngon { sides, radius, .. } => {
            let (m, rho) = (*sides, *radius);
            if m < 3 {
                return Err(invalid("sides", "a polygon needs at least three sides"));
            }
            if !(rho > 0.0 && rho < r) {
                return Err(invalid("radius", "must lie in (0, box_radius)"));
            }
            let o = [0.0, 0.0];
            let v: Vec<Point> = (0..m)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / m as f64;
                    [rho * t.cos(), rho * t.sin()]
                })
                .collect();
            let mut b = Builder::square(r);
            for j in 0..m {
                b.piece(1, &[o, v[j], v[(j + 1) % m]]);
            }
            // rings of near-square cells outside the polygon, so the mesh
            // next to the interface does not depend on the box
            let q = 1.0 + 2.0 * PI / m as f64;
            let mut ring = v;
            while ring[0][0] * q <= 0.75 * r {
                let next: Vec<Point> = ring.iter().map(|p| [p[0] * q, p[1] * q]).collect();
                for j in 0..m {
                    let k = (j + 1) % m;
                    b.piece(2, &[ring[j], next[j], next[k], ring[k]]);
                }
                ring = next;
            }
            for j in 0..m {
                b.annular_piece(2, o, ring[j], ring[(j + 1) % m]);
            }
            b.finish(false)
        }
    }
}

fn wedge(r: f64, angle: f64) -> Result<Partition> {
    if !(angle > 0.0 && angle <= PI) {
        return Err(invalid("angle", "wedge angle must lie in (0, π]"));
    }
    let half = 0.5 * angle;
    let (s, c) = (half.sin(), half.cos());
    // left boundary ray has direction (−sin, cos); the right one is its mirror
    let hit_left = if s >= c { [-r, snap(r * c / s, r)] } else { [-r * s / c, r] };
    let o = [0.0, 0.0];
    let top = [0.0, r];
    let bottom = [0.0, -r];
    let mut b = Builder::square(r);
    let mut wl = alloc::vec![o, top];
    if hit_left[0] == -r {
        wl.push([-r, r]);
    }
    wl.push(hit_left);
    let mut cl = alloc::vec![o, hit_left];
    if hit_left[0] != -r {
        cl.push([-r, r]);
    }
    cl.push([-r, -r]);
    cl.push(bottom);
    let mirror = |loop_: &[Point]| -> Vec<Point> { loop_.iter().rev().map(|p| [-p[0], p[1]]).collect() };
    let (wr, cr) = (mirror(&wl), mirror(&cl));
    b.piece(1, &wl);
    b.piece(1, &wr);
    b.piece(2, &cl);
    b.piece(2, &cr);
    b.finish(true)
}

fn line_with_bump(r: f64, bump: &[Point]) -> Result<Partition> {
    let m = bump.len();
    if m < 3 {
        return Err(invalid("bump", "polygon needs at least three vertices"));
    }
    let tol = 1e-12 * r;
    if bump.iter().any(|p| !(p[1] > tol && p[1] < r - tol && p[0].abs() < r - tol)) {
        return Err(invalid("bump", "polygon must lie strictly inside the upper half of the box"));
    }
    if polygon_area(bump) <= 0.0 {
        return Err(invalid("bump", "polygon must be simple and counter-clockwise"));
    }
    let area = polygon_area(bump);
    let mut c = [0.0, 0.0];
    for i in 0..m {
        let (p, q) = (bump[i], bump[(i + 1) % m]);
        let w = p[0] * q[1] - q[0] * p[1];
        c[0] += (p[0] + q[0]) * w;
        c[1] += (p[1] + q[1]) * w;
    }
    c = [c[0] / (6.0 * area), c[1] / (6.0 * area)];
    for i in 0..m {
        if cross(c, bump[i], bump[(i + 1) % m]) <= tol * r {
            return Err(invalid("bump", "polygon must be simple and star-shaped about its centroid"));
        }
    }
    // winding number one about the centroid rules out self-overlapping loops
    let mut turn = 0.0;
    for i in 0..m {
        let (p, q) = (bump[i], bump[(i + 1) % m]);
        turn += libm::atan2(cross(c, p, q), (p[0] - c[0]) * (q[0] - c[0]) + (p[1] - c[1]) * (q[1] - c[1]));
    }
    if (turn - 2.0 * PI).abs() > 1e-9 {
        return Err(invalid("bump", "polygon is not simple"));
    }
    let mut b = Builder::new(r, alloc::vec![[-r, 0.0], [r, 0.0], [r, r], [-r, r]]);
    for i in 0..m {
        b.piece(1, &[c, bump[i], bump[(i + 1) % m]]);
    }
    for i in 0..m {
        b.annular_piece(2, c, bump[i], bump[(i + 1) % m]);
    }
    b.outer = alloc::vec![[-r, -r], [r, -r], [r, r], [-r, r]];
    b.piece(3, &[[-r, -r], [r, -r], [r, 0.0], [-r, 0.0]]);
    b.finish(false)
}
