//! Polygonal partitions of a truncated plane, their neighbour graphs, exact
//! colourings and the phase data built from an optimal colouring.

mod builders;
mod colouring;
mod partition;
mod phases;

pub use builders::{build_canonical_partition, CanonicalPartition};
pub use colouring::{adjacency_graph, chromatic_colouring, chromatic_colouring_with_limit, is_colourable, Colouring, Graph, EXACT_COLOURING_LIMIT};
pub use partition::{Interface, Partition, PartitionSpec, Piece};
pub use phases::{edge_constant, is_admissible, phase_assignment, InteractionData, PhaseAssignment};

use crate::Point;

pub(crate) fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

pub(crate) fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        twice += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * twice
}
