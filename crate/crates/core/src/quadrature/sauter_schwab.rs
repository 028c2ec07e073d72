//! Sauter–Schwab relative-coordinate quadrature for weakly singular kernels
//! on pairs of flat triangles that touch.
//!
//! The reference element is `{0 <= x2 <= x1 <= 1}` mapped by
//! `A0 + x1 (A1 - A0) + x2 (A2 - A1)`. Each touching configuration is split
//! into simplices on which a Duffy-type substitution cancels the `1/|x - y|`
//! singularity; the result is integrated with tensor Gauss–Legendre in four
//! variables.
//!
//! Vertex ordering expected by the rules:
//! * coincident: the same triangle, same vertex order for both factors;
//! * edge: both triangles list the shared edge as vertices 0 and 1, same order;
//! * vertex: both triangles list the shared vertex first.
//!
//! The edge rule is symmetrized (each point is paired with its swap at half
//! weight), so every rule is invariant under exchanging the two triangles and
//! Galerkin matrices built from it are symmetric up to roundoff.

use super::gauss_legendre_unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    Coincident,
    Edge,
    Vertex,
    Regular,
}

impl PairKind {
    /// Classifies by the number of shared vertices.
    pub fn from_shared(shared: usize) -> Self {
        match shared {
            0 => PairKind::Regular,
            1 => PairKind::Vertex,
            2 => PairKind::Edge,
            _ => PairKind::Coincident,
        }
    }
}

/// Points `(x, y, w)` on the product of two reference triangles, in the
/// standard `(xi, eta)` coordinates of [`super::TriangleRule`].
#[derive(Debug, Clone)]
pub struct SingularRule {
    kind: PairKind,
    points: Vec<([f64; 2], [f64; 2], f64)>,
}

type Region = fn(f64, f64, f64, f64) -> ([f64; 2], [f64; 2], f64);

const COINCIDENT: [Region; 6] = [
    |x, a, b, c| {
        (
            [x, x * (1.0 - a + a * b)],
            [x * (1.0 - a * b * c), x * (1.0 - a)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b * c), x * (1.0 - a)],
            [x, x * (1.0 - a + a * b)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x, x * a * (1.0 - b + b * c)],
            [x * (1.0 - a * b), x * a * (1.0 - b)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b), x * a * (1.0 - b)],
            [x, x * a * (1.0 - b + b * c)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b * c), x * a * (1.0 - b * c)],
            [x, x * a * (1.0 - b)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x, x * a * (1.0 - b)],
            [x * (1.0 - a * b * c), x * a * (1.0 - b * c)],
            x * x * x * a * a * b,
        )
    },
];

const EDGE: [Region; 5] = [
    |x, a, b, c| {
        (
            [x, x * a * c],
            [x * (1.0 - a * b), x * a * (1.0 - b)],
            x * x * x * a * a,
        )
    },
    |x, a, b, c| {
        (
            [x, x * a],
            [x * (1.0 - a * b * c), x * a * b * (1.0 - c)],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b), x * a * (1.0 - b)],
            [x, x * a * b * c],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b * c), x * a * b * (1.0 - c)],
            [x, x * a],
            x * x * x * a * a * b,
        )
    },
    |x, a, b, c| {
        (
            [x * (1.0 - a * b * c), x * a * (1.0 - b * c)],
            [x, x * a * b],
            x * x * x * a * a * b,
        )
    },
];

const VERTEX: [Region; 2] = [
    |x, a, b, c| ([x, x * a], [x * b, x * b * c], x * x * x * b),
    |x, a, b, c| ([x * b, x * b * c], [x, x * a], x * x * x * b),
];

impl SingularRule {
    /// Builds the rule with `order` Gauss points per dimension.
    ///
    /// # Panics
    /// For [`PairKind::Regular`], which has no singular rule.
    pub fn new(kind: PairKind, order: usize) -> Self {
        let regions: &[Region] = match kind {
            PairKind::Coincident => &COINCIDENT,
            PairKind::Edge => &EDGE,
            PairKind::Vertex => &VERTEX,
            PairKind::Regular => panic!("regular pairs use tensor triangle rules"),
        };
        let gl = gauss_legendre_unit(order.max(1));
        let mut points = Vec::with_capacity(2 * regions.len() * gl.len().pow(4));
        for region in regions {
            for &(xi, w0) in &gl {
                for &(e1, w1) in &gl {
                    for &(e2, w2) in &gl {
                        for &(e3, w3) in &gl {
                            let (xs, ys, jac) = region(xi, e1, e2, e3);
                            // the two reference areas of 1/2 turn into the factor 4
                            let w = 4.0 * jac * w0 * w1 * w2 * w3;
                            let (x, y) = (to_standard(xs), to_standard(ys));
                            if kind == PairKind::Edge {
                                points.push((x, y, 0.5 * w));
                                points.push((y, x, 0.5 * w));
                            } else {
                                points.push((x, y, w));
                            }
                        }
                    }
                }
            }
        }
        SingularRule { kind, points }
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &([f64; 2], [f64; 2], f64)> + '_ {
        self.points.iter()
    }
}

/// `(x1, x2)` on `{0 <= x2 <= x1 <= 1}` to `(xi, eta) = (x1 - x2, x2)`.
fn to_standard(p: [f64; 2]) -> [f64; 2] {
    [p[0] - p[1], p[1]]
}
