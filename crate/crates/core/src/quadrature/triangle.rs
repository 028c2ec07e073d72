use super::gauss_legendre_unit;

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Points are `(xi, eta)` so that the physical point is
/// `v0 + xi (v1 - v0) + eta (v2 - v0)`. Weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    degree: usize,
}

impl TriangleRule {
    /// Rule exact for polynomials of total degree `degree`.
    ///
    /// Symmetric Dunavant rules up to degree 6, collapsed Gauss–Legendre
    /// (Stroud conical product) above.
    pub fn of_degree(degree: usize) -> Self {
        let mut rule = TriangleRule {
            points: Vec::new(),
            weights: Vec::new(),
            degree,
        };
        match degree {
            0 | 1 => rule.push_centroid(1.0),
            2 => rule.push_orbit3(1.0 / 6.0, 1.0 / 3.0),
            3 | 4 => {
                rule.push_orbit3(0.445_948_490_915_965, 0.223_381_589_678_011);
                rule.push_orbit3(0.091_576_213_509_771, 0.109_951_743_655_322);
            }
            5 => {
                rule.push_centroid(0.225);
                rule.push_orbit3(0.470_142_064_105_115, 0.132_394_152_788_506);
                rule.push_orbit3(0.101_286_507_323_456, 0.125_939_180_544_827);
            }
            6 => {
                rule.push_orbit3(0.249_286_745_170_910, 0.116_786_275_726_379);
                rule.push_orbit3(0.063_089_014_491_502, 0.050_844_906_370_207);
                rule.push_orbit6(0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374);
            }
            _ => {
                let n = (degree + 2).div_ceil(2);
                let gl = gauss_legendre_unit(n);
                for &(u, wu) in &gl {
                    for &(v, wv) in &gl {
                        // (u, v) -> (u, v (1 - u)), Jacobian (1 - u), reference area 1/2
                        rule.points.push([u, v * (1.0 - u)]);
                        rule.weights.push(2.0 * wu * wv * (1.0 - u));
                    }
                }
            }
        }
        let total: f64 = rule.weights.iter().sum();
        for w in &mut rule.weights {
            *w /= total;
        }
        rule
    }

    fn push_centroid(&mut self, w: f64) {
        self.points.push([1.0 / 3.0, 1.0 / 3.0]);
        self.weights.push(w);
    }

    /// Orbit of the barycentric point `(a, a, 1 - 2a)`.
    fn push_orbit3(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [a, b], [b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    /// Orbit of the barycentric point `(a, b, 1 - a - b)`.
    fn push_orbit6(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact mean of xi^a eta^b over the reference triangle: 2 a! b! / (a+b+2)!.
    fn exact_mean(a: u32, b: u32) -> f64 {
        2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for degree in 1..=14 {
            let rule = TriangleRule::of_degree(degree);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q: f64 = rule
                        .iter()
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let e = exact_mean(a, b);
                    assert!((q - e).abs() < 1e-13, "degree {degree} monomial ({a},{b}): {q} vs {e}");
                }
            }
        }
    }

    #[test]
    fn points_lie_inside() {
        for degree in 1..=10 {
            for (p, w) in TriangleRule::of_degree(degree).iter() {
                assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-15);
                assert!(w > 0.0);
            }
        }
    }
}
