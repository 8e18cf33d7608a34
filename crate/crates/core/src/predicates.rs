//! Orientation and in-sphere predicates in R^d.
//!
//! Determinants are evaluated in floating point first. When the result is
//! smaller than a fixed fraction of its Hadamard bound the sign is recomputed
//! with exact rational arithmetic on the (exactly representable) inputs.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Fraction of the Hadamard bound below which a floating-point determinant
/// is not trusted.
const FILTER_RELATIVE: f64 = 1e-10;

fn float_det(mut m: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                m[a * n + col]
                    .abs()
                    .partial_cmp(&m[b * n + col].abs())
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap();
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
            }
        }
    }
    det
}

fn hadamard_bound(m: &[f64], n: usize) -> f64 {
    m.chunks_exact(n)
        .map(|row| row.iter().map(|x| x * x).sum::<f64>().sqrt())
        .product()
}

fn exact_det_sign(mut m: Vec<BigRational>, n: usize) -> i8 {
    let mut sign = 1i8;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
            return 0;
        };
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            sign = -sign;
        }
        let p = m[col * n + col].clone();
        if p.is_negative() {
            sign = -sign;
        }
        for r in col + 1..n {
            if m[r * n + col].is_zero() {
                continue;
            }
            let f = &m[r * n + col] / &p;
            for k in col..n {
                let delta = &f * &m[col * n + k];
                m[r * n + k] -= delta;
            }
        }
    }
    sign
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

/// Sign of the orientation determinant `det[p_1 - p_0, ..., p_d - p_0]`.
pub fn orient(points: &[&[f64]]) -> i8 {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d + 1);
    let p0 = points[0];
    let m: Vec<f64> = points[1..]
        .iter()
        .flat_map(|p| p.iter().zip(p0).map(|(a, b)| a - b))
        .collect();
    let det = float_det(m.clone(), d);
    if det.abs() > FILTER_RELATIVE * hadamard_bound(&m, d) {
        return det.signum() as i8;
    }
    let p0r: Vec<BigRational> = p0.iter().map(|&x| rational(x)).collect();
    let mr: Vec<BigRational> = points[1..]
        .iter()
        .flat_map(|p| {
            p.iter()
                .zip(&p0r)
                .map(|(&a, b)| rational(a) - b)
                .collect::<Vec<_>>()
        })
        .collect();
    exact_det_sign(mr, d)
}

/// Sign of the lifted determinant with rows `(p_i - q, |p_i - q|^2)`.
fn lifted_sign(points: &[&[f64]], q: &[f64]) -> i8 {
    let d = q.len();
    let n = d + 1;
    let mut m = Vec::with_capacity(n * n);
    for p in points {
        let mut sq = 0.0;
        for (a, b) in p.iter().zip(q) {
            m.push(a - b);
            sq += (a - b) * (a - b);
        }
        m.push(sq);
    }
    let det = float_det(m.clone(), n);
    if det.abs() > FILTER_RELATIVE * hadamard_bound(&m, n) {
        return det.signum() as i8;
    }
    let qr: Vec<BigRational> = q.iter().map(|&x| rational(x)).collect();
    let mut mr = Vec::with_capacity(n * n);
    for p in points {
        let mut sq = BigRational::zero();
        for (&a, b) in p.iter().zip(&qr) {
            let diff = rational(a) - b;
            sq += &diff * &diff;
            mr.push(diff);
        }
        mr.push(sq);
    }
    exact_det_sign(mr, n)
}

/// Product of orientation and lifted signs that corresponds to "inside",
/// fixed per dimension from the unit simplex and its centroid.
fn inside_convention(d: usize) -> i8 {
    static CACHE: OnceLock<Vec<i8>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        (0..=8)
            .map(|d| {
                if d == 0 {
                    return 1;
                }
                let mut verts = vec![vec![0.0; d]];
                for i in 0..d {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    verts.push(e);
                }
                let c = vec![1.0 / (d + 1) as f64; d];
                let refs: Vec<&[f64]> = verts.iter().map(|v| v.as_slice()).collect();
                orient(&refs) * lifted_sign(&refs, &c)
            })
            .collect()
    });
    table[d]
}

/// Position of a query point relative to a circumsphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpherePosition {
    Inside,
    On,
    Outside,
}

/// Exact position of `q` relative to the circumsphere of the d+1 `points`.
/// Returns `None` when the points are affinely dependent.
pub fn in_sphere(points: &[&[f64]], q: &[f64]) -> Option<SpherePosition> {
    let o = orient(points);
    if o == 0 {
        return None;
    }
    let s = o * lifted_sign(points, q);
    Some(if s == 0 {
        SpherePosition::On
    } else if s == inside_convention(q.len()) {
        SpherePosition::Inside
    } else {
        SpherePosition::Outside
    })
}

/// Same as [`in_sphere`] for a simplex already known to have orientation `o`.
pub fn in_sphere_oriented(points: &[&[f64]], orientation: i8, q: &[f64]) -> SpherePosition {
    let s = orientation * lifted_sign(points, q);
    if s == 0 {
        SpherePosition::On
    } else if s == inside_convention(q.len()) {
        SpherePosition::Inside
    } else {
        SpherePosition::Outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_signs() {
        let pts: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        assert_eq!(orient(&pts), 1);
        let pts: Vec<&[f64]> = vec![&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]];
        assert_eq!(orient(&pts), -1);
        let pts: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert_eq!(orient(&pts), 0);
    }

    #[test]
    fn nearly_collinear_uses_exact_path() {
        let eps = f64::EPSILON;
        let tip = [2.0, 2.0 + 4.0 * eps];
        let pts: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0], &tip];
        assert_eq!(orient(&pts), 1);
        let pts: Vec<&[f64]> = vec![&[0.1, 0.1], &[0.2, 0.2], &[0.30000000000000004, 0.30000000000000004]];
        assert_eq!(orient(&pts), 0);
    }

    #[test]
    fn triangle_positions() {
        let tri: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        assert_eq!(in_sphere(&tri, &[1.0, 1.0]), Some(SpherePosition::On));
        assert_eq!(in_sphere(&tri, &[0.3, 0.3]), Some(SpherePosition::Inside));
        assert_eq!(in_sphere(&tri, &[5.0, 5.0]), Some(SpherePosition::Outside));
        let rev: Vec<&[f64]> = vec![&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]];
        assert_eq!(in_sphere(&rev, &[0.3, 0.3]), Some(SpherePosition::Inside));
    }

    #[test]
    fn degenerate_has_no_sphere() {
        let col: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert_eq!(in_sphere(&col, &[0.0, 1.0]), None);
    }

    #[test]
    fn cospherical_in_higher_dimensions() {
        // vertices of the unit cube are co-spherical
        for d in 3..=5 {
            let mut verts = vec![vec![0.0; d]];
            for i in 0..d {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                verts.push(e);
            }
            let refs: Vec<&[f64]> = verts.iter().map(|v| v.as_slice()).collect();
            let mut far = vec![1.0; d];
            assert_eq!(in_sphere(&refs, &far), Some(SpherePosition::On));
            far[0] = 1.0 + 1e-15;
            assert_eq!(in_sphere(&refs, &far), Some(SpherePosition::Outside));
            far[0] = 1.0 - 1e-15;
            assert_eq!(in_sphere(&refs, &far), Some(SpherePosition::Inside));
        }
    }
}
