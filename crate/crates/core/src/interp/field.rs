//! Analytic scalar and vector fields with exact derivatives, and a registry
//! addressed by name plus parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major d×d Hessian.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
    /// Total degree when the field is a polynomial.
    fn poly_degree(&self) -> Option<usize> {
        None
    }
}

pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major Jacobian, entry (i, j) = ∂f_i/∂x_j.
    fn jacobian(&self, x: &[f64]) -> Vec<f64>;
    fn poly_degree(&self) -> Option<usize> {
        None
    }
}

/// `Σ c_t Π x_i^{p_ti}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

fn ipow(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

impl Polynomial {
    /// `∂/∂x_i` of one term, as (coefficient, powers).
    fn diff(c: f64, p: &[u32], i: usize) -> Option<(f64, Vec<u32>)> {
        if p[i] == 0 {
            return None;
        }
        let mut q = p.to_vec();
        q[i] -= 1;
        Some((c * p[i] as f64, q))
    }

    fn eval_term(x: &[f64], c: f64, p: &[u32]) -> f64 {
        c * x.iter().zip(p).map(|(&xi, &pi)| ipow(xi, pi)).product::<f64>()
    }
}

impl ScalarField for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, p)| Self::eval_term(x, *c, p)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.terms
                    .iter()
                    .filter_map(|(c, p)| Self::diff(*c, p, i))
                    .map(|(c, p)| Self::eval_term(x, c, &p))
                    .sum()
            })
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = self
                    .terms
                    .iter()
                    .filter_map(|(c, p)| Self::diff(*c, p, i))
                    .filter_map(|(c, p)| Self::diff(c, &p, j))
                    .map(|(c, p)| Self::eval_term(x, c, &p))
                    .sum();
            }
        }
        h
    }

    fn poly_degree(&self) -> Option<usize> {
        Some(
            self.terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(_, p)| p.iter().sum::<u32>() as usize)
                .max()
                .unwrap_or(0),
        )
    }
}

/// `Π sin(ω x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SineProduct {
    pub dim: usize,
    pub frequency: f64,
}

impl ScalarField for SineProduct {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| (self.frequency * xi).sin()).product()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let w = self.frequency;
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        if j == i {
                            w * (w * x[j]).cos()
                        } else {
                            (w * x[j]).sin()
                        }
                    })
                    .product()
            })
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let w = self.frequency;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = (0..d)
                    .map(|m| {
                        let s = (w * x[m]).sin();
                        let c = (w * x[m]).cos();
                        match (m == i, m == j) {
                            (true, true) => -w * w * s,
                            (true, false) | (false, true) => w * c,
                            (false, false) => s,
                        }
                    })
                    .product();
            }
        }
        h
    }
}

/// `sin(k·x + φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWave {
    pub wave: Vec<f64>,
    pub phase: f64,
}

impl PlaneWave {
    fn arg(&self, x: &[f64]) -> f64 {
        self.wave.iter().zip(x).map(|(k, xi)| k * xi).sum::<f64>() + self.phase
    }
}

impl ScalarField for PlaneWave {
    fn dim(&self) -> usize {
        self.wave.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.arg(x).sin()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let c = self.arg(x).cos();
        self.wave.iter().map(|k| k * c).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let s = self.arg(x).sin();
        let d = self.dim();
        (0..d * d)
            .map(|ij| -self.wave[ij / d] * self.wave[ij % d] * s)
            .collect()
    }
}

/// `exp(-|x - c|^2 / (2 w^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    pub center: Vec<f64>,
    pub width: f64,
}

impl ScalarField for Gaussian {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        (-r2 / (2.0 * self.width * self.width)).exp()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g = self.value(x);
        let s2 = self.width * self.width;
        x.iter().zip(&self.center).map(|(a, b)| -(a - b) / s2 * g).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let g = self.value(x);
        let s2 = self.width * self.width;
        let d = self.dim();
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        (0..d * d)
            .map(|ij| {
                let (i, j) = (ij / d, ij % d);
                let delta = if i == j { 1.0 } else { 0.0 };
                g * (y[i] * y[j] / (s2 * s2) - delta / s2)
            })
            .collect()
    }
}

/// `|x|^2 + a·x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub a: Vec<f64>,
    pub b: f64,
}

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.a).map(|(xi, ai)| xi * xi + ai * xi).sum::<f64>() + self.b
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.a).map(|(xi, ai)| 2.0 * xi + ai).collect()
    }

    fn hessian(&self, _x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|ij| if ij / d == ij % d { 2.0 } else { 0.0 }).collect()
    }

    fn poly_degree(&self) -> Option<usize> {
        Some(2)
    }
}

/// The gradient of a scalar field seen as a vector field.
pub struct GradientField<'a>(pub &'a dyn ScalarField);

impl VectorField for GradientField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.0.gradient(x)
    }

    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        self.0.hessian(x)
    }

    fn poly_degree(&self) -> Option<usize> {
        self.0.poly_degree().map(|p| p.saturating_sub(1))
    }
}

/// Rotation in the first two coordinates: `(-x_2, x_1, 0, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotational {
    pub dim: usize,
}

impl VectorField for Rotational {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.dim];
        f[0] = -x[1];
        f[1] = x[0];
        f
    }

    fn jacobian(&self, _x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut j = vec![0.0; d * d];
        j[1] = -1.0;
        j[d] = 1.0;
        j
    }

    fn poly_degree(&self) -> Option<usize> {
        Some(1)
    }
}

/// `f_i = sin(ω x_i)` for even i and `cos(ω x_i)` for odd i.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigVector {
    pub dim: usize,
    pub frequency: f64,
}

impl VectorField for TrigVector {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        let w = self.frequency;
        (0..self.dim)
            .map(|i| if i % 2 == 0 { (w * x[i]).sin() } else { (w * x[i]).cos() })
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let w = self.frequency;
        let mut j = vec![0.0; d * d];
        for i in 0..d {
            j[i * d + i] = if i % 2 == 0 {
                w * (w * x[i]).cos()
            } else {
                -w * (w * x[i]).sin()
            };
        }
        j
    }
}

fn default_frequency() -> f64 {
    PI
}

fn default_width() -> f64 {
    0.25
}

/// One monomial of a registry polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Scalar field registry entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Polynomial {
        terms: Vec<Term>,
    },
    SineProduct {
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
    PlaneWave {
        wave: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "default_width")]
        width: f64,
    },
    Quadratic {
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: f64,
    },
}

impl FieldSpec {
    /// Registry entry with default parameters.
    pub fn by_name(name: &str, dim: usize) -> Result<FieldSpec> {
        Ok(match name {
            "sine-product" | "sine" => FieldSpec::SineProduct {
                frequency: PI,
            },
            "plane-wave" => FieldSpec::PlaneWave {
                wave: (0..dim).map(|i| PI * (1.0 + 0.5 * i as f64)).collect(),
                phase: 0.3,
            },
            "gaussian" => FieldSpec::Gaussian {
                center: vec![0.5; dim],
                width: default_width(),
            },
            "quadratic" => FieldSpec::Quadratic {
                a: vec![0.0; dim],
                b: 0.0,
            },
            "linear" => FieldSpec::Polynomial {
                terms: (0..dim)
                    .map(|i| {
                        let mut p = vec![0; dim];
                        p[i] = 1;
                        Term {
                            coef: 1.0 + i as f64,
                            powers: p,
                        }
                    })
                    .collect(),
            },
            other => return Err(Error::InvalidArgument(format!("unknown field '{other}'"))),
        })
    }

    /// Accepts either a registry name or a JSON object.
    pub fn parse(text: &str, dim: usize) -> Result<FieldSpec> {
        let t = text.trim();
        if t.starts_with('{') {
            serde_json::from_str(t).map_err(|e| Error::InvalidArgument(format!("field spec: {e}")))
        } else {
            FieldSpec::by_name(t, dim)
        }
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn ScalarField>> {
        let check = |n: usize| {
            if n == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: n,
                })
            }
        };
        Ok(match self {
            FieldSpec::Polynomial { terms } => {
                for t in terms {
                    check(t.powers.len())?;
                }
                Box::new(Polynomial {
                    dim,
                    terms: terms.iter().map(|t| (t.coef, t.powers.clone())).collect(),
                })
            }
            FieldSpec::SineProduct { frequency } => Box::new(SineProduct {
                dim,
                frequency: *frequency,
            }),
            FieldSpec::PlaneWave { wave, phase } => {
                check(wave.len())?;
                Box::new(PlaneWave {
                    wave: wave.clone(),
                    phase: *phase,
                })
            }
            FieldSpec::Gaussian { center, width } => {
                let center = if center.is_empty() { vec![0.5; dim] } else { center.clone() };
                check(center.len())?;
                if !(*width > 0.0) {
                    return Err(Error::InvalidArgument("gaussian width must be positive".into()));
                }
                Box::new(Gaussian {
                    center,
                    width: *width,
                })
            }
            FieldSpec::Quadratic { a, b } => {
                let a = if a.is_empty() { vec![0.0; dim] } else { a.clone() };
                check(a.len())?;
                Box::new(Quadratic { a, b: *b })
            }
        })
    }
}

/// Vector field registry entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorFieldSpec {
    Rotational,
    TrigVector {
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
}

impl VectorFieldSpec {
    pub fn by_name(name: &str) -> Result<VectorFieldSpec> {
        match name {
            "rotational" => Ok(VectorFieldSpec::Rotational),
            "trig-vector" => Ok(VectorFieldSpec::TrigVector { frequency: PI }),
            other => Err(Error::InvalidArgument(format!("unknown vector field '{other}'"))),
        }
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn VectorField>> {
        match self {
            VectorFieldSpec::Rotational => {
                if dim < 2 {
                    return Err(Error::InvalidArgument("rotational field needs d >= 2".into()));
                }
                Ok(Box::new(Rotational { dim }))
            }
            VectorFieldSpec::TrigVector { frequency } => Ok(Box::new(TrigVector {
                dim,
                frequency: *frequency,
            })),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn check_derivatives(f: &dyn ScalarField, seed: u64) {
        let d = f.dim();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            let g = f.gradient(&x);
            let hs = f.hessian(&x);
            for i in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                let scale = g.iter().map(|v| v.abs()).fold(1e-3, f64::max);
                assert!((fd - g[i]).abs() <= 1e-6 * scale, "gradient {i}: {fd} vs {}", g[i]);
                let gp = f.gradient(&xp);
                let gm = f.gradient(&xm);
                let hscale = hs.iter().map(|v| v.abs()).fold(1e-3, f64::max);
                for j in 0..d {
                    let fd = (gp[j] - gm[j]) / (2.0 * h);
                    assert!((fd - hs[j * d + i]).abs() <= 1e-6 * hscale);
                }
            }
        }
    }

    #[test]
    fn registry_derivatives() {
        for d in 1..=4 {
            for name in ["sine-product", "plane-wave", "gaussian", "quadratic", "linear"] {
                let f = FieldSpec::by_name(name, d).unwrap().build(d).unwrap();
                check_derivatives(f.as_ref(), d as u64);
            }
        }
        let p = Polynomial {
            dim: 3,
            terms: vec![(1.5, vec![2, 1, 0]), (-0.5, vec![0, 1, 3]), (2.0, vec![0, 0, 0])],
        };
        check_derivatives(&p, 9);
        assert_eq!(p.poly_degree(), Some(4));
    }

    #[test]
    fn json_specs() {
        let f = FieldSpec::parse(r#"{"name":"plane-wave","wave":[1.0,2.0]}"#, 2).unwrap();
        assert_eq!(
            f,
            FieldSpec::PlaneWave {
                wave: vec![1.0, 2.0],
                phase: 0.0
            }
        );
        assert!(f.build(3).is_err());
        assert!(FieldSpec::parse("nonsense", 2).is_err());
    }

    #[test]
    fn vector_fields() {
        let r = VectorFieldSpec::by_name("rotational").unwrap().build(2).unwrap();
        assert_eq!(r.value(&[0.3, 0.7]), vec![-0.7, 0.3]);
        let t = VectorFieldSpec::by_name("trig-vector").unwrap().build(2).unwrap();
        let x = [0.25, 0.5];
        let v = t.value(&x);
        assert!((v[0] - (PI * 0.25).sin()).abs() < 1e-15 && (v[1] - (PI * 0.5).cos()).abs() < 1e-15);
    }
}
