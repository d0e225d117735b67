//! Smooth closed boundary curves, parametrized over `t in [0, 2pi)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Truncated Fourier series `a0 + sum_k (cos[k-1] cos kt + sin[k-1] sin kt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSeries {
    /// Value and first two derivatives at `t`.
    fn eval(&self, t: f64) -> [f64; 3] {
        let mut out = [self.a0, 0.0, 0.0];
        let modes = self.cos.len().max(self.sin.len());
        for k in 1..=modes {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            out[0] += a * c + b * s;
            out[1] += kf * (-a * s + b * c);
            out[2] += -kf * kf * (a * c + b * s);
        }
        out
    }
}

/// The shape of a parametric boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Curve {
    /// `p(t) = (a cos t, b sin t)`.
    Ellipse { a: f64, b: f64 },
    /// `p(t) = (1 + cos t)(cos t, sin t)`; reentrant cusp at `t = pi`.
    Cardioid,
    /// Limaçon `p(t) = (1 + k cos t)(cos t, sin t)` with `0 < k < 1`: a smoothed
    /// cardioid, recovering the cardioid as `k -> 1`.
    SmoothedCardioid { k: f64 },
    /// Independent Fourier series for each coordinate.
    Fourier { x: FourierSeries, y: FourierSeries },
}

/// Default shape parameter of the smoothed cardioid.
pub const SMOOTHED_CARDIOID_K: f64 = 0.75;

impl Curve {
    pub fn circle() -> Self {
        Curve::Ellipse { a: 1.0, b: 1.0 }
    }

    /// Parses `"ellipse:a,b"`, `"cardioid"`, `"cardioid-smoothed"` or
    /// `"cardioid-smoothed:k"`.
    pub fn from_name(name: &str) -> Option<Curve> {
        let (head, args) = match name.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a)),
            None => (name.trim(), None),
        };
        let nums = |s: &str| -> Option<Vec<f64>> {
            s.split(',').map(|v| v.trim().parse::<f64>().ok()).collect()
        };
        match (head, args) {
            ("circle", None) => Some(Curve::circle()),
            ("ellipse", Some(a)) => match nums(a)?.as_slice() {
                [a, b] => Some(Curve::Ellipse { a: *a, b: *b }),
                _ => None,
            },
            ("cardioid", None) => Some(Curve::Cardioid),
            ("cardioid-smoothed", None) => Some(Curve::SmoothedCardioid {
                k: SMOOTHED_CARDIOID_K,
            }),
            ("cardioid-smoothed", Some(a)) => match nums(a)?.as_slice() {
                [k] => Some(Curve::SmoothedCardioid { k: *k }),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Curve::Ellipse { a, b } => format!("ellipse:{a},{b}"),
            Curve::Cardioid => "cardioid".into(),
            Curve::SmoothedCardioid { k } => format!("cardioid-smoothed:{k}"),
            Curve::Fourier { .. } => "fourier".into(),
        }
    }

    /// `p(t)`, `p'(t)`, `p''(t)`.
    pub fn eval(&self, t: f64) -> [Vec2; 3] {
        match self {
            Curve::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                [
                    Vec2::new(a * c, b * s),
                    Vec2::new(-a * s, b * c),
                    Vec2::new(-a * c, -b * s),
                ]
            }
            Curve::Cardioid => polar_eval(t, 1.0),
            Curve::SmoothedCardioid { k } => polar_eval(t, *k),
            Curve::Fourier { x, y } => {
                let fx = x.eval(t);
                let fy = y.eval(t);
                [
                    Vec2::new(fx[0], fy[0]),
                    Vec2::new(fx[1], fy[1]),
                    Vec2::new(fx[2], fy[2]),
                ]
            }
        }
    }

    #[inline]
    pub fn point(&self, t: f64) -> Vec2 {
        self.eval(t)[0]
    }

    /// Parameter of a cusp, if the curve has one.
    pub fn cusp(&self) -> Option<f64> {
        match self {
            Curve::Cardioid => Some(PI),
            _ => None,
        }
    }

    /// Signed curvature, positive where the curve is convex.
    pub fn curvature(&self, t: f64) -> f64 {
        let [_, d1, d2] = self.eval(t);
        let speed = d1.norm();
        d1.cross(d2) / (speed * speed * speed).max(f64::MIN_POSITIVE)
    }

    /// Unit tangent and outward unit normal.
    pub fn frame(&self, t: f64) -> (Vec2, Vec2) {
        let d1 = self.eval(t)[1];
        let speed = d1.norm();
        if speed < 1e-300 {
            // At a cusp, use the limiting direction.
            let eps = 1e-7;
            let a = self.eval(t - eps)[1].normalized();
            let b = self.eval(t + eps)[1].normalized();
            let tau = (b - a).normalized().perp();
            let tau = if tau.is_finite() { tau } else { Vec2::new(1.0, 0.0) };
            return (tau, Vec2::new(tau.y, -tau.x));
        }
        let tau = d1 / speed;
        (tau, Vec2::new(tau.y, -tau.x))
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match self {
            Curve::Ellipse { a, b } if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(format!("ellipse semi-axes must be positive, got {a}, {b}"))
            }
            Curve::SmoothedCardioid { k } if !(*k > 0.0 && *k < 1.0) => {
                Err(format!("smoothed cardioid needs 0 < k < 1, got {k}"))
            }
            _ => Ok(()),
        }
    }
}

fn polar_eval(t: f64, k: f64) -> [Vec2; 3] {
    let (s, c) = t.sin_cos();
    let r = 1.0 + k * c;
    let dr = -k * s;
    let ddr = -k * c;
    let radial = Vec2::new(c, s);
    let angular = Vec2::new(-s, c);
    [
        radial * r,
        radial * dr + angular * r,
        radial * (ddr - r) + angular * (2.0 * dr),
    ]
}

/// Uniform parameter grid of `n` points on `[0, 2pi)`.
pub fn parameter_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}
