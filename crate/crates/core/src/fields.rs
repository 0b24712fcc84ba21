//! Analytic test fields on the unit sphere (and planar polynomials), plus
//! error norms and observed convergence rates.

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnalyticField {
    /// `(sin πx + cos πy)·z`
    F1,
    /// Real part of the unnormalized degree-6 spherical harmonic `Y₆⁴`.
    F2,
    /// Axisymmetric "interacting waves" with C⁰ and C¹ breaks in θ.
    F3,
    /// "Crossing waves": C⁰/C¹/C² breaks in θ times a jump in φ.
    F4,
    Constant(f64),
    /// Bivariate polynomial in the planar `(x, y)` coordinates, coefficients
    /// in graded lexicographic order `1, x, y, x², xy, y², …`.
    PolynomialUv(Vec<f64>),
}

/// Breakpoint colatitudes of f₃.
pub const F3_BREAKS: [f64; 4] = [0.87, FRAC_PI_2, 2.27, 2.83];
/// Global range of f₃.
pub const F3_RANGE: (f64, f64) = (0.12, 1.0);
/// C⁰ and C¹ breakpoint colatitudes of f₄.
pub const F4_BREAKS: [f64; 3] = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
/// The C² breakpoint colatitude of f₄.
pub const F4_C2_BREAK: f64 = 7.0 * PI / 8.0;

impl AnalyticField {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "f1" => Ok(AnalyticField::F1),
            "f2" => Ok(AnalyticField::F2),
            "f3" => Ok(AnalyticField::F3),
            "f4" => Ok(AnalyticField::F4),
            "const" | "constant" => Ok(AnalyticField::Constant(1.0)),
            other => Err(Error::Config(format!("unknown field `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticField::F1 => "f1",
            AnalyticField::F2 => "f2",
            AnalyticField::F3 => "f3",
            AnalyticField::F4 => "f4",
            AnalyticField::Constant(_) => "const",
            AnalyticField::PolynomialUv(_) => "poly",
        }
    }

    pub fn eval(&self, p: Vec3) -> f64 {
        let [x, y, z] = p;
        match self {
            AnalyticField::F1 => ((PI * x).sin() + (PI * y).cos()) * z,
            AnalyticField::F2 => {
                let (x2, y2) = (x * x, y * y);
                (11.0 * z * z - 1.0) * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2)
            }
            AnalyticField::F3 => {
                let (theta, _) = spherical_angles(p);
                f3_profile(theta)
            }
            AnalyticField::F4 => {
                let (theta, phi) = spherical_angles(p);
                let g = if phi < PI { -2000.0 } else { 2000.0 };
                -1000.0 + g * f4_profile(theta)
            }
            AnalyticField::Constant(c) => *c,
            AnalyticField::PolynomialUv(c) => eval_polynomial(c, x, y),
        }
    }

    pub fn sample(&self, points: &[Vec3]) -> Vec<f64> {
        points.iter().map(|&p| self.eval(p)).collect()
    }
}

/// f₃ as a function of colatitude.
pub fn f3_profile(theta: f64) -> f64 {
    if theta < 0.87 {
        1.0
    } else if theta < FRAC_PI_2 {
        1.0 - 0.8 * (theta - 0.87)
    } else if theta < 2.27 {
        0.44
    } else if theta < 2.83 {
        0.24
    } else {
        0.12
    }
}

/// The θ-dependent factor multiplying `g(φ)` in f₄.
pub fn f4_profile(theta: f64) -> f64 {
    if theta < FRAC_PI_4 {
        0.0
    } else if theta < FRAC_PI_2 {
        -4.0 * (theta / PI - 0.5)
    } else if theta < 3.0 * FRAC_PI_4 {
        4.0 * (theta / PI - 0.5)
    } else if theta < 7.0 * PI / 8.0 {
        1.0
    } else {
        let t = theta / PI;
        -64.0 * t * t + 112.0 * t - 48.0
    }
}

fn eval_polynomial(c: &[f64], x: f64, y: f64) -> f64 {
    let mut s = 0.0;
    let mut idx = 0;
    let mut degree = 0;
    while idx < c.len() {
        for j in 0..=degree {
            if idx >= c.len() {
                break;
            }
            s += c[idx] * x.powi((degree - j) as i32) * y.powi(j as i32);
            idx += 1;
        }
        degree += 1;
    }
    s
}

/// Polar angle θ ∈ [0, π] and azimuth φ ∈ [0, 2π) of a point on the unit
/// sphere; φ is 0 at both poles.
pub fn to_spherical(p: Vec3) -> Result<(f64, f64)> {
    if (vec3::norm(p) - 1.0).abs() > 1e-10 {
        return Err(Error::NotOnSphere);
    }
    Ok(spherical_angles(p))
}

fn spherical_angles(p: Vec3) -> (f64, f64) {
    let q = vec3::normalize(p);
    let theta = q[2].clamp(-1.0, 1.0).acos();
    if q[0] == 0.0 && q[1] == 0.0 {
        return (theta, 0.0);
    }
    let mut phi = q[1].atan2(q[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    (theta, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `‖e‖₂ / √N`
    pub l2: f64,
    pub linf: f64,
}

pub fn error_norms(values: &[f64], exact: &[f64]) -> Result<ErrorNorms> {
    if values.len() != exact.len() {
        return Err(Error::DimensionMismatch { expected: exact.len(), got: values.len() });
    }
    if values.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let (mut ss, mut linf) = (0.0, 0.0f64);
    for (v, e) in values.iter().zip(exact) {
        let d = v - e;
        ss += d * d;
        linf = linf.max(d.abs());
    }
    Ok(ErrorNorms { l2: (ss / values.len() as f64).sqrt(), linf })
}

/// Mean absolute error `Σ|e_i| / N`.
pub fn l1_error(values: &[f64], exact: &[f64]) -> Result<f64> {
    if values.len() != exact.len() || values.is_empty() {
        return Err(Error::DimensionMismatch { expected: exact.len(), got: values.len() });
    }
    Ok(values.iter().zip(exact).map(|(v, e)| (v - e).abs()).sum::<f64>() / values.len() as f64)
}

/// Observed order `2·log(e_coarse/e_fine) / log(N_fine/N_coarse)` for
/// quasi-uniform surface meshes with `N` nodes.
pub fn convergence_rate(err_coarse: f64, n_coarse: usize, err_fine: f64, n_fine: usize) -> Result<f64> {
    if !(err_coarse > 0.0 && err_fine > 0.0) || n_fine <= n_coarse {
        return Err(Error::NonPositiveError);
    }
    Ok(2.0 * (err_coarse / err_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
}
