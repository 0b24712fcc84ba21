use super::stencil::Stencil;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    InverseDistance,
    ScaledBuhmann,
    WuC4,
    WendlandC4,
    WlsEno,
}

impl WeightKind {
    pub const SMOOTH: [WeightKind; 4] =
        [WeightKind::InverseDistance, WeightKind::ScaledBuhmann, WeightKind::WuC4, WeightKind::WendlandC4];

    pub fn is_compact(self) -> bool {
        matches!(self, WeightKind::ScaledBuhmann | WeightKind::WuC4 | WeightKind::WendlandC4)
    }
}

/// Weighting scheme with its dimensionless parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: WeightKind,
    /// Cut-off radius over the stencil radius, `ρ = σR` (compact kinds).
    pub sigma: f64,
    /// `ε_ID = eps_id_factor · h̄²`.
    pub eps_id_factor: f64,
    pub eps_eno: f64,
    pub c0: f64,
    pub c1: f64,
}

impl WeightScheme {
    pub fn new(kind: WeightKind, sigma: f64) -> Self {
        WeightScheme { kind, sigma, eps_id_factor: 0.01, eps_eno: 1e-3, c0: 1.0, c1: 0.05 }
    }

    pub fn inverse_distance() -> Self {
        Self::new(WeightKind::InverseDistance, 1.0)
    }

    pub fn buhmann(sigma: f64) -> Self {
        Self::new(WeightKind::ScaledBuhmann, sigma)
    }

    pub fn eno() -> Self {
        Self::new(WeightKind::WlsEno, 1.0)
    }

    /// Scaled Buhmann weights with the tuned radius ratio for degree `p`.
    pub fn default_for_degree(p: usize) -> Self {
        Self::buhmann(default_sigma(p))
    }
}

/// Tuned radius ratio σ for scaled Buhmann weights.
pub fn default_sigma(p: usize) -> f64 {
    match p {
        2 => 2.0,
        3 => 1.2,
        4 => 1.6,
        6 => 1.4,
        _ => 1.6,
    }
}

/// Buhmann's C³ compactly supported radial function.
pub fn buhmann(r: f64) -> f64 {
    if !(r < 1.0) {
        return 0.0;
    }
    let r2 = r * r;
    let sr = r.sqrt();
    let v = 112.0 / 45.0 * r2 * r2 * sr + 16.0 / 3.0 * r2 * r * sr - 7.0 * r2 * r2 - 14.0 / 15.0 * r2 + 1.0 / 9.0;
    v.max(0.0)
}

/// Wu's C⁴ function `(1−r)₊⁵(r⁴+5r³+9r²+5r+1)`.
pub fn wu_c4(r: f64) -> f64 {
    if !(r < 1.0) {
        return 0.0;
    }
    (1.0 - r).powi(5) * ((((r + 5.0) * r + 9.0) * r + 5.0) * r + 1.0)
}

/// Wendland's C⁴ function `(1−r)₊⁶(35r²+18r+3)`.
pub fn wendland_c4(r: f64) -> f64 {
    if !(r < 1.0) {
        return 0.0;
    }
    (1.0 - r).powi(6) * ((35.0 * r + 18.0) * r + 3.0)
}

/// Field data needed by the data-dependent ENO weights, indexed by source node.
#[derive(Debug, Clone, Copy)]
pub struct EnoContext<'a> {
    pub values: &'a [f64],
    /// Linear/bilinear interpolant at the evaluation point.
    pub g0: f64,
    /// Global range of the source field.
    pub delta_f_global: f64,
    /// Largest `|α_e|` over the elements incident to each source node.
    pub alpha_max: &'a [f64],
}

/// Weight of stencil node `j` for a degree-`p` fit.
pub fn eval_weight(
    scheme: &WeightScheme,
    stencil: &Stencil,
    j: usize,
    p: usize,
    ctx: Option<&EnoContext>,
) -> Result<f64> {
    let r = stencil.r[j];
    let gamma = stencil.gamma_plus[j];
    let eps_id = scheme.eps_id_factor * stencil.h_bar * stencil.h_bar;
    let rho = scheme.sigma * stencil.radius;
    let compact = |phi: fn(f64) -> f64| if rho > 0.0 { gamma * phi(r / rho) } else { 0.0 };
    let w = match scheme.kind {
        WeightKind::InverseDistance => gamma * (r * r + eps_id).powf(-(p as f64) / 4.0),
        WeightKind::ScaledBuhmann => compact(buhmann),
        WeightKind::WuC4 => compact(wu_c4),
        WeightKind::WendlandC4 => compact(wendland_c4),
        WeightKind::WlsEno => {
            let ctx = ctx.ok_or(Error::MissingContext)?;
            let v = stencil.node_ids[j];
            let numer = gamma * (r * r + eps_id).powf(-0.25);
            let df = ctx.delta_f_global;
            if df == 0.0 {
                // A constant field has nothing to avoid.
                numer
            } else {
                let d = ctx.values[v] - ctx.g0;
                let h = stencil.h_bar;
                let denom = scheme.c0 * d * d + scheme.c1 * df * ctx.alpha_max[v] + scheme.eps_eno * df * df * h * h;
                numer / denom.max(f64::MIN_POSITIVE)
            }
        }
    };
    Ok(w)
}

pub fn eval_weights(scheme: &WeightScheme, stencil: &Stencil, p: usize, ctx: Option<&EnoContext>) -> Result<Vec<f64>> {
    (0..stencil.len()).map(|j| eval_weight(scheme, stencil, j, p, ctx)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wls::LocalFrame;

    fn line_stencil(n: usize) -> Stencil {
        let frame = LocalFrame::new([0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let uv: Vec<[f64; 2]> = (0..n).map(|i| [0.1 * i as f64, 0.0]).collect();
        Stencil::from_points(frame, (0..n).collect(), uv, vec![1.0; n], 0.1, 4).unwrap()
    }

    #[test]
    fn buhmann_values() {
        assert!((buhmann(0.0) - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(buhmann(1.0), 0.0);
        assert_eq!(buhmann(1.5), 0.0);
        // Hand expansion at r = 1/2 with √(1/2) kept symbolic:
        // (112/45)/16·√½ ... evaluated independently here.
        let s = 0.5f64.sqrt();
        let expect = 112.0 / 45.0 * (s / 16.0) + 16.0 / 3.0 * (s / 8.0) - 7.0 / 16.0 - 14.0 / 60.0 + 1.0 / 9.0;
        assert!((buhmann(0.5) - expect).abs() < 1e-16);
        assert!((buhmann(0.5) - 0.021676686753383523).abs() < 1e-15);
        // Just inside the support the value is tiny and never negative.
        assert!(buhmann(1.0 - 1e-9) >= 0.0);
    }

    #[test]
    fn wu_and_wendland() {
        assert_eq!(wu_c4(0.0), 1.0);
        assert_eq!(wendland_c4(0.0), 3.0);
        assert_eq!(wu_c4(1.0), 0.0);
        assert_eq!(wendland_c4(2.0), 0.0);
        let r: f64 = 0.3;
        assert!((wu_c4(r) - (0.7f64).powi(5) * (r.powi(4) + 5.0 * r.powi(3) + 9.0 * r * r + 5.0 * r + 1.0)).abs() < 1e-15);
        assert!((wendland_c4(r) - (0.7f64).powi(6) * (35.0 * r * r + 18.0 * r + 3.0)).abs() < 1e-15);
    }

    #[test]
    fn nonnegative_and_compact() {
        let s = line_stencil(12);
        // R = r_4 = 0.3; with σ = 2 the support ends at 0.6.
        for kind in WeightKind::SMOOTH {
            let w = eval_weights(&WeightScheme::new(kind, 2.0), &s, 2, None).unwrap();
            assert!(w.iter().all(|&x| x >= 0.0));
            if kind.is_compact() {
                assert!(w[6..].iter().all(|&x| x == 0.0), "{kind:?}");
                assert!(w[..6].iter().all(|&x| x > 0.0));
            }
        }
    }

    #[test]
    fn inverse_distance_formula() {
        let s = line_stencil(5);
        let w = eval_weight(&WeightScheme::inverse_distance(), &s, 3, 4, None).unwrap();
        let eps = 0.01 * 0.1 * 0.1;
        let r = s.r[3];
        assert!((w - (r * r + eps).sqrt().powf(-2.0)).abs() < 1e-12 * w);
    }

    #[test]
    fn eno_needs_context_and_reduces_to_safeguard() {
        let s = line_stencil(5);
        assert_eq!(eval_weight(&WeightScheme::eno(), &s, 0, 2, None), Err(Error::MissingContext));
        let values = vec![2.0; 5];
        let alpha = vec![0.0; 5];
        let ctx = EnoContext { values: &values, g0: 2.0, delta_f_global: 3.0, alpha_max: &alpha };
        let w = eval_weight(&WeightScheme::eno(), &s, 2, 2, Some(&ctx)).unwrap();
        let eps_id = 0.01 * 0.01;
        let expect = (0.04f64 + eps_id).powf(-0.25) / (1e-3 * 9.0 * 0.01);
        assert!((w - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn eno_scaling() {
        let s = line_stencil(6);
        let values: Vec<f64> = vec![0.0, 0.1, 0.3, 1.0, 1.2, 1.1];
        let alpha = vec![0.0, 0.01, 0.2, 0.3, 0.02, 0.0];
        let lambda = 1e3;
        let scaled: Vec<f64> = values.iter().map(|v| lambda * v - 7.0).collect();
        let alpha_s: Vec<f64> = alpha.iter().map(|a| lambda * a).collect();
        let a = EnoContext { values: &values, g0: 0.2, delta_f_global: 1.2, alpha_max: &alpha };
        let b = EnoContext { values: &scaled, g0: lambda * 0.2 - 7.0, delta_f_global: lambda * 1.2, alpha_max: &alpha_s };
        for j in 0..6 {
            let wa = eval_weight(&WeightScheme::eno(), &s, j, 2, Some(&a)).unwrap();
            let wb = eval_weight(&WeightScheme::eno(), &s, j, 2, Some(&b)).unwrap();
            assert!((wb * lambda * lambda - wa).abs() < 1e-10 * wa);
        }
    }

    #[test]
    fn sigma_defaults() {
        assert_eq!(default_sigma(2), 2.0);
        assert_eq!(default_sigma(3), 1.2);
        assert_eq!(default_sigma(4), 1.6);
        assert_eq!(default_sigma(6), 1.4);
    }
}
