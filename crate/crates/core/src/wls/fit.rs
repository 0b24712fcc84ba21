use super::stencil::{build_stencil, monomial_count, stencil_from_seeds, Purpose, Stencil};
use super::weights::{eval_weights, EnoContext, WeightScheme};
use crate::error::{Error, Result};
use crate::mesh::{ElementLocation, SurfaceMesh};
use crate::numerics::{cond_estimate_leading, evaluation_functional, qrcp_with_leading, DenseMatrix, QrcpFactors};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Monomials `1, u, v, u², uv, v², …` of total degree ≤ `p` at `(u, v)`.
pub fn monomials(uv: [f64; 2], p: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(monomial_count(p));
    let mut upow = vec![1.0; p + 1];
    let mut vpow = vec![1.0; p + 1];
    for d in 1..=p {
        upow[d] = upow[d - 1] * uv[0];
        vpow[d] = vpow[d - 1] * uv[1];
    }
    for d in 0..=p {
        for j in 0..=d {
            out.push(upow[d - j] * vpow[j]);
        }
    }
    out
}

/// Generalized Vandermonde matrix, one row per point.
pub fn vandermonde(uv: &[[f64; 2]], p: usize) -> DenseMatrix {
    let n = monomial_count(p);
    let mut a = DenseMatrix::zeros(uv.len(), n);
    for (i, &q) in uv.iter().enumerate() {
        a.row_mut(i).copy_from_slice(&monomials(q, p));
    }
    a
}

/// Column scaling `T_jj = 1/‖A_{:,j}‖₂` (1 for zero columns).
pub fn equilibrate(a: &DenseMatrix) -> Vec<f64> {
    (0..a.cols())
        .map(|j| {
            let n = a.column_norm(j);
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect()
}

/// Options for one least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlsConfig {
    pub degree: usize,
    pub scheme: WeightScheme,
    /// Estimated `κ₁(R)` above which the stencil grows, then columns drop.
    pub cond_threshold: f64,
    /// Half-ring enlargements tried before dropping columns.
    pub max_enlargements: u32,
}

impl WlsConfig {
    pub fn new(degree: usize, scheme: WeightScheme) -> Self {
        WlsConfig { degree, scheme, cond_threshold: 1e8, max_enlargements: 3 }
    }

    /// Degree-`p` fit with the tuned scaled Buhmann weights.
    pub fn smooth(degree: usize) -> Self {
        Self::new(degree, WeightScheme::default_for_degree(degree))
    }
}

/// A factored weighted fit over a stencil.
#[derive(Debug, Clone)]
pub struct WlsFit {
    /// Source node ids of the rows that carry nonzero weight.
    pub node_ids: Vec<usize>,
    pub weights: Vec<f64>,
    pub degree: usize,
    /// Pivoted columns kept after condition-driven dropping.
    pub kept_columns: usize,
    pub cond_estimate: f64,
    factors: QrcpFactors,
    scaling: Vec<f64>,
}

impl WlsFit {
    pub fn dropped_columns(&self) -> usize {
        monomial_count(self.degree) - self.kept_columns
    }

    /// Linear functional over the fit's source nodes giving the fitted
    /// polynomial's value at `uv`.
    pub fn functional_at(&self, uv: [f64; 2]) -> Result<Vec<(usize, f64)>> {
        let mono = monomials(uv, self.degree);
        let g = evaluation_functional(&self.factors, &self.scaling, self.kept_columns, &mono)?;
        Ok(self.node_ids.iter().zip(&g).zip(&self.weights).map(|((&v, &gi), &w)| (v, gi * w)).collect())
    }

    /// Functional for the value at the frame origin (the `c₀₀` coefficient).
    pub fn origin_functional(&self) -> Result<Vec<(usize, f64)>> {
        self.functional_at([0.0, 0.0])
    }
}

/// Factors the weighted, equilibrated Vandermonde system of `stencil`.
///
/// Zero-weight nodes are discarded and the degree is lowered if fewer
/// nodes remain than monomials. All `n` columns are kept; see
/// [`WlsFit::truncate`] for condition-driven dropping.
pub fn fit_stencil(stencil: &Stencil, weights: &[f64], degree: usize) -> Result<WlsFit> {
    if weights.len() != stencil.len() {
        return Err(Error::DimensionMismatch { expected: stencil.len(), got: weights.len() });
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    let keep: Vec<usize> = (0..stencil.len()).filter(|&j| weights[j] > 0.0).collect();
    if keep.is_empty() {
        return Err(Error::InsufficientStencil { required: 1, available: 0 });
    }
    let mut p = degree;
    while monomial_count(p) > keep.len() {
        p -= 1;
    }
    let uv: Vec<[f64; 2]> = keep.iter().map(|&j| stencil.uv[j]).collect();
    let w: Vec<f64> = keep.iter().map(|&j| weights[j]).collect();
    let mut a = vandermonde(&uv, p);
    a.scale_rows(&w);
    let t = equilibrate(&a);
    a.scale_columns(&t);
    let factors = qrcp_with_leading(&a, 1)?;
    let n = factors.cols();
    let cond = cond_or_infinite(&factors, n);
    Ok(WlsFit {
        node_ids: keep.iter().map(|&j| stencil.node_ids[j]).collect(),
        weights: w,
        degree: p,
        kept_columns: n,
        cond_estimate: cond,
        factors,
        scaling: t,
    })
}

fn cond_or_infinite(f: &QrcpFactors, k: usize) -> f64 {
    match cond_estimate_leading(&f.r, k) {
        Ok(c) if c.is_finite() => c,
        _ => f64::INFINITY,
    }
}

impl WlsFit {
    /// Drops trailing pivoted columns one at a time until the estimated
    /// condition number is at most `threshold`. The constant column, pivoted
    /// first, is never dropped.
    pub fn truncate(&mut self, threshold: f64) {
        while self.kept_columns > 1 && self.cond_estimate > threshold {
            self.kept_columns -= 1;
            self.cond_estimate = cond_or_infinite(&self.factors, self.kept_columns);
        }
    }
}

/// Fit with the enlarge-then-drop conditioning strategy. `make_stencil`
/// produces the stencil for a given number of half-ring enlargements.
pub fn conditioned_fit(
    cfg: &WlsConfig,
    ctx: Option<&EnoContext>,
    mut make_stencil: impl FnMut(u32) -> Result<Stencil>,
) -> Result<(Stencil, WlsFit)> {
    let mut attempt = 0;
    loop {
        let stencil = make_stencil(attempt)?;
        let weights = eval_weights(&cfg.scheme, &stencil, cfg.degree, ctx)?;
        let mut fit = fit_stencil(&stencil, &weights, cfg.degree)?;
        if fit.cond_estimate <= cfg.cond_threshold {
            return Ok((stencil, fit));
        }
        if attempt >= cfg.max_enlargements {
            fit.truncate(cfg.cond_threshold);
            return Ok((stencil, fit));
        }
        attempt += 1;
    }
}

/// One sparse row of a transfer operator with its fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub entries: Vec<(usize, f64)>,
    pub final_degree: usize,
    pub dropped_columns: usize,
    pub cond_estimate: f64,
    /// Ring size of the stencil actually used.
    pub ring: f64,
    pub stencil_size: usize,
}

impl TransferRow {
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, w)| w * values[j]).sum()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }
}

/// The row mapping source nodal values to the WLS fit's value at `point`,
/// which lies in the source element described by `loc`.
pub fn build_transfer_row(
    mesh: &SurfaceMesh,
    point: Vec3,
    loc: &ElementLocation,
    cfg: &WlsConfig,
    purpose: Purpose,
    ctx: Option<&EnoContext>,
) -> Result<TransferRow> {
    let base = build_stencil(mesh, point, loc, cfg.degree, purpose)?;
    let seeds = mesh.element(loc.element).nodes().to_vec();
    transfer_row_from(mesh, &base, &seeds, cfg, ctx)
}

/// As [`build_transfer_row`], starting from an already built stencil whose
/// seeds are `seeds` (enlargements re-use its frame).
pub fn transfer_row_from(
    mesh: &SurfaceMesh,
    base: &Stencil,
    seeds: &[usize],
    cfg: &WlsConfig,
    ctx: Option<&EnoContext>,
) -> Result<TransferRow> {
    let min = super::stencil::min_stencil_size(cfg.degree);
    let (stencil, fit) = conditioned_fit(cfg, ctx, |attempt| {
        if attempt == 0 {
            return Ok(base.clone());
        }
        let mut ring = base.ring;
        for _ in 0..attempt {
            ring = ring.grow();
        }
        let mut s = stencil_from_seeds(mesh, base.frame, seeds, ring, min)?;
        // Keep the stencil radius of the base stencil so compact supports
        // do not drift with enlargement.
        s.radius = base.radius;
        Ok(s)
    })?;
    Ok(TransferRow {
        entries: fit.origin_functional()?,
        final_degree: fit.degree,
        dropped_columns: fit.dropped_columns() + monomial_count(cfg.degree) - monomial_count(fit.degree),
        cond_estimate: fit.cond_estimate,
        ring: stencil.ring.value(),
        stencil_size: stencil.len(),
    })
}
