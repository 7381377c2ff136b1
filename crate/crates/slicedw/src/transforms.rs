//! Radon and hierarchical Radon projections of discrete measures, and
//! closed-form Gaussian/mixture pushforwards.
//!
//! A discrete measure projects along a direction θ by the dot products
//! θᵀxᵢ. The hierarchical variant first projects through k bottleneck
//! directions Θ (d×k) and then mixes with ψ (k-vector); the final
//! projecting direction is Θψ, and it is deliberately *not* renormalized.
//! All grids are laid out projection-major (one contiguous row per
//! projection) so the 1D solver streams cache-contiguously.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::measures::{
    sample_unit_vector, DirectionSet, DiscreteMeasure, GaussianMeasure, MixtureGaussian, NORM_TOL,
};
use crate::rng::{substream, STREAM_MIXING, STREAM_PRIMARY};

/// A one-dimensional projected measure: values tᵢ with the parent
/// measure's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected1D {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Projected1D {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::invalid("values/weights length mismatch"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("weights sum {sum} ≠ 1")));
        }
        Ok(Self { values, weights })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sampled projection directions for the hierarchical estimator: `heads`
/// holds H matrices of k bottleneck directions each (d×k, unit columns),
/// `mixing` holds L mixing directions (k×L, unit columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBundle {
    heads: Vec<Array2<f64>>,
    mixing: Array2<f64>,
}

impl ProjectionBundle {
    pub fn new(heads: Vec<Array2<f64>>, mixing: Array2<f64>) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::invalid("bundle needs at least one head"));
        }
        let (d, k) = heads[0].dim();
        if d == 0 || k == 0 {
            return Err(Error::invalid("head dimensions must be ≥ 1"));
        }
        for head in &heads {
            if head.dim() != (d, k) {
                return Err(Error::invalid("heads differ in shape"));
            }
            for col in head.columns() {
                let norm = col.dot(&col).sqrt();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::invalid(format!("head column norm {norm} ≠ 1")));
                }
            }
        }
        if mixing.nrows() != k {
            return Err(Error::invalid(format!(
                "mixing has {} rows but heads have k = {k} columns",
                mixing.nrows()
            )));
        }
        if mixing.ncols() == 0 {
            return Err(Error::invalid("mixing needs at least one column"));
        }
        for col in mixing.columns() {
            let norm = col.dot(&col).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid(format!("mixing column norm {norm} ≠ 1")));
            }
        }
        Ok(Self { heads, mixing })
    }

    /// Samples a bundle: H·k bottleneck directions from 𝒰(𝕊^{d−1}) on the
    /// primary stream, L mixing directions from 𝒰(𝕊^{k−1}) on the mixing
    /// stream. Head columns are drawn in the same order as SW draws its
    /// directions, which makes the k = 1 bundle match SW's direction set.
    pub fn sample(
        d: usize,
        k: usize,
        mixing_count: usize,
        heads: usize,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 || k == 0 || mixing_count == 0 || heads == 0 {
            return Err(Error::invalid("bundle sizes must be ≥ 1"));
        }
        // Fill one direction per contiguous row, then present the
        // transposed view; writing columns into row-major storage
        // thrashes the cache at d = 8192 scale.
        let mut rng_heads = substream(seed, STREAM_PRIMARY);
        let mut head_mats = Vec::with_capacity(heads);
        for _ in 0..heads {
            let mut m = Array2::zeros((k, d));
            for c in 0..k {
                let v = sample_unit_vector(d, &mut rng_heads);
                m.row_mut(c)
                    .as_slice_mut()
                    .expect("freshly allocated rows are contiguous")
                    .copy_from_slice(&v);
            }
            head_mats.push(m.reversed_axes());
        }
        let mut rng_mix = substream(seed, STREAM_MIXING);
        let mut mixing = Array2::zeros((mixing_count, k));
        for c in 0..mixing_count {
            let v = sample_unit_vector(k, &mut rng_mix);
            mixing
                .row_mut(c)
                .as_slice_mut()
                .expect("freshly allocated rows are contiguous")
                .copy_from_slice(&v);
        }
        Self::new(head_mats, mixing.reversed_axes())
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn bottleneck(&self) -> usize {
        self.heads[0].ncols()
    }

    pub fn mixing_count(&self) -> usize {
        self.mixing.ncols()
    }

    pub fn dim(&self) -> usize {
        self.heads[0].nrows()
    }

    pub fn heads(&self) -> &[Array2<f64>] {
        &self.heads
    }

    pub fn mixing(&self) -> &Array2<f64> {
        &self.mixing
    }
}

/// a·b into a freshly allocated row-major matrix; `Array2::dot` may hand
/// back column-major storage, which would cost a copy before the row
/// solvers can stream it.
pub(crate) fn matmul_rows(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    general_mat_mul(1.0, &a, &b, 0.0, &mut out);
    out
}

/// Projection-major product: row j of the result holds θⱼᵀxᵢ over i.
pub(crate) fn project_rows(supports: &Array2<f64>, dir_rows: &Array2<f64>) -> Array2<f64> {
    matmul_rows(dir_rows.view(), supports.t())
}

/// Projects a measure along every direction of `dirs`; output j carries
/// values X·θⱼ and the measure's weights unchanged.
pub fn radon_project(measure: &DiscreteMeasure, dirs: &DirectionSet) -> Result<Vec<Projected1D>> {
    if dirs.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: dirs.dim(),
        });
    }
    Ok(raw_projections(measure, dirs.as_matrix()))
}

/// Same as [`radon_project`] but accepts arbitrary (possibly
/// un-normalized) direction rows. This is the path used for evaluating
/// final HRT directions, whose norms may be anywhere in (0, √k].
pub fn radon_project_raw(
    measure: &DiscreteMeasure,
    dir_rows: &Array2<f64>,
) -> Result<Vec<Projected1D>> {
    if dir_rows.ncols() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: dir_rows.ncols(),
        });
    }
    Ok(raw_projections(measure, dir_rows))
}

fn raw_projections(measure: &DiscreteMeasure, dir_rows: &Array2<f64>) -> Vec<Projected1D> {
    let grid = project_rows(measure.supports(), dir_rows);
    grid.rows()
        .into_iter()
        .map(|row| Projected1D {
            values: row.to_vec(),
            weights: measure.weights().to_vec(),
        })
        .collect()
}

/// Hierarchical projection grid: entry (h, l) has values X·Θₕ·ψₗ, computed
/// as the two-stage product (bottleneck then mixing) rather than through a
/// materialized d×L direction matrix.
pub fn hrt_project(
    measure: &DiscreteMeasure,
    bundle: &ProjectionBundle,
) -> Result<Vec<Vec<Projected1D>>> {
    if bundle.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: bundle.dim(),
        });
    }
    let mut grid = Vec::with_capacity(bundle.head_count());
    for head in bundle.heads() {
        // (k×d)(d×n) then (L×k)(k×n): projection-major throughout.
        let bottleneck = matmul_rows(head.t(), measure.supports().t());
        let mixed = matmul_rows(bundle.mixing().t(), bottleneck.view());
        let row_list = mixed
            .rows()
            .into_iter()
            .map(|row| Projected1D {
                values: row.to_vec(),
                weights: measure.weights().to_vec(),
            })
            .collect();
        grid.push(row_list);
    }
    Ok(grid)
}

/// The H·L final projecting directions Θₕψₗ, one per row, in (h, l)
/// row-major order. Norms may be up to √k and are NOT renormalized;
/// renormalizing would change the hierarchical distance.
pub fn final_directions(bundle: &ProjectionBundle) -> Array2<f64> {
    let d = bundle.dim();
    let h = bundle.head_count();
    let l = bundle.mixing_count();
    let mut out = Array2::zeros((h * l, d));
    for (hi, head) in bundle.heads().iter().enumerate() {
        // (head · mixing)ᵀ = mixingᵀ · headᵀ: rows are (Θψₗ)ᵀ.
        let dirs = bundle.mixing().t().dot(&head.t());
        for li in 0..l {
            for c in 0..d {
                out[[hi * l + li, c]] = dirs[[li, c]];
            }
        }
    }
    out
}

/// Closed-form HRT pushforward of a Gaussian: 𝒩(μ, Σ) maps to the 1D
/// Gaussian with mean ψᵀΘᵀμ and variance ψᵀΘᵀΣΘψ. Returns (mean, std²)
/// with the variance clamped at 0 when within −1e-12 of it.
pub fn gaussian_hrt_pushforward(
    g: &GaussianMeasure,
    theta: &Array2<f64>,
    psi: &[f64],
) -> Result<(f64, f64)> {
    let d = g.dim();
    let (td, k) = theta.dim();
    if td != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: td,
        });
    }
    if psi.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: psi.len(),
        });
    }
    for col in theta.columns() {
        let norm = col.dot(&col).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("theta column norm {norm} ≠ 1")));
        }
    }
    let psi_norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (psi_norm - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid(format!("psi norm {psi_norm} ≠ 1")));
    }
    let psi_v = Array1::from_vec(psi.to_vec());
    let w = theta.dot(&psi_v); // final direction Θψ
    let mean = w.dot(g.mean());
    let variance = w.dot(&g.covariance().dot(&w));
    if variance < -1e-12 {
        return Err(Error::NumericalDomain(format!(
            "pushforward variance {variance} is negative beyond tolerance"
        )));
    }
    Ok((mean, variance.max(0.0)))
}

/// Componentwise HRT pushforward of a Gaussian mixture; component weights
/// are preserved.
pub fn mixture_hrt_pushforward(
    m: &MixtureGaussian,
    theta: &Array2<f64>,
    psi: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    m.components()
        .iter()
        .map(|(w, g)| gaussian_hrt_pushforward(g, theta, psi).map(|(mu, var)| (*w, mu, var)))
        .collect()
}
