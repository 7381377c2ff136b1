//! Domain types for discrete and Gaussian measures, seeded direction
//! sampling, validation, and the CSV point-cloud format.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Prng;

/// Absolute tolerance used by the weight-sum and unit-norm invariants.
pub const NORM_TOL: f64 = 1e-9;

/// A weighted point cloud in ℝᵈ: `supports` is n×d (one point per row),
/// `weights` is length n, nonnegative, and sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    supports: Array2<f64>,
    weights: Vec<f64>,
}

/// Checks the discrete-measure invariants on raw parts without mutating
/// anything; returns one message per violation (empty means valid).
pub fn validate_parts(supports: &Array2<f64>, weights: &[f64]) -> Vec<String> {
    let mut violations = Vec::new();
    let (n, d) = supports.dim();
    if n == 0 {
        violations.push("measure has no support points".to_string());
    }
    if d == 0 {
        violations.push("support dimension is 0".to_string());
    }
    if weights.len() != n {
        violations.push(format!(
            "weight count {} does not match support count {n}",
            weights.len()
        ));
    }
    if supports.iter().any(|x| !x.is_finite()) {
        violations.push("non-finite entry in supports".to_string());
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            violations.push(format!("non-finite weight at index {i}"));
        } else if w < 0.0 {
            violations.push(format!("negative weight {w} at index {i}"));
        }
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().all(|w| w.is_finite()) && (sum - 1.0).abs() > NORM_TOL {
        violations.push(format!("weights sum {sum} ≠ 1"));
    }
    violations
}

impl DiscreteMeasure {
    /// Builds a measure, rejecting any invariant violation.
    pub fn new(supports: Array2<f64>, weights: Vec<f64>) -> Result<Self> {
        let violations = validate_parts(&supports, &weights);
        if violations.is_empty() {
            Ok(Self { supports, weights })
        } else {
            Err(Error::invalid(violations.join("; ")))
        }
    }

    /// Uniformly weighted measure over the given supports.
    pub fn uniform(supports: Array2<f64>) -> Result<Self> {
        let n = supports.nrows();
        if n == 0 {
            return Err(Error::invalid("measure has no support points"));
        }
        let w = 1.0 / n as f64;
        Self::new(supports, vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.supports.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.supports.ncols()
    }

    pub fn supports(&self) -> &Array2<f64> {
        &self.supports
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every weight equals 1/n (bitwise, as produced by
    /// [`DiscreteMeasure::uniform`]).
    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| x == w)
    }

    /// Re-checks the invariants; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        validate_parts(&self.supports, &self.weights)
    }
}

/// Multivariate Gaussian 𝒩(mean, covariance). The covariance must be
/// symmetric within 1e-9 and positive semi-definite (eigenvalues ≥ −1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: Array1<f64>,
    covariance: Array2<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: Array1<f64>, covariance: Array2<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("mean must have dimension ≥ 1"));
        }
        if covariance.dim() != (d, d) {
            return Err(Error::invalid(format!(
                "covariance shape {:?} does not match dimension {d}",
                covariance.dim()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite entry"));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if (covariance[[i, j]] - covariance[[j, i]]).abs() > NORM_TOL {
                    return Err(Error::invalid(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        // PSD check doubles as the factorization used for sampling.
        psd_cholesky(&covariance)?;
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &Array2<f64> {
        &self.covariance
    }
}

/// A finite mixture Σᵢ wᵢ·𝒩(μᵢ, Σᵢ); component weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureGaussian {
    components: Vec<(f64, GaussianMeasure)>,
}

impl MixtureGaussian {
    pub fn new(components: Vec<(f64, GaussianMeasure)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture must have at least one component"));
        }
        let d = components[0].1.dim();
        if components.iter().any(|(_, g)| g.dim() != d) {
            return Err(Error::invalid("mixture components differ in dimension"));
        }
        if components.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("mixture weights must be nonnegative"));
        }
        let sum: f64 = components.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("mixture weights sum {sum} ≠ 1")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, GaussianMeasure)] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }
}

/// A c×d matrix whose rows are unit-norm directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Array2<f64>,
}

impl DirectionSet {
    pub fn new(directions: Array2<f64>) -> Result<Self> {
        if directions.nrows() == 0 || directions.ncols() == 0 {
            return Err(Error::invalid("direction set must be non-empty"));
        }
        for row in directions.rows() {
            let norm = row.dot(&row).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid(format!("direction norm {norm} ≠ 1")));
            }
        }
        Ok(Self { directions })
    }

    pub fn count(&self) -> usize {
        self.directions.nrows()
    }

    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    /// The directions as rows.
    pub fn as_matrix(&self) -> &Array2<f64> {
        &self.directions
    }
}

/// One draw from 𝒰(𝕊^{d−1}) via a normalized standard Gaussian vector.
/// A zero-norm draw (possible only in floating point) is resampled.
pub fn sample_unit_vector(d: usize, rng: &mut Prng) -> Vec<f64> {
    debug_assert!(d >= 1);
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `count` i.i.d. draws from 𝒰(𝕊^{d−1}), one per row. Deterministic given
/// the generator state.
pub fn sample_unit_sphere(d: usize, count: usize, rng: &mut Prng) -> Result<DirectionSet> {
    if d == 0 || count == 0 {
        return Err(Error::invalid("d and count must be ≥ 1"));
    }
    let mut m = Array2::zeros((count, d));
    for i in 0..count {
        let v = sample_unit_vector(d, rng);
        for (j, x) in v.into_iter().enumerate() {
            m[[i, j]] = x;
        }
    }
    DirectionSet::new(m)
}

/// Tolerant Cholesky factorization for PSD matrices: returns lower L with
/// Σ = L·Lᵀ, accepting diagonal remainders down to −1e-9 (clamped to 0) so
/// that singular covariances (e.g. Σ = 0) factor cleanly.
fn psd_cholesky(cov: &Array2<f64>) -> Result<Array2<f64>> {
    let d = cov.nrows();
    let mut l = Array2::<f64>::zeros((d, d));
    for j in 0..d {
        let mut diag = cov[[j, j]];
        for t in 0..j {
            diag -= l[[j, t]] * l[[j, t]];
        }
        let scale = cov[[j, j]].abs().max(1.0);
        if diag < -NORM_TOL * scale {
            return Err(Error::NumericalDomain(format!(
                "covariance is not positive semi-definite (pivot {diag} at column {j})"
            )));
        }
        let pivot = diag.max(0.0).sqrt();
        l[[j, j]] = pivot;
        for i in (j + 1)..d {
            if pivot == 0.0 {
                l[[i, j]] = 0.0;
                continue;
            }
            let mut v = cov[[i, j]];
            for t in 0..j {
                v -= l[[i, t]] * l[[j, t]];
            }
            l[[i, j]] = v / pivot;
        }
    }
    Ok(l)
}

/// n uniform-weight samples of a Gaussian measure, drawn as
/// mean + L·z with L the (tolerant) Cholesky factor of the covariance.
pub fn empirical_from_gaussian(
    g: &GaussianMeasure,
    n: usize,
    rng: &mut Prng,
) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::invalid("sample count must be ≥ 1"));
    }
    let d = g.dim();
    let l = psd_cholesky(g.covariance())?;
    let mut pts = Array2::zeros((n, d));
    for i in 0..n {
        let z: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        for r in 0..d {
            let mut x = g.mean()[r];
            for c in 0..=r {
                x += l[[r, c]] * z[c];
            }
            pts[[i, r]] = x;
        }
    }
    DiscreteMeasure::uniform(pts)
}

/// n uniform-weight samples of a Gaussian mixture: pick a component by
/// weight, then draw from it.
pub fn empirical_from_mixture(
    m: &MixtureGaussian,
    n: usize,
    rng: &mut Prng,
) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::invalid("sample count must be ≥ 1"));
    }
    let d = m.dim();
    let factors: Vec<Array2<f64>> = m
        .components()
        .iter()
        .map(|(_, g)| psd_cholesky(g.covariance()))
        .collect::<Result<_>>()?;
    let mut pts = Array2::zeros((n, d));
    for i in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = m.components().len() - 1;
        for (c, (w, _)) in m.components().iter().enumerate() {
            acc += w;
            if u < acc {
                pick = c;
                break;
            }
        }
        let g = &m.components()[pick].1;
        let l = &factors[pick];
        let z: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        for r in 0..d {
            let mut x = g.mean()[r];
            for c in 0..=r {
                x += l[[r, c]] * z[c];
            }
            pts[[i, r]] = x;
        }
    }
    DiscreteMeasure::uniform(pts)
}

/// Reads the CSV measure format: one support point per row, d
/// comma-separated decimal floats, no header. With `weighted`, the last
/// column is the point's weight; otherwise weights are uniform.
pub fn read_csv_measure(path: impl AsRef<Path>, weighted: bool) -> Result<DiscreteMeasure> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("cannot parse `{}` as a number", f.trim()),
                })
            })
            .collect::<Result<_>>()?;
        let min_fields = if weighted { 2 } else { 1 };
        if fields.len() < min_fields {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least {min_fields} fields"),
            });
        }
        if let Some(first) = rows.first() {
            if fields.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "row has {} fields but previous rows have {}",
                        fields.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "file contains no data rows".to_string(),
        });
    }
    let cols = rows[0].len();
    let d = if weighted { cols - 1 } else { cols };
    let n = rows.len();
    let mut supports = Array2::zeros((n, d));
    let mut weights = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        for j in 0..d {
            supports[[i, j]] = row[j];
        }
        if weighted {
            weights.push(row[d]);
        }
    }
    if weighted {
        DiscreteMeasure::new(supports, weights)
    } else {
        DiscreteMeasure::uniform(supports)
    }
}

/// Writes the CSV measure format with 17 significant digits, enough for an
/// exact f64 round trip.
pub fn write_csv_measure(
    path: impl AsRef<Path>,
    measure: &DiscreteMeasure,
    weighted: bool,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    for i in 0..measure.len() {
        let mut fields: Vec<String> = (0..measure.dim())
            .map(|j| format!("{:.16e}", measure.supports()[[i, j]]))
            .collect();
        if weighted {
            fields.push(format!("{:.16e}", measure.weights()[i]));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
