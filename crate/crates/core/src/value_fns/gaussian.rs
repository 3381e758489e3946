//! Multivariate Gaussian feature distributions and their conditionals.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::game::Coalition;

const SYMMETRY_TOLERANCE: f64 = 1e-12;
const PSD_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue floor below which a conditioning block counts as singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// `N(mean, cov)` with a validated, positive semidefinite covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl GaussianSpec {
    /// Validates symmetry and positive semidefiniteness. Eigenvalues in
    /// `[-1e-10, 0)` are clamped to zero; anything more negative is an error.
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::Gaussian("empty mean vector".into()));
        }
        if cov.len() != d || cov.iter().any(|row| row.len() != d) {
            return Err(Error::Gaussian(format!("covariance must be {d}x{d}")));
        }
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Gaussian("non-finite entry".into()));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
        Self::from_parts(DVector::from_vec(mean), cov)
    }

    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Gaussian(format!("covariance not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let eig = cov.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -PSD_TOLERANCE {
            return Err(Error::Gaussian(format!("covariance has eigenvalue {min:e} < 0")));
        }
        let cov = if min < 0.0 {
            let clamped = eig.eigenvalues.map(|l| l.max(0.0));
            &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose()
        } else {
            cov
        };
        Ok(GaussianSpec { mean, cov })
    }

    /// Standard normal marginals with the given correlation matrix.
    pub fn standard(corr: Vec<Vec<f64>>) -> Result<Self> {
        GaussianSpec::new(vec![0.0; corr.len()], corr)
    }

    pub fn from_json(src: &str) -> std::result::Result<Self, String> {
        let raw: SpecRepr = serde_json::from_str(src).map_err(|e| e.to_string())?;
        GaussianSpec::new(raw.mean, raw.cov).map_err(|e| e.to_string())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Marginal distribution of the coordinates in `c`, in increasing order.
    pub fn marginal(&self, c: Coalition) -> GaussianSpec {
        let idx: Vec<usize> = c.players().collect();
        GaussianSpec { mean: self.mean.select_rows(&idx), cov: self.cov.select_rows(&idx).select_columns(&idx) }
    }

    /// A matrix `L` with `L Lᵀ = cov`, valid for singular covariances too.
    pub fn factor(&self) -> DMatrix<f64> {
        psd_factor(&self.cov)
    }
}

fn psd_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if cov.nrows() == 0 {
        return cov.clone();
    }
    if let Some(ch) = cov.clone().cholesky() {
        return ch.l();
    }
    let eig = cov.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

/// Precomputed conditioning of the free coordinates on a fixed coalition.
///
/// For conditioning set `A` and free set `B = D \ A`:
/// `X_B | X_A = z ~ N(μ_B + K (z − μ_A), Σ_BB − K Σ_AB)` with `K = Σ_BA Σ_AA⁻¹`.
#[derive(Clone, Debug)]
pub struct Conditioner {
    d: usize,
    given: Vec<usize>,
    free: Vec<usize>,
    mean_given: DVector<f64>,
    mean_free: DVector<f64>,
    gain: DMatrix<f64>,
    cov: DMatrix<f64>,
    factor: DMatrix<f64>,
    pseudo_inverse: bool,
}

impl Conditioner {
    /// Fails on a singular `Σ_AA` unless `allow_pseudo_inverse` is set.
    pub fn new(spec: &GaussianSpec, given: Coalition, allow_pseudo_inverse: bool) -> Result<Self> {
        let d = spec.dim();
        if !given.is_subset_of(Coalition::full(d)) {
            return Err(Error::Dimension { expected: d, got: 32 - given.0.leading_zeros() as usize });
        }
        let a: Vec<usize> = given.players().collect();
        let b: Vec<usize> = given.complement(d).players().collect();
        let s_aa = spec.cov.select_rows(&a).select_columns(&a);
        let s_ba = spec.cov.select_rows(&b).select_columns(&a);
        let s_bb = spec.cov.select_rows(&b).select_columns(&b);

        let mut pseudo_inverse = false;
        let gain = if a.is_empty() {
            DMatrix::zeros(b.len(), 0)
        } else {
            let eig = s_aa.clone().symmetric_eigen();
            let top = eig.eigenvalues.max().max(0.0);
            let floor = SINGULAR_RTOL * top.max(1.0);
            if eig.eigenvalues.min() <= floor {
                if !allow_pseudo_inverse {
                    return Err(Error::Singular { coalition: given });
                }
                pseudo_inverse = true;
                let inv_vals = eig.eigenvalues.map(|l| if l > floor { 1.0 / l } else { 0.0 });
                let pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
                &s_ba * pinv
            } else {
                let ch = s_aa.clone().cholesky().ok_or(Error::Singular { coalition: given })?;
                // K = Σ_BA Σ_AA⁻¹  ⇔  Σ_AA Kᵀ = Σ_AB
                ch.solve(&s_ba.transpose()).transpose()
            }
        };
        let mut cov = &s_bb - &gain * s_ba.transpose();
        // restore exact symmetry lost to roundoff
        cov = (&cov + cov.transpose()) * 0.5;
        let factor = psd_factor(&cov);
        Ok(Conditioner {
            d,
            mean_given: spec.mean.select_rows(&a),
            mean_free: spec.mean.select_rows(&b),
            given: a,
            free: b,
            gain,
            cov,
            factor,
            pseudo_inverse,
        })
    }

    pub fn given(&self) -> &[usize] {
        &self.given
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Conditional covariance of the free block (independent of the observed values).
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn used_pseudo_inverse(&self) -> bool {
        self.pseudo_inverse
    }

    /// Conditional mean of the free block given `z` on the conditioning block.
    pub fn mean(&self, z: &[f64]) -> DVector<f64> {
        let shift = DVector::from_iterator(z.len(), z.iter().zip(self.mean_given.iter()).map(|(a, b)| a - b));
        &self.mean_free + &self.gain * shift
    }

    /// Offset `μ_B − K μ_A` of the affine map `z ↦ E[X_B | X_A = z]`.
    pub fn intercept(&self) -> DVector<f64> {
        &self.mean_free - &self.gain * &self.mean_given
    }

    /// Writes one draw of the full vector into `out`, with `z` on the conditioning block.
    pub fn sample_full(&self, z: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.d);
        let mean = self.mean(z);
        let k = self.free.len();
        let noise: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let noise = DVector::from_vec(noise);
        let draw = mean + &self.factor * noise;
        for (i, &p) in self.given.iter().enumerate() {
            out[p] = z[i];
        }
        for (i, &p) in self.free.iter().enumerate() {
            out[p] = draw[i];
        }
    }
}

/// Conditional law of the coordinates outside `given`.
#[derive(Clone, Debug)]
pub struct ConditionalGaussian {
    /// Indices (0-based) of the remaining coordinates, increasing.
    pub free: Vec<usize>,
    pub spec: Option<GaussianSpec>,
    pub used_pseudo_inverse: bool,
}

/// Distribution of `X_{D\A}` given `X_A = values`.
///
/// `spec` is `None` when `A = D` (nothing left to condition).
pub fn gaussian_conditional(
    spec: &GaussianSpec,
    given: Coalition,
    values: &[f64],
    allow_pseudo_inverse: bool,
) -> Result<ConditionalGaussian> {
    if values.len() != given.len() {
        return Err(Error::Dimension { expected: given.len(), got: values.len() });
    }
    let c = Conditioner::new(spec, given, allow_pseudo_inverse)?;
    let out = if c.free.is_empty() {
        None
    } else {
        Some(GaussianSpec { mean: c.mean(values), cov: c.cov.clone() })
    };
    Ok(ConditionalGaussian { free: c.free.clone(), spec: out, used_pseudo_inverse: c.pseudo_inverse })
}
