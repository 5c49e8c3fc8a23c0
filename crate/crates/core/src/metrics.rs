//! Entanglement and fidelity of two-mode Gaussian states.

use faer::complex::Complex;
use faer::Mat;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_form_in, CovarianceMatrix};

/// Moduli of `i·Ω·σ` must pair up to this (relative) tolerance.
pub const PAIRING_TOL: f64 = 1e-8;

/// Agreement required between the two internal spectral routes (relative).
pub const ROUTE_TOL: f64 = 1e-9;

/// Symplectic eigenvalues, one per mode, ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        SymplecticSpectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// ν₋, the smallest symplectic eigenvalue.
    pub fn smallest(&self) -> f64 {
        self.values[0]
    }

    /// Largest absolute difference against another spectrum of the same size.
    pub fn max_abs_diff(&self, other: &SymplecticSpectrum) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Flips the sign of mode `mode`'s momentum row and column (P → −P).
pub fn partial_transpose(sigma: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    let n = sigma.n_modes();
    if mode >= n {
        return Err(Error::ModeOutOfRange { mode, n_modes: n });
    }
    let p = 2 * mode + 1;
    let mut m = sigma.matrix().clone();
    for j in 0..m.ncols() {
        if j != p {
            m[(p, j)] = -m[(p, j)];
            m[(j, p)] = -m[(j, p)];
        }
    }
    CovarianceMatrix::new(m)
}

/// Symplectic eigenvalues from the moduli of the eigenvalues of `i·Ω·σ`,
/// checked against `√eig(−(Ωσ)²)`.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let omega = symplectic_form_in::<f64>(sigma.n_modes());
    let os = &omega * sigma.matrix();

    let moduli: Vec<f64> = complex_eigenvalues(&os)?.iter().map(|z| z.norm()).collect();
    let primary = pair_up(moduli)?;

    let neg_sq = -(&os * &os);
    let squares: Vec<f64> = complex_eigenvalues(&neg_sq)?
        .iter()
        .map(|z| z.re.max(0.0).sqrt())
        .collect();
    let secondary = pair_up(squares)?;

    for (a, b) in primary.iter().zip(&secondary) {
        let difference = (a - b).abs();
        if difference > ROUTE_TOL * a.abs().max(1.0) {
            return Err(Error::SpectrumRouteMismatch { difference });
        }
    }
    Ok(SymplecticSpectrum::from_sorted(primary))
}

fn complex_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let dense = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    dense
        .eigenvalues()
        .map_err(|_| Error::EigenSolverFailed)
}

/// Sorts `2n` values and merges consecutive pairs.
pub(crate) fn pair_up(mut values: Vec<f64>) -> Result<Vec<f64>> {
    values.sort_by(|a, b| a.total_cmp(b));
    values
        .chunks(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            if (a - b).abs() > PAIRING_TOL * b.abs().max(1.0) {
                Err(Error::UnpairedSpectrum { a, b })
            } else {
                Ok(0.5 * (a + b))
            }
        })
        .collect()
}

/// ν̃₋ of the partially transposed two-mode state, by the closed form valid
/// at `u = 0, v = 1, h = k = 1/√2`:
///
/// ```text
/// ν̃₋ = (1/3) √((2c + x − y)² − 2s²)
/// ```
pub fn nu_closed_form(q: f64, r: f64) -> Result<f64> {
    for (name, value) in [("q", q), ("r", r)] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be finite and non-negative",
            });
        }
    }
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    // x − y = cosh 2q − sinh 2q
    let x_minus_y = (-2.0 * q).exp();
    let radicand = (2.0 * c + x_minus_y).powi(2) - 2.0 * s * s;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { value: radicand });
    }
    Ok(radicand.sqrt() / 3.0)
}

/// Smallest symplectic eigenvalue of the state partially transposed on `mode`.
pub fn pt_smallest(sigma: &CovarianceMatrix, mode: usize) -> Result<f64> {
    Ok(symplectic_eigenvalues(&partial_transpose(sigma, mode)?)?.smallest())
}

/// `E_N = max(0, −log₂ ν̃₋)` in bits.
pub fn log_negativity(sigma: &CovarianceMatrix, bipartition: usize) -> Result<f64> {
    if sigma.n_modes() != 2 {
        return Err(Error::NotTwoMode {
            n_modes: sigma.n_modes(),
        });
    }
    Ok(log_negativity_from_nu(pt_smallest(sigma, bipartition)?))
}

pub fn log_negativity_from_nu(nu: f64) -> f64 {
    if nu >= 1.0 {
        0.0
    } else {
        -nu.log2()
    }
}

/// Teleportation fidelity from the determinant formula
///
/// ```text
/// F = 1 / (√(det[σ_in + σ_out] + δ) − √δ),
/// δ = 4 (det σ_in − 1/4)(det σ_out − 1/4)
/// ```
///
/// applied to the full 4×4 matrices. With vacuum-variance-1 units this does not
/// give `F = 1` for identical inputs.
pub fn fidelity(sigma_in: &CovarianceMatrix, sigma_out: &CovarianceMatrix) -> Result<f64> {
    for s in [sigma_in, sigma_out] {
        if s.n_modes() != 2 {
            return Err(Error::NotTwoMode { n_modes: s.n_modes() });
        }
    }
    let det_in = sigma_in.determinant();
    let det_out = sigma_out.determinant();
    let det_sum = (sigma_in.matrix() + sigma_out.matrix()).determinant();
    let delta = 4.0 * (det_in - 0.25) * (det_out - 0.25);
    if !(delta >= 0.0) {
        return Err(Error::FidelityDomain {
            reason: "negative delta",
            value: delta,
        });
    }
    let outer = det_sum + delta;
    if !(outer > 0.0) {
        return Err(Error::FidelityDomain {
            reason: "non-positive value under the outer square root",
            value: outer,
        });
    }
    let denom = outer.sqrt() - delta.sqrt();
    if !(denom > 0.0) {
        return Err(Error::FidelityDomain {
            reason: "non-positive denominator",
            value: denom,
        });
    }
    Ok(1.0 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{source_state, vacuum, SourceSpec};
    use std::f64::consts::{FRAC_PI_4, LOG2_E};

    fn src(q: f64) -> CovarianceMatrix {
        source_state(&SourceSpec::new(q, FRAC_PI_4).unwrap())
    }

    #[test]
    fn partial_transpose_examples() {
        let s = src(0.5);
        let pt = partial_transpose(&s, 1).unwrap();
        assert_eq!(partial_transpose(&pt, 1).unwrap(), s);
        assert_eq!(partial_transpose(&vacuum(2).unwrap(), 0).unwrap(), vacuum(2).unwrap());
        let sh = 1f64.sinh();
        assert!((pt.get(0, 2) - sh).abs() < 1e-15);
        assert!((pt.get(1, 3) - sh).abs() < 1e-15);
        assert!(matches!(
            partial_transpose(&s, 2),
            Err(Error::ModeOutOfRange { mode: 2, n_modes: 2 })
        ));
    }

    #[test]
    fn spectra_of_pure_states() {
        assert_eq!(symplectic_eigenvalues(&vacuum(2).unwrap()).unwrap().values(), &[1.0, 1.0]);
        for q in [0.0, 0.5, 1.3] {
            let sp = symplectic_eigenvalues(&src(q)).unwrap();
            for v in sp.values() {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pt_spectrum_of_source() {
        let nu = pt_smallest(&src(0.5), 1).unwrap();
        assert!((nu - (-1f64).exp()).abs() < 1e-12, "{nu}");
        assert!((nu - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn thermal_state_spectrum() {
        let s = CovarianceMatrix::from_row_slice(
            4,
            &[3.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0, 1.5],
        )
        .unwrap();
        let sp = symplectic_eigenvalues(&s).unwrap();
        assert!((sp.values()[0] - 1.5).abs() < 1e-14);
        assert!((sp.values()[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        assert!((nu_closed_form(0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let a = nu_closed_form(0.5, 0.0).unwrap();
        assert!((a - (2.0 + (-1f64).exp()) / 3.0).abs() < 1e-15);
        assert!((a - 0.78929).abs() < 1e-5);
        let b = nu_closed_form(1.0, 0.0).unwrap();
        assert!((b - 0.71178).abs() < 1e-5);
        assert!(nu_closed_form(-1.0, 0.0).is_err());
    }

    #[test]
    fn log_negativity_examples() {
        assert_eq!(log_negativity(&vacuum(2).unwrap(), 1).unwrap(), 0.0);
        let en = log_negativity(&src(0.5), 1).unwrap();
        assert!((en - LOG2_E).abs() < 1e-12);
        assert!(matches!(
            log_negativity(&vacuum(3).unwrap(), 0),
            Err(Error::NotTwoMode { n_modes: 3 })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let id = vacuum(2).unwrap();
        let f = fidelity(&id, &id).unwrap();
        let expected = 1.0 / ((16.0f64 + 2.25).sqrt() - 1.5);
        assert!((f - expected).abs() < 1e-12);
        assert!((f - 0.36075).abs() < 1e-5);

        // det = 1/4 on both sides: δ = 0.
        let half = 0.5f64.sqrt();
        let s = CovarianceMatrix::from_row_slice(
            4,
            &[
                half, 0.0, 0.0, 0.0, 0.0, half, 0.0, 0.0, 0.0, 0.0, half, 0.0, 0.0, 0.0, 0.0, half,
            ],
        )
        .unwrap();
        let f = fidelity(&s, &s).unwrap();
        let want = 1.0 / (s.matrix() * 2.0).determinant().sqrt();
        assert!((f - want).abs() < 1e-12);
    }

    #[test]
    fn fidelity_domain_error() {
        let id = vacuum(2).unwrap();
        // det 0 on one side, 1 on the other: δ < 0.
        let z = CovarianceMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(fidelity(&id, &z), Err(Error::FidelityDomain { .. })));
    }

    #[test]
    fn fidelity_of_identical_scaled_identity_decreases() {
        let mut last = f64::INFINITY;
        for lambda in [1.0, 1.5, 2.0, 4.0, 10.0] {
            let s = CovarianceMatrix::new(DMatrix::identity(4, 4) * lambda).unwrap();
            let f = fidelity(&s, &s).unwrap();
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn pairing_rejects_split_values() {
        assert!(pair_up(vec![1.0, 1.0, 2.0, 2.5]).is_err());
        assert_eq!(pair_up(vec![2.0, 1.0, 1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn source_family_log_negativity() {
        for q in [0.1, 0.7, 1.5, 2.0] {
            let en = log_negativity(&src(q), 1).unwrap();
            assert!((en - 2.0 * q * LOG2_E).abs() < 1e-10);
        }
    }
}
