//! Gaussian states at the covariance-matrix level.
//!
//! Units: vacuum variance 1, so the vacuum is the identity. Quadratures are
//! interleaved per mode: `(X₁, P₁, X₂, P₂, …)`. First moments are always zero.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::precision::{max_abs, Real};

/// Symmetry tolerance, scaled by `max(1, max|entry|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default tolerance of [`is_physical`].
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Second-moment matrix of an `n`-mode Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape (square, even, non-empty) and symmetry.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let residual = asymmetry(&entries);
        if residual > SYMMETRY_TOL * max_abs(&entries).max(1.0) {
            return Err(Error::Asymmetric { residual });
        }
        Ok(CovarianceMatrix { entries })
    }

    pub fn from_row_slice(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::BadShape {
                rows: dim,
                cols: values.len() / dim.max(1),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    /// Caller guarantees an exactly symmetric matrix of even size.
    pub(crate) fn from_symmetric(entries: DMatrix<f64>) -> Self {
        debug_assert!(entries.is_square() && entries.nrows().is_multiple_of(2));
        debug_assert_eq!(asymmetry(&entries), 0.0);
        CovarianceMatrix { entries }
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn determinant(&self) -> f64 {
        self.entries.clone().determinant()
    }

    /// `‖self − other‖∞` taken entrywise.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "covariance matrices differ in size");
        crate::precision::max_abs_diff(&self.entries, &other.entries)
    }

    /// Row-major nested rows, for serialization and display.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CovarianceMatrix", 2)?;
        st.serialize_field("n_modes", &self.n_modes())?;
        st.serialize_field("entries", &self.rows())?;
        st.end()
    }
}

/// Symmetrizes and reports the asymmetry that was removed.
pub(crate) fn symmetrize<T: Real>(m: &DMatrix<T>) -> (DMatrix<T>, T) {
    let half = T::from_f64(0.5);
    let t = m.transpose();
    let residual = crate::precision::max_abs_diff(m, &t);
    ((m + t) * half, residual)
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    crate::precision::max_abs_diff(m, &m.transpose())
}

/// Teleportation amplifier (TA1/TA2): squeezing `r ≥ 0`, phase `φ`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AmplifierSpec {
    r: f64,
    phi: f64,
}

impl AmplifierSpec {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        check_squeezing("r", r)?;
        check_phase("phi", phi)?;
        Ok(AmplifierSpec { r, phi })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `cosh 2r`
    pub fn c(&self) -> f64 {
        (2.0 * self.r).cosh()
    }

    /// `sinh 2r`
    pub fn s(&self) -> f64 {
        (2.0 * self.r).sinh()
    }

    /// `sin 2φ`
    pub fn k(&self) -> f64 {
        (2.0 * self.phi).sin()
    }

    /// `cos 2φ`
    pub fn h(&self) -> f64 {
        (2.0 * self.phi).cos()
    }

    pub(crate) fn params<T: Real>(&self) -> Hyperbolic<T> {
        Hyperbolic::new(self.r, self.phi)
    }
}

/// Source amplifier SA3: squeezing `q ≥ 0`, phase `η`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SourceSpec {
    q: f64,
    eta: f64,
}

impl SourceSpec {
    pub fn new(q: f64, eta: f64) -> Result<Self> {
        check_squeezing("q", q)?;
        check_phase("eta", eta)?;
        Ok(SourceSpec { q, eta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `cosh 2q`
    pub fn x(&self) -> f64 {
        (2.0 * self.q).cosh()
    }

    /// `sinh 2q`
    pub fn y(&self) -> f64 {
        (2.0 * self.q).sinh()
    }

    /// `cos 2η`
    pub fn u(&self) -> f64 {
        (2.0 * self.eta).cos()
    }

    /// `sin 2η`
    pub fn v(&self) -> f64 {
        (2.0 * self.eta).sin()
    }

    pub(crate) fn params<T: Real>(&self) -> Hyperbolic<T> {
        Hyperbolic::new(self.q, self.eta)
    }
}

fn check_squeezing(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
    }
    if value < 0.0 {
        return Err(Error::InvalidParameter { name, value, reason: "must be non-negative" });
    }
    Ok(())
}

fn check_phase(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
    }
    Ok(())
}

/// `(cosh 2t, sinh 2t, cos 2θ, sin 2θ)` in working precision.
///
/// Phases are evaluated in `f64` and lifted; hyperbolics are evaluated in `T`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Hyperbolic<T> {
    pub cosh: T,
    pub sinh: T,
    pub cos: T,
    pub sin: T,
}

impl<T: Real> Hyperbolic<T> {
    fn new(squeezing: f64, phase: f64) -> Self {
        let (cosh, sinh) = T::from_f64(2.0 * squeezing).cosh_sinh();
        Hyperbolic {
            cosh,
            sinh,
            cos: T::from_f64((2.0 * phase).cos()),
            sin: T::from_f64((2.0 * phase).sin()),
        }
    }
}

/// `2n × 2n` identity.
pub fn vacuum(n_modes: usize) -> Result<CovarianceMatrix> {
    if n_modes == 0 {
        return Err(Error::ZeroModes);
    }
    Ok(CovarianceMatrix::from_symmetric(DMatrix::identity(
        2 * n_modes,
        2 * n_modes,
    )))
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> Result<DMatrix<f64>> {
    if n_modes == 0 {
        return Err(Error::ZeroModes);
    }
    Ok(symplectic_form_in::<f64>(n_modes))
}

pub(crate) fn symplectic_form_in<T: Real>(n_modes: usize) -> DMatrix<T> {
    let mut omega = DMatrix::<T>::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = T::one();
        omega[(2 * m + 1, 2 * m)] = -T::one();
    }
    omega
}

/// Two-mode squeezed state of one teleportation amplifier, modes (signal, idler).
///
/// ```text
/// α = diag(c − hs, c + hs),  β = diag(c + hs, c − hs),  γ = diag(ks, −ks)
/// ```
pub fn two_mode_squeezed(spec: &AmplifierSpec) -> CovarianceMatrix {
    CovarianceMatrix::from_symmetric(two_mode_squeezed_in::<f64>(spec))
}

pub(crate) fn two_mode_squeezed_in<T: Real>(spec: &AmplifierSpec) -> DMatrix<T> {
    let p = spec.params::<T>();
    let (c, s, h, k) = (p.cosh, p.sinh, p.cos, p.sin);
    let hs = h * s;
    let ks = k * s;
    let z = T::zero();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c - hs, z, ks, z, //
            z, c + hs, z, -ks, //
            ks, z, c + hs, z, //
            z, -ks, z, c - hs,
        ],
    )
}

/// State σ^(7)(8) produced by the source amplifier:
///
/// ```text
/// [ x−uy   0    vy    0  ]
/// [  0   x+uy   0   −vy  ]
/// [  vy    0  x+uy    0  ]
/// [  0   −vy    0   x−uy ]
/// ```
pub fn source_state(spec: &SourceSpec) -> CovarianceMatrix {
    CovarianceMatrix::from_symmetric(source_state_in::<f64>(spec))
}

pub(crate) fn source_state_in<T: Real>(spec: &SourceSpec) -> DMatrix<T> {
    let p = spec.params::<T>();
    source_like(p.cosh, p.sinh, p.cos, p.sin, T::one())
}

/// The source-state layout with the sign of the cross couplings set by
/// `coupling_sign` (+1 for σ^(7)(8), −1 for its phase-flipped twin σ').
pub(crate) fn source_like<T: Real>(x: T, y: T, u: T, v: T, coupling_sign: T) -> DMatrix<T> {
    let uy = u * y;
    let vy = v * y * coupling_sign;
    let z = T::zero();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            x - uy, z, vy, z, //
            z, x + uy, z, -vy, //
            vy, z, x + uy, z, //
            z, -vy, z, x - uy,
        ],
    )
}

/// Block-diagonal `a ⊕ b`; modes of `a` come first.
pub fn direct_sum(a: &CovarianceMatrix, b: &CovarianceMatrix) -> CovarianceMatrix {
    CovarianceMatrix::from_symmetric(direct_sum_in(&a.entries, &b.entries))
}

pub(crate) fn direct_sum_in<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = DMatrix::<T>::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

/// Reorders modes: slot `i` of the result holds mode `perm[i]` of the input
/// (zero-based). X and P of a mode always move together.
pub fn permute_modes(sigma: &CovarianceMatrix, perm: &[usize]) -> Result<CovarianceMatrix> {
    Ok(CovarianceMatrix::from_symmetric(permute_modes_in(
        &sigma.entries,
        perm,
    )?))
}

pub(crate) fn permute_modes_in<T: Real>(sigma: &DMatrix<T>, perm: &[usize]) -> Result<DMatrix<T>> {
    let n = sigma.nrows() / 2;
    validate_permutation(perm, n)?;
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let src_i = 2 * perm[i / 2] + i % 2;
        let src_j = 2 * perm[j / 2] + j % 2;
        sigma[(src_i, src_j)]
    }))
}

pub(crate) fn validate_permutation(perm: &[usize], n_modes: usize) -> Result<()> {
    if perm.len() != n_modes {
        return Err(Error::InvalidPermutation { n_modes });
    }
    let mut seen = vec![false; n_modes];
    for &p in perm {
        if p >= n_modes || seen[p] {
            return Err(Error::InvalidPermutation { n_modes });
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a mode permutation.
pub fn invert_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    validate_permutation(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (slot, &mode) in perm.iter().enumerate() {
        inv[mode] = slot;
    }
    Ok(inv)
}

/// Bona fide condition `σ + iΩ ⪰ −tol`.
///
/// The Hermitian matrix `σ + iΩ` is embedded as the real symmetric
/// `[[σ, −Ω], [Ω, σ]]`, which has the same spectrum with doubled multiplicity.
pub fn is_physical(sigma: &CovarianceMatrix, tol: f64) -> bool {
    min_bona_fide_eigenvalue(sigma) >= -tol
}

/// Smallest eigenvalue of `σ + iΩ`.
pub fn min_bona_fide_eigenvalue(sigma: &CovarianceMatrix) -> f64 {
    let d = sigma.dim();
    let omega = symplectic_form_in::<f64>(sigma.n_modes());
    let mut embed = DMatrix::<f64>::zeros(2 * d, 2 * d);
    embed.view_mut((0, 0), (d, d)).copy_from(&sigma.entries);
    embed.view_mut((d, d), (d, d)).copy_from(&sigma.entries);
    embed.view_mut((0, d), (d, d)).copy_from(&(-&omega));
    embed.view_mut((d, 0), (d, d)).copy_from(&omega);
    SymmetricEigen::new(embed).eigenvalues.min()
}
