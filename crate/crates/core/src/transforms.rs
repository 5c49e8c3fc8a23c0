//! Linear maps of the protocol and their action on covariance matrices.
//!
//! Every matrix acts on interleaved quadratures. The fixed maps (B1, B2, K, U)
//! are held exactly over Q(√2, √3) and rounded on demand.

use std::fmt;

use nalgebra::DMatrix;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ExactMatrix, IntegerFactor, Surd};
use crate::gaussian::{symmetrize, CovarianceMatrix, SYMMETRY_TOL};
use crate::precision::{max_abs, Real};

/// Which reading of the feed-forward gains is applied after Alice's
/// measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainConvention {
    /// `M = U·K·B2` as written; output carries a global 1/3.
    AsPrinted,
    /// `M = √3·U·K·B2`; every entry of `M` is 0 or ±1.
    GainCorrected,
}

impl GainConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            GainConvention::AsPrinted => "as-printed",
            GainConvention::GainCorrected => "gain-corrected",
        }
    }
}

impl fmt::Display for GainConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GainConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "as-printed" => Ok(GainConvention::AsPrinted),
            "gain-corrected" => Ok(GainConvention::GainCorrected),
            other => Err(format!(
                "unknown convention '{other}' (expected as-printed or gain-corrected)"
            )),
        }
    }
}

/// Real `rows × cols` matrix applied by congruence `T·σ·Tᵀ`.
#[derive(Clone, Debug)]
pub struct LinearTransform {
    label: String,
    matrix: DMatrix<f64>,
    exact: Option<ExactMatrix>,
    factor: Option<IntegerFactor>,
}

impl LinearTransform {
    /// A transform known only in floating point.
    pub fn new(label: impl Into<String>, matrix: DMatrix<f64>) -> Result<Self> {
        check_shape(matrix.nrows(), matrix.ncols())?;
        Ok(LinearTransform {
            label: label.into(),
            matrix,
            exact: None,
            factor: None,
        })
    }

    pub(crate) fn from_exact(label: impl Into<String>, exact: ExactMatrix) -> Self {
        check_shape(exact.rows(), exact.cols()).expect("fixed protocol maps have valid shapes");
        LinearTransform {
            label: label.into(),
            matrix: exact.to_f64(),
            factor: exact.integer_factor(),
            exact: Some(exact),
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::from_exact("identity", ExactMatrix::identity(2 * n_modes))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Entries rounded to `f64`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Exact entries, for the fixed protocol maps.
    pub fn exact(&self) -> Option<&ExactMatrix> {
        self.exact.as_ref()
    }

    /// `self · rhs`; exact if both factors are.
    pub fn compose(&self, rhs: &LinearTransform) -> Result<LinearTransform> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: rhs.rows(),
            });
        }
        let label = format!("{}·{}", self.label, rhs.label);
        Ok(match (&self.exact, &rhs.exact) {
            (Some(a), Some(b)) => Self::from_exact(label, a.mul(b)),
            _ => LinearTransform::new(label, &self.matrix * &rhs.matrix)?,
        })
    }

    /// Multiplies by an exact scalar.
    pub(crate) fn scaled(&self, label: impl Into<String>, s: Surd) -> LinearTransform {
        let exact = self
            .exact
            .as_ref()
            .expect("only exact transforms are rescaled")
            .scale(s);
        Self::from_exact(label, exact)
    }

    /// `‖T·Tᵀ − I‖∞`.
    pub fn orthogonality_residual(&self) -> f64 {
        let ttt = &self.matrix * self.matrix.transpose();
        crate::precision::max_abs_diff(&ttt, &DMatrix::identity(self.rows(), self.rows()))
    }

    pub(crate) fn congruence_in<T: Real>(&self, sigma: &DMatrix<T>) -> Result<DMatrix<T>> {
        if sigma.nrows() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: sigma.nrows(),
            });
        }
        let raw = match (&self.factor, &self.exact) {
            (Some(f), _) => {
                let z = f.integer.map(|v| T::from_f64(v as f64));
                let inner = &z * sigma * z.transpose();
                scale_by_ratio(inner, f.scale_sq)
            }
            (None, Some(e)) => {
                let t = e.to_real::<T>();
                &t * sigma * t.transpose()
            }
            (None, None) => {
                let t = self.matrix.map(T::from_f64);
                &t * sigma * t.transpose()
            }
        };
        let (sym, residual) = symmetrize(&raw);
        let scale = max_abs(&raw).to_f64().max(1.0);
        if residual.to_f64() > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric {
                residual: residual.to_f64(),
            });
        }
        Ok(sym)
    }
}

fn scale_by_ratio<T: Real>(m: DMatrix<T>, ratio: Rational64) -> DMatrix<T> {
    if ratio == Rational64::from_integer(1) {
        return m;
    }
    let num = T::from_f64(*ratio.numer() as f64);
    let den = T::from_f64(*ratio.denom() as f64);
    m.map(|v| v * num / den)
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || !rows.is_multiple_of(2) || !cols.is_multiple_of(2) || rows > cols {
        return Err(Error::BadShape { rows, cols });
    }
    Ok(())
}

/// `T·σ·Tᵀ` on `t.rows()/2` modes.
pub fn apply(t: &LinearTransform, sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let out = t.congruence_in::<f64>(sigma.matrix())?;
    Ok(CovarianceMatrix::from_symmetric(out))
}

fn inv_sqrt2() -> Surd {
    Surd::scaled_root(1, 2, 2)
}

/// Places `weight · I₂` in block `(row, col)`.
fn set_block(m: &mut ExactMatrix, row: usize, col: usize, weight: Surd) {
    m.set(2 * row, 2 * col, weight);
    m.set(2 * row + 1, 2 * col + 1, weight);
}

/// Bob's beam splitters BS1/BS2 on slots `(x₁, x₃, x₂, x₄)`, producing
/// `(x₅, x₆, x₁₅, x₁₆)`.
pub fn beam_splitter_b1() -> LinearTransform {
    let w = inv_sqrt2();
    let mut m = ExactMatrix::zeros(8, 8);
    set_block(&mut m, 0, 0, w);
    set_block(&mut m, 0, 3, w);
    set_block(&mut m, 1, 1, w);
    set_block(&mut m, 1, 2, w);
    set_block(&mut m, 2, 1, w);
    set_block(&mut m, 2, 2, -w);
    set_block(&mut m, 3, 0, w);
    set_block(&mut m, 3, 3, -w);
    LinearTransform::from_exact("B1", m)
}

/// Alice's beam splitters BS3/BS4: mix slots (1, 5) and (3, 6), pass 2 and 4.
pub fn beam_splitter_b2() -> LinearTransform {
    let w = inv_sqrt2();
    let one = Surd::integer(1);
    let mut m = ExactMatrix::zeros(12, 12);
    set_block(&mut m, 0, 0, w);
    set_block(&mut m, 0, 4, w);
    set_block(&mut m, 1, 1, one);
    set_block(&mut m, 2, 2, w);
    set_block(&mut m, 2, 5, w);
    set_block(&mut m, 3, 3, one);
    set_block(&mut m, 4, 0, w);
    set_block(&mut m, 4, 4, -w);
    set_block(&mut m, 5, 2, w);
    set_block(&mut m, 5, 5, -w);
    LinearTransform::from_exact("B2", m)
}

/// Rows of the 12-component quadrature vector kept after Alice reads out
/// `(X₉, P₁₀, X₁₁, P₁₂)` (one-based).
pub const KEPT_ROWS: [usize; 8] = [1, 3, 4, 5, 7, 8, 10, 12];

/// Row selector K (8×12).
pub fn measurement_selector_k() -> LinearTransform {
    let mut m = ExactMatrix::zeros(8, 12);
    for (row, &col) in KEPT_ROWS.iter().enumerate() {
        m.set(row, col - 1, Surd::integer(1));
    }
    LinearTransform::from_exact("K", m)
}

/// Bob's feed-forward map U (4×8).
pub fn gain_matrix_u() -> LinearTransform {
    let a = Surd::scaled_root(1, 3, 6); // √(2/3)
    let b = Surd::scaled_root(1, 3, 3); // √(1/3)
    let mut m = ExactMatrix::zeros(4, 8);
    m.set(0, 0, -a);
    m.set(0, 1, -b);
    m.set(1, 2, -b);
    m.set(1, 6, a);
    m.set(2, 3, a);
    m.set(2, 4, b);
    m.set(3, 5, b);
    m.set(3, 7, -a);
    LinearTransform::from_exact("U", m)
}

/// Beam splitters, measurement and feed-forward as one 4×12 map.
pub fn composite(convention: GainConvention) -> LinearTransform {
    let ukb2 = gain_matrix_u()
        .compose(&measurement_selector_k())
        .and_then(|uk| uk.compose(&beam_splitter_b2()))
        .expect("protocol maps have compatible shapes");
    match convention {
        GainConvention::AsPrinted => ukb2,
        GainConvention::GainCorrected => {
            ukb2.scaled("√3·U·K·B2", Surd::scaled_root(1, 1, 3))
        }
    }
}
