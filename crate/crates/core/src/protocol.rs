//! The teleportation pipeline for a two-mode squeezed state.
//!
//! Bob mixes the outputs of two identical amplifiers TA1/TA2 on BS1/BS2 and
//! shares the resulting four modes `(5, 6, 15, 16)` with Alice, who keeps
//! `15` and `6`. Alice mixes them with her source modes `7, 8` on BS3/BS4,
//! reads out four quadratures and Bob's feed-forward leaves the teleported
//! pair `(13, 14)`.
//!
//! All stages run in double-double precision and are rounded to `f64` at the
//! end; the limit checks form their residuals before rounding.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ExactMatrix, Surd};
use crate::gaussian::{
    direct_sum_in, is_physical, permute_modes_in, source_like, source_state_in, two_mode_squeezed_in,
    AmplifierSpec, CovarianceMatrix, SourceSpec, PHYSICALITY_TOL, SYMMETRY_TOL,
};
use crate::metrics;
use crate::precision::{max_abs, max_abs_diff, to_f64_matrix, Dd, Real};
use crate::transforms::{beam_splitter_b1, composite, GainConvention, LinearTransform};

/// Mode labels of a state, one per mode, in slot order.
pub type ModeLabels<const N: usize> = [u8; N];

/// Slot order expected by B1.
pub const B1_INPUT_ORDER: ModeLabels<4> = [1, 3, 2, 4];
/// Output slots of B1.
pub const SHARED_MODES: ModeLabels<4> = [5, 6, 15, 16];
/// Source modes.
pub const SOURCE_MODES: ModeLabels<2> = [7, 8];
/// Output of the feed-forward.
pub const OUTPUT_MODES: ModeLabels<2> = [13, 14];

/// Slot order fed to B2. Slots (1, 5) are mixed by BS3 and (3, 6) by BS4,
/// so this realizes BS3 = (x₁₅, x₇) and BS4 = (x₆, x₈) with Bob's modes
/// passing through slots 2 and 4.
pub const B2_INPUT_ORDER: ModeLabels<6> = [15, 16, 6, 5, 7, 8];

/// A slot order for B2 that mixes (x₇, x₆) and (x₈, x₁₅). It does not follow
/// the stated BS3/BS4 pairing, but its output has the X and P quadratures
/// shifted by `2c ± 2ks`, the structure behind the closed-form ν̃₋.
pub const B2_ALTERNATE_ORDER: ModeLabels<6> = [7, 5, 8, 16, 6, 15];

/// Parameters of one protocol run. TA1 and TA2 share `amplifier`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub source: SourceSpec,
    pub amplifier: AmplifierSpec,
    pub convention: GainConvention,
}

impl ProtocolConfig {
    pub fn new(
        q: f64,
        eta: f64,
        r: f64,
        phi: f64,
        convention: GainConvention,
    ) -> Result<Self> {
        Ok(ProtocolConfig {
            source: SourceSpec::new(q, eta)?,
            amplifier: AmplifierSpec::new(r, phi)?,
            convention,
        })
    }

    pub fn with_convention(self, convention: GainConvention) -> Self {
        ProtocolConfig { convention, ..self }
    }
}

/// Everything computed for one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct TeleportReport {
    pub config: ProtocolConfig,
    pub convention: GainConvention,
    pub b2_input_order: ModeLabels<6>,
    /// σ^(7)(8)
    pub sigma_in: CovarianceMatrix,
    /// σ^(5)(6)(15)(16)
    pub sigma_shared: CovarianceMatrix,
    /// σ^(13)(14)
    pub sigma_out: CovarianceMatrix,
    /// ν̃₋ from the spectrum of the partially transposed output.
    pub nu_pipeline: f64,
    /// ν̃₋ from the closed form (assumes `u = 0`, `h = k = 1/√2`).
    pub nu_closed_form: Option<f64>,
    /// Bits, from `nu_pipeline`.
    pub log_negativity: f64,
    /// `None` when the determinant formula is out of its domain, which
    /// happens when the output is not a physical state (as-printed gains
    /// with weak amplifier noise).
    pub fidelity: Option<f64>,
    /// `σ_out + iΩ ⪰ 0` within [`PHYSICALITY_TOL`].
    pub output_physical: bool,
    pub residuals: BTreeMap<String, f64>,
}

/// Moves `sigma` from slot labels `from` to slot labels `to`.
fn reorder_in<T: Real>(sigma: &DMatrix<T>, from: &[u8], to: &[u8]) -> Result<DMatrix<T>> {
    let perm: Option<Vec<usize>> = to
        .iter()
        .map(|label| from.iter().position(|l| l == label))
        .collect();
    let perm = perm.ok_or(Error::InvalidPermutation { n_modes: from.len() })?;
    permute_modes_in(sigma, &perm)
}

struct Stages<T> {
    shared: DMatrix<T>,
    input: DMatrix<T>,
    /// Gain-corrected output `√3·U·K·B2` congruence.
    out_gain_corrected: DMatrix<T>,
}

impl<T: Real> Stages<T> {
    fn output(&self, convention: GainConvention) -> DMatrix<T> {
        match convention {
            GainConvention::GainCorrected => self.out_gain_corrected.clone(),
            GainConvention::AsPrinted => {
                let three = T::from_f64(3.0);
                self.out_gain_corrected.map(|v| v / three)
            }
        }
    }
}

fn shared_in<T: Real>(amplifier: &AmplifierSpec) -> Result<DMatrix<T>> {
    let tms = two_mode_squeezed_in::<T>(amplifier);
    // σ^(1)(3) ⊕ σ^(2)(4)
    let four = direct_sum_in(&tms, &tms);
    let ordered = reorder_in(&four, &[1, 3, 2, 4], &B1_INPUT_ORDER)?;
    beam_splitter_b1().congruence_in(&ordered)
}

fn run_stages<T: Real>(config: &ProtocolConfig, b2_order: &ModeLabels<6>) -> Result<Stages<T>> {
    let shared = shared_in::<T>(&config.amplifier)?;
    let input = source_state_in::<T>(&config.source);
    let six = direct_sum_in(&shared, &input);
    let from: Vec<u8> = SHARED_MODES.iter().chain(&SOURCE_MODES).copied().collect();
    let ordered = reorder_in(&six, &from, b2_order)?;
    let out_gain_corrected =
        composite(GainConvention::GainCorrected).congruence_in(&ordered)?;
    Ok(Stages {
        shared,
        input,
        out_gain_corrected,
    })
}

fn round_cm(m: &DMatrix<Dd>) -> CovarianceMatrix {
    CovarianceMatrix::from_symmetric(to_f64_matrix(m))
}

/// Four-mode resource state in slot order `(5, 6, 15, 16)`.
pub fn shared_four_mode(amplifier: &AmplifierSpec) -> CovarianceMatrix {
    round_cm(&shared_in::<Dd>(amplifier).expect("fixed orderings are valid"))
}

/// Teleported state for an arbitrary B2 slot order (labels drawn from
/// `{5, 6, 15, 16, 7, 8}`).
pub fn pipeline_output(config: &ProtocolConfig, b2_order: &ModeLabels<6>) -> Result<CovarianceMatrix> {
    let stages = run_stages::<Dd>(config, b2_order)?;
    Ok(round_cm(&stages.output(config.convention)))
}

/// Runs the protocol and fills in all metrics.
pub fn teleport(config: &ProtocolConfig) -> Result<TeleportReport> {
    let stages = run_stages::<Dd>(config, &B2_INPUT_ORDER)?;
    let out_dd = stages.output(config.convention);
    let sigma_in = round_cm(&stages.input);
    let sigma_shared = round_cm(&stages.shared);
    let sigma_out = round_cm(&out_dd);

    let closed = output_closed_form_in::<Dd>(config);
    let mut residuals = BTreeMap::new();
    residuals.insert(
        "closed-form".to_string(),
        max_abs_diff(&out_dd, &closed).to_f64(),
    );
    let (sigma_prime, noise) = decomposition_in::<Dd>(config);
    let reconstructed = sigma_prime + DMatrix::identity(4, 4) * noise;
    residuals.insert(
        "decomposition".to_string(),
        max_abs_diff(&stages.out_gain_corrected, &reconstructed).to_f64(),
    );

    let nu_pipeline = metrics::pt_smallest(&sigma_out, 1)?;
    let nu_closed_form =
        metrics::nu_closed_form(config.source.q(), config.amplifier.r()).ok();
    if let Some(nu) = nu_closed_form {
        residuals.insert("eq14".to_string(), (nu_pipeline - nu).abs());
    }
    let log_negativity = metrics::log_negativity_from_nu(nu_pipeline);
    let fidelity = match metrics::fidelity(&sigma_in, &sigma_out) {
        Ok(f) => Some(f),
        Err(Error::FidelityDomain { .. }) => None,
        Err(e) => return Err(e),
    };
    let output_physical = is_physical(&sigma_out, PHYSICALITY_TOL);

    Ok(TeleportReport {
        config: *config,
        convention: config.convention,
        b2_input_order: B2_INPUT_ORDER,
        sigma_in,
        sigma_shared,
        sigma_out,
        nu_pipeline,
        nu_closed_form,
        log_negativity,
        fidelity,
        output_physical,
        residuals,
    })
}

/// Output state in closed form:
///
/// ```text
/// σ₁₁ = σ₄₄ = (2c + 2ks + x − uy)/3,   σ₁₃ = −vy/3
/// σ₂₂ = σ₃₃ = (2c + 2ks + x + uy)/3,   σ₂₄ = +vy/3
/// ```
///
/// The gain-corrected convention drops the 1/3.
pub fn output_closed_form(config: &ProtocolConfig) -> CovarianceMatrix {
    round_cm(&output_closed_form_in::<Dd>(config))
}

fn output_closed_form_in<T: Real>(config: &ProtocolConfig) -> DMatrix<T> {
    let (sigma_prime, noise) = decomposition_in::<T>(config);
    let gc = sigma_prime + DMatrix::identity(4, 4) * noise;
    match config.convention {
        GainConvention::GainCorrected => gc,
        GainConvention::AsPrinted => {
            let three = T::from_f64(3.0);
            gc.map(|v| v / three)
        }
    }
}

/// `(σ', 2(c + ks))` where σ' is the source layout with flipped couplings.
fn decomposition_in<T: Real>(config: &ProtocolConfig) -> (DMatrix<T>, T) {
    let src = config.source.params::<T>();
    let amp = config.amplifier.params::<T>();
    let sigma_prime = source_like(src.cosh, src.sinh, src.cos, src.sin, -T::one());
    let two = T::from_f64(2.0);
    (sigma_prime, two * (amp.cosh + amp.sin * amp.sinh))
}

/// Splits a gain-corrected output as `σ' + noise·I`.
///
/// Returns `σ'` and `noise = 2(c + ks)`; fails if the reconstruction misses
/// `sigma_out` by more than `1e-12·max(1, max|σ|)`.
pub fn decompose_output(
    sigma_out: &CovarianceMatrix,
    config: &ProtocolConfig,
) -> Result<(CovarianceMatrix, f64)> {
    if config.convention != GainConvention::GainCorrected {
        return Err(Error::ConventionMismatch);
    }
    if sigma_out.n_modes() != 2 {
        return Err(Error::NotTwoMode {
            n_modes: sigma_out.n_modes(),
        });
    }
    let (sigma_prime, noise) = decomposition_in::<Dd>(config);
    let reconstructed = to_f64_matrix(&(&sigma_prime + DMatrix::identity(4, 4) * noise));
    let residual = max_abs_diff(&reconstructed, sigma_out.matrix());
    if residual > SYMMETRY_TOL * max_abs(sigma_out.matrix()).max(1.0) {
        return Err(Error::DecompositionMismatch { residual });
    }
    Ok((round_cm(&sigma_prime), noise.to_f64()))
}

fn phase_flip() -> LinearTransform {
    let mut m = ExactMatrix::identity(4);
    m.set(0, 0, Surd::integer(-1));
    m.set(1, 1, Surd::integer(-1));
    LinearTransform::from_exact("(−I₂)⊕I₂", m)
}

/// π phase rotation of the first mode, `(−I₂) ⊕ I₂`, by congruence. Maps σ'
/// to the source layout and back.
pub fn llubo_equivalent(sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if sigma.n_modes() != 2 {
        return Err(Error::NotTwoMode {
            n_modes: sigma.n_modes(),
        });
    }
    crate::transforms::apply(&phase_flip(), sigma)
}

/// Coherent-state amplifiers (`r = 0`), gain-corrected: the output should be
/// the phase-flipped input plus twice the vacuum noise. Returns
/// `‖σ_out − (llubo(σ_in) + 2I)‖∞`.
pub fn tan_limit_check(source: &SourceSpec) -> Result<f64> {
    let config = ProtocolConfig {
        source: *source,
        amplifier: AmplifierSpec::new(0.0, std::f64::consts::FRAC_PI_8)?,
        convention: GainConvention::GainCorrected,
    };
    let stages = run_stages::<Dd>(&config, &B2_INPUT_ORDER)?;
    let flipped = phase_flip().congruence_in(&stages.input)?;
    let expected = flipped + DMatrix::identity(4, 4) * Dd::from_f64(2.0);
    Ok(max_abs_diff(&stages.out_gain_corrected, &expected).to_f64())
}

/// Amplifier phase giving `k = sin 2φ = −1`.
pub const IDEAL_PHASE: f64 = -std::f64::consts::FRAC_PI_4;

/// Gain-corrected output against σ' at `k = −1`; analytically `2e^{−2r}`.
pub fn ideal_limit_check(source: &SourceSpec, r: f64) -> Result<f64> {
    let config = ProtocolConfig {
        source: *source,
        amplifier: AmplifierSpec::new(r, IDEAL_PHASE)?,
        convention: GainConvention::GainCorrected,
    };
    let stages = run_stages::<Dd>(&config, &B2_INPUT_ORDER)?;
    let (sigma_prime, _) = decomposition_in::<Dd>(&config);
    Ok(max_abs_diff(&stages.out_gain_corrected, &sigma_prime).to_f64())
}
