//! Independent oracles and the check suite behind `cvtele verify`.
//!
//! The spectral oracle here shares no code with [`crate::metrics`]: it takes
//! square roots of the eigenvalues of `−(Ωσ)²` through the symmetric matrix
//! `−(σ^½ Ω σ^½)²`, which is similar to it, and a symmetric eigensolver.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LOG2_E, TAU};
use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    is_physical, min_bona_fide_eigenvalue, source_state, symplectic_form, two_mode_squeezed,
    vacuum, AmplifierSpec, CovarianceMatrix, SourceSpec, PHYSICALITY_TOL,
};
use crate::metrics::{self, SymplecticSpectrum, PAIRING_TOL};
use crate::protocol::{
    decompose_output, ideal_limit_check, llubo_equivalent, output_closed_form, pipeline_output,
    shared_four_mode, tan_limit_check, teleport, ModeLabels, ProtocolConfig,
    B2_ALTERNATE_ORDER, B2_INPUT_ORDER, IDEAL_PHASE,
};
use crate::sweep::{self, MetricSelection, NuSource, SweepGrid};
use crate::transforms::{
    apply, beam_splitter_b1, beam_splitter_b2, composite, gain_matrix_u, measurement_selector_k,
    GainConvention, LinearTransform,
};

/// Symplectic spectrum by the symmetric route. Requires `σ > 0`.
pub fn oracle_symplectic_spectrum(sigma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let eig = SymmetricEigen::new(sigma.matrix().clone());
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let omega = symplectic_form(sigma.n_modes())?;
    let m = &root * omega * &root;
    // m is antisymmetric, so −m² = mᵀm.
    let gram = m.transpose() * &m;
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let mut paired = Vec::with_capacity(values.len() / 2);
    for pair in values.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > PAIRING_TOL * b.max(1.0) {
            return Err(Error::UnpairedSpectrum { a, b });
        }
        paired.push(0.5 * (a + b));
    }
    Ok(SymplecticSpectrum::from_sorted(paired))
}

/// Parameters `(θ, z, θ′)` of `R(θ)·diag(eᶻ, e⁻ᶻ)·R(θ′)` for one mode.
pub type LocalParams = (f64, f64, f64);

fn rotation(t: f64) -> [[f64; 2]; 2] {
    let (s, c) = t.sin_cos();
    [[c, s], [-s, c]]
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Block-diagonal symplectic, one `R(θ)·S(z)·R(θ′)` block per mode.
pub fn local_symplectic(params: &[LocalParams]) -> Result<LinearTransform> {
    if params.is_empty() {
        return Err(Error::ZeroModes);
    }
    let n = params.len();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (mode, &(theta, z, theta2)) in params.iter().enumerate() {
        let squeeze = [[z.exp(), 0.0], [0.0, (-z).exp()]];
        let block = mul2(mul2(rotation(theta), squeeze), rotation(theta2));
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * mode + i, 2 * mode + j)] = block[i][j];
            }
        }
    }
    LinearTransform::new("local symplectic", m)
}

/// Seeded [`local_symplectic`] with `θ, θ′ ∈ [0, 2π)` and `z ∈ [−1, 1]`.
///
/// # Panics
/// If `n_modes` is zero.
pub fn random_local_symplectic(seed: u64, n_modes: usize) -> LinearTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<LocalParams> = (0..n_modes)
        .map(|_| {
            (
                rng.random_range(0.0..TAU),
                rng.random_range(-1.0..=1.0),
                rng.random_range(0.0..TAU),
            )
        })
        .collect();
    local_symplectic(&params).expect("n_modes must be positive")
}

/// Passive mixer: a beam splitter of random angle between each neighbouring
/// pair of modes, applied left to right.
fn random_passive(rng: &mut ChaCha8Rng, n_modes: usize) -> DMatrix<f64> {
    let d = 2 * n_modes;
    let mut total = DMatrix::<f64>::identity(d, d);
    for a in 0..n_modes.saturating_sub(1) {
        let (s, c) = rng.random_range(0.0..TAU).sin_cos();
        let mut bs = DMatrix::<f64>::identity(d, d);
        for q in 0..2 {
            let (i, j) = (2 * a + q, 2 * (a + 1) + q);
            bs[(i, i)] = c;
            bs[(j, j)] = c;
            bs[(i, j)] = s;
            bs[(j, i)] = -s;
        }
        total = bs * total;
    }
    total
}

/// Physical CM `S·D·Sᵀ` with `D = ⊕ νᵢ I₂`, `νᵢ ∈ [1, 3]`, and `S` a product of
/// local symplectics around a passive mixer.
pub fn random_physical_cm(seed: u64, n_modes: usize) -> Result<CovarianceMatrix> {
    if n_modes == 0 {
        return Err(Error::ZeroModes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let left = random_local_symplectic(seed, n_modes);
    let right = random_local_symplectic(seed.wrapping_add(1 << 32), n_modes);
    let mix = random_passive(&mut rng, n_modes);
    let s = left.matrix() * mix * right.matrix();
    let mut d = DMatrix::<f64>::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        let nu = rng.random_range(1.0..=3.0);
        d[(2 * m, 2 * m)] = nu;
        d[(2 * m + 1, 2 * m + 1)] = nu;
    }
    let raw = &s * d * s.transpose();
    CovarianceMatrix::new((&raw + raw.transpose()) * 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Informational,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Informational => "informational",
        })
    }
}

/// How `measured` is compared with `expected`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`
    Absolute,
    /// `|measured − expected| ≤ tolerance · |expected|`
    Relative,
    /// `measured > expected`
    GreaterThan,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Absolute => "absolute",
            Comparison::Relative => "relative",
            Comparison::GreaterThan => "greater-than",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Whether the comparison holds; for informational checks this is the
    /// flag only and never fails the suite.
    pub within_tolerance: bool,
}

impl Check {
    fn evaluate(measured: f64, expected: f64, tolerance: f64, comparison: Comparison) -> bool {
        match comparison {
            Comparison::Absolute => (measured - expected).abs() <= tolerance,
            Comparison::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Comparison::GreaterThan => measured > expected,
        }
    }

    pub fn hard(
        name: &str,
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Check {
        let ok = Self::evaluate(measured, expected, tolerance, comparison);
        Check {
            name: name.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            expected,
            tolerance,
            comparison,
            within_tolerance: ok,
        }
    }

    pub fn informational(
        name: &str,
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Check {
        Check {
            name: name.to_string(),
            status: CheckStatus::Informational,
            measured,
            expected,
            tolerance,
            comparison,
            within_tolerance: Self::evaluate(measured, expected, tolerance, comparison),
        }
    }

    /// A residual that must not exceed `tolerance`.
    fn residual(name: &str, measured: f64, tolerance: f64) -> Check {
        Self::hard(name, measured, 0.0, tolerance, Comparison::Absolute)
    }

    /// Pass iff `ok`; recorded as 1 (held) or 0.
    fn flag(name: &str, ok: bool) -> Check {
        Self::hard(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, Comparison::Absolute)
    }

    /// Failure of the computation itself.
    fn errored(name: &str) -> Check {
        Self::hard(name, f64::NAN, 0.0, 0.0, Comparison::Absolute)
    }
}

/// B2 slot order and the pairs its beam splitters mix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B2Ordering {
    pub slots: ModeLabels<6>,
    pub bs3: [u8; 2],
    pub bs4: [u8; 2],
}

impl B2Ordering {
    pub fn from_slots(slots: ModeLabels<6>) -> Self {
        B2Ordering {
            slots,
            bs3: [slots[0], slots[4]],
            bs4: [slots[2], slots[5]],
        }
    }
}

/// |ν̃₋(pipeline) − ν̃₋(closed form)| over q, r ∈ {0, 0.5, …, 2}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuDiscrepancy {
    /// Largest difference at r = 0.
    pub at_r_zero: f64,
    /// Largest difference over the whole grid.
    pub max: f64,
    pub worst_q: f64,
    pub worst_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub resolved_b2_ordering: B2Ordering,
    pub eq11_vs_eq14_discrepancy: NuDiscrepancy,
}

impl VerifyReport {
    /// No hard check failed.
    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = sweep::format_value;
        let o = &self.resolved_b2_ordering;
        let slots: Vec<String> = o.slots.iter().map(|s| s.to_string()).collect();
        writeln!(
            f,
            "b2 order: {} (bs3 mixes {},{}; bs4 mixes {},{})",
            slots.join(" "),
            o.bs3[0],
            o.bs3[1],
            o.bs4[0],
            o.bs4[1]
        )?;
        let d = &self.eq11_vs_eq14_discrepancy;
        writeln!(
            f,
            "nu discrepancy: at_r_zero={} max={} worst_q={} worst_r={}",
            v(d.at_r_zero),
            v(d.max),
            v(d.worst_q),
            v(d.worst_r)
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<13} {:<40} measured={} expected={} tolerance={} comparison={}",
                c.status.to_string(),
                c.name,
                v(c.measured),
                v(c.expected),
                v(c.tolerance),
                c.comparison
            )?;
        }
        write!(
            f,
            "{} checks: {} pass, {} fail, {} informational",
            self.checks.len(),
            self.count(CheckStatus::Pass),
            self.count(CheckStatus::Fail),
            self.count(CheckStatus::Informational)
        )
    }
}

const GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
const PHASES: [f64; 3] = [0.0, FRAC_PI_8, FRAC_PI_4];
const CONVENTIONS: [GainConvention; 2] = [GainConvention::AsPrinted, GainConvention::GainCorrected];

const CONSTRUCTOR_BUDGET: Duration = Duration::from_secs(1);
const PIPELINE_BUDGET: Duration = Duration::from_secs(1);
const SWEEP_BUDGET: Duration = Duration::from_secs(5);

fn cfg(q: f64, eta: f64, r: f64, phi: f64, convention: GainConvention) -> Result<ProtocolConfig> {
    ProtocolConfig::new(q, eta, r, phi, convention)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| if v > acc || v.is_nan() { v } else { acc })
}

fn entrywise(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_of(a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
}

fn literal_tms(r: f64, phi: f64) -> DMatrix<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let (h, k) = ((2.0 * phi).cos(), (2.0 * phi).sin());
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c - h * s, 0.0, k * s, 0.0,
            0.0, c + h * s, 0.0, -k * s,
            k * s, 0.0, c + h * s, 0.0,
            0.0, -k * s, 0.0, c - h * s,
        ],
    )
}

fn literal_source(q: f64, eta: f64) -> DMatrix<f64> {
    let (x, y) = ((2.0 * q).cosh(), (2.0 * q).sinh());
    let (u, v) = ((2.0 * eta).cos(), (2.0 * eta).sin());
    DMatrix::from_row_slice(
        4,
        4,
        &[
            x - u * y, 0.0, v * y, 0.0,
            0.0, x + u * y, 0.0, -v * y,
            v * y, 0.0, x + u * y, 0.0,
            0.0, -v * y, 0.0, x - u * y,
        ],
    )
}

fn constructor_checks(out: &mut Vec<Check>) {
    let squeezings = GRID;
    let phases = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, 2.0 * FRAC_PI_4];
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut physical = true;
    for &t in &squeezings {
        for &p in &phases {
            let tms = two_mode_squeezed(&AmplifierSpec::new(t, p).expect("valid"));
            let src = source_state(&SourceSpec::new(t, p).expect("valid"));
            worst = worst
                .max(entrywise(tms.matrix(), &literal_tms(t, p)))
                .max(entrywise(src.matrix(), &literal_source(t, p)));
            physical &= is_physical(&tms, PHYSICALITY_TOL) && is_physical(&src, PHYSICALITY_TOL);
        }
    }
    let elapsed = start.elapsed();
    out.push(Check::residual("constructor-exactness", worst, 1e-12));
    out.push(Check::flag("constructor-physicality", physical));
    out.push(Check::flag("constructor-runtime", elapsed < CONSTRUCTOR_BUDGET));
}

fn transform_checks(out: &mut Vec<Check>) {
    out.push(Check::residual(
        "b1-orthogonality",
        beam_splitter_b1().orthogonality_residual(),
        1e-12,
    ));
    out.push(Check::residual(
        "b2-orthogonality",
        beam_splitter_b2().orthogonality_residual(),
        1e-12,
    ));
    out.push(Check::residual(
        "k-orthonormal-rows",
        measurement_selector_k().orthogonality_residual(),
        1e-12,
    ));
    out.push(Check::residual(
        "u-orthonormal-rows",
        gain_matrix_u().orthogonality_residual(),
        1e-12,
    ));
    let m = composite(GainConvention::GainCorrected);
    let outside = match m.exact() {
        Some(e) => e
            .entries()
            .filter(|v| !matches!(v.as_integer(), Some(-1..=1)))
            .count(),
        None => m.rows() * m.cols(),
    };
    out.push(Check::residual("composite-integer-entries", outside as f64, 0.0));
}

fn pipeline_checks(out: &mut Vec<Check>) -> Result<()> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut gain = 0.0f64;
    for &q in &GRID {
        for &r in &GRID {
            let base = cfg(q, FRAC_PI_4, r, FRAC_PI_8, GainConvention::AsPrinted)?;
            let ap = teleport(&base)?;
            let gc = teleport(&base.with_convention(GainConvention::GainCorrected))?;
            for (rep, c) in [(&ap, base), (&gc, base.with_convention(GainConvention::GainCorrected))] {
                worst = worst.max(entrywise(rep.sigma_out.matrix(), output_closed_form(&c).matrix()));
            }
            for (a, g) in ap.sigma_out.matrix().iter().zip(gc.sigma_out.matrix().iter()) {
                gain = gain.max((3.0 * a - g).abs() / g.abs().max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    out.push(Check::residual("pipeline-closed-form", worst, 1e-10));
    // as-printed is the gain-corrected output divided by 3 before rounding.
    out.push(Check::residual("gain-relation", gain, 4.0 * f64::EPSILON));
    out.push(Check::flag("pipeline-runtime", elapsed < PIPELINE_BUDGET));

    let mut all_phases = 0.0f64;
    let mut sparsity = 0.0f64;
    let mut min_bona_fide = f64::INFINITY;
    let mut decomposition_failures = 0usize;
    let mut involution = 0.0f64;
    for &q in &GRID {
        for &r in &GRID {
            for &eta in &PHASES {
                for &phi in &PHASES {
                    for conv in CONVENTIONS {
                        let c = cfg(q, eta, r, phi, conv)?;
                        let rep = teleport(&c)?;
                        let m = rep.sigma_out.matrix();
                        all_phases = all_phases.max(entrywise(m, output_closed_form(&c).matrix()));
                        for i in (0..4).step_by(2) {
                            for j in (1..4).step_by(2) {
                                sparsity = sparsity.max(m[(i, j)].abs()).max(m[(j, i)].abs());
                            }
                        }
                        match conv {
                            GainConvention::GainCorrected => {
                                min_bona_fide =
                                    min_bona_fide.min(min_bona_fide_eigenvalue(&rep.sigma_out));
                                if decompose_output(&rep.sigma_out, &c).is_err() {
                                    decomposition_failures += 1;
                                }
                                let back = llubo_equivalent(&llubo_equivalent(&rep.sigma_out)?)?;
                                involution = involution.max(back.max_abs_diff(&rep.sigma_out));
                            }
                            GainConvention::AsPrinted => {
                                if decompose_output(&rep.sigma_out, &c).is_ok() {
                                    decomposition_failures += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.push(Check::residual("pipeline-closed-form-all-phases", all_phases, 1e-10));
    out.push(Check::residual("output-sparsity", sparsity, 1e-12));
    out.push(Check::hard(
        "output-physicality",
        min_bona_fide,
        -PHYSICALITY_TOL,
        0.0,
        Comparison::GreaterThan,
    ));
    out.push(Check::residual(
        "decomposition",
        decomposition_failures as f64,
        0.0,
    ));
    out.push(Check::residual("llubo-involution", involution, 0.0));

    // 2(c + ks) against r.
    let rs: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    let mut violations = 0usize;
    for (phi, increasing) in [(FRAC_PI_8, true), (IDEAL_PHASE, false)] {
        let mut prev: Option<f64> = None;
        for &r in &rs {
            let c = cfg(1.0, FRAC_PI_4, r, phi, GainConvention::GainCorrected)?;
            let (_, noise) = decompose_output(&teleport(&c)?.sigma_out, &c)?;
            if let Some(p) = prev {
                if (increasing && noise <= p) || (!increasing && noise >= p) {
                    violations += 1;
                }
            }
            prev = Some(noise);
        }
    }
    out.push(Check::residual("monotone-noise", violations as f64, 0.0));

    let mut purity = 0.0f64;
    for &r in &GRID {
        for &phi in &PHASES {
            let shared = shared_four_mode(&AmplifierSpec::new(r, phi)?);
            let sp = metrics::symplectic_eigenvalues(&shared)?;
            purity = purity.max(max_of(sp.values().iter().map(|v| (v - 1.0).abs())));
        }
    }
    out.push(Check::residual("shared-state-purity", purity, 1e-9));
    Ok(())
}

fn limit_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut tan = 0.0f64;
    for q in [0.0, 0.5, 1.0, 2.0] {
        tan = tan.max(tan_limit_check(&SourceSpec::new(q, FRAC_PI_4)?)?);
    }
    out.push(Check::residual("tan-limit", tan, 1e-12));

    let mut rel = 0.0f64;
    for q in [0.0, 1.0] {
        for r in [0.0, 2.0, 5.0, 10.0] {
            let residual = ideal_limit_check(&SourceSpec::new(q, FRAC_PI_4)?, r)?;
            let expected = 2.0 * (-2.0 * r).exp();
            rel = rel.max((residual - expected).abs() / expected);
        }
    }
    out.push(Check::residual("ideal-limit", rel, 1e-9));
    Ok(())
}

fn spectral_route_gap(sigma: &CovarianceMatrix) -> Result<f64> {
    let a = metrics::symplectic_eigenvalues(sigma)?;
    let b = oracle_symplectic_spectrum(sigma)?;
    Ok(max_of(
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0)),
    ))
}

fn with_partial_transposes(sigma: CovarianceMatrix) -> Result<Vec<CovarianceMatrix>> {
    let mut all = vec![];
    for mode in 0..sigma.n_modes() {
        all.push(metrics::partial_transpose(&sigma, mode)?);
    }
    all.push(sigma);
    Ok(all)
}

fn spectral_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut random = 0.0f64;
    for seed in 0..100u64 {
        let n = 1 + (seed % 4) as usize;
        random = random.max(spectral_route_gap(&random_physical_cm(seed, n)?)?);
    }
    out.push(Check::residual("spectral-oracle-random", random, 1e-9));

    let mut states = vec![];
    for n in 1..=4 {
        states.push(vacuum(n)?);
    }
    for &t in &GRID {
        for &p in &PHASES {
            states.extend(with_partial_transposes(two_mode_squeezed(&AmplifierSpec::new(t, p)?))?);
            states.extend(with_partial_transposes(source_state(&SourceSpec::new(t, p)?))?);
            states.extend(with_partial_transposes(shared_four_mode(&AmplifierSpec::new(t, p)?))?);
        }
    }
    for &q in &GRID {
        for &r in &GRID {
            for conv in CONVENTIONS {
                let rep = teleport(&cfg(q, FRAC_PI_4, r, FRAC_PI_8, conv)?)?;
                states.extend(with_partial_transposes(rep.sigma_out)?);
            }
        }
    }
    let constructed = max_of(
        states
            .iter()
            .map(spectral_route_gap)
            .collect::<Result<Vec<_>>>()?,
    );
    out.push(Check::residual("spectral-oracle-constructed", constructed, 1e-9));

    let mut smallest = 0.0f64;
    let mut en = 0.0f64;
    for &q in &GRID {
        let src = source_state(&SourceSpec::new(q, FRAC_PI_4)?);
        smallest = smallest.max((metrics::pt_smallest(&src, 1)? - (-2.0 * q).exp()).abs());
        en = en.max((metrics::log_negativity(&src, 1)? - 2.0 * q * LOG2_E).abs());
    }
    out.push(Check::residual("source-pt-smallest", smallest, 1e-12));
    out.push(Check::residual("source-log-negativity", en, 1e-12));

    let mut symplecticity = 0.0f64;
    for seed in 0..50u64 {
        let n = 1 + (seed % 4) as usize;
        let s = random_local_symplectic(seed, n);
        let omega = symplectic_form(n)?;
        symplecticity =
            symplecticity.max(entrywise(&(s.matrix() * &omega * s.matrix().transpose()), &omega));
    }
    out.push(Check::residual("random-local-symplectic", symplecticity, 1e-12));

    // E_N is unchanged by a local symplectic on either output mode.
    let c = cfg(1.0, FRAC_PI_4, 0.5, IDEAL_PHASE, GainConvention::GainCorrected)?;
    let sigma = teleport(&c)?.sigma_out;
    let base = metrics::log_negativity(&sigma, 1)?;
    let mut drift = 0.0f64;
    for seed in 0..50u64 {
        let local = random_local_symplectic(seed, 1);
        let mode = (seed % 2) as usize;
        let mut full = DMatrix::<f64>::identity(4, 4);
        full.view_mut((2 * mode, 2 * mode), (2, 2))
            .copy_from(local.matrix());
        let t = LinearTransform::new("local on one mode", full)?;
        let moved = apply(&t, &sigma)?;
        drift = drift.max((metrics::log_negativity(&moved, 1)? - base).abs());
    }
    out.push(Check::residual("llubo-invariance", drift, 1e-9));
    Ok(())
}

fn entanglement_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut product = 0.0f64;
    for &r in &GRID {
        for &phi in &PHASES {
            for conv in CONVENTIONS {
                product = product.max(teleport(&cfg(0.0, FRAC_PI_4, r, phi, conv)?)?.log_negativity);
            }
        }
    }
    out.push(Check::residual("entanglement-product-input", product, 0.0));

    let en_at = |phi: f64| -> Result<f64> {
        Ok(teleport(&cfg(2.0, FRAC_PI_4, 0.25, phi, GainConvention::AsPrinted)?)?.log_negativity)
    };
    out.push(Check::hard(
        "entanglement-threshold",
        en_at(FRAC_PI_8)?,
        0.0,
        0.0,
        Comparison::GreaterThan,
    ));
    out.push(Check::informational(
        "entanglement-threshold-phi-zero",
        en_at(0.0)?,
        0.0,
        0.0,
        Comparison::GreaterThan,
    ));
    out.push(Check::informational(
        "entanglement-threshold-ideal-phase",
        en_at(IDEAL_PHASE)?,
        0.0,
        0.0,
        Comparison::GreaterThan,
    ));
    Ok(())
}

fn nu_checks(out: &mut Vec<Check>) -> Result<NuDiscrepancy> {
    let mut zero_amp = 0.0f64;
    for &q in &GRID {
        let expected = (2.0 + (-2.0 * q).exp()) / 3.0;
        zero_amp = zero_amp.max((metrics::nu_closed_form(q, 0.0)? - expected).abs());
    }
    out.push(Check::residual("closed-form-zero-amplifier", zero_amp, 1e-12));

    let mut d = NuDiscrepancy {
        at_r_zero: 0.0,
        max: 0.0,
        worst_q: 0.0,
        worst_r: 0.0,
    };
    let mut alternate = 0.0f64;
    for &q in &GRID {
        for &r in &GRID {
            let c = cfg(q, FRAC_PI_4, r, FRAC_PI_8, GainConvention::AsPrinted)?;
            let closed = metrics::nu_closed_form(q, r)?;
            let gap = (teleport(&c)?.nu_pipeline - closed).abs();
            if r == 0.0 {
                d.at_r_zero = d.at_r_zero.max(gap);
            }
            if gap > d.max {
                d.max = gap;
                d.worst_q = q;
                d.worst_r = r;
            }
            let alt = pipeline_output(&c, &B2_ALTERNATE_ORDER)?;
            alternate = alternate.max((metrics::pt_smallest(&alt, 1)? - closed).abs());
        }
    }
    out.push(Check::residual("closed-form-vs-pipeline-r0", d.at_r_zero, 1e-10));
    out.push(Check::informational(
        "eq14-consistency",
        d.max,
        0.0,
        1e-10,
        Comparison::Absolute,
    ));
    out.push(Check::informational(
        "b2-alternate-ordering-closed-form",
        alternate,
        0.0,
        1e-10,
        Comparison::Absolute,
    ));
    Ok(d)
}

fn defined(fidelity: Option<f64>) -> Result<f64> {
    fidelity.ok_or(Error::FidelityDomain {
        reason: "output is not a physical state",
        value: f64::NAN,
    })
}

fn fidelity_checks(out: &mut Vec<Check>, default_rows: &[sweep::SweepRow]) -> Result<()> {
    let f = defined(teleport(&cfg(0.0, FRAC_PI_4, 0.0, FRAC_PI_8, GainConvention::AsPrinted)?)?.fidelity)?;
    out.push(Check::hard(
        "fidelity-anchor",
        f,
        1.0 / ((16.0f64 + 2.25).sqrt() - 1.5),
        1e-9,
        Comparison::Absolute,
    ));

    let edge_max = default_rows
        .iter()
        .filter(|row| row.q == 0.0)
        .filter_map(|row| row.fidelity)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::informational(
        "fidelity-max-q0-edge",
        edge_max,
        0.38,
        0.05,
        Comparison::Absolute,
    ));
    let argmax_q = default_rows
        .iter()
        .filter_map(|row| row.fidelity.map(|f| (row.q, f)))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
        .0;
    out.push(Check::residual("fidelity-max-location", argmax_q, 0.0));
    Ok(())
}

fn tradeoff_checks(out: &mut Vec<Check>) -> Result<()> {
    let qs: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let mut en_violation = 0.0f64;
    let mut f_violation = 0.0f64;
    for r in [0.0, 0.5, 1.0] {
        let reports = qs
            .iter()
            .map(|&q| teleport(&cfg(q, FRAC_PI_4, r, FRAC_PI_8, GainConvention::AsPrinted)?))
            .collect::<Result<Vec<_>>>()?;
        for w in reports.windows(2) {
            en_violation = en_violation.max(w[0].log_negativity - w[1].log_negativity);
            f_violation = f_violation.max(defined(w[1].fidelity)? - defined(w[0].fidelity)?);
        }
    }
    out.push(Check::residual("tradeoff-entanglement", en_violation, 1e-12));
    out.push(Check::residual("tradeoff-fidelity", f_violation, 1e-12));
    Ok(())
}

fn default_sweep_csv() -> Result<(String, Vec<sweep::SweepRow>)> {
    let rows = sweep::run(&SweepGrid::default(), MetricSelection::Both, NuSource::Pipeline)?;
    Ok((sweep::to_csv(&rows), rows))
}

#[cfg(feature = "parallel")]
fn single_thread_csv() -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("a one-thread pool can always be built");
    pool.install(|| default_sweep_csv().map(|(csv, _)| csv))
}

#[cfg(not(feature = "parallel"))]
fn single_thread_csv() -> Result<String> {
    default_sweep_csv().map(|(csv, _)| csv)
}

fn sweep_checks(out: &mut Vec<Check>) -> Result<Vec<sweep::SweepRow>> {
    let start = Instant::now();
    let (first, rows) = default_sweep_csv()?;
    let elapsed = start.elapsed();
    let (second, _) = default_sweep_csv()?;
    let single = single_thread_csv()?;
    out.push(Check::flag("sweep-runtime", elapsed < SWEEP_BUDGET));
    out.push(Check::flag("sweep-determinism", first == second));
    out.push(Check::flag("sweep-thread-independence", first == single));
    Ok(rows)
}

/// Runs every check. Computation errors are recorded as failed checks.
pub fn run_suite() -> VerifyReport {
    let mut checks = Vec::new();
    constructor_checks(&mut checks);
    transform_checks(&mut checks);

    let guarded = |name: &str, checks: &mut Vec<Check>, f: &dyn Fn(&mut Vec<Check>) -> Result<()>| {
        if f(checks).is_err() {
            checks.push(Check::errored(name));
        }
    };
    guarded("pipeline-error", &mut checks, &pipeline_checks);
    guarded("limit-error", &mut checks, &limit_checks);
    guarded("spectral-error", &mut checks, &spectral_checks);
    guarded("entanglement-error", &mut checks, &entanglement_checks);
    guarded("tradeoff-error", &mut checks, &tradeoff_checks);

    let discrepancy = nu_checks(&mut checks).unwrap_or_else(|_| {
        checks.push(Check::errored("nu-error"));
        NuDiscrepancy {
            at_r_zero: f64::NAN,
            max: f64::NAN,
            worst_q: f64::NAN,
            worst_r: f64::NAN,
        }
    });
    match sweep_checks(&mut checks) {
        Ok(rows) => guarded("fidelity-error", &mut checks, &|c| fidelity_checks(c, &rows)),
        Err(_) => checks.push(Check::errored("sweep-error")),
    }

    checks.sort_by(|a, b| a.name.cmp(&b.name));
    VerifyReport {
        checks,
        resolved_b2_ordering: B2Ordering::from_slots(B2_INPUT_ORDER),
        eq11_vs_eq14_discrepancy: discrepancy,
    }
}
