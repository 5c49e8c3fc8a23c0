//! Rectangular (q, r) grids and their CSV rendering.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics;
use crate::protocol::{teleport, ProtocolConfig};
use crate::transforms::GainConvention;

pub const CSV_HEADER: &str = "q,r,nu_minus,log_negativity,fidelity,convention";

pub const DEFAULT_STEPS: usize = 41;
pub const DEFAULT_MAX: f64 = 2.0;

/// Grid over source squeezing `q` and amplifier squeezing `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    pub eta: f64,
    pub phi: f64,
    pub convention: GainConvention,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            q_min: 0.0,
            q_max: DEFAULT_MAX,
            q_steps: DEFAULT_STEPS,
            r_min: 0.0,
            r_max: DEFAULT_MAX,
            r_steps: DEFAULT_STEPS,
            eta: FRAC_PI_4,
            phi: FRAC_PI_8,
            convention: GainConvention::AsPrinted,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, steps) in [
            ("q", self.q_min, self.q_max, self.q_steps),
            ("r", self.r_min, self.r_max, self.r_steps),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: lo,
                    reason: "range bounds must be finite and non-negative",
                });
            }
            if lo > hi {
                return Err(Error::InvalidParameter {
                    name,
                    value: lo,
                    reason: "minimum exceeds maximum",
                });
            }
            if steps == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "step count must be at least 1",
                });
            }
        }
        for (name, value) in [("eta", self.eta), ("phi", self.phi)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    pub fn q_values(&self) -> Vec<f64> {
        linspace(self.q_min, self.q_max, self.q_steps)
    }

    pub fn r_values(&self) -> Vec<f64> {
        linspace(self.r_min, self.r_max, self.r_steps)
    }

    /// All `(q, r)` pairs, q outer.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let rs = self.r_values();
        self.q_values()
            .into_iter()
            .flat_map(|q| rs.iter().map(move |&r| (q, r)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.q_steps * self.r_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `steps` evenly spaced values; endpoints are hit exactly.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let last = steps - 1;
    (0..steps)
        .map(|i| {
            if i == last {
                hi
            } else {
                lo + (hi - lo) * (i as f64) / (last as f64)
            }
        })
        .collect()
}

/// Which metric columns are filled. Unselected columns are left empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricSelection {
    En,
    Fidelity,
    #[default]
    Both,
}

impl MetricSelection {
    fn entanglement(self) -> bool {
        matches!(self, MetricSelection::En | MetricSelection::Both)
    }

    fn fidelity(self) -> bool {
        matches!(self, MetricSelection::Fidelity | MetricSelection::Both)
    }
}

impl FromStr for MetricSelection {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "en" => Ok(MetricSelection::En),
            "fidelity" => Ok(MetricSelection::Fidelity),
            "both" => Ok(MetricSelection::Both),
            other => Err(format!(
                "unknown metric '{other}' (expected en, fidelity or both)"
            )),
        }
    }
}

/// Where ν̃₋ (and so E_N) comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuSource {
    /// Spectrum of the partially transposed pipeline output.
    #[default]
    Pipeline,
    /// The closed-form ν̃₋; only meaningful at the default phases.
    ClosedForm,
}

impl FromStr for NuSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pipeline" => Ok(NuSource::Pipeline),
            "closed-form" => Ok(NuSource::ClosedForm),
            other => Err(format!(
                "unknown nu source '{other}' (expected pipeline or closed-form)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: f64,
    pub r: f64,
    pub nu_minus: f64,
    pub log_negativity: Option<f64>,
    pub fidelity: Option<f64>,
    pub convention: GainConvention,
}

/// Evaluates one grid point.
pub fn evaluate(
    grid: &SweepGrid,
    q: f64,
    r: f64,
    metric: MetricSelection,
    nu_source: NuSource,
) -> Result<SweepRow> {
    let config = ProtocolConfig::new(q, grid.eta, r, grid.phi, grid.convention)?;
    let report = teleport(&config)?;
    let nu_minus = match nu_source {
        NuSource::Pipeline => report.nu_pipeline,
        NuSource::ClosedForm => metrics::nu_closed_form(q, r)?,
    };
    Ok(SweepRow {
        q,
        r,
        nu_minus,
        log_negativity: metric
            .entanglement()
            .then(|| metrics::log_negativity_from_nu(nu_minus)),
        fidelity: report.fidelity.filter(|_| metric.fidelity()),
        convention: grid.convention,
    })
}

/// Evaluates the whole grid, q outer and r inner. Points are independent, so
/// with the `parallel` feature they are spread over the current rayon pool;
/// the row order does not depend on it.
pub fn run(grid: &SweepGrid, metric: MetricSelection, nu_source: NuSource) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let points = grid.points();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&(q, r)| evaluate(grid, q, r, metric, nu_source))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points
            .iter()
            .map(|&(q, r)| evaluate(grid, q, r, metric, nu_source))
            .collect()
    }
}

/// 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_value(row.q),
            format_value(row.r),
            format_value(row.nu_minus),
            optional(row.log_negativity),
            optional(row.fidelity),
            row.convention
        );
    }
    out
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    w.write_all(to_csv(rows).as_bytes())?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(steps: usize) -> SweepGrid {
        SweepGrid {
            q_steps: steps,
            r_steps: steps,
            ..SweepGrid::default()
        }
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(0.0, 2.0, 41);
        assert_eq!(v.len(), 41);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[40], 2.0);
        assert_eq!(v[20], 1.0);
        assert_eq!(linspace(0.3, 0.7, 1), vec![0.3]);
    }

    #[test]
    fn points_are_q_major() {
        let g = SweepGrid {
            q_steps: 2,
            r_steps: 3,
            ..SweepGrid::default()
        };
        let p = g.points();
        assert_eq!(p, vec![(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (2.0, 0.0), (2.0, 1.0), (2.0, 2.0)]);
    }

    #[test]
    fn rejects_bad_grids() {
        for g in [
            SweepGrid { q_min: 3.0, ..SweepGrid::default() },
            SweepGrid { r_steps: 0, ..SweepGrid::default() },
            SweepGrid { phi: f64::NAN, ..SweepGrid::default() },
        ] {
            assert!(g.validate().is_err());
        }
    }

    #[test]
    fn nine_by_nine_csv_shape() {
        let rows = run(&small(9), MetricSelection::Both, NuSource::Pipeline).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 82);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with('\n'));
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[3].parse::<f64>().unwrap(), 0.0);
        let f: f64 = first[4].parse().unwrap();
        assert!((f - 1.0 / (18.25f64.sqrt() - 1.5)).abs() < 1e-9);
        assert_eq!(first[5], "as-printed");
    }

    #[test]
    fn unselected_columns_are_empty() {
        let rows = run(&small(2), MetricSelection::En, NuSource::Pipeline).unwrap();
        let csv = to_csv(&rows);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert!(!row[3].is_empty());
        assert!(row[4].is_empty());
    }

    #[test]
    fn values_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, 12345.678] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn closed_form_source_matches_pipeline_at_r0() {
        let g = SweepGrid {
            q_steps: 5,
            r_steps: 1,
            ..SweepGrid::default()
        };
        let a = run(&g, MetricSelection::En, NuSource::Pipeline).unwrap();
        let b = run(&g, MetricSelection::En, NuSource::ClosedForm).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.nu_minus - y.nu_minus).abs() < 1e-10);
        }
    }

    #[test]
    fn parse_selections() {
        assert_eq!("en".parse::<MetricSelection>().unwrap(), MetricSelection::En);
        assert!("bits".parse::<MetricSelection>().is_err());
        assert_eq!("closed-form".parse::<NuSource>().unwrap(), NuSource::ClosedForm);
    }
}
