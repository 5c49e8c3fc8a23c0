//! Human-readable rendering. Every number is printed with 17 significant
//! digits so it parses back to the value in the machine report.

use std::fmt::Write;

use cvtele::sweep::format_value as v;
use cvtele::{CovarianceMatrix, TeleportReport};

fn matrix(out: &mut String, name: &str, m: &CovarianceMatrix) {
    let _ = writeln!(out, "{name}:");
    for row in m.rows() {
        let cells: Vec<String> = row.into_iter().map(v).collect();
        let _ = writeln!(out, "  {}", cells.join(" "));
    }
}

pub fn report(r: &TeleportReport) -> String {
    let mut out = String::new();
    let c = &r.config;
    let _ = writeln!(
        out,
        "q={} eta={} r={} phi={} convention={}",
        v(c.source.q()),
        v(c.source.eta()),
        v(c.amplifier.r()),
        v(c.amplifier.phi()),
        r.convention
    );
    let order: Vec<String> = r.b2_input_order.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(out, "b2_input_order={}", order.join(","));
    matrix(&mut out, "sigma_in", &r.sigma_in);
    matrix(&mut out, "sigma_shared", &r.sigma_shared);
    matrix(&mut out, "sigma_out", &r.sigma_out);
    let _ = writeln!(out, "nu_pipeline={}", v(r.nu_pipeline));
    match r.nu_closed_form {
        Some(nu) => {
            let _ = writeln!(out, "nu_closed_form={}", v(nu));
        }
        None => {
            let _ = writeln!(out, "nu_closed_form=none");
        }
    }
    let _ = writeln!(out, "log_negativity={}", v(r.log_negativity));
    match r.fidelity {
        Some(f) => {
            let _ = writeln!(out, "fidelity={}", v(f));
        }
        None => {
            let _ = writeln!(out, "fidelity=none");
        }
    }
    let _ = writeln!(out, "output_physical={}", r.output_physical);
    for (name, value) in &r.residuals {
        let _ = writeln!(out, "residual.{name}={}", v(*value));
    }
    out
}
