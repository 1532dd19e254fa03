//! Reproduction of the published power-law coefficients.
//!
//! Four asymmetry scans (ε ∈ [0, 0.9], 19 points, σ = 1, β = ω = 1) are
//! fitted with I = α + β εⁿ and compared against the published (α, β). Three
//! of the four α values reproduce within a few percent. The attenuator-φ row
//! does not: the published α = 0.16 is not attainable from the stated fixed
//! parameters (which give 0.00806), so that row carries a permanent MISMATCH
//! flag instead of a silent "fix".

use std::f64::consts::FRAC_PI_4;

use super::csvout::{fmt_float, CsvDoc};
use super::fit::{fit_power_law, FitMode};
use super::{closed_qfi_at, ChannelKind, Estimand};
use crate::gaussian::thermal_occupation;
use crate::Result;

/// Published coefficients: (case, α, β).
pub const PAPER_TABLE1: [(&str, f64, f64); 4] = [
    ("attenuator_phi", 0.16, 1.72),
    ("attenuator_mbar", 0.31, 0.40),
    ("amplifier_rg", 3.72, 1.30),
    ("amplifier_mbar", 0.12, 0.34),
];

/// One comparison row.
#[derive(Debug, Clone)]
pub struct Table1Row {
    pub case_name: String,
    pub alpha_ours: f64,
    pub alpha_paper: f64,
    pub beta_ours: f64,
    pub beta_paper: f64,
    pub exponent_ours: f64,
    pub rms_residual: f64,
    /// |α_ours/α_paper − 1| ≤ 5%.
    pub alpha_within_5pct: bool,
    pub note: String,
}

fn scan_case(channel: ChannelKind, estimand: Estimand, ch_param: f64, mbar: f64, nbar: f64) -> Vec<(f64, f64)> {
    super::Grid::new(0.0, 0.9, 19)
        .expect("static grid")
        .values()
        .into_iter()
        .map(|eps| {
            let sq = 1.0 / (1.0 - eps).sqrt();
            let sp = 1.0 / (1.0 + eps).sqrt();
            (eps, closed_qfi_at(channel, estimand, ch_param, mbar, nbar, sq, sp))
        })
        .collect()
}

/// Runs the four asymmetry scans and emits the side-by-side comparison.
pub fn reproduce_table1() -> Result<Vec<Table1Row>> {
    let nbar = thermal_occupation(1.0, 1.0)?;
    let cases = [
        (ChannelKind::Attenuator, Estimand::Phi, FRAC_PI_4, 0.5),
        (ChannelKind::Attenuator, Estimand::Mbar, FRAC_PI_4, 0.5),
        (ChannelKind::Amplifier, Estimand::Rg, 1.0, 0.5),
        (ChannelKind::Amplifier, Estimand::Mbar, 1.0, 0.5),
    ];
    let mut rows = Vec::with_capacity(4);
    for (i, (channel, estimand, ch_param, mbar)) in cases.into_iter().enumerate() {
        let (name, alpha_paper, beta_paper) = PAPER_TABLE1[i];
        let points = scan_case(channel, estimand, ch_param, mbar, nbar);
        let fit = fit_power_law(&points, FitMode::FreeExponent)?;
        let rel = (fit.alpha / alpha_paper - 1.0).abs();
        let alpha_within_5pct = rel <= 0.05;
        let note = if name == "attenuator_phi" {
            format!(
                "MISMATCH: thermal-probe value {:.5} vs published 0.16; the published row is not \
                 reproducible from the stated fixed parameters (phi = pi/4, mbar = 0.5, beta = \
                 omega = 1, sigma = 1)",
                fit.alpha
            )
        } else {
            format!("alpha agrees within {:.1}%", 100.0 * rel)
        };
        rows.push(Table1Row {
            case_name: name.to_string(),
            alpha_ours: fit.alpha,
            alpha_paper,
            beta_ours: fit.beta,
            beta_paper,
            exponent_ours: fit.exponent,
            rms_residual: fit.rms_residual,
            alpha_within_5pct,
            note,
        });
    }
    Ok(rows)
}

/// CSV rendering of the comparison table.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut doc = CsvDoc::new();
    doc.provenance("scan", "eps in [0, 0.9], 19 points, sigma = 1, beta = omega = 1")
        .provenance("attenuator", "phi = pi/4, mbar = 0.5")
        .provenance("amplifier", "rg = 1, mbar = 0.5")
        .provenance("fit", "alpha pinned to I(0); log-log least squares for (beta, n)");
    doc.header([
        "case",
        "alpha_ours",
        "alpha_paper",
        "beta_ours",
        "beta_paper",
        "n_ours",
        "rms_residual",
        "alpha_within_5pct",
        "note",
    ]);
    for r in rows {
        doc.row([
            r.case_name.clone(),
            fmt_float(r.alpha_ours),
            fmt_float(r.alpha_paper),
            fmt_float(r.beta_ours),
            fmt_float(r.beta_paper),
            fmt_float(r.exponent_ours),
            fmt_float(r.rms_residual),
            (if r.alpha_within_5pct { "1" } else { "0" }).to_string(),
            r.note.replace(',', ";"),
        ]);
    }
    doc.render()
}
