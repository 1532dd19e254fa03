//! Figure-data emission: one CSV per panel, deterministic bytes.
//!
//! Probe columns cover the thermal case, two symmetric effective-temperature
//! variants, and one asymmetric (coherence-generating) variant; the σ values
//! are spelled out in the column names since the published captions leave
//! them implicit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::csvout::{fmt_float, CsvDoc};
use super::fit::{fit_power_law, FitMode};
use super::{closed_qfi_at, coherence_map, probe_state, ChannelKind, Estimand, Grid};
use crate::coherence::{coherence_derivative, DEFAULT_COHERENCE_STEP};
use crate::gaussian::thermal_occupation;
use crate::metrology::{
    amp_eigenvalues, amplifier_mbar_family, amplifier_rg_family, att_eigenvalues,
    attenuator_mbar_family, attenuator_phi_family, qfi_att_mbar, qfi_att_phi, AttMbarVariant,
    StateFamily,
};
use crate::{Error, Result};

/// Identifier of a reproducible figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            "fig5" => Ok(FigureId::Fig5),
            "fig6" => Ok(FigureId::Fig6),
            other => Err(Error::Domain(format!(
                "unknown figure id '{other}' (expected fig2..fig6)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

/// A named CSV payload ready to be written to disk.
#[derive(Debug, Clone)]
pub struct FigureFile {
    pub name: String,
    pub content: String,
}

const PROBES: [(&str, f64, f64); 4] = [
    ("sq1.0_sp1.0", 1.0, 1.0),
    ("sq1.2_sp1.2", 1.2, 1.2),
    ("sq0.8_sp0.8", 0.8, 0.8),
    ("sq1.2_sp0.8", 1.2, 0.8),
];

const CURVE_POINTS: usize = 151;

fn base_doc(figure: &str, panel: &str, nbar: f64) -> CsvDoc {
    let mut doc = CsvDoc::new();
    doc.provenance("figure", figure)
        .provenance("panel", panel)
        .provenance("beta", "1")
        .provenance("omega", "1")
        .provenance_f64("nbar", nbar);
    doc
}

#[allow(clippy::too_many_arguments)]
fn curve_panel(
    figure: &str,
    panel: &str,
    nbar: f64,
    scan_name: &str,
    grid: &Grid,
    column_prefix: &str,
    mut f: impl FnMut(f64, f64, f64) -> f64,
    extra: &[(&str, String)],
) -> FigureFile {
    let mut doc = base_doc(figure, panel, nbar);
    for (k, v) in extra {
        doc.provenance(k, v);
    }
    let mut header = vec![scan_name.to_string()];
    header.extend(PROBES.iter().map(|(label, _, _)| format!("{column_prefix}_{label}")));
    doc.header(header);
    for v in grid.values() {
        let mut cells = vec![v];
        for (_, sq, sp) in PROBES {
            cells.push(f(v, sq, sp));
        }
        doc.row_f64(cells);
    }
    FigureFile {
        name: format!("{figure}_{panel}.csv"),
        content: doc.render(),
    }
}

fn fig2(nbar: f64) -> Vec<FigureFile> {
    let phi_grid = Grid::new(0.0, FRAC_PI_2, CURVE_POINTS).unwrap();
    let mbar_grid = Grid::new(0.0, 3.0, CURVE_POINTS).unwrap();
    vec![
        curve_panel(
            "fig2",
            "a",
            nbar,
            "phi",
            &phi_grid,
            "nu_product",
            |phi, sq, sp| att_eigenvalues(phi, 0.5, nbar, sq, sp).product(),
            &[("mbar", "0.5".into())],
        ),
        curve_panel(
            "fig2",
            "b",
            nbar,
            "mbar",
            &mbar_grid,
            "nu_product",
            |mbar, sq, sp| att_eigenvalues(FRAC_PI_4, mbar, nbar, sq, sp).product(),
            &[("phi", "pi/4".into())],
        ),
        curve_panel(
            "fig2",
            "c",
            nbar,
            "phi",
            &phi_grid,
            "qfi_phi",
            |phi, sq, sp| qfi_att_phi(phi, 0.5, nbar, sq, sp),
            &[("mbar", "0.5".into())],
        ),
        curve_panel(
            "fig2",
            "d",
            nbar,
            "mbar",
            &mbar_grid,
            "qfi_mbar",
            |mbar, sq, sp| qfi_att_mbar(FRAC_PI_4, mbar, nbar, sq, sp, AttMbarVariant::Corrected),
            &[("phi", "pi/4".into()), ("variant", "corrected".into())],
        ),
    ]
}

fn fig3(nbar: f64) -> Vec<FigureFile> {
    let rg_grid = Grid::new(0.0, 3.0, CURVE_POINTS).unwrap();
    let mbar_grid = Grid::new(0.0, 3.0, CURVE_POINTS).unwrap();
    vec![
        curve_panel(
            "fig3",
            "a",
            nbar,
            "rg",
            &rg_grid,
            "mu_product",
            |rg, sq, sp| amp_eigenvalues(rg, 0.5, nbar, sq, sp).product(),
            &[("mbar", "0.5".into())],
        ),
        curve_panel(
            "fig3",
            "b",
            nbar,
            "mbar",
            &mbar_grid,
            "mu_product",
            |mbar, sq, sp| amp_eigenvalues(1.0, mbar, nbar, sq, sp).product(),
            &[("rg", "1".into())],
        ),
        curve_panel(
            "fig3",
            "c",
            nbar,
            "rg",
            &rg_grid,
            "qfi_rg",
            |rg, sq, sp| closed_qfi_at(ChannelKind::Amplifier, Estimand::Rg, rg, 0.5, nbar, sq, sp),
            &[("mbar", "0.5".into())],
        ),
        curve_panel(
            "fig3",
            "d",
            nbar,
            "mbar",
            &mbar_grid,
            "qfi_mbar",
            |mbar, sq, sp| {
                closed_qfi_at(ChannelKind::Amplifier, Estimand::Mbar, 1.0, mbar, nbar, sq, sp)
            },
            &[("rg", "1".into())],
        ),
    ]
}

fn fig4(nbar: f64) -> Result<Vec<FigureFile>> {
    let grid = Grid::new(0.5, 1.5, 41)?;
    let map = coherence_map(&grid, &grid, nbar)?;
    let mut doc = base_doc("fig4", "a", nbar);
    doc.provenance(
        "note",
        "rows are sigma_q, columns sigma_p; uncertainty-violating cells emitted as nan",
    );
    let mut header = vec!["sigma_q".to_string()];
    header.extend(map.sigma_p.iter().map(|v| fmt_float(*v)));
    doc.header(header);
    for (i, sq) in map.sigma_q.iter().enumerate() {
        let mut cells = vec![fmt_float(*sq)];
        cells.extend(map.values[i].iter().map(|v| fmt_float(v.unwrap_or(f64::NAN))));
        doc.row(cells);
    }
    Ok(vec![FigureFile {
        name: "fig4_a.csv".to_string(),
        content: doc.render(),
    }])
}

#[allow(clippy::too_many_arguments)]
fn derivative_panel(
    figure: &str,
    panel: &str,
    nbar: f64,
    scan_name: &str,
    grid: &Grid,
    column_prefix: &str,
    family: impl Fn(f64, f64) -> StateFamily,
    extra: &[(&str, String)],
) -> Result<FigureFile> {
    let mut doc = base_doc(figure, panel, nbar);
    for (k, v) in extra {
        doc.provenance(k, v);
    }
    let mut header = vec![scan_name.to_string()];
    header.extend(PROBES.iter().map(|(label, _, _)| format!("{column_prefix}_{label}")));
    doc.header(header);
    for v in grid.values() {
        let mut cells = vec![v];
        for (_, sq, sp) in PROBES {
            let fam = family(sq, sp);
            cells.push(coherence_derivative(&fam, v, DEFAULT_COHERENCE_STEP)?);
        }
        doc.row_f64(cells);
    }
    Ok(FigureFile {
        name: format!("{figure}_{panel}.csv"),
        content: doc.render(),
    })
}

fn fig5(nbar: f64) -> Result<Vec<FigureFile>> {
    // derivative stencils reach slightly past the endpoints, which the
    // trigonometric families accept
    let phi_grid = Grid::new(0.0, FRAC_PI_2, CURVE_POINTS)?;
    let rg_grid = Grid::new(0.0, 3.0, CURVE_POINTS)?;
    let mbar_grid = Grid::new(0.0, 3.0, CURVE_POINTS)?;
    Ok(vec![
        derivative_panel(
            "fig5",
            "a",
            nbar,
            "phi",
            &phi_grid,
            "dcoh_dphi",
            |sq, sp| attenuator_phi_family(probe_state(nbar, sq, sp), 0.5),
            &[("mbar", "0.5".into())],
        )?,
        derivative_panel(
            "fig5",
            "a_inset",
            nbar,
            "mbar",
            &mbar_grid,
            "dcoh_dmbar",
            |sq, sp| attenuator_mbar_family(probe_state(nbar, sq, sp), FRAC_PI_4),
            &[("phi", "pi/4".into())],
        )?,
        derivative_panel(
            "fig5",
            "b",
            nbar,
            "rg",
            &rg_grid,
            "dcoh_drg",
            |sq, sp| amplifier_rg_family(probe_state(nbar, sq, sp), 0.5),
            &[("mbar", "0.5".into())],
        )?,
        derivative_panel(
            "fig5",
            "b_inset",
            nbar,
            "mbar",
            &mbar_grid,
            "dcoh_dmbar",
            |sq, sp| amplifier_mbar_family(probe_state(nbar, sq, sp), 1.0),
            &[("rg", "1".into())],
        )?,
    ])
}

fn fig6_panel(
    panel: &str,
    nbar: f64,
    channel: ChannelKind,
    ch_param: f64,
    param_label: (&str, &str),
    estimands: [(Estimand, &str); 2],
) -> Result<FigureFile> {
    let mut doc = base_doc("fig6", panel, nbar);
    doc.provenance(param_label.0, param_label.1)
        .provenance("mbar", "0.5")
        .provenance("sigma", "1")
        .provenance("fit", "I = alpha + beta*eps^n, alpha pinned to I(0), free n");
    let eps: Vec<f64> = Grid::new(0.0, 0.9, 19)?.values();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut header = vec!["epsilon".to_string()];
    for (estimand, label) in estimands {
        let points: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                let sq = 1.0 / (1.0 - e).sqrt();
                let sp = 1.0 / (1.0 + e).sqrt();
                (e, closed_qfi_at(channel, estimand, ch_param, 0.5, nbar, sq, sp))
            })
            .collect();
        let fit = fit_power_law(&points, FitMode::FreeExponent)?;
        header.push(format!("qfi_{label}"));
        header.push(format!("fit_{label}"));
        columns.push(points.iter().map(|(_, v)| *v).collect());
        columns.push(
            eps.iter()
                .map(|&e| fit.alpha + fit.beta * e.powf(fit.exponent))
                .collect(),
        );
        doc.provenance(
            &format!("fit_{label}"),
            format!(
                "alpha = {}, beta = {}, n = {}",
                fmt_float(fit.alpha),
                fmt_float(fit.beta),
                fmt_float(fit.exponent)
            ),
        );
    }
    doc.header(header);
    for (i, &e) in eps.iter().enumerate() {
        let mut cells = vec![e];
        for col in &columns {
            cells.push(col[i]);
        }
        doc.row_f64(cells);
    }
    Ok(FigureFile {
        name: format!("fig6_{panel}.csv"),
        content: doc.render(),
    })
}

fn fig6(nbar: f64) -> Result<Vec<FigureFile>> {
    Ok(vec![
        fig6_panel(
            "a",
            nbar,
            ChannelKind::Attenuator,
            FRAC_PI_4,
            ("phi", "pi/4"),
            [(Estimand::Phi, "phi"), (Estimand::Mbar, "mbar")],
        )?,
        fig6_panel(
            "b",
            nbar,
            ChannelKind::Amplifier,
            1.0,
            ("rg", "1"),
            [(Estimand::Rg, "rg"), (Estimand::Mbar, "mbar")],
        )?,
    ])
}

/// Emits the panel CSVs of one figure. Deterministic: identical calls
/// produce byte-identical payloads.
pub fn reproduce_figure(id: FigureId) -> Result<Vec<FigureFile>> {
    let nbar = thermal_occupation(1.0, 1.0)?;
    match id {
        FigureId::Fig2 => Ok(fig2(nbar)),
        FigureId::Fig3 => Ok(fig3(nbar)),
        FigureId::Fig4 => fig4(nbar),
        FigureId::Fig5 => fig5(nbar),
        FigureId::Fig6 => fig6(nbar),
    }
}
