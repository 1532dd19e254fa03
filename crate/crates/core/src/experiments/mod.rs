//! Parameter sweeps, figure-data emission, and scaling-law reproduction.
//!
//! Sweeps evaluate grid points independently (and in parallel), but always
//! assemble output in grid order with fixed float formatting, so identical
//! specs produce byte-identical CSVs. Grid points whose probe violates the
//! uncertainty bound are flagged rather than dropped; entropy-based columns
//! are emitted as `nan` there while the rational closed forms stay numeric.

mod csvout;
mod figures;
mod fit;
mod table1;

pub use csvout::{fmt_float, write_atomic, CsvDoc};
pub use figures::{reproduce_figure, FigureFile, FigureId};
pub use fit::{fit_power_law, FitMode, FitResult};
pub use table1::{reproduce_table1, table1_csv, Table1Row, PAPER_TABLE1};

use rayon::prelude::*;

use crate::coherence::{coherence, coherence_derivative, DEFAULT_COHERENCE_STEP};
use crate::gaussian::{CovarianceMatrix, GaussianState, QuadratureVector};
use crate::metrology::{
    amp_eigenvalues, amplifier_mbar_family, amplifier_rg_family, att_eigenvalues,
    attenuator_mbar_family, attenuator_phi_family, qfi_amp_mbar, qfi_amp_rg, qfi_att_mbar,
    qfi_att_phi, qfi_bures_auto, qfi_generic, AttMbarVariant, StateFamily, DEFAULT_FD_STEP,
};
use crate::probe::{settings_from_asymmetry, AsymmetrySettings, MeasurementSettings, Settings};
use crate::{Error, Result};

/// Which Gaussian channel a sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Attenuator,
    Amplifier,
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Attenuator => "attenuator",
            ChannelKind::Amplifier => "amplifier",
        }
    }
}

/// The parameter whose QFI is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimand {
    Phi,
    Rg,
    Mbar,
}

impl Estimand {
    pub fn name(&self) -> &'static str {
        match self {
            Estimand::Phi => "phi",
            Estimand::Rg => "rg",
            Estimand::Mbar => "mbar",
        }
    }
}

/// The variable stepped along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariable {
    Phi,
    Rg,
    Mbar,
    Epsilon,
}

impl ScanVariable {
    pub fn name(&self) -> &'static str {
        match self {
            ScanVariable::Phi => "phi",
            ScanVariable::Rg => "rg",
            ScanVariable::Mbar => "mbar",
            ScanVariable::Epsilon => "epsilon",
        }
    }
}

/// Requested output columns, emitted in the order given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    QfiClosed,
    QfiGeneric,
    QfiBures,
    EigenProduct,
    Coherence,
    CoherenceDerivative,
}

impl OutputKind {
    pub fn column_name(&self) -> &'static str {
        match self {
            OutputKind::QfiClosed => "qfi_closed",
            OutputKind::QfiGeneric => "qfi_generic",
            OutputKind::QfiBures => "qfi_bures",
            OutputKind::EigenProduct => "eigen_product",
            OutputKind::Coherence => "coherence",
            OutputKind::CoherenceDerivative => "dcoherence",
        }
    }
}

/// Uniform grid with `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 points, got {count}")));
        }
        if !start.is_finite() || !stop.is_finite() || stop <= start {
            return Err(Error::Domain(format!(
                "grid bounds must be finite with stop > start, got [{start}, {stop}]"
            )));
        }
        Ok(Self { start, stop, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub channel: ChannelKind,
    pub estimand: Estimand,
    pub scan: ScanVariable,
    pub grid: Grid,
    pub nbar: f64,
    pub probe: Settings,
    /// Fixed channel parameter (φ or r_g) used when it is not the scanned one.
    pub channel_param: f64,
    /// Fixed environment occupation used when m̄ is not the scanned one.
    pub mbar: f64,
    pub outputs: Vec<OutputKind>,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        match (self.channel, self.estimand) {
            (ChannelKind::Attenuator, Estimand::Rg) => {
                return Err(Error::Domain("cannot estimate rg on the attenuator".into()))
            }
            (ChannelKind::Amplifier, Estimand::Phi) => {
                return Err(Error::Domain("cannot estimate phi on the amplifier".into()))
            }
            _ => {}
        }
        match (self.channel, self.scan) {
            (ChannelKind::Attenuator, ScanVariable::Rg) => {
                return Err(Error::Domain("cannot scan rg on the attenuator".into()))
            }
            (ChannelKind::Amplifier, ScanVariable::Phi) => {
                return Err(Error::Domain("cannot scan phi on the amplifier".into()))
            }
            _ => {}
        }
        if self.scan == ScanVariable::Epsilon {
            if !matches!(self.probe, Settings::Asymmetric(_)) {
                return Err(Error::Domain(
                    "epsilon scans need the (sigma, epsilon) probe parametrization".into(),
                ));
            }
            if self.grid.start < 0.0 || self.grid.stop >= 1.0 {
                return Err(Error::Domain(
                    "epsilon grid must lie within [0, 1)".into(),
                ));
            }
        }
        if !self.nbar.is_finite() || self.nbar < 0.0 {
            return Err(Error::Domain(format!("bad probe occupation {}", self.nbar)));
        }
        if !self.mbar.is_finite() || self.mbar < 0.0 {
            return Err(Error::Domain(format!("bad environment occupation {}", self.mbar)));
        }
        if self.outputs.is_empty() {
            return Err(Error::Domain("no outputs requested".into()));
        }
        Ok(())
    }
}

/// One evaluated grid point; output order matches the spec's request list.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outputs: Vec<f64>,
    pub valid: bool,
}

/// Ordered sweep output.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub scan_name: String,
    pub output_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Renders rows with a `valid` flag column appended.
    pub fn to_csv(&self, provenance: &[(String, String)]) -> String {
        let mut doc = CsvDoc::new();
        for (k, v) in provenance {
            doc.provenance(k, v);
        }
        doc.provenance(
            "note",
            "invalid rows violate the probe uncertainty bound; entropy-based columns are nan there",
        );
        let mut header = vec![self.scan_name.clone()];
        header.extend(self.output_names.iter().cloned());
        header.push("valid".to_string());
        doc.header(header);
        for row in &self.rows {
            let mut cells = vec![fmt_float(row.value)];
            cells.extend(row.outputs.iter().map(|v| fmt_float(*v)));
            cells.push(if row.valid { "1" } else { "0" }.to_string());
            doc.row(cells);
        }
        doc.render()
    }
}

pub(crate) fn zero_mean(cov: CovarianceMatrix) -> GaussianState {
    GaussianState::new(QuadratureVector::zero(), cov)
}

pub(crate) fn probe_state(nbar: f64, sq: f64, sp: f64) -> GaussianState {
    let c = 2.0 * nbar + 1.0;
    zero_mean(CovarianceMatrix::diagonal(c / (sp * sp), c / (sq * sq)))
}

/// Closed-form QFI for one channel/estimand pair at explicit parameters.
pub(crate) fn closed_qfi_at(
    channel: ChannelKind,
    estimand: Estimand,
    ch_param: f64,
    mbar: f64,
    nbar: f64,
    sq: f64,
    sp: f64,
) -> f64 {
    match (channel, estimand) {
        (ChannelKind::Attenuator, Estimand::Phi) => qfi_att_phi(ch_param, mbar, nbar, sq, sp),
        (ChannelKind::Attenuator, Estimand::Mbar) => {
            qfi_att_mbar(ch_param, mbar, nbar, sq, sp, AttMbarVariant::Corrected)
        }
        (ChannelKind::Amplifier, Estimand::Rg) => qfi_amp_rg(ch_param, mbar, nbar, sq, sp),
        (ChannelKind::Amplifier, Estimand::Mbar) => qfi_amp_mbar(ch_param, mbar, nbar, sq, sp),
        _ => f64::NAN,
    }
}

fn estimand_family(
    channel: ChannelKind,
    estimand: Estimand,
    probe: GaussianState,
    ch_param: f64,
    mbar: f64,
) -> StateFamily {
    match (channel, estimand) {
        (ChannelKind::Attenuator, Estimand::Phi) => attenuator_phi_family(probe, mbar),
        (ChannelKind::Attenuator, Estimand::Mbar) => attenuator_mbar_family(probe, ch_param),
        (ChannelKind::Amplifier, Estimand::Rg) => amplifier_rg_family(probe, mbar),
        (ChannelKind::Amplifier, Estimand::Mbar) => amplifier_mbar_family(probe, ch_param),
        _ => unreachable!("validated spec"),
    }
}

fn scan_family(spec: &SweepSpec, sq: f64, sp: f64, ch_param: f64, mbar: f64) -> StateFamily {
    let probe = probe_state(spec.nbar, sq, sp);
    match spec.scan {
        ScanVariable::Phi => attenuator_phi_family(probe, mbar),
        ScanVariable::Rg => amplifier_rg_family(probe, mbar),
        ScanVariable::Mbar => match spec.channel {
            ChannelKind::Attenuator => attenuator_mbar_family(probe, ch_param),
            ChannelKind::Amplifier => amplifier_mbar_family(probe, ch_param),
        },
        ScanVariable::Epsilon => {
            let sigma = match spec.probe {
                Settings::Asymmetric(a) => a.sigma,
                Settings::Direct(_) => unreachable!("validated spec"),
            };
            let nbar = spec.nbar;
            let channel = spec.channel;
            StateFamily::new("epsilon", move |eps| {
                let s = settings_from_asymmetry(&AsymmetrySettings {
                    sigma,
                    epsilon: eps,
                });
                let (a, b) = match channel {
                    ChannelKind::Attenuator => {
                        let ev = att_eigenvalues(ch_param, mbar, nbar, s.sigma_q, s.sigma_p);
                        (ev.nu1, ev.nu2)
                    }
                    ChannelKind::Amplifier => {
                        let ev = amp_eigenvalues(ch_param, mbar, nbar, s.sigma_q, s.sigma_p);
                        (ev.mu1, ev.mu2)
                    }
                };
                zero_mean(CovarianceMatrix::diagonal(a, b))
            })
        }
    }
}

fn eval_point(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let settings: MeasurementSettings = match spec.scan {
        ScanVariable::Epsilon => settings_from_asymmetry(&AsymmetrySettings {
            sigma: match spec.probe {
                Settings::Asymmetric(a) => a.sigma,
                Settings::Direct(_) => unreachable!("validated spec"),
            },
            epsilon: value,
        }),
        _ => spec.probe.resolve(),
    };
    let (sq, sp) = (settings.sigma_q, settings.sigma_p);
    let ch_param = match spec.scan {
        ScanVariable::Phi | ScanVariable::Rg => value,
        _ => spec.channel_param,
    };
    let mbar = if spec.scan == ScanVariable::Mbar {
        value
    } else {
        spec.mbar
    };
    let theta = match spec.estimand {
        Estimand::Phi | Estimand::Rg => ch_param,
        Estimand::Mbar => mbar,
    };
    let c = 2.0 * spec.nbar + 1.0;
    let valid = sq * sp <= c * (1.0 + 1e-12);

    let post_cov = match spec.channel {
        ChannelKind::Attenuator => {
            let ev = att_eigenvalues(ch_param, mbar, spec.nbar, sq, sp);
            CovarianceMatrix::diagonal(ev.nu1, ev.nu2)
        }
        ChannelKind::Amplifier => {
            let ev = amp_eigenvalues(ch_param, mbar, spec.nbar, sq, sp);
            CovarianceMatrix::diagonal(ev.mu1, ev.mu2)
        }
    };

    let mut outputs = Vec::with_capacity(spec.outputs.len());
    for kind in &spec.outputs {
        let v = match kind {
            OutputKind::QfiClosed => closed_qfi_at(
                spec.channel,
                spec.estimand,
                ch_param,
                mbar,
                spec.nbar,
                sq,
                sp,
            ),
            OutputKind::EigenProduct => post_cov.s11 * post_cov.s22,
            OutputKind::QfiGeneric => {
                if valid {
                    let fam = estimand_family(
                        spec.channel,
                        spec.estimand,
                        probe_state(spec.nbar, sq, sp),
                        ch_param,
                        mbar,
                    );
                    qfi_generic(&fam, theta, DEFAULT_FD_STEP)?.total
                } else {
                    f64::NAN
                }
            }
            OutputKind::QfiBures => {
                if valid {
                    let fam = estimand_family(
                        spec.channel,
                        spec.estimand,
                        probe_state(spec.nbar, sq, sp),
                        ch_param,
                        mbar,
                    );
                    qfi_bures_auto(&fam, theta)?
                } else {
                    f64::NAN
                }
            }
            OutputKind::Coherence => {
                if valid {
                    coherence(&zero_mean(post_cov))?.coherence
                } else {
                    f64::NAN
                }
            }
            OutputKind::CoherenceDerivative => {
                if valid {
                    let fam = scan_family(spec, sq, sp, ch_param, mbar);
                    coherence_derivative(&fam, value, DEFAULT_COHERENCE_STEP)?
                } else {
                    f64::NAN
                }
            }
        };
        outputs.push(v);
    }
    Ok(SweepRow {
        value,
        outputs,
        valid,
    })
}

/// Evaluates a sweep over its grid; rows arrive in deterministic grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let values = spec.grid.values();
    let rows: Result<Vec<SweepRow>> = values
        .par_iter()
        .map(|&v| eval_point(spec, v))
        .collect();
    let rows = rows?;
    if rows.iter().all(|r| !r.valid) {
        return Err(Error::EmptyResult(
            "every grid point violates the probe uncertainty bound".into(),
        ));
    }
    Ok(SweepTable {
        scan_name: spec.scan.name().to_string(),
        output_names: spec
            .outputs
            .iter()
            .map(|o| o.column_name().to_string())
            .collect(),
        rows,
    })
}

/// Coherence of the prepared probe over a (σ_q, σ_p) grid.
///
/// `None` cells violate the uncertainty bound; the matrix CSV emits them as
/// `nan` to stay rectangular.
#[derive(Debug, Clone)]
pub struct CoherenceMap {
    pub sigma_q: Vec<f64>,
    pub sigma_p: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CoherenceMap {
    pub fn to_csv(&self, nbar: f64) -> String {
        let mut doc = CsvDoc::new();
        doc.provenance_f64("nbar", nbar);
        doc.provenance(
            "note",
            "rows are sigma_q, columns sigma_p; uncertainty-violating cells emitted as nan",
        );
        let mut header = vec!["sigma_q".to_string()];
        header.extend(self.sigma_p.iter().map(|v| fmt_float(*v)));
        doc.header(header);
        for (i, sq) in self.sigma_q.iter().enumerate() {
            let mut cells = vec![fmt_float(*sq)];
            cells.extend(
                self.values[i]
                    .iter()
                    .map(|v| fmt_float(v.unwrap_or(f64::NAN))),
            );
            doc.row(cells);
        }
        doc.render()
    }
}

/// Probe coherence over the product grid, invalid cells flagged as `None`.
pub fn coherence_map(sigma_q_grid: &Grid, sigma_p_grid: &Grid, nbar: f64) -> Result<CoherenceMap> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::Domain(format!("bad probe occupation {nbar}")));
    }
    let sigma_q = sigma_q_grid.values();
    let sigma_p = sigma_p_grid.values();
    let c = 2.0 * nbar + 1.0;
    let values: Vec<Vec<Option<f64>>> = sigma_q
        .par_iter()
        .map(|&sq| {
            sigma_p
                .iter()
                .map(|&sp| {
                    if sq * sp <= c * (1.0 + 1e-12) {
                        coherence(&probe_state(nbar, sq, sp)).ok().map(|r| r.coherence)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    Ok(CoherenceMap {
        sigma_q,
        sigma_p,
        values,
    })
}
