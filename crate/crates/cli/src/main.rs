//! Command-line front end: QFI evaluation, sweeps, coherence, figure data,
//! the scaling-coefficient table, brute-force oracle checks, and power-law
//! fitting.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 probe violates the
//! uncertainty bound, 3 numerical failure.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use config::ConfigFile;
use gqmet::coherence::coherence;
use gqmet::experiments::{
    fit_power_law, fmt_float, reproduce_figure, reproduce_table1, run_sweep, table1_csv,
    write_atomic, ChannelKind, Estimand, FigureId, FitMode, Grid, OutputKind, ScanVariable,
    SweepSpec,
};
use gqmet::gaussian::{thermal_occupation, GaussianState, QuadratureVector};
use gqmet::metrology::{
    amplifier_mbar_family, amplifier_rg_family, att_eigenvalues, amp_eigenvalues,
    attenuator_mbar_family, attenuator_phi_family, qfi_amp_mbar, qfi_amp_rg, qfi_att_mbar,
    qfi_att_phi, qfi_bures_auto, qfi_generic, AttMbarVariant, StateFamily, DEFAULT_FD_STEP,
};
use gqmet::oracle::{fock_coherence, oracle_probe_cov, GridParams};
use gqmet::probe::{
    AsymmetrySettings, MeasurementSettings, ProbeSpec, Settings, validate_probe,
};
use gqmet::CovarianceMatrix;

#[derive(Parser)]
#[command(
    name = "gqmet",
    version,
    about = "Single-mode Gaussian quantum metrology: measurement-prepared probes, \
             attenuator/amplifier channels, QFI, and energy-basis coherence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the QFI three ways at one parameter point
    Qfi(QfiArgs),
    /// Scan a parameter grid and write a CSV table
    Sweep(SweepArgs),
    /// Coherence report for the prepared probe (optionally after a channel)
    Coherence(CoherenceArgs),
    /// Emit the panel CSVs of one figure
    Figure(FigureArgs),
    /// Power-law coefficient comparison table
    Table1(Table1Args),
    /// Brute-force oracle diagnostics
    Oracle(OracleArgs),
    /// Fit I = alpha + beta * eps^n to a CSV of (epsilon, qfi) points
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Attenuator,
    Amplifier,
}

impl ChannelArg {
    fn kind(self) -> ChannelKind {
        match self {
            ChannelArg::Attenuator => ChannelKind::Attenuator,
            ChannelArg::Amplifier => ChannelKind::Amplifier,
        }
    }

    fn parse_str(s: &str) -> Result<Self, CliError> {
        match s {
            "attenuator" => Ok(ChannelArg::Attenuator),
            "amplifier" => Ok(ChannelArg::Amplifier),
            other => Err(CliError::Usage(format!("unknown channel '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateArg {
    Phi,
    Rg,
    Mbar,
}

impl EstimateArg {
    fn estimand(self) -> Estimand {
        match self {
            EstimateArg::Phi => Estimand::Phi,
            EstimateArg::Rg => Estimand::Rg,
            EstimateArg::Mbar => Estimand::Mbar,
        }
    }

    fn parse_str(s: &str) -> Result<Self, CliError> {
        match s {
            "phi" => Ok(EstimateArg::Phi),
            "rg" => Ok(EstimateArg::Rg),
            "mbar" => Ok(EstimateArg::Mbar),
            other => Err(CliError::Usage(format!("unknown estimand '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanArg {
    Phi,
    Rg,
    Mbar,
    Epsilon,
}

impl ScanArg {
    fn variable(self) -> ScanVariable {
        match self {
            ScanArg::Phi => ScanVariable::Phi,
            ScanArg::Rg => ScanVariable::Rg,
            ScanArg::Mbar => ScanVariable::Mbar,
            ScanArg::Epsilon => ScanVariable::Epsilon,
        }
    }

    fn parse_str(s: &str) -> Result<Self, CliError> {
        match s {
            "phi" => Ok(ScanArg::Phi),
            "rg" => Ok(ScanArg::Rg),
            "mbar" => Ok(ScanArg::Mbar),
            "epsilon" => Ok(ScanArg::Epsilon),
            other => Err(CliError::Usage(format!("unknown scan variable '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Corrected,
    AsPrinted,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    ProbeCov,
    Coherence,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Free,
    Fixed,
}

/// Probe flags shared by most subcommands. Defaults mirror the reference
/// parameter set: beta = omega = 1, sigma = 1, epsilon = 0.
#[derive(Args, Clone, Copy, Default)]
struct ProbeArgs {
    /// Inverse temperature of the initial thermal probe [default: 1]
    #[arg(long)]
    beta: Option<f64>,
    /// Probe mode frequency [default: 1]
    #[arg(long)]
    omega: Option<f64>,
    /// Mean thermal occupation; overrides --beta/--omega
    #[arg(long)]
    nbar: Option<f64>,
    /// Dimensionless q-measurement uncertainty (needs --sigma-p)
    #[arg(long = "sigma-q")]
    sigma_q: Option<f64>,
    /// Dimensionless p-measurement uncertainty (needs --sigma-q)
    #[arg(long = "sigma-p")]
    sigma_p: Option<f64>,
    /// Overall scale of the (sigma, epsilon) parametrization [default: 1]
    #[arg(long)]
    sigma: Option<f64>,
    /// Measurement asymmetry, |epsilon| < 1 [default: 0]
    #[arg(long)]
    epsilon: Option<f64>,
}

struct ResolvedProbe {
    spec: ProbeSpec,
    provenance: Vec<(String, String)>,
}

fn resolve_probe(args: &ProbeArgs, cfg: &ConfigFile) -> Result<ResolvedProbe, CliError> {
    let beta = cfg.resolve(args.beta, "beta").map_err(CliError::Usage)?;
    let omega = cfg.resolve(args.omega, "omega").map_err(CliError::Usage)?;
    let nbar_flag = cfg.resolve(args.nbar, "nbar").map_err(CliError::Usage)?;
    let sigma_q = cfg.resolve(args.sigma_q, "sigma-q").map_err(CliError::Usage)?;
    let sigma_p = cfg.resolve(args.sigma_p, "sigma-p").map_err(CliError::Usage)?;
    let sigma = cfg.resolve(args.sigma, "sigma").map_err(CliError::Usage)?;
    let epsilon = cfg.resolve(args.epsilon, "epsilon").map_err(CliError::Usage)?;

    let mut provenance = Vec::new();
    let nbar = match nbar_flag {
        Some(n) => {
            provenance.push(("nbar".into(), fmt_float(n)));
            n
        }
        None => {
            let b = beta.unwrap_or(1.0);
            let w = omega.unwrap_or(1.0);
            provenance.push(("beta".into(), fmt_float(b)));
            provenance.push(("omega".into(), fmt_float(w)));
            let n = thermal_occupation(b, w).map_err(CliError::Core)?;
            provenance.push(("nbar".into(), fmt_float(n)));
            n
        }
    };
    let settings = match (sigma_q, sigma_p) {
        (Some(q), Some(p)) => {
            provenance.push(("sigma-q".into(), fmt_float(q)));
            provenance.push(("sigma-p".into(), fmt_float(p)));
            Settings::Direct(MeasurementSettings::new(q, p).map_err(CliError::Core)?)
        }
        (None, None) => {
            let s = sigma.unwrap_or(1.0);
            let e = epsilon.unwrap_or(0.0);
            provenance.push(("sigma".into(), fmt_float(s)));
            provenance.push(("epsilon".into(), fmt_float(e)));
            Settings::Asymmetric(AsymmetrySettings::new(s, e).map_err(CliError::Core)?)
        }
        _ => {
            return Err(CliError::Usage(
                "--sigma-q and --sigma-p must be given together".into(),
            ))
        }
    };
    let spec = ProbeSpec::new(nbar, settings).map_err(CliError::Core)?;
    Ok(ResolvedProbe { spec, provenance })
}

fn require_physical_probe(spec: &ProbeSpec) -> Result<(), CliError> {
    let v = validate_probe(spec);
    if !v.ok {
        return Err(CliError::Core(gqmet::Error::UnphysicalState(format!(
            "probe violates the uncertainty bound: sigma_q*sigma_p = {} > 2*nbar+1 = {}",
            v.product, v.bound
        ))));
    }
    Ok(())
}

#[derive(Args)]
struct QfiArgs {
    #[arg(long, value_enum)]
    channel: ChannelArg,
    /// Parameter whose QFI is computed
    #[arg(long = "estimate", value_enum)]
    estimate: EstimateArg,
    /// Attenuator beam-splitter angle [default: pi/4]
    #[arg(long)]
    phi: Option<f64>,
    /// Amplifier squeezing parameter [default: 1]
    #[arg(long)]
    rg: Option<f64>,
    /// Environment mean thermal occupation [default: 0.5]
    #[arg(long)]
    mbar: Option<f64>,
    /// Attenuator-mbar closed form to report [default: corrected]
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[command(flatten)]
    probe: ProbeArgs,
}

fn channel_estimand(channel: ChannelKind, estimand: Estimand) -> Result<(), CliError> {
    match (channel, estimand) {
        (ChannelKind::Attenuator, Estimand::Rg) => Err(CliError::Usage(
            "the attenuator has no rg parameter".into(),
        )),
        (ChannelKind::Amplifier, Estimand::Phi) => Err(CliError::Usage(
            "the amplifier has no phi parameter".into(),
        )),
        _ => Ok(()),
    }
}

fn cmd_qfi(args: QfiArgs) -> Result<(), CliError> {
    let channel = args.channel.kind();
    let estimand = args.estimate.estimand();
    channel_estimand(channel, estimand)?;
    let probe = resolve_probe(&args.probe, &ConfigFile::empty())?;
    require_physical_probe(&probe.spec)?;

    let settings = probe.spec.settings.resolve();
    let (nbar, sq, sp) = (probe.spec.nbar, settings.sigma_q, settings.sigma_p);
    let mbar = args.mbar.unwrap_or(0.5);
    let ch_param = match channel {
        ChannelKind::Attenuator => args.phi.unwrap_or(std::f64::consts::FRAC_PI_4),
        ChannelKind::Amplifier => args.rg.unwrap_or(1.0),
    };
    let theta = match estimand {
        Estimand::Phi | Estimand::Rg => ch_param,
        Estimand::Mbar => mbar,
    };

    let c = 2.0 * nbar + 1.0;
    let probe_state = GaussianState::new(
        QuadratureVector::zero(),
        CovarianceMatrix::diagonal(c / (sp * sp), c / (sq * sq)),
    );
    let family: StateFamily = match (channel, estimand) {
        (ChannelKind::Attenuator, Estimand::Phi) => attenuator_phi_family(probe_state, mbar),
        (ChannelKind::Attenuator, Estimand::Mbar) => attenuator_mbar_family(probe_state, ch_param),
        (ChannelKind::Amplifier, Estimand::Rg) => amplifier_rg_family(probe_state, mbar),
        (ChannelKind::Amplifier, Estimand::Mbar) => amplifier_mbar_family(probe_state, ch_param),
        _ => unreachable!(),
    };

    let closed = match (channel, estimand) {
        (ChannelKind::Attenuator, Estimand::Phi) => qfi_att_phi(ch_param, mbar, nbar, sq, sp),
        (ChannelKind::Attenuator, Estimand::Mbar) => {
            let variant = match args.variant {
                VariantArg::Corrected => AttMbarVariant::Corrected,
                VariantArg::AsPrinted => AttMbarVariant::AsPrinted,
            };
            qfi_att_mbar(ch_param, mbar, nbar, sq, sp, variant)
        }
        (ChannelKind::Amplifier, Estimand::Rg) => qfi_amp_rg(ch_param, mbar, nbar, sq, sp),
        (ChannelKind::Amplifier, Estimand::Mbar) => qfi_amp_mbar(ch_param, mbar, nbar, sq, sp),
        _ => unreachable!(),
    };
    let breakdown = qfi_generic(&family, theta, DEFAULT_FD_STEP).map_err(CliError::Core)?;
    let bures = qfi_bures_auto(&family, theta).map_err(CliError::Core)?;

    let scale = closed.abs().max(breakdown.total.abs()).max(1e-300);
    let max_rel = ((closed - breakdown.total).abs().max((closed - bures).abs())) / scale;

    println!("channel      = {}", channel.name());
    println!(
        "estimate     = {} at {} = {}",
        estimand.name(),
        estimand.name(),
        fmt_float(theta)
    );
    match channel {
        ChannelKind::Attenuator => println!("fixed        = phi {}, mbar {}", fmt_float(ch_param), fmt_float(mbar)),
        ChannelKind::Amplifier => println!("fixed        = rg {}, mbar {}", fmt_float(ch_param), fmt_float(mbar)),
    }
    println!(
        "probe        = nbar {}, sigma_q {}, sigma_p {}",
        fmt_float(nbar),
        fmt_float(sq),
        fmt_float(sp)
    );
    println!("term_cov     = {}", fmt_float(breakdown.term_cov));
    println!("term_purity  = {}", fmt_float(breakdown.term_purity));
    println!("term_mean    = {}", fmt_float(breakdown.term_mean));
    println!("qfi_generic  = {}", fmt_float(breakdown.total));
    println!("qfi_closed   = {}", fmt_float(closed));
    println!("qfi_bures    = {}", fmt_float(bures));
    println!("max_rel_dev  = {}", fmt_float(max_rel));
    Ok(())
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key = value file supplying defaults for any missing flag
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    #[arg(long = "estimate", value_enum)]
    estimate: Option<EstimateArg>,
    /// Grid variable: phi | rg | mbar | epsilon
    #[arg(long, value_enum)]
    scan: Option<ScanArg>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Fixed attenuator angle when phi is not scanned [default: pi/4]
    #[arg(long)]
    phi: Option<f64>,
    /// Fixed amplifier squeezing when rg is not scanned [default: 1]
    #[arg(long)]
    rg: Option<f64>,
    /// Fixed environment occupation when mbar is not scanned [default: 0.5]
    #[arg(long)]
    mbar: Option<f64>,
    /// Comma list of closed,generic,bures,eigenprod,coherence,dcoherence
    #[arg(long)]
    outputs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    probe: ProbeArgs,
}

fn parse_outputs(spec: &str) -> Result<Vec<OutputKind>, CliError> {
    let mut outputs = Vec::new();
    for item in spec.split(',') {
        let kind = match item.trim() {
            "closed" => OutputKind::QfiClosed,
            "generic" => OutputKind::QfiGeneric,
            "bures" => OutputKind::QfiBures,
            "eigenprod" => OutputKind::EigenProduct,
            "coherence" => OutputKind::Coherence,
            "dcoherence" => OutputKind::CoherenceDerivative,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown output '{other}' (expected closed, generic, bures, eigenprod, coherence, dcoherence)"
                )))
            }
        };
        if !outputs.contains(&kind) {
            outputs.push(kind);
        }
    }
    if outputs.is_empty() {
        return Err(CliError::Usage("no outputs requested".into()));
    }
    Ok(outputs)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path).map_err(CliError::Usage)?,
        None => ConfigFile::empty(),
    };
    let channel = match args.channel {
        Some(c) => c,
        None => match cfg.get("channel") {
            Some(s) => ChannelArg::parse_str(s)?,
            None => return Err(CliError::Usage("missing --channel".into())),
        },
    };
    let estimate = match args.estimate {
        Some(e) => e,
        None => match cfg.get("estimate") {
            Some(s) => EstimateArg::parse_str(s)?,
            None => return Err(CliError::Usage("missing --estimate".into())),
        },
    };
    let scan = match args.scan {
        Some(s) => s,
        None => match cfg.get("scan") {
            Some(s) => ScanArg::parse_str(s)?,
            None => return Err(CliError::Usage("missing --scan".into())),
        },
    };
    let start = cfg
        .resolve(args.start, "start")
        .map_err(CliError::Usage)?
        .ok_or_else(|| CliError::Usage("missing --start".into()))?;
    let stop = cfg
        .resolve(args.stop, "stop")
        .map_err(CliError::Usage)?
        .ok_or_else(|| CliError::Usage("missing --stop".into()))?;
    let count = cfg
        .resolve(args.count, "count")
        .map_err(CliError::Usage)?
        .ok_or_else(|| CliError::Usage("missing --count".into()))?;
    let out: PathBuf = match args.out {
        Some(p) => p,
        None => cfg
            .get("out")
            .map(PathBuf::from)
            .ok_or_else(|| CliError::Usage("missing --out".into()))?,
    };
    let outputs_raw = cfg
        .resolve(args.outputs.clone(), "outputs")
        .map_err(CliError::Usage)?
        .unwrap_or_else(|| "closed,generic,bures".to_string());
    let outputs = parse_outputs(&outputs_raw)?;

    let channel_kind = channel.kind();
    let estimand = estimate.estimand();
    channel_estimand(channel_kind, estimand)?;
    let probe = resolve_probe(&args.probe, &cfg)?;
    let mbar = cfg
        .resolve(args.mbar, "mbar")
        .map_err(CliError::Usage)?
        .unwrap_or(0.5);
    let ch_param = match channel_kind {
        ChannelKind::Attenuator => cfg
            .resolve(args.phi, "phi")
            .map_err(CliError::Usage)?
            .unwrap_or(std::f64::consts::FRAC_PI_4),
        ChannelKind::Amplifier => cfg
            .resolve(args.rg, "rg")
            .map_err(CliError::Usage)?
            .unwrap_or(1.0),
    };

    let spec = SweepSpec {
        channel: channel_kind,
        estimand,
        scan: scan.variable(),
        grid: Grid::new(start, stop, count).map_err(CliError::Core)?,
        nbar: probe.spec.nbar,
        probe: probe.spec.settings,
        channel_param: ch_param,
        mbar,
        outputs,
    };
    let table = run_sweep(&spec).map_err(CliError::Core)?;

    let mut provenance: Vec<(String, String)> = vec![
        ("command".into(), "sweep".into()),
        ("channel".into(), channel_kind.name().into()),
        ("estimate".into(), estimand.name().into()),
        ("scan".into(), scan.variable().name().into()),
        ("start".into(), fmt_float(start)),
        ("stop".into(), fmt_float(stop)),
        ("count".into(), count.to_string()),
        (
            match channel_kind {
                ChannelKind::Attenuator => "phi".into(),
                ChannelKind::Amplifier => "rg".into(),
            },
            fmt_float(ch_param),
        ),
        ("mbar".into(), fmt_float(mbar)),
        ("outputs".into(), outputs_raw.clone()),
    ];
    provenance.extend(probe.provenance.clone());

    write_atomic(&out, &table.to_csv(&provenance)).map_err(CliError::Core)?;
    println!("wrote {} ({} rows)", out.display(), table.rows.len());
    Ok(())
}

#[derive(Args)]
struct CoherenceArgs {
    /// Send the probe through a channel before measuring coherence
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    rg: Option<f64>,
    #[arg(long)]
    mbar: Option<f64>,
    #[command(flatten)]
    probe: ProbeArgs,
}

fn cmd_coherence(args: CoherenceArgs) -> Result<(), CliError> {
    let probe = resolve_probe(&args.probe, &ConfigFile::empty())?;
    require_physical_probe(&probe.spec)?;
    let settings = probe.spec.settings.resolve();
    let (nbar, sq, sp) = (probe.spec.nbar, settings.sigma_q, settings.sigma_p);
    let mbar = args.mbar.unwrap_or(0.5);

    let cov = match args.channel {
        None => {
            let c = 2.0 * nbar + 1.0;
            CovarianceMatrix::diagonal(c / (sp * sp), c / (sq * sq))
        }
        Some(ChannelArg::Attenuator) => {
            let ev = att_eigenvalues(
                args.phi.unwrap_or(std::f64::consts::FRAC_PI_4),
                mbar,
                nbar,
                sq,
                sp,
            );
            CovarianceMatrix::diagonal(ev.nu1, ev.nu2)
        }
        Some(ChannelArg::Amplifier) => {
            let ev = amp_eigenvalues(args.rg.unwrap_or(1.0), mbar, nbar, sq, sp);
            CovarianceMatrix::diagonal(ev.mu1, ev.mu2)
        }
    };
    let report = coherence(&GaussianState::new(QuadratureVector::zero(), cov))
        .map_err(CliError::Core)?;
    println!(
        "probe          = nbar {}, sigma_q {}, sigma_p {}",
        fmt_float(nbar),
        fmt_float(sq),
        fmt_float(sp)
    );
    println!("coherence      = {}", fmt_float(report.coherence));
    println!("ref_occupation = {}", fmt_float(report.ref_occupation));
    println!("state_entropy  = {}", fmt_float(report.state_entropy));
    println!("ref_entropy    = {}", fmt_float(report.ref_entropy));
    Ok(())
}

#[derive(Args)]
struct FigureArgs {
    /// fig2 | fig3 | fig4 | fig5 | fig6
    #[arg(long)]
    id: String,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn cmd_figure(args: FigureArgs) -> Result<(), CliError> {
    let id = FigureId::parse(&args.id).map_err(CliError::Core)?;
    let files = reproduce_figure(id).map_err(CliError::Core)?;
    for file in &files {
        let path = args.out.join(&file.name);
        write_atomic(&path, &file.content).map_err(CliError::Core)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct Table1Args {
    /// Write the comparison table CSV here as well
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_table1(args: Table1Args) -> Result<(), CliError> {
    let rows = reproduce_table1().map_err(CliError::Core)?;
    println!(
        "{:<16} {:>12} {:>12} {:>10} {:>10} {:>8}  flag",
        "case", "alpha_ours", "alpha_paper", "beta_ours", "beta_paper", "n_ours"
    );
    for r in &rows {
        println!(
            "{:<16} {:>12.6} {:>12.2} {:>10.4} {:>10.2} {:>8.3}  {}",
            r.case_name,
            r.alpha_ours,
            r.alpha_paper,
            r.beta_ours,
            r.beta_paper,
            r.exponent_ours,
            if r.alpha_within_5pct { "ok" } else { "MISMATCH" }
        );
    }
    for r in &rows {
        if !r.alpha_within_5pct {
            println!("note: {}", r.note);
        }
    }
    if let Some(out) = args.out {
        write_atomic(&out, &table1_csv(&rows)).map_err(CliError::Core)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(Args)]
struct OracleArgs {
    /// probe-cov | coherence
    #[arg(long, value_enum)]
    check: CheckArg,
    /// Kernel grid points (power of two >= 1024)
    #[arg(long = "grid-n", default_value_t = 2048)]
    grid_n: usize,
    /// Fock-space cutoff for the coherence oracle
    #[arg(long, default_value_t = 200)]
    cutoff: usize,
    /// Write the diagnostic CSV here as well
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    probe: ProbeArgs,
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let probe = resolve_probe(&args.probe, &ConfigFile::empty())?;
    let settings = probe.spec.settings.resolve();
    let (nbar, sq, sp) = (probe.spec.nbar, settings.sigma_q, settings.sigma_p);

    match args.check {
        CheckArg::ProbeCov => {
            let report = oracle_probe_cov(nbar, sq, sp, GridParams::with_points(args.grid_n))
                .map_err(CliError::Core)?;
            println!("probe-cov oracle at nbar {}, sigma_q {}, sigma_p {}", fmt_float(nbar), fmt_float(sq), fmt_float(sp));
            println!(
                "  oracle  Sigma = diag({}, {})",
                fmt_float(report.oracle.s11),
                fmt_float(report.oracle.s22)
            );
            println!(
                "  formula Sigma = diag({}, {})",
                fmt_float(report.formula.s11),
                fmt_float(report.formula.s22)
            );
            println!(
                "  difference    = ({}, {})",
                fmt_float(report.diff_s11),
                fmt_float(report.diff_s22)
            );
            println!("  trace_error   = {}", fmt_float(report.trace_error));
            println!("  diverged      = {}", report.diverged);
            println!("  note: {}", report.note);
            if let Some(out) = args.out {
                let mut doc = gqmet::experiments::CsvDoc::new();
                doc.provenance("check", "probe-cov")
                    .provenance_f64("nbar", nbar)
                    .provenance_f64("sigma_q", sq)
                    .provenance_f64("sigma_p", sp)
                    .provenance("grid_n", args.grid_n.to_string())
                    .provenance("note", report.note.replace(',', ";"));
                doc.header(["quantity", "oracle", "formula", "difference"]);
                doc.row([
                    "sigma11".to_string(),
                    fmt_float(report.oracle.s11),
                    fmt_float(report.formula.s11),
                    fmt_float(report.diff_s11),
                ]);
                doc.row([
                    "sigma22".to_string(),
                    fmt_float(report.oracle.s22),
                    fmt_float(report.formula.s22),
                    fmt_float(report.diff_s22),
                ]);
                doc.row([
                    "trace_error".to_string(),
                    fmt_float(report.trace_error),
                    "0".to_string(),
                    fmt_float(report.trace_error),
                ]);
                write_atomic(&out, &doc.render()).map_err(CliError::Core)?;
                println!("wrote {}", out.display());
            }
        }
        CheckArg::Coherence => {
            require_physical_probe(&probe.spec)?;
            let c = 2.0 * nbar + 1.0;
            let state = GaussianState::new(
                QuadratureVector::zero(),
                CovarianceMatrix::diagonal(c / (sp * sp), c / (sq * sq)),
            );
            let closed = coherence(&state).map_err(CliError::Core)?;
            let fock = fock_coherence(&state, args.cutoff).map_err(CliError::Core)?;
            println!("coherence oracle at nbar {}, sigma_q {}, sigma_p {}", fmt_float(nbar), fmt_float(sq), fmt_float(sp));
            println!("  closed form       = {}", fmt_float(closed.coherence));
            println!("  fock thermal-ref  = {}", fmt_float(fock.coherence_thermal_ref));
            println!(
                "  difference        = {}",
                fmt_float(closed.coherence - fock.coherence_thermal_ref)
            );
            println!("  fock dephased-ref = {}", fmt_float(fock.coherence_dephased));
            println!("  trace_deficit     = {}", fmt_float(fock.trace_deficit));
            if let Some(out) = args.out {
                let mut doc = gqmet::experiments::CsvDoc::new();
                doc.provenance("check", "coherence")
                    .provenance_f64("nbar", nbar)
                    .provenance_f64("sigma_q", sq)
                    .provenance_f64("sigma_p", sp)
                    .provenance("cutoff", args.cutoff.to_string());
                doc.header(["quantity", "closed", "fock", "difference"]);
                doc.row([
                    "coherence_thermal_ref".to_string(),
                    fmt_float(closed.coherence),
                    fmt_float(fock.coherence_thermal_ref),
                    fmt_float(closed.coherence - fock.coherence_thermal_ref),
                ]);
                doc.row([
                    "state_entropy".to_string(),
                    fmt_float(closed.state_entropy),
                    fmt_float(fock.state_entropy),
                    fmt_float(closed.state_entropy - fock.state_entropy),
                ]);
                doc.row([
                    "coherence_dephased".to_string(),
                    "nan".to_string(),
                    fmt_float(fock.coherence_dephased),
                    "nan".to_string(),
                ]);
                write_atomic(&out, &doc.render()).map_err(CliError::Core)?;
                println!("wrote {}", out.display());
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header row; `#` comment lines are skipped
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "x-col", default_value = "epsilon")]
    x_col: String,
    #[arg(long = "y-col", default_value = "qfi")]
    y_col: String,
    #[arg(long, value_enum, default_value = "free")]
    mode: ModeArg,
    /// Exponent used with --mode fixed
    #[arg(long, default_value_t = 3.0)]
    n: f64,
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage("input has no header row".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let xi = columns
        .iter()
        .position(|c| *c == args.x_col)
        .ok_or_else(|| CliError::Usage(format!("no column '{}' in {header}", args.x_col)))?;
    let yi = columns
        .iter()
        .position(|c| *c == args.y_col)
        .ok_or_else(|| CliError::Usage(format!("no column '{}' in {header}", args.y_col)))?;
    let mut points = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64, CliError> {
            cells
                .get(i)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("bad numeric cell in line '{line}'")))
        };
        points.push((parse(xi)?, parse(yi)?));
    }
    let mode = match args.mode {
        ModeArg::Free => FitMode::FreeExponent,
        ModeArg::Fixed => FitMode::FixedExponent(args.n),
    };
    let fit = fit_power_law(&points, mode).map_err(CliError::Core)?;
    println!("model        = alpha + beta * eps^n");
    println!("alpha        = {}", fmt_float(fit.alpha));
    println!("beta         = {}", fmt_float(fit.beta));
    println!("n            = {}", fmt_float(fit.exponent));
    println!("rms_residual = {}", fmt_float(fit.rms_residual));
    println!("grid         = {}", fit.grid_used);
    println!("excluded     = {}", fit.excluded);
    Ok(())
}

enum CliError {
    Usage(String),
    Core(gqmet::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                gqmet::Error::Domain(_) | gqmet::Error::Malformed(_) => 1,
                gqmet::Error::UnphysicalState(_) => 2,
                _ => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("GQMET_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: GQMET_THREADS must be a positive integer, got '{raw}'");
                return ExitCode::from(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let result = match cli.command {
        Command::Qfi(args) => cmd_qfi(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Coherence(args) => cmd_coherence(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Fit(args) => cmd_fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

#[allow(dead_code)]
fn _assert_command_builds() {
    Cli::command().debug_assert();
}
