use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tmsv_sync::config::{FileConfig, PolicyName};
use tmsv_sync::emit::{self, Format, SvgOptions};
use tmsv_sync::sensing::{
    delta_u_smsv_real, delta_u_sql, delta_u_tmsv_ideal, delta_u_tmsv_real, omega_from_wavelength,
    quantum_advantage, relative_advantage, ChannelPair, SensingConfig,
};
use tmsv_sync::sweep::{
    presets, run_compare_smsv, run_grid, run_sweep, GridQuantity, GridSpec, Range, SweepResult,
    SweepScheme, SweepSpec, SweepVariable,
};
use tmsv_sync::temporal::{mode_functions, residual_slope, shift_expansion_check, timing_params, SpectralProfile};
use tmsv_sync::verify::{run_verify, VerifyGrid};
use tmsv_sync::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "tmsv-sync", version, about = "Offset sensitivity of squeezed-light clock synchronization over lossy links")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Squeezing level in dB.
    #[arg(long, global = true, allow_negative_numbers = true)]
    r_db: Option<f64>,
    /// Total source photons.
    #[arg(long, global = true)]
    n_in: Option<f64>,
    /// Local-oscillator photons per detector.
    #[arg(long, global = true)]
    n_lo: Option<f64>,
    /// Carrier wavelength in nm.
    #[arg(long, global = true)]
    lambda0_nm: Option<f64>,
    /// Frequency spread in rad/s.
    #[arg(long, global = true)]
    delta_omega: Option<f64>,
    /// Transmissivity of both paths.
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    eta1: Option<f64>,
    #[arg(long, global = true)]
    eta2: Option<f64>,
    /// Fraction of photons sent along path 1.
    #[arg(long, global = true)]
    split: Option<f64>,
    /// Signal-to-noise ratio defining a measurable offset [default: 1].
    #[arg(long, global = true)]
    snr: Option<f64>,
    #[arg(long, global = true, value_enum)]
    policy: Option<PolicyArg>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Shared,
    Independent,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarArg {
    Eta,
    Eta1,
    Eta2,
    RDb,
    NIn,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Tmsv,
    Sql,
    Smsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    DeltaU,
    Advantage,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every scheme at a single operating point.
    DeltaU,
    /// One-dimensional sweep.
    Sweep {
        #[arg(long, value_enum)]
        var: Option<VarArg>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        /// Logarithmic spacing.
        #[arg(long)]
        log: bool,
        #[arg(long, value_enum, value_delimiter = ',')]
        schemes: Vec<SchemeArg>,
        /// Squeezing levels in dB for the squeezed-light columns.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
    },
    /// Two-dimensional surface over (eta1, eta2).
    Grid {
        #[arg(long, value_enum, default_value_t = QuantityArg::Advantage)]
        quantity: QuantityArg,
        /// Iso-levels drawn in SVG output, seconds.
        #[arg(long, value_delimiter = ',')]
        contours: Vec<f64>,
    },
    /// Symmetric-loss comparison of the two-mode and single-mode schemes.
    Compare,
    /// Cross-check the closed forms against the Gaussian-state oracle.
    Verify {
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Number of transmissivities on [0.1, 1] instead of the default set.
        #[arg(long)]
        density: Option<usize>,
    },
    /// Temporal-mode diagnostics.
    TmCheck {
        /// Carrier frequency of the numerical check, natural units.
        #[arg(long, default_value_t = 10.0)]
        tm_omega0: f64,
        #[arg(long, default_value_t = 1.0)]
        tm_delta_omega: f64,
    },
    /// Offset vs symmetric transmissivity at 3, 7, 11 and 15 dB.
    Fig2,
    /// Advantage surface at 5 dB.
    Fig3,
    /// Two-mode vs single-mode offsets at 5 dB.
    Fig4,
}

enum Failure {
    Error(Error),
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

struct Context {
    file: FileConfig,
    sensing: SensingConfig,
    channel: ChannelPair,
    format: Format,
    out: Option<PathBuf>,
    steps: Option<usize>,
}

impl Context {
    fn new(common: &Common) -> Result<Self, Error> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut sensing = SensingConfig::default();
        file.apply_sensing(&mut sensing);
        apply_sensing_flags(common, &mut sensing);
        let mut channel = ChannelPair::lossless();
        file.apply_channel(&mut channel)?;
        if let Some(e) = common.eta {
            channel.eta1 = e;
            channel.eta2 = e;
        }
        if let Some(e) = common.eta1 {
            channel.eta1 = e;
        }
        if let Some(e) = common.eta2 {
            channel.eta2 = e;
        }
        if let Some(p) = common.policy {
            channel.policy = match p {
                PolicyArg::Shared => PolicyName::Shared,
                PolicyArg::Independent => PolicyName::Independent,
            }
            .policy();
        }
        let format = match common.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Svg => Format::Svg,
        };
        Ok(Self {
            steps: common.steps.or(file.sweep.steps),
            file,
            sensing,
            channel,
            format,
            out: common.out.clone(),
        })
    }

    fn steps(&self) -> usize {
        self.steps.unwrap_or(presets::DEFAULT_STEPS)
    }

    /// Preset sensing parameters: the link defaults at `r_db`, unless the
    /// squeezing was set explicitly.
    fn preset_sensing(&self, common: &Common, r_db: f64) -> SensingConfig {
        let mut s = SensingConfig::default().with_r_db(r_db);
        self.file.apply_sensing(&mut s);
        apply_sensing_flags(common, &mut s);
        s
    }

    fn write_text(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            }),
            None => {
                let mut stdout = std::io::stdout().lock();
                match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source: e,
                    }),
                    _ => Ok(()),
                }
            }
        }
    }

    fn output(&self, result: &SweepResult, options: &SvgOptions) -> Result<(), Error> {
        match &self.out {
            Some(path) => emit::emit(result, self.format, path, options),
            None => self.write_text(&emit::render(result, self.format, options)?),
        }
    }

    fn serialized<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<(), Error> {
        match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(value).expect("report serializes");
                s.push('\n');
                self.write_text(&s)
            }
            Format::Csv => self.write_text(&text()),
            Format::Svg => Err(Error::InvalidParameter {
                name: "format",
                reason: "svg is only available for sweeps and grids".into(),
            }),
        }
    }
}

fn apply_sensing_flags(common: &Common, s: &mut SensingConfig) {
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut s.r_db, common.r_db);
    set(&mut s.n_in, common.n_in);
    set(&mut s.n_lo, common.n_lo);
    set(&mut s.omega0, common.lambda0_nm.map(|nm| omega_from_wavelength(nm * 1e-9)));
    set(&mut s.delta_omega, common.delta_omega);
    set(&mut s.split, common.split);
    set(&mut s.snr, common.snr);
}

fn single_point(ctx: &Context) -> Result<SweepResult, Error> {
    let (cfg, ch) = (&ctx.sensing, &ctx.channel);
    let row = vec![
        ch.eta1,
        ch.eta2,
        cfg.r_db,
        delta_u_tmsv_ideal(cfg)?.delta_u,
        delta_u_tmsv_real(cfg, ch)?.delta_u,
        delta_u_smsv_real(cfg, ch.eta1)?.delta_u,
        delta_u_sql(cfg, ch)?.delta_u,
        quantum_advantage(cfg, ch)?,
        relative_advantage(cfg, ch)?,
    ];
    let columns = [
        "eta1",
        "eta2",
        "r_db",
        "du_tmsv_ideal",
        "du_tmsv",
        "du_smsv",
        "du_sql",
        "advantage",
        "relative_advantage",
    ];
    Ok(SweepResult {
        title: "minimum measurable offset".into(),
        columns: columns.map(String::from).to_vec(),
        rows: vec![row],
        shape: None,
        config: serde_json::json!({ "sensing": cfg, "channel": ch }),
    })
}

fn sweep_spec(
    ctx: &Context,
    var: Option<VarArg>,
    start: Option<f64>,
    stop: Option<f64>,
    log: bool,
    schemes: &[SchemeArg],
    levels: &[f64],
) -> SweepSpec {
    let file = &ctx.file.sweep;
    let variable = match var {
        Some(VarArg::Eta) => SweepVariable::EtaSymmetric,
        Some(VarArg::Eta1) => SweepVariable::Eta1,
        Some(VarArg::Eta2) => SweepVariable::Eta2,
        Some(VarArg::RDb) => SweepVariable::RDb,
        Some(VarArg::NIn) => SweepVariable::NIn,
        None => file.variable.unwrap_or(SweepVariable::EtaSymmetric),
    };
    let (default_start, default_stop) = match variable {
        SweepVariable::RDb => (0.0, 15.0),
        SweepVariable::NIn => (1e2, 1e6),
        _ => (presets::ETA_MIN, 1.0),
    };
    let schemes = if schemes.is_empty() {
        file.schemes.clone().unwrap_or_else(|| vec![SweepScheme::Sql, SweepScheme::Tmsv])
    } else {
        schemes
            .iter()
            .map(|s| match s {
                SchemeArg::Tmsv => SweepScheme::Tmsv,
                SchemeArg::Sql => SweepScheme::Sql,
                SchemeArg::Smsv => SweepScheme::Smsv,
            })
            .collect()
    };
    SweepSpec {
        variable,
        range: Range {
            start: start.or(file.start).unwrap_or(default_start),
            stop: stop.or(file.stop).unwrap_or(default_stop),
            steps: ctx.steps(),
            log: log || file.log.unwrap_or(false),
        },
        sensing: ctx.sensing,
        channel: ctx.channel,
        schemes,
        levels_db: if levels.is_empty() {
            file.levels_db.clone().unwrap_or_default()
        } else {
            levels.to_vec()
        },
    }
}

#[derive(Serialize)]
struct ModeCheck {
    omega0: f64,
    delta_omega: f64,
    u0: f64,
    big_omega: f64,
    norm_y0: f64,
    norm_y1: f64,
    norm_z1: f64,
    overlap_y0_y1: f64,
    overlap_y0_z1: f64,
    expected_overlap_y0_z1: f64,
    max_orthonormality_error: f64,
    residuals: Vec<(f64, f64)>,
    residual_slope: f64,
    link_u0: f64,
    link_big_omega: f64,
    link_monochromatic_error: f64,
    passed: bool,
}

impl ModeCheck {
    const TOLERANCE: f64 = 1e-8;
    const SLOPE_TOLERANCE: f64 = 0.1;

    fn run(omega0: f64, delta_omega: f64, link: &SensingConfig) -> Result<Self, Error> {
        let profile = SpectralProfile::gaussian(omega0, delta_omega)?;
        let params = timing_params(&profile)?;
        let modes = mode_functions(&profile)?;
        let (n0, n1, nz) = (modes.y0.norm(), modes.y1.norm(), modes.z1.norm());
        let o01 = modes.y0.inner(&modes.y1).norm();
        let o0z = modes.y0.inner(&modes.z1).norm();
        let expected = params.timing_overlap();
        let max_err = [(n0 - 1.0).abs(), (n1 - 1.0).abs(), (nz - 1.0).abs(), o01, (o0z - expected).abs()]
            .into_iter()
            .fold(0.0, f64::max);
        let residuals = [1e-4, 1e-3, 1e-2]
            .into_iter()
            .map(|ratio| Ok((ratio, shift_expansion_check(&profile, ratio * params.u0)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let slope = residual_slope(&profile, 1e-4, 1e-2, 9)?;
        let link_params = link.timing()?;
        Ok(Self {
            omega0,
            delta_omega,
            u0: params.u0,
            big_omega: params.big_omega,
            norm_y0: n0,
            norm_y1: n1,
            norm_z1: nz,
            overlap_y0_y1: o01,
            overlap_y0_z1: o0z,
            expected_overlap_y0_z1: expected,
            max_orthonormality_error: max_err,
            residuals,
            residual_slope: slope,
            link_u0: link_params.u0,
            link_big_omega: link_params.big_omega,
            link_monochromatic_error: link_params.monochromatic_error(),
            passed: max_err < Self::TOLERANCE && (slope - 2.0).abs() <= Self::SLOPE_TOLERANCE,
        })
    }

    fn text(&self) -> String {
        let mut s = format!(
            "profile omega0={} delta_omega={} u0={:.9e} Omega={:.9e}\n\
             norms y0={:.12} y1={:.12} z1={:.12}\n\
             overlaps |<y0|y1>|={:.3e} |<y0|z1>|={:.12} expected={:.12}\n\
             max orthonormality error {:.3e} (tolerance {:.0e})\n",
            self.omega0,
            self.delta_omega,
            self.u0,
            self.big_omega,
            self.norm_y0,
            self.norm_y1,
            self.norm_z1,
            self.overlap_y0_y1,
            self.overlap_y0_z1,
            self.expected_overlap_y0_z1,
            self.max_orthonormality_error,
            Self::TOLERANCE,
        );
        for (ratio, res) in &self.residuals {
            s.push_str(&format!("shift du/u0={ratio:.0e} residual={res:.6e}\n"));
        }
        s.push_str(&format!(
            "residual log-log slope {:.4} (expected 2 +/- {})\n\
             link u0={:.9e} s Omega={:.9e} monochromatic error={:.3e}\n\
             => {}\n",
            self.residual_slope,
            Self::SLOPE_TOLERANCE,
            self.link_u0,
            self.link_big_omega,
            self.link_monochromatic_error,
            if self.passed { "PASS" } else { "FAIL" },
        ));
        s
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let ctx = Context::new(common)?;
    let no_contours = SvgOptions::default();
    match cli.command {
        Command::DeltaU => {
            ctx.sensing.validate()?;
            ctx.channel.validate()?;
            ctx.output(&single_point(&ctx)?, &no_contours)?;
        }
        Command::Sweep {
            var,
            start,
            stop,
            log,
            schemes,
            levels,
        } => {
            let spec = sweep_spec(&ctx, var, start, stop, log, &schemes, &levels);
            ctx.output(&run_sweep(&spec)?, &no_contours)?;
        }
        Command::Grid { quantity, contours } => {
            let spec = GridSpec {
                eta1: Range::linear(presets::ETA_MIN, 1.0, ctx.steps()),
                eta2: Range::linear(presets::ETA_MIN, 1.0, ctx.steps()),
                sensing: ctx.sensing,
                policy: ctx.channel.policy,
                quantity: match quantity {
                    QuantityArg::DeltaU => GridQuantity::DeltaU,
                    QuantityArg::Advantage => GridQuantity::Advantage,
                },
            };
            ctx.output(&run_grid(&spec)?, &SvgOptions { contour_levels: contours })?;
        }
        Command::Compare => {
            let spec = SweepSpec {
                channel: ctx.channel,
                ..presets::fig4(ctx.sensing, ctx.steps())
            };
            ctx.output(&run_compare_smsv(&spec)?, &no_contours)?;
        }
        Command::Verify { tolerance, density } => {
            let grid = match density {
                Some(n) => VerifyGrid::with_density(n)?,
                None => VerifyGrid::default(),
            };
            let report = run_verify(&grid, tolerance, ctx.channel.policy)?;
            ctx.serialized(&report, || report.to_string())?;
            if !report.passed {
                return Err(Failure::CheckFailed);
            }
        }
        Command::TmCheck {
            tm_omega0,
            tm_delta_omega,
        } => {
            ctx.sensing.validate()?;
            let check = ModeCheck::run(tm_omega0, tm_delta_omega, &ctx.sensing)?;
            ctx.serialized(&check, || check.text())?;
            if !check.passed {
                return Err(Failure::CheckFailed);
            }
        }
        Command::Fig2 => {
            let spec = presets::fig2(ctx.preset_sensing(common, 0.0), ctx.steps());
            ctx.output(&run_sweep(&spec)?, &no_contours)?;
        }
        Command::Fig3 => {
            let spec = presets::fig3(ctx.preset_sensing(common, presets::FIG3_R_DB), ctx.steps());
            let options = SvgOptions {
                contour_levels: presets::FIG3_CONTOURS.to_vec(),
            };
            ctx.output(&run_grid(&spec)?, &options)?;
        }
        Command::Fig4 => {
            let spec = presets::fig4(ctx.preset_sensing(common, presets::FIG4_R_DB), ctx.steps());
            ctx.output(&run_compare_smsv(&spec)?, &no_contours)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::CheckFailed) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_VALIDATION,
            })
        }
    }
}
