use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gallager_mimo::{exponent, mc, rmt, saddle, ChannelParams, Mode};

#[derive(Parser)]
#[command(name = "gallager-mimo", version, about = "Large-system error exponents for MIMO block-fading channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the error exponent E(r) over a rate grid
    Exponent(ExponentArgs),
    /// Dispersion quantities: ergodic rate, v_inf, delta_v, v_alpha, theta bounds
    Dispersion(DispersionArgs),
    /// Tilted eigenvalue density p*(x) at a fixed rho
    Density(DensityArgs),
    /// Finite-N Monte Carlo estimate of E(r)
    Mc(McArgs),
    /// Reproduce the reference figure data as CSV files
    Figures(FiguresArgs),
}

#[derive(Args)]
struct ChannelArgs {
    /// Antenna ratio K/N (>= 1)
    #[arg(long)]
    beta: f64,
    /// SNR in dB (sigma^2 = 10^(-snr_db/10)); conflicts with --sigma2
    #[arg(long, conflicts_with = "sigma2")]
    snr_db: Option<f64>,
    /// Noise variance sigma^2
    #[arg(long)]
    sigma2: Option<f64>,
    /// Blocklength ratio T Q / N
    #[arg(long)]
    alpha: f64,
    /// Number of fading blocks; "inf" selects the fast-fading limit
    #[arg(long, default_value = "1")]
    q: String,
}

impl ChannelArgs {
    fn resolve(&self) -> Result<(ChannelParams, bool), CliError> {
        let sigma2 = match (self.snr_db, self.sigma2) {
            (Some(db), None) => 10f64.powf(-db / 10.0),
            (None, Some(s2)) => s2,
            (None, None) => return Err(CliError::Usage("one of --snr-db or --sigma2 is required".into())),
            (Some(_), Some(_)) => unreachable!("clap conflict"),
        };
        let (q, q_inf) = match self.q.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => (1, true),
            other => (
                other
                    .parse::<u32>()
                    .map_err(|_| CliError::Usage(format!("invalid --q value {other:?}")))?,
                false,
            ),
        };
        let params = ChannelParams::new(self.beta, sigma2, self.alpha, q)?;
        Ok((params, q_inf))
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    /// Rates in nats per receive antenna
    Nats,
    /// Rates in bits per receive antenna
    Bits,
}

impl Units {
    fn rate_scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }
}

#[derive(Args)]
struct ExponentArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Ensemble / bound variant
    #[arg(long, value_enum, default_value_t = ModeArg::PeakPower)]
    mode: ModeArg,
    /// Rate grid as "min:max:count" or a comma-separated list, in the
    /// selected units; default is 60 points from 0.2 to 1.02 r_erg
    #[arg(long)]
    r_grid: Option<String>,
    /// Units of the rate column (the exponent itself is unitless)
    #[arg(long, value_enum, default_value_t = Units::Nats)]
    units: Units,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    PeakPower,
    AveragePower,
    SpherePacking,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::PeakPower => Mode::PeakPower,
            ModeArg::AveragePower => Mode::AveragePower,
            ModeArg::SpherePacking => Mode::SpherePacking,
        }
    }
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::PeakPower)]
    mode: ModeArg,
    /// Tilt parameter
    #[arg(long)]
    rho: f64,
    /// Number of grid points across the support
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Rate in nats per receive antenna
    #[arg(long)]
    r: f64,
    /// Number of receive antennas
    #[arg(long)]
    n: usize,
    /// Number of channel draws
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory for the generated CSV files
    #[arg(long, default_value = "figures")]
    output_dir: PathBuf,
}

enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<gallager_mimo::Error> for CliError {
    fn from(e: gallager_mimo::Error) -> Self {
        match e {
            gallager_mimo::Error::InvalidParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io error: {e}"))
    }
}

fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn emit(out: &OutputArgs, text: String) -> Result<(), CliError> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_grid(spec: Option<&str>, scale: f64, params: &ChannelParams) -> Result<Vec<f64>, CliError> {
    match spec {
        None => {
            let r_erg = rmt::ergodic_rate(params);
            let (lo, hi, count) = (0.2, 1.02 * r_erg, 60usize);
            Ok((0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect())
        }
        Some(s) if s.contains(':') => {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::Usage(format!("bad --r-grid {s:?}, expected min:max:count")));
            }
            let lo: f64 = parts[0].parse().map_err(|_| CliError::Usage(format!("bad grid min {:?}", parts[0])))?;
            let hi: f64 = parts[1].parse().map_err(|_| CliError::Usage(format!("bad grid max {:?}", parts[1])))?;
            let count: usize = parts[2].parse().map_err(|_| CliError::Usage(format!("bad grid count {:?}", parts[2])))?;
            if count < 2 || !(hi > lo) {
                return Err(CliError::Usage("grid needs max > min and count >= 2".into()));
            }
            Ok((0..count)
                .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64) / scale)
                .collect())
        }
        Some(s) => {
            let vals: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|_| CliError::Usage(format!("bad --r-grid {s:?}")))?;
            Ok(vals.into_iter().map(|r| r / scale).collect())
        }
    }
}

fn run_exponent(args: &ExponentArgs) -> Result<(), CliError> {
    let (params, q_inf) = args.channel.resolve()?;
    let scale = args.units.rate_scale();
    let grid = parse_grid(args.r_grid.as_deref(), scale, &params)?;
    let mode = args.mode.into();
    let table = if q_inf {
        exponent::sweep_q_infinity(&grid, &params, mode)?
    } else {
        exponent::sweep(&grid, &params, mode)?
    };
    if table.rows.iter().all(|row| row.point.is_none()) {
        let msg = table.rows[0].error.clone().unwrap_or_default();
        return Err(CliError::Numeric(format!("every grid point failed; first error: {msg}")));
    }
    let text = match args.out.format {
        Format::Json => {
            let mut v = serde_json::to_value(&table).expect("serializable");
            if scale != 1.0 {
                for row in v["rows"].as_array_mut().unwrap() {
                    row["r"] = (row["r"].as_f64().unwrap() * scale).into();
                    if let Some(p) = row["point"].as_object_mut() {
                        let r = p["r"].as_f64().unwrap() * scale;
                        p.insert("r".into(), r.into());
                    }
                }
            }
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("r,e,rho,s,a,b,regime,status\n");
            for row in &table.rows {
                match (&row.point, &row.error) {
                    (Some(p), _) => {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},ok",
                            sig(p.r * scale),
                            sig(p.e),
                            sig(p.rho),
                            sig(p.s),
                            sig(p.a),
                            sig(p.b),
                            p.regime
                        );
                    }
                    (None, err) => {
                        let msg = err.as_deref().unwrap_or("failed").replace(',', ";");
                        let _ = writeln!(s, "{},,,,,,,failed: {}", sig(row.r * scale), msg);
                    }
                }
            }
            s
        }
    };
    emit(&args.out, text)
}

fn run_dispersion(args: &DispersionArgs) -> Result<(), CliError> {
    let (params, _) = args.channel.resolve()?;
    let (theta_minus, theta_plus) = rmt::theta_bounds(&params);
    let sup = rmt::mp_support(&params);
    let fields: [(&str, f64); 9] = [
        ("r_erg", rmt::ergodic_rate(&params)),
        ("v_inf", rmt::dispersion_vinf(&params)),
        ("delta_v", rmt::delta_v(&params)),
        ("v_alpha", exponent::v_alpha(&params)),
        ("g0", rmt::g0(&params)),
        ("theta_minus", theta_minus),
        ("theta_plus", theta_plus),
        ("a0", sup.a0),
        ("b0", sup.b0),
    ];
    let text = match args.out.format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = fields
                .iter()
                .map(|(k, v)| (k.to_string(), (*v).into()))
                .collect();
            let mut s = serde_json::to_string_pretty(&map).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            for (k, v) in fields {
                let _ = writeln!(s, "{k},{}", sig(v));
            }
            s
        }
    };
    emit(&args.out, text)
}

fn run_density(args: &DensityArgs) -> Result<(), CliError> {
    let (params, q_inf) = args.channel.resolve()?;
    if q_inf {
        return Err(CliError::Usage("--q inf is not supported for density".into()));
    }
    if args.points < 2 {
        return Err(CliError::Usage("need --points >= 2".into()));
    }
    let sol = saddle::solve_saddle(args.rho, &params, args.mode.into())?;
    let rows: Vec<(f64, f64)> = (0..args.points)
        .map(|i| {
            let x = sol.a + (sol.b - sol.a) * i as f64 / (args.points - 1) as f64;
            (x, saddle::pstar_density(x, &sol, &params))
        })
        .collect();
    let text = match args.out.format {
        Format::Json => {
            let v = serde_json::json!({
                "params": params,
                "rho": sol.rho,
                "s": sol.s,
                "a": sol.a,
                "b": sol.b,
                "density": rows.iter().map(|(x, p)| serde_json::json!({"x": x, "p": p})).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("x,p\n");
            for (x, p) in rows {
                let _ = writeln!(s, "{},{}", sig(x), sig(p));
            }
            s
        }
    };
    emit(&args.out, text)
}

fn run_mc(args: &McArgs) -> Result<(), CliError> {
    let (params, q_inf) = args.channel.resolve()?;
    if q_inf {
        return Err(CliError::Usage("--q inf is not supported for mc".into()));
    }
    let cfg = mc::McConfig {
        n: args.n,
        samples: args.samples,
        seed: args.seed,
    };
    let est = mc::estimate_en(args.r, &params, &cfg)?;
    if est.ess < 100.0 {
        eprintln!(
            "warning: effective sample size {:.1} < 100; the annealed average is dominated by few draws",
            est.ess
        );
    }
    let asymptotic = exponent::gallager_exponent(args.r, &params, Mode::PeakPower)?.e;
    let text = match args.out.format {
        Format::Json => {
            let v = serde_json::json!({
                "params": params,
                "estimate": est,
                "seed": args.seed,
                "asymptotic_e": asymptotic,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("r,n,samples,e_hat,stderr,ess,asymptotic_e\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                sig(est.r),
                est.n,
                est.samples,
                sig(est.e_hat),
                sig(est.stderr),
                sig(est.ess),
                sig(asymptotic)
            );
            s
        }
    };
    emit(&args.out, text)
}

fn run_figures(args: &FiguresArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.output_dir)?;
    let sigma2 = 0.05; // linear SNR = 20
    let grid_for = |p: &ChannelParams| -> Vec<f64> {
        let r_erg = rmt::ergodic_rate(p);
        (0..60)
            .map(|i| 0.2 + (1.02 * r_erg - 0.2) * i as f64 / 59.0)
            .collect()
    };

    // exponent vs rate across blocklength ratios
    let mut s = String::from("alpha,r,e,rho,regime\n");
    for alpha in [2.0, 5.0, 20.0] {
        let p = ChannelParams::new(3.0, sigma2, alpha, 1)?;
        let table = exponent::sweep(&grid_for(&p), &p, Mode::PeakPower)?;
        for row in table.rows.iter().filter_map(|r| r.point.as_ref()) {
            let _ = writeln!(s, "{},{},{},{},{}", alpha, sig(row.r), sig(row.e), sig(row.rho), row.regime);
        }
    }
    std::fs::write(args.output_dir.join("exponent_vs_alpha.csv"), s)?;

    // convergence in the number of fading blocks toward the fast-fading limit
    let p = ChannelParams::new(3.0, sigma2, 20.0, 1)?;
    let grid = grid_for(&p);
    let mut s = String::from("q,r,e\n");
    for q in [1u32, 4, 16, 64] {
        let pq = ChannelParams::new(3.0, sigma2, 20.0, q)?;
        let table = exponent::sweep(&grid, &pq, Mode::PeakPower)?;
        for row in table.rows.iter().filter_map(|r| r.point.as_ref()) {
            let _ = writeln!(s, "{q},{},{}", sig(row.r), sig(row.e));
        }
    }
    let table = exponent::sweep_q_infinity(&grid, &p, Mode::PeakPower)?;
    for row in table.rows.iter().filter_map(|r| r.point.as_ref()) {
        let _ = writeln!(s, "inf,{},{}", sig(row.r), sig(row.e));
    }
    std::fs::write(args.output_dir.join("exponent_vs_q.csv"), s)?;

    // random-coding vs sphere-packing
    let p = ChannelParams::new(3.0, sigma2, 2.0, 1)?;
    let grid = grid_for(&p);
    let mut s = String::from("bound,r,e\n");
    for (label, mode) in [("random-coding", Mode::PeakPower), ("sphere-packing", Mode::SpherePacking)] {
        let table = exponent::sweep(&grid, &p, mode)?;
        for row in table.rows.iter().filter_map(|r| r.point.as_ref()) {
            let _ = writeln!(s, "{label},{},{}", sig(row.r), sig(row.e));
        }
    }
    std::fs::write(args.output_dir.join("bounds.csv"), s)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success, real parse errors are usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::Exponent(args) => run_exponent(args),
        Cmd::Dispersion(args) => run_dispersion(args),
        Cmd::Density(args) => run_density(args),
        Cmd::Mc(args) => run_mc(args),
        Cmd::Figures(args) => run_figures(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
