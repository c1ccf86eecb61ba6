use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use resolvent_wkb::cli::{self, RawConfig, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "rwkb", version, about = "Resolvent-norm asymptotics versus brute-force numerics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form asymptotic estimates.
    Asym(Opts),
    /// Discretized resolvent norms.
    Numeric(Opts),
    /// Numeric norms joined with estimates and `rel_log_err`.
    Compare(Opts),
    /// Level curves of the resolvent norm, numeric and asymptotic.
    Trace(Opts),
    /// WKB quasimode profiles and residuals.
    Quasimode(Opts),
    /// Davies-Kuijlaars growth rates.
    Dk(Opts),
}

/// Ranges are `v`, `a,b,c`, `start:stop:count` or `start:stop:countL`.
#[derive(Args, Debug)]
struct Opts {
    /// TOML file with the same keys as the flags (underscored); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    example: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    re_z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    im_z: Option<String>,
    /// Ratio Im z / Re z (harmonic) or Re z / Im z (cubic).
    #[arg(long)]
    y: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    log_eps: Option<String>,
    /// Level-curve search bracket `lo:hi` on the transverse axis.
    #[arg(long)]
    bracket: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    action_tol: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long, short)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Exit 4 when any row falls outside its validity window.
    #[arg(long)]
    strict: bool,
}

fn split(cmd: Cmd) -> (&'static str, Opts) {
    match cmd {
        Cmd::Asym(o) => ("asym", o),
        Cmd::Numeric(o) => ("numeric", o),
        Cmd::Compare(o) => ("compare", o),
        Cmd::Trace(o) => ("trace", o),
        Cmd::Quasimode(o) => ("quasimode", o),
        Cmd::Dk(o) => ("dk", o),
    }
}

fn to_raw(name: &str, o: Opts) -> (Option<PathBuf>, RawConfig) {
    let raw = RawConfig {
        command: Some(name.to_string()),
        example: o.example,
        re_z: o.re_z,
        im_z: o.im_z,
        y: o.y,
        alpha: o.alpha,
        h: o.h,
        theta: o.theta,
        log_eps: o.log_eps,
        bracket: o.bracket,
        n: o.n,
        half_width: o.half_width,
        order: o.order,
        action_tol: o.action_tol,
        c0: o.c0,
        c1: o.c1,
        out: o.out,
        workers: o.workers,
        strict: o.strict.then_some(true),
    };
    (o.config, raw)
}

fn real_main() -> Result<i32, cli::CliError> {
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { cli::EXIT_CONFIG } else { cli::EXIT_OK };
            let _ = e.print();
            return Ok(code);
        }
    };
    let (name, opts) = split(parsed.command);
    let (config_path, flags) = to_raw(name, opts);
    let raw = match config_path {
        Some(p) => flags.over(&RawConfig::from_toml_file(&p)?),
        None => flags,
    };
    let cfg = RunConfig::from_raw(&raw)?;
    let outcome = cli::run(&cfg)?;
    for f in &outcome.failures {
        eprintln!("numeric failure: {f}");
    }
    if outcome.invalid_rows > 0 {
        eprintln!("{} row(s) outside the validity window", outcome.invalid_rows);
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let code = real_main().unwrap_or_else(|e| {
        eprintln!("rwkb: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
