//! psilab: reports on prime-counting variance over short windows, the
//! matching exponential-sum moments, and zero pair correlation.
//!
//! Flags override the optional `key = value` config file, which overrides
//! built-in defaults. Exit codes: 0 success, 1 bad parameters, 2 numeric
//! trouble (including failed verify checks), 3 file and format problems.

mod config;
mod report;
mod run;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use psilab::models::AsymptoticHypothesis;
use psilab::Error;

use config::FileCfg;
use report::Format;
use run::{Axis, FMethodArg, Globals, ModeArg, ScanSpec, VarianceOp};

#[derive(Parser)]
#[command(
    name = "psilab",
    version,
    about = "Prime-counting variance, exponential-sum moments, and zero pair correlation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Plain `key = value` file consulted for any flag not given.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for the sweeps. Reports never depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Report format.
    #[arg(long, global = true, value_enum, value_name = "FMT")]
    format: Option<Format>,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Directory for prime-power tables; PSILAB_CACHE_DIR wins over this.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Relative tail threshold for the smoothed truncation.
    #[arg(long, global = true, value_name = "EPS")]
    tail_eps: Option<f64>,
}

#[derive(Args)]
struct HypArgs {
    /// Envelope exponent a in [0, 1).
    #[arg(long)]
    a: Option<f64>,

    /// Envelope log-power b >= 0.
    #[arg(long)]
    b: Option<f64>,

    /// Main-term constant c.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,

    /// Envelope branch.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sieve the prime-power table up to X and store it in the cache.
    SieveCache {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,
    },

    /// Truncated second moment of the coefficient exponential sum.
    Expsum {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,

        /// Half-width of the frequency window, in (0, 1/2].
        #[arg(long)]
        xi: Option<f64>,

        /// Cross-check the moment by adaptive quadrature.
        #[arg(long)]
        quadrature_check: bool,

        #[command(flatten)]
        hyp: HypArgs,
    },

    /// Variance of the prime-counting error over short windows.
    Variance {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,

        /// Window length, in [1, X].
        #[arg(long)]
        h: Option<f64>,

        /// What to compute.
        #[arg(long, value_enum)]
        op: Option<VarianceOp>,

        #[command(flatten)]
        hyp: HypArgs,
    },

    /// Pair-correlation form factor from a file of zero ordinates.
    Paircorr {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,

        /// Height cutoff; the table must reach it.
        #[arg(long = "T")]
        t: Option<f64>,

        /// One ordinate per line, increasing, all above 14.
        #[arg(long, value_name = "PATH")]
        zeros_file: Option<PathBuf>,

        #[arg(long, value_enum)]
        method: Option<FMethodArg>,

        /// Envelope exponent a in [0, 1).
        #[arg(long)]
        a: Option<f64>,

        /// Envelope log-power b >= 0.
        #[arg(long)]
        b: Option<f64>,
    },

    /// Evaluate main terms, envelopes, and admissible brackets alone.
    Models {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,

        /// Window length for the variance direction.
        #[arg(long)]
        h: Option<f64>,

        /// Half-width for the moment direction.
        #[arg(long)]
        xi: Option<f64>,

        /// Taper width; adds band-limited kernel rows evaluated at --T.
        #[arg(long)]
        eta: Option<f64>,

        /// Argument for the taper rows.
        #[arg(long = "T", allow_hyphen_values = true)]
        t: Option<f64>,

        #[command(flatten)]
        hyp: HypArgs,
    },

    /// Run the cross-validation suite and report pass/fail per check.
    Verify {
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,
    },

    /// Sweep X, h, or xi and emit one report row per point (CSV only).
    Scan {
        #[arg(long, value_enum)]
        axis: Option<Axis>,

        /// Sweep start (inclusive).
        #[arg(long)]
        from: Option<f64>,

        /// Sweep end (inclusive).
        #[arg(long)]
        to: Option<f64>,

        /// Sample count, spaced geometrically.
        #[arg(long)]
        points: Option<usize>,

        /// Fixed X while h or xi sweeps.
        #[arg(long = "X", value_name = "N")]
        x: Option<u64>,

        /// Fixed window length while X sweeps.
        #[arg(long)]
        h: Option<f64>,

        /// Window exponent: h = X^p while X sweeps.
        #[arg(long, value_name = "P", allow_hyphen_values = true)]
        h_exp: Option<f64>,

        /// Fixed half-width while X sweeps.
        #[arg(long)]
        xi: Option<f64>,

        /// Half-width exponent: xi = X^p while X sweeps (p < 0).
        #[arg(long, value_name = "P", allow_hyphen_values = true)]
        xi_exp: Option<f64>,

        #[command(flatten)]
        hyp: HypArgs,
    },
}

fn need<T>(v: Option<T>, key: &str) -> psilab::Result<T> {
    v.ok_or_else(|| {
        Error::Parameter(format!(
            "missing required parameter {key} (flag --{key} or config key {key})"
        ))
    })
}

/// (a, b, c, mode) with the strongest-bound defaults filling the gaps.
fn resolve_hyp(args: &HypArgs, file: &FileCfg) -> psilab::Result<AsymptoticHypothesis> {
    let a = match args.a {
        Some(v) => v,
        None => file.f64("a")?.unwrap_or(0.0),
    };
    let b = match args.b {
        Some(v) => v,
        None => file.f64("b")?.unwrap_or(3.0),
    };
    let c = match args.c {
        Some(v) => v,
        None => file.f64("c")?.unwrap_or(-4.0),
    };
    let mode = match args.mode {
        Some(m) => m,
        None => file.choice("mode")?.unwrap_or(ModeArg::Rh),
    };
    AsymptoticHypothesis::new(a, b, c, mode.into())
}

fn dispatch(cli: Cli) -> psilab::Result<i32> {
    let file = config::load(cli.config.as_deref())?;
    let format = match cli.format {
        Some(f) => f,
        None => file.choice::<Format>("format")?.unwrap_or(Format::Csv),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => file.usize("threads")?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Parameter("threads must be at least 1".to_string()));
        }
        psilab::sum::init_threads(n);
    }
    let tail_eps = match cli.tail_eps {
        Some(e) => e,
        None => file.f64("tail-eps")?.unwrap_or(1e-12),
    };
    let out = cli.out.or_else(|| file.path("out"));
    let cache_dir = std::env::var_os("PSILAB_CACHE_DIR")
        .map(PathBuf::from)
        .or(cli.cache_dir)
        .or_else(|| file.path("cache-dir"))
        .unwrap_or_else(|| PathBuf::from("psilab-cache"));
    let g = Globals {
        format,
        out,
        cache_dir,
        tail_eps,
    };

    let (echo, body, code) = match cli.command {
        Cmd::SieveCache { x } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let (echo, body) = run::sieve_cache(x, &g)?;
            (echo, body, 0)
        }
        Cmd::Expsum {
            x,
            xi,
            quadrature_check,
            hyp,
        } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let xi = need(xi.or(file.f64("xi")?), "xi")?;
            let qc = quadrature_check || file.flag("quadrature-check")?.unwrap_or(false);
            let hyp = resolve_hyp(&hyp, &file)?;
            let (echo, body) = run::expsum(x, xi, &hyp, qc, &g)?;
            (echo, body, 0)
        }
        Cmd::Variance { x, h, op, hyp } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let h = need(h.or(file.f64("h")?), "h")?;
            let op = match op {
                Some(o) => o,
                None => file.choice("op")?.unwrap_or(VarianceOp::Report),
            };
            let hyp = resolve_hyp(&hyp, &file)?;
            let (echo, body) = run::variance(x, h, op, &hyp, &g)?;
            (echo, body, 0)
        }
        Cmd::Paircorr {
            x,
            t,
            zeros_file,
            method,
            a,
            b,
        } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let t = need(t.or(file.f64("T")?), "T")?;
            let zeros = need(
                zeros_file.or_else(|| file.path("zeros-file")),
                "zeros-file",
            )?;
            let method = match method {
                Some(m) => m,
                None => file.choice("method")?.unwrap_or(FMethodArg::Naive),
            };
            let a = match a {
                Some(v) => Some(v),
                None => file.f64("a")?,
            };
            let b = match b {
                Some(v) => Some(v),
                None => file.f64("b")?,
            };
            let (echo, body) = run::paircorr(x, t, &zeros, method, a, b, &g)?;
            (echo, body, 0)
        }
        Cmd::Models {
            x,
            h,
            xi,
            eta,
            t,
            hyp,
        } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let h = match h {
                Some(v) => Some(v),
                None => file.f64("h")?,
            };
            let xi = match xi {
                Some(v) => Some(v),
                None => file.f64("xi")?,
            };
            let eta = match eta {
                Some(v) => Some(v),
                None => file.f64("eta")?,
            };
            let t = match t {
                Some(v) => Some(v),
                None => file.f64("T")?,
            };
            let hyp = resolve_hyp(&hyp, &file)?;
            let (echo, body) = run::models(x, h, xi, eta, t, &hyp, &g)?;
            (echo, body, 0)
        }
        Cmd::Verify { x } => {
            let x = need(x.or(file.u64("X")?), "X")?;
            let (echo, body, all_passed) = run::verify(x, &g)?;
            (echo, body, if all_passed { 0 } else { 2 })
        }
        Cmd::Scan {
            axis,
            from,
            to,
            points,
            x,
            h,
            h_exp,
            xi,
            xi_exp,
            hyp,
        } => {
            if g.format == Format::Json {
                return Err(Error::Parameter(
                    "scan emits plot-ready csv; json is not available here".to_string(),
                ));
            }
            let spec = ScanSpec {
                axis: need(
                    match axis {
                        Some(a) => Some(a),
                        None => file.choice("axis")?,
                    },
                    "axis",
                )?,
                from: need(from.or(file.f64("from")?), "from")?,
                to: need(to.or(file.f64("to")?), "to")?,
                points: need(points.or(file.usize("points")?), "points")?,
                x: match x {
                    Some(v) => Some(v),
                    None => file.u64("X")?,
                },
                h: match h {
                    Some(v) => Some(v),
                    None => file.f64("h")?,
                },
                h_exp: match h_exp {
                    Some(v) => Some(v),
                    None => file.f64("h-exp")?,
                },
                xi: match xi {
                    Some(v) => Some(v),
                    None => file.f64("xi")?,
                },
                xi_exp: match xi_exp {
                    Some(v) => Some(v),
                    None => file.f64("xi-exp")?,
                },
            };
            let hyp = resolve_hyp(&hyp, &file)?;
            let (echo, body) = run::scan(&spec, &hyp, &g)?;
            (echo, body, 0)
        }
    };
    report::emit(&echo, &body, g.format, g.out.as_deref())?;
    Ok(code)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            // usage problems are validation errors: one line, exit 1
            let msg = e.to_string();
            eprintln!("psilab: {}", msg.lines().next().unwrap_or("bad arguments"));
            std::process::exit(1);
        }
    };
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("psilab: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
