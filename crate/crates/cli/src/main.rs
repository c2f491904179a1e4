//! `manin`: reproducible desk-scale experiments on rational points of
//! bounded height on compactifications of the `ax+b` group.
//!
//! Subcommands: `check`, `cone`, `count`, `peyre`, `local`, `expsum`.
//! Exit status: 0 on success, 2 when a verification-style check inside the
//! run failed, 1 on usage or I/O errors.  `MANIN_THREADS` caps parallelism.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{Map, Value};

use manin_core::arith::parse_rat;
use manin_core::cone::{alpha_peyre, dual_cone, shift_integrand, shifted_integral};
use manin_core::count::{count_points, count_smoothed, SmoothWeight};
use manin_core::expsum::{
    clausen_partial, double_series_partial, gauss_average, poisson_residual, weyl_bound_report,
    BumpSpec, Progression, SeriesMode, WeylSumSpec,
};
use manin_core::local::{bias_residual, OscillationQuery};
use manin_core::surface::{load_model, verify_geometry, SurfaceModel};
use manin_core::tamagawa::peyre_constant;
use manin_core::Rat;

use config::{merge, parse_grid, parse_tolerance, FileConfig};
use emit::{fmt_float, json_float, json_rat, Report};

#[derive(Parser)]
#[command(name = "manin", version, about)]
struct Cli {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Stamp the report with the generation time.
    #[arg(long, global = true)]
    timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every divisor-data invariant of a model and report pass/fail.
    Check(ModelArgs),
    /// Print dual-cone rays, Peyre's alpha, and a shifted-integral
    /// comparison table.
    Cone(ConeArgs),
    /// Count points of bounded anticanonical height.
    Count(CountArgs),
    /// Assemble the truncated Tamagawa number and Peyre constant.
    Peyre(PeyreArgs),
    /// Evaluate one p-adic oscillatory factor and its bias decomposition.
    Local(LocalArgs),
    /// Exponential-sum evaluators and diagnostics.
    #[command(subcommand)]
    Expsum(ExpsumCmd),
}

#[derive(Args)]
struct ModelArgs {
    /// Model name: ex1, ex2, or ex3.
    #[arg(long)]
    model: Option<String>,
    /// Marked-point count for ex3.
    #[arg(long)]
    n: Option<u32>,
}

impl ModelArgs {
    fn load(&self, file: &FileConfig) -> Result<SurfaceModel> {
        let name = merge(self.model.clone(), file.get("model"), |s| Ok(s.to_string()))?
            .ok_or_else(|| anyhow!("--model is required (or `model=` in the config)"))?;
        let n = merge(self.n, file.get("n"), |s| Ok(s.parse()?))?;
        Ok(load_model(&name, n)?)
    }
}

#[derive(Args)]
struct ConeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of comparison points for the shifted-integral table.
    #[arg(long, default_value_t = 4)]
    points: usize,
    /// Half-length of the quadrature window.
    #[arg(long, default_value_t = 2.0e5)]
    t_max: f64,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Height bound or comma-separated increasing grid, e.g. 1e4,1e5,1e6.
    #[arg(long = "B", value_name = "B")]
    bound: Option<String>,
    /// Alias for --B.
    #[arg(long)]
    grid: Option<String>,
    /// Also evaluate the standard smoothed count.
    #[arg(long)]
    smooth: bool,
}

#[derive(Args)]
struct PeyreArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Euler-product truncation.
    #[arg(long)]
    pmax: Option<u64>,
    /// Archimedean quadrature tolerance.
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    p: Option<u64>,
    /// Twist frequency, e.g. 1/5.
    #[arg(long)]
    alpha: Option<String>,
    /// Exponent vector: `auto` for d + 2u, or comma-separated reals.
    #[arg(long, default_value = "auto")]
    s: String,
    /// Stratum truncation depth.
    #[arg(long, default_value_t = 40)]
    depth: usize,
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// Multivariate monomial Weyl sum and its bound ratio.
    Weyl(WeylArgs),
    /// Unit Gauss-sum average with its certified bound.
    Gauss(GaussArgs),
    /// Smoothed progression-equidistribution residual.
    Poisson(PoissonArgs),
    /// Partial sums of a Clausen series.
    Clausen(ClausenArgs),
    /// Partial sums of the double Dirichlet series.
    Double(DoubleArgs),
}

#[derive(Args)]
struct WeylArgs {
    /// Comma-separated monomial exponents, e.g. 2,1.
    #[arg(long)]
    exponents: String,
    /// Comma-separated dyadic box starts, e.g. 8,16.
    #[arg(long)]
    boxes: String,
    #[arg(long, default_value_t = 1)]
    y: u64,
    #[arg(long)]
    q: u64,
    /// Probe exponent for the bound core; default 1/2^K.
    #[arg(long)]
    eta: Option<f64>,
    /// Progressions `modulus:residue`, comma-separated, one per variable.
    #[arg(long)]
    progressions: Option<String>,
    /// Enforce pairwise coprimality and gcd(m_i, Q) = 1.
    #[arg(long)]
    coprime_to: Option<u64>,
}

#[derive(Args)]
struct GaussArgs {
    #[arg(long)]
    u: u32,
    /// Single modulus.
    #[arg(long)]
    n: Option<u64>,
    /// Sweep all prime powers up to this cap.
    #[arg(long)]
    n_max: Option<u64>,
    /// Numerator constant `C` as a rational.
    #[arg(long, default_value = "1")]
    c: String,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    q: u64,
    /// The coprimality modulus Q.
    #[arg(long, default_value_t = 1)]
    big_q: u64,
    #[arg(long, default_value_t = 1)]
    y: u64,
    #[arg(long, default_value_t = 1)]
    sharpness: u64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

#[derive(Args)]
struct ClausenArgs {
    /// Angle theta as a rational, e.g. 1/3.
    #[arg(long)]
    theta: String,
    #[arg(long, default_value_t = 2.0)]
    s_re: f64,
    #[arg(long, default_value_t = 0.0)]
    s_im: f64,
    /// Largest number of terms; doubling checkpoints are reported.
    #[arg(long)]
    m: u64,
}

#[derive(Args)]
struct DoubleArgs {
    #[arg(long, default_value_t = 1)]
    i: u32,
    #[arg(long, default_value_t = 1)]
    j: u32,
    #[arg(long, default_value_t = 2.0)]
    s1: f64,
    #[arg(long, default_value_t = 2.0)]
    s2: f64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    n: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Ok(threads) = std::env::var("MANIN_THREADS") {
        let n: usize = threads
            .parse()
            .context("MANIN_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .ok();
    }
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let (report, failed) = match &cli.command {
        Command::Check(args) => cmd_check(args, &file, cli.timestamp)?,
        Command::Cone(args) => cmd_cone(args, &file, cli.timestamp)?,
        Command::Count(args) => cmd_count(args, &file, cli.timestamp)?,
        Command::Peyre(args) => cmd_peyre(args, &file, cli.timestamp)?,
        Command::Local(args) => cmd_local(args, &file, cli.timestamp)?,
        Command::Expsum(args) => cmd_expsum(args, cli.timestamp)?,
    };
    report.write(cli.output.as_deref())?;
    Ok(ExitCode::from(if failed { 2 } else { 0 }))
}

fn cmd_check(args: &ModelArgs, file: &FileConfig, ts: bool) -> Result<(Report, bool)> {
    let model = args.load(file)?;
    let rep = verify_geometry(&model);
    let mut map = Map::new();
    map.insert("model".into(), Value::String(rep.model.clone()));
    map.insert(
        "checks".into(),
        Value::Array(
            rep.checks
                .iter()
                .map(|c| {
                    let mut m = Map::new();
                    m.insert("name".into(), Value::String(c.name.clone()));
                    m.insert("passed".into(), Value::Bool(c.passed));
                    m.insert("detail".into(), Value::String(c.detail.clone()));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    let mut failed = !rep.all_passed();

    // height-bearing models: the per-place character identity
    // prod_j H_j^{-ord_a(j)} = |a|_v, exact at finite places, as a residual
    // at the real one
    if model.height_model.is_some() {
        use manin_core::heights::{
            character_consistency_arch, character_consistency_finite, relevant_primes,
            RationalPoint,
        };
        let mut rows = Vec::new();
        let mut identity_ok = true;
        for (an, ad, bn, bd) in [(1i64, 2i64, 3i64, 2i64), (7, 3, -5, 4), (-9, 5, 1, 6)] {
            let pt = RationalPoint::from_ints(an, ad, bn, bd)?;
            let mut finite_exact = true;
            for p in relevant_primes(&model, &pt)? {
                finite_exact &= character_consistency_finite(&model, &pt, p)?;
            }
            let arch = character_consistency_arch(&model, &pt)?;
            identity_ok &= finite_exact && arch < 1e-10;
            let mut m = Map::new();
            m.insert(
                "point".into(),
                Value::String(format!("({an}/{ad}, {bn}/{bd})")),
            );
            m.insert("finite_places_exact".into(), Value::Bool(finite_exact));
            m.insert("arch_residual".into(), json_float(arch));
            rows.push(Value::Object(m));
        }
        map.insert("height_consistency".into(), Value::Array(rows));
        failed |= !identity_ok;
    }

    map.insert("all_passed".into(), Value::Bool(!failed));
    Ok((Report::json(map, ts), failed))
}

fn cmd_cone(args: &ConeArgs, file: &FileConfig, ts: bool) -> Result<(Report, bool)> {
    let model = args.model.load(file)?;
    let u = model.ord_a_vector();
    let all: Vec<usize> = (0..model.num_divisors()).collect();
    let cone = dual_cone(&all, &u)?;
    let alpha = alpha_peyre(&model)?;

    let mut rows = Vec::new();
    for ray in &cone.rays {
        rows.push(vec![
            "ray".to_string(),
            ray.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            String::new(),
            String::new(),
        ]);
    }
    rows.push(vec![
        "alpha_peyre".to_string(),
        alpha.to_string(),
        String::new(),
        String::new(),
    ]);

    // shifted-integral comparison on a small deterministic grid
    let g = shift_integrand(&model, &all);
    let d = model.anticanonical_vector();
    let mut failed = false;
    let mut seed = 0x2545f4914f6cdd1du64;
    for k in 0..args.points {
        let mut z0 = Vec::with_capacity(model.num_divisors());
        for j in 0..model.num_divisors() {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            let jitter = (seed >> 11) as f64 / (1u64 << 53) as f64;
            let base = d[j] as f64 + 0.5 * u[j] as f64;
            z0.push(Complex64::new(base * (0.6 + 0.8 * jitter), 0.0));
        }
        let s = shifted_integral(&g, &z0, &u, args.t_max, 1e-7)?;
        let x = cone
            .volume_complex(&z0)
            .value
            .ok_or_else(|| anyhow!("comparison point hit a pole"))?;
        let diff = (s.value - x).norm();
        if diff > s.error.max(1e-6) {
            failed = true;
        }
        rows.push(vec![
            format!("compare_{k}"),
            fmt_float(s.value.re),
            fmt_float(x.re),
            fmt_float(diff),
        ]);
    }

    let header = vec![
        "kind".to_string(),
        "value".to_string(),
        "cone_volume".to_string(),
        "abs_diff".to_string(),
    ];
    Ok((Report::csv(header, rows, ts), failed))
}

fn cmd_count(args: &CountArgs, file: &FileConfig, ts: bool) -> Result<(Report, bool)> {
    let model = args.model.load(file)?;
    let grid = match (&args.bound, &args.grid) {
        (Some(b), None) => parse_grid(b)?,
        (None, Some(g)) => parse_grid(g)?,
        (Some(_), Some(_)) => bail!("give either --B or --grid, not both"),
        (None, None) => match (file.get("B"), file.get("grid")) {
            (Some(b), _) => parse_grid(b)?,
            (None, Some(g)) => parse_grid(g)?,
            _ => bail!("need --B or --grid"),
        },
    };
    let weight = SmoothWeight::standard_bump();
    let mut header = vec!["B".to_string(), "N".to_string(), "N_over_BlogB".to_string()];
    if args.smooth {
        header.push("smoothed".to_string());
    }
    let mut rows = Vec::new();
    for &b in &grid {
        let n = count_points(&model, b)?;
        let ratio = n as f64 / (b as f64 * (b as f64).ln());
        let mut row = vec![b.to_string(), n.to_string(), fmt_float(ratio)];
        if args.smooth {
            row.push(fmt_float(count_smoothed(&model, b, &weight)?));
        }
        rows.push(row);
    }
    Ok((Report::csv(header, rows, ts), false))
}

fn cmd_peyre(args: &PeyreArgs, file: &FileConfig, ts: bool) -> Result<(Report, bool)> {
    let model = args.model.load(file)?;
    let pmax = merge(args.pmax, file.get("pmax"), |s| Ok(s.parse()?))?.unwrap_or(10_000);
    let tol = merge(
        args.tol.as_deref().map(str::to_string),
        file.get("tol"),
        |s| Ok(s.to_string()),
    )?
    .map(|s| parse_tolerance(&s))
    .transpose()?
    .unwrap_or(1e-8);

    let pc = peyre_constant(&model, pmax, tol)?;
    let mut map = Map::new();
    map.insert("model".into(), Value::String(model.name.clone()));
    map.insert("alpha_peyre".into(), json_rat(&pc.alpha));
    map.insert("tau_inf".into(), json_float(pc.tau.tau_inf));
    map.insert("tau_truncated".into(), json_float(pc.tau.value));
    map.insert("tail_bound".into(), json_float(pc.tau.tail_bound));
    map.insert("p_max".into(), Value::from(pmax));
    map.insert("peyre_constant".into(), json_float(pc.value));
    map.insert("error_bound".into(), json_float(pc.error_bound));
    Ok((Report::json(map, ts), false))
}

fn cmd_local(args: &LocalArgs, file: &FileConfig, ts: bool) -> Result<(Report, bool)> {
    let model = args.model.load(file)?;
    let p = merge(args.p, file.get("p"), |s| Ok(s.parse()?))?
        .ok_or_else(|| anyhow!("--p is required"))?;
    let alpha_text = merge(args.alpha.clone(), file.get("alpha"), |s| Ok(s.to_string()))?
        .ok_or_else(|| anyhow!("--alpha is required"))?;
    let alpha: Rat =
        parse_rat(&alpha_text).ok_or_else(|| anyhow!("bad rational `{alpha_text}`"))?;

    let s = if args.s == "auto" {
        OscillationQuery::probe_exponents(&model)
    } else {
        args.s
            .split(',')
            .map(|piece| {
                piece
                    .trim()
                    .parse::<f64>()
                    .map(|x| Complex64::new(x, 0.0))
                    .map_err(|_| anyhow!("bad exponent `{piece}`"))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let mut query = OscillationQuery::new(s, alpha.clone(), p)?;
    query.depth = args.depth;
    let rep = bias_residual(&model, &query)?;

    let mut map = Map::new();
    map.insert("model".into(), Value::String(model.name.clone()));
    map.insert("p".into(), Value::from(p));
    map.insert("alpha".into(), json_rat(&alpha));
    map.insert("value_re".into(), json_float(rep.integral.re));
    map.insert("value_im".into(), json_float(rep.integral.im));
    map.insert("main_term_re".into(), json_float(rep.main_term.re));
    map.insert("main_term_im".into(), json_float(rep.main_term.im));
    map.insert("residual_abs".into(), json_float(rep.residual.norm()));
    map.insert("bound_core".into(), json_float(rep.bound_core));
    map.insert("bound_ratio".into(), json_float(rep.ratio));
    map.insert("truncation_bound".into(), json_float(rep.tail_bound));
    let failed = !rep.ratio.is_finite();
    Ok((Report::json(map, ts), failed))
}

fn cmd_expsum(cmd: &ExpsumCmd, ts: bool) -> Result<(Report, bool)> {
    match cmd {
        ExpsumCmd::Weyl(a) => {
            let exponents: Vec<u32> = a
                .exponents
                .split(',')
                .map(|s| s.trim().parse().context("bad exponent"))
                .collect::<Result<_>>()?;
            let box_starts: Vec<u64> = a
                .boxes
                .split(',')
                .map(|s| s.trim().parse().context("bad box"))
                .collect::<Result<_>>()?;
            let progressions = a
                .progressions
                .as_deref()
                .map(|text| {
                    text.split(',')
                        .map(|piece| {
                            let (m, r) = piece
                                .split_once(':')
                                .ok_or_else(|| anyhow!("progression must be modulus:residue"))?;
                            Ok(Progression {
                                modulus: m.trim().parse()?,
                                residue: r.trim().parse()?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let spec = WeylSumSpec {
                exponents: exponents.clone(),
                box_starts,
                progressions,
                multiplier: a.y,
                modulus: a.q,
                coprime_to: a.coprime_to,
            };
            let k: u32 = exponents.iter().map(|&u| u - 1).sum();
            let eta = a.eta.unwrap_or(1.0 / (1u64 << k) as f64);
            let rep = weyl_bound_report(&spec, eta)?;
            let header = vec![
                "lhs_abs".to_string(),
                "rhs_core".to_string(),
                "ratio".to_string(),
                "eta".to_string(),
            ];
            let rows = vec![vec![
                fmt_float(rep.lhs_abs),
                fmt_float(rep.rhs_core),
                fmt_float(rep.ratio),
                fmt_float(rep.eta),
            ]];
            let failed = a.q == 1 && rep.ratio > 1.0;
            Ok((Report::csv(header, rows, ts), failed))
        }
        ExpsumCmd::Gauss(a) => {
            let c = parse_rat(&a.c).ok_or_else(|| anyhow!("bad rational `{}`", a.c))?;
            let moduli: Vec<u64> = match (a.n, a.n_max) {
                (Some(n), None) => vec![n],
                (None, Some(cap)) => prime_powers_up_to(cap),
                _ => bail!("give exactly one of --n or --n-max"),
            };
            let header = vec![
                "N".to_string(),
                "value_re".to_string(),
                "value_im".to_string(),
                "abs".to_string(),
                "certified_bound".to_string(),
                "unity_count".to_string(),
            ];
            let mut rows = Vec::new();
            let mut failed = false;
            for n in moduli {
                let g = gauss_average(a.u, n, &c)?;
                if g.value.norm() > g.certified_bound + 1e-9 {
                    failed = true;
                }
                rows.push(vec![
                    n.to_string(),
                    fmt_float(g.value.re),
                    fmt_float(g.value.im),
                    fmt_float(g.value.norm()),
                    fmt_float(g.certified_bound),
                    g.unity_count.to_string(),
                ]);
            }
            Ok((Report::csv(header, rows, ts), failed))
        }
        ExpsumCmd::Poisson(a) => {
            let bump = BumpSpec {
                sharpness: a.sharpness,
                amplitude: a.amplitude,
            };
            let r = poisson_residual(&bump, a.m, a.q, a.big_q, a.y)?;
            let header = vec![
                "lhs".to_string(),
                "reference_AYq".to_string(),
                "ratio".to_string(),
            ];
            let rows = vec![vec![
                fmt_float(r.lhs),
                fmt_float(r.reference),
                fmt_float(r.ratio),
            ]];
            let failed = a.q == 1 && r.lhs != 0.0;
            Ok((Report::csv(header, rows, ts), failed))
        }
        ExpsumCmd::Clausen(a) => {
            let theta = parse_rat(&a.theta).ok_or_else(|| anyhow!("bad rational theta"))?;
            let s = Complex64::new(a.s_re, a.s_im);
            let header = vec![
                "terms".to_string(),
                "partial_re".to_string(),
                "partial_im".to_string(),
                "last_term_abs".to_string(),
            ];
            let mut rows = Vec::new();
            let mut terms = (a.m / 8).max(1);
            while terms <= a.m {
                let (sum, last) = clausen_partial(&theta, s, terms)?;
                rows.push(vec![
                    terms.to_string(),
                    fmt_float(sum.re),
                    fmt_float(sum.im),
                    fmt_float(last),
                ]);
                if terms == a.m {
                    break;
                }
                terms = (terms * 2).min(a.m);
            }
            Ok((Report::csv(header, rows, ts), false))
        }
        ExpsumCmd::Double(a) => {
            let out = double_series_partial(
                a.i,
                a.j,
                Complex64::new(a.s1, 0.0),
                Complex64::new(a.s2, 0.0),
                a.m,
                a.n,
                SeriesMode::Diagnostic,
            )?;
            let header = vec![
                "partial_re".to_string(),
                "partial_im".to_string(),
                "tail_bound".to_string(),
            ];
            let rows = vec![vec![
                fmt_float(out.value.re),
                fmt_float(out.value.im),
                fmt_float(out.tail_bound),
            ]];
            Ok((Report::csv(header, rows, ts), false))
        }
    }
}

fn prime_powers_up_to(cap: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in manin_core::arith::primes_up_to(cap) {
        let mut n = p;
        while n <= cap {
            out.push(n);
            n = match n.checked_mul(p) {
                Some(next) => next,
                None => break,
            };
        }
    }
    out.sort_unstable();
    out
}
