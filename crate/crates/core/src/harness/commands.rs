use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::arcs::{dissect, major_total_measure};
use crate::error::{Error, Result};
use crate::exponents::{d1, fmt_rational, threshold_table, to_f64, ExponentBudget};
use crate::expsum::{
    gauss_fourier_check, mean_value_identity_check, mean_value_integral_estimate,
    minor_arc_sup_scan, vinogradov_count, IntegralDomain, SupConfig, XiSampling,
};
use crate::lattice::{maximal_function, GridFile};
use crate::multiplier::{
    a_hat_with, default_q_max, dyadic_error_decay, error_field, kernel_sup_bound, main_term,
    AhatMethod,
};
use crate::oscillatory::{j_lambda, sigma_hat, surface_mass, v_n, QuadratureSpec};
use crate::params::FormParams;
use crate::stats::loglog_slope;

use super::cache::{Cache, CacheStatus};
use super::output::{fnum, render_csv, render_summary, summary_path, write_atomic, Config, Table};
use super::{CACHE_ENV, EXIT_INTERNAL, EXIT_OK, EXIT_REFUSAL, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "circle-lab", version, about = "Circle-method experiments for k-spherical averages")]
struct Cli {
    /// CSV output path; `-` writes the CSV to standard output.
    #[arg(long, global = true, default_value = "-")]
    out: String,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cache directory (default: $CIRCLE_LAB_CACHE, else ./cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Disable the on-disk cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dimension thresholds and exponents in exact arithmetic.
    Exponents(ExponentsArgs),
    /// Representation counts R(λ).
    Repcount(RepcountArgs),
    /// Discrete maximal function of a grid function.
    Maximal(MaximalArgs),
    /// Complete Gauss sums.
    Gauss(GaussArgs),
    /// Mean values of Weyl sums.
    Meanvalue(MeanvalueArgs),
    /// Major arcs of the Farey dissection.
    Arcs(ArcsArgs),
    /// Oscillatory integrals.
    Oscillatory(OscillatoryArgs),
    /// Multiplier, main term and error field.
    Multiplier(MultiplierArgs),
}

#[derive(Debug, Args)]
struct ExponentsArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    /// Threshold comparison table for k = 3..10.
    #[arg(long)]
    table1: bool,
}

#[derive(Debug, Args)]
struct RepcountArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    lambda_max: u64,
}

#[derive(Debug, Args)]
struct MaximalArgs {
    #[arg(long)]
    k: u32,
    /// JSON grid: {"d": .., "box": .., "values": [[index, re, im], ..]}.
    #[arg(long)]
    input: PathBuf,
    /// λ-set (comma separated); default 1..=lambda-max.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<u64>,
    #[arg(long)]
    lambda_max: Option<u64>,
    /// Exponents p for the reported ℓ^p ratios ("inf" allowed).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    p: Vec<f64>,
}

#[derive(Debug, Args)]
struct GaussArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    q_max: u64,
    /// Report the Fourier inversion identity instead of raw values.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeanMode {
    Vinogradov,
    Identity,
    MinorSup,
    Integral,
}

#[derive(Debug, Args)]
struct MeanvalueArgs {
    #[arg(long, value_enum)]
    mode: MeanMode,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    s: u32,
    #[arg(long, default_value_t = 2)]
    l: u32,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// θ samples for `identity` and `minor-sup`.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Exponent r for `integral`.
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    /// θ-grid for `integral` (default 8kN^(k-1)).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
struct ArcsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OscMode {
    Vn,
    Jlambda,
    Sigma0Check,
}

#[derive(Debug, Args)]
struct OscillatoryArgs {
    #[arg(long, value_enum)]
    mode: OscMode,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Upper limit N of v_N.
    #[arg(long, default_value_t = 10.0)]
    n: f64,
    /// key=value lines: order, phase_budget, tail_tolerance, max_panels.
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MultMode {
    Ahat,
    Main,
    Error,
    Decay,
    KernelSup,
}

#[derive(Debug, Args)]
struct MultiplierArgs {
    #[arg(long, value_enum)]
    mode: MultMode,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    d: u32,
    /// λ, or the dyadic scales Λ for `decay`.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    lambda: Vec<u64>,
    /// q-truncation (default ⌊λ^{1/k}⌋).
    #[arg(long)]
    q_max: Option<u64>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frequency vector for `ahat` and `main` (default 0).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Use direct enumeration for `ahat`.
    #[arg(long)]
    direct: bool,
    /// Levels N for `kernel-sup`.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    n: Vec<u64>,
    /// θ-grid for `kernel-sup` (default 8kN^(k-1)).
    #[arg(long)]
    grid: Option<usize>,
    /// Integrate `kernel-sup` over the full circle instead of the minor arcs.
    #[arg(long)]
    full_circle: bool,
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

struct Report {
    config: Config,
    table: Table,
    summary: Map<String, Value>,
    /// Lines for standard error that are not part of the data.
    notices: Vec<String>,
}

impl Report {
    fn new(command: &str, columns: &[&str]) -> Self {
        Report {
            config: Config::new(command),
            table: Table::new(columns),
            summary: Map::new(),
            notices: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    fn note_f(&mut self, key: &str, x: f64) {
        self.note(key, fnum(x));
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cplx(z: Complex64) -> [String; 2] {
    [fnum(z.re), fnum(z.im)]
}

fn status_name(s: CacheStatus) -> &'static str {
    match s {
        CacheStatus::Hit => "hit",
        CacheStatus::Miss => "miss",
        CacheStatus::Quarantined => "quarantined",
        CacheStatus::Disabled => "disabled",
    }
}

fn load_spec(path: Option<&Path>) -> Result<QuadratureSpec> {
    let mut spec = QuadratureSpec::default();
    let Some(path) = path else {
        return Ok(spec);
    };
    let text = std::fs::read_to_string(path)?;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key=value", path.display(), no + 1)))?;
        let value = value.trim().trim_matches('"');
        let bad = |e: String| {
            Error::Parse(format!("{}:{}: bad value {value:?} ({e})", path.display(), no + 1))
        };
        match key.trim() {
            "order" | "panel_rule" => spec.order = value.parse::<usize>().map_err(|e| bad(e.to_string()))?,
            "phase_budget" => spec.phase_budget = value.parse::<f64>().map_err(|e| bad(e.to_string()))?,
            "tail_tolerance" => spec.tail_tolerance = value.parse::<f64>().map_err(|e| bad(e.to_string()))?,
            "max_panels" => spec.max_panels = value.parse::<usize>().map_err(|e| bad(e.to_string()))?,
            other => {
                return Err(Error::Parse(format!(
                    "{}:{}: unknown key {other:?}",
                    path.display(),
                    no + 1
                )))
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn echo_spec(config: &mut Config, spec: &QuadratureSpec) {
    config
        .set("order", spec.order)
        .set("phase_budget", fnum(spec.phase_budget))
        .set("tail_tolerance", fnum(spec.tail_tolerance))
        .set("max_panels", spec.max_panels);
}

fn exponents(args: &ExponentsArgs) -> Result<Report> {
    if args.table1 {
        let mut r = Report::new(
            "exponents",
            &["k", "d0", "d0_decimal", "d0_star", "previous_threshold", "waring_bound"],
        );
        r.config.set("table1", true);
        for row in threshold_table() {
            r.table.push(vec![
                row.k.to_string(),
                fmt_rational(&row.d0),
                fnum(to_f64(&row.d0)),
                row.d0_star.to_string(),
                row.previous_threshold.to_string(),
                row.waring_bound.to_string(),
            ]);
        }
        r.note("rows", r.table.rows.len());
        return Ok(r);
    }
    let k = args
        .k
        .ok_or_else(|| Error::domain("exponents needs --k or --table1"))?;
    let mut r = Report::new("exponents", &["name", "exact", "decimal"]);
    r.config.set("k", k);
    let push = |r: &mut Report, name: &str, v: &num_rational::BigRational| {
        r.table
            .push(vec![name.to_string(), fmt_rational(v), fnum(to_f64(v))]);
    };
    match args.d {
        Some(d) => {
            r.config.set("d", d);
            let budget = ExponentBudget::compute(FormParams::new(k, d)?)?;
            for (name, v) in budget.entries() {
                push(&mut r, name, &v);
            }
            r.note("delta0_regime", format!("{:?}", budget.delta0.regime));
        }
        None => {
            let (d0, l0) = crate::exponents::d0_with_maximizer(k)?;
            push(&mut r, "d0", &d0);
            let int = |x: u32| num_rational::BigRational::from_integer(x.into());
            push(&mut r, "d0_star", &int(crate::exponents::d0_star(k)?));
            push(&mut r, "l0", &int(l0));
            push(&mut r, "tau", &crate::exponents::tau(k));
            push(&mut r, "d1", &int(d1(k)));
        }
    }
    r.note("rows", r.table.rows.len());
    Ok(r)
}

fn repcount(args: &RepcountArgs, cache: &Cache) -> Result<Report> {
    let params = FormParams::new(args.k, args.d)?;
    let (table, status) = cache.representation_table(params, args.lambda_max)?;
    let mut r = Report::new("repcount", &["lambda", "count", "normalised"]);
    r.notices.push(format!("cache: {}", status_name(status)));
    r.config
        .set("k", args.k)
        .set("d", args.d)
        .set("lambda_max", args.lambda_max);
    for (l, c) in table.counts.iter().enumerate() {
        let norm = if l == 0 {
            String::new()
        } else {
            fnum(table.get_f64(l as u64).unwrap_or(f64::NAN) * params.normalisation(l as f64))
        };
        r.table.push(vec![l.to_string(), c.to_string(), norm]);
    }
    r.note("rows", r.table.rows.len());
    Ok(r)
}

fn maximal(args: &MaximalArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&args.input)?;
    let file: GridFile = serde_json::from_str(&text)?;
    let f = file.into_grid()?;
    let params = FormParams::new(args.k, f.d())?;
    let lambdas: Vec<u64> = if !args.lambdas.is_empty() {
        args.lambdas.clone()
    } else {
        let top = args
            .lambda_max
            .ok_or_else(|| Error::domain("maximal needs --lambdas or --lambda-max"))?;
        (1..=top).collect()
    };
    let m = maximal_function(&f, &lambdas, params)?;
    let cols: Vec<String> = (1..=f.d()).map(|j| format!("x{j}")).chain(["value".into()]).collect();
    let colrefs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut r = Report::new("maximal", &colrefs);
    r.config
        .set("k", args.k)
        .set("input", args.input.display())
        .set("lambdas", list(&lambdas))
        .set("p", list(&args.p));
    for (i, v) in m.values().iter().enumerate() {
        if v.re == 0.0 {
            continue;
        }
        let mut row: Vec<String> = m.point_of(i).iter().map(i64::to_string).collect();
        row.push(fnum(v.re));
        r.table.push(row);
    }
    for &p in &args.p {
        let denom = f.lp_norm(p);
        if denom == 0.0 {
            return Err(Error::domain("input function is identically zero"));
        }
        r.note_f(&format!("lp_ratio_{p}"), m.lp_norm(p) / denom);
    }
    Ok(r)
}

fn gauss(args: &GaussArgs, cache: &Cache) -> Result<Report> {
    if args.q_max == 0 {
        return Err(Error::domain("q_max must be >= 1"));
    }
    if args.check {
        let mut r = Report::new("gauss", &["q", "a", "m", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err"]);
        r.config.set("k", args.k).set("q_max", args.q_max).set("check", true);
        let mut worst = 0.0f64;
        for q in 1..=args.q_max {
            for a in (0..q as i64).filter(|&a| num_integer::Integer::gcd(&(a as u64), &q) == 1) {
                for m in 0..q as i64 {
                    let (lhs, rhs) = gauss_fourier_check(q, a, m, args.k)?;
                    let err = (lhs - rhs).norm();
                    worst = worst.max(err);
                    let [lr, li] = cplx(lhs);
                    let [rr, ri] = cplx(rhs);
                    r.table.push(vec![
                        q.to_string(),
                        a.to_string(),
                        m.to_string(),
                        lr,
                        li,
                        rr,
                        ri,
                        fnum(err),
                    ]);
                }
            }
        }
        r.note_f("max_abs_err", worst);
        return Ok(r);
    }
    let (table, status) = cache.gauss_table(args.k, args.q_max)?;
    let mut r = Report::new("gauss", &["q", "a", "b", "re", "im", "abs"]);
    r.notices.push(format!("cache: {}", status_name(status)));
    r.config.set("k", args.k).set("q_max", args.q_max);
    let mut largest = 0.0f64;
    for (q, a, row) in &table.rows {
        for (b, z) in row.iter().enumerate() {
            let [re, im] = cplx(*z);
            largest = largest.max(if *q > 1 { z.norm() } else { 0.0 });
            r.table
                .push(vec![q.to_string(), a.to_string(), b.to_string(), re, im, fnum(z.norm())]);
        }
    }
    r.note_f("max_abs_q_gt_1", largest);
    Ok(r)
}

fn random_thetas(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen::<f64>()).collect()
}

fn meanvalue(args: &MeanvalueArgs) -> Result<Report> {
    let k = args.k;
    match args.mode {
        MeanMode::Vinogradov => {
            let mut r = Report::new("meanvalue", &["n", "count"]);
            r.config
                .set("mode", "vinogradov")
                .set("k", k)
                .set("s", args.s)
                .set("n", list(&args.n));
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &n in &args.n {
                let c = vinogradov_count(args.s, k, n)?;
                xs.push(n as f64);
                ys.push(num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::INFINITY));
                r.table.push(vec![n.to_string(), c.to_string()]);
            }
            if let Some(s) = loglog_slope(&xs, &ys) {
                r.note_f("slope", s);
            }
            Ok(r)
        }
        MeanMode::Identity => {
            let n = *args.n.first().expect("default present");
            let mut r = Report::new("meanvalue", &["theta", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_err"]);
            r.config
                .set("mode", "identity")
                .set("k", k)
                .set("s", args.s)
                .set("l", args.l)
                .set("n", n)
                .set("samples", args.samples)
                .set("seed", args.seed);
            let mut worst = 0.0f64;
            for theta in random_thetas(args.seed, args.samples) {
                let (lhs, rhs) = mean_value_identity_check(theta, args.s, args.l, k, n)?;
                let rel = (lhs - rhs).norm() / rhs.norm().max(1e-300);
                worst = worst.max(rel);
                let [a, b] = cplx(lhs);
                let [c, d] = cplx(rhs);
                r.table.push(vec![fnum(theta), a, b, c, d, fnum(rel)]);
            }
            r.note_f("max_rel_err", worst);
            Ok(r)
        }
        MeanMode::MinorSup => {
            let mut r = Report::new("meanvalue", &["n", "sup", "theta", "xi", "accepted", "rejected"]);
            r.config
                .set("mode", "minor-sup")
                .set("k", k)
                .set("n", list(&args.n))
                .set("samples", args.samples)
                .set("seed", args.seed);
            let thetas = random_thetas(args.seed, args.samples);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &n in &args.n {
                let diss = dissect(n, k)?;
                let scan = minor_arc_sup_scan(n, k, &thetas, &XiSampling::Refined(SupConfig::default()), &diss)?;
                xs.push(n as f64);
                ys.push(scan.sup);
                r.table.push(vec![
                    n.to_string(),
                    fnum(scan.sup),
                    fnum(scan.theta_at),
                    fnum(scan.xi_at),
                    scan.accepted.to_string(),
                    scan.rejected.to_string(),
                ]);
            }
            if let Some(s) = loglog_slope(&xs, &ys) {
                r.note_f("exponent", s);
            }
            Ok(r)
        }
        MeanMode::Integral => {
            let mut r = Report::new("meanvalue", &["n", "grid", "minor_integral", "full_integral"]);
            r.config
                .set("mode", "integral")
                .set("k", k)
                .set("n", list(&args.n))
                .set("r", fnum(args.r));
            for &n in &args.n {
                let grid = args
                    .grid
                    .unwrap_or_else(|| (8 * k as u64 * n.pow(k - 1)).max(64) as usize);
                let diss = dissect(n, k)?;
                let cfg = SupConfig::default();
                let minor =
                    mean_value_integral_estimate(args.r, k, n, IntegralDomain::MinorArcs(&diss), grid, cfg)?;
                let full = mean_value_integral_estimate(args.r, k, n, IntegralDomain::FullCircle, grid, cfg)?;
                r.table
                    .push(vec![n.to_string(), grid.to_string(), fnum(minor), fnum(full)]);
            }
            Ok(r)
        }
    }
}

fn arcs(args: &ArcsArgs) -> Result<Report> {
    let diss = dissect(args.n, args.k)?;
    let mut r = Report::new("arcs", &["a", "q", "center", "radius"]);
    r.config.set("n", args.n).set("k", args.k);
    for arc in diss.arcs() {
        r.table.push(vec![
            arc.a.to_string(),
            arc.q.to_string(),
            fmt_rational(&arc.center()),
            fmt_rational(&diss.radius(arc)),
        ]);
    }
    let (major, minor) = major_total_measure(&diss);
    r.note("arcs", diss.arcs().len());
    r.note("major_measure", fmt_rational(&major));
    r.note("minor_measure", fmt_rational(&minor));
    Ok(r)
}

fn oscillatory(args: &OscillatoryArgs) -> Result<Report> {
    let spec = load_spec(args.spec_file.as_deref())?;
    let k = args.k;
    match args.mode {
        OscMode::Vn => {
            let mut r = Report::new("oscillatory", &["theta", "xi", "n", "re", "im", "abs"]);
            r.config.set("mode", "vn").set("k", k).set("theta", fnum(args.theta)).set("n", fnum(args.n));
            echo_spec(&mut r.config, &spec);
            for &xi in &args.xi {
                let v = v_n(args.theta, xi, args.n, k, &spec)?;
                let [re, im] = cplx(v);
                r.table
                    .push(vec![fnum(args.theta), fnum(xi), fnum(args.n), re, im, fnum(v.norm())]);
            }
            Ok(r)
        }
        OscMode::Jlambda | OscMode::Sigma0Check => {
            let d = args.d.ok_or_else(|| Error::domain("--d is required"))?;
            let params = FormParams::new(k, d)?;
            let check = matches!(args.mode, OscMode::Sigma0Check);
            let eta: Vec<f64> = if check || args.xi == [0.0] {
                vec![0.0; d as usize]
            } else {
                args.xi.clone()
            };
            let mut r = if check {
                Report::new("oscillatory", &["lambda", "sigma_hat", "oracle", "rel_err"])
            } else {
                Report::new("oscillatory", &["lambda", "j_re", "j_im", "sigma_re", "sigma_im"])
            };
            r.config
                .set("mode", if check { "sigma0-check" } else { "jlambda" })
                .set("k", k)
                .set("d", d)
                .set("lambda", list(&args.lambda))
                .set("eta", list(&eta));
            echo_spec(&mut r.config, &spec);
            let mut worst = 0.0f64;
            for &lambda in &args.lambda {
                if check {
                    let s = sigma_hat(&eta, lambda, params, &spec)?;
                    let oracle = surface_mass(params);
                    let rel = (s.re - oracle).abs().max(s.im.abs()) / oracle;
                    worst = worst.max(rel);
                    r.table
                        .push(vec![fnum(lambda), fnum(s.re), fnum(oracle), fnum(rel)]);
                } else {
                    let j = j_lambda(&eta, lambda, params, &spec)?;
                    let s = sigma_hat(&eta, lambda, params, &spec)?;
                    let [a, b] = cplx(j);
                    let [c, dd] = cplx(s);
                    r.table.push(vec![fnum(lambda), a, b, c, dd]);
                }
            }
            if check {
                r.note_f("max_rel_err", worst);
            }
            Ok(r)
        }
    }
}

fn multiplier(args: &MultiplierArgs) -> Result<Report> {
    let params = FormParams::new(args.k, args.d)?;
    let spec = load_spec(args.spec_file.as_deref())?;
    let d = args.d as usize;
    let xi: Vec<f64> = if args.xi.is_empty() {
        vec![0.0; d]
    } else {
        args.xi.clone()
    };
    let mut r;
    match args.mode {
        MultMode::Ahat | MultMode::Main => {
            let is_main = matches!(args.mode, MultMode::Main);
            r = Report::new("multiplier", &["lambda", "q_max", "re", "im", "abs"]);
            r.config
                .set("mode", if is_main { "main" } else { "ahat" })
                .set("k", args.k)
                .set("d", args.d)
                .set("lambda", list(&args.lambda))
                .set("xi", list(&xi));
            if is_main {
                echo_spec(&mut r.config, &spec);
            } else {
                r.config.set("method", if args.direct { "direct" } else { "factored" });
            }
            for &lambda in &args.lambda {
                let (z, q) = if is_main {
                    let q = args.q_max.unwrap_or_else(|| default_q_max(lambda, params));
                    (main_term(lambda, &xi, q, params, &spec)?, q.to_string())
                } else {
                    let m = if args.direct { AhatMethod::Direct } else { AhatMethod::Factored };
                    (a_hat_with(lambda, &xi, params, m)?, String::new())
                };
                let [re, im] = cplx(z);
                r.table
                    .push(vec![lambda.to_string(), q, re, im, fnum(z.norm())]);
            }
        }
        MultMode::Error => {
            r = Report::new(
                "multiplier",
                &["lambda", "xi", "ahat_re", "ahat_im", "main_re", "main_im", "error_re", "error_im", "error_abs"],
            );
            let lambda = *args.lambda.first().expect("default present");
            let q = args.q_max.unwrap_or_else(|| default_q_max(lambda, params));
            r.config
                .set("mode", "error")
                .set("k", args.k)
                .set("d", args.d)
                .set("lambda", lambda)
                .set("q_max", q)
                .set("samples", args.samples)
                .set("seed", args.seed);
            echo_spec(&mut r.config, &spec);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let samples: Vec<Vec<f64>> = (0..args.samples)
                .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let field = error_field(lambda, &samples, q, params, &spec)?;
            for s in &field.samples {
                r.table.push(vec![
                    s.lambda.to_string(),
                    list(&s.xi),
                    fnum(s.a_hat.re),
                    fnum(s.a_hat.im),
                    fnum(s.main.re),
                    fnum(s.main.im),
                    fnum(s.error.re),
                    fnum(s.error.im),
                    fnum(s.error_abs()),
                ]);
            }
            r.note_f("max_abs_error", field.max_abs);
            r.note_f("mean_abs_error", field.mean_abs);
        }
        MultMode::Decay => {
            r = Report::new(
                "multiplier",
                &["big_lambda", "max_error", "mean_error", "worst_lambda", "worst_xi"],
            );
            r.config
                .set("mode", "decay")
                .set("k", args.k)
                .set("d", args.d)
                .set("lambda", list(&args.lambda))
                .set("q_max", args.q_max.map_or("floor(lambda^(1/k))".to_string(), |q| q.to_string()))
                .set("samples", args.samples)
                .set("seed", args.seed);
            echo_spec(&mut r.config, &spec);
            let table = dyadic_error_decay(&args.lambda, args.samples, args.q_max, params, args.seed, &spec)?;
            for row in &table.rows {
                r.table.push(vec![
                    row.big_lambda.to_string(),
                    fnum(row.max_error),
                    fnum(row.mean_error),
                    row.worst_lambda.to_string(),
                    list(&row.worst_xi),
                ]);
            }
            if let Some(s) = table.slope {
                r.note_f("slope", s);
            }
            let max = table.rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
            r.note_f("max_abs_error", max);
        }
        MultMode::KernelSup => {
            r = Report::new("multiplier", &["n", "grid", "integral", "scaled"]);
            r.config
                .set("mode", "kernel-sup")
                .set("k", args.k)
                .set("d", args.d)
                .set("n", list(&args.n))
                .set("domain", if args.full_circle { "full" } else { "minor" });
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &n in &args.n {
                let grid = args
                    .grid
                    .unwrap_or_else(|| (8 * args.k as u64 * n.pow(args.k - 1)).max(64) as usize);
                let diss;
                let domain = if args.full_circle {
                    IntegralDomain::FullCircle
                } else {
                    diss = dissect(n.max(1), args.k)?;
                    IntegralDomain::MinorArcs(&diss)
                };
                let ks = kernel_sup_bound(domain, n, params, grid, SupConfig::default())?;
                if let Some(s) = ks.scaled {
                    xs.push(n as f64);
                    ys.push(s);
                }
                r.table.push(vec![
                    n.to_string(),
                    grid.to_string(),
                    fnum(ks.integral),
                    ks.scaled.map(fnum).unwrap_or_default(),
                ]);
            }
            if let Some(s) = loglog_slope(&xs, &ys) {
                r.note_f("slope", s);
            }
        }
    }
    Ok(r)
}

fn dispatch(cli: &Cli, cache: &Cache) -> Result<Report> {
    match &cli.command {
        Command::Exponents(a) => exponents(a),
        Command::Repcount(a) => repcount(a, cache),
        Command::Maximal(a) => maximal(a),
        Command::Gauss(a) => gauss(a, cache),
        Command::Meanvalue(a) => meanvalue(a),
        Command::Arcs(a) => arcs(a),
        Command::Oscillatory(a) => oscillatory(a),
        Command::Multiplier(a) => multiplier(a),
    }
}

fn emit(cli: &Cli, report: &Report, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let csv = render_csv(&report.config, &report.table);
    let summary = render_summary(&report.config, &report.summary);
    if cli.out == "-" {
        stdout.write_all(csv.as_bytes())?;
        stderr.write_all(summary.as_bytes())?;
    } else {
        let path = Path::new(&cli.out);
        write_atomic(path, csv.as_bytes())?;
        write_atomic(&summary_path(path), summary.as_bytes())?;
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the experiment and returns the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let cache = if cli.no_cache {
        Cache::disabled()
    } else {
        let dir = cli
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("cache"));
        Cache::new(dir)
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(stderr, "error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_INTERNAL;
        }
    };
    let dispatched = pool.install(|| dispatch(&cli, &cache));
    for msg in cache.take_messages() {
        let _ = writeln!(stderr, "{msg}");
    }
    let result = dispatched.and_then(|mut report| {
        for msg in &report.notices {
            let _ = writeln!(stderr, "{msg}");
        }
        if let Some(t) = cli.threads {
            report.config.set("threads", t);
        }
        emit(&cli, &report, stdout, stderr)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_refusal() {
                EXIT_REFUSAL
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

