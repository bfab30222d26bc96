//! Command-line front end: variance curves, the three-window comparison,
//! identity checks, and field simulation, all emitting reproducible CSV.

use clap::{Args, Parser, Subcommand};
use hwl::analysis::{CovarianceModel, KernelParams};
use hwl::geometry::Window;
use hwl::riesz::{self, VarianceMethod};
use hwl::{crofton, fieldsim, spectral, Error};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hwl", version, about = "Increment variances of Hermite-type limit processes over multidimensional windows", max_term_width = 100)]
struct Cli {
    /// Optional key=value config file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed (fallback: HWL_SEED environment variable, then 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread cap (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (or directory for fig2); default: stdout
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct CurveArgs {
    /// Observation window: interval | disk | square | ball3 | cube3
    #[arg(long)]
    window: Option<String>,
    /// Covariance tail exponent, in (0, n/kappa)
    #[arg(long)]
    alpha: Option<f64>,
    /// Hermite rank
    #[arg(long)]
    kappa: Option<usize>,
    /// Increment size in the volume parameter
    #[arg(long)]
    h: Option<f64>,
    /// Smallest s of the curve
    #[arg(long)]
    s_min: Option<f64>,
    /// Largest s of the curve
    #[arg(long)]
    s_max: Option<f64>,
    /// Number of s grid points
    #[arg(long)]
    s_steps: Option<usize>,
    /// exact1d | spectral | mc
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo pair count (scientific notation accepted)
    #[arg(long)]
    samples: Option<f64>,
    /// Spectral quadrature cells per axis
    #[arg(long)]
    grid_m: Option<usize>,
    /// Spectral truncation radius
    #[arg(long)]
    lambda_max: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Variance of Y(s+h) − Y(s) over a grid of s
    VarianceCurve(CurveArgs),
    /// The three-window comparison: interval (constant curve) vs disk and
    /// square (decreasing curves); writes one CSV per window
    Fig2 {
        /// exact1d+spectral (default) | mc
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        samples: Option<f64>,
    },
    /// Mean-value identity residual: boundary-conditioned means vs the
    /// finite-difference derivative of the shell moment
    CroftonCheck {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        /// Riesz exponent κα
        #[arg(long)]
        kalpha: Option<f64>,
        #[arg(long)]
        samples: Option<f64>,
    },
    /// Shell moment E‖U−V‖^{−κα} by Monte Carlo
    Moment {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        kalpha: Option<f64>,
        #[arg(long)]
        samples: Option<f64>,
    },
    /// Simulate long-range dependent Gaussian fields and report the
    /// empirical increment-variance curve of the window functional
    Simulate {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        kappa: Option<usize>,
        /// Observation scale (window Δ(s) lives at radius r)
        #[arg(long)]
        r: Option<f64>,
        /// Grid nodes per axis
        #[arg(long)]
        side: Option<usize>,
        /// Grid spacing
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        s_min: Option<f64>,
        #[arg(long)]
        s_max: Option<f64>,
        #[arg(long)]
        s_steps: Option<usize>,
        /// Also dump each realization as a binary field file next to the CSV
        #[arg(long, default_value_t = false)]
        dump_fields: bool,
    },
    /// Lower/upper shell-energy bounds behind the non-stationarity proof
    Bounds {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        kappa: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        t_large: Option<f64>,
        #[arg(long)]
        samples: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) => ExitCode::from(2),
                Error::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

fn internal(msg: String) -> ! {
    eprintln!("internal error: {msg}");
    std::process::exit(4)
}

/// key=value config file; '#' comments and blank lines allowed.
fn load_config(path: Option<&Path>) -> hwl::Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let Some(path) = path else { return Ok(map) };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Domain(format!(
                "config line {} is not key=value: {line:?}",
                lineno + 1
            )));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    file: HashMap<String, String>,
}

impl Resolver {
    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> hwl::Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Domain(format!("config key {key}: cannot parse {s:?}"))),
            None => Ok(default),
        }
    }

    fn get_opt<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> hwl::Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Domain(format!("config key {key}: cannot parse {s:?}"))),
            None => Ok(None),
        }
    }
}

fn parse_window(name: &str) -> hwl::Result<Window> {
    match name {
        "interval" => Ok(Window::Interval),
        "disk" => Window::ball(2),
        "square" => Window::cube(2),
        "ball3" => Window::ball(3),
        "cube3" => Window::cube(3),
        other => {
            // disk@cx,cy: homothety center for the off-center disk
            if let Some(rest) = other.strip_prefix("disk@") {
                let parts: Vec<f64> = rest
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Domain(format!("bad disk center: {rest:?}")))?;
                if parts.len() != 2 {
                    return Err(Error::Domain("disk center needs two coordinates".into()));
                }
                return Window::ball_offcenter(2, &parts);
            }
            Err(Error::Domain(format!(
                "unknown window {other:?} (expected interval|disk|square|ball3|cube3|disk@cx,cy)"
            )))
        }
    }
}

fn samples_count(v: f64) -> hwl::Result<usize> {
    if !(v >= 1.0) || v > 1e12 {
        return Err(Error::Domain(format!("bad sample count {v}")));
    }
    Ok(v.round() as usize)
}

/// 12 significant digits, '.' decimal separator, locale-independent.
fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:.11e}");
    // normalize "1.23400000000e2" style; keep scientific to stay exact
    s
}

struct CsvDoc {
    header: Vec<(String, String)>,
    rows: Vec<String>,
}

impl CsvDoc {
    fn new(cmd: &str) -> CsvDoc {
        CsvDoc { header: vec![("command".into(), cmd.into())], rows: Vec::new() }
    }

    fn kv(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.header.push((k.into(), v.to_string()));
        self
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        s: f64,
        h: f64,
        variance: f64,
        stderr: f64,
        method: &str,
        window: &str,
        alpha: f64,
        kappa: usize,
        seed: u64,
    ) {
        self.rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            sig12(s),
            sig12(h),
            sig12(variance),
            sig12(stderr),
            method,
            window,
            sig12(alpha),
            kappa,
            seed
        ));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("s,h,variance,stderr,method,window,alpha,kappa,seed\n");
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    fn emit(&self, path: Option<&Path>) -> hwl::Result<()> {
        let text = self.render();
        match path {
            Some(p) => fs::write(p, text)
                .map_err(|e| Error::Domain(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn s_grid(min: f64, max: f64, steps: usize) -> hwl::Result<Vec<f64>> {
    if steps == 0 || max < min || min < 0.0 {
        return Err(Error::Domain(format!("bad s grid: [{min}, {max}] × {steps}")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let d = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| min + i as f64 * d).collect())
}

fn run(cli: Cli) -> hwl::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Domain("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .unwrap_or_else(|e| internal(format!("thread pool: {e}")));
    }
    let r = Resolver { file: load_config(cli.config.as_deref())? };
    let seed = match r.get_opt(cli.seed, "seed")? {
        Some(s) => s,
        None => match std::env::var("HWL_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| Error::Domain(format!("HWL_SEED is not an integer: {v:?}")))?,
            Err(_) => 0,
        },
    };
    let out = cli.output.as_deref();

    match cli.cmd {
        Cmd::VarianceCurve(a) => cmd_variance_curve(&r, a, seed, out),
        Cmd::Fig2 { method, samples } => cmd_fig2(&r, method, samples, seed, out),
        Cmd::CroftonCheck { window, t, h, kalpha, samples } => {
            let window = parse_window(&r.get(window, "window", "disk".into())?)?;
            let t = r.get(t, "t", 0.25)?;
            let h = r.get(h, "h", 0.1)?;
            let kalpha = r.get(kalpha, "kalpha", 1.0)?;
            let samples = samples_count(r.get(samples, "samples", 1e6)?)?;
            let rep = crofton::crofton_residual(&window, t, h, kalpha, samples, seed)?;
            let pass = rep.residual_sigmas.abs() <= 4.0;
            let mut doc = CsvDoc::new("crofton-check");
            doc.kv("window", window.name())
                .kv("t", sig12(t))
                .kv("h", sig12(h))
                .kv("kalpha", sig12(kalpha))
                .kv("samples", samples)
                .kv("seed", seed)
                .kv("rhs", sig12(rep.rhs.value))
                .kv("fd", sig12(rep.fd.value))
                .kv("residual_sigmas", sig12(rep.residual_sigmas))
                .kv("pass", pass);
            doc.row(
                t,
                h,
                rep.residual,
                rep.rhs.stderr.hypot(rep.fd.stderr),
                "monte-carlo",
                &window.name(),
                kalpha,
                1,
                seed,
            );
            doc.emit(out)
        }
        Cmd::Moment { window, t, h, kalpha, samples } => {
            let window = parse_window(&r.get(window, "window", "disk".into())?)?;
            let t = r.get(t, "t", 0.0)?;
            let h = r.get(h, "h", 1.0)?;
            let kalpha = r.get(kalpha, "kalpha", 1.0)?;
            let samples = samples_count(r.get(samples, "samples", 1e6)?)?;
            let shell = window.shell(t, h)?;
            let est = riesz::mean_riesz(&shell, kalpha, samples, seed)?;
            let mut doc = CsvDoc::new("moment");
            doc.kv("window", window.name())
                .kv("t", sig12(t))
                .kv("h", sig12(h))
                .kv("kalpha", sig12(kalpha))
                .kv("samples", samples)
                .kv("seed", seed);
            doc.row(t, h, est.value, est.stderr, est.method.label(), &window.name(), kalpha, 1, seed);
            doc.emit(out)
        }
        Cmd::Bounds { window, alpha, kappa, h, t_large, samples } => {
            let window = parse_window(&r.get(window, "window", "disk".into())?)?;
            let alpha = r.get(alpha, "alpha", 1.0)?;
            let kappa = r.get(kappa, "kappa", 1)?;
            let h = r.get(h, "h", 0.1)?;
            let t_large = r.get(t_large, "t_large", 100.0)?;
            let samples = samples_count(r.get(samples, "samples", 1e6)?)?;
            let params = KernelParams::new(window.dim(), kappa, alpha)?;
            let rep = riesz::bound_check(&window, &params, h, t_large, samples, seed)?;
            let mut doc = CsvDoc::new("bounds");
            doc.kv("window", window.name())
                .kv("alpha", sig12(alpha))
                .kv("kappa", kappa)
                .kv("h", sig12(h))
                .kv("t_large", sig12(t_large))
                .kv("samples", samples)
                .kv("seed", seed)
                .kv("lower_ok", rep.lower_ok)
                .kv("upper_ok", rep.upper_ok)
                .kv("lower_margin_sigmas", sig12(rep.lower_margin))
                .kv("upper_margin_sigmas", sig12(rep.upper_margin))
                .kv("lower_bound", sig12(rep.lower_bound))
                .kv("upper_bound", sig12(rep.upper_bound))
                .kv("epsilon", sig12(rep.epsilon))
                .kv("preasymptotic", rep.preasymptotic);
            doc.row(0.0, h, rep.i_zero.value, rep.i_zero.stderr, "monte-carlo", &window.name(), alpha, kappa, seed);
            doc.row(t_large, h, rep.i_large.value, rep.i_large.stderr, "monte-carlo", &window.name(), alpha, kappa, seed);
            doc.emit(out)
        }
        Cmd::Simulate {
            window,
            alpha,
            kappa,
            r: robs,
            side,
            spacing,
            replicates,
            h,
            s_min,
            s_max,
            s_steps,
            dump_fields,
        } => {
            let window = parse_window(&r.get(window, "window", "disk".into())?)?;
            let alpha = r.get(alpha, "alpha", 1.0)?;
            let kappa = r.get(kappa, "kappa", 1)?;
            let robs = r.get(robs, "r", 50.0)?;
            let side = r.get(side, "side", 256)?;
            let spacing = r.get(spacing, "spacing", 0.5)?;
            let replicates = r.get(replicates, "replicates", 200)?;
            let h = r.get(h, "h", 0.02)?;
            let smin = r.get(s_min, "s_min", 0.0)?;
            let smax = r.get(s_max, "s_max", 0.96)?;
            let steps = r.get(s_steps, "s_steps", 9)?;
            let params = KernelParams::new(window.dim(), kappa, alpha)?;
            let spec = fieldsim::FieldSpec::new(
                window.dim(),
                side,
                spacing,
                CovarianceModel::Cauchy { alpha },
            )?;
            // grid must cover the largest window: radius r·scale(s_max+h)
            let extent = 0.5 * side as f64 * spacing;
            if robs * window.scale(smax + h) > extent {
                return Err(Error::Domain(format!(
                    "window at r={robs} (radius {:.3}) exceeds grid extent {extent}",
                    robs * window.scale(smax + h)
                )));
            }
            let grid = s_grid(smin, smax, steps)?;
            // increment variances: Var(Y(s+h) − Y(s)) over replicates
            let pts = fieldsim::empirical_variance_curve(
                &spec,
                &window,
                &params,
                robs,
                &grid,
                replicates,
                seed,
            )?;
            let inc = fieldsim::empirical_increment_variance_curve(
                &spec,
                &window,
                &params,
                robs,
                &grid,
                h,
                replicates,
                seed,
            )?;
            let mut doc = CsvDoc::new("simulate");
            doc.kv("window", window.name())
                .kv("alpha", sig12(alpha))
                .kv("kappa", kappa)
                .kv("r", sig12(robs))
                .kv("side", side)
                .kv("spacing", sig12(spacing))
                .kv("replicates", replicates)
                .kv("h", sig12(h))
                .kv("covariance", format!("cauchy({alpha})"))
                .kv("seed", seed);
            for p in &inc {
                doc.row(p.s, h, p.variance, p.stderr, "simulation", &window.name(), alpha, kappa, seed);
            }
            // absolute-level rows: Var Y(s) with h = 0 marker
            for p in &pts {
                doc.row(p.s, 0.0, p.variance, p.stderr, "simulation-level", &window.name(), alpha, kappa, seed);
            }
            if dump_fields {
                let dir = out
                    .map(|p| p.parent().unwrap_or(Path::new(".")).to_path_buf())
                    .unwrap_or_else(|| PathBuf::from("."));
                let fields = fieldsim::simulate(&spec, 2, seed)?;
                for (i, f) in fields.iter().enumerate() {
                    let path = dir.join(format!("field_{i}.lrdf"));
                    let mut fh = fs::File::create(&path).map_err(|e| {
                        Error::Domain(format!("cannot write {}: {e}", path.display()))
                    })?;
                    fieldsim::write_field(f, alpha, &mut fh)
                        .map_err(|e| Error::Domain(format!("write failed: {e}")))?;
                }
            }
            doc.emit(out)
        }
    }
}

fn curve_points(
    window: &Window,
    params: &KernelParams,
    grid: &[f64],
    h: f64,
    method: &str,
    samples: usize,
    spectral_grid: Option<spectral::SpectralGrid>,
    seed: u64,
) -> hwl::Result<Vec<(f64, riesz::Estimate)>> {
    let mut pts = Vec::with_capacity(grid.len());
    match method {
        "exact1d" => {
            for &s in grid {
                let est =
                    riesz::variance_increment(params, window, s, h, VarianceMethod::Exact1d, 0, 0)?;
                pts.push((s, est));
            }
        }
        "spectral" => {
            let g = spectral_grid.unwrap_or_else(|| spectral::default_grid(window));
            for &s in grid {
                pts.push((s, spectral::spectral_variance(params, window, s, h, &g)?));
            }
        }
        "mc" => {
            for (i, &s) in grid.iter().enumerate() {
                let est = riesz::variance_increment(
                    params,
                    window,
                    s,
                    h,
                    VarianceMethod::MonteCarlo,
                    samples,
                    hwl::rng::derive_seed(seed, i as u64),
                )?;
                pts.push((s, est));
            }
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown method {other:?} (expected exact1d|spectral|mc)"
            )))
        }
    }
    Ok(pts)
}

fn cmd_variance_curve(
    r: &Resolver,
    a: CurveArgs,
    seed: u64,
    out: Option<&Path>,
) -> hwl::Result<()> {
    let window = parse_window(&r.get(a.window, "window", "interval".into())?)?;
    let alpha = r.get(a.alpha, "alpha", if window.dim() == 1 { 0.6 } else { 1.0 })?;
    let kappa = r.get(a.kappa, "kappa", 1)?;
    let h = r.get(a.h, "h", 0.02)?;
    let smin = r.get(a.s_min, "s_min", 0.0)?;
    let smax = r.get(a.s_max, "s_max", 0.96)?;
    let steps = r.get(a.s_steps, "s_steps", ((smax - smin) / 0.02).round() as usize + 1)?;
    let method = r.get(a.method, "method", default_method(&window))?;
    let samples = samples_count(r.get(a.samples, "samples", 1e6)?)?;
    let grid_m = r.get_opt(a.grid_m, "grid_m")?;
    let lambda_max = r.get_opt(a.lambda_max, "lambda_max")?;
    let params = KernelParams::new(window.dim(), kappa, alpha)?;
    let sg = match (grid_m, lambda_max) {
        (Some(m), Some(l)) => Some(spectral::SpectralGrid::new(m, l)?),
        (None, None) => None,
        _ => {
            return Err(Error::Domain(
                "grid_m and lambda_max must be given together".into(),
            ))
        }
    };
    let grid = s_grid(smin, smax, steps)?;
    let pts = curve_points(&window, &params, &grid, h, &method, samples, sg, seed)?;
    let mut doc = CsvDoc::new("variance-curve");
    doc.kv("window", window.name())
        .kv("alpha", sig12(alpha))
        .kv("kappa", kappa)
        .kv("h", sig12(h))
        .kv("s_min", sig12(smin))
        .kv("s_max", sig12(smax))
        .kv("s_steps", steps)
        .kv("method", &method)
        .kv("samples", samples)
        .kv("seed", seed);
    if let Some(g) = sg {
        doc.kv("grid_m", g.m).kv("lambda_max", sig12(g.lambda_max));
    }
    for (s, est) in &pts {
        doc.row(*s, h, est.value, est.stderr, est.method.label(), &window.name(), alpha, kappa, seed);
    }
    doc.emit(out)
}

fn default_method(window: &Window) -> String {
    match window {
        Window::Interval => "exact1d".into(),
        Window::Ball { dim: 2, center } if center.iter().all(|&c| c == 0.0) => "spectral".into(),
        Window::Cube { dim: 2 } => "spectral".into(),
        _ => "mc".into(),
    }
}

fn cmd_fig2(
    r: &Resolver,
    method: Option<String>,
    samples: Option<f64>,
    seed: u64,
    out: Option<&Path>,
) -> hwl::Result<()> {
    let method = r.get(method, "method", "analytic".into())?;
    let samples = samples_count(r.get(samples, "samples", 1e6)?)?;
    let h = 0.02;
    let grid = s_grid(0.0, 0.96, 49)?;
    let dir = match out {
        Some(p) => {
            fs::create_dir_all(p)
                .map_err(|e| Error::Domain(format!("cannot create {}: {e}", p.display())))?;
            p.to_path_buf()
        }
        None => PathBuf::from("."),
    };
    for (name, window, alpha) in [
        ("interval", Window::Interval, 0.6),
        ("disk", Window::ball(2)?, 1.0),
        ("square", Window::cube(2)?, 1.0),
    ] {
        let params = KernelParams::new(window.dim(), 1, alpha)?;
        let m = match method.as_str() {
            "analytic" => {
                if window.dim() == 1 {
                    "exact1d".to_string()
                } else {
                    "spectral".to_string()
                }
            }
            "mc" => "mc".to_string(),
            other => {
                return Err(Error::Domain(format!(
                    "unknown fig2 method {other:?} (expected analytic|mc)"
                )))
            }
        };
        let pts = curve_points(&window, &params, &grid, h, &m, samples, None, seed)?;
        let mut doc = CsvDoc::new("fig2");
        doc.kv("window", window.name())
            .kv("alpha", sig12(alpha))
            .kv("kappa", 1)
            .kv("h", sig12(h))
            .kv("method", &m)
            .kv("samples", samples)
            .kv("seed", seed);
        for (s, est) in &pts {
            doc.row(*s, h, est.value, est.stderr, est.method.label(), &window.name(), alpha, 1, seed);
        }
        doc.emit(Some(&dir.join(format!("fig2_{name}.csv"))))?;
    }
    Ok(())
}
