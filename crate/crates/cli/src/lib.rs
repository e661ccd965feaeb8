//! Command-line frontend for `mvgamma`. [`run`] parses arguments, dispatches
//! and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvgamma::bounds::{
    check_orthant_inequality, check_three_event_inequalities, excess_three_block, excess_two_block, power_bound,
    EngineEvaluator, EngineKind, MonteCarloEvaluator, Partition,
};
use mvgamma::converge::{max_rho_sq, sufficient_condition, ThetaTilde};
use mvgamma::corrstruct::{find_signature, fit_block_factors, is_m_matrix, one_factorial_exact, three_block_mmatrix_condition, tree_structure, Assemble};
use mvgamma::engines::{
    cdf_one_factorial, cdf_three_block, cdf_tree, cdf_two_block, three_block_spectral_radius, EvalPoint, ThreeBlockSeriesParams,
    ThreeBlockVariant,
};
use mvgamma::oracle::{lt_formula, mc_cdf, mc_laplace, sample_chi_square, sample_one_factorial, write_batch, COUNTEREXAMPLE_SAMPLES, DEFAULT_SAMPLES};
use mvgamma::{CorrelationMatrix, Error, Result, SeriesValue, Tolerance};
use serde_json::{json, Map, Value};

pub mod detect;
pub mod input;
mod verify;

use detect::{detect, Detected, StructureKind};
use input::{bad, inline_matrix, read_matrix, Blocks, List, Sizes};

/// Environment variable with the default worker thread count.
pub const THREADS_ENV: &str = "MVGAMMA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mvgamma", version, about = "Multivariate gamma and chi-square cdfs, excess bounds and Monte Carlo checks")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Direct,
    Rearranged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    ThreeEventCounterexample,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// Correlation matrix file: dimension on the first line, then the rows; `#` starts a comment.
    #[arg(long, conflicts_with = "inline")]
    matrix: Option<PathBuf>,
    /// Correlation matrix inline, rows separated by `;` and entries by `,`.
    #[arg(long)]
    inline: Option<String>,
}

impl MatrixArgs {
    fn load(&self) -> Result<CorrelationMatrix> {
        match (&self.matrix, &self.inline) {
            (Some(p), _) => read_matrix(p),
            (None, Some(s)) => inline_matrix(s),
            (None, None) => Err(bad("a correlation matrix is required (--matrix or --inline)")),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cdf F(x; alpha, R) of the multivariate gamma distribution.
    ///
    /// The structure of R is detected in the order one-factorial (single
    /// integral over the common factor), tree (nested integration of the
    /// tree density), two-block (Laguerre series, merged one-factorial
    /// integral at |theta| = 1, two-factorial integral beyond) and three-block
    /// (three-block Laguerre series). --structure forces one of them.
    Cdf {
        #[command(flatten)]
        m: MatrixArgs,
        /// Upper limits x_1,...,x_n; `inf` marginalizes a coordinate.
        #[arg(long)]
        x: List,
        /// Shape alpha; the chi-square case is alpha = nu/2.
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = StructureKind::Auto)]
        structure: StructureKind,
        /// Block sizes for block structures, e.g. 2,3.
        #[arg(long)]
        blocks: Option<Sizes>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Largest total degree of the three-block series.
        #[arg(long, default_value_t = 200)]
        max_degree: usize,
        /// Arrangement of the three-block series.
        #[arg(long, value_enum, default_value_t = Variant::Direct)]
        variant: Variant,
    },
    /// Certified lower bound for the excess P(all) - product of block probabilities.
    ///
    /// Block factors are fitted below R. Two blocks use the two-block excess
    /// (Laguerre series without its constant term, or the two-factorial
    /// integral for theta > 1), three blocks the three-block series without
    /// its constant term. With --power-b the power bound for one-factorial
    /// matrices is used instead.
    Excess {
        #[command(flatten)]
        m: MatrixArgs,
        #[arg(long)]
        x: List,
        #[arg(long)]
        alpha: f64,
        /// Consecutive block sizes, two or three of them.
        #[arg(long)]
        blocks: Sizes,
        /// Truncation vector b >= x for the power bound.
        #[arg(long)]
        power_b: Option<List>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_degree: usize,
    },
    /// Monte Carlo certificates for the orthant inequality and the three-event inequalities.
    ///
    /// For each partition the orthant inequality P(all) >= product of block
    /// probabilities is checked. With three blocks the two three-event forms
    /// (the cancelling form and the three-event sum) are checked as well.
    Check {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[command(flatten)]
        m: MatrixArgs,
        #[arg(long)]
        x: Option<List>,
        /// Shape with 2*alpha a positive integer.
        #[arg(long)]
        alpha: Option<f64>,
        /// Partition of 1-based indices, e.g. 1,2|3 or 1|2|3.
        #[arg(long)]
        partition: Option<Blocks>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Standard errors required for a verdict.
        #[arg(long, default_value_t = 3.5)]
        k: f64,
    },
    /// Fit block factors below R and report the block-factor constraints.
    ///
    /// Reports the fitted loadings and cross factors, the binding entries,
    /// the two-block bound on |theta|, and for three blocks the M-matrix
    /// condition, the scaled correlations and the convergence maximum.
    Fit {
        #[command(flatten)]
        m: MatrixArgs,
        #[arg(long)]
        blocks: Sizes,
    },
    /// Maximum of rho^2 over the circles, the convergence criterion of the three-block series.
    ///
    /// Given block factors theta_1..3 and block radii d_1..3 the scaled
    /// correlations theta_i sqrt(d_j d_k) are formed, the stationary points
    /// are solved and checked against a grid, and the sufficient condition
    /// on the scaled correlations is reported.
    Maxrho {
        #[arg(long)]
        theta: List,
        #[arg(long)]
        d: List,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// M-matrix and signature analysis of the inverse of R.
    Mmatrix {
        #[command(flatten)]
        m: MatrixArgs,
    },
    /// Draw a Monte Carlo batch of the gamma vector.
    ///
    /// Integer nu uses sums of squared Gaussians; --alpha uses the
    /// one-factorial construction with gamma mixing and needs a one-factorial R.
    Sample {
        #[command(flatten)]
        m: MatrixArgs,
        #[arg(long, conflicts_with = "alpha")]
        nu: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the batch in binary column format.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Estimate the cdf at x.
        #[arg(long)]
        x: Option<List>,
        /// Compare the Laplace transform at t with the determinant formula.
        #[arg(long)]
        t: Option<List>,
    },
    /// Cross-validation suite: closed forms, engines against each other and against the sampler.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Result of a command: the document to print and whether it reports a failure.
struct Report {
    doc: Value,
    exit: i32,
}

impl From<Value> for Report {
    fn from(doc: Value) -> Self {
        Report { doc, exit: 0 }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain { .. } | Error::Precondition { .. } => 1,
        Error::NonConvergence { .. } => 2,
        Error::BadInput { .. } => 3,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| bad(format!("{THREADS_ENV} must be a thread count, got '{v}'")))?;
    // A pool may already exist when run is called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit code: 0 on success, 1 on
/// a domain or precondition error, 2 on non-convergence, 3 on bad input.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| dispatch(cli.command));
    match result {
        Ok(report) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.doc).expect("json") + "\n",
                Format::Text => render_text(&report.doc),
            };
            let _ = out.write_all(text.as_bytes());
            report.exit
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().any(Value::is_array) => a.iter().map(render_value).collect::<Vec<_>>().join("; "),
        Value::Array(a) if a.iter().all(|x| !x.is_object()) => a.iter().map(render_value).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}

fn render_into(out: &mut String, prefix: &str, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_into(out, &key, x);
            }
        }
        Value::Array(a) if a.iter().any(Value::is_object) => {
            for (i, x) in a.iter().enumerate() {
                render_into(out, &format!("{prefix}[{}]", i + 1), x);
            }
        }
        _ => out.push_str(&format!("{prefix}: {}\n", render_value(v))),
    }
}

fn render_text(v: &Value) -> String {
    let mut s = String::new();
    render_into(&mut s, "", v);
    s
}

fn same_dim(len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::Domain { module: "cli", msg: format!("point has {len} coordinates, matrix has dimension {n}") });
    }
    Ok(())
}

fn tolerance(tol: f64) -> Result<Tolerance> {
    Tolerance::new(tol, tol, 2_000).map_err(|_| bad(format!("tolerance must lie in (0, 1), got {tol}")))
}

fn series_json(v: &SeriesValue<f64>) -> Value {
    json!({ "value": v.value, "error_estimate": v.abs_error_estimate, "terms": v.terms_used, "converged": v.converged })
}

fn matrix_json(m: &mvgamma::Matrix) -> Value {
    Value::Array((0..m.n()).map(|i| json!((0..m.n()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

fn structure_json(d: &Detected) -> Value {
    match d {
        Detected::OneFactorial(s) => json!({ "kind": d.name(), "a": s.a() }),
        Detected::Tree(t) => json!({ "kind": d.name(), "edges": t.edges.iter().map(|&(i, j, _)| [i + 1, j + 1]).collect::<Vec<_>>() }),
        Detected::Block(s) => json!({ "kind": d.name(), "blocks": s.block_sizes(), "a": s.a(), "theta": matrix_json(s.theta()) }),
    }
}

fn cdf(
    r: &CorrelationMatrix,
    x: &[f64],
    alpha: f64,
    kind: StructureKind,
    sizes: Option<&[usize]>,
    tol: &Tolerance,
    max_degree: usize,
    variant: Variant,
) -> Result<Report> {
    let p = EvalPoint::new(x.to_vec(), alpha)?;
    same_dim(x.len(), r.n())?;
    if x.iter().any(|v| v.is_infinite()) {
        // Marginalize: drop the coordinates at infinity first.
        let kept: Vec<usize> = (0..x.len()).filter(|&i| x[i].is_finite()).collect();
        if kept.is_empty() {
            return Ok(json!({ "value": 1.0, "structure": "none", "converged": true }).into());
        }
        let xs: Vec<f64> = kept.iter().map(|&i| x[i]).collect();
        let mut rep = cdf(&r.submatrix(&kept), &xs, alpha, kind, None, tol, max_degree, variant)?;
        rep.doc["marginal"] = json!(kept.iter().map(|i| i + 1).collect::<Vec<_>>());
        return Ok(rep);
    }
    let d = detect(r, kind, sizes)?;
    let (method, v) = match &d {
        Detected::OneFactorial(s) => ("one-factorial integral", cdf_one_factorial(&p, s, tol)?),
        Detected::Tree(t) => ("tree integration", cdf_tree(&p, t, tol)?),
        Detected::Block(s) if s.p() == 2 => {
            let (route, v) = cdf_two_block(&p, s, tol)?;
            let name = match route {
                mvgamma::engines::TwoBlockRoute::MergedOneFactorial => "merged one-factorial integral",
                mvgamma::engines::TwoBlockRoute::Laguerre => "two-block Laguerre series",
                mvgamma::engines::TwoBlockRoute::TwoFactorial => "two-factorial integral",
                mvgamma::engines::TwoBlockRoute::TwoFactorialHalf => "two-factorial integral at shape 1/2",
            };
            (name, v)
        }
        Detected::Block(s) => {
            let v = match variant {
                Variant::Direct => ThreeBlockVariant::Direct,
                Variant::Rearranged => ThreeBlockVariant::Rearranged,
            };
            let params = ThreeBlockSeriesParams::new(s.clone(), *tol, max_degree, v)?;
            ("three-block Laguerre series", cdf_three_block(&p, &params)?)
        }
    };
    let doc = json!({ "structure": structure_json(&d), "method": method, "alpha": alpha, "x": x, "result": series_json(&v) });
    Ok(Report { doc, exit: if v.converged { 0 } else { 2 } })
}

fn cert_json(c: &mvgamma::bounds::InequalityCertificate) -> Value {
    serde_json::to_value(c).expect("certificate serializes")
}

fn excess(r: &CorrelationMatrix, x: &[f64], alpha: f64, sizes: &[usize], b: Option<&[f64]>, tol: &Tolerance, max_degree: usize) -> Result<Report> {
    let p = EvalPoint::new(x.to_vec(), alpha)?;
    same_dim(x.len(), r.n())?;
    let part = Partition::consecutive(sizes)?;
    if let Some(b) = b {
        let f = one_factorial_exact(r, 1e-10).ok_or_else(|| Error::Precondition {
            module: "cli",
            msg: "the power bound is evaluated for one-factorial matrices only".into(),
        })?;
        let ev = |al| EngineEvaluator::new(EngineKind::OneFactorial(f.clone()), al, *tol);
        let c = power_bound(&p, b, &ev(0.5)?, &ev(alpha)?, &part)?;
        return Ok(json!({ "bound": "power bound", "certificate": cert_json(&c) }).into());
    }
    let (s, slack) = fit_block_factors(r, sizes)?;
    let c = match sizes.len() {
        2 => excess_two_block(&p, r, &s, tol)?,
        3 => excess_three_block(&p, &ThreeBlockSeriesParams::new(s.clone(), *tol, max_degree, ThreeBlockVariant::Direct)?)?,
        k => return Err(Error::Domain { module: "cli", msg: format!("excess needs two or three blocks, got {k}") }),
    };
    let fitted = Detected::Block(s);
    Ok(json!({
        "bound": if sizes.len() == 2 { "two-block excess" } else { "three-block excess" },
        "fitted": structure_json(&fitted),
        "max_slack": slack.max_slack,
        "certificate": cert_json(&c),
    })
    .into())
}

const COUNTEREXAMPLE: [[f64; 3]; 3] = [[1.0, 0.75, 0.5], [0.75, 1.0, 0.0], [0.5, 0.0, 1.0]];
/// Thresholds 5.2, 5.6, 6.0 for Z², on the gamma scale X = Z²/2.
const COUNTEREXAMPLE_X: [f64; 3] = [2.6, 2.8, 3.0];

#[allow(clippy::too_many_arguments)]
fn check(
    preset: Option<Preset>,
    m: &MatrixArgs,
    x: Option<&[f64]>,
    alpha: Option<f64>,
    partition: Option<&[Vec<usize>]>,
    samples: Option<u64>,
    seed: u64,
    k: f64,
) -> Result<Report> {
    let (r, x, alpha, samples) = match preset {
        Some(Preset::ThreeEventCounterexample) => (
            CorrelationMatrix::from_rows(&COUNTEREXAMPLE.map(|r| r.to_vec()))?,
            COUNTEREXAMPLE_X.to_vec(),
            0.5,
            samples.unwrap_or(COUNTEREXAMPLE_SAMPLES),
        ),
        None => (
            m.load()?,
            x.ok_or_else(|| bad("--x is required without --preset"))?.to_vec(),
            alpha.ok_or_else(|| bad("--alpha is required without --preset"))?,
            samples.unwrap_or(DEFAULT_SAMPLES),
        ),
    };
    let n = r.n();
    let two = 2.0 * alpha;
    if (two - two.round()).abs() > 1e-12 || two.round() < 1.0 {
        return Err(Error::Precondition { module: "cli", msg: format!("Monte Carlo checks need 2*alpha a positive integer, got {two}") });
    }
    let p = EvalPoint::new(x.clone(), alpha)?;
    same_dim(x.len(), n)?;
    let blocks: Vec<Vec<usize>> = match partition {
        Some(b) => b.to_vec(),
        None if n == 3 => vec![vec![0], vec![1], vec![2]],
        None => return Err(bad("--partition is required for matrices of dimension other than 3")),
    };
    let ev = MonteCarloEvaluator::new(sample_chi_square(&r, two.round() as usize, samples, seed)?, alpha);
    let mut orthant = Vec::new();
    if blocks.len() == 3 {
        // Each block against the union of the other two.
        for j in 0..3 {
            let rest: Vec<usize> = blocks.iter().enumerate().filter(|&(i, _)| i != j).flat_map(|(_, b)| b.clone()).collect();
            let part = Partition::new(vec![blocks[j].clone(), rest], n)?;
            orthant.push(cert_json(&check_orthant_inequality(&ev, &p, &part)?.with_k(k)));
        }
    } else {
        orthant.push(cert_json(&check_orthant_inequality(&ev, &p, &Partition::new(blocks.clone(), n)?)?.with_k(k)));
    }
    let mut doc = Map::new();
    if let Some(pr) = preset {
        doc.insert("preset".into(), json!(pr.to_possible_value().map(|v| v.get_name().to_string())));
    }
    doc.insert("samples".into(), json!(samples));
    doc.insert("seed".into(), json!(seed));
    doc.insert("orthant".into(), Value::Array(orthant));
    if blocks.len() == 3 {
        let (c1, c2) = check_three_event_inequalities(&ev, &p, &Partition::new(blocks, n)?)?;
        doc.insert("cancelling_form".into(), cert_json(&c1.with_k(k)));
        doc.insert("three_event_sum".into(), cert_json(&c2.with_k(k)));
    }
    Ok(Value::Object(doc).into())
}

fn fit(r: &CorrelationMatrix, sizes: &[usize]) -> Result<Report> {
    let (s, slack) = fit_block_factors(r, sizes)?;
    let mut doc = Map::new();
    doc.insert("fitted".into(), structure_json(&Detected::Block(s.clone())));
    let pairs = |v: &[(usize, usize)]| json!(v.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>());
    doc.insert(
        "slack".into(),
        json!({
            "block_scale": slack.block_scale,
            "binding": pairs(&slack.binding),
            "capped_theta": pairs(&slack.capped_theta),
            "max_slack": slack.max_slack,
        }),
    );
    match s.p() {
        2 => {
            let bound = s.two_block_theta_bound();
            doc.insert("theta_bound".into(), json!(bound));
            doc.insert("theta_within_bound".into(), json!(s.theta12().abs() <= bound));
        }
        3 => {
            let th = s.theta_triple();
            let q = [s.q(0), s.q(1), s.q(2)];
            let mm = if th.iter().all(|&t| t > 0.0 && t < 1.0) {
                three_block_mmatrix_condition(th, q)
            } else {
                is_m_matrix(&s.assemble()?.inverse(), 1e-12)
            };
            doc.insert("inverse_is_m_matrix".into(), json!(mm));
            let tt = ThetaTilde::from_structure(&s)?;
            doc.insert("scaled_theta".into(), json!(tt.values));
            doc.insert("sufficient_condition".into(), json!(sufficient_condition(&tt)));
            let m = max_rho_sq(&tt, 1e-8)?;
            doc.insert("max_rho_sq".into(), json!(m.max_rho_sq));
            doc.insert("rearranged_spectral_radius".into(), json!(three_block_spectral_radius(&s)?));
        }
        _ => {}
    }
    Ok(Value::Object(doc).into())
}

fn maxrho(theta: &[f64], d: &[f64], tol: f64) -> Result<Report> {
    let (Ok(th), Ok(d)) = (<[f64; 3]>::try_from(theta), <[f64; 3]>::try_from(d)) else {
        return Err(bad("--theta and --d take three values each"));
    };
    let pair = [(1, 2), (0, 2), (0, 1)];
    let values: [f64; 3] = std::array::from_fn(|i| th[i] * (d[pair[i].0] * d[pair[i].1]).sqrt());
    let tt = ThetaTilde::new(values, d)?;
    let m = max_rho_sq(&tt, tol)?;
    let doc = json!({
        "scaled_theta": values,
        "max_rho_sq": m.max_rho_sq,
        "argmax": m.argmax_t,
        "grid_max": m.grid_max,
        "below_one": m.max_rho_sq < 1.0,
        "sufficient_condition": sufficient_condition(&tt),
        "converged": m.converged,
    });
    Ok(Report { doc, exit: if m.converged { 0 } else { 2 } })
}

fn mmatrix(r: &CorrelationMatrix) -> Result<Report> {
    let inv = r.inverse();
    let sig = find_signature(r)?;
    let tree = tree_structure(r, None);
    Ok(json!({
        "dimension": r.n(),
        "inverse_is_m_matrix": is_m_matrix(&inv, 1e-12),
        "signature": sig.map(|s| s.signs.clone()),
        "tree_edges": tree.map(|t| t.edges.iter().map(|&(i, j, _)| [i + 1, j + 1]).collect::<Vec<_>>()),
        "one_factorial": one_factorial_exact(r, 1e-10).map(|f| f.a().to_vec()),
        "inverse": matrix_json(&inv),
    })
    .into())
}

#[allow(clippy::too_many_arguments)]
fn sample(
    r: &CorrelationMatrix,
    nu: Option<usize>,
    alpha: Option<f64>,
    samples: u64,
    seed: u64,
    out: Option<&std::path::Path>,
    x: Option<&[f64]>,
    t: Option<&[f64]>,
) -> Result<Report> {
    let (batch, shape) = match (nu, alpha) {
        (Some(nu), _) => (sample_chi_square(r, nu, samples, seed)?, nu as f64 / 2.0),
        (None, Some(a)) => {
            let f = one_factorial_exact(r, 1e-10).ok_or_else(|| Error::Precondition {
                module: "cli",
                msg: "sampling at arbitrary shape needs a one-factorial matrix".into(),
            })?;
            (sample_one_factorial(&f, a, samples, seed)?, a)
        }
        (None, None) => return Err(bad("either --nu or --alpha is required")),
    };
    let mut doc = Map::new();
    doc.insert("alpha".into(), json!(shape));
    doc.insert("samples".into(), json!(samples));
    doc.insert("seed".into(), json!(seed));
    if let Some(path) = out {
        let file = std::fs::File::create(path).map_err(|e| bad(format!("cannot create {}: {e}", path.display())))?;
        write_batch(&batch, std::io::BufWriter::new(file)).map_err(|e| bad(format!("cannot write {}: {e}", path.display())))?;
        doc.insert("written".into(), json!(path.display().to_string()));
    }
    if let Some(x) = x {
        let e = mc_cdf(&batch, x)?;
        doc.insert("cdf".into(), json!({ "x": x, "mean": e.mean, "std_error": e.std_error }));
    }
    if let Some(t) = t {
        let e = mc_laplace(&batch, t)?;
        let exact = lt_formula(r, shape, t)?;
        doc.insert(
            "laplace".into(),
            json!({ "t": t, "mean": e.mean, "std_error": e.std_error, "formula": exact, "z": (e.mean - exact) / e.std_error }),
        );
    }
    Ok(Value::Object(doc).into())
}

fn dispatch(cmd: Command) -> Result<Report> {
    match cmd {
        Command::Cdf { m, x, alpha, structure, blocks, tol, max_degree, variant } => {
            cdf(&m.load()?, &x.0, alpha, structure, blocks.as_ref().map(|b| b.0.as_slice()), &tolerance(tol)?, max_degree, variant)
        }
        Command::Excess { m, x, alpha, blocks, power_b, tol, max_degree } => {
            excess(&m.load()?, &x.0, alpha, &blocks.0, power_b.as_ref().map(|b| b.0.as_slice()), &tolerance(tol)?, max_degree)
        }
        Command::Check { preset, m, x, alpha, partition, samples, seed, k } => check(
            preset,
            &m,
            x.as_ref().map(|v| v.0.as_slice()),
            alpha,
            partition.as_ref().map(|b| b.0.as_slice()),
            samples,
            seed,
            k,
        ),
        Command::Fit { m, blocks } => fit(&m.load()?, &blocks.0),
        Command::Maxrho { theta, d, tol } => maxrho(&theta.0, &d.0, tol),
        Command::Mmatrix { m } => mmatrix(&m.load()?),
        Command::Sample { m, nu, alpha, samples, seed, out, x, t } => sample(
            &m.load()?,
            nu,
            alpha,
            samples,
            seed,
            out.as_deref(),
            x.as_ref().map(|v| v.0.as_slice()),
            t.as_ref().map(|v| v.0.as_slice()),
        ),
        Command::Verify { samples, seed } => verify::run(samples, seed),
    }
}
