//! `hsc-lab`: command-line front end for hsc-core.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsc_core::curvature::{curvature, MetricJet, PointGeometry};
use hsc_core::dsl::{catalog, ChartBox, CoordDomain, MetricSpec};
use hsc_core::lemmas;
use hsc_core::positivity::{find_negative_witness, scan_chart, DirectionSearch, ScanParams};
use hsc_core::warp::{self, Example1Params, FibrationSpec, LambdaSearchParams};
use hsc_core::{selftest, HscError, C64, VERSION};
use serde::Serialize;
use serde_json::{json, Value};

const CSV_HELP: &str = "\
CSV columns (--format csv):
  curvature  i,j,k,l,re,im              (0-based tensor indices)
  scan       index,z1_re,z1_im,...,min_hsc
  witness    z1_re,z1_im,...,xi1_re,xi1_im,...,hsc
  lemma1     n,s,K0,K1,K2_required,a,b,c,d,kcal
  lemma2     lambda,hsc                 (formula mode: lambda,formula,direct)
  warp       lambda,min_hsc             (search history, sorted by lambda)
  example1   lambda,hsc,z1_re,z1_im,z2_re,z2_im
  selftest   criterion,check,passed,measured,tolerance,detail";

#[derive(Parser, Serialize)]
#[command(name = "hsc-lab", version, about = "Holomorphic sectional curvature workbench", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Curvature tensor, and HSC when a direction is given.
    Curvature {
        #[command(flatten)]
        metric: MetricArgs,
        /// Point: comma-separated re,im pairs, or re:im / a+bi tokens.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled minimum HSC over a chart box.
    Scan {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a point and direction with negative HSC.
    Witness {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, default_value_t = 512)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Constants of the block-splitting estimate, with optional harness runs.
    Lemma1 {
        #[arg(long)]
        k0: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        /// Random hypothesis tensors to generate at K2 = Kcal·K1.
        #[arg(long, default_value_t = 0)]
        tensors: usize,
        /// Directions per tensor, and trials for the product inequalities.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// HSC of g + λh for one-dimensional metrics.
    Lemma2 {
        /// Catalog name or metric file for g.
        #[arg(long)]
        g: String,
        /// Catalog name or metric file for h.
        #[arg(long)]
        h: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        point: String,
        #[arg(long, value_enum, default_value_t = Lemma2Mode::Formula)]
        mode: Lemma2Mode,
        /// Comma-separated λ values (formula and decay modes).
        #[arg(long, default_value = "0.1,1,10,100")]
        lambdas: String,
        #[arg(long, default_value_t = 1e6)]
        lambda_max: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Warped metrics on a product-chart fibration.
    Warp {
        /// Fibration JSON file; the built-in demo fixture when absent.
        #[arg(long)]
        fibration: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WarpMode::Search)]
        mode: WarpMode,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value = "100,1000,10000,100000")]
        lambdas: String,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = warp::LAMBDA_MAX)]
        lambda_max: f64,
        #[arg(long, default_value_t = 8)]
        fibers: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Positive base and semi-positive fibers, yet negative HSC for every tested λ.
    Example1 {
        #[arg(long, default_value = "0.5,1,5,50")]
        lambdas: String,
        #[arg(long, default_value_t = 20)]
        fibers: usize,
        #[arg(long, default_value_t = 512)]
        budget: usize,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Full acceptance suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Serialize)]
struct MetricArgs {
    /// Catalog name, e.g. poincare, flat(3), paper_G(5).
    #[arg(long, conflicts_with = "metric", required_unless_present = "metric")]
    catalog: Option<String>,
    /// Metric JSON file {name, n, entries, box}.
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Box override as JSON, e.g. '[{"radius":0.5},{"re":[-1,1],"im":[0,1]}]'.
    #[arg(long = "box")]
    domain: Option<String>,
    /// Box override: polydisk of this radius.
    #[arg(long, conflicts_with = "domain")]
    radius: Option<f64>,
}

#[derive(Args, Serialize, Clone, Copy)]
struct ScanArgs {
    #[arg(long, default_value_t = 9)]
    grid: usize,
    /// Random points added to the grid.
    #[arg(long, default_value_t = 64)]
    random: usize,
    #[arg(long, default_value_t = 64)]
    dirs: usize,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
}

#[derive(Args, Serialize)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Lemma2Mode {
    Formula,
    Threshold,
    Decay,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WarpMode {
    Assemble,
    Mu0,
    Search,
    Asymptotics,
    Growth,
}

impl ScanArgs {
    fn params(&self, seed: u64) -> ScanParams {
        ScanParams {
            grid_per_axis: self.grid,
            random_points: self.random,
            search: DirectionSearch { dirs: self.dirs, starts: self.starts, max_iters: self.iters },
            seed,
        }
    }
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<HscError> for Failure {
    fn from(e: HscError) -> Self {
        match e {
            HscError::Parse { .. }
            | HscError::UnknownIdentifier(_)
            | HscError::VariableOutOfRange { .. }
            | HscError::UnknownCatalog(_)
            | HscError::InvalidArgument(_)
            | HscError::DimensionMismatch { .. }
            | HscError::IndexOutOfRange { .. }
            | HscError::OutsideBox { .. }
            | HscError::ZeroVector
            | HscError::Json(_)
            | HscError::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

/// Report body plus its CSV rendering and whether every check passed.
struct Outcome {
    result: Value,
    csv: String,
    passed: bool,
}

fn parse_complex_token(t: &str) -> Result<C64, Failure> {
    let t = t.trim();
    if let Some((re, im)) = t.split_once(':') {
        let re = re.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{re}`")))?;
        let im = im.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{im}`")))?;
        return Ok(C64::new(re, im));
    }
    C64::from_str(t).map_err(|_| Failure::Usage(format!("bad complex number `{t}`")))
}

/// `"0.5,0.1,0,0"` is read as re,im pairs; tokens containing `:` or `i` are one number each.
fn parse_vector(src: &str) -> Result<Vec<C64>, Failure> {
    let tokens: Vec<&str> = src.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if tokens.is_empty() {
        return Err(Failure::Usage("empty vector".into()));
    }
    if tokens.iter().any(|t| t.contains(':') || t.contains('i')) {
        return tokens.iter().map(|t| parse_complex_token(t)).collect();
    }
    if tokens.len() % 2 != 0 {
        return Err(Failure::Usage(format!("`{src}` has an odd number of reals; expected re,im pairs")));
    }
    let reals = tokens
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reals.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

fn parse_list(src: &str) -> Result<Vec<f64>, Failure> {
    src.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{t}`"))))
        .collect()
}

fn load_named(name: &str) -> Result<MetricSpec, Failure> {
    let path = std::path::Path::new(name);
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(MetricSpec::load(path)?);
    }
    Ok(catalog::lookup(name)?)
}

fn load_metric(args: &MetricArgs) -> Result<MetricSpec, Failure> {
    let spec = match (&args.catalog, &args.metric) {
        (Some(name), _) => catalog::lookup(name)?,
        (None, Some(path)) => MetricSpec::load(path)?,
        (None, None) => return Err(Failure::Usage("pass --catalog or --metric".into())),
    };
    let domain = if let Some(text) = &args.domain {
        Some(ChartBox(serde_json::from_str::<Vec<CoordDomain>>(text).map_err(HscError::from)?))
    } else {
        args.radius.map(|r| ChartBox::polydisk(spec.dim(), r))
    };
    Ok(match domain {
        Some(d) => spec.with_domain(d)?,
        None => spec,
    })
}

fn fmt_c(z: &[C64]) -> Vec<String> {
    z.iter().flat_map(|c| [format!("{:e}", c.re), format!("{:e}", c.im)]).collect()
}

fn csv_rows<S: AsRef<str>>(header: &str, rows: impl IntoIterator<Item = Vec<S>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.split(',')).map_err(|e| Failure::Usage(e.to_string()))?;
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn curvature_cmd(metric: &MetricArgs, point: &str, dir: Option<&str>) -> Result<Outcome, Failure> {
    let spec = load_metric(metric)?;
    let p = parse_vector(point)?;
    let mj = MetricJet::from_spec(&spec, &p)?;
    let tensor = curvature(&mj)?;
    let n = spec.dim();
    let mut rows = Vec::new();
    let mut comps = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = tensor.get(i, j, k, l);
                    rows.push(vec![i.to_string(), j.to_string(), k.to_string(), l.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)]);
                    comps.push(json!([i, j, k, l, v.re, v.im]));
                }
            }
        }
    }
    let hsc = match dir {
        Some(d) => Some(PointGeometry::from_jet(mj.clone())?.hsc(&parse_vector(d)?)?),
        None => None,
    };
    let matrix: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| mj.g(i, j)).collect()).collect();
    Ok(Outcome {
        result: json!({ "metric": spec.name, "point": p, "metric_matrix": matrix, "components": comps, "hsc": hsc }),
        csv: csv_rows("i,j,k,l,re,im", rows)?,
        passed: true,
    })
}

fn scan_cmd(metric: &MetricArgs, scan: &ScanArgs, seed: u64) -> Result<Outcome, Failure> {
    let spec = load_metric(metric)?;
    let report = scan_chart(&spec, spec.domain(), &scan.params(seed))?;
    Ok(Outcome { result: to_value(&report), csv: report.to_csv(), passed: true })
}

fn witness_cmd(metric: &MetricArgs, budget: usize, seed: u64) -> Result<Outcome, Failure> {
    let spec = load_metric(metric)?;
    let w = find_negative_witness(&spec, spec.domain(), budget, seed)?;
    let n = spec.dim();
    let mut header: Vec<String> = (1..=n).flat_map(|k| [format!("z{k}_re"), format!("z{k}_im")]).collect();
    header.extend((1..=n).flat_map(|k| [format!("xi{k}_re"), format!("xi{k}_im")]));
    header.push("hsc".into());
    let rows = w.iter().map(|w| {
        let mut r = fmt_c(&w.point);
        r.extend(fmt_c(&w.dir));
        r.push(format!("{:e}", w.value));
        r
    });
    Ok(Outcome {
        result: json!({ "metric": spec.name, "budget": budget, "witness": w }),
        csv: csv_rows(&header.join(","), rows)?,
        passed: true,
    })
}

#[allow(non_snake_case)]
fn lemma1_cmd(k0: f64, k1: f64, n: usize, s: usize, tensors: usize, trials: usize, seed: u64) -> Result<Outcome, Failure> {
    let c = lemmas::lemma1_constants(k0, k1, n, s)?;
    let mut passed = true;
    let mut extra = json!({});
    if tensors > 0 {
        let ineq = lemmas::prod_ineq_check(c.a, c.b, c.c, c.d, trials, seed)?;
        let mut violations = 0;
        let mut worst = f64::INFINITY;
        for t in 0..tensors as u64 {
            let tensor = lemmas::random_hypothesis_tensor(k0, k1, c.K2_required, n, s, seed.wrapping_add(t), 1.0)?;
            let r = lemmas::lemma1_bound_check(&tensor, &c, trials, seed.wrapping_add(t))?;
            violations += r.violations;
            worst = worst.min(r.worst_slack);
        }
        passed = ineq.violations == 0 && violations == 0;
        extra = json!({ "product_inequalities": ineq, "tensors": tensors, "bound_violations": violations, "worst_bound_slack": worst });
    }
    let row = vec![
        n.to_string(),
        s.to_string(),
        format!("{}", c.K0),
        format!("{}", c.K1),
        format!("{}", c.K2_required),
        format!("{}", c.a),
        format!("{}", c.b),
        format!("{}", c.c),
        format!("{}", c.d),
        format!("{}", c.kcal),
    ];
    Ok(Outcome {
        result: json!({ "constants": c, "kcal": c.kcal, "checks": extra }),
        csv: csv_rows("n,s,K0,K1,K2_required,a,b,c,d,kcal", [row])?,
        passed,
    })
}

fn lemma2_cmd(g: &str, h: &str, point: &str, mode: Lemma2Mode, lambdas: &str, lambda_max: f64) -> Result<Outcome, Failure> {
    let (g, h) = (load_named(g)?, load_named(h)?);
    let p = parse_vector(point)?;
    match mode {
        Lemma2Mode::Formula => {
            let ls = parse_list(lambdas)?;
            let mut rows = Vec::new();
            let mut values = Vec::new();
            for l in ls {
                let f = lemmas::lemma2_at(&g, &h, &p, l)?;
                let d = lemmas::lemma2_direct(&g, &h, &p, l)?;
                rows.push(vec![format!("{l:e}"), format!("{f:e}"), format!("{d:e}")]);
                values.push(json!({ "lambda": l, "formula": f, "direct": d }));
            }
            Ok(Outcome { result: json!({ "values": values }), csv: csv_rows("lambda,formula,direct", rows)?, passed: true })
        }
        Lemma2Mode::Threshold => {
            let t = lemmas::lemma2_threshold(&g, &h, &p, lambda_max)?;
            let rows = t.persistence.iter().map(|(l, k)| vec![format!("{l:e}"), format!("{k:e}")]);
            Ok(Outcome { result: to_value(&t), csv: csv_rows("lambda,hsc", rows)?, passed: true })
        }
        Lemma2Mode::Decay => {
            let r = lemmas::decay_check(&g, &h, &p, &parse_list(lambdas)?)?;
            let rows = r.lambdas.iter().zip(&r.curvatures).map(|(l, k)| vec![format!("{l:e}"), format!("{k:e}")]);
            Ok(Outcome { result: to_value(&r), csv: csv_rows("lambda,hsc", rows)?, passed: r.passed })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn warp_cmd(
    fibration: Option<&PathBuf>,
    mode: WarpMode,
    lambda: f64,
    lambdas: &str,
    point: Option<&str>,
    lambda_max: f64,
    fibers: usize,
    samples: usize,
    scan: &ScanArgs,
    seed: u64,
) -> Result<Outcome, Failure> {
    let f = match fibration {
        Some(path) => FibrationSpec::load(path)?,
        None => FibrationSpec::warp_demo(),
    };
    let point = match point {
        Some(p) => parse_vector(p)?,
        None => f.domain().center(),
    };
    match mode {
        WarpMode::Assemble => {
            let psi = f.assemble_psi(lambda)?;
            let file = psi.to_file();
            Ok(Outcome { result: to_value(&file), csv: String::new(), passed: true })
        }
        WarpMode::Mu0 => {
            let mu = warp::mu0_search(&f, samples, seed)?;
            Ok(Outcome { result: json!({ "mu0": mu }), csv: csv_rows("mu0", [vec![format!("{mu:e}")]])?, passed: true })
        }
        WarpMode::Search => {
            let params = LambdaSearchParams { scan: scan.params(seed), lambda_max, fibers, ..LambdaSearchParams::default() };
            let r = warp::lambda_search(&f, &params)?;
            let csv = r.history_csv();
            Ok(Outcome { result: to_value(&r), csv, passed: r.min_hsc_at_star > 0.0 })
        }
        WarpMode::Asymptotics => {
            let r = warp::block_inverse_asymptotics_check(&f, &point, &parse_list(lambdas)?)?;
            let rows = r.families.iter().map(|fam| {
                vec![fam.name.clone(), format!("{}", fam.predicted_slope), fam.fitted_slope.map_or(String::new(), |s| format!("{s}"))]
            });
            Ok(Outcome { result: to_value(&r), csv: csv_rows("family,predicted_slope,fitted_slope", rows)?, passed: r.passed })
        }
        WarpMode::Growth => {
            let ls = parse_list(lambdas)?;
            let mut dir = vec![C64::new(0.0, 0.0); f.base_dim()];
            dir[0] = C64::new(1.0, 0.0);
            let (nums, slope) = warp::base_numerator_growth(&f, &point, &dir, &ls)?;
            let rows = ls.iter().zip(&nums).map(|(l, v)| vec![format!("{l:e}"), format!("{v:e}")]);
            Ok(Outcome {
                result: json!({ "lambdas": ls, "numerators": nums, "slope": slope }),
                csv: csv_rows("lambda,numerator", rows)?,
                passed: slope >= 0.8,
            })
        }
    }
}

fn example1_cmd(lambdas: &str, fibers: usize, budget: usize, scan: &ScanArgs, seed: u64) -> Result<Outcome, Failure> {
    let params = Example1Params { scan: scan.params(seed), fibers, witness_budget: budget };
    let r = warp::example1_report(&parse_list(lambdas)?, &params)?;
    let rows = r.witnesses.iter().map(|w| {
        let mut row = vec![format!("{}", w.lambda)];
        match &w.witness {
            Some(w) => {
                row.push(format!("{:e}", w.value));
                row.extend(fmt_c(&w.point));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row
    });
    Ok(Outcome { result: to_value(&r), csv: csv_rows("lambda,hsc,z1_re,z1_im,z2_re,z2_im", rows)?, passed: r.passed })
}

fn selftest_cmd(seed: u64) -> Result<Outcome, Failure> {
    let r = selftest::run_all(seed);
    for line in r.lines() {
        eprintln!("{line}");
    }
    let rows = r.outcomes.iter().map(|o| {
        vec![
            o.criterion.clone(),
            o.check.clone(),
            o.passed.to_string(),
            format!("{:e}", o.measured),
            format!("{:e}", o.tolerance),
            o.detail.clone(),
        ]
    });
    let csv = csv_rows("criterion,check,passed,measured,tolerance,detail", rows)?;
    Ok(Outcome { result: to_value(&r), csv, passed: r.passed })
}

fn run(cli: &Cli) -> Result<(Outcome, &Common), Failure> {
    Ok(match &cli.command {
        Command::Curvature { metric, point, dir, common } => (curvature_cmd(metric, point, dir.as_deref())?, common),
        Command::Scan { metric, scan, common } => (scan_cmd(metric, scan, common.seed)?, common),
        Command::Witness { metric, budget, common } => (witness_cmd(metric, *budget, common.seed)?, common),
        Command::Lemma1 { k0, k1, n, s, tensors, trials, common } => {
            (lemma1_cmd(*k0, *k1, *n, *s, *tensors, *trials, common.seed)?, common)
        }
        Command::Lemma2 { g, h, point, mode, lambdas, lambda_max, common } => {
            (lemma2_cmd(g, h, point, *mode, lambdas, *lambda_max)?, common)
        }
        Command::Warp { fibration, mode, lambda, lambdas, point, lambda_max, fibers, samples, scan, common } => (
            warp_cmd(
                fibration.as_ref(),
                *mode,
                *lambda,
                lambdas,
                point.as_deref(),
                *lambda_max,
                *fibers,
                *samples,
                scan,
                common.seed,
            )?,
            common,
        ),
        Command::Example1 { lambdas, fibers, budget, scan, common } => {
            (example1_cmd(lambdas, *fibers, *budget, scan, common.seed)?, common)
        }
        Command::Selftest { common } => (selftest_cmd(common.seed)?, common),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Curvature { .. } => "curvature",
        Command::Scan { .. } => "scan",
        Command::Witness { .. } => "witness",
        Command::Lemma1 { .. } => "lemma1",
        Command::Lemma2 { .. } => "lemma2",
        Command::Warp { .. } => "warp",
        Command::Example1 { .. } => "example1",
        Command::Selftest { .. } => "selftest",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, common) = match run(&cli) {
        Ok(v) => v,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = match common.format {
        Format::Csv => outcome.csv,
        Format::Json => {
            let report = json!({
                "schema": 1,
                "version": VERSION,
                "command": command_name(&cli.command),
                "config": to_value(&cli.command),
                "seed": common.seed,
                "passed": outcome.passed,
                "result": outcome.result,
            });
            let mut s = serde_json::to_string_pretty(&report).unwrap_or_default();
            s.push('\n');
            s
        }
    };
    let written = match &common.output {
        Some(path) => std::fs::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
