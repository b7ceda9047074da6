use std::path::PathBuf;
use std::process::ExitCode;

use bhi_core::catalog::{catalog_image, ConstantsTable, ImageOperator, PowerFunction};
use bhi_core::experiments::{run_experiment, ExperimentConfig, ExperimentError, ExperimentKind, ExperimentReport};
use bhi_core::geometry::{BoundaryGraph, DomainGeometry, Point};
use bhi_core::kernels::{check_boundary_form, check_condition_class, Kernel, PairSampler};
use bhi_core::operator::{fullspace_pv, regional_pv, OperatorProblem};
use bhi_core::simulator::{configure_threads_from_env, exit_records};
use bhi_core::QuadratureSpec;
use clap::{Parser, Subcommand, ValueEnum};

const CONFIG_ERROR: u8 = 2;

/// Boundary behaviour of censored and killed stable-like processes:
/// closed-form constants, principal-value quadrature and jump-chain Monte
/// Carlo. Worker count: BHI_THREADS.
#[derive(Parser)]
#[command(name = "bhi", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the closed-form constants as CSV.
    Constants {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
        dim: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9])]
        alpha: Vec<f64>,
        /// Exponents; default α−1 and α/2 for every α.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<f64>,
    },
    /// Evaluate an operator on a power-type function at one point.
    Eval {
        #[arg(long, value_enum, default_value_t = FunctionArg::HalfSpace)]
        function: FunctionArg,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated coordinates; the dimension is taken from here.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long, value_enum, default_value_t = OperatorArg::Regional)]
        operator: OperatorArg,
        #[arg(long, value_enum, default_value_t = KernelArg::Constant)]
        kernel: KernelArg,
        /// Graph exponent for graph-height functions.
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-7)]
        abs_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// Run paths of a configured chain and print one CSV row per path.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Vec<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Boundary-decay exponent fit.
    BhiFit(RunArgs),
    /// Harnack ratio scan.
    Harnack(RunArgs),
    /// Carleson sup-ratio scan.
    Carleson(RunArgs),
    /// Operator bounds on curved domains.
    CurvedScan(RunArgs),
    /// Ratio of two harmonic functions on a Lipschitz wedge.
    Lipschitz(RunArgs),
    /// Any configured experiment (including dynkin and scaling).
    Run(RunArgs),
    /// Sampled check of a kernel's regularity class.
    CheckKernel {
        #[arg(long, value_enum, default_value_t = KernelArg::Subordinate)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 20_000)]
        pairs: usize,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output path.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    HalfSpace,
    GraphHeight,
    Truncated,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Regional,
    Fullspace,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Constant,
    Subordinate,
    Ratio,
}

impl KernelArg {
    fn build(self, n: usize, alpha: f64) -> Kernel {
        match self {
            KernelArg::Constant => Kernel::constant(1.0),
            KernelArg::Subordinate => Kernel::halfspace_subordinate(n, alpha),
            KernelArg::Ratio => Kernel::halfspace_reflection_ratio(n, alpha),
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(CONFIG_ERROR)
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text)
}

fn emit(text: &str, output: Option<&PathBuf>) -> std::io::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(report: &ExperimentReport, output: Option<PathBuf>) -> ExitCode {
    if let Err(e) = emit(&report.to_csv(), output.as_ref()) {
        return config_error(e);
    }
    eprint!("{}", report.summary());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(args: RunArgs, expected: Option<ExperimentKind>) -> ExitCode {
    let mut cfg = match load(&args.config) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if let Some(k) = expected {
        if cfg.experiment != k {
            return config_error(format!(
                "config describes a '{}' experiment, not '{}'",
                cfg.experiment.label(),
                k.label()
            ));
        }
    }
    if let Some(n) = args.paths {
        cfg.n_paths = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let output = args.output.or_else(|| cfg.output.clone().map(PathBuf::from));
    match run_experiment(&cfg) {
        Ok(report) => finish(&report, output),
        Err(e) => config_error(e),
    }
}

fn constants(dim: Vec<usize>, alpha: Vec<f64>, p: Vec<f64>) -> ExitCode {
    let mut out = format!("{}\n", ConstantsTable::CSV_HEADER);
    for &n in &dim {
        for &a in &alpha {
            let ps = if p.is_empty() { vec![a - 1.0, a / 2.0] } else { p.clone() };
            for &q in &ps {
                match ConstantsTable::compute(n, a, q) {
                    Ok(row) => {
                        out.push_str(&row.csv_row());
                        out.push('\n');
                    }
                    Err(e) => return config_error(e),
                }
            }
        }
    }
    print!("{out}");
    ExitCode::SUCCESS
}

#[allow(clippy::too_many_arguments)]
fn eval(
    function: FunctionArg,
    p: f64,
    alpha: f64,
    point: Vec<f64>,
    operator: OperatorArg,
    kernel: KernelArg,
    beta: f64,
    c: f64,
    quad: QuadratureSpec,
) -> ExitCode {
    let n = point.len();
    if !(1..=3).contains(&n) {
        return config_error("--point needs 1 to 3 coordinates");
    }
    if n == 1 && !matches!(function, FunctionArg::HalfSpace) {
        return config_error("graph functions need dimension >= 2");
    }
    let x = Point::new(&point);
    let f = match function {
        FunctionArg::HalfSpace => PowerFunction::half_space(n, p),
        FunctionArg::GraphHeight => PowerFunction::graph_height(BoundaryGraph::power(n, c, beta), p),
        FunctionArg::Truncated => PowerFunction::truncated(BoundaryGraph::power(n, c, beta), p),
    };
    let dom: DomainGeometry = f.domain();
    let k = kernel.build(n, alpha);
    let (result, op) = match operator {
        OperatorArg::Regional => (
            regional_pv(&OperatorProblem::new(&f, &dom, &k, alpha).with_quad(quad), &x),
            match kernel {
                KernelArg::Constant => Some(ImageOperator::Regional),
                KernelArg::Ratio => Some(ImageOperator::ReflectionRatio),
                KernelArg::Subordinate => None,
            },
        ),
        OperatorArg::Fullspace => (fullspace_pv(&f, &dom, &x, alpha, &quad), Some(ImageOperator::FullSpace)),
    };
    let r = match result {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let expected = op
        .and_then(|op| catalog_image(&f, alpha, op).ok().flatten())
        .map_or(f64::NAN, |img| img.at(&x));
    println!("value,error_estimate,converged,verdict,level,closed_form");
    println!("{:e},{:e},{},{:?},{},{:e}", r.value, r.error_estimate, r.converged, r.verdict, r.level, expected);
    if r.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn simulate(config: PathBuf, start: Vec<f64>, paths: Option<usize>, output: Option<PathBuf>) -> ExitCode {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if start.len() != cfg.dim {
        return config_error(format!("--start needs {} coordinates", cfg.dim));
    }
    let dom = cfg.domain_geometry();
    let base = Point::zeros(cfg.dim);
    let boxes = bhi_core::geometry::BoxRegion::new(base, cfg.box_a, cfg.box_r, dom.clone())
        .and_then(|k0| bhi_core::geometry::BoxRegion::new(base, 2.0 * cfg.box_a, cfg.box_r, dom).map(|k| (k0, k)));
    let (k0, upper) = match boxes {
        Ok(b) => b,
        Err(e) => return config_error(e),
    };
    let stop = bhi_core::simulator::StopRule::new(
        bhi_core::geometry::Region::Box(k0),
        bhi_core::geometry::Region::Box(upper),
    );
    let n = paths.unwrap_or(cfg.n_paths);
    let recs = match exit_records(&Point::new(&start), &cfg.chain_config(cfg.seed), &stop, n) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let mut s = format!("# experiment={} config_sha256={} seed={}\npath_id,", cfg.name, cfg.hash(), cfg.seed);
    for i in 0..cfg.dim {
        s.push_str(&format!("exit_x{},", i + 1));
    }
    s.push_str("classification,steps,time\n");
    for (i, r) in recs.iter().enumerate() {
        s.push_str(&format!("{i},"));
        for c in r.exit_position.coords() {
            s.push_str(&format!("{c:e},"));
        }
        s.push_str(&format!("{},{},{:e}\n", r.classification.label(), r.steps, r.process_time));
    }
    match emit(&s, output.as_ref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => config_error(e),
    }
}

fn check_kernel(kernel: KernelArg, dim: usize, alpha: f64, pairs: usize) -> ExitCode {
    if !(1..=3).contains(&dim) || !(alpha > 0.0 && alpha < 2.0) {
        return config_error("need dim in 1..=3 and alpha in (0, 2)");
    }
    let k = kernel.build(dim, alpha);
    let dom = DomainGeometry::half_space(dim);
    let sampler = PairSampler { count: pairs, ..PairSampler::default() };
    let mut pass = true;
    println!("check,passed,detail");
    match k.class() {
        Some(class) => {
            let r = check_condition_class(&k, &dom, &sampler, &class);
            pass &= r.passed;
            println!(
                "class,{},pairs={} range=[{:e};{:e}] worst_increment_ratio={:e} c3={}",
                r.passed, r.pairs, r.min_value, r.max_value, r.worst_increment_ratio, class.c3
            );
        }
        None => println!("class,true,no class declared for '{}'", k.name()),
    }
    if let Some(parts) = k.composite() {
        let r = check_boundary_form(
            &k,
            &*parts.psi1,
            &*parts.psi2,
            dim,
            alpha,
            parts.c_prime,
            parts.delta,
            &sampler,
        );
        pass &= r.passed;
        println!(
            "boundary-form,{},collar_pairs={} worst_collar_excess={:e} worst_interior_excess={:e} M={:e}",
            r.passed, r.collar_pairs, r.worst_collar_excess, r.worst_interior_excess, r.m_constant
        );
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    configure_threads_from_env();
    match Cli::parse().cmd {
        Cmd::Constants { dim, alpha, p } => constants(dim, alpha, p),
        Cmd::Eval { function, p, alpha, point, operator, kernel, beta, c, abs_tol, rel_tol } => {
            eval(function, p, alpha, point, operator, kernel, beta, c, QuadratureSpec::new(abs_tol, rel_tol))
        }
        Cmd::Simulate { config, start, paths, output } => simulate(config, start, paths, output),
        Cmd::BhiFit(a) => run(a, Some(ExperimentKind::BhiFit)),
        Cmd::Harnack(a) => run(a, Some(ExperimentKind::Harnack)),
        Cmd::Carleson(a) => run(a, Some(ExperimentKind::Carleson)),
        Cmd::CurvedScan(a) => run(a, Some(ExperimentKind::CurvedScan)),
        Cmd::Lipschitz(a) => run(a, Some(ExperimentKind::Lipschitz)),
        Cmd::Run(a) => run(a, None),
        Cmd::CheckKernel { kernel, dim, alpha, pairs } => check_kernel(kernel, dim, alpha, pairs),
    }
}
