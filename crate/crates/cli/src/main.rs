use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use colorful_kcenter::driver::{solve, Branch, RunReport, RunStatus, SolverConfig};
use colorful_kcenter::generate::{
    gen_example_2_5, gen_random_metric, gen_random_planar, gen_separated, SeparatedParams,
};
use colorful_kcenter::grid::{edges_in_window, edges_near, rhombus_of, GridSpec};
use colorful_kcenter::matching::{matching_weight_bounds, recover, support, WeightedGraph};
use colorful_kcenter::model::{read_instance, verify, Instance, Solution, SolutionJson};
use colorful_kcenter::number::{parse_rational, Length, Rational};
use colorful_kcenter::oracle::brute_force_optimum;
use colorful_kcenter::Error;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ckc", version, about = "Colorful k-center solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Separation parameter; must exceed 8.
    #[arg(long, default_value = "8.25", value_parser = rational_arg)]
    alpha: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only try this radius, e.g. `2`, `3/2` or `sqrt(5)`.
    #[arg(long, value_parser = length_arg)]
    radius: Option<Length>,
    /// Replace the instance's k.
    #[arg(long)]
    k_override: Option<usize>,
    /// Skip radii that cannot beat the best cover found so far.
    #[arg(long)]
    early_stop: bool,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha.clone(),
            seed: self.seed,
            parallelism: self.parallel,
            early_stop: self.early_stop,
            radius: self.radius.clone(),
            timing: self.timing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance; prints a run report.
    Solve {
        /// Instance JSON; stdin when absent or `-`.
        input: Option<PathBuf>,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Check a solution (or a run report's best solution) against an instance.
    Verify {
        instance: PathBuf,
        /// Solution or run report JSON; stdin when absent or `-`.
        solution: Option<PathBuf>,
    },
    /// Exact optimum by enumerating all k-subsets.
    Oracle {
        input: Option<PathBuf>,
        #[arg(long)]
        k_override: Option<usize>,
    },
    /// Generate an instance.
    Gen(GenArgs),
    /// Exact-weight perfect matching on a colored graph.
    Match {
        /// Graph JSON `{"n": .., "edges": [[u, v, [w, ..]], ..]}`.
        input: Option<PathBuf>,
        /// Comma-separated weight vector to recover a matching for.
        #[arg(long, value_delimiter = ',')]
        target: Option<Vec<usize>>,
        /// Comma-separated per-color degree bounds.
        #[arg(long, value_delimiter = ',')]
        bounds: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solver cost against the exact optimum on random instances, as CSV.
    Bench(BenchArgs),
    /// SVG of the points, grid, regions and solution balls.
    Plot {
        input: Option<PathBuf>,
        /// Solution or run report JSON to draw.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Draw the grid and point regions for this radius guess.
        #[arg(long, value_parser = length_arg)]
        grid_radius: Option<Length>,
        #[arg(long, default_value = "8.25", value_parser = rational_arg)]
        alpha: Rational,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "kind")]
struct GenKind {
    /// The eight-point two-cluster example.
    #[arg(long)]
    example_2_5: bool,
    /// Planted α-separated planar instance.
    #[arg(long)]
    separated: bool,
    /// Uniform random instance.
    #[arg(long)]
    random: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    scale: Rational,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    colors: usize,
    #[arg(long, default_value = "8.25", value_parser = rational_arg)]
    alpha: Rational,
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    rho: Rational,
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    /// Random shortest-path metric instead of planar points.
    #[arg(long)]
    metric: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value_t = 2)]
    colors: usize,
    /// Random metric instances (pseudo-approximation only).
    #[arg(long)]
    metric: bool,
    #[command(flatten)]
    flags: SolverFlags,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn length_arg(s: &str) -> Result<Length, String> {
    s.parse::<Length>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleGuard { .. } => Failure::Guard(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<ExitCode, Failure>;

fn read_input(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_instance(path: Option<&PathBuf>, k_override: Option<usize>) -> Result<Instance, Failure> {
    let inst = read_instance(&read_input(path)?)?;
    Ok(match k_override {
        Some(k) => inst.with_k(k)?,
        None => inst,
    })
}

/// A bare solution, or the `best` field of a run report.
fn load_solution(text: &str, inst: &Instance) -> Result<Option<Solution>, Failure> {
    let value: Value = serde_json::from_str(text)?;
    let sol = match value.get("best") {
        Some(Value::Null) => return Ok(None),
        Some(best) => best.clone(),
        None => value,
    };
    let sol: SolutionJson = serde_json::from_value(sol)?;
    Ok(Some(sol.into_solution(inst)?))
}

/// Prints `value` as JSON with the seed echoed at the top level.
fn emit<T: Serialize>(value: &T, seed: u64) -> Result<(), Failure> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("seed".into(), json!(seed));
    }
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn cmd_solve(input: Option<&PathBuf>, flags: &SolverFlags) -> CliResult {
    let inst = load_instance(input, flags.k_override)?;
    let report = solve(&inst, &flags.config())?;
    emit(&report, flags.seed)?;
    Ok(status_code(&report))
}

fn status_code(report: &RunReport) -> ExitCode {
    match report.status {
        RunStatus::Feasible => ExitCode::SUCCESS,
        RunStatus::Infeasible => ExitCode::from(1),
    }
}

fn cmd_verify(instance: &PathBuf, solution: Option<&PathBuf>) -> CliResult {
    let inst = load_instance(Some(instance), None)?;
    let Some(sol) = load_solution(&read_input(solution)?, &inst)? else {
        emit(&json!({ "feasible": false, "reason": "no solution" }), 0)?;
        return Ok(ExitCode::from(1));
    };
    let report = verify(&inst, &sol)?;
    emit(&report, 0)?;
    Ok(if report.feasible { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_oracle(input: Option<&PathBuf>, k_override: Option<usize>) -> CliResult {
    let inst = load_instance(input, k_override)?;
    emit(&brute_force_optimum(&inst)?, 0)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: &GenArgs) -> CliResult {
    let (inst, planted) = if args.kind.example_2_5 {
        (gen_example_2_5(&args.scale)?, None)
    } else if args.kind.separated {
        let params = SeparatedParams {
            n: args.n,
            k: args.k,
            colors: args.colors,
            alpha: args.alpha.clone(),
            rho: args.rho.clone(),
            outliers: args.outliers,
            seed: args.seed,
        };
        let (inst, planted) = gen_separated(&params)?;
        (inst, Some(json!({ "centers": planted.centers, "rho": planted.rho })))
    } else if args.metric {
        (gen_random_metric(args.n, args.k, args.colors, args.seed)?, None)
    } else {
        (gen_random_planar(args.n, args.k, args.colors, args.seed)?, None)
    };
    let mut value = serde_json::to_value(inst.to_json())?;
    if let (Some(p), Value::Object(map)) = (planted, &mut value) {
        map.insert("planted".into(), p);
    }
    emit(&value, args.seed)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_match(input: Option<&PathBuf>, target: Option<&[usize]>, bounds: Option<&[usize]>, seed: u64) -> CliResult {
    let g = WeightedGraph::from_json(&read_input(input)?)?;
    let bounds = bounds.map_or_else(|| matching_weight_bounds(&g), <[usize]>::to_vec);
    match target {
        None => {
            let table = support(&g, &bounds, seed)?;
            let out = json!({
                "bounds": table.bounds,
                "prime": table.prime,
                "achievable": table.achievable(),
            });
            emit(&out, seed)?;
            Ok(ExitCode::SUCCESS)
        }
        Some(target) => {
            let found = recover(&g, &bounds, target, seed)?;
            let pairs: Option<Vec<(usize, usize)>> =
                found.as_ref().map(|m| m.iter().map(|&e| (g.edges()[e].u, g.edges()[e].v)).collect());
            let out = json!({ "bounds": bounds, "target": target, "matching": found, "pairs": pairs });
            emit(&out, seed)?;
            Ok(if found.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let cfg = args.flags.config();
    let mut csv = String::from("instance,n,k,opt,cost,ratio,branch,time_ms\n");
    let mut failed = false;
    for idx in 0..args.count {
        let seed = args.flags.seed.wrapping_add(idx);
        // Sizes cycle deterministically through the allowed range.
        let n = args.colors.max(2) + (idx as usize % (args.n_max + 1 - args.colors.max(2)).max(1));
        let k = 1 + (idx as usize / 3) % args.k_max.min(n).max(1);
        let inst = if args.metric {
            gen_random_metric(n, k, args.colors, seed)?
        } else {
            gen_random_planar(n, k, args.colors, seed)?
        };
        let opt = brute_force_optimum(&inst)?;
        let started = Instant::now();
        let report = solve(&inst, &SolverConfig { seed, ..cfg.clone() })?;
        let ms = started.elapsed().as_secs_f64() * 1e3;
        let (cost, ratio, branch) = match (&report.cost, &report.winner) {
            (Some(cost), winner) => {
                let ratio = if opt.radius.is_zero() {
                    String::new()
                } else {
                    format!("{:.6}", cost.to_f64() / opt.radius.to_f64())
                };
                let branch = match winner.as_ref().map(|w| w.branch) {
                    Some(Branch::Pseudo) => "pseudo",
                    Some(Branch::Separated) => "separated",
                    None => "empty",
                };
                (cost.to_string(), ratio, branch)
            }
            (None, _) => {
                failed = true;
                (String::new(), String::new(), "none")
            }
        };
        writeln!(csv, "{idx},{n},{k},{},{cost},{ratio},{branch},{ms:.3}", opt.radius).expect("write to string");
    }
    print!("{csv}");
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (self.margin + (x - self.min_x) * self.scale, self.margin + (self.max_y - y) * self.scale)
    }
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MAX_GRID_EDGES: usize = 20_000;

fn cmd_plot(input: Option<&PathBuf>, solution: Option<&PathBuf>, grid_radius: Option<&Length>, alpha: &Rational) -> CliResult {
    let inst = load_instance(input, None)?;
    let Some(points) = inst.points() else {
        return Err(Failure::Usage("plot needs a planar instance".into()));
    };
    let sol = match solution {
        Some(p) => load_solution(&read_input(Some(p))?, &inst)?,
        None => None,
    };
    let coords: Vec<(f64, f64)> = points.iter().map(|p| p.to_f64()).collect();
    let pad = sol.as_ref().map_or(0.0, |s| s.radius.to_f64());
    let min_x = coords.iter().map(|c| c.0).fold(f64::INFINITY, f64::min) - pad;
    let max_x = coords.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max) + pad;
    let min_y = coords.iter().map(|c| c.1).fold(f64::INFINITY, f64::min) - pad;
    let max_y = coords.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max) + pad;
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let size = 800.0;
    let frame = Frame { min_x, max_y, scale: size / span, margin: 20.0 };
    let width = (max_x - min_x) * frame.scale + 2.0 * frame.margin;
    let height = (max_y - min_y) * frame.scale + 2.0 * frame.margin;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    )
    .expect("write to string");
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).expect("write to string");

    if let Some(rho) = grid_radius {
        let g = GridSpec::for_radius(alpha, rho)?;
        let ell = g.ell_f64();
        let h = ell * 3f64.sqrt() / 2.0;
        let j_lo = ((min_y / h).floor() as i64) - 1;
        let j_hi = ((max_y / h).ceil() as i64) + 2;
        let i_lo = ((min_x / ell).floor() as i64) - (j_hi.abs().max(j_lo.abs()) / 2) - 2;
        let i_hi = ((max_x / ell).ceil() as i64) + (j_hi.abs().max(j_lo.abs()) / 2) + 2;
        let span_edges = 3 * (i_hi - i_lo).max(0) as usize * (j_hi - j_lo).max(0) as usize;
        if span_edges <= MAX_GRID_EDGES {
            for e in edges_in_window(i_lo..i_hi, j_lo..j_hi) {
                let (a, b) = e.endpoints();
                let (ax, ay) = frame.map(g.vertex(a).to_f64());
                let (bx, by) = frame.map(g.vertex(b).to_f64());
                writeln!(
                    svg,
                    "<line x1=\"{ax:.2}\" y1=\"{ay:.2}\" x2=\"{bx:.2}\" y2=\"{by:.2}\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>"
                )
                .expect("write to string");
            }
        }
        let mut touched = BTreeSet::new();
        for p in points {
            touched.extend(edges_near(&g, p, rho));
        }
        for e in &touched {
            let pts: Vec<String> = rhombus_of(&g, e)
                .to_f64()
                .iter()
                .map(|&c| {
                    let (x, y) = frame.map(c);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            writeln!(
                svg,
                "<polygon points=\"{}\" fill=\"#ffd54f\" fill-opacity=\"0.25\" stroke=\"#e0a800\" stroke-width=\"0.5\"/>",
                pts.join(" ")
            )
            .expect("write to string");
        }
    }

    if let Some(sol) = &sol {
        let r = sol.radius.to_f64() * frame.scale;
        for &c in &sol.centers {
            let (x, y) = frame.map(coords[c]);
            writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"#000000\" fill-opacity=\"0.05\" stroke=\"#333333\" stroke-width=\"1\"/>"
            )
            .expect("write to string");
        }
    }
    for (p, &(x, y)) in coords.iter().enumerate() {
        let (x, y) = frame.map((x, y));
        let fill = PALETTE[inst.color(p) % PALETTE.len()];
        writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{fill}\"><title>{p}</title></circle>")
            .expect("write to string");
    }
    svg.push_str("</svg>\n");
    print!("{svg}");
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Solve { input, flags } => cmd_solve(input.as_ref(), flags),
        Command::Verify { instance, solution } => cmd_verify(instance, solution.as_ref()),
        Command::Oracle { input, k_override } => cmd_oracle(input.as_ref(), *k_override),
        Command::Gen(args) => cmd_gen(args),
        Command::Match { input, target, bounds, seed } => {
            cmd_match(input.as_ref(), target.as_deref(), bounds.as_deref(), *seed)
        }
        Command::Bench(args) => cmd_bench(args),
        Command::Plot { input, solution, grid_radius, alpha } => {
            cmd_plot(input.as_ref(), solution.as_ref(), grid_radius.as_ref(), alpha)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
