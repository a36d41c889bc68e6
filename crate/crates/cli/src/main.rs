mod config;
mod render;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use pbif::bifurcation::{estimate_from_samples, linspace};
use pbif::cubical::{build_filtration, persistence};
use pbif::densities::{evaluate_on_grid, normalize_max};
use pbif::io;
use pbif::kde::kde_on_grid;
use pbif::simplicial::{rips_filtration, rips_persistence};
use pbif::stochastic::{greedy_permutation, simulate_stationary, system_for};
use pbif::{
    analytical_plot, detect_transitions, error_plot, estimated_plot, uniform_levels, Direction,
    EstimationConfig, GridSpec, Kde, Plot, Provenance, Registry, SimulationConfig, Sweep,
    TransitionRule, Window,
};

use config::{read_json, write_json, write_metadata, EstimatorFile, ModelSpec, Summary};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit 2).
    Usage(String),
    /// Failure while reading inputs or computing (exit 1).
    Compute(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Compute(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => m,
        }
    }
}

impl From<pbif::Error> for CliError {
    fn from(e: pbif::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "pbif",
    version,
    about = "Homological bifurcation plots of stationary densities of stochastic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a closed-form density on a grid and write it as grid CSV.
    PdfGrid(PdfGridArgs),
    /// Simulate an SDE and write stationary samples as point CSV.
    Simulate(SimulateArgs),
    /// Evaluate a Gaussian KDE of a point CSV on a grid.
    Kde(KdeArgs),
    /// Persistence diagram of a grid (cubical) or a point cloud (Rips).
    Persist(PersistArgs),
    /// Betti numbers over a level grid, from a grid, a diagram or samples.
    Betti(BettiArgs),
    /// Sweep a parameter and write a homological bifurcation plot.
    BifurcationPlot(PlotArgs),
    /// Signed difference of two plots (truth minus estimate).
    ErrorPlot(ErrorPlotArgs),
    /// Render a plot or error CSV as an SVG heatmap.
    Render(RenderArgs),
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[x0, x1, y0, y1] => Ok([x0, x1, y0, y1]),
        _ => Err("expected x_min:x_max:y_min:y_max".into()),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Range {
    start: f64,
    end: f64,
    n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err("expected start:end:count".into());
        };
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        };
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("`{n}` is not a count"))?;
        if n == 0 {
            return Err("count must be positive".into());
        }
        Ok(Range {
            start: num(a)?,
            end: num(b)?,
            n,
        })
    }
}

fn parse_rule(s: &str) -> Result<TransitionRule, String> {
    s.parse().map_err(|e: pbif::Error| e.to_string())
}

#[derive(Args, Debug, Serialize)]
struct FamilyArgs {
    /// Density family: `duffing` or `crater`.
    #[arg(long, default_value = "duffing")]
    family: String,
    /// Duffing stiffness h.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Duffing noise gain q1 (default 1).
    #[arg(long, allow_hyphen_values = true)]
    q1: Option<f64>,
    /// Duffing noise intensity D11 (default 1).
    #[arg(long = "d11", allow_hyphen_values = true)]
    d11: Option<f64>,
    /// Crater sharpness kappa (default 1).
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Crater rim parameter a (default 1).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
}

impl FamilyArgs {
    fn params(&self) -> BTreeMap<String, f64> {
        [
            ("h", self.h),
            ("q1", self.q1),
            ("D11", self.d11),
            ("kappa", self.kappa),
            ("a", self.a),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
    }
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    /// Sampling window x_min:x_max:y_min:y_max.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true, default_value = "-3:3:-3:3")]
    window: [f64; 4],
    /// Grid cells along x.
    #[arg(long, default_value_t = 201)]
    nx: usize,
    /// Grid cells along y.
    #[arg(long, default_value_t = 201)]
    ny: usize,
}

impl GridArgs {
    fn window(&self) -> CliResult<Window<f64>> {
        let [x0, x1, y0, y1] = self.window;
        Window::new(x0, x1, y0, y1).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug, Serialize)]
struct SimArgs {
    /// Euler–Maruyama time step.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Steps discarded before sampling.
    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,
    /// Steps between kept samples.
    #[arg(long, default_value_t = 10)]
    stride: usize,
    /// Number of stationary samples.
    #[arg(long, default_value_t = 5_000)]
    samples: usize,
    /// Initial state x1,x2.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,0"
    )]
    x0: Vec<f64>,
}

impl SimArgs {
    fn config(&self) -> CliResult<SimulationConfig<f64>> {
        let [x1, x2] = self.x0[..] else {
            return Err(CliError::Usage(
                "--x0 needs two comma-separated values".into(),
            ));
        };
        if !(self.dt > 0.0) || self.stride == 0 || self.samples == 0 {
            return Err(CliError::Usage(
                "--dt, --stride and --samples must be positive".into(),
            ));
        }
        Ok(SimulationConfig {
            dt: self.dt,
            burn_in: self.burn_in,
            stride: self.stride,
            samples: self.samples,
            x0: [x1, x2],
        })
    }
}

#[derive(Args, Debug, Serialize)]
struct EstArgs {
    /// Greedy subsample size [default: 500].
    #[arg(long)]
    n: Option<usize>,
    /// Ball radius r [default: KDE bandwidth clamped to the radius bounds].
    #[arg(long)]
    radius: Option<f64>,
    /// Level offset epsilon [default: 1e-5].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Lower clamp for the bandwidth-derived radius.
    #[arg(long, default_value_t = 0.1)]
    radius_min: f64,
    /// Upper clamp for the bandwidth-derived radius.
    #[arg(long, default_value_t = 0.8)]
    radius_max: f64,
    /// Estimator config JSON `{epsilon, r, n, levels, dims}`; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl EstArgs {
    fn file(&self) -> CliResult<EstimatorFile> {
        self.config
            .as_deref()
            .map_or(Ok(EstimatorFile::default()), read_json)
    }

    fn config(
        &self,
        file: &EstimatorFile,
        simulation: SimulationConfig<f64>,
    ) -> CliResult<EstimationConfig<f64>> {
        let cfg = EstimationConfig {
            simulation,
            n: self.n.or(file.n).unwrap_or(500),
            epsilon: self.epsilon.or(file.epsilon).unwrap_or(1e-5),
            radius: self.radius.or(file.r),
            radius_bounds: (self.radius_min, self.radius_max),
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Serialize)]
struct LevelArgs {
    /// Number of uniform levels k/N, k = 1..N, on the max-normalized scale.
    #[arg(long)]
    levels: Option<usize>,
    /// Homology dimensions (0 and/or 1).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
}

impl LevelArgs {
    fn resolve(&self, file: &EstimatorFile) -> CliResult<(Vec<f64>, Vec<usize>)> {
        let levels = match (self.levels, &file.levels) {
            (Some(0), _) => return Err(CliError::Usage("--levels must be positive".into())),
            (Some(n), _) => uniform_levels(n),
            (None, Some(l)) if !l.is_empty() => l.clone(),
            _ => uniform_levels(50),
        };
        let dims = self
            .dims
            .clone()
            .or_else(|| file.dims.clone())
            .unwrap_or_else(|| vec![0, 1]);
        if dims.is_empty() || dims.iter().any(|&d| d > 1) {
            return Err(CliError::Usage(
                "--dims must list dimensions 0 and/or 1".into(),
            ));
        }
        Ok((levels, dims))
    }
}

#[derive(Args, Debug, Serialize)]
struct PdfGridArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Model spec JSON `{family, params, window, nx, ny}`; replaces the family and grid flags.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Keep raw density values instead of dividing by the maximum.
    #[arg(long)]
    raw: bool,
    /// Output grid CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Write only a greedy (farthest-point) subsample of this size.
    #[arg(long)]
    greedy: Option<usize>,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output point CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct KdeArgs {
    /// Input point CSV (2D).
    #[arg(long)]
    points: PathBuf,
    /// Per-dimension bandwidths [default: Scott's rule].
    #[arg(long, value_delimiter = ',')]
    bandwidth: Option<Vec<f64>>,
    #[command(flatten)]
    grid: GridArgs,
    /// Keep raw density values instead of dividing by the maximum.
    #[arg(long)]
    raw: bool,
    /// Output grid CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["grid", "points"])))]
struct PersistArgs {
    /// Input grid CSV (cubical persistence).
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Input point CSV (Rips persistence).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Filtration direction for grids: superlevel or sublevel.
    #[arg(long, default_value = "superlevel")]
    direction: String,
    /// Largest Rips edge length.
    #[arg(long, default_value_t = 2.0)]
    r_max: f64,
    /// Largest Rips simplex dimension (1 or 2).
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Output diagram CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["grid", "diagram", "points"])))]
struct BettiArgs {
    /// Grid CSV; Betti numbers of its superlevel sets.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Diagram CSV.
    #[arg(long)]
    diagram: Option<PathBuf>,
    /// Stationary sample CSV; Betti numbers estimated from the samples.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Direction of the diagram's filtration.
    #[arg(long, default_value = "superlevel")]
    direction: String,
    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    est: EstArgs,
    /// Output CSV `dim,L,beta`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["analytical", "estimated"])))]
struct PlotArgs {
    /// Betti numbers of the closed-form density on a grid.
    #[arg(long)]
    analytical: bool,
    /// Betti numbers estimated from simulated trajectories.
    #[arg(long)]
    estimated: bool,
    #[command(flatten)]
    family: FamilyArgs,
    /// Swept parameter values start:end:count (h for duffing, a for crater).
    #[arg(long, allow_hyphen_values = true, default_value = "-1:1:21")]
    h_range: Range,
    /// Name of the swept parameter [default: h for duffing, a for crater].
    #[arg(long)]
    sweep: Option<String>,
    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    est: EstArgs,
    /// Master seed; column j is simulated with a seed derived from (seed, j).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transition rule: `values[:min_support]` or `cells[:tau]`.
    #[arg(long, value_parser = parse_rule, default_value = "values:1")]
    #[serde(skip)]
    transition_rule: TransitionRule,
    /// Summary JSON with detected transitions.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Output plot CSV `<parameter>,L,dim,beta`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ErrorPlotArgs {
    /// Reference plot CSV.
    #[arg(long)]
    truth: PathBuf,
    /// Estimated plot CSV on the same grid.
    #[arg(long)]
    estimate: PathBuf,
    /// Output CSV `<parameter>,L,dim,err`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct RenderArgs {
    /// Plot or error CSV.
    #[arg(long)]
    plot: PathBuf,
    /// Homology dimension to draw.
    #[arg(long, default_value_t = 0)]
    dim: usize,
    /// Output SVG.
    #[arg(long)]
    out: PathBuf,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_output(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> pbif::Result<()>,
) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn direction(s: &str) -> CliResult<Direction> {
    s.parse()
        .map_err(|e: pbif::Error| CliError::Usage(e.to_string()))
}

fn pdf_grid(args: &PdfGridArgs) -> CliResult<()> {
    let (family, params, window, nx, ny) = match &args.model {
        Some(path) => {
            let spec: ModelSpec = read_json(path)?;
            let window = match spec.window {
                Some([x0, x1, y0, y1]) => {
                    Window::new(x0, x1, y0, y1).map_err(|e| CliError::Usage(e.to_string()))?
                }
                None => args.grid.window()?,
            };
            (
                spec.family,
                spec.params,
                window,
                spec.nx.unwrap_or(args.grid.nx),
                spec.ny.unwrap_or(args.grid.ny),
            )
        }
        None => (
            args.family.family.clone(),
            args.family.params(),
            args.grid.window()?,
            args.grid.nx,
            args.grid.ny,
        ),
    };
    let model = Registry::builtin().build(&family, &params)?;
    let mut field = evaluate_on_grid(&model, &window, nx, ny)?;
    if !args.raw {
        field = normalize_max(&field)?;
    }
    write_output(&args.out, |w| io::write_grid(&field, w))?;
    write_metadata(&args.out, None, args)
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let sim = args.sim.config()?;
    let system = system_for(&args.family.family, &args.family.params())?;
    let mut samples = simulate_stationary(&system, &sim, args.seed)?;
    if let Some(n) = args.greedy {
        samples = greedy_permutation(&samples, n);
    }
    write_output(&args.out, |w| io::write_points(&samples, w))?;
    write_metadata(&args.out, Some(args.seed), args)
}

fn kde(args: &KdeArgs) -> CliResult<()> {
    let samples = io::read_points(open(&args.points)?)?;
    let model = match &args.bandwidth {
        Some(bw) => Kde::new(samples, bw.clone())?,
        None => Kde::scott(samples)?,
    };
    let field = kde_on_grid(
        &model,
        &args.grid.window()?,
        args.grid.nx,
        args.grid.ny,
        !args.raw,
    )?;
    write_output(&args.out, |w| io::write_grid(&field, w))?;
    write_metadata(&args.out, None, args)
}

fn persist(args: &PersistArgs) -> CliResult<()> {
    let diagram = if let Some(path) = &args.grid {
        let field = io::read_grid(open(path)?)?;
        persistence(&build_filtration(&field, direction(&args.direction)?))?
    } else {
        let path = args.points.as_ref().expect("clap enforces one input");
        let cloud = io::read_points(open(path)?)?;
        if !(1..=2).contains(&args.max_dim) || !(args.r_max > 0.0) {
            return Err(CliError::Usage(
                "--max-dim must be 1 or 2 and --r-max positive".into(),
            ));
        }
        rips_persistence(&rips_filtration(&cloud, args.r_max, args.max_dim)?)?
    };
    write_output(&args.out, |w| io::write_diagram(&diagram, w))?;
    write_metadata(&args.out, None, args)
}

fn betti(args: &BettiArgs) -> CliResult<()> {
    let file = args.est.file()?;
    let (levels, dims) = args.levels.resolve(&file)?;
    let vectors = if let Some(path) = &args.points {
        let samples = io::read_points(open(path)?)?;
        let cfg = args.est.config(&file, SimulationConfig::default())?;
        estimate_from_samples(&samples, &levels, &dims, &cfg)?
    } else {
        let diagram = match (&args.grid, &args.diagram) {
            (Some(path), _) => pbif::cubical::superlevel_diagram(&io::read_grid(open(path)?)?)?,
            (_, Some(path)) => io::read_diagram(open(path)?, direction(&args.direction)?)?,
            _ => unreachable!("clap enforces one input"),
        };
        dims.iter()
            .map(|&d| diagram.betti_vector(&levels, d))
            .collect()
    };
    write_output(&args.out, |w| io::write_betti_vectors(&vectors, w))?;
    write_metadata(&args.out, None, args)
}

fn bifurcation_plot(args: &PlotArgs) -> CliResult<()> {
    let file = args.est.file()?;
    let (levels, dims) = args.levels.resolve(&file)?;
    let values = linspace(args.h_range.start, args.h_range.end, args.h_range.n);
    let mut sweep = Sweep::new(&args.family.family, values);
    if let Some(name) = &args.sweep {
        sweep.parameter = name.clone();
    }
    sweep.fixed = args.family.params();
    sweep.fixed.remove(&sweep.parameter);

    let (plot, seed) = if args.analytical {
        let grid = GridSpec {
            window: args.grid.window()?,
            nx: args.grid.nx,
            ny: args.grid.ny,
        };
        (
            analytical_plot(&Registry::builtin(), &sweep, &levels, &dims, &grid)?,
            None,
        )
    } else {
        let cfg = args.est.config(&file, args.sim.config()?)?;
        (
            estimated_plot(&sweep, &levels, &dims, &cfg, args.seed)?,
            Some(args.seed),
        )
    };
    write_output(&args.out, |w| io::write_plot(&plot, w))?;

    if let Some(path) = &args.summary {
        let transitions = dims
            .iter()
            .map(|&d| {
                Ok((
                    d.to_string(),
                    detect_transitions(&plot, d, args.transition_rule)?,
                ))
            })
            .collect::<pbif::Result<_>>()?;
        let summary = Summary {
            family: plot.family.clone(),
            parameter: plot.parameter.clone(),
            provenance: plot.provenance.to_string(),
            params: plot.params.clone(),
            levels: plot.levels.clone(),
            dims: plot.dims.clone(),
            rule: format!("{:?}", args.transition_rule),
            transitions,
        };
        write_json(path, &summary)?;
    }
    write_metadata(&args.out, seed, args)
}

fn error_plot_cmd(args: &ErrorPlotArgs) -> CliResult<()> {
    let truth: Plot = io::read_plot(open(&args.truth)?, "", Provenance::Analytical)?;
    let estimate: Plot = io::read_plot(open(&args.estimate)?, "", Provenance::Estimated)?;
    let err = error_plot(&truth, &estimate)?;
    write_output(&args.out, |w| {
        io::write_error_plot(&err, &truth.parameter, w)
    })?;
    write_metadata(&args.out, None, args)
}

fn render_cmd(args: &RenderArgs) -> CliResult<()> {
    let table = io::read_long_table::<f64, _>(open(&args.plot)?)?;
    let d = table
        .dims
        .iter()
        .position(|&d| d == args.dim)
        .ok_or_else(|| {
            CliError::Compute(format!(
                "{} has no rows for dimension {}",
                args.plot.display(),
                args.dim
            ))
        })?;
    let svg = render::render_svg(&table, d);
    std::fs::write(&args.out, svg).map_err(|e| CliError::io(&args.out, e))?;
    write_metadata(&args.out, None, args)
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::PdfGrid(a) => pdf_grid(a),
        Command::Simulate(a) => simulate(a),
        Command::Kde(a) => kde(a),
        Command::Persist(a) => persist(a),
        Command::Betti(a) => betti(a),
        Command::BifurcationPlot(a) => bifurcation_plot(a),
        Command::ErrorPlot(a) => error_plot_cmd(a),
        Command::Render(a) => render_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let line = line.strip_prefix("error: ").unwrap_or(line);
            eprintln!("pbif: {line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pbif: {}", e.message().replace('\n', " "));
            ExitCode::from(e.code())
        }
    }
}
