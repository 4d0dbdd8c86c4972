use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tessella_core::coincidence::graph_to_dot;
use tessella_core::corpus;
use tessella_core::cps::{windows_to_csv, windows_to_json, windows_to_svg};
use tessella_core::report::{analyze, AnalysisOptions, SEED_N_MAX};
use tessella_core::system::{
    parse_spec, solve_adjoint, validate_disjointness, Primitivity, SubstitutionSpec,
};
use tessella_core::tiling::{
    find_seed, generate_generations, generate_patch_with, max_tiles_budget, patch_to_csv,
    patch_to_json, patch_to_svg, TilingError,
};
use tessella_core::Execution;

const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Pure point spectrum analysis for substitution Delone multi-colour sets and tilings.
///
/// Budgets: TESSELLA_MAX_TILES (default 1000000) and TESSELLA_MAX_CLASSES.
#[derive(Parser, Debug)]
#[command(name = "tessella", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a spec and check primitivity, tile geometry and disjointness.
    Validate {
        /// Spec file, or the name of a bundled corpus system.
        spec: String,
    },
    /// Run the full pipeline and emit the JSON report.
    Analyze(AnalyzeArgs),
    /// Generate a patch and export it.
    Patch(PatchArgs),
}

#[derive(clap::Args, Debug)]
struct AnalyzeArgs {
    /// Spec file, or the name of a bundled corpus system.
    spec: String,
    /// Patch radius.
    #[arg(long, default_value_t = 200.0)]
    radius: f64,
    /// Seed radius R for Ξ in the overlap search; the stability rerun uses 2R.
    #[arg(long, default_value_t = 20.0)]
    xi_radius: f64,
    /// Largest exponent M in the algebraic witness search.
    #[arg(long, default_value_t = 12)]
    m_max: u32,
    /// Radius of the Ξ sample pushed forward by Q^M in the witness search.
    #[arg(long, default_value_t = 2.0)]
    witness_radius: f64,
    /// Skip window estimation and the sandwich check.
    #[arg(long)]
    no_cps: bool,
    /// Sandwich margin.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Sandwich radius (default λ^8, capped at the patch radius).
    #[arg(long)]
    sandwich_radius: Option<f64>,
    /// Run every stage on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write the overlap graph in DOT format.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Write an SVG rendering of the patch.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Write the window estimates; the format follows the extension (csv, json or svg).
    #[arg(long, value_name = "PATH")]
    windows: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Svg,
    Csv,
}

#[derive(clap::Args, Debug)]
struct PatchArgs {
    /// Spec file, or the name of a bundled corpus system.
    spec: String,
    /// Patch radius.
    #[arg(long, conflicts_with = "generations")]
    radius: Option<f64>,
    /// Number of substitution steps applied to the seed tile, without pruning.
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Stage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Io { .. } | CliError::Stage(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { spec } => validate(&spec),
        Command::Analyze(args) => run_analyze(&args),
        Command::Patch(args) => run_patch(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Reads a spec file, falling back to the bundled corpus when no such file exists.
fn read_source(spec: &str) -> Result<String, CliError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(doc) = corpus::document(spec) {
            return Ok(doc.to_string());
        }
    }
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: spec.to_string(),
        source,
    })
}

fn load(spec: &str) -> Result<(String, SubstitutionSpec), CliError> {
    let source = read_source(spec)?;
    let parsed = parse_spec(&source).map_err(|e| CliError::Invalid(format!("{spec}: {e}")))?;
    Ok((source, parsed))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None if text.ends_with('\n') => {
            print!("{text}");
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn validate(spec_arg: &str) -> Result<u8, CliError> {
    let (_, spec) = load(spec_arg)?;
    println!("dimension: {}", spec.dimension);
    println!("colours: {}", spec.colours.join(", "));
    let matrix = spec.substitution_matrix();
    match matrix.primitivity() {
        Primitivity::Primitive(k) => println!("primitive: S^{k} > 0"),
        Primitivity::NotPrimitive => println!("primitive: no"),
    }
    println!(
        "perron eigenvalue: {:.12} (error bound {:.1e})",
        matrix.perron.value,
        matrix.perron.error_bound()
    );
    for w in &spec.warnings {
        println!("warning: {w}");
    }
    let geometry =
        solve_adjoint(&spec).map_err(|e| CliError::Invalid(format!("{spec_arg}: {e}")))?;
    if let Some(lengths) = &geometry.lengths {
        for (c, l) in spec.colours.iter().zip(lengths) {
            println!("length {c}: {l} ≈ {:.9}", l.to_f64());
        }
    }
    for (c, v) in spec.colours.iter().zip(&geometry.volumes) {
        println!("volume {c}: {v} ≈ {:.9}", v.to_f64());
    }
    let disjointness = validate_disjointness(&spec, 50.0);
    if !disjointness.disjoint {
        for v in &disjointness.violations {
            println!(
                "duplicate point: colour {} at {} from {} and {}",
                v.colour, v.location, v.parents[0], v.parents[1]
            );
        }
        return Err(CliError::Invalid(format!(
            "{spec_arg}: the point substitution produces repeated points"
        )));
    }
    println!("disjoint: yes");
    if matrix.primitivity() == Primitivity::NotPrimitive {
        return Err(CliError::Invalid(format!(
            "{spec_arg}: substitution matrix is not primitive"
        )));
    }
    Ok(0)
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let (source, spec) = load(&args.spec)?;
    let options = AnalysisOptions {
        radius: args.radius,
        xi_radius: args.xi_radius,
        m_max: args.m_max,
        witness_radius: args.witness_radius,
        cps: !args.no_cps,
        epsilon: args.epsilon,
        sandwich_radius: args.sandwich_radius,
        exec: execution(args.sequential),
        ..AnalysisOptions::default()
    };
    let (mut report, artifacts) =
        analyze(&spec, &options).map_err(|e| CliError::Invalid(format!("{}: {e}", args.spec)))?;
    report.set_source(&source);
    write_output(args.out.as_deref(), &report.to_json())?;
    if let Some(path) = &args.dot {
        let dot = match &artifacts.overlaps {
            Some(a) => graph_to_dot(&a.graph, &spec),
            None => "digraph overlaps {\n}\n".to_string(),
        };
        write_output(Some(path), &dot)?;
    }
    if let Some(path) = &args.svg {
        if let Some(patch) = &artifacts.patch {
            write_output(Some(path), &patch_to_svg(patch, &spec))?;
        } else {
            eprintln!(
                "warning: no patch was generated, {} not written",
                path.display()
            );
        }
    }
    if let Some(path) = &args.windows {
        let extension = path.extension().and_then(|e| e.to_str()).unwrap_or("csv");
        let text = match extension {
            "json" => Some(
                serde_json::to_string_pretty(&windows_to_json(&artifacts.windows, &spec.colours))
                    .expect("windows serialize"),
            ),
            "svg" => windows_to_svg(&artifacts.windows),
            _ => Some(windows_to_csv(&artifacts.windows, &spec.colours)),
        };
        match text {
            Some(t) if !artifacts.windows.is_empty() => write_output(Some(path), &t)?,
            _ => eprintln!(
                "warning: no window estimates in this format, {} not written",
                path.display()
            ),
        }
    }
    Ok(if report.budget_exceeded() {
        EXIT_BUDGET
    } else {
        0
    })
}

fn budget_or_stage(e: TilingError) -> CliError {
    match e {
        TilingError::Budget { .. } => CliError::Budget(e.to_string()),
        other => CliError::Stage(other.to_string()),
    }
}

fn run_patch(args: &PatchArgs) -> Result<u8, CliError> {
    let (_, spec) = load(&args.spec)?;
    let geometry =
        solve_adjoint(&spec).map_err(|e| CliError::Invalid(format!("{}: {e}", args.spec)))?;
    let seed = find_seed(&spec, &geometry, SEED_N_MAX).map_err(budget_or_stage)?;
    let exec = Execution::default();
    let patch = match args.generations {
        Some(g) => generate_generations(&spec, &geometry, &seed, g, max_tiles_budget(), exec),
        None => generate_patch_with(
            &spec,
            &geometry,
            &seed,
            args.radius.unwrap_or(20.0),
            max_tiles_budget(),
            exec,
        ),
    }
    .map_err(budget_or_stage)?;
    let text = match args.format {
        Format::Json => {
            serde_json::to_string_pretty(&patch_to_json(&patch, &spec)).expect("patch serializes")
        }
        Format::Svg => patch_to_svg(&patch, &spec),
        Format::Csv => patch_to_csv(&patch, &spec),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(0)
}
