//! `netlap` — command-line driver for network Laplacian diagnostics.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 on usage, I/O, or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use netlap::defect;
use netlap::exact::{format_rational, parse_rational, Rational};
use netlap::heat;
use netlap::io as nio;
use netlap::network::{
    generate, Exhaustion, Generator, LaplacianMode, MatrixLaplacianView, ResistanceNetwork,
};
use netlap::spectral;
use netlap::Error as NetlapError;

#[derive(Parser)]
#[command(
    name = "netlap",
    version,
    about = "Energy forms, dipole kernels, spectral reciprocity, and heat diagnostics for weighted network Laplacians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a network file against the matrix-Laplacian conditions.
    Validate(ValidateArgs),
    /// Reciprocity, orthonormality, and Green residuals over an exhaustion.
    Reciprocity(ReciprocityArgs),
    /// Exact defect-vector table, regression check, and limit estimate.
    Defect(DefectArgs),
    /// Dirichlet heat-mass sweep along a family exhaustion.
    Heat(HeatArgs),
    /// Spectral-measure atoms along a family exhaustion.
    Measure(MeasureArgs),
    /// Off-diagonal growth norms along a nested filtration.
    Growth(GrowthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = false)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SourceArgs {
    /// Network JSON file.
    #[arg(long, conflicts_with = "generator")]
    network: Option<PathBuf>,
    /// Generator name: geometric (alias geometric_halfline), unit_path,
    /// binary_tree, complete, random (alias random_weighted).
    #[arg(long)]
    generator: Option<String>,
    /// Ratio b > 1 for the geometric family, as a rational like 2 or 5/2.
    #[arg(long)]
    b: Option<String>,
    /// Seed for the random generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation size (vertex count) for generated networks.
    #[arg(long)]
    n: Option<usize>,
    /// Origin vertex id (defaults to the first vertex).
    #[arg(long)]
    origin: Option<String>,
}

impl SourceArgs {
    fn family(&self) -> Result<Generator, CliError> {
        let name = self
            .generator
            .as_deref()
            .ok_or_else(|| CliError::usage("either --network or --generator is required"))?;
        match name {
            "geometric" | "geometric_halfline" => {
                let b = self
                    .b
                    .as_deref()
                    .ok_or_else(|| CliError::usage("--generator geometric requires --b"))?;
                Ok(Generator::GeometricHalfline {
                    ratio: parse_rational(b).map_err(CliError::usage_from)?,
                })
            }
            "unit_path" => Ok(Generator::UnitPath),
            "binary_tree" => Ok(Generator::BinaryTree),
            "complete" => Ok(Generator::Complete),
            "random" | "random_weighted" => Ok(Generator::RandomWeighted { seed: self.seed }),
            other => Err(CliError::usage(format!("unknown generator {other:?}"))),
        }
    }

    fn resolve(&self, default_n: usize) -> Result<(ResistanceNetwork, usize), CliError> {
        let net = if let Some(path) = &self.network {
            nio::load_network(path).map_err(CliError::from_netlap)?
        } else {
            let family = self.family()?;
            let n = self.n.unwrap_or(default_n);
            generate(&family, n).map_err(CliError::from_netlap)?
        };
        let origin = match &self.origin {
            None => net.origin(),
            Some(label) => (0..net.len())
                .find(|&x| net.label_of(x) == *label)
                .ok_or_else(|| CliError::usage(format!("unknown origin vertex {label:?}")))?,
        };
        Ok((net, origin))
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Network JSON file.
    #[arg(long)]
    network: PathBuf,
    /// Tolerance for determinant nonnegativity.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReciprocityArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// First exhaustion index.
    #[arg(long, default_value_t = 1)]
    kmin: usize,
    /// Last exhaustion index (defaults to the full index set).
    #[arg(long)]
    kmax: Option<usize>,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DefectArgs {
    /// Growth ratio b > 1, as a rational like 2 or 5/2.
    #[arg(long)]
    b: String,
    /// Largest index of the emitted table.
    #[arg(long, default_value_t = 9)]
    n: usize,
    /// Compare the computed table against the embedded b = 2 fixture.
    #[arg(long)]
    check_reference: bool,
    /// Also certify the limiting value within --tol.
    #[arg(long)]
    limit: bool,
    /// Tolerance for --limit.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HeatArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Diffusion time.
    #[arg(long)]
    t: f64,
    /// Row vertex of the mass sequence.
    #[arg(long, default_value_t = 0)]
    x: usize,
    /// Largest exhaustion index.
    #[arg(long, default_value_t = 40)]
    kmax: usize,
    /// Tolerance (used for the mass upper-bound check).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 2)]
    kmin: usize,
    #[arg(long, default_value_t = 15)]
    kmax: usize,
    /// Tolerance (used for the atom-mass sanity check).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 1)]
    kmin: usize,
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    /// Tolerance (unused by the sweep itself, accepted for uniformity).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Error carrying the process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn usage_from(err: NetlapError) -> Self {
        CliError::usage(err.to_string())
    }

    fn check(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn from_netlap(err: NetlapError) -> Self {
        CliError::usage(err.to_string())
    }
}

fn emit(output: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.network)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.network.display())))?;
    // Semantic defects (bad conductances, disconnection) are check
    // failures with a report; malformed JSON is a usage error.
    let net = match nio::parse_network(&text) {
        Ok(net) => net,
        Err(err @ (NetlapError::Parse(_) | NetlapError::UnknownVertex(_))) => {
            return Err(CliError::usage_from(err));
        }
        Err(err) => {
            let body = serde_json::json!({
                "is_laplacian": false,
                "violations": [err.to_string()],
                "principal_minors": [],
            });
            emit(
                &args.output,
                &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
            )?;
            return Err(CliError::check(err.to_string()));
        }
    };

    let mode = if net.family().is_some() {
        LaplacianMode::FamilyRow
    } else {
        LaplacianMode::Interior
    };
    let view = MatrixLaplacianView::from_network(&net, mode);
    let report = netlap::network::validate_matrix_laplacian(&view);
    let interior = MatrixLaplacianView::from_network(&net, LaplacianMode::Interior);
    let k_top = net.len().min(12);
    let prefixes =
        Exhaustion::prefixes(net.len(), 0, k_top - 1).map_err(CliError::from_netlap)?;
    let minors = netlap::network::principal_minor_check(&interior, &prefixes);
    // tolerance scaled by the Hadamard bound of each submatrix
    let minors_ok = prefixes.sets().iter().zip(&minors).all(|(set, &d)| {
        let scale: f64 = set.iter().map(|&x| interior.diagonal(x).max(1.0)).product();
        d >= -args.tol * scale
    });
    let pass = report.is_laplacian() && minors_ok;

    let violations: Vec<String> = report.violations.iter().map(|v| format!("{v:?}")).collect();
    let content = match args.output.format {
        Format::Json => {
            let body = serde_json::json!({
                "is_laplacian": report.is_laplacian(),
                "violations": violations,
                "principal_minors": minors,
                "principal_minors_nonnegative": minors_ok,
            });
            format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
        }
        Format::Csv => {
            let mut out = String::from("check,value\n");
            out.push_str(&format!("is_laplacian,{}\n", report.is_laplacian()));
            for v in &violations {
                out.push_str(&format!("violation,{v}\n"));
            }
            for (k, d) in minors.iter().enumerate() {
                out.push_str(&format!("principal_minor_{k},{d}\n"));
            }
            out
        }
    };
    emit(&args.output, &content)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::check("matrix-Laplacian validation failed"))
    }
}

fn run_reciprocity(args: &ReciprocityArgs) -> Result<(), CliError> {
    let (net, origin) = args.source.resolve(12)?;
    let kmax = args.kmax.unwrap_or(net.len() - 1);
    let ex = Exhaustion::origin_free_prefixes(net.len(), origin, args.kmin, kmax)
        .map_err(CliError::from_netlap)?;
    let mut reports = Vec::new();
    for (i, set) in ex.sets().iter().enumerate() {
        let residual =
            spectral::verify_reciprocity(&net, origin, set).map_err(CliError::from_netlap)?;
        reports.push(nio::ResidualReport::new(
            format!("reciprocity_k{}", args.kmin + i),
            residual,
            args.tol,
        ));
    }
    let content = match args.output.format {
        Format::Json => format!("{}\n", nio::residual_report_json(&reports)),
        Format::Csv => {
            let mut out = String::from("k,residual,pass\n");
            for (i, r) in reports.iter().enumerate() {
                out.push_str(&format!("{},{:e},{}\n", args.kmin + i, r.value, r.pass));
            }
            out
        }
    };
    emit(&args.output, &content)?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(CliError::check("reciprocity residual above tolerance"))
    }
}

fn run_defect(args: &DefectArgs) -> Result<(), CliError> {
    let b: Rational = parse_rational(&args.b).map_err(CliError::usage_from)?;
    let series = defect::defect_recursion(&b, args.n).map_err(CliError::usage_from)?;

    let mut rows = String::new();
    match args.output.format {
        Format::Csv => {
            rows.push_str("n,fraction,decimal\n");
            for n in 1..=args.n {
                rows.push_str(&format!(
                    "{},{},{}\n",
                    n,
                    format_rational(&series.value(n)),
                    series.value_f64(n)
                ));
            }
        }
        Format::Json => {
            let body: Vec<serde_json::Value> = (1..=args.n)
                .map(|n| {
                    serde_json::json!({
                        "n": n,
                        "fraction": format_rational(&series.value(n)),
                        "decimal": series.value_f64(n),
                    })
                })
                .collect();
            rows = format!("{}\n", serde_json::to_string_pretty(&body).unwrap());
        }
    }

    if args.limit {
        let est = defect::defect_limit(&b, args.tol).map_err(CliError::usage_from)?;
        let digits = (-args.tol.log10()).ceil().max(0.0) as usize;
        rows.push_str(&format!(
            "limit {:.*} +/- {:e} (certified tail bound {:e} after {} terms)\n",
            digits, est.value, args.tol, est.tail_bound, est.terms
        ));
    }

    emit(&args.output, &rows)?;

    if args.check_reference {
        let deep = defect::defect_recursion(&b, 10).map_err(CliError::usage_from)?;
        defect::check_against_reference(&deep)
            .map_err(|e| CliError::check(format!("reference mismatch: {e}")))?;
    }
    Ok(())
}

fn run_heat(args: &HeatArgs) -> Result<(), CliError> {
    let family = args.source.family()?;
    let masses =
        heat::stochastic_mass(&family, args.kmax, args.t, args.x).map_err(CliError::from_netlap)?;
    let content = match args.output.format {
        Format::Csv => nio::mass_csv(&masses),
        Format::Json => {
            let body: Vec<serde_json::Value> = masses
                .iter()
                .map(|&(k, m)| serde_json::json!({"k": k, "mass": m}))
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
        }
    };
    emit(&args.output, &content)?;
    if masses.iter().all(|&(_, m)| m <= 1.0 + args.tol) {
        Ok(())
    } else {
        Err(CliError::check("heat mass exceeded one"))
    }
}

fn run_measure(args: &MeasureArgs) -> Result<(), CliError> {
    let family = args.source.family()?;
    let measures =
        spectral::family_measures(&family, args.kmin, args.kmax).map_err(CliError::from_netlap)?;
    let content = match args.output.format {
        Format::Csv => nio::atoms_csv(&measures),
        Format::Json => {
            let body: Vec<serde_json::Value> = measures
                .iter()
                .map(|mu| {
                    serde_json::json!({
                        "k": mu.exhaustion_index,
                        "atoms": mu.atoms.iter().map(|&(s, w)| serde_json::json!([s, w])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
        }
    };
    emit(&args.output, &content)?;
    if measures
        .iter()
        .all(|mu| (mu.total_mass() - 1.0).abs() <= args.tol)
    {
        Ok(())
    } else {
        Err(CliError::check("spectral-measure weights do not sum to one"))
    }
}

fn run_growth(args: &GrowthArgs) -> Result<(), CliError> {
    let (net, _) = args.source.resolve(args.kmax + 4)?;
    if args.kmax + 2 > net.len() {
        return Err(CliError::usage(format!(
            "kmax {} needs a truncation larger than {}",
            args.kmax,
            net.len()
        )));
    }
    let view = MatrixLaplacianView::from_network(&net, LaplacianMode::Interior);
    let ex = Exhaustion::prefixes(net.len(), args.kmin, args.kmax).map_err(CliError::from_netlap)?;
    let report = heat::off_diagonal_growth(&view, &ex);
    let content = match args.output.format {
        Format::Json => format!("{}\n", nio::growth_report_json(&report, args.kmin)),
        Format::Csv => {
            let mut out = String::from("k,norm,partial_sum\n");
            for (i, (n, s)) in report.norms.iter().zip(&report.partial_sums).enumerate() {
                out.push_str(&format!("{},{},{}\n", args.kmin + i, n, s));
            }
            out.push_str(&format!("verdict,{},\n", nio::verdict_str(report.verdict)));
            out
        }
    };
    emit(&args.output, &content)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(args) => run_validate(args),
        Command::Reciprocity(args) => run_reciprocity(args),
        Command::Defect(args) => run_defect(args),
        Command::Heat(args) => run_heat(args),
        Command::Measure(args) => run_measure(args),
        Command::Growth(args) => run_growth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("netlap: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
