use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use gradefit::lad::{fit_lad_alternating, fit_lad_lp, lad_primal_problem};
use gradefit::linprog::write_lp;
use gradefit::lsq::fit_ls;
use gradefit::records::{parse_scale, read_book, render_book, InputError, ParseOptions};
use gradefit::report::{course_rows, estimates_csv, render_report, student_rows};
use gradefit::simulate::{generate, recovery_metrics, Enrollment, SyntheticSpec};
use gradefit::{FitResult, GradeBook, GradeScale};

#[derive(Debug, Parser)]
#[command(name = "gradefit", version, about = "Separate student aptitude from course grade inflation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the additive model to a grade file and write ranked reports.
    Fit(FitArgs),
    /// Generate a synthetic grade book with known aptitudes and inflations.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Least squares.
    Ls,
    /// Least absolute deviations, solved exactly as a linear program.
    Lad,
    /// Least absolute deviations by alternating medians (heuristic).
    LadAlt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LadderArg {
    /// A 4.0, A- 3.7, B+ 3.3, ... in steps of 0.3/0.4.
    Standard,
    /// A 4, A- 11/3, B+ 10/3, ... in exact thirds.
    Thirds,
}

impl LadderArg {
    fn scale(self) -> GradeScale {
        match self {
            LadderArg::Standard => GradeScale::standard(),
            LadderArg::Thirds => GradeScale::thirds(),
        }
    }
}

#[derive(Debug, clap::Args)]
struct FitArgs {
    /// Grade records: `student course grade` per line.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long, value_enum, default_value_t = MethodArg::Ls)]
    method: MethodArg,
    /// Built-in letter ladder.
    #[arg(long, value_enum, default_value_t = LadderArg::Standard)]
    ladder: LadderArg,
    /// Letter ladder file (`letter points` per line); overrides --ladder.
    #[arg(long, value_name = "FILE")]
    scale: Option<PathBuf>,
    /// Accept numeric grades outside the ladder's range.
    #[arg(long)]
    allow_out_of_range: bool,
    /// Leave rows with fewer grades than this out of the text reports.
    #[arg(long, value_name = "K", default_value_t = 1)]
    min_enrollment: usize,
    /// Directory for courses.txt, students.txt and estimates.csv.
    #[arg(short, long, value_name = "DIR", default_value = ".")]
    output: PathBuf,
    /// Also write the LAD linear program in CPLEX LP format.
    #[arg(long, value_name = "FILE")]
    dump_lp: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    students: usize,
    #[arg(long)]
    courses: usize,
    /// Courses per student.
    #[arg(long)]
    per_student: usize,
    /// Draw each student's course count uniformly from per-student..=N.
    #[arg(long, value_name = "N")]
    per_student_max: Option<usize>,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snap grades to the nearest rung of a letter ladder.
    #[arg(long, value_enum)]
    quantize: Option<LadderArg>,
    /// Where to write the generated records.
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
    /// Fit the generated book and report how well the truth is recovered.
    #[arg(long)]
    fit: bool,
    #[arg(short, long, value_enum, default_value_t = MethodArg::Ls)]
    method: MethodArg,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn run_fit(book: &GradeBook, method: MethodArg) -> FitResult {
    match method {
        MethodArg::Ls => fit_ls(book),
        MethodArg::Lad => fit_lad_lp(book),
        MethodArg::LadAlt => fit_lad_alternating(book),
    }
}

fn print_diagnostics(book: &GradeBook, fit: &FitResult) {
    let d = &fit.diagnostics;
    eprintln!("method:      {}", fit.method);
    eprintln!(
        "data:        {} grades, {} students, {} courses",
        book.len(),
        book.num_students(),
        book.num_courses()
    );
    eprintln!("components:  {}", d.components);
    eprintln!("iterations:  {} (converged: {})", d.iterations, d.converged);
    eprintln!("objective:   {:.6}", fit.objective);
    eprintln!("scale:       {:.6}", fit.scale);
    if let Some(s) = d.stationarity {
        eprintln!("stationarity: {s:.3e}");
    }
    if let Some(g) = d.duality_gap {
        eprintln!("duality gap: {g:.3e}");
    }
    for note in &d.notes {
        eprintln!("warning: {note}");
    }
}

fn report_notes(fit: &FitResult) -> Vec<String> {
    let mut notes = vec![format!(
        "method {}, scale {:.4}; columns: id, estimate ± stderr, count",
        fit.method, fit.scale
    )];
    if fit.method.is_lad() {
        notes.push(
            "error bars are heuristic for LAD: RMS residual at the LAD solution / sqrt(count)".into(),
        );
    }
    if fit.diagnostics.disconnected() {
        notes.push(format!(
            "WARNING: {} disconnected groups; estimates are comparable only within a group",
            fit.diagnostics.components
        ));
    }
    notes
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let scale = match &args.scale {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            parse_scale(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        None => args.ladder.scale(),
    };
    let opts = ParseOptions {
        scale,
        strict_range: !args.allow_out_of_range,
    };
    let book = read_book(&args.input, &opts).map_err(|e| match e {
        InputError::Io { .. } => data_err(e),
        _ => CliError::Data(format!("{}: {e}", args.input.display())),
    })?;

    if let Some(path) = &args.dump_lp {
        write_file(path, &write_lp(&lad_primal_problem(&book)))?;
    }

    let fit = run_fit(&book, args.method);
    print_diagnostics(&book, &fit);

    fs::create_dir_all(&args.output)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.output.display())))?;
    let notes = report_notes(&fit);
    let courses = render_report(
        "courses, least inflated first",
        &course_rows(&book, &fit),
        args.min_enrollment,
        &notes,
    );
    let students = render_report(
        "students, highest aptitude first",
        &student_rows(&book, &fit),
        args.min_enrollment,
        &notes,
    );
    write_file(&args.output.join("courses.txt"), &courses)?;
    write_file(&args.output.join("students.txt"), &students)?;
    write_file(&args.output.join("estimates.csv"), &estimates_csv(&book, &fit))?;
    eprintln!("wrote courses.txt, students.txt, estimates.csv to {}", args.output.display());

    if !fit.diagnostics.converged {
        return Err(CliError::NotConverged(format!(
            "{} did not converge; reports were written but may be inaccurate",
            fit.method
        )));
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut spec = SyntheticSpec::new(args.students, args.courses, args.per_student)
        .seed(args.seed)
        .sigma(args.sigma);
    if let Some(hi) = args.per_student_max {
        spec.enrollment = Enrollment::Range(args.per_student, hi);
    }
    spec.quantize = args.quantize.map(LadderArg::scale);
    let syn = generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&args.output, &render_book(&syn.book))?;
    println!(
        "generated {} grades for {} students in {} courses (seed {}, sigma {}, connected: {})",
        syn.book.len(),
        syn.book.num_students(),
        syn.book.num_courses(),
        args.seed,
        args.sigma,
        syn.connected
    );
    if args.fit {
        let fit = run_fit(&syn.book, args.method);
        let m = recovery_metrics(&syn.book, &syn.truth, &fit).map_err(data_err)?;
        println!("method:           {}", fit.method);
        println!("mu rmse:          {:.3e}", m.mu_rmse);
        println!("mu max abs error: {:.3e}", m.mu_max_abs);
        println!("nu rmse:          {:.3e}", m.nu_rmse);
        println!("nu max abs error: {:.3e}", m.nu_max_abs);
        println!("mu rank corr:     {:.4}", m.mu_rank_correlation);
        println!("scale:            {:.6}", fit.scale);
        if !fit.diagnostics.converged {
            return Err(CliError::NotConverged(format!("{} did not converge", fit.method)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
