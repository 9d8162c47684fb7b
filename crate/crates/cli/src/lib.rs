//! Command-line front end: solve bundled problems, plot and inspect saved
//! histories.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use slsqp::history::{load_history, SaveConfig, SaveIter, DEFAULT_SUMMARY_PATH, SAVE_VARS};
use slsqp::problems::{list_problems, lookup};
use slsqp::scaling::ScaleSpec;
use slsqp::viz::{render_series, VizConfig, DEFAULT_VARS};
use slsqp::{optimize, Error, FdOptions, SolverOptions, Status};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "slsqp", version, about = "SLSQP nonlinear programming solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a bundled problem
    Solve(SolveArgs),
    /// Plot series from a save file
    Plot {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a save file's header and per-iteration table
    Inspect {
        #[arg(long)]
        file: PathBuf,
    },
    /// List bundled problems
    ListProblems,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    acc: Option<f64>,
    #[arg(long)]
    maxiter: Option<usize>,
    #[arg(long)]
    fd_abs: Option<f64>,
    #[arg(long)]
    fd_rel: Option<f64>,
    /// One value for all variables, or one per variable
    #[arg(long, value_delimiter = ',')]
    x_scaler: Option<Vec<f64>>,
    #[arg(long)]
    obj_scaler: Option<f64>,
    /// One value for all constraints, or one per constraint
    #[arg(long, value_delimiter = ',')]
    con_scaler: Option<Vec<f64>>,
    /// Use the scalers and finite-difference step the problem was posed with
    #[arg(long)]
    suggested_options: bool,
    #[arg(long)]
    save_file: Option<PathBuf>,
    #[arg(long, default_value = "major")]
    save_itr: String,
    #[arg(long, value_delimiter = ',')]
    save_vars: Option<Vec<String>>,
    #[arg(long)]
    summary_file: Option<PathBuf>,
    /// Series to plot; objective, optimality and feasibility if none given
    #[arg(long, num_args = 0..=1, value_delimiter = ',')]
    visualize: Option<Vec<String>>,
    #[arg(long, default_value = "slsqp_plot.png")]
    viz_out: PathBuf,
    #[arg(long)]
    warm_start: Option<PathBuf>,
    #[arg(long)]
    hot_start: Option<PathBuf>,
    /// Do not print the iteration table
    #[arg(long)]
    quiet: bool,
}

fn scale_spec(v: Vec<f64>) -> ScaleSpec {
    match v.as_slice() {
        [s] => ScaleSpec::Uniform(*s),
        _ => ScaleSpec::PerComponent(v),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let bundled = lookup(&a.problem)?;
    let mut opts = SolverOptions::default();
    if a.suggested_options {
        if let Some(s) = &bundled.suggested {
            opts = opts
                .with_scalers(s.x_scaler.clone(), s.obj_scaler, s.con_scaler.clone())
                .with_fd(s.fd);
        }
    }
    if let Some(acc) = a.acc {
        opts.acc = acc;
    }
    if let Some(maxiter) = a.maxiter {
        opts.maxiter = maxiter;
    }
    match (a.fd_abs, a.fd_rel) {
        (Some(h), _) => opts.fd = FdOptions::absolute(h),
        (None, Some(h)) => opts.fd = FdOptions::relative(h),
        (None, None) => {}
    }
    if let Some(v) = a.x_scaler {
        opts.x_scaler = scale_spec(v);
    }
    if let Some(v) = a.obj_scaler {
        opts.obj_scaler = v;
    }
    if let Some(v) = a.con_scaler {
        opts.con_scaler = scale_spec(v);
    }
    if let Some(path) = a.save_file {
        let itr: SaveIter = a.save_itr.parse()?;
        opts.save = Some(match a.save_vars {
            Some(vars) => SaveConfig::new(path, itr, &vars)?,
            None => SaveConfig::all_vars(path, itr),
        });
    }
    opts.summary_path = Some(
        a.summary_file
            .unwrap_or_else(|| DEFAULT_SUMMARY_PATH.into()),
    );
    if let Some(vars) = a.visualize {
        let vars: Vec<String> = if vars.is_empty() {
            DEFAULT_VARS.iter().map(|s| s.to_string()).collect()
        } else {
            vars
        };
        opts.visualize = Some(VizConfig::new(&vars, a.viz_out));
    }
    opts.warm_start = a.warm_start;
    opts.hot_start = a.hot_start;
    opts.print_summary = !a.quiet;

    let mut problem = bundled.spec.validate()?;
    let res = optimize(&mut problem, &opts)?;
    let _ = writeln!(out, "problem:     {}", bundled.name);
    let _ = writeln!(out, "status:      {}", res.status);
    let _ = writeln!(out, "message:     {}", res.message);
    let _ = writeln!(out, "x*:          {}", fmt_vec(res.x.as_slice()));
    let _ = writeln!(out, "f*:          {}", res.f);
    let _ = writeln!(out, "optimality:  {:e}", res.optimality);
    let _ = writeln!(out, "feasibility: {:e}", res.feasibility);
    let _ = writeln!(out, "num_majiter: {}", res.num_majiter);
    let _ = writeln!(out, "nfev:        {}", res.nfev);
    let _ = writeln!(out, "ngev:        {}", res.ngev);
    for w in &res.warnings {
        let _ = writeln!(out, "warning:     {w}");
    }
    Ok(if res.status == Status::Converged {
        EXIT_CONVERGED
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) => slsqp::history::format_sci(v, 8),
        None => "-".into(),
    }
}

fn inspect(file: PathBuf, out: &mut dyn Write) -> Result<i32, Error> {
    let h = load_history(&file)?;
    let hd = &h.header;
    let _ = writeln!(out, "file:      {}", file.display());
    let _ = writeln!(out, "version:   {}", hd.version);
    let _ = writeln!(out, "n, m, meq: {}, {}, {}", hd.n, hd.m, hd.meq);
    let _ = writeln!(out, "save_itr:  {:?}", hd.save_itr);
    let _ = writeln!(out, "save_vars: {}", hd.save_vars.join(","));
    let _ = writeln!(out, "options:   {}", hd.options);
    let _ = writeln!(
        out,
        "records:   {} major, {} eval",
        h.num_majors(),
        h.evals().count()
    );
    if h.truncated {
        let _ = writeln!(out, "warning:   torn final line dropped");
    }
    let _ = writeln!(
        out,
        "{:>5} {:>15} {:>15} {:>15} {:>15}  x",
        "MAJOR", "OBJFUN", "OPTIMALITY", "FEASIBILITY", "STEP"
    );
    for (k, r) in h.majors().enumerate() {
        let x = r.x.as_deref().map(fmt_vec).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:>5} {:>15} {:>15} {:>15} {:>15}  {x}",
            r.majiter.unwrap_or(k),
            cell(r.objective),
            cell(r.optimality_scaled),
            cell(r.feasibility_scaled),
            cell(r.step),
        );
    }
    Ok(0)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Error> {
    match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Plot {
            file,
            vars,
            out: path,
        } => {
            let h = load_history(&file)?;
            let report = render_series(&h, &VizConfig::new(&vars, path))?;
            let _ = writeln!(
                out,
                "wrote {} ({} panels)",
                report.path.display(),
                report.panels
            );
            Ok(0)
        }
        Command::Inspect { file } => inspect(file, out),
        Command::ListProblems => {
            for p in list_problems() {
                let _ = writeln!(out, "{:<18} {}", p.name, p.description);
            }
            let _ = writeln!(out, "save variables: {}", SAVE_VARS.join(","));
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out`. Returns the process exit code.
pub fn run_with_output<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_CONVERGED
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_output(args, &mut std::io::stdout())
}
