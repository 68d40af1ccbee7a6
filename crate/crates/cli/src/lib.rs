//! Command-line front end for the iteration theory and the experiments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use sdeiter::growth::{growth, iterations_needed, ImplicitnessClass, IterationKind};
use sdeiter::harness::{
    dyadic_steps, ms_stability_factor, ms_stability_monte_carlo, vdp_demo, write_csv, Experiment,
    ExperimentResult, Reference, StabilityScheme,
};
use sdeiter::problems::{by_name, SdeProblem};
use sdeiter::schemes::scheme_by_name;
use sdeiter::solvers::SolveConfig;
use sdeiter::tree::{enumerate_trees, Order};
use sdeiter::verify::growth_sharpness;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sdeiter", version, about = "Iterated implicit stochastic Taylor methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the colored trees up to an order with their growth values.
    Trees {
        #[arg(long, default_value = "2")]
        max_order: Order,
        /// Number of colors, including the deterministic color 0.
        #[arg(long, default_value_t = 2)]
        colors: u8,
    },
    /// Iterations needed per order, general and (semi-implicit).
    GrowthTable {
        #[arg(long, default_value = "3")]
        max_order: Order,
        #[arg(long)]
        no_moment_flag: bool,
    },
    /// Iterations needed for one order.
    Iters {
        #[arg(long)]
        order: Order,
        #[arg(long, default_value = "simple")]
        iteration: IterationKind,
        #[arg(long, default_value = "full")]
        implicitness: ImplicitnessClass,
        #[arg(long)]
        no_moment_flag: bool,
        /// Growth of the predictor.
        #[arg(long, default_value_t = 0)]
        predictor_growth: u32,
    },
    /// Check symbolically that iterated weights settle when the growth
    /// function says so.
    VerifySymbolic {
        #[arg(long, default_value = "5/2")]
        max_order: Order,
        #[arg(long, default_value = "simple")]
        iteration: IterationKind,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "full")]
        implicitness: ImplicitnessClass,
    },
    /// Strong convergence experiment.
    Converge(ConvergeArgs),
    /// Weak convergence experiment.
    Weak(ConvergeArgs),
    /// Mean-square stability factor of the Euler schemes for GBM.
    Stability {
        #[arg(long, default_value = "euler-semi")]
        scheme: String,
        /// Complex drift coefficient, e.g. `-3` or `-1+2i`.
        #[arg(long, default_value = "-3", allow_hyphen_values = true)]
        mu: String,
        #[arg(long, default_value = "1.7320508075688772", allow_hyphen_values = true)]
        sigma: String,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Also estimate the factor by simulation with this many paths.
        #[arg(long)]
        mc_paths: Option<usize>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Explicit and semi-implicit Milstein on one Van der Pol path.
    VdpDemo {
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
        #[arg(long, default_value_t = 10.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Write results to this CSV file (plus a gnuplot script beside it).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value = "nonlinear1d")]
    problem: String,
    #[arg(long, default_value = "simple")]
    method: IterationKind,
    /// Fixed number of iterations per step.
    #[arg(long, conflicts_with = "tol")]
    iters: Option<usize>,
    /// Iterate each step until successive iterates differ by at most this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Coarsest step size exponent: h = 2^-from.
    #[arg(long)]
    from: Option<i32>,
    /// Finest step size exponent.
    #[arg(long)]
    to: Option<i32>,
    /// Number of paths.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Reference grid refinement for problems without exact solution.
    #[arg(long, default_value_t = 10)]
    refine: usize,
    /// Fail with exit code 2 unless the fitted slope is within the tolerance.
    #[arg(long)]
    assert_order: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    }
}

type Outcome = Result<(), Failure>;

fn workers(run: &RunArgs) -> usize {
    run.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses `args` (program name first) and runs the command. Output goes to
/// `out`, diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Trees { max_order, colors } => trees(out, max_order, colors),
        Command::GrowthTable {
            max_order,
            no_moment_flag,
        } => growth_table(out, max_order, !no_moment_flag),
        Command::Iters {
            order,
            iteration,
            implicitness,
            no_moment_flag,
            predictor_growth,
        } => {
            let n = iterations_needed(order, iteration, implicitness, !no_moment_flag, predictor_growth)
                .map_err(invalid)?;
            writeln!(out, "{n}").map_err(invalid)
        }
        Command::VerifySymbolic {
            max_order,
            iteration,
            k,
            implicitness,
        } => verify(out, max_order, iteration, k, implicitness),
        Command::Converge(a) => converge(out, a, false),
        Command::Weak(a) => converge(out, a, true),
        Command::Stability {
            scheme,
            mu,
            sigma,
            h,
            mc_paths,
            steps,
            run,
        } => stability(out, &scheme, &mu, &sigma, h, mc_paths, steps, &run),
        Command::VdpDemo {
            h,
            horizon,
            mu,
            theta,
            run,
        } => vdp(out, h, horizon, mu, theta, &run),
    }
}

fn trees(out: &mut dyn Write, max_order: Order, colors: u8) -> Outcome {
    if colors == 0 {
        return Err(invalid("need at least one color"));
    }
    let all = enumerate_trees(max_order, colors);
    writeln!(out, "{:<24} {:>5} {:>6} {:>4} {:>4} {:>4}", "tree", "rho", "alpha", "h", "r", "d").map_err(invalid)?;
    for tree in all.iter() {
        let g = |it| growth(tree, it, ImplicitnessClass::General).map_err(invalid);
        writeln!(
            out,
            "{:<24} {:>5} {:>6} {:>4} {:>4} {:>4}",
            tree.to_string(),
            tree.rho().to_string(),
            tree.alpha().to_string(),
            g(IterationKind::Simple)?,
            g(IterationKind::ModifiedNewton)?,
            g(IterationKind::FullNewton)?
        )
        .map_err(invalid)?;
    }
    writeln!(out, "{} trees", all.len()).map_err(invalid)
}

/// One cell of the iteration table: `general (semi)`, or a single number if
/// both agree.
pub fn table_cell(general: u32, semi: u32) -> String {
    if general == semi {
        general.to_string()
    } else {
        format!("{general} ({semi})")
    }
}

fn growth_table(out: &mut dyn Write, max_order: Order, flag: bool) -> Outcome {
    if max_order.twice() == 0 {
        return Err(invalid("maximal order must be at least 1/2"));
    }
    writeln!(out, "{:<5} | {:<8} | {:<8} | {:<8}", "p", "simple", "modified", "full").map_err(invalid)?;
    for twice in 1..=max_order.twice() {
        let p = Order::from_twice(twice);
        let mut cells = Vec::new();
        for it in IterationKind::ALL {
            let g = iterations_needed(p, it, ImplicitnessClass::General, flag, 0).map_err(invalid)?;
            let s = iterations_needed(p, it, ImplicitnessClass::SemiImplicit, flag, 0).map_err(invalid)?;
            cells.push(table_cell(g, s));
        }
        writeln!(out, "{:<5} | {:<8} | {:<8} | {:<8}", p.to_string(), cells[0], cells[1], cells[2])
            .map_err(invalid)?;
    }
    Ok(())
}

fn verify(out: &mut dyn Write, max_order: Order, it: IterationKind, k: usize, cls: ImplicitnessClass) -> Outcome {
    let report = growth_sharpness(max_order, it, cls, k).map_err(invalid)?;
    for m in &report.mismatches {
        writeln!(
            out,
            "mismatch: k={} tree {} growth {} settled {}",
            m.k, m.tree, m.growth, m.settled
        )
        .map_err(invalid)?;
    }
    writeln!(
        out,
        "{} iteration, {} class: {} trees up to order {}, k = 0..{}: {} mismatches",
        it,
        cls,
        report.trees,
        max_order,
        k,
        report.mismatches.len()
    )
    .map_err(invalid)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "growth function does not predict the settled weights".into(),
        })
    }
}

fn converge(out: &mut dyn Write, a: ConvergeArgs, weak: bool) -> Outcome {
    let scheme = scheme_by_name(&a.scheme).map_err(invalid)?;
    let problem: Arc<dyn SdeProblem> = Arc::from(by_name(&a.problem).map_err(invalid)?);
    let solve = match (a.iters, a.tol) {
        (_, Some(tol)) => SolveConfig::converge(a.method, tol, a.max_iters),
        (Some(k), None) => SolveConfig::fixed(a.method, k),
        (None, None) => SolveConfig::fixed(a.method, 1),
    };
    solve.validate().map_err(invalid)?;
    let two_d = problem.exact_path(0.0, 0.0).is_none();
    let (from, to, paths) = match (weak, two_d) {
        (true, _) => (1, 4, 10_000_000),
        (false, false) => (6, 10, 2000),
        (false, true) => (6, 9, 1000),
    };
    let from = a.from.unwrap_or(from);
    let to = a.to.unwrap_or(to);
    if from >= to || from < 0 {
        return Err(invalid(format!("need 0 <= --from < --to, got {from} and {to}")));
    }
    let exp = Experiment {
        scheme,
        problem,
        solve,
        step_sizes: dyadic_steps(from, to).into_iter().map(|h| h * a.horizon).collect(),
        horizon: a.horizon,
        paths: a.paths.unwrap_or(paths),
        seed: a.run.seed,
        workers: workers(&a.run),
        reference: (!weak && two_d).then(|| Reference::sikp_two_simple(a.refine)),
    };
    let result = if weak { exp.weak() } else { exp.strong() }.map_err(|e| Failure {
        code: EXIT_VERIFY,
        message: e.to_string(),
    })?;
    print_result(out, &result).map_err(invalid)?;
    if let Some(path) = &a.run.csv {
        let script = write_csv(&result, path).map_err(invalid)?;
        writeln!(out, "wrote {} and {}", path.display(), script.display()).map_err(invalid)?;
    }
    if let Some(target) = a.assert_order {
        let tol = a.tolerance.unwrap_or(if weak { 0.35 } else { 0.15 });
        let ok = (result.slope() - target).abs() <= tol;
        writeln!(
            out,
            "order check: slope {:.3} vs {target} +/- {tol}: {}",
            result.slope(),
            if ok { "PASS" } else { "FAIL" }
        )
        .map_err(invalid)?;
        if !ok {
            return Err(Failure {
                code: EXIT_VERIFY,
                message: format!("slope {:.3} outside {target} +/- {tol}", result.slope()),
            });
        }
    }
    Ok(())
}

fn print_result(out: &mut dyn Write, r: &ExperimentResult) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} x{} ({:?}), M = {}, seed = {}",
        r.scheme, r.method, r.iters, r.convergence, r.paths, r.seed
    )?;
    writeln!(out, "{:>12} {:>14} {:>12} {:>8}", "h", "error", "stderr", "aborted")?;
    for i in 0..r.step_sizes.len() {
        writeln!(
            out,
            "{:>12.6e} {:>14.6e} {:>12.4e} {:>8}",
            r.step_sizes[i], r.errors[i], r.stderrs[i], r.aborted[i]
        )?;
    }
    writeln!(
        out,
        "slope {:.3}, intercept {:.3}, rms residual {:.3}",
        r.fit.slope, r.fit.intercept, r.fit.residual
    )
}

#[allow(clippy::too_many_arguments)]
fn stability(
    out: &mut dyn Write,
    scheme: &str,
    mu: &str,
    sigma: &str,
    h: f64,
    mc_paths: Option<usize>,
    steps: usize,
    run: &RunArgs,
) -> Outcome {
    let s: StabilityScheme = scheme.parse().map_err(invalid)?;
    let parse = |v: &str| v.parse::<Complex64>().map_err(|_| invalid(format!("not a complex number: {v}")));
    let (mu, sigma) = (parse(mu)?, parse(sigma)?);
    let r = ms_stability_factor(s, mu, sigma, h).map_err(invalid)?;
    writeln!(
        out,
        "{} h = {h}: R = {r:.6} ({})",
        s.name(),
        if r < 1.0 { "stable" } else { "unstable" }
    )
    .map_err(invalid)?;
    if let Some(paths) = mc_paths {
        if mu.im != 0.0 || sigma.im != 0.0 {
            return Err(invalid("simulation needs real coefficients"));
        }
        let est = ms_stability_monte_carlo(s, mu.re, sigma.re, h, paths, steps, run.seed, workers(run))
            .map_err(invalid)?;
        writeln!(
            out,
            "simulated: {:.5} +/- {:.5} ({:.2} standard errors from R)",
            est.estimate,
            est.stderr,
            est.z_score()
        )
        .map_err(invalid)?;
    }
    Ok(())
}

fn vdp(out: &mut dyn Write, h: f64, horizon: f64, mu: f64, theta: f64, run: &RunArgs) -> Outcome {
    let demo = vdp_demo(mu, theta, h, horizon, run.seed).map_err(invalid)?;
    for t in [&demo.explicit, &demo.semi_implicit] {
        match t.abort_time {
            Some(at) => writeln!(
                out,
                "{}: aborted at t = {at:.2}{}",
                t.scheme,
                if t.exploded { " (explosion)" } else { "" }
            ),
            None => {
                let max = t.states.iter().map(|y| y.max_abs()).fold(0.0, f64::max);
                writeln!(out, "{}: completed [0, {horizon}], max |Y| = {max:.3}", t.scheme)
            }
        }
        .map_err(invalid)?;
    }
    if let Some(path) = &run.csv {
        let mut w = std::fs::File::create(path).map_err(invalid)?;
        writeln!(w, "scheme,t,x1,x2").map_err(invalid)?;
        for t in [&demo.explicit, &demo.semi_implicit] {
            for (time, y) in t.times.iter().zip(&t.states) {
                writeln!(w, "{},{time},{},{}", t.scheme, y[0], y[1]).map_err(invalid)?;
            }
        }
        writeln!(out, "wrote {}", path.display()).map_err(invalid)?;
    }
    Ok(())
}
