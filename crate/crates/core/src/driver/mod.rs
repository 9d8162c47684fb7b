//! The SQP main loop.
//!
//! The loop runs in scaled space. At each major iteration it solves the QP
//! subproblem built from the current BFGS approximation and linearized
//! constraints, tests convergence, updates the L1 penalty weights, performs
//! an Armijo line search on the merit function and applies a damped BFGS
//! update to the Lagrangian Hessian approximation.

mod bfgs;
mod merit;
mod options;
mod restart;
mod results;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::history::{
    load_history, open_writer, summary_header, summary_row, HeaderRecord, HistoryRecord,
    HistoryWriter, RecordValues, SaveConfig, SaveIter, SummaryWriter,
};
use crate::lsq::{solve_qp, QpSolution, QpSubproblem};
use crate::problem::{Evaluation, ValidatedProblem};
use crate::scaling::{make_scaler, Scaler};
use crate::viz::LiveRenderer;

pub use bfgs::{BfgsUpdate, HessianApprox, DAMPING_THRESHOLD, DEGENERATE_CURVATURE};
pub use merit::{
    convergence_measures, line_search, merit_slope, merit_value, update_penalties, violation,
    LineSearchResult, ARMIJO, MIN_STEP,
};
pub use options::SolverOptions;
pub use restart::{apply_warm_start, build_hot_start_replayer, check_history_shape, Replayer};
pub use results::{IterateState, Results, Status};

/// How many times the Hessian may be reset to the identity in one iteration
/// when the QP step is not a descent direction for the merit function.
const MAX_RESETS: usize = 5;

/// Accepted line-search step, in scaled space.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub majiter: usize,
    pub alpha: f64,
    pub phi0: f64,
    pub dphi0: f64,
    pub phi: f64,
    pub trials: usize,
    pub rho: DVector<f64>,
}

/// Hooks into a run. Every method defaults to doing nothing.
pub trait Observer {
    /// A point evaluation (not a finite-difference probe), unscaled.
    fn function_evaluation(&mut self, _x: &DVector<f64>, _f: f64, _c: &DVector<f64>) {}
    fn major_iteration(&mut self, _state: &IterateState) {}
    fn line_search_accepted(&mut self, _step: &StepReport) {}
    /// `update` is `None` when the step was degenerate and the update skipped.
    fn hessian_updated(&mut self, _hessian: &HessianApprox, _update: Option<BfgsUpdate>) {}
}

struct NoObserver;

impl Observer for NoObserver {}

pub fn optimize(problem: &mut ValidatedProblem, opts: &SolverOptions) -> Result<Results> {
    optimize_with_observer(problem, opts, &mut NoObserver)
}

/// Function and derivative values at one point, raw and scaled.
#[derive(Debug, Clone)]
struct Point {
    raw: Evaluation,
    g: DVector<f64>,
    jac: DMatrix<f64>,
    fs: f64,
    cs: DVector<f64>,
    gs: DVector<f64>,
    js: DMatrix<f64>,
}

struct Telemetry {
    writer: Option<HistoryWriter>,
    summary: Option<SummaryWriter>,
    live: Option<LiveRenderer>,
    print: bool,
    printed_header: bool,
}

impl Telemetry {
    fn open(opts: &SolverOptions, n: usize, m: usize, meq: usize) -> Result<Self> {
        let writer = match &opts.save {
            Some(cfg) => Some(open_writer(
                cfg,
                &HeaderRecord::new(n, m, meq, cfg, opts.to_json()),
            )?),
            None => None,
        };
        let summary = match &opts.summary_path {
            Some(p) => Some(SummaryWriter::create(p)?),
            None => None,
        };
        let live = match &opts.visualize {
            Some(viz) => {
                let all = SaveConfig::all_vars("", SaveIter::Major);
                Some(LiveRenderer::spawn(
                    viz.clone(),
                    HeaderRecord::new(n, m, meq, &all, opts.to_json()),
                )?)
            }
            None => None,
        };
        Ok(Telemetry {
            writer,
            summary,
            live,
            print: opts.print_summary,
            printed_header: false,
        })
    }

    fn eval(&mut self, x: &DVector<f64>, e: &Evaluation) -> Result<()> {
        if let Some(w) = self.writer.as_mut() {
            w.append_record(&HistoryRecord::Eval(RecordValues {
                x: Some(x.as_slice().to_vec()),
                objective: Some(e.f),
                constraints: Some(e.c.as_slice().to_vec()),
                ..Default::default()
            }))?;
        }
        Ok(())
    }

    fn major(&mut self, state: &IterateState) -> Result<()> {
        let rec = HistoryRecord::Major(state.to_record());
        if let Some(w) = self.writer.as_mut() {
            w.append_record(&rec)?;
        }
        if let Some(s) = self.summary.as_mut() {
            s.write_summary_row(state)?;
        }
        if self.print {
            if !self.printed_header {
                println!("{}", summary_header());
                self.printed_header = true;
            }
            println!("{}", summary_row(state));
        }
        if let Some(live) = self.live.as_ref() {
            live.live_update(rec);
        }
        Ok(())
    }

    fn finish(self, warnings: &mut Vec<String>) {
        if let Some(live) = self.live {
            if let Err(e) = live.finish() {
                log::warn!("visualization failed: {e}");
                warnings.push(format!("visualization failed: {e}"));
            }
        }
    }
}

struct Engine<'a> {
    p: &'a mut ValidatedProblem,
    scaler: Scaler,
    opts: &'a SolverOptions,
    replay: Option<Replayer>,
    telemetry: Telemetry,
    obs: &'a mut dyn Observer,
}

impl Engine<'_> {
    fn evaluate(&mut self, xs: &DVector<f64>) -> Result<Evaluation> {
        let x = self.scaler.unscale_x(xs);
        let e = match self.replay.as_mut().and_then(|r| r.next_eval()) {
            Some(r) => Evaluation {
                f: r.f,
                c: r.c,
                nfev_delta: 0,
            },
            None => self.p.evaluate(&x)?,
        };
        self.telemetry.eval(&x, &e)?;
        self.obs.function_evaluation(&x, e.f, &e.c);
        Ok(e)
    }

    fn derivatives(&mut self, xs: &DVector<f64>, raw: Evaluation) -> Result<Point> {
        let x = self.scaler.unscale_x(xs);
        let (g, jac) = match self.replay.as_mut().and_then(|r| r.next_derivs()) {
            Some(d) => (d.g, d.jac),
            None => {
                let d = self.p.evaluate_derivatives(&x, &self.opts.fd, Some(&raw))?;
                (d.g, d.jac)
            }
        };
        let (fs, cs) = self.scaler.scale_fc(raw.f, &raw.c);
        let (gs, js) = self.scaler.scale_derivs(&g, &jac);
        Ok(Point {
            raw,
            g,
            jac,
            fs,
            cs,
            gs,
            js,
        })
    }

    fn point(&mut self, xs: &DVector<f64>) -> Result<Point> {
        let e = self.evaluate(xs)?;
        self.derivatives(xs, e)
    }

    fn nfev(&self, base: usize) -> usize {
        self.p.nfev() - base + self.replay.as_ref().map_or(0, |r| r.served_evals())
    }

    fn ngev(&self, base: usize) -> usize {
        self.p.ngev() - base + self.replay.as_ref().map_or(0, |r| r.served_derivs())
    }
}

fn build_qp(
    h: &HessianApprox,
    pt: &Point,
    xs: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    meq: usize,
) -> QpSubproblem {
    let m = pt.cs.len();
    let n = xs.len();
    QpSubproblem {
        l: h.factor().clone(),
        g: pt.gs.clone(),
        ceq: pt.js.rows(0, meq).into_owned(),
        deq: pt.cs.rows(0, meq).into_owned(),
        cin: pt.js.rows(meq, m - meq).into_owned(),
        din: pt.cs.rows(meq, m - meq).into_owned(),
        dl: DVector::from_fn(n, |i, _| lo[i] - xs[i]),
        du: DVector::from_fn(n, |i, _| hi[i] - xs[i]),
    }
}

struct Direction {
    sol: QpSolution,
    optimality: f64,
    feasibility: f64,
    rho: DVector<f64>,
    dphi0: f64,
}

/// Solves the QP, resetting the Hessian to the identity while the step fails
/// to descend on the merit function.
#[allow(clippy::too_many_arguments)]
fn direction(
    hess: &mut HessianApprox,
    pt: &Point,
    xs: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    rho: &DVector<f64>,
    meq: usize,
    acc: f64,
) -> Result<Direction> {
    let mut resets = 0;
    loop {
        let sol = solve_qp(&build_qp(hess, pt, xs, lo, hi, meq))?;
        let (optimality, feasibility) =
            convergence_measures(&pt.gs, &sol.d, &pt.cs, &sol.lambda, meq);
        let rho_new = update_penalties(rho, &sol.lambda);
        let dphi0 = merit_slope(&pt.gs, &sol.d, &pt.cs, &rho_new, meq, sol.relax_value);
        let converged = optimality <= acc && feasibility <= acc;
        if converged || dphi0 < 0.0 || resets >= MAX_RESETS || hess.is_identity() {
            return Ok(Direction {
                sol,
                optimality,
                feasibility,
                rho: rho_new,
                dphi0,
            });
        }
        log::debug!("QP step is not a descent direction (slope {dphi0:e}); resetting Hessian");
        hess.reset();
        resets += 1;
    }
}

/// Runs the solver, reporting progress to `obs`. Setup problems (bad
/// options, unreadable restart files, unwritable outputs) are returned as
/// errors; failures of the iteration itself end the run with a non-converged
/// [`Status`].
pub fn optimize_with_observer(
    problem: &mut ValidatedProblem,
    opts: &SolverOptions,
    obs: &mut dyn Observer,
) -> Result<Results> {
    opts.validate()?;
    let (n, m, meq) = (problem.n(), problem.m(), problem.meq());
    let scaler = make_scaler(
        opts.x_scaler.clone(),
        opts.obj_scaler,
        opts.con_scaler.clone(),
        n,
        m,
    )?;
    if let Some(path) = &opts.warm_start {
        let h = load_history(path)?;
        check_history_shape(&h, n, m, meq)?;
        let x0 = apply_warm_start(&h)?;
        problem.set_x0(&x0)?;
    }
    let replay = match &opts.hot_start {
        Some(path) => Some(build_hot_start_replayer(&load_history(path)?, n, m, meq)?),
        None => None,
    };
    let (lo, hi) = scaler.scale_bounds(problem.lower(), problem.upper());
    let telemetry = Telemetry::open(opts, n, m, meq)?;
    let base_calls = problem.calls();
    let (base_nfev, base_ngev) = (problem.nfev(), problem.ngev());
    let mut xs = scaler.scale_x(problem.x0());

    let mut eng = Engine {
        p: problem,
        scaler,
        opts,
        replay,
        telemetry,
        obs,
    };
    let mut iterates: Vec<IterateState> = Vec::new();
    let mut direction_out = DVector::zeros(n);

    let mut pt = match eng.point(&xs) {
        Ok(pt) => Some(pt),
        Err(e) => {
            if matches!(e, Error::Io { .. }) {
                return Err(e);
            }
            log::warn!("evaluation at the initial point failed: {e}");
            None
        }
    };

    let mut hess = HessianApprox::identity(n);
    let mut rho = DVector::zeros(m);
    let mut alpha_prev = None;
    let mut k = 0;

    let (status, message) = match pt.as_mut() {
        None => (
            Status::EvaluationError,
            "evaluation failed at the initial point".to_string(),
        ),
        Some(pt) => loop {
            let dir = match direction(&mut hess, pt, &xs, &lo, &hi, &rho, meq, opts.acc) {
                Ok(d) => d,
                Err(e) => {
                    break (
                        Status::QpUnsolvable,
                        format!("QP subproblem could not be solved: {e}"),
                    )
                }
            };
            direction_out = eng.scaler.unscale_step(&dir.sol.d);
            let s = &eng.scaler;
            let lambda_un = s.unscale_multipliers(&dir.sol.lambda);
            let (opt_un, feas_un) =
                convergence_measures(&pt.g, &direction_out, &pt.raw.c, &lambda_un, meq);
            let state = IterateState {
                majiter: k,
                x: s.unscale_x(&xs),
                f: pt.raw.f,
                c: pt.raw.c.clone(),
                g: pt.g.clone(),
                jac: pt.jac.clone(),
                lambda: lambda_un,
                optimality: dir.optimality,
                feasibility: dir.feasibility,
                optimality_unscaled: opt_un,
                feasibility_unscaled: feas_un,
                alpha: alpha_prev,
                nfev: eng.nfev(base_nfev),
                ngev: eng.ngev(base_ngev),
            };
            eng.telemetry.major(&state)?;
            eng.obs.major_iteration(&state);
            iterates.push(state);

            if dir.optimality <= opts.acc && dir.feasibility <= opts.acc {
                break (
                    Status::Converged,
                    "Optimization terminated successfully".into(),
                );
            }
            if !(dir.dphi0 < 0.0) {
                break (
                    Status::LineSearchFailed,
                    format!("search direction is not a descent direction for the merit function (slope {:e})", dir.dphi0),
                );
            }
            if k + 1 >= opts.maxiter {
                break (
                    Status::MaxIterReached,
                    format!("Iteration limit reached (maxiter = {})", opts.maxiter),
                );
            }

            rho = dir.rho;
            let phi0 = merit_value(pt.fs, &pt.cs, &rho, meq);
            let mut last_raw = None;
            let ls = line_search(
                |xt| {
                    let e = eng.evaluate(xt)?;
                    let (f, c) = eng.scaler.scale_fc(e.f, &e.c);
                    last_raw = Some(e);
                    Ok((f, c))
                },
                &xs,
                &dir.sol.d,
                phi0,
                dir.dphi0,
                &rho,
                meq,
                Some((&lo, &hi)),
            );
            let ls = match ls {
                Ok(ls) => ls,
                Err(e @ Error::Io { .. }) => return Err(e),
                Err(Error::LineSearchFailed { min_step }) => {
                    break (
                        Status::LineSearchFailed,
                        format!("Line search failed: step fell below {min_step:e}"),
                    )
                }
                Err(e) => {
                    break (
                        Status::EvaluationError,
                        format!("Evaluation failed during line search: {e}"),
                    )
                }
            };
            eng.obs.line_search_accepted(&StepReport {
                majiter: k,
                alpha: ls.alpha,
                phi0,
                dphi0: dir.dphi0,
                phi: ls.merit,
                trials: ls.trials,
                rho: rho.clone(),
            });

            let raw = last_raw.expect("line search evaluated the accepted point");
            let new = match eng.derivatives(&ls.x, raw) {
                Ok(p) => p,
                Err(e @ Error::Io { .. }) => return Err(e),
                Err(e) => {
                    break (
                        Status::EvaluationError,
                        format!("Derivative evaluation failed: {e}"),
                    )
                }
            };

            let step = &ls.x - &xs;
            let lag_old = &pt.gs - pt.js.transpose() * &dir.sol.lambda;
            let lag_new = &new.gs - new.js.transpose() * &dir.sol.lambda;
            let update = match hess.bfgs_update(&step, &(lag_new - lag_old)) {
                Ok(u) => Some(u),
                Err(e) => {
                    log::debug!("BFGS update skipped: {e}");
                    None
                }
            };
            eng.obs.hessian_updated(&hess, update);

            xs = ls.x;
            *pt = new;
            alpha_prev = Some(ls.alpha);
            k += 1;
        },
    };

    let mut warnings = Vec::new();
    let nfev = eng.nfev(base_nfev);
    let ngev = eng.ngev(base_ngev);
    let (replayed_evals, replayed_derivs) = eng
        .replay
        .as_ref()
        .map_or((0, 0), |r| (r.served_evals(), r.served_derivs()));
    let calls_now = eng.p.calls();
    let calls = crate::problem::CallCounts {
        objective: calls_now.objective - base_calls.objective,
        constraints: calls_now.constraints - base_calls.constraints,
        gradient: calls_now.gradient - base_calls.gradient,
        jacobian: calls_now.jacobian - base_calls.jacobian,
    };
    let print = eng.telemetry.print;
    let x_unscaled = eng.scaler.unscale_x(&xs);
    eng.telemetry.finish(&mut warnings);

    // Values at the final point. When the last QP failed there is no
    // recorded iterate for that point, so multipliers are reported as zero.
    let recorded_here = iterates.last().is_some_and(|s| s.majiter == k);
    let (f, c, lambda, optimality, feasibility, opt_un, feas_un) = match (&pt, recorded_here) {
        (Some(_), true) => {
            let s = iterates.last().unwrap();
            (
                s.f,
                s.c.clone(),
                s.lambda.clone(),
                s.optimality,
                s.feasibility,
                s.optimality_unscaled,
                s.feasibility_unscaled,
            )
        }
        (Some(pt), false) => {
            let feas = (0..m)
                .map(|i| violation(pt.cs[i], i, meq))
                .fold(0.0, f64::max);
            let feas_un = (0..m)
                .map(|i| violation(pt.raw.c[i], i, meq))
                .fold(0.0, f64::max);
            (
                pt.raw.f,
                pt.raw.c.clone(),
                DVector::zeros(m),
                f64::NAN,
                feas,
                f64::NAN,
                feas_un,
            )
        }
        (None, _) => (
            f64::NAN,
            DVector::from_element(m, f64::NAN),
            DVector::zeros(m),
            f64::NAN,
            f64::NAN,
            f64::NAN,
            f64::NAN,
        ),
    };

    if print {
        println!(
            "{message} (status {status}, {} major iterations, {nfev} function evaluations)",
            iterates.len()
        );
    }

    Ok(Results {
        x: x_unscaled,
        f,
        c,
        lambda,
        direction: direction_out,
        optimality,
        feasibility,
        optimality_unscaled: opt_un,
        feasibility_unscaled: feas_un,
        num_majiter: iterates.len(),
        nfev,
        ngev,
        calls,
        replayed_evals,
        replayed_derivs,
        status,
        message,
        warnings,
        iterates,
    })
}
