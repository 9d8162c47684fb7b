//! Problem builders shared by the driver and acceptance tests.
#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;
use slsqp::driver::{convergence_measures, optimize_with_observer};
use slsqp::driver::{BfgsUpdate, HessianApprox, IterateState, Observer, StepReport, ARMIJO};
use slsqp::{make_scaler, ProblemSpec, SolverOptions, Status};

use super::{qp_oracle, rand_matrix, rand_spd, rand_vector};

/// Number of user callable invocations, shared with the closures.
#[derive(Clone, Default)]
pub struct Counter(Arc<AtomicUsize>);

impl Counter {
    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::SeqCst);
    }

    pub fn get(&self) -> usize {
        self.0.load(Ordering::SeqCst)
    }
}

/// The worked example with instrumented callables.
pub fn example2d_counted(x0: Vec<f64>, calls: &Counter) -> ProblemSpec {
    let (c1, c2, c3) = (calls.clone(), calls.clone(), calls.clone());
    ProblemSpec::new(x0, move |x| {
        c1.bump();
        x[0] * x[0] + x[1] * x[1]
    })
    .constraints(2, 1, move |x| {
        c2.bump();
        vec![x[0] + x[1] - 1.0, 3.0 * x[0] + 2.0 * x[1] - 1.0]
    })
    .jacobian(move |_| {
        c3.bump();
        DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 3.0, 2.0])
    })
    .bounds(vec![0.4, f64::NEG_INFINITY], vec![f64::INFINITY, 0.6])
}

pub struct RandomQp {
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub e: DMatrix<f64>,
    pub f: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub x0: DVector<f64>,
}

impl RandomQp {
    /// Random SPD Hessian, affine equalities and inequalities, feasible by
    /// construction around a random interior point.
    pub fn generate(rng: &mut StdRng) -> RandomQp {
        let n = rng.gen_range(2..=5);
        let meq = rng.gen_range(0..n.min(3));
        let mi = rng.gen_range(0..=3);
        let xf = rand_vector(rng, n);
        let e = rand_matrix(rng, meq, n);
        let g = rand_matrix(rng, mi, n);
        let f = &e * &xf;
        let h = &g * &xf - DVector::from_fn(mi, |_, _| rng.gen_range(0.05..1.0));
        RandomQp {
            b: rand_spd(rng, n),
            c: rand_vector(rng, n) * 2.0,
            e,
            f,
            g,
            h,
            x0: rand_vector(rng, n) * 3.0,
        }
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn oracle(&self) -> DVector<f64> {
        qp_oracle(&self.b, &self.c, &self.e, &self.f, &self.g, &self.h)
            .expect("feasible by construction")
    }

    pub fn spec(&self) -> ProblemSpec {
        let (b1, c1, b2, c2) = (
            self.b.clone(),
            self.c.clone(),
            self.b.clone(),
            self.c.clone(),
        );
        let m = self.e.nrows() + self.g.nrows();
        let mut jac = DMatrix::zeros(m, self.n());
        jac.rows_mut(0, self.e.nrows()).copy_from(&self.e);
        jac.rows_mut(self.e.nrows(), self.g.nrows())
            .copy_from(&self.g);
        let mut rhs = DVector::zeros(m);
        rhs.rows_mut(0, self.e.nrows()).copy_from(&self.f);
        rhs.rows_mut(self.e.nrows(), self.g.nrows())
            .copy_from(&self.h);
        let (j1, j2) = (jac.clone(), jac);
        ProblemSpec::new(self.x0.as_slice().to_vec(), move |x| {
            let x = DVector::from_column_slice(x);
            0.5 * x.dot(&(&b1 * &x)) + c1.dot(&x)
        })
        .gradient(move |x| {
            let x = DVector::from_column_slice(x);
            (&b2 * &x + &c2).as_slice().to_vec()
        })
        .constraints(m, self.e.nrows(), move |x| {
            let x = DVector::from_column_slice(x);
            (&j1 * &x - &rhs).as_slice().to_vec()
        })
        .jacobian(move |_| j2.clone())
    }
}

/// Records invariant violations seen during a run.
#[derive(Default)]
pub struct InvariantObserver {
    pub steps: usize,
    pub updates: usize,
    pub majors: Vec<usize>,
    pub violations: Vec<String>,
    pub seed_z: u64,
}

impl Observer for InvariantObserver {
    fn major_iteration(&mut self, s: &IterateState) {
        if let Some(&last) = self.majors.last() {
            if s.majiter <= last {
                self.violations
                    .push(format!("majiter {} after {last}", s.majiter));
            }
        }
        if !(s.feasibility >= 0.0) {
            self.violations
                .push(format!("negative feasibility {}", s.feasibility));
        }
        if let Some(a) = s.alpha {
            if !(a > 0.0 && a <= 1.0) {
                self.violations.push(format!("alpha {a} outside (0, 1]"));
            }
        }
        self.majors.push(s.majiter);
    }

    fn line_search_accepted(&mut self, st: &StepReport) {
        self.steps += 1;
        let bound = st.phi0 + ARMIJO * st.alpha * st.dphi0;
        if !(st.phi <= bound) {
            self.violations.push(format!(
                "Armijo violated at {}: phi={} bound={bound}",
                st.majiter, st.phi
            ));
        }
        if !(st.dphi0 < 0.0) {
            self.violations
                .push(format!("non-descent slope {}", st.dphi0));
        }
    }

    fn hessian_updated(&mut self, h: &HessianApprox, _u: Option<BfgsUpdate>) {
        self.updates += 1;
        let l = h.factor();
        let n = l.nrows();
        if (0..n).any(|i| !(l[(i, i)] > 1e-15)) {
            self.violations
                .push(format!("factor diagonal not positive: {}", l.diagonal()));
        }
        let mut rng = super::rng(self.seed_z + self.updates as u64);
        for _ in 0..8 {
            let z = rand_vector(&mut rng, n);
            let q = z.dot(&(h.matrix() * &z));
            if !(q > 0.0) {
                self.violations.push(format!("z'Bz = {q} for z = {z}"));
            }
        }
    }
}

/// Post-hoc check of the convergence claim from the returned data.
pub fn verify_converged(r: &slsqp::Results, opts: &SolverOptions, meq: usize) {
    let last = r.iterates.last().unwrap();
    let s = make_scaler(
        opts.x_scaler.clone(),
        opts.obj_scaler,
        opts.con_scaler.clone(),
        r.x.len(),
        r.c.len(),
    )
    .unwrap();
    let (gs, _) = s.scale_derivs(&last.g, &last.jac);
    let (_, cs) = s.scale_fc(last.f, &last.c);
    let ds = s.scale_x(&r.direction);
    let lam_s = r.lambda.component_div(s.con_scaler()) * s.obj_scaler();
    let (opt, feas) = convergence_measures(&gs, &ds, &cs, &lam_s, meq);
    assert!(opt <= opts.acc * (1.0 + 1e-9), "optimality {opt}");
    assert!(feas <= opts.acc, "feasibility {feas}");
    assert_eq!(last.x, r.x);
}

/// The optimality measure is at least d'Bd >= 0.5 |d|^2 for these Hessians,
/// so a 1e-6 distance to the optimum needs acc below 5e-13.
pub const QP_ACC: f64 = 1e-13;

pub fn check_qp(qp: &RandomQp, seed_z: u64) -> Result<f64, String> {
    let want = qp.oracle();
    let mut p = qp.spec().validate().unwrap();
    let meq = p.meq();
    let mut obs = InvariantObserver {
        seed_z,
        ..Default::default()
    };
    let opts = SolverOptions::default().with_acc(QP_ACC);
    let r = optimize_with_observer(&mut p, &opts, &mut obs).unwrap();
    if r.status != Status::Converged {
        return Err(format!("{}: {}", r.status, r.message));
    }
    if !obs.violations.is_empty() {
        return Err(format!("{:?}", obs.violations));
    }
    verify_converged(&r, &opts, meq);
    let err = (&r.x - &want).amax();
    if err > 1e-6 {
        return Err(format!("x = {}, oracle {}", r.x, want));
    }
    Ok(err)
}
