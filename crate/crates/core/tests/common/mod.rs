//! Independent reference solutions for tests.
//!
//! The constrained least-squares oracle enumerates every subset of the
//! inequality rows, solves the equality-constrained problem with that subset
//! active through the KKT system (SVD pseudo-inverse, so dependent rows are
//! harmless), and keeps the best candidate that satisfies all constraints.
//! For a convex problem the optimum lies on some face, so this is exact up
//! to rounding.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x: DVector<f64>,
    pub rnorm: f64,
}

/// `min |Ax - b|` s.t. `Ex = f`, `Gx >= h` by enumeration. `None` when no
/// candidate is feasible.
pub fn lsei_oracle(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    f: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Option<OracleSolution> {
    let q = a.ncols();
    let r = g.nrows();
    assert!(r <= 16, "enumeration is exponential");
    let mut best: Option<OracleSolution> = None;
    for mask in 0u32..(1 << r) {
        let active: Vec<usize> = (0..r).filter(|i| mask & (1 << i) != 0).collect();
        let k = e.nrows() + active.len();
        let mut c = DMatrix::zeros(k, q);
        let mut d = DVector::zeros(k);
        for i in 0..e.nrows() {
            c.set_row(i, &e.row(i));
            d[i] = f[i];
        }
        for (j, &i) in active.iter().enumerate() {
            c.set_row(e.nrows() + j, &g.row(i));
            d[e.nrows() + j] = h[i];
        }
        // [A'A  C'] [x]   [A'b]
        // [C    0 ] [y] = [d  ]
        let mut kkt = DMatrix::zeros(q + k, q + k);
        kkt.view_mut((0, 0), (q, q)).copy_from(&(a.transpose() * a));
        kkt.view_mut((0, q), (q, k)).copy_from(&c.transpose());
        kkt.view_mut((q, 0), (k, q)).copy_from(&c);
        let mut rhs = DVector::zeros(q + k);
        rhs.rows_mut(0, q).copy_from(&(a.transpose() * b));
        rhs.rows_mut(q, k).copy_from(&d);
        let svd = kkt.clone().svd(true, true);
        let Ok(sol) = svd.solve(&rhs, 1e-13 * svd.singular_values.max().max(1.0)) else {
            continue;
        };
        if (&kkt * &sol - &rhs).amax() > 1e-8 * (1.0 + rhs.amax()) {
            continue;
        }
        let x = sol.rows(0, q).into_owned();
        let eq_ok = e.nrows() == 0 || (e * &x - f).amax() <= FEAS_TOL * (1.0 + f.amax());
        let in_ok = r == 0 || (g * &x - h).min() >= -FEAS_TOL * (1.0 + h.amax());
        if !(eq_ok && in_ok) {
            continue;
        }
        let rnorm = (a * &x - b).norm();
        if best.as_ref().is_none_or(|bst| rnorm < bst.rnorm - 1e-13) {
            best = Some(OracleSolution { x, rnorm });
        }
    }
    best
}

pub fn nnls_oracle(a: &DMatrix<f64>, b: &DVector<f64>) -> OracleSolution {
    let q = a.ncols();
    lsei_oracle(
        a,
        b,
        &DMatrix::zeros(0, q),
        &DVector::zeros(0),
        &DMatrix::identity(q, q),
        &DVector::zeros(q),
    )
    .expect("x = 0 is always feasible")
}

pub fn ldp_oracle(g: &DMatrix<f64>, h: &DVector<f64>) -> Option<OracleSolution> {
    let q = g.ncols();
    lsei_oracle(
        &DMatrix::identity(q, q),
        &DVector::zeros(q),
        &DMatrix::zeros(0, q),
        &DVector::zeros(0),
        g,
        h,
    )
}

pub fn lsi_oracle(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Option<OracleSolution> {
    let q = a.ncols();
    lsei_oracle(a, b, &DMatrix::zeros(0, q), &DVector::zeros(0), g, h)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rand_matrix(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn rand_vector(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random symmetric positive-definite matrix with eigenvalues at least 0.5.
pub fn rand_spd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let m = rand_matrix(rng, n, n);
    &m * m.transpose() + DMatrix::identity(n, n) * 0.5
}

/// Smallest singular value over largest; 0 for empty matrices.
pub fn conditioning(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let s = m.clone().svd(false, false).singular_values;
    s.min() / s.max()
}

/// Convex QP `min 1/2 x'Bx + c'x` s.t. `Ex = f`, `Gx >= h` solved by
/// enumeration through the equivalent least-squares form with `B = R'R`:
/// `|Rx + R^-T c|^2 / 2` differs from the objective by a constant.
pub fn qp_oracle(
    b: &DMatrix<f64>,
    c: &DVector<f64>,
    e: &DMatrix<f64>,
    f: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
) -> Option<DVector<f64>> {
    let chol = nalgebra::Cholesky::new(b.clone()).expect("SPD");
    let l = chol.l();
    let r = l.transpose();
    let rhs = -l.solve_lower_triangular(c).expect("nonsingular");
    lsei_oracle(&r, &rhs, e, f, g, h).map(|s| s.x)
}

/// Grid search plus golden-section refinement of the constrained Rosenbrock
/// problem. The unconstrained minimizer (1, 1) lies outside the unit disk,
/// so the solution is on the circle `x = (cos t, sin t)`. The function along
/// the circle is sampled densely and the best bracket refined.
pub fn rosenbrock_disk_oracle() -> (DVector<f64>, f64) {
    let phi = |t: f64| {
        let (x, y) = (t.cos(), t.sin());
        (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
    };
    let n = 200_000;
    let step = std::f64::consts::TAU / n as f64;
    let (mut best, mut tbest) = (f64::INFINITY, 0.0);
    for k in 0..n {
        let t = k as f64 * step;
        let v = phi(t);
        if v < best {
            best = v;
            tbest = t;
        }
    }
    let (mut lo, mut hi) = (tbest - step, tbest + step);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - gr * (hi - lo);
        let b = lo + gr * (hi - lo);
        if phi(a) < phi(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    (DVector::from_vec(vec![t.cos(), t.sin()]), phi(t))
}

/// Interior check for the disk oracle: no point strictly inside the disk
/// on a coarse grid beats the boundary optimum.
pub fn rosenbrock_interior_min(resolution: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=resolution {
        for j in 0..=resolution {
            let x = -1.0 + 2.0 * i as f64 / resolution as f64;
            let y = -1.0 + 2.0 * j as f64 / resolution as f64;
            if x * x + y * y < 1.0 {
                best = best.min((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2));
            }
        }
    }
    best
}

/// Outcome of comparing one random instance against its oracle.
#[derive(Debug, Clone)]
pub enum Trial {
    /// Both solved; max abs difference in `x`.
    Solved(f64),
    /// Both report infeasibility.
    BothInfeasible,
    Mismatch(String),
}

fn well_conditioned(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<f64> {
    loop {
        let m = rand_matrix(rng, r, c);
        if conditioning(&m) > 1e-2 {
            return m;
        }
    }
}

pub fn nnls_trial(rng: &mut StdRng) -> Trial {
    let q = rng.gen_range(1..=5);
    let p = rng.gen_range(q..=5);
    let a = well_conditioned(rng, p, q);
    let b = rand_vector(rng, p);
    let want = nnls_oracle(&a, &b);
    match slsqp::lsq::nnls(&a, &b) {
        Ok(got) => Trial::Solved((got.x - want.x).amax()),
        Err(e) => Trial::Mismatch(format!("nnls failed: {e:?} on A={a} b={b}")),
    }
}

pub fn ldp_trial(rng: &mut StdRng) -> Trial {
    let q = rng.gen_range(1..=5);
    let r = rng.gen_range(1..=5);
    let g = rand_matrix(rng, r, q);
    let h = rand_vector(rng, r);
    compare(
        slsqp::lsq::ldp(&g, &h).map(|s| s.x),
        ldp_oracle(&g, &h),
        || format!("G={g} h={h}"),
    )
}

pub fn lsi_trial(rng: &mut StdRng) -> Trial {
    let q = rng.gen_range(1..=5);
    let p = rng.gen_range(q..=5);
    let r = rng.gen_range(0..=5);
    let a = well_conditioned(rng, p, q);
    let b = rand_vector(rng, p);
    let g = rand_matrix(rng, r, q);
    let h = rand_vector(rng, r);
    compare(
        slsqp::lsq::lsi(&a, &b, &g, &h).map(|s| s.x),
        lsi_oracle(&a, &b, &g, &h),
        || format!("A={a} b={b} G={g} h={h}"),
    )
}

pub fn lsei_trial(rng: &mut StdRng) -> Trial {
    let q = rng.gen_range(1..=5);
    let p = rng.gen_range(q..=5);
    let me = rng.gen_range(1..=q.min(3));
    let r = rng.gen_range(0..=5);
    let a = well_conditioned(rng, p, q);
    let b = rand_vector(rng, p);
    let e = well_conditioned(rng, me, q);
    let f = rand_vector(rng, me);
    let g = rand_matrix(rng, r, q);
    let h = rand_vector(rng, r);
    compare(
        slsqp::lsq::lsei(&a, &b, &e, &f, &g, &h).map(|s| s.x),
        lsei_oracle(&a, &b, &e, &f, &g, &h),
        || format!("A={a} b={b} E={e} f={f} G={g} h={h}"),
    )
}

fn compare(
    got: Result<DVector<f64>, slsqp::LsqError>,
    want: Option<OracleSolution>,
    describe: impl Fn() -> String,
) -> Trial {
    match (got, want) {
        (Ok(x), Some(w)) => Trial::Solved((x - w.x).amax()),
        (Err(slsqp::LsqError::Infeasible), None) => Trial::BothInfeasible,
        (Ok(x), None) => Trial::Mismatch(format!(
            "solver returned {x} but oracle found no feasible point: {}",
            describe()
        )),
        (Err(e), Some(w)) => Trial::Mismatch(format!(
            "solver failed with {e:?}, oracle x={}: {}",
            w.x,
            describe()
        )),
        (Err(e), None) => Trial::Mismatch(format!(
            "oracle infeasible but solver failed with {e:?}: {}",
            describe()
        )),
    }
}

/// Runs `count` trials from `seed`; returns (max error, infeasible count,
/// mismatch descriptions).
pub fn run_trials(
    count: usize,
    seed: u64,
    trial: fn(&mut StdRng) -> Trial,
) -> (f64, usize, Vec<String>) {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    let mut infeasible = 0;
    let mut mismatches = Vec::new();
    for _ in 0..count {
        match trial(&mut rng) {
            Trial::Solved(err) => worst = worst.max(err),
            Trial::BothInfeasible => infeasible += 1,
            Trial::Mismatch(m) => mismatches.push(m),
        }
    }
    (worst, infeasible, mismatches)
}

pub mod problems;
