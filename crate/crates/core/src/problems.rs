//! Compiled-in test problems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::finite_diff::FdOptions;
use crate::problem::ProblemSpec;
use crate::scaling::ScaleSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub x: Vec<f64>,
    pub f: f64,
    /// Where the values come from.
    pub source: &'static str,
}

/// Options a problem was posed with, applied by callers that want them.
#[derive(Debug, Clone, PartialEq)]
pub struct SuggestedOptions {
    pub x_scaler: ScaleSpec,
    pub obj_scaler: f64,
    pub con_scaler: ScaleSpec,
    pub fd: FdOptions,
}

pub struct BundledProblem {
    pub name: String,
    pub description: &'static str,
    pub spec: ProblemSpec,
    pub known_solution: Option<KnownSolution>,
    pub suggested: Option<SuggestedOptions>,
}

pub struct ProblemRegistryEntry {
    pub name: &'static str,
    pub description: &'static str,
}

pub const REGISTRY: [ProblemRegistryEntry; 3] = [
    ProblemRegistryEntry {
        name: "example2d",
        description: "min x1^2 + x2^2 s.t. x1 + x2 = 1, 3 x1 + 2 x2 >= 1, x1 >= 0.4, x2 <= 0.6; x0 = (2, 3)",
    },
    ProblemRegistryEntry {
        name: "rosenbrock2d-con",
        description: "Rosenbrock function inside the unit disk; x0 = (0, 0)",
    },
    ProblemRegistryEntry {
        name: "dblint-N",
        description: "minimum-effort double integrator, N piecewise-constant controls in [-5, 5] (e.g. dblint-20)",
    },
];

pub fn list_problems() -> &'static [ProblemRegistryEntry] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Result<BundledProblem> {
    match name {
        "example2d" => Ok(example2d()),
        "rosenbrock2d-con" => Ok(rosenbrock2d_con()),
        _ => match name.strip_prefix("dblint-").map(str::parse::<usize>) {
            Some(Ok(n)) if n >= 1 => Ok(dblint(n)),
            _ => Err(Error::UnknownProblem(name.to_string())),
        },
    }
}

/// Constraint Jacobian supplied, objective gradient by finite differences.
pub fn example2d() -> BundledProblem {
    let spec = ProblemSpec::new(vec![2.0, 3.0], |x| x[0] * x[0] + x[1] * x[1])
        .constraints(2, 1, |x| {
            vec![x[0] + x[1] - 1.0, 3.0 * x[0] + 2.0 * x[1] - 1.0]
        })
        .jacobian(|_| DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 3.0, 2.0]))
        .bounds(vec![0.4, f64::NEG_INFINITY], vec![f64::INFINITY, 0.6]);
    BundledProblem {
        name: "example2d".into(),
        description: REGISTRY[0].description,
        spec,
        known_solution: Some(KnownSolution {
            x: vec![0.5, 0.5],
            f: 0.5,
            source: "closest point to the origin on x1 + x2 = 1; other constraints inactive",
        }),
        suggested: Some(SuggestedOptions {
            x_scaler: ScaleSpec::Uniform(10.0),
            obj_scaler: 2.0,
            con_scaler: ScaleSpec::PerComponent(vec![1.0, 0.5]),
            fd: FdOptions::absolute(1e-6),
        }),
    }
}

pub fn rosenbrock2d_con() -> BundledProblem {
    let spec = ProblemSpec::new(vec![0.0, 0.0], |x| {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    })
    .gradient(|x| {
        let t = x[1] - x[0] * x[0];
        vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * t, 200.0 * t]
    })
    .constraints(1, 0, |x| vec![1.0 - x[0] * x[0] - x[1] * x[1]])
    .jacobian(|x| DMatrix::from_row_slice(1, 2, &[-2.0 * x[0], -2.0 * x[1]]));
    BundledProblem {
        name: "rosenbrock2d-con".into(),
        description: REGISTRY[1].description,
        spec,
        known_solution: Some(KnownSolution {
            x: vec![0.786_415_154_1, 0.617_698_312_5],
            f: 0.045_674_808_72,
            source: "dense polar grid on the active circle refined by bisection on the tangential derivative",
        }),
        suggested: None,
    }
}

pub const DBLINT_UMAX: f64 = 5.0;

/// Coefficients of the terminal position and velocity in the controls:
/// `p_N = sum a_k u_k`, `v_N = sum b_k u_k` on a uniform grid over [0, 1].
pub fn dblint_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let dt = 1.0 / n as f64;
    let a = (0..n)
        .map(|k| dt * dt * (n as f64 - k as f64 - 0.5))
        .collect();
    let b = vec![dt; n];
    (a, b)
}

/// Move a unit mass from rest at 0 to rest at 1 in unit time with minimal
/// control energy, the acceleration held constant on each of `n` segments.
pub fn dblint(n: usize) -> BundledProblem {
    let dt = 1.0 / n as f64;
    let (a, b) = dblint_coefficients(n);
    let (a2, b2) = (a.clone(), b.clone());
    let spec = ProblemSpec::new(vec![0.0; n], move |u| {
        dt * u.iter().map(|v| v * v).sum::<f64>()
    })
    .gradient(move |u| u.iter().map(|v| 2.0 * dt * v).collect())
    .constraints(2, 2, move |u| {
        let p: f64 = u.iter().zip(&a).map(|(u, a)| u * a).sum();
        let v: f64 = u.iter().zip(&b).map(|(u, b)| u * b).sum();
        vec![p - 1.0, v]
    })
    .jacobian(move |_| {
        let mut j = DMatrix::zeros(2, n);
        for k in 0..n {
            j[(0, k)] = a2[k];
            j[(1, k)] = b2[k];
        }
        j
    })
    .bounds(vec![-DBLINT_UMAX; n], vec![DBLINT_UMAX; n]);
    BundledProblem {
        name: format!("dblint-{n}"),
        description: REGISTRY[2].description,
        spec,
        known_solution: None,
        suggested: None,
    }
}
