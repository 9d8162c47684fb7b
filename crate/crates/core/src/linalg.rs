//! Householder QR with full access to the orthogonal factor.

use nalgebra::{DMatrix, DVector};

/// Relative pivot tolerance below which a column is treated as dependent.
pub(crate) const RANK_TOL: f64 = 1e-12;

/// `A = Q R` for an `rows x cols` matrix, with `Q` kept as reflectors.
#[derive(Debug, Clone)]
pub(crate) struct Householder {
    r: DMatrix<f64>,
    reflectors: Vec<(DVector<f64>, f64)>,
}

impl Householder {
    pub fn new(mut a: DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        let steps = rows.min(cols);
        let mut reflectors = Vec::with_capacity(steps);
        for k in 0..steps {
            let norm = a.view((k, k), (rows - k, 1)).norm();
            if norm == 0.0 {
                reflectors.push((DVector::zeros(rows - k), 0.0));
                continue;
            }
            let alpha = if a[(k, k)] >= 0.0 { -norm } else { norm };
            let mut v = a
                .view((k, k), (rows - k, 1))
                .clone_owned()
                .column(0)
                .into_owned();
            v[0] -= alpha;
            let vtv = v.norm_squared();
            let tau = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
            for j in k..cols {
                let dot: f64 = (0..rows - k).map(|i| v[i] * a[(k + i, j)]).sum();
                let s = tau * dot;
                for i in 0..rows - k {
                    a[(k + i, j)] -= s * v[i];
                }
            }
            a[(k, k)] = alpha;
            for i in k + 1..rows {
                a[(i, k)] = 0.0;
            }
            reflectors.push((v, tau));
        }
        Householder { r: a, reflectors }
    }

    pub fn rows(&self) -> usize {
        self.r.nrows()
    }

    pub fn cols(&self) -> usize {
        self.r.ncols()
    }

    /// The `rows x cols` upper-trapezoidal factor.
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Number of leading diagonal pivots above the relative rank tolerance;
    /// equals `min(rows, cols)` for a numerically full-rank matrix.
    pub fn rank(&self) -> usize {
        let steps = self.rows().min(self.cols());
        let largest = (0..steps).map(|i| self.r[(i, i)].abs()).fold(0.0, f64::max);
        if largest == 0.0 {
            return 0;
        }
        (0..steps)
            .take_while(|&i| self.r[(i, i)].abs() > RANK_TOL * largest)
            .count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.rows().min(self.cols())
    }

    /// `b <- Q^T b`.
    pub fn apply_qt(&self, b: &mut DVector<f64>) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate() {
            reflect(b, k, v, *tau);
        }
    }

    /// `b <- Q b`.
    pub fn apply_q(&self, b: &mut DVector<f64>) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            reflect(b, k, v, *tau);
        }
    }

    /// The full `rows x rows` orthogonal factor.
    pub fn q(&self) -> DMatrix<f64> {
        let n = self.rows();
        let mut q = DMatrix::identity(n, n);
        for j in 0..n {
            let mut col = q.column(j).into_owned();
            self.apply_q(&mut col);
            q.set_column(j, &col);
        }
        q
    }
}

fn reflect(b: &mut DVector<f64>, k: usize, v: &DVector<f64>, tau: f64) {
    if tau == 0.0 {
        return;
    }
    let dot: f64 = (0..v.len()).map(|i| v[i] * b[k + i]).sum();
    let s = tau * dot;
    for i in 0..v.len() {
        b[k + i] -= s * v[i];
    }
}

/// Solves `U x = b` for square upper-triangular `U`.
pub(crate) fn solve_upper(u: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= u[(i, j)] * x[j];
        }
        x[i] = s / u[(i, i)];
    }
    x
}

/// Solves `U^T x = b` for square upper-triangular `U`.
pub(crate) fn solve_upper_transpose(u: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for j in 0..i {
            s -= u[(j, i)] * x[j];
        }
        x[i] = s / u[(i, i)];
    }
    x
}

/// Solves `L x = b` for square lower-triangular `L`.
pub(crate) fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for j in 0..i {
            s -= l[(i, j)] * x[j];
        }
        x[i] = s / l[(i, i)];
    }
    x
}
