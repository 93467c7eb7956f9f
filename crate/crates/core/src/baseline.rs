//! Linear network autocorrelation model `y = rho W y + X b + e`,
//! `e ~ N(0, s2 I)`, fitted by maximum likelihood.
//!
//! `b` and `s2` are profiled out in closed form; `rho` is found by a bounded
//! scalar search inside the stability interval `(1/l_min, 1/l_max)` of the
//! weight spectrum. The log-determinant is evaluated from the eigenvalues.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{ItemResponseData, NetworkData};

const Z95: f64 = 1.959_963_984_540_054;
const MARGIN: f64 = 1e-6;
const GRID: usize = 200;

/// Row sums of the response matrix.
pub fn behavior_counts(resp: &ItemResponseData) -> Vec<f64> {
    (0..resp.n()).map(|k| resp.row(k).iter().map(|&x| x as f64).sum()).collect()
}

/// Dense weight matrix together with its eigenvalues.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    matrix: DMatrix<f64>,
    eigenvalues: Vec<Complex<f64>>,
}

impl WeightMatrix {
    /// Any square matrix with zero diagonal.
    pub fn from_dense(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!("weight matrix is {}x{}", n, matrix.ncols())));
        }
        if n == 0 {
            return Err(Error::InvalidData("empty weight matrix".into()));
        }
        if (0..n).any(|i| matrix[(i, i)] != 0.0) {
            return Err(Error::InvalidData("weight matrix must have a zero diagonal".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("weight matrix has non-finite entries".into()));
        }
        let eigenvalues = if matrix == matrix.transpose() {
            SymmetricEigen::new(matrix.clone()).eigenvalues.iter().map(|&v| Complex::new(v, 0.0)).collect()
        } else {
            matrix.complex_eigenvalues().iter().copied().collect()
        };
        Ok(Self { matrix, eigenvalues })
    }

    /// Adjacency weights, optionally row-normalized. Rows of isolated
    /// respondents stay zero.
    pub fn from_network(net: &NetworkData, row_normalize: bool) -> Result<Self> {
        let n = net.n();
        let a = DMatrix::from_fn(n, n, |i, j| net.has_edge(i, j) as u8 as f64);
        if !row_normalize {
            return Self::from_dense(a);
        }
        // D^-1 A is similar to the symmetric D^-1/2 A D^-1/2
        let deg = net.degrees();
        let inv = |d: usize| if d == 0 { 0.0 } else { 1.0 / d as f64 };
        let sym = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * (inv(deg[i]) * inv(deg[j])).sqrt());
        let eigenvalues = SymmetricEigen::new(sym).eigenvalues.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let matrix = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv(deg[i]));
        Ok(Self { matrix, eigenvalues })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    /// Open interval of `rho` for which `I - rho W` stays nonsingular along
    /// the path from zero.
    pub fn stability_interval(&self) -> Result<(f64, f64)> {
        if self.matrix.iter().all(|&v| v == 0.0) {
            return Err(Error::Unidentified);
        }
        let real = self.eigenvalues.iter().filter(|c| c.im.abs() < 1e-9).map(|c| c.re);
        let lo = real.clone().fold(0.0f64, f64::min);
        let hi = real.fold(0.0f64, f64::max);
        if lo >= -1e-12 || hi <= 1e-12 {
            return Err(Error::Unidentified);
        }
        Ok((1.0 / lo, 1.0 / hi))
    }

    /// `log |det(I - rho W)|`.
    pub fn log_abs_det(&self, rho: f64) -> f64 {
        self.eigenvalues.iter().map(|&l| (Complex::new(1.0, 0.0) - l * rho).norm().ln()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrFit {
    pub rho: f64,
    pub sigma2: f64,
    /// Covariate coefficients; empty without a design matrix.
    pub coefficients: Vec<f64>,
    pub se: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub loglik: f64,
    /// The maximizer sits at an edge of the search interval.
    pub boundary_hit: bool,
    pub interval: (f64, f64),
}

/// Profiled likelihood for fixed data; residual sum of squares is
/// `c0 - 2 rho c1 + rho^2 c2`.
pub struct LnamProblem<'a> {
    w: &'a WeightMatrix,
    n: f64,
    c: [f64; 3],
    y: DVector<f64>,
    wy: DVector<f64>,
    design: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl<'a> LnamProblem<'a> {
    pub fn new(y: &[f64], w: &'a WeightMatrix, x: Option<&DMatrix<f64>>) -> Result<Self> {
        let n = w.n();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!("y has {} entries, W is {n}x{n}", y.len())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite response".into()));
        }
        let y = DVector::from_column_slice(y);
        let wy = w.matrix() * &y;
        let design = match x {
            None => None,
            Some(x) => {
                if x.nrows() != n {
                    return Err(Error::DimensionMismatch(format!("design matrix has {} rows, expected {n}", x.nrows())));
                }
                if x.ncols() == 0 || x.ncols() >= n {
                    return Err(Error::InvalidData(format!("design matrix has {} columns", x.ncols())));
                }
                let qr = x.clone().qr();
                let r = qr.r();
                if r.diagonal().iter().any(|d| d.abs() < 1e-10) {
                    return Err(Error::InvalidData("design matrix is rank deficient".into()));
                }
                Some((qr.q(), r))
            }
        };
        let (my, mwy) = match &design {
            None => (y.clone(), wy.clone()),
            Some((q, _)) => {
                let proj = |v: &DVector<f64>| v - q * (q.transpose() * v);
                (proj(&y), proj(&wy))
            }
        };
        let c = [my.dot(&my), my.dot(&mwy), mwy.dot(&mwy)];
        Ok(Self { w, n: n as f64, c, y, wy, design })
    }

    fn rss(&self, rho: f64) -> f64 {
        self.c[0] - 2.0 * rho * self.c[1] + rho * rho * self.c[2]
    }

    /// Log-likelihood with `b` and `s2` at their maximizers for this `rho`.
    pub fn profile_loglik(&self, rho: f64) -> f64 {
        let rss = self.rss(rho).max(f64::MIN_POSITIVE);
        self.w.log_abs_det(rho) - 0.5 * self.n * ((2.0 * std::f64::consts::PI * rss / self.n).ln() + 1.0)
    }

    /// Second derivative of the profile log-likelihood.
    pub fn curvature(&self, rho: f64) -> f64 {
        let one = Complex::new(1.0, 0.0);
        let det: f64 = self
            .w
            .eigenvalues()
            .iter()
            .map(|&l| {
                let r = l / (one - l * rho);
                -(r * r).re
            })
            .sum();
        let q = self.rss(rho);
        let dq = -2.0 * self.c[1] + 2.0 * rho * self.c[2];
        let ddq = 2.0 * self.c[2];
        det - 0.5 * self.n * (ddq * q - dq * dq) / (q * q)
    }

    pub fn coefficients(&self, rho: f64) -> Vec<f64> {
        match &self.design {
            None => Vec::new(),
            Some((q, r)) => {
                let rhs = q.transpose() * (&self.y - &self.wy * rho);
                r.solve_upper_triangular(&rhs).expect("full rank").iter().copied().collect()
            }
        }
    }

    pub fn sigma2(&self, rho: f64) -> f64 {
        self.rss(rho) / self.n
    }
}

/// Maximum likelihood fit. `x = None` fits the model without covariates or
/// intercept.
pub fn fit_lnam(y: &[f64], w: &WeightMatrix, x: Option<&DMatrix<f64>>) -> Result<AutocorrFit> {
    let (lo, hi) = w.stability_interval()?;
    let problem = LnamProblem::new(y, w, x)?;
    let a = lo + MARGIN * (hi - lo);
    let b = hi - MARGIN * (hi - lo);

    // coarse scan, then golden section around the best grid point
    let h = (b - a) / GRID as f64;
    let best = (0..=GRID)
        .map(|j| (j, problem.profile_loglik(a + h * j as f64)))
        .filter(|(_, v)| v.is_finite())
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(j, _)| j)
        .ok_or(Error::Unidentified)?;
    let mut left = a + h * best.saturating_sub(1) as f64;
    let mut right = (a + h * (best + 1) as f64).min(b);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = right - phi * (right - left);
    let mut x2 = left + phi * (right - left);
    let mut f1 = problem.profile_loglik(x1);
    let mut f2 = problem.profile_loglik(x2);
    while right - left > 1e-12 * (1.0 + left.abs().max(right.abs())) {
        if f1 < f2 {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + phi * (right - left);
            f2 = problem.profile_loglik(x2);
        } else {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - phi * (right - left);
            f1 = problem.profile_loglik(x1);
        }
    }
    let rho = 0.5 * (left + right);
    let boundary_hit = best == 0 || best == GRID;

    let info = -problem.curvature(rho);
    let se = (info > 0.0 && info.is_finite()).then(|| info.sqrt().recip());
    Ok(AutocorrFit {
        rho,
        sigma2: problem.sigma2(rho),
        coefficients: problem.coefficients(rho),
        se,
        ci: se.map(|s| (rho - Z95 * s, rho + Z95 * s)),
        loglik: problem.profile_loglik(rho),
        boundary_hit,
        interval: (lo, hi),
    })
}

/// Fits the count model `S = rho W S + e` on a paired dataset.
pub fn fit_lnam_counts(net: &NetworkData, resp: &ItemResponseData, row_normalize: bool) -> Result<AutocorrFit> {
    resp.check_paired(net)?;
    let w = WeightMatrix::from_network(net, row_normalize)?;
    fit_lnam(&behavior_counts(resp), &w, None)
}
