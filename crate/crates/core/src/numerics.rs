//! Deterministic scalar and small-matrix kernels shared by the model solvers.
//!
//! Everything here is a pure function: midpoint bisection (no secant or
//! Brent steps, so golden outputs are reproducible), power iteration for the
//! spectral radius and left Perron vector of a nonnegative matrix, and
//! central-difference Jacobians.

use thiserror::Error;

use crate::Real;

/// Iteration cap for bisection; 2^-200 of the initial width is far below any
/// tolerance used anywhere in the crate.
pub const BISECT_MAX_ITER: usize = 200;

/// Iteration cap for power iteration before reporting no convergence.
pub const POWER_MAX_ITER: usize = 50_000;

/// Unshifted iterations attempted before switching to the shifted matrix.
const POWER_UNSHIFTED_ITER: usize = 25_000;

/// Relative accuracy contract for the spectral radius.
pub const EIGEN_REL_TOL: f64 = 1e-10;

/// Internal stopping residual; the eigenvalue error lags the eigenvector
/// residual by a condition factor, so iterate well past the contract.
const POWER_STOP_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("no sign change on bracket: f(lo)={f_lo}, f(hi)={f_hi}")]
    NoSignChange { f_lo: f64, f_hi: f64 },
    #[error("function evaluated to a non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid bracket: lo={lo}, hi={hi}, tol={tol}")]
    BadBracket { lo: f64, hi: f64, tol: f64 },
    #[error("matrix entry ({row},{col}) is negative: {value}")]
    NotNonnegative { row: usize, col: usize, value: f64 },
    #[error("power iteration did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix must be square and at most 32x32, got dimension {n}")]
    BadDimension { n: usize },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
}

/// Bisection bracket `[lo, hi]` with an absolute width tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    lo: T,
    hi: T,
    tol: T,
}

impl<T: Real> Bracket<T> {
    pub fn new(lo: T, hi: T, tol: T) -> Result<Self, NumericsError> {
        if !(lo < hi) || !(tol > T::zero()) || !lo.is_finite() || !hi.is_finite() {
            return Err(NumericsError::BadBracket {
                lo: lo.to_diag(),
                hi: hi.to_diag(),
                tol: tol.to_diag(),
            });
        }
        Ok(Self { lo, hi, tol })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn tol(&self) -> T {
        self.tol
    }
}

/// Midpoint bisection on a bracketing interval.
///
/// Requires `f(lo) * f(hi) <= 0`. Stops when `|f(mid)|` falls below an
/// f-scale tolerance derived from the endpoint values or the bracket width
/// drops below `tol`; the iteration count is capped at [`BISECT_MAX_ITER`].
pub fn bisect_root<T: Real>(
    f: impl Fn(T) -> T,
    bracket: Bracket<T>,
) -> Result<T, NumericsError> {
    let mut lo = bracket.lo;
    let mut hi = bracket.hi;

    let f_lo = f(lo);
    let f_hi = f(hi);
    for (x, fx) in [(lo, f_lo), (hi, f_hi)] {
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite { at: x.to_diag() });
        }
    }
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange {
            f_lo: f_lo.to_diag(),
            f_hi: f_hi.to_diag(),
        });
    }

    let mut sign_lo = f_lo.signum();
    let mut mid = lo + (hi - lo) / T::of(2.0);

    for _ in 0..BISECT_MAX_ITER {
        mid = lo + (hi - lo) / T::of(2.0);
        if mid <= lo || mid >= hi {
            // Interval no longer representable; mid is the answer.
            return Ok(mid);
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(NumericsError::NonFinite { at: mid.to_diag() });
        }
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
            sign_lo = f_mid.signum();
        } else {
            hi = mid;
        }
        if hi - lo <= bracket.tol {
            return Ok(lo + (hi - lo) / T::of(2.0));
        }
    }
    Ok(mid)
}

/// Dense square matrix of dimension at most 32, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Real> SmallMatrix<T> {
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self, NumericsError> {
        if n == 0 || n > 32 || entries.len() != n * n {
            return Err(NumericsError::BadDimension { n });
        }
        for (k, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(NumericsError::NonFiniteEntry {
                    row: k / n,
                    col: k % n,
                });
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, NumericsError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(NumericsError::BadDimension { n });
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = T::one();
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.entries[row * self.n + col] = value;
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Row vector times matrix: `out_j = sum_i v_i * m[i][j]`.
    pub fn left_mul(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for j in 0..self.n {
                out[j] = out[j] + vi * self.entries[i * self.n + j];
            }
        }
        out
    }

    pub fn max_row_sum(&self) -> T {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j))
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), T::max)
    }

    fn check_nonnegative(&self) -> Result<(), NumericsError> {
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) < T::zero() {
                    return Err(NumericsError::NotNonnegative {
                        row: i,
                        col: j,
                        value: self.get(i, j).to_diag(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Spectral radius of a nonnegative matrix with its left eigenvector.
#[derive(Debug, Clone)]
pub struct SpectralRadius<T> {
    /// Largest eigenvalue modulus.
    pub rho: T,
    /// Nonnegative left eigenvector, normalized to sum 1.
    pub left_vector: Vec<T>,
    /// Final residual `max_j |v' M - rho v'|_j / max(rho, 1)`.
    pub residual: T,
    /// True when the shifted fallback was needed (periodic chains).
    pub shifted: bool,
}

/// Spectral radius and left Perron vector of a nonnegative matrix.
///
/// Power iteration on the transpose with an all-ones start vector. If the
/// plain iteration stalls (periodic chains oscillate), the matrix is shifted
/// to `M + 0.1*rho_est*I`, which leaves eigenvectors unchanged, and the shift
/// is subtracted from the converged eigenvalue.
pub fn spectral_radius<T: Real>(m: &SmallMatrix<T>) -> Result<SpectralRadius<T>, NumericsError> {
    m.check_nonnegative()?;
    let n = m.dim();
    let upper = m.max_row_sum();
    if upper == T::zero() {
        // Zero matrix: rho = 0, any probability vector works.
        return Ok(SpectralRadius {
            rho: T::zero(),
            left_vector: vec![T::one() / T::of(n as f64); n],
            residual: T::zero(),
            shifted: false,
        });
    }

    if let Some(result) = power_iterate(m, T::zero(), POWER_UNSHIFTED_ITER) {
        return Ok(result);
    }
    let shift = T::of(0.1) * upper;
    let mut shifted_m = m.clone();
    for i in 0..n {
        shifted_m.set(i, i, shifted_m.get(i, i) + shift);
    }
    match power_iterate(&shifted_m, shift, POWER_MAX_ITER) {
        Some(mut result) => {
            result.shifted = true;
            Ok(result)
        }
        None => {
            // One last pass to report the residual at the iteration cap.
            let residual = residual_at(m, &vec![T::one() / T::of(n as f64); n]);
            Err(NumericsError::NoConvergence {
                iterations: POWER_MAX_ITER,
                residual: residual.to_diag(),
            })
        }
    }
}

/// Runs power iteration on the transpose of `m`; `shift` is subtracted from
/// the converged eigenvalue. Returns `None` when the residual tolerance was
/// not reached within `max_iter`.
fn power_iterate<T: Real>(
    m: &SmallMatrix<T>,
    shift: T,
    max_iter: usize,
) -> Option<SpectralRadius<T>> {
    let n = m.dim();
    let tol = T::of(POWER_STOP_TOL).max(T::epsilon() * T::of(100.0));
    let mut v = vec![T::one() / T::of(n as f64); n];

    for _ in 0..max_iter {
        let w = m.left_mul(&v);
        let norm: T = w.iter().copied().sum();
        if norm == T::zero() {
            // Iterate annihilated: dominant eigenvalue along this start is 0.
            return Some(SpectralRadius {
                rho: T::zero().max(-shift),
                left_vector: v,
                residual: T::zero(),
                shifted: false,
            });
        }
        let rho_est = norm; // v sums to 1, nonnegative: |w|_1 / |v|_1 = sum(w)
        let next: Vec<T> = w.iter().map(|&x| x / norm).collect();

        // Residual of the eigen relation at the new vector.
        let res = {
            let w2 = m.left_mul(&next);
            let mut r = T::zero();
            for j in 0..n {
                r = r.max((w2[j] - rho_est * next[j]).abs());
            }
            r / rho_est.max(T::one())
        };
        v = next;
        if res <= tol {
            return Some(SpectralRadius {
                rho: rho_est - shift,
                left_vector: v,
                residual: res,
                shifted: false,
            });
        }
    }
    None
}

fn residual_at<T: Real>(m: &SmallMatrix<T>, v: &[T]) -> T {
    let w = m.left_mul(v);
    let rho: T = w.iter().copied().sum();
    let mut r = T::zero();
    for j in 0..m.dim() {
        r = r.max((w[j] - rho * v[j]).abs());
    }
    r
}

/// Central-difference Jacobian of `map` at `point`.
///
/// Entry `(i, j)` is `d map_i / d x_j`, accurate to `O(step^2)`.
pub fn jacobian_fd<T: Real>(
    map: impl Fn(&[T]) -> Vec<T>,
    point: &[T],
    step: T,
) -> Result<SmallMatrix<T>, NumericsError> {
    let n = point.len();
    let mut entries = vec![T::zero(); n * n];
    let two_step = T::of(2.0) * step;
    for j in 0..n {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[j] = plus[j] + step;
        minus[j] = minus[j] - step;
        let f_plus = map(&plus);
        let f_minus = map(&minus);
        for i in 0..n {
            let d = (f_plus[i] - f_minus[i]) / two_step;
            if !d.is_finite() {
                return Err(NumericsError::NonFinite {
                    at: point[j].to_diag(),
                });
            }
            entries[i * n + j] = d;
        }
    }
    SmallMatrix::new(n, entries)
}

/// Real eigenvalues of a 2x2 matrix, largest modulus first.
///
/// Returns `None` for complex pairs (negative discriminant).
pub fn real_eigenvalues_2x2<T: Real>(m: &SmallMatrix<T>) -> Option<(T, T)> {
    assert_eq!(m.dim(), 2, "eigenvalue helper is for 2x2 matrices");
    let tr = m.get(0, 0) + m.get(1, 1);
    let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let disc = tr * tr - T::of(4.0) * det;
    if disc < T::zero() {
        return None;
    }
    let root = disc.sqrt();
    let a = (tr + root) / T::of(2.0);
    let b = (tr - root) / T::of(2.0);
    if a.abs() >= b.abs() {
        Some((a, b))
    } else {
        Some((b, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bracket(lo: f64, hi: f64, tol: f64) -> Bracket<f64> {
        Bracket::new(lo, hi, tol).unwrap()
    }

    #[test]
    fn bisect_linear_roots() {
        let root = bisect_root(|x| x - 0.5, bracket(0.0, 1.0, 1e-12)).unwrap();
        assert!((root - 0.5).abs() <= 1e-12);

        let root = bisect_root(|x| 2.0 - 3.0 * x, bracket(0.0, 1.0, 1e-12)).unwrap();
        assert!((root - 2.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn bisect_one_step_asset_price_map() {
        // Algebra oracle: (b/(1-b))(a-P) = P  =>  P = b*a. With b=0.5, a=1: 0.5.
        let beta = 0.5;
        let a = 1.0;
        let f = |p: f64| beta / (1.0 - beta) * (a - p) - p;
        let root = bisect_root(f, bracket(0.0, 1.0, 1e-12)).unwrap();
        assert!((root - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn bisect_rejects_bad_inputs() {
        assert!(matches!(
            bisect_root(|x: f64| x + 1.0, bracket(0.0, 1.0, 1e-12)),
            Err(NumericsError::NoSignChange { .. })
        ));
        assert!(matches!(
            bisect_root(|x: f64| (x - 0.5).ln(), bracket(0.0, 1.0, 1e-12)),
            Err(NumericsError::NonFinite { .. })
        ));
        assert!(Bracket::new(1.0, 0.0, 1e-12).is_err());
        assert!(Bracket::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bisect_monotone_safe() {
        // Strictly monotone with a sign change: |f(root)| <= 1e-10*(1+|f(lo)|+|f(hi)|).
        for (f, lo, hi) in [
            (
                Box::new(|x: f64| x.powi(3) - 0.7) as Box<dyn Fn(f64) -> f64>,
                -1.0,
                2.0,
            ),
            (Box::new(|x: f64| x.exp() - 3.0), 0.0, 4.0),
            (Box::new(|x: f64| -2.0 * x + 0.3), -5.0, 5.0),
        ] {
            let b = bracket(lo, hi, 1e-13);
            let root = bisect_root(&f, b).unwrap();
            let bound = 1e-10 * (1.0 + f(lo).abs() + f(hi).abs());
            assert!(f(root).abs() <= bound, "residual {} > {}", f(root), bound);
        }
    }

    #[test]
    fn spectral_radius_identity() {
        let m = SmallMatrix::identity(2);
        let s = spectral_radius::<f64>(&m).unwrap();
        assert!((s.rho - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn spectral_radius_triangular() {
        // Triangular: rho is the max diagonal entry.
        let m = SmallMatrix::from_rows(&[vec![0.0f64, 0.0], vec![0.1296, 1.296]]).unwrap();
        let s = spectral_radius(&m).unwrap();
        assert!((s.rho - 1.296).abs() <= 1e-10 * 1.296);
        // v' M = rho v'
        let w = m.left_mul(&s.left_vector);
        for j in 0..2 {
            assert!((w[j] - s.rho * s.left_vector[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn spectral_radius_growth_matrix_example() {
        // 2x2 characteristic-polynomial oracle for A = beta*diag(z)*Pi with
        // beta=0.96, z=(0,1.5), Pi=[[0.9,0.1],[0.1,0.9]]: row 0 is zero so
        // rho = 0.96*1.5*0.9 = 1.296 exactly.
        let a = SmallMatrix::from_rows(&[vec![0.0f64, 0.0], vec![0.96 * 1.5 * 0.1, 0.96 * 1.5 * 0.9]])
            .unwrap();
        let s = spectral_radius(&a).unwrap();
        let tr = 0.0 + 1.296;
        let det = 0.0f64;
        let oracle = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        assert!((s.rho - oracle).abs() <= 1e-10 * oracle);
        assert!((s.rho - 1.296).abs() <= 1e-10 * 1.296);
    }

    #[test]
    fn spectral_radius_periodic_chain_uses_shift() {
        // Asymmetric two-cycle: plain power iteration oscillates between
        // two rays, the shifted matrix is aperiodic and converges.
        let m = SmallMatrix::from_rows(&[vec![0.0f64, 2.0], vec![0.5, 0.0]]).unwrap();
        let s = spectral_radius(&m).unwrap();
        assert!((s.rho - 1.0).abs() <= 1e-9, "rho = {}", s.rho);
        assert!(s.shifted);
        // Left eigenvector: v M = v  =>  v = (1/3, 2/3) after sum-1 scaling.
        assert!((s.left_vector[0] - 1.0 / 3.0).abs() <= 1e-8);
        assert!((s.left_vector[1] - 2.0 / 3.0).abs() <= 1e-8);
        // The uniform start is already the eigenvector of the symmetric
        // two-cycle, so that one converges without the shift.
        let sym = SmallMatrix::from_rows(&[vec![0.0f64, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = spectral_radius(&sym).unwrap();
        assert!((s.rho - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn spectral_radius_homogeneous() {
        let m = SmallMatrix::from_rows(&[vec![0.3f64, 0.7], vec![0.2, 0.9]]).unwrap();
        let rho = spectral_radius(&m).unwrap().rho;
        for alpha in [0.5, 2.0] {
            let scaled = spectral_radius(&m.scale(alpha)).unwrap().rho;
            assert!((scaled - alpha * rho).abs() <= 1e-9 * scaled.max(1.0));
        }
    }

    #[test]
    fn spectral_radius_rejects_negative() {
        let m = SmallMatrix::from_rows(&[vec![0.1f64, -0.2], vec![0.3, 0.4]]).unwrap();
        assert!(matches!(
            spectral_radius(&m),
            Err(NumericsError::NotNonnegative { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn jacobian_of_linear_map_recovers_matrix() {
        let m = [[1.5, -0.3], [0.25, 2.0]];
        let map = |x: &[f64]| {
            vec![
                m[0][0] * x[0] + m[0][1] * x[1],
                m[1][0] * x[0] + m[1][1] * x[1],
            ]
        };
        let j = jacobian_fd(map, &[0.7, -0.2], 1e-5).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                assert!((j.get(i, k) - m[i][k]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_of_identity_map() {
        let j = jacobian_fd(|x: &[f64]| x.to_vec(), &[0.25, 1.0, -3.0], 1e-5).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((j.get(i, k) - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn jacobian_of_quadratic_map_matches_linear_part() {
        // f(x) = (x0 + 3 x1 + x0^2, 2 x0 - x1 + x1^2): linear part at 0 is
        // [[1,3],[2,-1]], FD error O(step^2) = 1e-10.
        let map = |x: &[f64]| {
            vec![
                x[0] + 3.0 * x[1] + x[0] * x[0],
                2.0 * x[0] - x[1] + x[1] * x[1],
            ]
        };
        let j = jacobian_fd(map, &[0.0, 0.0], 1e-5).unwrap();
        let want = [[1.0, 3.0], [2.0, -1.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j.get(i, k) - want[i][k]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn jacobian_reports_non_finite() {
        let map = |x: &[f64]| vec![x[0].ln()];
        assert!(matches!(
            jacobian_fd(map, &[0.0], 1e-5),
            Err(NumericsError::NonFinite { .. })
        ));
    }

    #[test]
    fn kernels_are_generic_over_f32() {
        let root = bisect_root(|x: f32| x - 0.5, Bracket::new(0.0f32, 1.0, 1e-5).unwrap());
        assert!((root.unwrap() - 0.5).abs() <= 1e-5);
    }
}
