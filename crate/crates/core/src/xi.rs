//! Fundamental solutions `xi_{t,k}` of the TV-AR(2) difference equation.
//!
//! `xi_{t,k}` is the determinant of the `k x k` continuant matrix
//! [`FundamentalMatrix`] built from the coefficients between `t - k + 1` and
//! `t`, with `xi_{t,0} = 1` and `xi_{t,-1} = 0`. It is both the Green function
//! (impulse response at lag `k` for anchor `t`) and the weight on
//! `y_{t-k}` in the general solution.
//!
//! Two recurrences compute it in `O(k)`:
//!
//! * moving the anchor with a fixed origin `tau = t - k`:
//!   `xi_{t,k} = phi1(t) xi_{t-1,k-1} + phi2(t) xi_{t-2,k-2}` ([`xi`]);
//! * deepening the lookback with a fixed anchor `t`:
//!   `xi_{t,k} = phi1(t-k+1) xi_{t,k-1} + phi2(t-k+2) xi_{t,k-2}` ([`green_functions`]).
//!
//! The determinant itself is only used as a test oracle, see
//! [`xi_determinant_oracle`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::schedules::CoefficientSchedule;

/// Largest matrix the determinant oracles will assemble.
pub const ORACLE_CAP: usize = 64;

/// Below this root separation the constant-coefficient closed form switches
/// to the repeated-root limit `(m + 1) lambda^m`.
pub const REPEATED_ROOT_TOL: f64 = 1e-9;

/// `xi_{t,i}` for a fixed anchor `t` and `i = -1..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiTable {
    anchor: i64,
    // values[i + 1] = xi_{t,i}
    values: Vec<f64>,
}

impl XiTable {
    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    /// Largest depth `k` held by the table.
    pub fn depth(&self) -> usize {
        self.values.len() - 2
    }

    /// `xi_{t,i}` for `-1 <= i <= depth`.
    pub fn get(&self, i: isize) -> f64 {
        assert!(i >= -1, "xi depth must be >= -1, got {i}");
        self.values[(i + 1) as usize]
    }

    /// `[xi_{t,0}, ..., xi_{t,k}]`.
    pub fn values(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn into_values(mut self) -> Vec<f64> {
        self.values.remove(0);
        self.values
    }
}

/// `a x + b y`, with exact-zero coefficients dropping their term so that an
/// overflowed `x` or `y` gives infinity rather than `0 * inf = NaN`.
fn mul_add(a: f64, x: f64, b: f64, y: f64) -> f64 {
    match (a == 0.0, b == 0.0) {
        (true, true) => 0.0,
        (true, false) => b * y,
        (false, true) => a * x,
        (false, false) => a * x + b * y,
    }
}

/// Streaming `xi_{t,0}, xi_{t,1}, ...` for a fixed anchor.
///
/// Used where the depth is not known up front (truncated infinite sums).
pub struct GreenFunctions<'a, S: ?Sized> {
    schedule: &'a S,
    anchor: i64,
    next_depth: usize,
    prev: f64,
    prev2: f64,
}

impl<'a, S: CoefficientSchedule + ?Sized> GreenFunctions<'a, S> {
    pub fn new(schedule: &'a S, anchor: i64) -> Self {
        Self {
            schedule,
            anchor,
            next_depth: 0,
            prev: 0.0,
            prev2: 0.0,
        }
    }

    /// Depth of the value the next call to [`next_value`](Self::next_value) returns.
    pub fn depth(&self) -> usize {
        self.next_depth
    }

    pub fn next_value(&mut self) -> Result<f64> {
        let k = self.next_depth as i64;
        let value = match k {
            0 => 1.0,
            1 => self.schedule.phi1(self.anchor)?,
            _ => {
                let c_old = self.schedule.evaluate(self.anchor - k + 1)?;
                let phi2 = self.schedule.phi2(self.anchor - k + 2)?;
                mul_add(c_old.phi1, self.prev, phi2, self.prev2)
            }
        };
        self.prev2 = self.prev;
        self.prev = value;
        self.next_depth += 1;
        Ok(value)
    }
}

impl<S: CoefficientSchedule + ?Sized> Iterator for GreenFunctions<'_, S> {
    type Item = Result<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_value())
    }
}

/// The table `xi_{t,0..=k_max}`; for constant coefficients these are the
/// psi-weights of `(1 - phi1 B - phi2 B^2)^{-1}`.
pub fn green_functions<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k_max: usize,
) -> Result<XiTable> {
    let mut values = Vec::with_capacity(k_max + 2);
    values.push(0.0);
    let mut it = GreenFunctions::new(schedule, t);
    for _ in 0..=k_max {
        values.push(it.next_value()?);
    }
    Ok(XiTable { anchor: t, values })
}

/// `xi_{t,k}` for `k >= -1`, by the anchor-moving recurrence from origin `t - k`.
pub fn xi<S: CoefficientSchedule + ?Sized>(schedule: &S, t: i64, k: isize) -> Result<f64> {
    if k < -1 {
        return Err(Error::domain(format!("xi depth must be >= -1, got {k}")));
    }
    if k == -1 {
        return Ok(0.0);
    }
    let origin = t - k as i64;
    // g_m = xi_{origin + m, m}
    let (mut g2, mut g1) = (0.0, 1.0);
    for m in 1..=k as i64 {
        let c = schedule.evaluate(origin + m)?;
        let g = if m == 1 {
            c.phi1
        } else {
            mul_add(c.phi1, g1, c.phi2, g2)
        };
        g2 = g1;
        g1 = g;
    }
    Ok(g1)
}

/// Second fundamental solution `xi2_{t,k} = phi2(t - k + 1) xi_{t,k-1}`, `k >= 1`.
pub fn xi_second<S: CoefficientSchedule + ?Sized>(schedule: &S, t: i64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("xi_second requires k >= 1"));
    }
    let phi2 = schedule.phi2(t - k as i64 + 1)?;
    if phi2 == 0.0 {
        return Ok(0.0);
    }
    Ok(phi2 * xi(schedule, t, k as isize - 1)?)
}

/// The two homogeneous solution sequences started at origin `tau`.
///
/// Returns `(first, second)` indexed from time `tau - 1`: `first` starts
/// `(0, 1, ...)` and continues with `xi_{tau+m,m}`; `second` starts
/// `(1, 0, ...)` and continues with `xi2_{tau+m,m}`. Both have `len + 2` entries.
pub fn fundamental_sequences<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    tau: i64,
    len: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut first = vec![0.0, 1.0];
    let mut second = vec![1.0, 0.0];
    for m in 1..=len {
        let c = schedule.evaluate(tau + m as i64)?;
        let n = first.len();
        first.push(c.phi1 * first[n - 1] + c.phi2 * first[n - 2]);
        second.push(c.phi1 * second[n - 1] + c.phi2 * second[n - 2]);
    }
    Ok((first, second))
}

/// Roots `(lambda1, lambda2)` of `1 - phi1 z - phi2 z^2 = (1 - lambda1 z)(1 - lambda2 z)`.
pub fn ar2_roots(phi1: f64, phi2: f64) -> (Complex64, Complex64) {
    let disc = Complex64::new(phi1 * phi1 + 4.0 * phi2, 0.0).sqrt();
    let half = Complex64::new(phi1 / 2.0, 0.0);
    (half + disc / 2.0, half - disc / 2.0)
}

/// Closed-form continuant of a constant-coefficient block of depth `m >= -1`:
/// `(lambda1^{m+1} - lambda2^{m+1}) / (lambda1 - lambda2)`, or `(m + 1) lambda^m`
/// for repeated roots.
pub fn constant_xi(phi1: f64, phi2: f64, m: isize) -> Result<f64> {
    match m {
        m if m < -1 => return Err(Error::domain(format!("xi depth must be >= -1, got {m}"))),
        -1 => return Ok(0.0),
        0 => return Ok(1.0),
        _ => {}
    }
    let (l1, l2) = ar2_roots(phi1, phi2);
    let value = if (l1 - l2).norm() < REPEATED_ROOT_TOL {
        let lambda = (l1 + l2) / 2.0;
        lambda.powi(m as i32) * (m + 1) as f64
    } else {
        (l1.powi(m as i32 + 1) - l2.powi(m as i32 + 1)) / (l1 - l2)
    };
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::domain(format!(
            "closed-form continuant has imaginary residue {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// The continuant matrix `Phi_{t,k}`: `-1` on the superdiagonal,
/// `phi1(t-k+i)` on the diagonal and `phi2(t-k+i)` on the subdiagonal
/// (rows `i = 1..=k`).
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalMatrix(pub DMatrix<f64>);

impl FundamentalMatrix {
    pub fn assemble<S: CoefficientSchedule + ?Sized>(
        schedule: &S,
        t: i64,
        k: usize,
    ) -> Result<Self> {
        let mut m = DMatrix::zeros(k, k);
        let origin = t - k as i64;
        for i in 0..k {
            let c = schedule.evaluate(origin + i as i64 + 1)?;
            m[(i, i)] = c.phi1;
            if i > 0 {
                m[(i, i - 1)] = c.phi2;
            }
            if i + 1 < k {
                m[(i, i + 1)] = -1.0;
            }
        }
        Ok(Self(m))
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.0)
    }
}

pub(crate) fn determinant(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

pub(crate) fn check_cap(k: usize) -> Result<()> {
    if k > ORACLE_CAP {
        Err(Error::domain(format!(
            "determinant oracle is limited to k <= {ORACLE_CAP}, got {k}"
        )))
    } else {
        Ok(())
    }
}

/// `det(Phi_{t,k})` from the assembled dense matrix, `1 <= k <= ORACLE_CAP`.
pub fn xi_determinant_oracle<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("determinant oracle requires k >= 1"));
    }
    check_cap(k)?;
    Ok(FundamentalMatrix::assemble(schedule, t, k)?.determinant())
}

/// `det(Phi2_{t,k})`: `Phi_{t,k}` with its first column replaced by
/// `(phi2(t-k+1), 0, ..., 0)'`.
pub fn xi_second_determinant_oracle<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("determinant oracle requires k >= 1"));
    }
    check_cap(k)?;
    let mut m = FundamentalMatrix::assemble(schedule, t, k)?.0;
    m[(0, 0)] = schedule.phi2(t - k as i64 + 1)?;
    for i in 1..k {
        m[(i, 0)] = 0.0;
    }
    Ok(determinant(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::{
        CoefficientTuple, ConstantSchedule, PeriodicSchedule, TabulatedSchedule,
    };
    use approx::assert_relative_eq;

    fn ar2(phi1: f64, phi2: f64) -> ConstantSchedule {
        ConstantSchedule::new(CoefficientTuple::ar(phi1, phi2)).unwrap()
    }

    #[test]
    fn initial_values() {
        let s = ar2(0.7, 0.1);
        assert_eq!(xi(&s, 5, -1).unwrap(), 0.0);
        assert_eq!(xi(&s, 5, 0).unwrap(), 1.0);
        assert_eq!(xi(&s, 5, 1).unwrap(), 0.7);
        assert!(xi(&s, 5, -2).is_err());
        let table = green_functions(&s, 5, 3).unwrap();
        assert_eq!(table.get(-1), 0.0);
        assert_eq!(table.get(0), 1.0);
        assert_eq!(table.get(1), 0.7);
    }

    #[test]
    fn constant_ar2_values() {
        let s = ar2(1.2, -0.32);
        assert_relative_eq!(xi(&s, 0, 2).unwrap(), 1.12, max_relative = 1e-14);
        let table = green_functions(&s, 0, 4).unwrap();
        let expected = [1.0, 1.2, 1.12, 0.96, 0.7936];
        for (a, b) in table.values().iter().zip(expected) {
            assert_relative_eq!(*a, b, max_relative = 1e-14);
        }
        assert_relative_eq!(
            xi_determinant_oracle(&s, 0, 5).unwrap(),
            0.64512,
            max_relative = 1e-12
        );
        assert_relative_eq!(xi_second(&s, 0, 3).unwrap(), -0.3584, max_relative = 1e-14);
    }

    #[test]
    fn generic_two_by_two() {
        let s = TabulatedSchedule::new(
            9,
            vec![
                CoefficientTuple::ar(0.4, 0.7),
                CoefficientTuple::ar(0.5, 0.1),
            ],
        )
        .unwrap();
        assert_relative_eq!(xi(&s, 10, 2).unwrap(), 0.30, max_relative = 1e-14);
        assert_relative_eq!(
            xi_determinant_oracle(&s, 10, 2).unwrap(),
            0.30,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            green_functions(&s, 10, 2).unwrap().get(2),
            0.30,
            max_relative = 1e-14
        );
    }

    #[test]
    fn xi_second_edge_cases() {
        let s = ar2(0.3, -0.6);
        assert_eq!(xi_second(&s, 4, 1).unwrap(), -0.6);
        assert!(xi_second(&s, 4, 0).is_err());
        let z = ar2(0.9, 0.0);
        assert_eq!(xi_second(&z, 4, 7).unwrap(), 0.0);
    }

    #[test]
    fn zero_odd_branch() {
        let s = ar2(0.0, 0.5);
        let v = green_functions(&s, 0, 6).unwrap().into_values();
        assert_eq!(v, vec![1.0, 0.0, 0.5, 0.0, 0.25, 0.0, 0.125]);
    }

    #[test]
    fn par1_product_telescopes() {
        let s = PeriodicSchedule::from_ar(&[0.5, 1.2, 0.9, 1.8], &[0.0; 4]).unwrap();
        // t = 8 is season 4
        assert_relative_eq!(xi(&s, 8, 4).unwrap(), 0.972, max_relative = 1e-14);
        assert_relative_eq!(
            green_functions(&s, 8, 4).unwrap().get(4),
            0.972,
            max_relative = 1e-14
        );
    }

    #[test]
    fn oracle_cap() {
        let s = ar2(0.1, 0.1);
        assert!(xi_determinant_oracle(&s, 0, ORACLE_CAP).is_ok());
        assert!(xi_determinant_oracle(&s, 0, ORACLE_CAP + 1).is_err());
        assert_eq!(xi_determinant_oracle(&s, 0, 1).unwrap(), 0.1);
    }

    #[test]
    fn repeated_root_limit() {
        // 1 - z + 0.25 z^2 = (1 - 0.5 z)^2
        assert_relative_eq!(
            constant_xi(1.0, -0.25, 3).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        let s = ar2(1.0, -0.25);
        for m in 0..20 {
            assert_relative_eq!(
                constant_xi(1.0, -0.25, m).unwrap(),
                xi(&s, 0, m).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn complex_roots_closed_form() {
        let s = ar2(0.5, -0.8);
        for m in -1..25 {
            let r = xi(&s, 3, m).unwrap();
            assert!((constant_xi(0.5, -0.8, m).unwrap() - r).abs() <= 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn casoratian_is_one() {
        let s = ar2(0.4, 0.3);
        let (a, b) = fundamental_sequences(&s, 0, 3).unwrap();
        assert_eq!(b[0] * a[1] - a[0] * b[1], 1.0);
    }

    #[test]
    fn explosive_overflows_to_infinity() {
        let s = ar2(1e3, 0.0);
        assert!(xi(&s, 0, 200).unwrap().is_infinite());
    }
}
