//! Block decompositions of `xi_{t,k}`.
//!
//! Cutting the continuant `Phi_{t,k}` into consecutive diagonal blocks gives a
//! block tridiagonal matrix whose only off-block entries are a `-1` above and
//! the coupling `phi2` (taken at the first time of the newer block) below each
//! boundary. Expanding over the boundaries yields `2^r` products of smaller
//! continuants: at every boundary either the blocks separate (selector 0) or
//! the coupling is taken and both neighbours lose the adjacent row and column
//! (selector 1).
//!
//! Blocks are numbered from the present backwards: block 0 ends at the anchor
//! `t`. With boundary offsets `0 = k_0 < k_1 < ... < k_r < k_{r+1} = k`, block
//! `b` spans times `t - k_{b+1} + 1 ..= t - k_b`.
//!
//! * PAR(2;l): `n` blocks of size `l`, all equal to `Phi_{t,l}` up to the
//!   one-step anchor shift, so only `xi_{t,.}` and `xi_{t-1,.}` appear.
//! * CAR(2;l;d): one period split at the cycle boundaries.
//! * ABAR(2;r): split at the break dates; each block is constant-coefficient
//!   and evaluated from the roots of its AR polynomial.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::schedules::{
    season_of, BreakSchedule, CoefficientSchedule, CyclicalSchedule, PeriodicSchedule,
};
use crate::xi::{
    check_cap, constant_xi, determinant, green_functions, xi, FundamentalMatrix, XiTable,
};

/// More boundaries than this would enumerate over 16M addends.
pub const MAX_BOUNDARIES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Periodic,
    Cyclical,
    AbruptBreaks,
    Generic,
}

/// Boundary layout of a block decomposition anchored at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    /// Total lookback `k`.
    pub depth: usize,
    /// Interior boundaries `k_1 < ... < k_r`, measured back from the anchor.
    pub offsets: Vec<usize>,
    /// `couplings[j] = phi2(t - k_{j+1} + 1)`.
    pub couplings: Vec<f64>,
}

/// One continuant in a product term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockFactor {
    pub block: usize,
    pub anchor: i64,
    pub depth: isize,
}

impl BlockSpec {
    pub fn new(
        kind: BlockKind,
        depth: usize,
        offsets: Vec<usize>,
        couplings: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            depth,
            offsets,
            couplings,
        };
        if spec.full_offsets().windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                "block boundaries must be strictly increasing within (0, k)",
            ));
        }
        if spec.couplings.len() != spec.offsets.len() {
            return Err(Error::domain(
                "one coupling coefficient per boundary is required",
            ));
        }
        if spec.offsets.len() > MAX_BOUNDARIES {
            return Err(Error::domain(format!(
                "at most {MAX_BOUNDARIES} boundaries are supported, got {}",
                spec.offsets.len()
            )));
        }
        Ok(spec)
    }

    /// Boundaries at `offsets` with couplings read from the schedule.
    pub fn from_schedule<S: CoefficientSchedule + ?Sized>(
        schedule: &S,
        t: i64,
        kind: BlockKind,
        depth: usize,
        offsets: Vec<usize>,
    ) -> Result<Self> {
        let couplings = offsets
            .iter()
            .map(|&o| schedule.phi2(t - o as i64 + 1))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, depth, offsets, couplings)
    }

    /// `n` blocks of `l` seasons.
    pub fn par(schedule: &PeriodicSchedule, t: i64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("PAR decomposition requires n >= 1"));
        }
        let l = schedule.seasons_per_period();
        Self::from_schedule(
            schedule,
            t,
            BlockKind::Periodic,
            n * l,
            (1..n).map(|j| j * l).collect(),
        )
    }

    /// One period ending at `t`, split where the cycle changes.
    /// `t` must fall on the last season of a period.
    pub fn car(schedule: &CyclicalSchedule, t: i64) -> Result<Self> {
        let l = schedule.seasons;
        let s = season_of(t, l);
        if s != l {
            return Err(Error::domain(format!(
                "CAR decomposition needs the anchor at season {l} (period end); t = {t} is season {s}"
            )));
        }
        let offsets = schedule.boundaries.iter().rev().map(|&b| l - b).collect();
        Self::from_schedule(schedule, t, BlockKind::Cyclical, l, offsets)
    }

    /// Split at the break dates of `schedule`, anchored at its own anchor.
    pub fn abar(schedule: &BreakSchedule) -> Result<Self> {
        Self::from_schedule(
            schedule,
            schedule.anchor,
            BlockKind::AbruptBreaks,
            schedule.horizon,
            schedule.offsets.clone(),
        )
    }

    pub fn boundaries(&self) -> usize {
        self.offsets.len()
    }

    pub fn blocks(&self) -> usize {
        self.offsets.len() + 1
    }

    /// Number of addends, `2^r`.
    pub fn term_count(&self) -> usize {
        1 << self.offsets.len()
    }

    /// `[0, k_1, ..., k_r, k]`.
    pub fn full_offsets(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.offsets.len() + 2);
        v.push(0);
        v.extend_from_slice(&self.offsets);
        v.push(self.depth);
        v
    }

    /// Size of block `b`.
    pub fn block_size(&self, b: usize) -> usize {
        let full = self.full_offsets();
        full[b + 1] - full[b]
    }

    /// Continuant factors of the addend selected by `selectors` (bit `j` is
    /// the selector of boundary `k_{j+1}`).
    ///
    /// Block `b` becomes `xi_{t - k_b - i_b, k_{b+1} - k_b - i_b - i_{b+1}}`
    /// where `i_b` is the selector of its newer boundary (0 for block 0) and
    /// `i_{b+1}` that of its older boundary (0 for the last block).
    pub fn term_factors(&self, t: i64, selectors: u64) -> Vec<BlockFactor> {
        let full = self.full_offsets();
        let r = self.offsets.len();
        let bit = |j: usize| -> isize { ((selectors >> j) & 1) as isize };
        (0..=r)
            .map(|b| {
                let newer = if b == 0 { 0 } else { bit(b - 1) };
                let older = if b == r { 0 } else { bit(b) };
                BlockFactor {
                    block: b,
                    anchor: t - full[b] as i64 - newer as i64,
                    depth: (full[b + 1] - full[b]) as isize - newer - older,
                }
            })
            .collect()
    }

    /// Product of the couplings taken by `selectors`.
    pub fn coupling_weight(&self, selectors: u64) -> f64 {
        self.couplings
            .iter()
            .enumerate()
            .filter(|(j, _)| (selectors >> j) & 1 == 1)
            .map(|(_, c)| c)
            .product()
    }
}

/// Value of a decomposition and the number of addends it enumerated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub value: f64,
    pub terms: usize,
}

/// Sum the `2^r` addends of `spec`, evaluating each continuant with `block_xi`.
///
/// Addends are visited in ascending selector order and accumulated with
/// compensated summation, so the result does not depend on anything but the inputs.
pub fn decompose<F>(spec: &BlockSpec, t: i64, mut block_xi: F) -> Result<Decomposition>
where
    F: FnMut(BlockFactor) -> Result<f64>,
{
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for sel in 0..spec.term_count() as u64 {
        let weight = spec.coupling_weight(sel);
        if weight == 0.0 {
            continue;
        }
        let mut term = weight;
        for f in spec.term_factors(t, sel) {
            term *= block_xi(f)?;
        }
        let s = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - s) + term;
        } else {
            comp += (term - s) + sum;
        }
        sum = s;
    }
    Ok(Decomposition {
        value: sum + comp,
        terms: spec.term_count(),
    })
}

/// Decomposition with every block evaluated by the continuant recurrence.
pub fn decompose_generic<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    spec: &BlockSpec,
) -> Result<Decomposition> {
    decompose(spec, t, |f| xi(schedule, f.anchor, f.depth))
}

/// `xi_{t,nl}` for PAR(2;l) as a sum of `2^{n-1}` products of `n`
/// within-period continuants `xi_{t,.}` / `xi_{t-1,.}`.
pub fn xi_par_decomposed(schedule: &PeriodicSchedule, t: i64, n: usize) -> Result<Decomposition> {
    let l = schedule.seasons_per_period();
    let spec = BlockSpec::par(schedule, t, n)?;
    let at_t: XiTable = green_functions(schedule, t, l)?;
    let at_t1: XiTable = green_functions(schedule, t - 1, l)?;
    decompose(&spec, t, |f| {
        // by periodicity every block anchor reduces to t or t - 1
        let table = match (t - f.anchor).rem_euclid(l as i64) {
            0 => &at_t,
            1 => &at_t1,
            shift => return Err(Error::domain(format!("unexpected anchor shift {shift}"))),
        };
        Ok(table.get(f.depth))
    })
}

/// `xi_{t,l}` for CAR(2;l;d) as a sum of `2^d` products of per-cycle continuants.
pub fn xi_car_decomposed(schedule: &CyclicalSchedule, t: i64) -> Result<Decomposition> {
    let spec = BlockSpec::car(schedule, t)?;
    decompose_generic(schedule, t, &spec)
}

/// `xi_{t,k}` for ABAR(2;r) as a sum of `2^r` products of per-regime
/// continuants, each from the closed form in the regime's AR roots.
pub fn xi_abar_decomposed(schedule: &BreakSchedule, t: i64, k: usize) -> Result<Decomposition> {
    if t != schedule.anchor || k != schedule.horizon {
        return Err(Error::domain(format!(
            "ABAR decomposition is defined at the schedule's anchor {} and horizon {}, got t = {t}, k = {k}",
            schedule.anchor, schedule.horizon
        )));
    }
    let spec = BlockSpec::abar(schedule)?;
    decompose(&spec, t, |f| {
        let regime = schedule
            .regimes
            .get(f.block)
            .ok_or_else(|| Error::domain("missing regime"))?;
        constant_xi(regime.phi1, regime.phi2, f.depth)
    })
}

/// Explicit block tridiagonal matrix of `spec`, oldest block top-left.
///
/// Diagonal blocks are the per-block continuant matrices; between neighbours
/// there is a single `-1` (last row of the older block, first column of the
/// newer one) and a single coupling (first row of the newer block, last
/// column of the older one).
pub fn assemble_block_matrix<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    spec: &BlockSpec,
) -> Result<DMatrix<f64>> {
    let k = spec.depth;
    check_cap(k)?;
    let full = spec.full_offsets();
    let mut m = DMatrix::zeros(k, k);
    for b in 0..spec.blocks() {
        let size = full[b + 1] - full[b];
        let top = k - full[b + 1];
        let block = FundamentalMatrix::assemble(schedule, t - full[b] as i64, size)?;
        m.view_mut((top, top), (size, size)).copy_from(&block.0);
        if b < spec.boundaries() {
            // `top` is the first row of block b; block b + 1 ends just above it
            m[(top - 1, top)] = -1.0;
            m[(top, top - 1)] = spec.couplings[b];
        }
    }
    Ok(m)
}

pub fn block_matrix_determinant<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    spec: &BlockSpec,
) -> Result<f64> {
    Ok(determinant(&assemble_block_matrix(schedule, t, spec)?))
}

/// Recurrence, decomposition and assembled-determinant values of one `xi_{t,k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeWay {
    pub anchor: i64,
    pub depth: usize,
    pub terms: usize,
    pub recurrence: f64,
    pub decomposed: f64,
    pub block_determinant: f64,
}

impl ThreeWay {
    /// Largest pairwise deviation, scaled by `max(1, |recurrence|)`.
    pub fn max_deviation(&self) -> f64 {
        let scale = self.recurrence.abs().max(1.0);
        let a = (self.decomposed - self.recurrence).abs();
        let b = (self.block_determinant - self.recurrence).abs();
        let c = (self.block_determinant - self.decomposed).abs();
        a.max(b).max(c) / scale
    }
}

fn three_way<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    spec: &BlockSpec,
    d: Decomposition,
) -> Result<ThreeWay> {
    Ok(ThreeWay {
        anchor: t,
        depth: spec.depth,
        terms: d.terms,
        recurrence: xi(schedule, t, spec.depth as isize)?,
        decomposed: d.value,
        block_determinant: block_matrix_determinant(schedule, t, spec)?,
    })
}

pub fn compare_par(schedule: &PeriodicSchedule, t: i64, n: usize) -> Result<ThreeWay> {
    let spec = BlockSpec::par(schedule, t, n)?;
    three_way(schedule, t, &spec, xi_par_decomposed(schedule, t, n)?)
}

pub fn compare_car(schedule: &CyclicalSchedule, t: i64) -> Result<ThreeWay> {
    let spec = BlockSpec::car(schedule, t)?;
    three_way(schedule, t, &spec, xi_car_decomposed(schedule, t)?)
}

pub fn compare_abar(schedule: &BreakSchedule) -> Result<ThreeWay> {
    let spec = BlockSpec::abar(schedule)?;
    three_way(
        schedule,
        schedule.anchor,
        &spec,
        xi_abar_decomposed(schedule, schedule.anchor, schedule.horizon)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::CoefficientTuple;
    use approx::assert_relative_eq;

    #[test]
    fn factor_indices_three_blocks() {
        let spec = BlockSpec::new(BlockKind::Generic, 12, vec![4, 8], vec![0.5, 0.25]).unwrap();
        let t = 100;
        let f = spec.term_factors(t, 0b00);
        assert_eq!(
            f.iter().map(|f| (f.anchor, f.depth)).collect::<Vec<_>>(),
            vec![(100, 4), (96, 4), (92, 4)]
        );
        let f = spec.term_factors(t, 0b01);
        assert_eq!(
            f.iter().map(|f| (f.anchor, f.depth)).collect::<Vec<_>>(),
            vec![(100, 3), (95, 3), (92, 4)]
        );
        let f = spec.term_factors(t, 0b10);
        assert_eq!(
            f.iter().map(|f| (f.anchor, f.depth)).collect::<Vec<_>>(),
            vec![(100, 4), (96, 3), (91, 3)]
        );
        let f = spec.term_factors(t, 0b11);
        assert_eq!(
            f.iter().map(|f| (f.anchor, f.depth)).collect::<Vec<_>>(),
            vec![(100, 3), (95, 2), (91, 3)]
        );
        assert_eq!(spec.coupling_weight(0b11), 0.125);
        assert_eq!(spec.term_count(), 4);
    }

    #[test]
    fn single_block_is_identity() {
        let s = PeriodicSchedule::from_ar(&[0.5, 0.8, -0.3], &[0.2, -0.1, 0.4]).unwrap();
        let d = xi_par_decomposed(&s, 9, 1).unwrap();
        assert_eq!(d.terms, 1);
        assert_relative_eq!(d.value, xi(&s, 9, 3).unwrap(), max_relative = 1e-14);
        let spec = BlockSpec::par(&s, 9, 1).unwrap();
        assert_eq!(
            assemble_block_matrix(&s, 9, &spec).unwrap(),
            FundamentalMatrix::assemble(&s, 9, 3).unwrap().0
        );
    }

    #[test]
    fn par22_two_periods() {
        let s = PeriodicSchedule::from_ar(&[0.5, 0.8], &[0.2, -0.1]).unwrap();
        for t in 0..4 {
            let d = xi_par_decomposed(&s, t, 2).unwrap();
            assert!((d.value - xi(&s, t, 4).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn car_single_cycle() {
        let s = CyclicalSchedule::new(3, vec![], vec![CoefficientTuple::ar(0.7, -0.2)]).unwrap();
        let d = xi_car_decomposed(&s, 6).unwrap();
        assert_eq!(d.terms, 1);
        assert_relative_eq!(d.value, xi(&s, 6, 3).unwrap(), max_relative = 1e-14);
        assert!(matches!(xi_car_decomposed(&s, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn car_zero_coupling_is_product() {
        let s = CyclicalSchedule::new(
            4,
            vec![2],
            vec![
                CoefficientTuple::ar(0.7, -0.2),
                CoefficientTuple::ar(0.4, 0.0),
            ],
        )
        .unwrap();
        // the boundary coupling is phi2 of the newer cycle, which is 0 here
        let t = 8;
        let product = xi(&s, t, 2).unwrap() * xi(&s, t - 2, 2).unwrap();
        assert_relative_eq!(
            xi_car_decomposed(&s, t).unwrap().value,
            product,
            max_relative = 1e-14
        );
        assert_relative_eq!(xi(&s, t, 4).unwrap(), product, max_relative = 1e-12);
    }

    #[test]
    fn abar_no_breaks_is_root_formula() {
        let s = BreakSchedule::new(0, 7, vec![], vec![CoefficientTuple::ar(1.2, -0.32)]).unwrap();
        let d = xi_abar_decomposed(&s, 0, 7).unwrap();
        let expected = (0.8f64.powi(8) - 0.4f64.powi(8)) / 0.4;
        assert_relative_eq!(d.value, expected, max_relative = 1e-12);
        assert!(xi_abar_decomposed(&s, 1, 7).is_err());
    }

    #[test]
    fn abar_one_break() {
        let s = BreakSchedule::new(
            0,
            6,
            vec![3],
            vec![
                CoefficientTuple::ar(1.2, -0.32),
                CoefficientTuple::ar(0.5, 0.2),
            ],
        )
        .unwrap();
        let d = xi_abar_decomposed(&s, 0, 6).unwrap();
        let r = xi(&s, 0, 6).unwrap();
        assert!((d.value - r).abs() <= 1e-12 * r.abs().max(1.0));
        assert_eq!(d.terms, 2);
    }

    #[test]
    fn boundary_validation() {
        assert!(BlockSpec::new(BlockKind::Generic, 5, vec![3, 3], vec![1.0, 1.0]).is_err());
        assert!(BlockSpec::new(BlockKind::Generic, 5, vec![5], vec![1.0]).is_err());
        assert!(BlockSpec::new(BlockKind::Generic, 5, vec![2], vec![]).is_err());
    }

    #[test]
    fn assembly_over_cap() {
        let s = PeriodicSchedule::from_ar(&[0.1; 10], &[0.1; 10]).unwrap();
        let spec = BlockSpec::par(&s, 0, 7).unwrap();
        assert!(assemble_block_matrix(&s, 0, &spec).is_err());
    }
}
