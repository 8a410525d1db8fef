//! Strategy comparison, convergence-threshold sweep and receiver-angle sweep.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{pathloss_db, CombinerWeights, DriveVector, LinkParams};
use crate::error::{Error, Result};
use crate::geometry::{receiver_pose_from_alpha, FrameMode, SweepAngle, TriadPose, Vec3};
use crate::magnetics::{coil_resistance, mutual_matrix, CoilSpec, FormulaMode, MutualMatrix};
use crate::optimizer::{
    alternate, optimal_current, optimal_weights, OptimizationTrace, DEFAULT_MAX_ITER,
};

/// Default angular frequency, rad/s (10 MHz).
pub const DEFAULT_OMEGA: f64 = 2.0 * PI * 1e7;
pub const DEFAULT_DELTA: f64 = 2.5e-2;
pub const DEFAULT_CURRENT_AMPLITUDE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub tx: CoilSpec,
    pub rx: CoilSpec,
    pub tx_pose: TriadPose,
    pub rx_center: Vec3,
    pub link: LinkParams,
    /// Per-coil amplitude of the equal-allocation baseline, A.
    pub current_amplitude: f64,
    pub frame_mode: FrameMode,
    pub formula_mode: FormulaMode,
    pub max_iter: usize,
}

impl Scenario {
    /// Ten-turn 0.1 m coils with 0.01 Ω/m wire, receiver at (1, 1, 1.5) m and
    /// a 2 A baseline amplitude. The receive side is a matched resistive load
    /// (`Z_r = Z_L = R`) and the budget is `P₀ = 3 I_m² R_t`.
    pub fn reference() -> Self {
        let coil = CoilSpec {
            turns: 10,
            radius: 0.1,
            wire_resistance_per_meter: 0.01,
        };
        Self::with_coils(
            coil,
            coil,
            Vec3::new(1.0, 1.0, 1.5),
            DEFAULT_CURRENT_AMPLITUDE,
            DEFAULT_OMEGA,
        )
        .expect("default scenario is valid")
    }

    /// Scenario with derived electrical parameters.
    pub fn with_coils(
        tx: CoilSpec,
        rx: CoilSpec,
        rx_center: Vec3,
        current_amplitude: f64,
        omega: f64,
    ) -> Result<Self> {
        tx.validate()?;
        rx.validate()?;
        let r_t = coil_resistance(&tx);
        let r_r = coil_resistance(&rx);
        let p0 = 3.0 * current_amplitude * current_amplitude * r_t;
        let link = LinkParams::new(omega, r_t, r_r, r_r, p0)?;
        let scn = Self {
            tx,
            rx,
            tx_pose: TriadPose::axis_aligned_transmitter(Vec3::ZERO),
            rx_center,
            link,
            current_amplitude,
            frame_mode: FrameMode::Orthonormal,
            formula_mode: FormulaMode::Canonical,
            max_iter: DEFAULT_MAX_ITER,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        self.link.validate()?;
        if !(self.current_amplitude.is_finite() && self.current_amplitude > 0.0) {
            return Err(Error::validation("current_amplitude", "must be positive"));
        }
        if !self.rx_center.is_finite() || (self.rx_center - self.tx_pose.center).norm() == 0.0 {
            return Err(Error::validation(
                "rx_center",
                "must be finite and distinct from the transmitter",
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub fn receiver_pose(&self, alpha: SweepAngle) -> TriadPose {
        receiver_pose_from_alpha(alpha, self.frame_mode).at(self.rx_center)
    }

    pub fn mutual_at(&self, alpha: SweepAngle) -> Result<MutualMatrix> {
        mutual_matrix(
            &self.tx_pose,
            &self.receiver_pose(alpha),
            &self.tx,
            &self.rx,
            self.formula_mode,
        )
    }

    pub fn equal_current(&self) -> DriveVector {
        DriveVector::uniform(self.current_amplitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Alternating current and weight optimization.
    Joint,
    /// Optimal current, equal weights.
    TxOnly,
    /// Equal current, optimal weights.
    RxOnly,
    /// Equal current and equal weights.
    Equal,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Joint,
        Strategy::TxOnly,
        Strategy::RxOnly,
        Strategy::Equal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Joint => "joint",
            Strategy::TxOnly => "tx-only",
            Strategy::RxOnly => "rx-only",
            Strategy::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub pathloss_db: f64,
    pub current: DriveVector,
    pub weights: CombinerWeights,
    /// Alternating-loop trace; only present for [`Strategy::Joint`].
    pub trace: Option<OptimizationTrace>,
}

impl StrategyOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.as_ref().map_or(0, |t| t.iterations())
    }

    pub fn converged(&self) -> bool {
        self.trace.as_ref().map_or(true, |t| t.converged)
    }
}

fn outcome_for(
    m: &MutualMatrix,
    link: &LinkParams,
    scn: &Scenario,
    strategy: Strategy,
    delta: f64,
) -> Result<StrategyOutcome> {
    let equal_s = CombinerWeights::equal();
    let equal_i = scn.equal_current();
    let (current, weights, trace) = match strategy {
        Strategy::Equal => (equal_i, equal_s, None),
        Strategy::TxOnly => (optimal_current(m, &equal_s, link)?, equal_s, None),
        Strategy::RxOnly => (equal_i, optimal_weights(m, &equal_i)?, None),
        Strategy::Joint => {
            let trace = alternate(m, link, &equal_s, delta, scn.max_iter)?;
            let best = *trace.best();
            (best.current, best.weights, Some(trace))
        }
    };
    Ok(StrategyOutcome {
        strategy,
        pathloss_db: pathloss_db(m, &current, &weights, link)?,
        current,
        weights,
        trace,
    })
}

/// Evaluates one strategy at one receiver angle.
///
/// The joint result is the lowest-pathloss round of the alternating trace.
pub fn run_strategy(
    scn: &Scenario,
    alpha: SweepAngle,
    strategy: Strategy,
    delta: f64,
) -> Result<StrategyOutcome> {
    let m = scn.mutual_at(alpha)?;
    outcome_for(&m, &scn.link, scn, strategy, delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub joint_db: f64,
    pub txonly_db: f64,
    pub rxonly_db: f64,
    pub equal_db: f64,
    pub iterations: usize,
    pub converged: bool,
    pub joint_trace: OptimizationTrace,
    pub txonly_current: DriveVector,
}

impl SweepRecord {
    pub fn pathloss(&self, strategy: Strategy) -> f64 {
        match strategy {
            Strategy::Joint => self.joint_db,
            Strategy::TxOnly => self.txonly_db,
            Strategy::RxOnly => self.rxonly_db,
            Strategy::Equal => self.equal_db,
        }
    }

    /// Max − min pathloss across the three optimizing strategies.
    pub fn optimizer_spread(&self) -> f64 {
        let v = [self.joint_db, self.txonly_db, self.rxonly_db];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Relative pathloss reduction of the joint strategy, percent of the
    /// equal-allocation pathloss in dB.
    pub fn reduction_pct(&self) -> f64 {
        100.0 * (self.equal_db - self.joint_db) / self.equal_db
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub delta: f64,
    pub records: Vec<SweepRecord>,
}

fn sweep_record(scn: &Scenario, alpha: SweepAngle, delta: f64) -> Result<SweepRecord> {
    let m = scn.mutual_at(alpha)?;
    let joint = outcome_for(&m, &scn.link, scn, Strategy::Joint, delta)?;
    let tx = outcome_for(&m, &scn.link, scn, Strategy::TxOnly, delta)?;
    let rx = outcome_for(&m, &scn.link, scn, Strategy::RxOnly, delta)?;
    let eq = outcome_for(&m, &scn.link, scn, Strategy::Equal, delta)?;
    let iterations = joint.iterations();
    let converged = joint.converged();
    Ok(SweepRecord {
        alpha: alpha.radians(),
        joint_db: joint.pathloss_db,
        txonly_db: tx.pathloss_db,
        rxonly_db: rx.pathloss_db,
        equal_db: eq.pathloss_db,
        iterations,
        converged,
        joint_trace: joint.trace.expect("joint outcome carries a trace"),
        txonly_current: tx.current,
    })
}

/// All four strategies at every grid angle, in grid order.
pub fn angle_sweep(scn: &Scenario, grid: &[SweepAngle], delta: f64) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::invalid("angle grid is empty"));
    }
    let records = grid
        .par_iter()
        .map(|a| sweep_record(scn, *a, delta))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { delta, records })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub delta: f64,
    pub mean_reduction_pct: f64,
    pub mean_iterations: f64,
}

/// Joint-strategy reduction and iteration count for each threshold,
/// averaged over the angle grid.
pub fn threshold_sweep(
    scn: &Scenario,
    deltas: &[f64],
    grid: &[SweepAngle],
) -> Result<Vec<ThresholdPoint>> {
    if grid.is_empty() {
        return Err(Error::invalid("angle grid is empty"));
    }
    if deltas.is_empty() {
        return Err(Error::invalid("threshold list is empty"));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid("thresholds must be positive"));
    }
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("thresholds must be sorted ascending"));
    }
    let matrices = grid
        .par_iter()
        .map(|a| scn.mutual_at(*a))
        .collect::<Result<Vec<_>>>()?;
    let equal = matrices
        .par_iter()
        .map(|m| outcome_for(m, &scn.link, scn, Strategy::Equal, 1.0).map(|o| o.pathloss_db))
        .collect::<Result<Vec<_>>>()?;
    deltas
        .iter()
        .map(|&delta| {
            let joint = matrices
                .par_iter()
                .map(|m| outcome_for(m, &scn.link, scn, Strategy::Joint, delta))
                .collect::<Result<Vec<_>>>()?;
            let n = joint.len() as f64;
            let mean_reduction_pct = joint
                .iter()
                .zip(&equal)
                .map(|(j, eq)| 100.0 * (eq - j.pathloss_db) / eq)
                .sum::<f64>()
                / n;
            let mean_iterations = joint.iter().map(|j| j.iterations() as f64).sum::<f64>() / n;
            Ok(ThresholdPoint {
                delta,
                mean_reduction_pct,
                mean_iterations,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `max − min`
    pub fluctuation: f64,
}

impl StrategyStats {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        Self {
            mean: sum / n as f64,
            min,
            max,
            fluctuation: max - min,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub joint: StrategyStats,
    pub tx_only: StrategyStats,
    pub rx_only: StrategyStats,
    pub equal: StrategyStats,
    pub mean_reduction_pct: f64,
    pub mean_iterations: f64,
    pub all_converged: bool,
}

impl SweepSummary {
    pub fn stats(&self, strategy: Strategy) -> &StrategyStats {
        match strategy {
            Strategy::Joint => &self.joint,
            Strategy::TxOnly => &self.tx_only,
            Strategy::RxOnly => &self.rx_only,
            Strategy::Equal => &self.equal,
        }
    }
}

pub fn summary_stats(results: &SweepResult) -> Result<SweepSummary> {
    let r = &results.records;
    if r.is_empty() {
        return Err(Error::invalid("sweep result is empty"));
    }
    let n = r.len() as f64;
    Ok(SweepSummary {
        joint: StrategyStats::from_values(r.iter().map(|x| x.joint_db)),
        tx_only: StrategyStats::from_values(r.iter().map(|x| x.txonly_db)),
        rx_only: StrategyStats::from_values(r.iter().map(|x| x.rxonly_db)),
        equal: StrategyStats::from_values(r.iter().map(|x| x.equal_db)),
        mean_reduction_pct: r.iter().map(|x| x.reduction_pct()).sum::<f64>() / n,
        mean_iterations: r.iter().map(|x| x.iterations as f64).sum::<f64>() / n,
        all_converged: r.iter().all(|x| x.converged),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::alpha_grid;

    fn angle(a: f64) -> SweepAngle {
        SweepAngle::new(a).unwrap()
    }

    #[test]
    fn default_scenario_parameters() {
        let s = Scenario::reference();
        assert!((s.link.r_t - 0.0628318530717958).abs() < 1e-15);
        assert!((s.link.p0 - 12.0 * s.link.r_t).abs() < 1e-15);
        assert_eq!(s.equal_current().norm_squared() * s.link.r_t, s.link.p0);
    }

    #[test]
    fn equal_strategy_is_direct_evaluation() {
        let scn = Scenario::reference();
        let o = run_strategy(&scn, angle(1.0), Strategy::Equal, DEFAULT_DELTA).unwrap();
        let m = scn.mutual_at(angle(1.0)).unwrap();
        let direct = pathloss_db(
            &m,
            &DriveVector::uniform(2.0),
            &CombinerWeights::equal(),
            &scn.link,
        )
        .unwrap();
        assert_eq!(o.pathloss_db, direct);
        assert_eq!(o.iterations(), 0);
    }

    #[test]
    fn single_angle_summary() {
        let scn = Scenario::reference();
        let res = angle_sweep(&scn, &[angle(0.3)], DEFAULT_DELTA).unwrap();
        let s = summary_stats(&res).unwrap();
        assert_eq!(s.joint.mean, res.records[0].joint_db);
        assert_eq!(s.equal.mean, res.records[0].equal_db);
        assert_eq!(s.joint.fluctuation, 0.0);
        assert_eq!(s.mean_iterations, res.records[0].iterations as f64);
    }

    #[test]
    fn constant_input_has_no_fluctuation() {
        let scn = Scenario::reference();
        let rec = angle_sweep(&scn, &[angle(0.3)], DEFAULT_DELTA)
            .unwrap()
            .records
            .remove(0);
        let res = SweepResult {
            delta: DEFAULT_DELTA,
            records: vec![rec.clone(), rec.clone(), rec],
        };
        let s = summary_stats(&res).unwrap();
        for st in Strategy::ALL {
            assert_eq!(s.stats(st).fluctuation, 0.0);
        }
        assert!(summary_stats(&SweepResult {
            delta: 1.0,
            records: vec![]
        })
        .is_err());
    }

    #[test]
    fn sweep_preserves_grid_order() {
        let scn = Scenario::reference();
        let grid = alpha_grid(24).unwrap();
        let res = angle_sweep(&scn, &grid, DEFAULT_DELTA).unwrap();
        for (r, a) in res.records.iter().zip(&grid) {
            assert_eq!(r.alpha, a.radians());
        }
        assert!(angle_sweep(&scn, &[], DEFAULT_DELTA).is_err());
    }

    #[test]
    fn threshold_sweep_rejects_bad_deltas() {
        let scn = Scenario::reference();
        let grid = alpha_grid(4).unwrap();
        assert!(threshold_sweep(&scn, &[0.1, 0.01], &grid).is_err());
        assert!(threshold_sweep(&scn, &[-0.1], &grid).is_err());
        assert!(threshold_sweep(&scn, &[], &grid).is_err());
    }

    #[test]
    fn huge_threshold_stops_after_two_rounds() {
        let scn = Scenario::reference();
        let grid = alpha_grid(12).unwrap();
        let pts = threshold_sweep(&scn, &[1e300], &grid).unwrap();
        assert_eq!(pts[0].mean_iterations, 2.0);
    }
}
