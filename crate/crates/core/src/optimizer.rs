//! Closed-form transmit and receive updates and the alternating loop.
//!
//! For fixed receive weights the combined gain `IᵀQI / IᵀI` with
//! `Q = Σ_n s_n² m_n m_nᵀ` is a Rayleigh quotient, maximised by the top
//! eigenvector of `Q` scaled onto the power budget. For a fixed drive the
//! weights are set proportional to the per-coil coupling magnitudes
//! `|m_n·I|`. [`alternate`] repeats the two updates until the pathloss change
//! between rounds drops to the threshold.

use crate::circuit::{pathloss_db, CombinerWeights, DriveVector, LinkParams};
use crate::eigen::{apply_sign_convention, symmetric_eig3, EigenPair, Mat3, SYMMETRY_TOLERANCE};
use crate::error::{Error, Result};
use crate::magnetics::MutualMatrix;

/// Relative eigenvalue gap below which top eigenvalues count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_MAX_ITER: usize = 100;

/// Symmetric positive-semidefinite quadratic form `Q = Σ_n s_n² m_n m_nᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QForm(Mat3);

impl QForm {
    pub fn new(matrix: Mat3) -> Result<Self> {
        let scale = matrix.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (matrix[i][j] - matrix[j][i]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::invalid("quadratic form must be symmetric"));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_coupling(m: &MutualMatrix, s: &CombinerWeights) -> Self {
        let w = s.weights();
        let mut q = [[0.0; 3]; 3];
        for n in 0..3 {
            let row = m.coupling_row(n);
            let w2 = w[n] * w[n];
            for i in 0..3 {
                for j in 0..3 {
                    q[i][j] += w2 * row[i] * row[j];
                }
            }
        }
        Self(q)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// `vᵀQv / vᵀv`.
    pub fn rayleigh(&self, v: &[f64; 3]) -> f64 {
        let qv = crate::eigen::mat_vec(&self.0, v);
        let num: f64 = (0..3).map(|k| v[k] * qv[k]).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        num / den
    }

    pub fn eigen(&self) -> Result<[EigenPair; 3]> {
        symmetric_eig3(&self.0)
    }
}

/// Picks the direction inside a tied top eigenspace that maximises the
/// unweighted coupling `‖A v‖²`.
fn break_tie(basis: &[[f64; 3]], gram: &Mat3) -> Result<[f64; 3]> {
    let k = basis.len();
    let mut h = [[0.0; 3]; 3];
    for a in 0..k {
        let ga = crate::eigen::mat_vec(gram, &basis[a]);
        for b in 0..k {
            h[b][a] = (0..3).map(|t| basis[b][t] * ga[t]).sum();
        }
    }
    // restore exact symmetry lost to rounding
    for a in 0..3 {
        for b in (a + 1)..3 {
            let avg = 0.5 * (h[a][b] + h[b][a]);
            h[a][b] = avg;
            h[b][a] = avg;
        }
    }
    let top = symmetric_eig3(&h)?[0].vector;
    let mut v = [0.0; 3];
    for a in 0..k {
        for t in 0..3 {
            v[t] += top[a] * basis[a][t];
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return Ok(basis[0]);
    }
    Ok(apply_sign_convention(v.map(|x| x / n)))
}

/// Unit current direction maximising the Rayleigh quotient for fixed
/// weights, together with the maximal quotient value.
pub fn optimal_direction(m: &MutualMatrix, s: &CombinerWeights) -> Result<([f64; 3], f64)> {
    let q = QForm::from_coupling(m, s);
    let pairs = q.eigen()?;
    let top = pairs[0].value;
    if !(top > 0.0) {
        return Err(Error::NoCoupling);
    }
    let tied: Vec<[f64; 3]> = pairs
        .iter()
        .filter(|p| p.value >= top * (1.0 - TIE_TOLERANCE))
        .map(|p| p.vector)
        .collect();
    let v = if tied.len() > 1 {
        break_tie(&tied, &m.coupling_gram())?
    } else {
        pairs[0].vector
    };
    Ok((v, q.rayleigh(&v)))
}

/// Transmit currents maximising the combined gain for fixed weights,
/// scaled so that `‖I‖² = P₀ / R_t`.
pub fn optimal_current(
    m: &MutualMatrix,
    s: &CombinerWeights,
    p: &LinkParams,
) -> Result<DriveVector> {
    let (v, _) = optimal_direction(m, s)?;
    let amp = p.current_norm_squared().sqrt();
    DriveVector::new(v.map(|x| x * amp))
}

/// Receive weights proportional to `|m_n·I|`.
pub fn optimal_weights(m: &MutualMatrix, i: &DriveVector) -> Result<CombinerWeights> {
    let a = m.couplings(i.amps());
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::NoCoupling);
    }
    CombinerWeights::new(a.map(|x| x.abs() / norm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// 1-based round number.
    pub iteration: usize,
    pub current: DriveVector,
    pub weights: CombinerWeights,
    pub pathloss_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    pub delta: f64,
}

impl OptimizationTrace {
    pub fn iterations(&self) -> usize {
        self.entries.len()
    }

    pub fn last(&self) -> &TraceEntry {
        self.entries.last().expect("trace holds at least one round")
    }

    /// Round with the lowest pathloss; the earliest wins ties.
    pub fn best(&self) -> &TraceEntry {
        self.entries
            .iter()
            .reduce(|best, e| {
                if e.pathloss_db < best.pathloss_db {
                    e
                } else {
                    best
                }
            })
            .expect("trace holds at least one round")
    }

    /// Whether the pathloss never increased from one round to the next.
    pub fn is_monotone(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[1].pathloss_db <= w[0].pathloss_db)
    }
}

/// Alternates the current and weight updates starting from `s0`.
///
/// Each round computes the optimal current for the current weights, then the
/// optimal weights for that current, and records the resulting pathloss. The
/// loop stops once two consecutive rounds differ by at most `delta` dB, or
/// after `max_iter` rounds with `converged = false`.
pub fn alternate(
    m: &MutualMatrix,
    p: &LinkParams,
    s0: &CombinerWeights,
    delta: f64,
    max_iter: usize,
) -> Result<OptimizationTrace> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "convergence threshold must be positive, got {delta}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let mut weights = *s0;
    let mut entries: Vec<TraceEntry> = Vec::new();
    let mut converged = false;
    for iteration in 1..=max_iter {
        let current = optimal_current(m, &weights, p)?;
        weights = optimal_weights(m, &current)?;
        let loss = pathloss_db(m, &current, &weights, p)?;
        let prev = entries.last().map(|e| e.pathloss_db);
        entries.push(TraceEntry {
            iteration,
            current,
            weights,
            pathloss_db: loss,
        });
        if let Some(prev) = prev {
            if (loss - prev).abs() <= delta {
                converged = true;
                break;
            }
        }
    }
    Ok(OptimizationTrace {
        entries,
        converged,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Scenario;
    use crate::geometry::SweepAngle;

    fn diag_scenario() -> (MutualMatrix, CombinerWeights) {
        // equal weights give Q = diag(3, 2, 1)
        let m = MutualMatrix::new([
            [3.0, 0.0, 0.0],
            [0.0, 6f64.sqrt(), 0.0],
            [0.0, 0.0, 3f64.sqrt()],
        ])
        .unwrap();
        (m, CombinerWeights::equal())
    }

    fn unit_params() -> LinkParams {
        LinkParams::new(1.0, 1.0, 1.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn qform_from_coupling_matches_diag() {
        let (m, s) = diag_scenario();
        let q = QForm::from_coupling(&m, &s);
        let expect = [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((q.matrix()[i][j] - expect[i][j]).abs() < 1e-14);
            }
        }
        assert!(QForm::new([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn current_on_top_axis() {
        let (m, s) = diag_scenario();
        let i = optimal_current(&m, &s, &unit_params()).unwrap();
        assert!((i.0[0] - 2.0).abs() < 1e-14);
        assert!(i.0[1].abs() < 1e-14 && i.0[2].abs() < 1e-14);
    }

    #[test]
    fn tie_breaks_on_unweighted_coupling() {
        // weights (1, 1, 0)/√2 tie the first two axes; the unweighted
        // coupling favours axis 2 through the third receive coil
        let m = MutualMatrix::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.0, 0.0]]).unwrap();
        let s = CombinerWeights::normalized([1.0, 1.0, 0.0]).unwrap();
        let (v, _) = optimal_direction(&m, &s).unwrap();
        assert!((v[1] - 1.0).abs() < 1e-12, "{v:?}");
        let again = optimal_direction(&m, &s).unwrap().0;
        assert_eq!(v, again);
    }

    #[test]
    fn equal_spectrum_is_deterministic() {
        let m = MutualMatrix::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let s = CombinerWeights::equal();
        let a = optimal_current(&m, &s, &unit_params()).unwrap();
        let b = optimal_current(&m, &s, &unit_params()).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_squared() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn no_coupling_errors() {
        let m = MutualMatrix::default();
        assert!(matches!(
            optimal_current(&m, &CombinerWeights::equal(), &unit_params()),
            Err(Error::NoCoupling)
        ));
        assert!(matches!(
            optimal_weights(&m, &DriveVector::uniform(1.0)),
            Err(Error::NoCoupling)
        ));
    }

    #[test]
    fn weights_follow_coupling_magnitudes() {
        let m = MutualMatrix::new([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let s = optimal_weights(&m, &DriveVector([1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.weights(), &[1.0, 0.0, 0.0]);

        let m = MutualMatrix::new([[1.0, -1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let s = optimal_weights(&m, &DriveVector([1.0, 0.0, 0.0])).unwrap();
        for w in s.weights() {
            assert!((w - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_update_is_idempotent() {
        let scn = Scenario::reference();
        let m = scn.mutual_at(SweepAngle::new(1.0).unwrap()).unwrap();
        let i = DriveVector([0.4, -1.3, 2.9]);
        let a = optimal_weights(&m, &i).unwrap();
        let b = optimal_weights(&m, &i).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infinite_threshold_stops_at_second_round() {
        let scn = Scenario::reference();
        let m = scn.mutual_at(SweepAngle::new(1.0).unwrap()).unwrap();
        let t = alternate(&m, &scn.link, &CombinerWeights::equal(), f64::INFINITY, 100).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations(), 2);
    }

    #[test]
    fn non_convergence_is_reported() {
        let scn = Scenario::reference();
        let m = scn.mutual_at(SweepAngle::new(1.0).unwrap()).unwrap();
        let t = alternate(&m, &scn.link, &CombinerWeights::equal(), 1e-300, 3).unwrap();
        assert!(!t.converged);
        assert_eq!(t.iterations(), 3);
        assert!(alternate(&m, &scn.link, &CombinerWeights::equal(), 0.0, 3).is_err());
        assert!(alternate(&m, &scn.link, &CombinerWeights::equal(), 0.1, 0).is_err());
    }

    #[test]
    fn fixed_point_restart() {
        let scn = Scenario::reference();
        let m = scn.mutual_at(SweepAngle::new(1.0).unwrap()).unwrap();
        let first = alternate(&m, &scn.link, &CombinerWeights::equal(), 1e-13, 10_000).unwrap();
        assert!(first.converged);
        let fixed = first.last();
        let second = alternate(&m, &scn.link, &fixed.weights, 1e-6, 100).unwrap();
        assert!(second.iterations() <= 2);
        assert!((second.last().pathloss_db - fixed.pathloss_db).abs() < 1e-9);
    }

    #[test]
    fn converged_trace_meets_threshold() {
        let scn = Scenario::reference();
        let m = scn
            .mutual_at(SweepAngle::new(std::f64::consts::PI).unwrap())
            .unwrap();
        let t = alternate(&m, &scn.link, &CombinerWeights::equal(), 2.5e-2, 100).unwrap();
        assert!(t.converged);
        let n = t.entries.len();
        assert!((t.entries[n - 1].pathloss_db - t.entries[n - 2].pathloss_db).abs() <= 2.5e-2);
        for e in &t.entries {
            let p = e.current.norm_squared() * scn.link.r_t;
            assert!((p - scn.link.p0).abs() <= 1e-9 * scn.link.p0);
            assert!((e.weights.square_sum() - 1.0).abs() <= 1e-12);
        }
    }
}
