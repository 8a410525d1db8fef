//! Electrical link evaluation: receive voltage, receive and transmit power,
//! and pathloss.
//!
//! Receive coil `n` sees `E_n = jω Σ_k M_{kn} I_k`, i.e. the voltage is
//! `jω Mᵀ I` in the stored `M[tx][rx]` layout. All quadratic forms below use
//! the same convention through [`MutualMatrix::couplings`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnetics::MutualMatrix;

/// Allowed deviation of `Σ s²` from 1.
pub const WEIGHT_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Angular frequency ω, rad/s.
    pub omega: f64,
    /// Transmit coil resistance, Ω.
    pub r_t: f64,
    /// Receive coil impedance at resonance, Ω.
    pub z_r: f64,
    /// Load impedance, Ω.
    pub z_l: f64,
    /// Transmit power budget, W.
    pub p0: f64,
}

impl LinkParams {
    pub fn new(omega: f64, r_t: f64, z_r: f64, z_l: f64, p0: f64) -> Result<Self> {
        let p = Self {
            omega,
            r_t,
            z_r,
            z_l,
            p0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("r_t", self.r_t),
            ("z_r", self.z_r),
            ("z_l", self.z_l),
            ("p0", self.p0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// `Z_L ω² / (Z_r + Z_L)²`.
    pub fn load_gain(&self) -> f64 {
        let z = self.z_r + self.z_l;
        self.z_l * self.omega * self.omega / (z * z)
    }

    /// `P₀ / R_t`, the squared current norm the power budget allows.
    pub fn current_norm_squared(&self) -> f64 {
        self.p0 / self.r_t
    }
}

/// Transmit current amplitudes, A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveVector(pub [f64; 3]);

impl DriveVector {
    pub fn new(amps: [f64; 3]) -> Result<Self> {
        if amps.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("drive currents must be finite"));
        }
        Ok(Self(amps))
    }

    /// Same amplitude on every transmit coil.
    pub fn uniform(amplitude: f64) -> Self {
        Self([amplitude; 3])
    }

    pub fn amps(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.map(|v| v * k))
    }
}

/// Receive combining weights, the diagonal of `S`. `Σ s² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinerWeights([f64; 3]);

impl CombinerWeights {
    pub fn new(weights: [f64; 3]) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("receive weights must be finite"));
        }
        let sum: f64 = weights.iter().map(|v| v * v).sum();
        if (sum - 1.0).abs() > WEIGHT_NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "receive weights must have unit square-sum, got {sum}"
            )));
        }
        Ok(Self(weights))
    }

    /// `1/√3` on every receive coil.
    pub fn equal() -> Self {
        Self([1.0 / 3f64.sqrt(); 3])
    }

    /// Scales `raw` to unit square-sum. Fails on a zero or non-finite input.
    pub fn normalized(raw: [f64; 3]) -> Result<Self> {
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("cannot normalise a zero weight vector"));
        }
        Self::new(raw.map(|v| v / norm))
    }

    pub fn weights(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn square_sum(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

/// Per-coil receive voltage `E_n = jω Σ_k M_{kn} I_k`, V.
pub fn receive_voltage(m: &MutualMatrix, i: &DriveVector, omega: f64) -> [Complex64; 3] {
    m.couplings(i.amps())
        .map(|a| Complex64::new(0.0, omega * a))
}

/// `Σ_n s_n² (m_n·I)²`, the combined-signal quadratic form (H²A²).
pub fn combined_gain(m: &MutualMatrix, i: &DriveVector, s: &CombinerWeights) -> f64 {
    m.couplings(i.amps())
        .iter()
        .zip(s.weights())
        .map(|(a, w)| w * w * a * a)
        .sum()
}

/// Receive power, W. Always non-negative.
pub fn receive_power(
    m: &MutualMatrix,
    i: &DriveVector,
    s: &CombinerWeights,
    p: &LinkParams,
) -> f64 {
    let z = p.z_r + p.z_l;
    p.z_l * p.omega * p.omega / (z * z) * combined_gain(m, i, s)
}

/// `R_t ‖I‖²`, W.
pub fn transmit_power(i: &DriveVector, r_t: f64) -> f64 {
    r_t * i.norm_squared()
}

/// Pathloss in dB; larger is worse. Returns `+∞` when nothing is received.
pub fn pathloss_db(
    m: &MutualMatrix,
    i: &DriveVector,
    s: &CombinerWeights,
    p: &LinkParams,
) -> Result<f64> {
    let pt = transmit_power(i, p.r_t);
    if !(pt > 0.0) {
        return Err(Error::invalid("pathloss needs a non-zero drive current"));
    }
    let efficiency = combined_gain(m, i, s) / pt * p.load_gain();
    if efficiency <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * efficiency.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params() -> LinkParams {
        let rt = 0.01 * 2.0 * PI * 0.1 * 10.0;
        LinkParams::new(2.0 * PI * 1e7, rt, rt, rt, 12.0 * rt).unwrap()
    }

    fn sample_matrix() -> MutualMatrix {
        MutualMatrix::new([
            [1.2e-9, -0.4e-9, 0.3e-9],
            [0.5e-9, 0.9e-9, -0.7e-9],
            [-0.2e-9, 0.6e-9, 1.1e-9],
        ])
        .unwrap()
    }

    #[test]
    fn zero_matrix_gives_zero_voltage() {
        let e = receive_voltage(&MutualMatrix::default(), &DriveVector::uniform(2.0), 1e6);
        assert!(e.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_path_voltage() {
        let mut m = [[0.0; 3]; 3];
        m[0][0] = 1e-6;
        let e = receive_voltage(
            &MutualMatrix(m),
            &DriveVector([1.0, 0.0, 0.0]),
            2.0 * PI * 1e6,
        );
        assert!((e[0].norm() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(e[0].re, 0.0);
        assert_eq!(e[1].norm() + e[2].norm(), 0.0);
    }

    #[test]
    fn voltage_matches_elementwise_sum() {
        let m = sample_matrix();
        let i = DriveVector([0.3, -1.1, 2.0]);
        let w = 1e6;
        let e = receive_voltage(&m, &i, w);
        for n in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += m.0[k][n] * i.0[k];
            }
            assert!((e[n].im - w * acc).abs() <= 1e-12 * (w * acc).abs());
        }
    }

    #[test]
    fn power_expansion() {
        let m = sample_matrix();
        let i = DriveVector([0.3, -1.1, 2.0]);
        let s = CombinerWeights::normalized([0.2, 0.5, 0.9]).unwrap();
        let p = params();
        let e = receive_voltage(&m, &i, p.omega);
        let direct: f64 = (0..3)
            .map(|n| s.0[n] * s.0[n] * e[n].norm_sqr())
            .sum::<f64>()
            * p.z_l
            / ((p.z_r + p.z_l) * (p.z_r + p.z_l));
        let got = receive_power(&m, &i, &s, &p);
        assert!((got - direct).abs() <= 1e-12 * direct);
        assert!((receive_power(&m, &i.scaled(2.0), &s, &p) - 4.0 * got).abs() <= 1e-12 * got);
    }

    #[test]
    fn orthogonal_row_receives_nothing() {
        let mut m = [[0.0; 3]; 3];
        m[1][0] = 1e-9;
        let m = MutualMatrix(m);
        let s = CombinerWeights::new([1.0, 0.0, 0.0]).unwrap();
        let i = DriveVector([1.0, 0.0, 0.0]);
        assert_eq!(receive_power(&m, &i, &s, &params()), 0.0);
        assert_eq!(pathloss_db(&m, &i, &s, &params()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(CombinerWeights::new([0.0; 3]).is_err());
        assert!(CombinerWeights::normalized([0.0; 3]).is_err());
        assert!(CombinerWeights::new([1.0, 1e-5, 0.0]).is_err());
    }

    #[test]
    fn transmit_power_literal() {
        let rt = 0.06283;
        assert!((transmit_power(&DriveVector::uniform(2.0), rt) - 0.75396).abs() < 1e-12);
        assert_eq!(transmit_power(&DriveVector::uniform(0.0), rt), 0.0);
        let i = DriveVector([0.4, -0.3, 1.7]);
        assert!((transmit_power(&i.scaled(3.0), rt) - 9.0 * transmit_power(&i, rt)).abs() < 1e-14);
    }

    #[test]
    fn pathloss_log_identity() {
        // choose M and gain so the efficiency product is 0.1
        let p = LinkParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.load_gain(), 0.25);
        let mut m = [[0.0; 3]; 3];
        m[0][0] = (0.4f64).sqrt();
        let l = pathloss_db(
            &MutualMatrix(m),
            &DriveVector([1.0, 0.0, 0.0]),
            &CombinerWeights::new([1.0, 0.0, 0.0]).unwrap(),
            &p,
        )
        .unwrap();
        assert!((l - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_current_is_invalid() {
        let r = pathloss_db(
            &sample_matrix(),
            &DriveVector::uniform(0.0),
            &CombinerWeights::equal(),
            &params(),
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn link_params_validation() {
        assert!(LinkParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(LinkParams::new(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(matches!(
            LinkParams::new(1.0, 1.0, 1.0, 1.0, f64::NAN),
            Err(Error::Validation { field, .. }) if field == "p0"
        ));
    }

    fn drive() -> impl Strategy<Value = DriveVector> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
            .prop_filter("nonzero", |v| v.0.abs() + v.1.abs() + v.2.abs() > 1e-3)
            .prop_map(|v| DriveVector([v.0, v.1, v.2]))
    }

    fn weights() -> impl Strategy<Value = CombinerWeights> {
        (0.01..1.0f64, 0.01..1.0f64, 0.01..1.0f64)
            .prop_map(|v| CombinerWeights::normalized([v.0, v.1, v.2]).unwrap())
    }

    proptest! {
        #[test]
        fn pathloss_scale_invariant(i in drive(), s in weights(), k in prop_oneof![-50.0..-0.01f64, 0.01..50.0f64]) {
            let m = sample_matrix();
            let a = pathloss_db(&m, &i, &s, &params()).unwrap();
            let b = pathloss_db(&m, &i.scaled(k), &s, &params()).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn receive_power_non_negative(i in drive(), s in weights()) {
            prop_assert!(receive_power(&sample_matrix(), &i, &s, &params()) >= 0.0);
        }

        #[test]
        fn pathloss_difference_is_constant_free(i in drive(), j in drive(), s in weights(), t in weights(), scale in 0.1..100.0f64) {
            let m = sample_matrix();
            let p = params();
            let q = LinkParams { omega: p.omega * scale, ..p };
            let d1 = pathloss_db(&m, &i, &s, &p).unwrap() - pathloss_db(&m, &j, &t, &p).unwrap();
            let d2 = pathloss_db(&m, &i, &s, &q).unwrap() - pathloss_db(&m, &j, &t, &q).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9);
        }

        #[test]
        fn transmit_power_is_rt_norm(i in drive(), rt in 0.001..10.0f64) {
            prop_assert_eq!(transmit_power(&i, rt), rt * i.norm_squared());
        }
    }
}
