//! Vectors, coil-triad poses and the receiver orientation sweep.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this norm the Gram-Schmidt residual of the second receiver axis is
/// treated as zero and the canonical basis is returned.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Residual above which an orthonormal-mode pose fails validation.
pub const POSE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction. The zero vector is returned as-is.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// How the receiver triad is built from the sweep angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameMode {
    /// Second axis is Gram-Schmidt-orthogonalised against the first, giving a
    /// right-handed orthonormal triad.
    #[default]
    Orthonormal,
    /// Second axis is the normalised difference vector as printed, without
    /// orthogonalisation. The resulting triad is generally not orthogonal.
    #[serde(alias = "paper")]
    PaperLiteral,
}

impl std::str::FromStr for FrameMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthonormal" => Ok(FrameMode::Orthonormal),
            "paper" | "paper-literal" => Ok(FrameMode::PaperLiteral),
            other => Err(Error::invalid(format!("unknown frame mode `{other}`"))),
        }
    }
}

/// Receiver rotation angle, wrapped into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SweepAngle(f64);

impl SweepAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid(format!(
                "sweep angle must be finite, got {alpha}"
            )));
        }
        let wrapped = alpha.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Ok(Self(if wrapped >= TAU { 0.0 } else { wrapped }))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Center and coil normals of one tri-directional coil antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadPose {
    pub center: Vec3,
    pub normals: [Vec3; 3],
}

impl TriadPose {
    pub fn new(center: Vec3, normals: [Vec3; 3]) -> Self {
        Self { center, normals }
    }

    /// Standard basis `(x̂, ŷ, ẑ)` at `center`.
    pub fn canonical(center: Vec3) -> Self {
        Self::new(center, [Vec3::X, Vec3::Y, Vec3::Z])
    }

    /// The transmitter layout the mutual-inductance expansions assume:
    /// T1 along ẑ, T2 along x̂, T3 along ŷ.
    pub fn axis_aligned_transmitter(center: Vec3) -> Self {
        Self::new(center, [Vec3::Z, Vec3::X, Vec3::Y])
    }

    pub fn at(self, center: Vec3) -> Self {
        Self { center, ..self }
    }
}

/// Builds the receiver triad for sweep angle `alpha`, centered at the origin.
///
/// The first normal is `(sin α, 0, cos α)` and the second is derived from
/// `c = x̂ − n₁`. In [`FrameMode::Orthonormal`] `c` is first projected off
/// `n₁`; in [`FrameMode::PaperLiteral`] it is only normalised and the first
/// normal uses `|sin α|`. When the (projected) `c` is shorter than
/// [`DEGENERACY_THRESHOLD`] the canonical basis is returned.
pub fn receiver_pose_from_alpha(alpha: SweepAngle, mode: FrameMode) -> TriadPose {
    let a = alpha.radians();
    let (sin, cos) = a.sin_cos();
    let n1 = match mode {
        FrameMode::Orthonormal => Vec3::new(sin, 0.0, cos),
        FrameMode::PaperLiteral => Vec3::new(sin.abs(), 0.0, cos),
    };
    let c = Vec3::X - n1;
    let c = match mode {
        FrameMode::Orthonormal => c - n1 * c.dot(n1),
        FrameMode::PaperLiteral => c,
    };
    if c.norm() < DEGENERACY_THRESHOLD {
        return TriadPose::canonical(Vec3::ZERO);
    }
    let n2 = c.normalized();
    let n3 = n1.cross(n2);
    TriadPose::new(Vec3::ZERO, [n1, n2, n3])
}

/// Residuals of a pose against the orthonormal right-handed contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseReport {
    pub mode: FrameMode,
    /// `max_i | ‖n_i‖ − 1 |`
    pub unit_norm_residual: f64,
    /// `max_{i<j} | n_i · n_j |`
    pub orthogonality_residual: f64,
    /// `‖n₃ − n₁ × n₂‖`
    pub handedness_residual: f64,
    pub finite: bool,
    pub passed: bool,
}

impl PoseReport {
    pub fn is_orthonormal(&self) -> bool {
        self.unit_norm_residual <= POSE_TOLERANCE
            && self.orthogonality_residual <= POSE_TOLERANCE
            && self.handedness_residual <= POSE_TOLERANCE
    }
}

/// Measures how far a pose is from an orthonormal right-handed triad.
///
/// Orthonormal mode passes only when every residual is within
/// [`POSE_TOLERANCE`]. Paper-literal mode only requires the first two normals
/// to be unit length; the orthogonality residual is still reported so the
/// skew is visible.
pub fn validate_pose(pose: &TriadPose, mode: FrameMode) -> PoseReport {
    let [n1, n2, n3] = pose.normals;
    let finite = pose.center.is_finite() && pose.normals.iter().all(|n| n.is_finite());
    let unit_norm_residual = pose
        .normals
        .iter()
        .map(|n| (n.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let orthogonality_residual = [n1.dot(n2), n1.dot(n3), n2.dot(n3)]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max);
    let handedness_residual = (n3 - n1.cross(n2)).norm();
    let passed = finite
        && match mode {
            FrameMode::Orthonormal => {
                unit_norm_residual <= POSE_TOLERANCE
                    && orthogonality_residual <= POSE_TOLERANCE
                    && handedness_residual <= POSE_TOLERANCE
            }
            // n₃ = n₁ × n₂ is only unit length when n₁ ⟂ n₂
            FrameMode::PaperLiteral => pose.normals[..2]
                .iter()
                .all(|n| (n.norm() - 1.0).abs() <= POSE_TOLERANCE),
        };
    PoseReport {
        mode,
        unit_norm_residual,
        orthogonality_residual,
        handedness_residual,
        finite,
        passed,
    }
}

/// `count` evenly spaced angles over `[0, 2π)`, starting at 0.
pub fn alpha_grid(count: usize) -> Result<Vec<SweepAngle>> {
    if count < 2 {
        return Err(Error::invalid(format!(
            "angle grid needs at least 2 points, got {count}"
        )));
    }
    let step = TAU / count as f64;
    Ok((0..count).map(|k| SweepAngle(k as f64 * step)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn angle(a: f64) -> SweepAngle {
        SweepAngle::new(a).unwrap()
    }

    #[test]
    fn quarter_turn_is_canonical_in_both_modes() {
        for mode in [FrameMode::Orthonormal, FrameMode::PaperLiteral] {
            let pose = receiver_pose_from_alpha(angle(FRAC_PI_2), mode);
            assert_eq!(pose.normals, [Vec3::X, Vec3::Y, Vec3::Z]);
        }
    }

    #[test]
    fn zero_angle_orthonormal() {
        let pose = receiver_pose_from_alpha(angle(0.0), FrameMode::Orthonormal);
        let [n1, n2, n3] = pose.normals;
        assert_eq!(n1, Vec3::Z);
        assert!((n2 - Vec3::X).norm() < 1e-15);
        assert!((n3 - Vec3::Y).norm() < 1e-15);
    }

    #[test]
    fn one_radian_is_orthogonal() {
        let pose = receiver_pose_from_alpha(angle(1.0), FrameMode::Orthonormal);
        let [n1, n2, n3] = pose.normals;
        assert!(n1.dot(n2).abs() < 1e-12);
        assert!(n1.dot(n3).abs() < 1e-12);
        assert!(n2.dot(n3).abs() < 1e-12);
    }

    #[test]
    fn canonical_basis_validates_exactly() {
        let r = validate_pose(&TriadPose::canonical(Vec3::ZERO), FrameMode::Orthonormal);
        assert!(r.passed);
        assert_eq!(r.unit_norm_residual, 0.0);
        assert_eq!(r.orthogonality_residual, 0.0);
        assert_eq!(r.handedness_residual, 0.0);
    }

    #[test]
    fn paper_literal_skew_is_reported() {
        let pose = receiver_pose_from_alpha(angle(0.0), FrameMode::PaperLiteral);
        let r = validate_pose(&pose, FrameMode::PaperLiteral);
        assert!((r.orthogonality_residual - FRAC_1_SQRT_2).abs() < 1e-15);
        // n₃ inherits the skew: |n₁ × n₂| = sin 45°
        assert!((pose.normals[2].norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(r.passed);
        assert!(!r.is_orthonormal());
        assert!(!validate_pose(&pose, FrameMode::Orthonormal).passed);
    }

    #[test]
    fn scaled_normals_fail_unit_norm() {
        let pose = TriadPose::new(Vec3::ZERO, [Vec3::X * 2.0, Vec3::Y * 2.0, Vec3::Z * 2.0]);
        for mode in [FrameMode::Orthonormal, FrameMode::PaperLiteral] {
            let r = validate_pose(&pose, mode);
            assert!(!r.passed);
            assert_eq!(r.unit_norm_residual, 1.0);
        }
    }

    #[test]
    fn grid_spacing() {
        let g = alpha_grid(4).unwrap();
        let got: Vec<f64> = g.iter().map(|a| a.radians()).collect();
        assert_eq!(got, vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]);
        let g = alpha_grid(360).unwrap();
        assert_eq!(g.len(), 360);
        assert!((g[1].radians() - TAU / 360.0).abs() < 1e-15);
        assert!(matches!(alpha_grid(1), Err(Error::InvalidArgument(_))));
        assert!(alpha_grid(0).is_err());
    }

    #[test]
    fn sweep_angle_wraps_and_rejects_nan() {
        assert!((angle(TAU + 1.0).radians() - 1.0).abs() < 1e-12);
        assert!((angle(-FRAC_PI_2).radians() - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert!(SweepAngle::new(f64::NAN).is_err());
        assert!(SweepAngle::new(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn orthonormal_mode_always_validates(a in 0.0..TAU) {
            let pose = receiver_pose_from_alpha(angle(a), FrameMode::Orthonormal);
            let r = validate_pose(&pose, FrameMode::Orthonormal);
            prop_assert!(r.passed);
            prop_assert!(r.unit_norm_residual < 1e-12);
            prop_assert!(r.orthogonality_residual < 1e-12);
            prop_assert!(r.handedness_residual < 1e-12);
        }

        #[test]
        fn pose_is_deterministic(a in 0.0..TAU) {
            for mode in [FrameMode::Orthonormal, FrameMode::PaperLiteral] {
                let p = receiver_pose_from_alpha(angle(a), mode);
                let q = receiver_pose_from_alpha(angle(a), mode);
                for (u, v) in p.normals.iter().zip(q.normals.iter()) {
                    prop_assert_eq!(u.x.to_bits(), v.x.to_bits());
                    prop_assert_eq!(u.y.to_bits(), v.y.to_bits());
                    prop_assert_eq!(u.z.to_bits(), v.z.to_bits());
                }
            }
        }

        #[test]
        fn paper_literal_skew_matches_closed_form(a in 0.0..TAU) {
            let s = a.sin().abs();
            let c = Vec3::X - Vec3::new(s, 0.0, a.cos());
            prop_assume!(c.norm() > 1e-6);
            let pose = receiver_pose_from_alpha(angle(a), FrameMode::PaperLiteral);
            let expected = (s - 1.0) / c.norm();
            prop_assert!((pose.normals[0].dot(pose.normals[1]) - expected).abs() < 1e-12);
        }
    }
}
