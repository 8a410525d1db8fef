//! Coil descriptions and the dipole mutual-inductance model.
//!
//! Each coil is an ideal magnetic dipole. The coupling between a transmit
//! coil with normal `n_t` and a receive coil with normal `n_r` separated by
//! `r` is
//!
//! ```text
//! M = μ₀ N_t N_r S_t S_r / (4π |r|³) · [3 (n_t·r̂)(n_r·r̂) − n_t·n_r]
//! ```
//!
//! The per-coil polynomial expansions for an axis-aligned transmitter are
//! available through [`expanded_mutual`] for comparison; the expansion for
//! the x̂-directed transmit coil is reproduced with the cosine assignment as
//! printed, which swaps the x and z direction cosines relative to the dipole
//! kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TriadPose, Vec3};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0 * PI * 1e-7;

/// Tolerance on the transmitter axes when the expanded formulas are requested.
const AXIS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilSpec {
    pub turns: u32,
    /// Loop radius, m.
    pub radius: f64,
    /// Wire resistance per unit length, Ω/m.
    pub wire_resistance_per_meter: f64,
}

impl CoilSpec {
    pub fn new(turns: u32, radius: f64, wire_resistance_per_meter: f64) -> Result<Self> {
        let spec = Self {
            turns,
            radius,
            wire_resistance_per_meter,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.turns < 1 {
            return Err(Error::validation("turns", "must be at least 1"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::validation(
                "radius",
                format!("must be positive, got {}", self.radius),
            ));
        }
        if !(self.wire_resistance_per_meter.is_finite() && self.wire_resistance_per_meter >= 0.0) {
            return Err(Error::validation(
                "wire_resistance_per_meter",
                format!(
                    "must be non-negative, got {}",
                    self.wire_resistance_per_meter
                ),
            ));
        }
        Ok(())
    }

    /// Loop area `π r²`, m².
    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// Total wire resistance of the coil: `R₀ · 2πr · N`.
pub fn coil_resistance(spec: &CoilSpec) -> f64 {
    spec.wire_resistance_per_meter * 2.0 * PI * spec.radius * spec.turns as f64
}

/// `μ₀ N_t N_r S_t S_r / 4π`, the distance-independent coupling prefactor.
pub fn coupling_constant(tx: &CoilSpec, rx: &CoilSpec) -> f64 {
    MU0 * tx.turns as f64 * rx.turns as f64 * tx.area() * rx.area() / (4.0 * PI)
}

/// Mutual inductance between two dipole coils, H.
///
/// `offset` points from the transmit coil to the receive coil. Normals are
/// expected to be unit length, but the kernel is linear in each of them.
pub fn dipole_mutual(
    n_t: Vec3,
    n_r: Vec3,
    offset: Vec3,
    tx: &CoilSpec,
    rx: &CoilSpec,
) -> Result<f64> {
    let r = offset.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::SingularGeometry(format!(
            "coil separation must be positive and finite, got {r}"
        )));
    }
    let r_hat = offset * (1.0 / r);
    let k = coupling_constant(tx, rx) / (r * r * r);
    Ok(k * (3.0 * n_t.dot(r_hat) * n_r.dot(r_hat) - n_t.dot(n_r)))
}

/// Which coupling formula fills the mutual-inductance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaMode {
    /// General dipole kernel; any transmitter orientation.
    #[default]
    Canonical,
    /// Per-coil polynomial expansions exactly as printed. Requires the
    /// axis-aligned transmitter layout.
    #[serde(alias = "paper")]
    PaperLiteral,
}

impl std::str::FromStr for FormulaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(FormulaMode::Canonical),
            "paper" | "paper-literal" => Ok(FormulaMode::PaperLiteral),
            other => Err(Error::invalid(format!("unknown formula mode `{other}`"))),
        }
    }
}

/// Polynomial expansion of the coupling from transmit coil `tx_index`
/// (0 → ẑ, 1 → x̂, 2 → ŷ) to a receive coil with direction cosines `n_r`.
///
/// Indices 0 and 2 equal the dipole kernel. Index 1 uses the printed
/// cosine assignment, which differs from the kernel unless the x and z
/// direction cosines of `n_r` coincide.
pub fn expanded_mutual(
    tx_index: usize,
    n_r: Vec3,
    offset: Vec3,
    tx: &CoilSpec,
    rx: &CoilSpec,
) -> Result<f64> {
    let Vec3 { x, y, z } = offset;
    let r2 = offset.norm_squared();
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(Error::SingularGeometry(
            "coil separation must be positive and finite".into(),
        ));
    }
    let r5 = r2 * r2 * r2.sqrt();
    let k = coupling_constant(tx, rx) / r5;
    let (ca, cb, cg) = (n_r.x, n_r.y, n_r.z);
    let poly = match tx_index {
        0 => 3.0 * x * z * ca + 3.0 * y * z * cb + (2.0 * z * z - x * x - y * y) * cg,
        1 => 3.0 * x * y * cb + 3.0 * x * z * ca + (2.0 * x * x - y * y - z * z) * cg,
        2 => 3.0 * y * z * cg + 3.0 * x * y * ca + (2.0 * y * y - x * x - z * z) * cb,
        _ => {
            return Err(Error::invalid(format!(
                "transmit coil index {tx_index} out of range"
            )))
        }
    };
    Ok(k * poly)
}

/// 3×3 mutual inductances, `m[i][j]` couples transmit coil `i` to receive
/// coil `j` (H).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MutualMatrix(pub [[f64; 3]; 3]);

impl MutualMatrix {
    pub fn new(entries: [[f64; 3]; 3]) -> Result<Self> {
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mutual inductance entries must be finite"));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    /// `M_{tx,rx}`.
    pub fn get(&self, tx: usize, rx: usize) -> f64 {
        self.0[tx][rx]
    }

    /// Coupling of receive coil `rx` to each of the three transmit currents:
    /// `(M_{1,rx}, M_{2,rx}, M_{3,rx})`.
    pub fn coupling_row(&self, rx: usize) -> [f64; 3] {
        [self.0[0][rx], self.0[1][rx], self.0[2][rx]]
    }

    /// Signed per-receive-coil couplings `m_n · I` for a drive `current`.
    pub fn couplings(&self, current: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = (0..3).map(|k| self.0[k][n] * current[k]).sum();
        }
        out
    }

    /// `AᵀA` where `A` has the coupling rows as rows.
    pub fn coupling_gram(&self) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|n| self.0[i][n] * self.0[j][n]).sum();
            }
        }
        g
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|v| *v *= k);
        Self(out)
    }
}

/// Mutual-inductance matrix between two triads.
pub fn mutual_matrix(
    tx_pose: &TriadPose,
    rx_pose: &TriadPose,
    tx: &CoilSpec,
    rx: &CoilSpec,
    mode: FormulaMode,
) -> Result<MutualMatrix> {
    let offset = rx_pose.center - tx_pose.center;
    if offset.norm() == 0.0 {
        return Err(Error::SingularGeometry(
            "transmit and receive centers coincide".into(),
        ));
    }
    let mut m = [[0.0; 3]; 3];
    match mode {
        FormulaMode::Canonical => {
            for (i, n_t) in tx_pose.normals.iter().enumerate() {
                for (j, n_r) in rx_pose.normals.iter().enumerate() {
                    m[i][j] = dipole_mutual(*n_t, *n_r, offset, tx, rx)?;
                }
            }
        }
        FormulaMode::PaperLiteral => {
            let expected = TriadPose::axis_aligned_transmitter(Vec3::ZERO).normals;
            let aligned = tx_pose
                .normals
                .iter()
                .zip(expected.iter())
                .all(|(n, e)| (*n - *e).norm() <= AXIS_TOLERANCE);
            if !aligned {
                return Err(Error::invalid(
                    "expanded formulas require the transmitter axes (ẑ, x̂, ŷ)",
                ));
            }
            for (i, row) in m.iter_mut().enumerate() {
                for (j, n_r) in rx_pose.normals.iter().enumerate() {
                    row[j] = expanded_mutual(i, *n_r, offset, tx, rx)?;
                }
            }
        }
    }
    MutualMatrix::new(m)
}
