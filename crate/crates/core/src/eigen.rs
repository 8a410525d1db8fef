//! Eigen-decomposition of real symmetric 3×3 matrices.
//!
//! Eigenvalues come from the trigonometric solution of the characteristic
//! cubic; eigenvectors start from cross products of the rows of `A − λI` and
//! are then polished with cyclic Jacobi rotations until the off-diagonal mass
//! is at rounding level (normally a single sweep).

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Relative asymmetry tolerated before a matrix is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

const MAX_POLISH_SWEEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit eigenvector; its largest-magnitude component is positive.
    pub vector: [f64; 3],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(&v, &v).sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.map(|x| x / n))
}

pub fn mat_vec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [dot(&a[0], v), dot(&a[1], v), dot(&a[2], v)]
}

/// Flips `v` so that its largest-magnitude component is positive. Among
/// components tied in magnitude the first one decides.
pub fn apply_sign_convention(v: [f64; 3]) -> [f64; 3] {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lead = v
        .iter()
        .position(|x| x.abs() >= max - 1e-12 * max)
        .unwrap_or(0);
    if v[lead] < 0.0 {
        v.map(|x| -x)
    } else {
        v
    }
}

fn closed_form_eigenvalues(b: &Mat3) -> Option<[f64; 3]> {
    let p1 = b[0][1] * b[0][1] + b[0][2] * b[0][2] + b[1][2] * b[1][2];
    let q = (b[0][0] + b[1][1] + b[2][2]) / 3.0;
    let p2 = (b[0][0] - q).powi(2) + (b[1][1] - q).powi(2) + (b[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p <= 1e-15 {
        return None;
    }
    let mut c = *b;
    for (i, row) in c.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v /= p;
        }
        row[i] -= q / p;
    }
    let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
        - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    Some([l1, 3.0 * q - l1 - l3, l3])
}

/// Direction spanning the (numerical) null space of `b − λI`.
fn null_direction(b: &Mat3, lambda: f64) -> Option<[f64; 3]> {
    let mut m = *b;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let candidates = [
        cross(&m[0], &m[1]),
        cross(&m[1], &m[2]),
        cross(&m[2], &m[0]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
        .copied()?;
    if dot(&best, &best) < 1e-24 {
        return None;
    }
    normalize(best)
}

/// A unit vector orthogonal to `u`, built from the canonical axis least
/// aligned with it.
fn orthogonal_to(u: &[f64; 3]) -> [f64; 3] {
    let axis = (0..3)
        .min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let d = dot(&e, u);
    normalize([e[0] - d * u[0], e[1] - d * u[1], e[2] - d * u[2]]).unwrap_or([0.0, 1.0, 0.0])
}

fn initial_basis(b: &Mat3, lambdas: &[f64; 3]) -> [[f64; 3]; 3] {
    let canonical = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let (isolated, middle) = if lambdas[0] - lambdas[1] >= lambdas[1] - lambdas[2] {
        (lambdas[0], lambdas[1])
    } else {
        (lambdas[2], lambdas[1])
    };
    let Some(u) = null_direction(b, isolated) else {
        return canonical;
    };
    let v = null_direction(b, middle)
        .and_then(|v| {
            let d = dot(&v, &u);
            let w = [v[0] - d * u[0], v[1] - d * u[1], v[2] - d * u[2]];
            (dot(&w, &w) > 1e-12).then_some(w).and_then(normalize)
        })
        .unwrap_or_else(|| orthogonal_to(&u));
    let w = cross(&u, &v);
    [u, v, w]
}

/// Cyclic Jacobi sweeps on `D = VᵀBV`, accumulating into the columns of `V`
/// (stored here as rows `basis[k]`). Returns the diagonal of `D`.
fn jacobi_polish(b: &Mat3, basis: &mut [[f64; 3]; 3]) -> [f64; 3] {
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        let bi = mat_vec(b, &basis[i]);
        for j in 0..3 {
            d[i][j] = dot(&basis[j], &bi);
        }
    }
    for _ in 0..MAX_POLISH_SWEEPS {
        let off = d[0][1].powi(2) + d[0][2].powi(2) + d[1][2].powi(2);
        let diag = d[0][0].powi(2) + d[1][1].powi(2) + d[2][2].powi(2);
        if off <= 1e-34 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = d[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (d[q][q] - d[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // D ← JᵀDJ with J the (p,q) rotation
            for k in 0..3 {
                let dkp = d[k][p];
                let dkq = d[k][q];
                d[k][p] = c * dkp - s * dkq;
                d[k][q] = s * dkp + c * dkq;
            }
            for k in 0..3 {
                let dpk = d[p][k];
                let dqk = d[q][k];
                d[p][k] = c * dpk - s * dqk;
                d[q][k] = s * dpk + c * dqk;
            }
            let vp = basis[p];
            let vq = basis[q];
            for k in 0..3 {
                basis[p][k] = c * vp[k] - s * vq[k];
                basis[q][k] = s * vp[k] + c * vq[k];
            }
        }
    }
    [d[0][0], d[1][1], d[2][2]]
}

/// Eigenpairs of a symmetric 3×3 matrix, sorted by descending eigenvalue.
///
/// Fails with [`Error::InvalidArgument`] when the input is not symmetric to
/// [`SYMMETRY_TOLERANCE`] (relative to its largest entry) or not finite.
/// For an exactly scalar matrix the canonical basis is returned.
pub fn symmetric_eig3(a: &Mat3) -> Result<[EigenPair; 3]> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (a[i][j] - a[j][i]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric: a[{i}][{j}]={} vs a[{j}][{i}]={}",
                    a[i][j], a[j][i]
                )));
            }
        }
    }
    let canonical = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    if scale == 0.0 {
        return Ok(canonical.map(|vector| EigenPair { value: 0.0, vector }));
    }

    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = 0.5 * (a[i][j] + a[j][i]) / scale;
        }
    }

    let (mut basis, diag) = match closed_form_eigenvalues(&b) {
        None => {
            let mut basis = canonical;
            let diag = jacobi_polish(&b, &mut basis);
            (basis, diag)
        }
        Some(lambdas) => {
            let mut basis = initial_basis(&b, &lambdas);
            let diag = jacobi_polish(&b, &mut basis);
            (basis, diag)
        }
    };

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    for v in basis.iter_mut() {
        *v = normalize(*v).unwrap_or(*v);
    }
    Ok(order.map(|k| EigenPair {
        value: diag[k] * scale,
        vector: apply_sign_convention(basis[k]),
    }))
}
