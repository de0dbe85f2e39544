//! Dense helpers on top of `faer`: the real modal basis and rank-revealing
//! least squares.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use faer::linalg::solvers::SolveLstsq;
use faer::{Mat, MatRef};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Column layout of the real modal basis `[Im V | Re V]`.
///
/// Sine columns come first, one per mode with `0 < omega < pi`; DC and
/// Nyquist modes have an identically zero sine column, which is omitted.
/// Cosine columns follow, one per mode.
#[derive(Debug, Clone)]
pub struct BasisLayout {
    /// For each sine column, the mode it belongs to.
    pub sine_modes: Vec<usize>,
    pub modes: usize,
}

impl BasisLayout {
    pub fn new(params: &[(f64, f64)]) -> Self {
        let sine_modes = params
            .iter()
            .enumerate()
            .filter(|(_, (w, _))| has_sine(*w))
            .map(|(i, _)| i)
            .collect();
        Self {
            sine_modes,
            modes: params.len(),
        }
    }

    pub fn columns(&self) -> usize {
        self.sine_modes.len() + self.modes
    }

    /// Mode owning column `col`.
    pub fn mode_of(&self, col: usize) -> usize {
        if col < self.sine_modes.len() {
            self.sine_modes[col]
        } else {
            col - self.sine_modes.len()
        }
    }
}

pub(crate) fn has_sine(omega: f64) -> bool {
    omega != 0.0 && omega != PI
}

/// Fills `[Im V | Re V]` for `t = 0..len`.
pub fn modal_basis(params: &[(f64, f64)], len: usize) -> (Mat<f64>, BasisLayout) {
    let layout = BasisLayout::new(params);
    let ns = layout.sine_modes.len();
    let mut basis = Mat::<f64>::zeros(len, layout.columns());
    let mut sine_col = vec![usize::MAX; params.len()];
    for (c, &m) in layout.sine_modes.iter().enumerate() {
        sine_col[m] = c;
    }
    for (m, &(omega, alpha)) in params.iter().enumerate() {
        for t in 0..len {
            let tf = t as f64;
            let env = (-alpha * tf).exp();
            let (s, c) = (omega * tf).sin_cos();
            basis[(t, ns + m)] = env * c;
            if sine_col[m] != usize::MAX {
                basis[(t, sine_col[m])] = env * s;
            }
        }
    }
    (basis, layout)
}

/// Least-squares solution of `a x = b` by column-pivoted QR.
///
/// Returns the columns found linearly dependent when `a` is numerically
/// rank deficient.
pub fn lstsq(a: MatRef<'_, f64>, b: &[f64]) -> core::result::Result<Vec<f64>, Vec<usize>> {
    let (rows, cols) = (a.nrows(), a.ncols());
    assert_eq!(rows, b.len());
    if cols == 0 {
        return Ok(Vec::new());
    }
    if rows < cols {
        return Err((rows..cols).collect());
    }
    let qr = a.col_piv_qr();
    let r = qr.R();
    let lead = r[(0, 0)].abs();
    let tol = rows.max(cols) as f64 * f64::EPSILON * lead;
    let rank = (0..cols).take_while(|&k| r[(k, k)].abs() > tol).count();
    if rank < cols {
        let (forward, _) = qr.P().arrays();
        let mut dependent: Vec<usize> = forward[rank..].to_vec();
        dependent.sort_unstable();
        return Err(dependent);
    }
    let rhs = Mat::<f64>::from_fn(rows, 1, |i, _| b[i]);
    let x = qr.solve_lstsq(&rhs);
    Ok((0..cols).map(|i| x[(i, 0)]).collect())
}

/// Least-squares `(gamma_s, gamma_c)` per mode for the real signal `h`.
pub fn fit_amplitudes(h: &[f64], params: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let (basis, layout) = modal_basis(params, h.len());
    let x = lstsq(basis.as_ref(), h).map_err(|dependent| {
        Error::SingularBasis(colliding_modes(params, &layout, &dependent))
    })?;
    let ns = layout.sine_modes.len();
    let mut out: Vec<(f64, f64)> = (0..params.len()).map(|m| (0.0, x[ns + m])).collect();
    for (c, &m) in layout.sine_modes.iter().enumerate() {
        out[m].0 = x[c];
    }
    Ok(out)
}

/// Modes behind the dependent columns, each paired with its nearest
/// neighbour in (omega, alpha).
fn colliding_modes(params: &[(f64, f64)], layout: &BasisLayout, dependent: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for &col in dependent {
        let m = layout.mode_of(col.min(layout.columns().saturating_sub(1)));
        out.push(m);
        let nearest = params
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .min_by(|(_, a), (_, b)| {
                let da = (a.0 - params[m].0).abs() + (a.1 - params[m].1).abs();
                let db = (b.0 - params[m].0).abs() + (b.1 - params[m].1).abs();
                da.total_cmp(&db)
            });
        if let Some((i, _)) = nearest {
            out.push(i);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `a^T r` for a tall matrix and a vector.
pub fn transpose_times(a: MatRef<'_, f64>, r: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| a.col(j).iter().zip(r).map(|(x, y)| x * y).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cosine_member() {
        let h: Vec<f64> = (0..64)
            .map(|t| (0.5 * t as f64).cos() * (-0.01 * t as f64).exp())
            .collect();
        let g = fit_amplitudes(&h, &[(0.5, 0.01)]).unwrap();
        assert!((g[0].0).abs() < 1e-10 && (g[0].1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_sine_member() {
        let h: Vec<f64> = (0..64).map(|t| 2.0 * (0.3 * t as f64).sin()).collect();
        let g = fit_amplitudes(&h, &[(0.3, 0.0)]).unwrap();
        assert!((g[0].0 - 2.0).abs() < 1e-10 && g[0].1.abs() < 1e-10);
    }

    #[test]
    fn dc_mode_has_no_sine_column() {
        let h: Vec<f64> = (0..32).map(|t| 3.0 * (-0.2 * t as f64).exp()).collect();
        let (basis, layout) = modal_basis(&[(0.0, 0.2), (1.0, 0.0)], 32);
        assert_eq!(layout.sine_modes, [1]);
        assert_eq!(basis.ncols(), 3);
        let g = fit_amplitudes(&h, &[(0.0, 0.2), (1.0, 0.0)]).unwrap();
        assert!((g[0].1 - 3.0).abs() < 1e-10);
        assert_eq!(g[0].0, 0.0);
    }

    #[test]
    fn duplicate_modes_are_reported() {
        let h: Vec<f64> = (0..64).map(|t| (0.4 * t as f64).cos()).collect();
        match fit_amplitudes(&h, &[(0.1, 0.0), (0.4, 0.0), (0.4, 0.0)]) {
            Err(Error::SingularBasis(modes)) => assert_eq!(modes, [1, 2]),
            other => panic!("expected singular basis, got {other:?}"),
        }
    }
}
