//! Dense unitaries for the gate vocabulary.
//!
//! Matrices are row-major. For a gate on qubits `[q0, q1, ..]` the first
//! operand is the most significant bit of the matrix index, so `cx` on
//! `[control, target]` is the textbook block-diagonal matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use core::ops::Mul;

use libm::{cos, sin};
use num_complex::Complex64;

use crate::circuit::GateKind;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// e^{iθ}
pub fn cis(theta: f64) -> Complex64 {
    Complex64::new(cos(theta), sin(theta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Matrix { dim, data }
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        Matrix { dim, data }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Matrix::identity(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * m.dim + i] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::identity(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// Adds one control qubit as the new most significant operand.
    pub fn controlled(&self) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::identity(2 * d);
        for r in 0..d {
            for c in 0..d {
                out.set(d + r, d + c, self.get(r, c));
            }
        }
        out
    }

    /// True if `self = e^{iφ} other` for some φ, entry-wise within `tol`.
    pub fn equal_up_to_phase(&self, other: &Matrix, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let Some((idx, _)) = other
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        else {
            return true;
        };
        if other.data[idx].norm() < tol {
            return self.data.iter().all(|z| z.norm() < tol);
        }
        let phase = self.data[idx] / other.data[idx];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a - phase * b).norm() <= tol)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    out[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        Matrix { dim: d, data: out }
    }
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Matrix {
    Matrix::from_rows(2, vec![a, b, c, d])
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn rx(theta: f64) -> Matrix {
    let (c, s) = (cos(theta / 2.0), sin(theta / 2.0));
    m2(re(c), -I * s, -I * s, re(c))
}

pub fn ry(theta: f64) -> Matrix {
    let (c, s) = (cos(theta / 2.0), sin(theta / 2.0));
    m2(re(c), re(-s), re(s), re(c))
}

pub fn rz(theta: f64) -> Matrix {
    Matrix::diag(&[cis(-theta / 2.0), cis(theta / 2.0)])
}

pub fn phase(lambda: f64) -> Matrix {
    Matrix::diag(&[ONE, cis(lambda)])
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (c, s) = (cos(theta / 2.0), sin(theta / 2.0));
    m2(
        re(c),
        -cis(lambda) * s,
        cis(phi) * s,
        cis(phi + lambda) * c,
    )
}

fn single_qubit(kind: GateKind, p: &[f64]) -> Option<Matrix> {
    let h = FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::Id => Matrix::identity(2),
        GateKind::X => m2(ZERO, ONE, ONE, ZERO),
        GateKind::Y => m2(ZERO, -I, I, ZERO),
        GateKind::Z => Matrix::diag(&[ONE, -ONE]),
        GateKind::H => m2(re(h), re(h), re(h), re(-h)),
        GateKind::S => Matrix::diag(&[ONE, I]),
        GateKind::Sdg => Matrix::diag(&[ONE, -I]),
        GateKind::T => phase(FRAC_PI_4),
        GateKind::Tdg => phase(-FRAC_PI_4),
        GateKind::Sx => {
            let a = Complex64::new(0.5, 0.5);
            let b = Complex64::new(0.5, -0.5);
            m2(a, b, b, a)
        }
        GateKind::Sxdg => single_qubit(GateKind::Sx, p)?.adjoint(),
        GateKind::Rx => rx(p[0]),
        GateKind::Ry => ry(p[0]),
        GateKind::Rz => rz(p[0]),
        GateKind::P | GateKind::U1 => phase(p[0]),
        GateKind::U2 => u3(FRAC_PI_2, p[0], p[1]),
        GateKind::U3 | GateKind::U => u3(p[0], p[1], p[2]),
        _ => return None,
    })
}

/// Unitary of a gate, or `None` for `measure`/`barrier`.
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Option<Matrix> {
    if let Some(m) = single_qubit(kind, params) {
        return Some(m);
    }
    let controlled = |k: GateKind, p: &[f64]| single_qubit(k, p).map(|m| m.controlled());
    match kind {
        GateKind::Cx => controlled(GateKind::X, &[]),
        GateKind::Cy => controlled(GateKind::Y, &[]),
        GateKind::Cz => controlled(GateKind::Z, &[]),
        GateKind::Ch => controlled(GateKind::H, &[]),
        GateKind::Csx => controlled(GateKind::Sx, &[]),
        GateKind::Crx => controlled(GateKind::Rx, params),
        GateKind::Cry => controlled(GateKind::Ry, params),
        GateKind::Crz => controlled(GateKind::Rz, params),
        GateKind::Cp | GateKind::Cu1 => controlled(GateKind::P, params),
        GateKind::Cu3 => controlled(GateKind::U3, params),
        GateKind::Swap => {
            let mut m = Matrix::identity(4);
            m.set(1, 1, ZERO);
            m.set(2, 2, ZERO);
            m.set(1, 2, ONE);
            m.set(2, 1, ONE);
            Some(m)
        }
        GateKind::Rxx => {
            let (c, s) = (re(cos(params[0] / 2.0)), -I * sin(params[0] / 2.0));
            let mut m = Matrix::diag(&[c, c, c, c]);
            m.set(0, 3, s);
            m.set(1, 2, s);
            m.set(2, 1, s);
            m.set(3, 0, s);
            Some(m)
        }
        GateKind::Rzz => {
            let (a, b) = (cis(-params[0] / 2.0), cis(params[0] / 2.0));
            Some(Matrix::diag(&[a, b, b, a]))
        }
        GateKind::Ccx => controlled(GateKind::X, &[]).map(|m| m.controlled()),
        GateKind::Cswap => gate_matrix(GateKind::Swap, &[]).map(|m| m.controlled()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_gate_is_unitary() {
        for &k in GateKind::ALL {
            let params: Vec<f64> = (0..k.num_params()).map(|i| 0.3 + i as f64).collect();
            let Some(m) = gate_matrix(k, &params) else {
                assert!(!k.is_gate());
                continue;
            };
            assert_eq!(m.dim(), 1 << k.arity().unwrap());
            let prod = &m * &m.adjoint();
            assert!(prod.equal_up_to_phase(&Matrix::identity(m.dim()), 1e-12), "{k}");
        }
    }

    #[test]
    fn sx_squared_is_x() {
        let sx = gate_matrix(GateKind::Sx, &[]).unwrap();
        let x = gate_matrix(GateKind::X, &[]).unwrap();
        assert!((&sx * &sx).equal_up_to_phase(&x, 1e-12));
    }

    #[test]
    fn phase_equality_rejects_distinct() {
        let h = gate_matrix(GateKind::H, &[]).unwrap();
        let x = gate_matrix(GateKind::X, &[]).unwrap();
        assert!(!h.equal_up_to_phase(&x, 1e-8));
        let minus_h = Matrix::from_rows(2, h.data.iter().map(|z| -z).collect());
        assert!(h.equal_up_to_phase(&minus_h, 1e-12));
    }
}
