//! Gate synthesis rules: Euler decomposition of single-qubit unitaries and
//! rewrites of multi-qubit gates into `cx` plus single-qubit gates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use libm::atan2;

use crate::circuit::{GateKind, Instruction};
use crate::unitary::{gate_matrix, Matrix};

/// Angles closer than this to a special value take the special-case branch.
pub const ANGLE_TOL: f64 = 1e-10;

/// Maps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `U = e^{iα} Rz(φ) Ry(θ) Rz(λ)` with `θ ∈ [0, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zyz {
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

pub fn zyz(m: &Matrix) -> Zyz {
    let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let alpha = det.arg() / 2.0;
    let unphase = crate::unitary::cis(-alpha);
    let (v00, v10, v11) = (m.get(0, 0) * unphase, m.get(1, 0) * unphase, m.get(1, 1) * unphase);
    let theta = 2.0 * atan2(v10.norm(), v00.norm());
    let sum = if v11.norm() > 1e-12 { 2.0 * v11.arg() } else { 0.0 };
    let diff = if v10.norm() > 1e-12 { 2.0 * v10.arg() } else { 0.0 };
    Zyz {
        alpha,
        theta,
        phi: (sum + diff) / 2.0,
        lambda: (sum - diff) / 2.0,
    }
}

fn rz_unless_zero(out: &mut Vec<Instruction>, q: usize, angle: f64) {
    let a = normalize_angle(angle);
    if a.abs() >= ANGLE_TOL {
        out.push(Instruction::gate(GateKind::Rz, &[q], &[a]));
    }
}

/// Single-qubit synthesis over `{rz, sx, x}`, up to global phase.
pub fn synth_zsx(m: &Matrix, q: usize) -> Vec<Instruction> {
    let Zyz {
        theta, phi, lambda, ..
    } = zyz(m);
    let mut out = Vec::new();
    let sx = || Instruction::gate(GateKind::Sx, &[q], &[]);
    if theta.abs() < ANGLE_TOL {
        rz_unless_zero(&mut out, q, phi + lambda);
    } else if (theta - FRAC_PI_2).abs() < ANGLE_TOL {
        rz_unless_zero(&mut out, q, lambda - FRAC_PI_2);
        out.push(sx());
        rz_unless_zero(&mut out, q, phi + FRAC_PI_2);
    } else if (theta - PI).abs() < ANGLE_TOL {
        out.push(Instruction::gate(GateKind::X, &[q], &[]));
        rz_unless_zero(&mut out, q, phi - lambda - PI);
    } else {
        rz_unless_zero(&mut out, q, lambda);
        out.push(sx());
        rz_unless_zero(&mut out, q, theta + PI);
        out.push(sx());
        rz_unless_zero(&mut out, q, phi + PI);
    }
    out
}

/// Single-qubit synthesis over `{rz, ry}`, up to global phase.
pub fn synth_zyz(m: &Matrix, q: usize) -> Vec<Instruction> {
    let Zyz {
        theta, phi, lambda, ..
    } = zyz(m);
    let mut out = Vec::new();
    if theta.abs() < ANGLE_TOL {
        rz_unless_zero(&mut out, q, phi + lambda);
    } else {
        rz_unless_zero(&mut out, q, lambda);
        out.push(Instruction::gate(GateKind::Ry, &[q], &[theta]));
        rz_unless_zero(&mut out, q, phi);
    }
    out
}

/// `cx` on an ion trap: one `rxx(π/2)` plus single-qubit corrections.
pub fn ion_cx(c: usize, t: usize) -> Vec<Instruction> {
    vec![
        Instruction::gate(GateKind::Ry, &[c], &[FRAC_PI_2]),
        Instruction::gate(GateKind::Rxx, &[c, t], &[FRAC_PI_2]),
        Instruction::gate(GateKind::Ry, &[c], &[-FRAC_PI_2]),
        Instruction::gate(GateKind::Rz, &[c], &[-FRAC_PI_2]),
        Instruction::gate(GateKind::Rx, &[t], &[-FRAC_PI_2]),
    ]
}

/// Three `cx` gates, the first (and last) controlled by `first_control`.
pub fn swap_as_cx(a: usize, b: usize, first_control: usize) -> Vec<Instruction> {
    let (x, y) = if first_control == b { (b, a) } else { (a, b) };
    let cx = |c, t| Instruction::gate(GateKind::Cx, &[c, t], &[]);
    vec![cx(x, y), cx(y, x), cx(x, y)]
}

/// Controlled-U as `p(α)` on the control and two `cx` around rotations on
/// the target.
fn controlled_u(u: &Matrix, c: usize, t: usize) -> Vec<Instruction> {
    let Zyz {
        alpha,
        theta,
        phi,
        lambda,
    } = zyz(u);
    let g = |k, q: usize, p: f64| Instruction::gate(k, &[q], &[p]);
    vec![
        g(GateKind::Rz, t, (lambda - phi) / 2.0),
        Instruction::gate(GateKind::Cx, &[c, t], &[]),
        g(GateKind::Rz, t, -(lambda + phi) / 2.0),
        g(GateKind::Ry, t, -theta / 2.0),
        Instruction::gate(GateKind::Cx, &[c, t], &[]),
        g(GateKind::Ry, t, theta / 2.0),
        g(GateKind::Rz, t, phi),
        g(GateKind::P, c, alpha),
    ]
}

/// Rewrites a two-qubit gate into `cx` plus single-qubit gates. `cx` itself
/// is returned as-is.
pub fn lower_two_qubit(op: &Instruction) -> Vec<Instruction> {
    let (a, b) = (op.qubits[0], op.qubits[1]);
    let g1 = |k, q: usize| Instruction::gate(k, &[q], &[]);
    let cx = |c, t| Instruction::gate(GateKind::Cx, &[c, t], &[]);
    match op.kind {
        GateKind::Cx => vec![op.clone()],
        GateKind::Cz => vec![g1(GateKind::H, b), cx(a, b), g1(GateKind::H, b)],
        GateKind::Cy => vec![g1(GateKind::Sdg, b), cx(a, b), g1(GateKind::S, b)],
        GateKind::Swap => swap_as_cx(a, b, a),
        GateKind::Rxx => vec![
            g1(GateKind::H, a),
            g1(GateKind::H, b),
            cx(a, b),
            Instruction::gate(GateKind::Rz, &[b], &op.params),
            cx(a, b),
            g1(GateKind::H, a),
            g1(GateKind::H, b),
        ],
        GateKind::Rzz => vec![
            cx(a, b),
            Instruction::gate(GateKind::Rz, &[b], &op.params),
            cx(a, b),
        ],
        kind => {
            let base = match kind {
                GateKind::Ch => GateKind::H,
                GateKind::Csx => GateKind::Sx,
                GateKind::Crx => GateKind::Rx,
                GateKind::Cry => GateKind::Ry,
                GateKind::Crz => GateKind::Rz,
                GateKind::Cp | GateKind::Cu1 => GateKind::P,
                GateKind::Cu3 => GateKind::U3,
                other => unreachable!("`{other}` is not a two-qubit gate"),
            };
            let u = gate_matrix(base, &op.params).expect("single-qubit base has a matrix");
            controlled_u(&u, a, b)
        }
    }
}

fn toffoli(a: usize, b: usize, c: usize) -> Vec<Instruction> {
    use GateKind::{Cx, Tdg, H, T};
    let g = |k, qs: &[usize]| Instruction::gate(k, qs, &[]);
    vec![
        g(H, &[c]),
        g(Cx, &[b, c]),
        g(Tdg, &[c]),
        g(Cx, &[a, c]),
        g(T, &[c]),
        g(Cx, &[b, c]),
        g(Tdg, &[c]),
        g(Cx, &[a, c]),
        g(T, &[b]),
        g(T, &[c]),
        g(H, &[c]),
        g(Cx, &[a, b]),
        g(T, &[a]),
        g(Tdg, &[b]),
        g(Cx, &[a, b]),
    ]
}

/// Rewrites `ccx`/`cswap` into `cx` plus single-qubit gates.
pub fn lower_three_qubit(op: &Instruction) -> Vec<Instruction> {
    let (a, b, c) = (op.qubits[0], op.qubits[1], op.qubits[2]);
    match op.kind {
        GateKind::Ccx => toffoli(a, b, c),
        GateKind::Cswap => {
            let cx = Instruction::gate(GateKind::Cx, &[c, b], &[]);
            let mut out = vec![cx.clone()];
            out.extend(toffoli(a, b, c));
            out.push(cx);
            out
        }
        other => unreachable!("`{other}` is not a three-qubit gate"),
    }
}
