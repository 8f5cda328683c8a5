//! Built-in gates and noise channels on qubits.
//!
//! Names: `I X Y Z H S T CNOT CZ SWAP`, `dephasing(p)`, `amplitude_damping(g)`
//! (also `amplitude-damping(g)`) and `depolarizing(p)`.

use super::{c, Matrix, QuantumChannel, QuantumError};

fn m2(a: [[(f64, f64); 2]; 2]) -> Matrix {
    Matrix::from_fn(2, 2, |i, j| c(a[i][j].0, a[i][j].1))
}

pub fn pauli_i() -> Matrix {
    Matrix::identity(2, 2)
}

pub fn pauli_x() -> Matrix {
    m2([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]])
}

pub fn pauli_y() -> Matrix {
    m2([[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]])
}

pub fn pauli_z() -> Matrix {
    m2([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]])
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    m2([[(s, 0.), (s, 0.)], [(s, 0.), (-s, 0.)]])
}

pub fn phase_s() -> Matrix {
    m2([[(1., 0.), (0., 0.)], [(0., 0.), (0., 1.)]])
}

pub fn phase_t() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    m2([[(1., 0.), (0., 0.)], [(0., 0.), (s, s)]])
}

fn permutation4(map: [usize; 4]) -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    for (col, &row) in map.iter().enumerate() {
        m[(row, col)] = c(1.0, 0.0);
    }
    m
}

pub fn cnot() -> Matrix {
    permutation4([0, 1, 3, 2])
}

pub fn swap() -> Matrix {
    permutation4([0, 2, 1, 3])
}

pub fn cz() -> Matrix {
    let mut m = Matrix::identity(4, 4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

pub fn dephasing(p: f64) -> Vec<Matrix> {
    vec![
        pauli_i() * c((1.0 - p).sqrt(), 0.0),
        pauli_z() * c(p.sqrt(), 0.0),
    ]
}

pub fn amplitude_damping(gamma: f64) -> Vec<Matrix> {
    let k0 = m2([[(1., 0.), (0., 0.)], [(0., 0.), ((1.0 - gamma).sqrt(), 0.)]]);
    let k1 = m2([[(0., 0.), (gamma.sqrt(), 0.)], [(0., 0.), (0., 0.)]]);
    vec![k0, k1]
}

pub fn depolarizing(p: f64) -> Vec<Matrix> {
    let w = (p / 4.0).sqrt();
    vec![
        pauli_i() * c((1.0 - 3.0 * p / 4.0).sqrt(), 0.0),
        pauli_x() * c(w, 0.0),
        pauli_y() * c(w, 0.0),
        pauli_z() * c(w, 0.0),
    ]
}

fn split_call(spec: &str) -> (String, Option<f64>) {
    let spec = spec.trim();
    match spec.find('(') {
        Some(open) if spec.ends_with(')') => {
            let arg = spec[open + 1..spec.len() - 1].trim().parse().ok();
            (spec[..open].trim().to_string(), arg)
        }
        _ => (spec.to_string(), None),
    }
}

/// Kraus operators of a named gate or channel, plus its arity in qubits.
pub fn kraus(spec: &str) -> Result<(Vec<Matrix>, usize), QuantumError> {
    let (name, arg) = split_call(spec);
    let unknown = || QuantumError::UnknownGate(spec.to_string());
    let prob = |a: Option<f64>| match a {
        Some(p) if (0.0..=1.0).contains(&p) => Ok(p),
        _ => Err(unknown()),
    };
    let out = match name.to_ascii_lowercase().as_str() {
        "i" | "id" => (vec![pauli_i()], 1),
        "x" => (vec![pauli_x()], 1),
        "y" => (vec![pauli_y()], 1),
        "z" => (vec![pauli_z()], 1),
        "h" => (vec![hadamard()], 1),
        "s" => (vec![phase_s()], 1),
        "t" => (vec![phase_t()], 1),
        "cnot" | "cx" => (vec![cnot()], 2),
        "cz" => (vec![cz()], 2),
        "swap" => (vec![swap()], 2),
        "dephasing" => (dephasing(prob(arg)?), 1),
        "amplitude_damping" | "amplitude-damping" => (amplitude_damping(prob(arg)?), 1),
        "depolarizing" => (depolarizing(prob(arg)?), 1),
        _ => return Err(unknown()),
    };
    Ok(out)
}

/// A library channel placed on the given qubits.
pub fn gate<S: AsRef<str>>(spec: &str, footprint: &[S]) -> Result<QuantumChannel, QuantumError> {
    let (ks, arity) = kraus(spec)?;
    if footprint.len() != arity {
        return Err(QuantumError::Shape {
            rows: footprint.len(),
            cols: 1,
            expected: arity,
        });
    }
    QuantumChannel::new(footprint.iter().map(|s| s.as_ref().to_string()).collect(), ks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_trace_preserving() {
        for g in [
            "I", "X", "Y", "Z", "H", "S", "T", "CNOT", "CZ", "SWAP", "dephasing(0.3)",
            "amplitude-damping(0.3)", "depolarizing(0.7)",
        ] {
            let (ks, arity) = kraus(g).unwrap();
            let fp: Vec<String> = (0..arity).map(|i| format!("q{i}")).collect();
            let ch = QuantumChannel::unchecked(fp, ks, false).unwrap();
            assert!(ch.validate(1e-12).ok, "{g}");
        }
    }

    #[test]
    fn amplitude_damping_completeness() {
        // K0^dag K0 + K1^dag K1 = diag(1, 1-g) + diag(0, g) = I.
        let ch = QuantumChannel::unchecked(vec!["q".into()], amplitude_damping(0.3), false).unwrap();
        let r = ch.validate(1e-9);
        assert!(r.ok && r.max_deviation < 1e-15);
    }

    #[test]
    fn half_identity_is_rejected() {
        let ch = QuantumChannel::unchecked(vec!["q".into()], vec![pauli_i() * c(0.5, 0.0)], false)
            .unwrap();
        let r = ch.validate(1e-9);
        assert!(!r.ok);
        assert!((r.max_deviation - 0.75).abs() < 1e-12);
        assert!(QuantumChannel::new(vec!["q".into()], vec![pauli_i() * c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn hzh_is_x() {
        let hzh = hadamard() * pauli_z() * hadamard();
        assert!(super::super::max_norm_diff(&hzh, &pauli_x()) < 1e-12);
    }

    #[test]
    fn bad_names_and_arity() {
        assert!(kraus("nope").is_err());
        assert!(kraus("dephasing").is_err());
        assert!(kraus("dephasing(2)").is_err());
        assert!(gate("CNOT", &["a"]).is_err());
    }
}
