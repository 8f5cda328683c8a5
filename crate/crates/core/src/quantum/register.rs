use std::collections::BTreeSet;

use super::QuantumError;

/// Largest total dimension accepted by [`QuantumRegister::new`].
pub const MAX_DIMENSION: usize = 256;

/// Ordered list of named quantum variables. The first variable is the most
/// significant digit of the computational-basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantumRegister {
    vars: Vec<(String, usize)>,
}

impl QuantumRegister {
    pub fn new(vars: Vec<(String, usize)>) -> Result<Self, QuantumError> {
        let mut seen = BTreeSet::new();
        let mut total: usize = 1;
        for (name, dim) in &vars {
            if !seen.insert(name.as_str()) {
                return Err(QuantumError::DuplicateVariable(name.clone()));
            }
            if *dim < 2 {
                return Err(QuantumError::BadDimension {
                    name: name.clone(),
                    dim: *dim,
                });
            }
            total = total.saturating_mul(*dim);
            if total > MAX_DIMENSION {
                return Err(QuantumError::TooLarge(total));
            }
        }
        Ok(Self { vars })
    }

    pub fn qubits<S: AsRef<str>>(names: &[S]) -> Result<Self, QuantumError> {
        Self::new(names.iter().map(|n| (n.as_ref().to_string(), 2)).collect())
    }

    /// The empty register (dimension 1), used for purely classical sessions.
    pub fn trivial() -> Self {
        Self { vars: Vec::new() }
    }

    pub fn vars(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vars.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, name: &str) -> Result<usize, QuantumError> {
        self.vars
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| QuantumError::UnknownVariable(name.to_string()))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vars.iter().map(|(_, d)| *d).collect()
    }

    /// Sub-register made of the given positions, in the given order.
    pub(crate) fn select(&self, positions: &[usize]) -> Self {
        Self {
            vars: positions.iter().map(|&p| self.vars[p].clone()).collect(),
        }
    }
}

/// Mixed-radix digits of `index`, most significant first.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub(crate) fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&d, &n)| acc * n + d)
}
