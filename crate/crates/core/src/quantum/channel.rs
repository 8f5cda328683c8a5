use serde::Serialize;

use super::{c, Matrix, QuantumError, DEFAULT_TOL};

/// A completely positive map given by Kraus operators acting on an ordered
/// list of quantum variables (the footprint).
///
/// A channel with `postselect` set is a single measurement outcome: its Kraus
/// operators are applied and the result is renormalized by its trace. Such a
/// channel is not trace preserving on its own; the outcome probability is
/// carried by the surrounding probabilistic choice.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    footprint: Vec<String>,
    kraus: Vec<Matrix>,
    postselect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub ok: bool,
    /// Max-norm distance between `sum K_i^dag K_i` and the identity.
    pub max_deviation: f64,
    pub postselected: bool,
}

impl QuantumChannel {
    /// Builds a trace-preserving channel. Fails when the Kraus operators do not
    /// satisfy completeness within [`DEFAULT_TOL`].
    pub fn new(footprint: Vec<String>, kraus: Vec<Matrix>) -> Result<Self, QuantumError> {
        let ch = Self::unchecked(footprint, kraus, false)?;
        let report = ch.validate(DEFAULT_TOL);
        if !report.ok {
            return Err(QuantumError::NotTracePreserving(report.max_deviation));
        }
        Ok(ch)
    }

    pub fn unitary(footprint: Vec<String>, u: Matrix) -> Result<Self, QuantumError> {
        Self::new(footprint, vec![u])
    }

    /// A measurement outcome: the (unnormalized) Kraus operators of one branch.
    pub fn outcome(footprint: Vec<String>, kraus: Vec<Matrix>) -> Result<Self, QuantumError> {
        Self::unchecked(footprint, kraus, true)
    }

    /// Builds a channel after shape checks only; completeness is not enforced.
    pub fn unchecked(
        footprint: Vec<String>,
        kraus: Vec<Matrix>,
        postselect: bool,
    ) -> Result<Self, QuantumError> {
        if kraus.is_empty() {
            return Err(QuantumError::EmptyChannel);
        }
        for k in &kraus {
            if !k.is_square() {
                return Err(QuantumError::Shape {
                    rows: k.nrows(),
                    cols: k.ncols(),
                    expected: kraus[0].nrows(),
                });
            }
        }
        let n = kraus[0].nrows();
        if let Some(k) = kraus.iter().find(|k| k.nrows() != n) {
            return Err(QuantumError::Shape {
                rows: k.nrows(),
                cols: k.ncols(),
                expected: n,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &footprint {
            if !seen.insert(v) {
                return Err(QuantumError::DuplicateVariable(v.clone()));
            }
        }
        Ok(Self {
            footprint,
            kraus,
            postselect,
        })
    }

    pub fn footprint(&self) -> &[String] {
        &self.footprint
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn is_postselected(&self) -> bool {
        self.postselect
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        !self.postselect && self.kraus.len() == 1 && self.validate(tol).ok
    }

    /// Adjoint of a unitary channel.
    pub fn adjoint(&self) -> Self {
        Self {
            footprint: self.footprint.clone(),
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
            postselect: self.postselect,
        }
    }

    /// Checks completeness of the Kraus list.
    pub fn validate(&self, tol: f64) -> ChannelReport {
        let n = self.kraus[0].nrows();
        let mut sum = Matrix::zeros(n, n);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        let id = Matrix::identity(n, n);
        let dev = super::max_norm_diff(&sum, &id);
        ChannelReport {
            ok: dev <= tol,
            max_deviation: dev,
            postselected: self.postselect,
        }
    }

    /// Projector onto one computational basis state of the footprint.
    pub fn basis_projector(footprint: Vec<String>, dims: &[usize], outcome: &[usize]) -> Result<Self, QuantumError> {
        let n: usize = dims.iter().product();
        let idx = super::register::index_of(outcome, dims);
        let mut p = Matrix::zeros(n, n);
        p[(idx, idx)] = c(1.0, 0.0);
        Self::outcome(footprint, vec![p])
    }
}
