use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::register::{digits, index_of};
use super::{c, max_norm_diff, Matrix, QuantumChannel, QuantumError, QuantumRegister, DEFAULT_TOL};

/// Quantized density matrix: entries rounded to a grid of [`DEFAULT_TOL`].
pub type Fingerprint = Vec<i64>;

/// Density matrix over a named register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    register: QuantumRegister,
    rho: Matrix,
}

impl QuantumState {
    /// Validated constructor.
    pub fn from_density(register: QuantumRegister, rho: Matrix) -> Result<Self, QuantumError> {
        let st = Self::from_density_unchecked(register, rho)?;
        st.check(DEFAULT_TOL * 10.0)?;
        Ok(st)
    }

    pub(crate) fn from_density_unchecked(
        register: QuantumRegister,
        rho: Matrix,
    ) -> Result<Self, QuantumError> {
        let d = register.dimension();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(QuantumError::Shape {
                rows: rho.nrows(),
                cols: rho.ncols(),
                expected: d,
            });
        }
        Ok(Self { register, rho })
    }

    /// `|psi><psi|` for a (not necessarily normalized) amplitude vector.
    pub fn from_pure(register: QuantumRegister, amps: &[Complex64]) -> Result<Self, QuantumError> {
        let d = register.dimension();
        if amps.len() != d {
            return Err(QuantumError::Shape {
                rows: amps.len(),
                cols: 1,
                expected: d,
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < DEFAULT_TOL {
            return Err(QuantumError::InvalidState("zero vector".into()));
        }
        let v: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
        let rho = Matrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Ok(Self { register, rho })
    }

    /// Computational basis state; `levels[k]` is the level of the k-th variable.
    pub fn basis(register: QuantumRegister, levels: &[usize]) -> Result<Self, QuantumError> {
        let dims = register.dims();
        if levels.len() != dims.len() || levels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(QuantumError::InvalidState(format!(
                "basis levels {levels:?} do not fit dimensions {dims:?}"
            )));
        }
        let d = register.dimension();
        let mut rho = Matrix::zeros(d, d);
        let i = index_of(levels, &dims);
        rho[(i, i)] = c(1.0, 0.0);
        Ok(Self { register, rho })
    }

    pub fn zero(register: QuantumRegister) -> Self {
        let levels = vec![0; register.len()];
        Self::basis(register, &levels).expect("all-zero basis state always fits")
    }

    pub fn maximally_mixed(register: QuantumRegister) -> Self {
        let d = register.dimension();
        let rho = Matrix::identity(d, d) / c(d as f64, 0.0);
        Self { register, rho }
    }

    /// Tensor product; the registers are concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self, QuantumError> {
        let mut vars = self.register.vars().to_vec();
        vars.extend_from_slice(other.register.vars());
        let register = QuantumRegister::new(vars)?;
        Ok(Self {
            register,
            rho: self.rho.kronecker(&other.rho),
        })
    }

    pub fn register(&self) -> &QuantumRegister {
        &self.register
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn check(&self, tol: f64) -> Result<(), QuantumError> {
        let herm = max_norm_diff(&self.rho, &self.rho.adjoint());
        if herm > tol {
            return Err(QuantumError::InvalidState(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > tol {
            return Err(QuantumError::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(QuantumError::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.rho.nrows() == 1 {
            return self.rho[(0, 0)].re;
        }
        let h = (&self.rho + self.rho.adjoint()) * c(0.5, 0.0);
        SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_norm_diff(&self.rho, &self.rho.adjoint()) <= tol
    }

    /// Positions of the channel footprint inside this register.
    fn footprint_positions(&self, ch: &QuantumChannel) -> Result<Vec<usize>, QuantumError> {
        ch.footprint()
            .iter()
            .map(|v| self.register.position(v))
            .collect()
    }

    /// Lifts an operator on the footprint to the whole register.
    fn embed(&self, op: &Matrix, positions: &[usize]) -> Result<Matrix, QuantumError> {
        let dims = self.register.dims();
        let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let sub: usize = sub_dims.iter().product();
        if op.nrows() != sub {
            return Err(QuantumError::Shape {
                rows: op.nrows(),
                cols: op.ncols(),
                expected: sub,
            });
        }
        let d = self.register.dimension();
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !positions.contains(k)).collect();
        let split = |i: usize| {
            let dg = digits(i, &dims);
            let f: Vec<usize> = positions.iter().map(|&p| dg[p]).collect();
            let r: Vec<usize> = rest.iter().map(|&p| dg[p]).collect();
            (index_of(&f, &sub_dims), r)
        };
        let parts: Vec<(usize, Vec<usize>)> = (0..d).map(split).collect();
        Ok(Matrix::from_fn(d, d, |i, j| {
            let (fi, ri) = &parts[i];
            let (fj, rj) = &parts[j];
            if ri == rj {
                op[(*fi, *fj)]
            } else {
                c(0.0, 0.0)
            }
        }))
    }

    /// `sum_i K_i rho K_i^dag` with every `K_i` lifted onto the footprint.
    /// Postselected channels are renormalized by the outcome probability.
    pub fn apply_channel(&self, ch: &QuantumChannel) -> Result<Self, QuantumError> {
        let positions = self.footprint_positions(ch)?;
        let d = self.register.dimension();
        let mut out = Matrix::zeros(d, d);
        for k in ch.kraus() {
            let full = self.embed(k, &positions)?;
            out += &full * &self.rho * full.adjoint();
        }
        if ch.is_postselected() {
            let p = out.trace().re;
            if p <= DEFAULT_TOL {
                return Err(QuantumError::ImpossibleOutcome(p));
            }
            out /= c(p, 0.0);
        }
        Ok(Self {
            register: self.register.clone(),
            rho: out,
        })
    }

    /// Probability of a postselected outcome (trace of the unnormalized image).
    pub fn outcome_probability(&self, ch: &QuantumChannel) -> Result<f64, QuantumError> {
        let positions = self.footprint_positions(ch)?;
        let mut p = 0.0;
        for k in ch.kraus() {
            let full = self.embed(k, &positions)?;
            p += (&full * &self.rho * full.adjoint()).trace().re;
        }
        Ok(p)
    }

    /// Partial trace over every variable not in `public`. The result keeps the
    /// register order of the retained variables.
    pub fn restrict_public<S: AsRef<str>>(&self, public: &[S]) -> Result<Self, QuantumError> {
        let wanted: BTreeSet<&str> = public.iter().map(|s| s.as_ref()).collect();
        for w in &wanted {
            self.register.position(w)?;
        }
        let keep: Vec<usize> = (0..self.register.len())
            .filter(|&k| wanted.contains(self.register.vars()[k].0.as_str()))
            .collect();
        if keep.len() == self.register.len() {
            return Ok(self.clone());
        }
        let dims = self.register.dims();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let dk: usize = kept_dims.iter().product();
        let mut out = Matrix::zeros(dk, dk);
        let d = self.register.dimension();
        for i in 0..d {
            let di = digits(i, &dims);
            for j in 0..d {
                let dj = digits(j, &dims);
                let traced_equal = (0..dims.len())
                    .filter(|k| !keep.contains(k))
                    .all(|k| di[k] == dj[k]);
                if !traced_equal {
                    continue;
                }
                let ki: Vec<usize> = keep.iter().map(|&k| di[k]).collect();
                let kj: Vec<usize> = keep.iter().map(|&k| dj[k]).collect();
                out[(index_of(&ki, &kept_dims), index_of(&kj, &kept_dims))] += self.rho[(i, j)];
            }
        }
        Ok(Self {
            register: self.register.select(&keep),
            rho: out,
        })
    }

    /// Max-norm equality within `tol`.
    pub fn state_equal(&self, other: &Self, tol: f64) -> Result<bool, QuantumError> {
        if self.register != other.register {
            return Err(QuantumError::RegisterMismatch);
        }
        Ok(max_norm_diff(&self.rho, &other.rho) <= tol)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let q = |x: f64| (x / DEFAULT_TOL).round() as i64;
        self.rho.iter().flat_map(|z| [q(z.re), q(z.im)]).collect()
    }

    /// Short hex digest of the fingerprint, stable across runs.
    pub fn fingerprint_hex(&self) -> String {
        // FNV-1a over the quantized entries.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.fingerprint() {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}
