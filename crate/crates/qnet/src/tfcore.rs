//! Composable, s-evaluable transfer maps: resolvents, memory-kernel
//! half-transforms, delays, pointwise algebra and the tilde involution.
//!
//! The Laplace variable enters every primitive through the diagonal
//! embedding `s -> [[s, 0], [0, s*]]`, so evaluation at any complex `s`
//! stays inside the ring and returns an honest [`DMatrix`]. On the real
//! axis this agrees with plain scalar substitution; elsewhere it is the
//! ring-algebraic continuation that keeps all flat/tilde symmetries exact.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dmatrix::{DMatrix, Generator};
use crate::dring::DNum;
use crate::error::{Error, Result};

/// Conditioning threshold beyond which an evaluation counts as singular.
pub const COND_LIMIT: f64 = 1e12;

/// Sign selector for the two half-axis kernel transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Bath correlation kernel `N(t)` with closed-form half-transforms.
#[derive(Debug, Clone, PartialEq)]
pub enum MemoryKernel {
    /// `N(t) = (kappa gamma / 2) e^{-gamma |t|} I_k` from a Lorentzian
    /// coupling spectrum.
    Lorentzian { kappa: f64, gamma: f64, size: usize },
    /// White-noise limit `N(t) = N0 delta(t)`; `N0` must be flat-Hermitian.
    MarkovDelta { n0: DMatrix },
    /// Finite-mode kernel `N(t) = E\flat e^{Qt} E`.
    ExpMode { coupling: DMatrix, generator: Generator },
}

impl MemoryKernel {
    pub fn lorentzian(kappa: f64, gamma: f64, size: usize) -> Result<Self> {
        if kappa <= 0.0 || gamma <= 0.0 || size == 0 {
            return Err(Error::InvalidConfig(format!(
                "lorentzian kernel needs kappa > 0, gamma > 0, size >= 1 (got {kappa}, {gamma}, {size})"
            )));
        }
        Ok(MemoryKernel::Lorentzian { kappa, gamma, size })
    }

    pub fn markov_delta(n0: DMatrix) -> Result<Self> {
        if !n0.is_flat_hermitian(1e-10) {
            return Err(Error::InvalidConfig(
                "markov kernel matrix must be flat-Hermitian".into(),
            ));
        }
        Ok(MemoryKernel::MarkovDelta { n0 })
    }

    pub fn exp_mode(coupling: DMatrix, generator: Generator) -> Result<Self> {
        if coupling.rows() != generator.modes() {
            return Err(Error::ShapeMismatch {
                context: "exp_mode kernel",
                expected: format!("{} rows", generator.modes()),
                got: format!("{} rows", coupling.rows()),
            });
        }
        Ok(MemoryKernel::ExpMode { coupling, generator })
    }

    /// Channel count of the kernel.
    pub fn size(&self) -> usize {
        match self {
            MemoryKernel::Lorentzian { size, .. } => *size,
            MemoryKernel::MarkovDelta { n0 } => n0.rows(),
            MemoryKernel::ExpMode { coupling, .. } => coupling.cols(),
        }
    }

    /// `N(t)` at a real time. Unsupported for the distributional Markov
    /// kernel.
    pub fn time_value(&self, t: f64) -> Result<DMatrix> {
        match self {
            MemoryKernel::Lorentzian { kappa, gamma, size } => {
                let amp = 0.5 * kappa * gamma * (-gamma * t.abs()).exp();
                Ok(DMatrix::identity(*size).scale(amp))
            }
            MemoryKernel::MarkovDelta { .. } => {
                Err(Error::Unsupported("time values of a delta kernel"))
            }
            MemoryKernel::ExpMode { coupling, generator } => {
                let e_flat = coupling.flat();
                Ok(&(&e_flat * &generator.matrix().exp(t)) * coupling)
            }
        }
    }

    /// The half-axis transform `N_+` or `N_-` as a transfer map.
    pub fn half_transform(&self, sign: Sign) -> TransferMap {
        let k = self.size();
        TransferMap {
            rows: k,
            cols: k,
            body: Arc::new(Body::KernelHalf {
                kernel: self.clone(),
                sign,
            }),
        }
    }

    fn eval_half(&self, sign: Sign, s: Complex64) -> Result<DMatrix> {
        match self {
            MemoryKernel::Lorentzian { kappa, gamma, size } => {
                let denom = match sign {
                    Sign::Plus => s + gamma,
                    Sign::Minus => -s + gamma,
                };
                if denom.norm() < 1e-300 {
                    return Err(Error::SingularAt { s, cond: f64::INFINITY });
                }
                let value = Complex64::new(0.5 * kappa * gamma, 0.0) / denom;
                Ok(DMatrix::identity(*size).scale_left(DNum::scalar(value)))
            }
            MemoryKernel::MarkovDelta { n0 } => Ok(n0.scale(0.5)),
            MemoryKernel::ExpMode { coupling, generator } => {
                let n = generator.modes();
                let shifted = &DMatrix::scalar_identity(s, n) - generator.matrix();
                let resolvent = shifted
                    .try_inverse(COND_LIMIT)
                    .map_err(|e| singular_at(e, s))?;
                let value = &(&coupling.flat() * &resolvent) * coupling;
                Ok(match sign {
                    Sign::Plus => value,
                    Sign::Minus => -&value,
                })
            }
        }
    }
}

impl DMatrix {
    /// `n x n` diagonal matrix of the embedded scalar `s`.
    pub fn scalar_identity(s: Complex64, n: usize) -> DMatrix {
        DMatrix::diagonal(&vec![DNum::scalar(s); n])
    }
}

type CustomFn = Arc<dyn Fn(Complex64) -> Result<DMatrix> + Send + Sync>;

enum Body {
    Constant(DMatrix),
    Resolvent {
        output: DMatrix,
        dynamics: DMatrix,
        input: DMatrix,
        feedthrough: DMatrix,
    },
    KernelHalf {
        kernel: MemoryKernel,
        sign: Sign,
    },
    Delay {
        tau: f64,
        size: usize,
    },
    Sum(Vec<TransferMap>),
    Product(Vec<TransferMap>),
    Inverse(TransferMap),
    Tilde(TransferMap),
    BlockDiag(Vec<TransferMap>),
    Custom {
        label: String,
        f: CustomFn,
    },
}

/// Matrix-valued function of the Laplace variable.
///
/// Cheap to clone; evaluation is pure, so sweeps may evaluate grid points
/// concurrently.
#[derive(Clone)]
pub struct TransferMap {
    rows: usize,
    cols: usize,
    body: Arc<Body>,
}

fn singular_at(e: Error, s: Complex64) -> Error {
    match e {
        Error::IllConditioned { cond } => Error::SingularAt { s, cond },
        other => other,
    }
}

impl TransferMap {
    pub fn constant(m: DMatrix) -> Self {
        TransferMap {
            rows: m.rows(),
            cols: m.cols(),
            body: Arc::new(Body::Constant(m)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n))
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    /// `s -> feedthrough + output (sI - dynamics)^-1 input`.
    pub fn resolvent_with_feedthrough(
        output: DMatrix,
        dynamics: DMatrix,
        input: DMatrix,
        feedthrough: DMatrix,
    ) -> Result<Self> {
        let n = dynamics.rows();
        if !dynamics.is_square()
            || output.cols() != n
            || input.rows() != n
            || feedthrough.shape() != (output.rows(), input.cols())
        {
            return Err(Error::ShapeMismatch {
                context: "resolvent",
                expected: format!("out x {n}, {n} x {n}, {n} x in"),
                got: format!(
                    "{:?}, {:?}, {:?}, {:?}",
                    output.shape(),
                    dynamics.shape(),
                    input.shape(),
                    feedthrough.shape()
                ),
            });
        }
        Ok(TransferMap {
            rows: output.rows(),
            cols: input.cols(),
            body: Arc::new(Body::Resolvent {
                output,
                dynamics,
                input,
                feedthrough,
            }),
        })
    }

    pub fn resolvent(output: DMatrix, dynamics: DMatrix, input: DMatrix) -> Result<Self> {
        let feed = DMatrix::zeros(output.rows(), input.cols());
        Self::resolvent_with_feedthrough(output, dynamics, input, feed)
    }

    /// `s -> e^{-s tau} I`.
    pub fn delay(tau: f64, size: usize) -> Result<Self> {
        if tau < 0.0 {
            return Err(Error::InvalidConfig(format!("negative delay {tau}")));
        }
        Ok(TransferMap {
            rows: size,
            cols: size,
            body: Arc::new(Body::Delay { tau, size }),
        })
    }

    pub fn sum(terms: Vec<TransferMap>) -> Result<Self> {
        let first = terms.first().ok_or(Error::InvalidConfig("empty sum".into()))?;
        let (rows, cols) = (first.rows, first.cols);
        for t in &terms {
            if (t.rows, t.cols) != (rows, cols) {
                return Err(Error::ShapeMismatch {
                    context: "transfer-map sum",
                    expected: format!("{rows}x{cols}"),
                    got: format!("{}x{}", t.rows, t.cols),
                });
            }
        }
        Ok(TransferMap {
            rows,
            cols,
            body: Arc::new(Body::Sum(terms)),
        })
    }

    /// Matrix product, leftmost factor applied last.
    pub fn product(factors: Vec<TransferMap>) -> Result<Self> {
        let first = factors.first().ok_or(Error::InvalidConfig("empty product".into()))?;
        let rows = first.rows;
        let mut inner = first.cols;
        for f in factors.iter().skip(1) {
            if f.rows != inner {
                return Err(Error::ShapeMismatch {
                    context: "transfer-map product",
                    expected: format!("{inner} rows"),
                    got: format!("{} rows", f.rows),
                });
            }
            inner = f.cols;
        }
        Ok(TransferMap {
            rows,
            cols: inner,
            body: Arc::new(Body::Product(factors)),
        })
    }

    pub fn inverse(self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch {
                context: "transfer-map inverse",
                expected: "square".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        Ok(TransferMap {
            rows: self.rows,
            cols: self.cols,
            body: Arc::new(Body::Inverse(self)),
        })
    }

    /// The involution `G~(s) = G(-s*)^\flat`.
    pub fn tilde(self) -> Self {
        TransferMap {
            rows: self.cols,
            cols: self.rows,
            body: Arc::new(Body::Tilde(self)),
        }
    }

    pub fn block_diag(blocks: Vec<TransferMap>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidConfig("empty block diagonal".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        Ok(TransferMap {
            rows,
            cols,
            body: Arc::new(Body::BlockDiag(blocks)),
        })
    }

    /// Wraps an arbitrary evaluation closure.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        label: impl Into<String>,
        f: impl Fn(Complex64) -> Result<DMatrix> + Send + Sync + 'static,
    ) -> Self {
        TransferMap {
            rows,
            cols,
            body: Arc::new(Body::Custom {
                label: label.into(),
                f: Arc::new(f),
            }),
        }
    }

    /// Left-multiplies by a constant ring element.
    pub fn scaled(&self, p: DNum) -> Self {
        let scale = TransferMap::constant(DMatrix::diagonal(&vec![p; self.rows]));
        TransferMap::product(vec![scale, self.clone()]).expect("square scale factor")
    }

    pub fn neg(&self) -> Self {
        self.scaled(-DNum::E)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Recursive evaluation at a point of the complex plane.
    pub fn eval(&self, s: Complex64) -> Result<DMatrix> {
        match &*self.body {
            Body::Constant(m) => Ok(m.clone()),
            Body::Resolvent {
                output,
                dynamics,
                input,
                feedthrough,
            } => {
                let n = dynamics.rows();
                let shifted = &DMatrix::scalar_identity(s, n) - dynamics;
                let inv = shifted
                    .try_inverse(COND_LIMIT)
                    .map_err(|e| singular_at(e, s))?;
                Ok(&(&(output * &inv) * input) + feedthrough)
            }
            Body::KernelHalf { kernel, sign } => kernel.eval_half(*sign, s),
            Body::Delay { tau, size } => {
                let z = (-s * *tau).exp();
                Ok(DMatrix::identity(*size).scale_left(DNum::scalar(z)))
            }
            Body::Sum(terms) => {
                let mut acc = terms[0].eval(s)?;
                for t in &terms[1..] {
                    acc = &acc + &t.eval(s)?;
                }
                Ok(acc)
            }
            Body::Product(factors) => {
                let mut acc = factors[0].eval(s)?;
                for f in &factors[1..] {
                    acc = &acc * &f.eval(s)?;
                }
                Ok(acc)
            }
            Body::Inverse(inner) => inner
                .eval(s)?
                .try_inverse(COND_LIMIT)
                .map_err(|e| singular_at(e, s)),
            Body::Tilde(inner) => Ok(inner.eval(-s.conj())?.flat()),
            Body::BlockDiag(blocks) => {
                let parts = blocks
                    .iter()
                    .map(|b| b.eval(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DMatrix::block_diag(&parts.iter().collect::<Vec<_>>()))
            }
            Body::Custom { f, .. } => f(s),
        }
    }
}

impl fmt::Debug for TransferMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.body {
            Body::Constant(_) => "constant",
            Body::Resolvent { .. } => "resolvent",
            Body::KernelHalf { .. } => "kernel-half",
            Body::Delay { .. } => "delay",
            Body::Sum(_) => "sum",
            Body::Product(_) => "product",
            Body::Inverse(_) => "inverse",
            Body::Tilde(_) => "tilde",
            Body::BlockDiag(_) => "block-diag",
            Body::Custom { label, .. } => label,
        };
        write!(f, "TransferMap[{} {}x{}]", kind, self.rows, self.cols)
    }
}

impl std::ops::Add for &TransferMap {
    type Output = TransferMap;
    fn add(self, other: &TransferMap) -> TransferMap {
        TransferMap::sum(vec![self.clone(), other.clone()]).expect("shape mismatch in sum")
    }
}

impl std::ops::Sub for &TransferMap {
    type Output = TransferMap;
    fn sub(self, other: &TransferMap) -> TransferMap {
        TransferMap::sum(vec![self.clone(), other.neg()]).expect("shape mismatch in difference")
    }
}

impl std::ops::Mul for &TransferMap {
    type Output = TransferMap;
    fn mul(self, other: &TransferMap) -> TransferMap {
        TransferMap::product(vec![self.clone(), other.clone()]).expect("shape mismatch in product")
    }
}

/// Builds the skew flat-Hermitian generator from quadratic-Hamiltonian
/// coefficients.
///
/// `omegas[j]` is the detuning of mode `j` (entering as `omega_j * i` on the
/// diagonal), `alphas` holds beam-splitter couplings `(k, j, alpha)` with
/// `k < j`, and `betas` holds squeezing terms `(k, j, beta)` with `k <= j`.
pub fn generator_from_hamiltonian(
    omegas: &[f64],
    alphas: &[(usize, usize, Complex64)],
    betas: &[(usize, usize, Complex64)],
) -> Result<Generator> {
    let n = omegas.len();
    let mut p = DMatrix::zeros(n, n);
    for (j, w) in omegas.iter().enumerate() {
        p[(j, j)] = p[(j, j)] + DNum::I.scale(*w);
    }
    for &(k, j, alpha) in alphas {
        if k >= j || j >= n {
            return Err(Error::InvalidConfig(format!(
                "alpha coupling index ({k}, {j}) out of range for {n} modes"
            )));
        }
        p[(k, j)] = p[(k, j)] + DNum::scalar(alpha);
        p[(j, k)] = p[(j, k)] + DNum::scalar(-alpha.conj());
    }
    for &(k, j, beta) in betas {
        if k > j || j >= n {
            return Err(Error::InvalidConfig(format!(
                "beta coupling index ({k}, {j}) out of range for {n} modes"
            )));
        }
        let q = DNum::from_complex(Complex64::new(0.0, 0.0), beta);
        p[(k, j)] = p[(k, j)] + q;
        if k < j {
            p[(j, k)] = p[(j, k)] + q;
        }
    }
    Generator::new(p)
}

/// `M(s) = D\flat (sI - P)^-1 D`, the system resolvent seen through its
/// coupling.
pub fn system_m(p: &Generator, d: &DMatrix) -> Result<TransferMap> {
    if d.rows() != p.modes() {
        return Err(Error::ShapeMismatch {
            context: "system_m",
            expected: format!("{} rows", p.modes()),
            got: format!("{} rows", d.rows()),
        });
    }
    TransferMap::resolvent(d.flat(), p.matrix().clone(), d.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_s(rng: &mut StdRng) -> Complex64 {
        c(rng.gen_range(0.3..2.5), rng.gen_range(-3.0..3.0))
    }

    fn random_skew(rng: &mut StdRng, n: usize) -> DMatrix {
        let mut p = DMatrix::zeros(n, n);
        for j in 0..n {
            p[(j, j)] = DNum::new(
                0.0,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            for k in j + 1..n {
                let q = DNum::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                p[(j, k)] = q;
                p[(k, j)] = -q.flat();
            }
        }
        p
    }

    #[test]
    fn constant_and_resolvent_values() {
        let id = TransferMap::identity(2);
        assert!(id.eval(c(1.3, -0.4)).unwrap().approx_eq(&DMatrix::identity(2), 1e-15));

        // M(s) = (s e - omega i)^-1 at omega = 1, s = 2.
        let p = Generator::new(DMatrix::scalar(DNum::I)).unwrap();
        let m = system_m(&p, &DMatrix::identity(1)).unwrap();
        let v = m.eval(c(2.0, 0.0)).unwrap();
        assert!(v[(0, 0)].approx_eq(&DNum::scalar(c(0.4, 0.2)), 1e-14));
    }

    #[test]
    fn delay_values() {
        let d = TransferMap::delay(0.5, 2).unwrap();
        let v = d.eval(c(0.0, std::f64::consts::PI)).unwrap();
        let expect = DMatrix::identity(2).scale_left(DNum::scalar(c(0.0, -1.0)));
        assert!(v.approx_eq(&expect, 1e-14));
        let zero = TransferMap::delay(0.0, 3).unwrap();
        assert!(zero.eval(c(0.7, 1.1)).unwrap().approx_eq(&DMatrix::identity(3), 1e-15));
        assert!(TransferMap::delay(-1.0, 1).is_err());
    }

    #[test]
    fn lorentzian_kernel_values() {
        let k = MemoryKernel::lorentzian(1.0, 2.0, 1).unwrap();
        assert!(k.time_value(0.0).unwrap()[(0, 0)].approx_eq(&DNum::E, 1e-15));
        let np = k.half_transform(Sign::Plus);
        let v = np.eval(c(1.0, 0.0)).unwrap();
        assert!(v[(0, 0)].approx_eq(&DNum::real(1.0 / 3.0), 1e-14));
        // evenness: N(t)^flat = N(-t)
        for &t in &[-5.0, -1.3, 0.2, 2.0, 5.0] {
            let a = k.time_value(t).unwrap().flat();
            let b = k.time_value(-t).unwrap();
            assert!(a.approx_eq(&b, 1e-13));
        }
    }

    #[test]
    fn markov_kernel_values() {
        let k = MemoryKernel::markov_delta(DMatrix::identity(2)).unwrap();
        let v = k.half_transform(Sign::Plus).eval(c(0.3, 1.0)).unwrap();
        assert!(v.approx_eq(&DMatrix::identity(2).scale(0.5), 1e-15));
        let v = k.half_transform(Sign::Minus).eval(c(-2.0, 0.1)).unwrap();
        assert!(v.approx_eq(&DMatrix::identity(2).scale(0.5), 1e-15));
        assert!(matches!(k.time_value(1.0), Err(Error::Unsupported(_))));
        // non flat-Hermitian rejected
        assert!(MemoryKernel::markov_delta(DMatrix::scalar(DNum::I)).is_err());
    }

    #[test]
    fn exp_mode_kernel_matches_quadrature() {
        // Oscillator bath, passive couplings: integrate N(t) e^{-st} on the
        // positive axis and compare with the closed form.
        let q = Generator::new(DMatrix::diagonal(&[
            DNum::I.scale(0.7),
            DNum::I.scale(-1.4),
        ]))
        .unwrap();
        let e = DMatrix::from_row_slice(
            2,
            1,
            &[DNum::scalar(c(0.8, 0.3)), DNum::scalar(c(-0.5, 0.6))],
        );
        let kernel = MemoryKernel::exp_mode(e, q).unwrap();
        let s = c(1.5, 0.4);

        let horizon = 40.0;
        let steps = 40_000usize;
        let dt = horizon / steps as f64;
        let mut acc = DMatrix::zeros(1, 1);
        for i in 0..=steps {
            let t = i as f64 * dt;
            // Simpson weights
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let sample = kernel
                .time_value(t)
                .unwrap()
                .scale_right(DNum::scalar((-s * t).exp()));
            acc = &acc + &sample.scale(w * dt / 3.0);
        }
        let closed = kernel.half_transform(Sign::Plus).eval(s).unwrap();
        assert!(
            acc.approx_eq(&closed, 1e-8),
            "quadrature {acc} vs closed {closed}"
        );
        let minus = kernel.half_transform(Sign::Minus).eval(s).unwrap();
        assert!(minus.approx_eq(&(-&closed), 1e-12));
    }

    #[test]
    fn exp_mode_squeezing_kernel_at_real_s() {
        // Growing kernel from a squeezed bath mode; the transform converges
        // for real s beyond the growth rate.
        let sigma = 0.6;
        let q = Generator::new(DMatrix::scalar(DNum::K.scale(sigma))).unwrap();
        let e = DMatrix::scalar(DNum::new(0.4, -0.2, 0.5, 0.1));
        let kernel = MemoryKernel::exp_mode(e, q).unwrap();
        let s = c(sigma + 2.0, 0.0);

        let horizon = 30.0;
        let steps = 30_000usize;
        let dt = horizon / steps as f64;
        let mut acc = DMatrix::zeros(1, 1);
        for i in 0..=steps {
            let t = i as f64 * dt;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let sample = kernel
                .time_value(t)
                .unwrap()
                .scale_right(DNum::scalar((-s * t).exp()));
            acc = &acc + &sample.scale(w * dt / 3.0);
        }
        let closed = kernel.half_transform(Sign::Plus).eval(s).unwrap();
        assert!(acc.approx_eq(&closed, 1e-8), "quadrature {acc} vs closed {closed}");
    }

    #[test]
    fn exp_mode_commutator_kernel_identity() {
        let mut rng = StdRng::seed_from_u64(61);
        let q = Generator::new(random_skew(&mut rng, 2)).unwrap();
        let e = DMatrix::from_fn(2, 2, |_, _| {
            DNum::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        });
        let kernel = MemoryKernel::exp_mode(e.clone(), q.clone()).unwrap();
        for _ in 0..10 {
            let t = rng.gen_range(-2.0..2.0);
            let t2 = rng.gen_range(-2.0..2.0);
            let lhs = &(&e.flat() * &(&q.matrix().exp(t) * &q.matrix().exp(-t2))) * &e;
            let rhs = kernel.time_value(t - t2).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-10));
            // evenness under flat conjugation
            let even = kernel.time_value(t).unwrap().flat();
            assert!(even.approx_eq(&kernel.time_value(-t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn evaluation_is_algebra_homomorphic() {
        let mut rng = StdRng::seed_from_u64(67);
        let p = Generator::new(random_skew(&mut rng, 2)).unwrap();
        let d = DMatrix::from_fn(2, 2, |_, _| {
            DNum::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        });
        let m = system_m(&p, &d).unwrap();
        let konst = TransferMap::constant(DMatrix::identity(2).scale(0.3));
        for _ in 0..20 {
            let s = random_s(&mut rng);
            let sum = (&m + &konst).eval(s).unwrap();
            assert!(sum.approx_eq(&(&m.eval(s).unwrap() + &konst.eval(s).unwrap()), 1e-12));
            let prod = (&m * &konst).eval(s).unwrap();
            assert!(prod.approx_eq(&(&m.eval(s).unwrap() * &konst.eval(s).unwrap()), 1e-12));
            let inv = m.clone().inverse().unwrap().eval(s).unwrap();
            assert!(inv.approx_eq(&m.eval(s).unwrap().try_inverse(1e12).unwrap(), 1e-12));
        }
    }

    #[test]
    fn tilde_symmetries() {
        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..10 {
            let p = Generator::new(random_skew(&mut rng, 2)).unwrap();
            let d = DMatrix::from_fn(2, 1, |_, _| {
                DNum::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            });
            let m = system_m(&p, &d).unwrap();
            let mt = m.clone().tilde();
            for _ in 0..5 {
                let s = random_s(&mut rng);
                let lhs = mt.eval(s).unwrap();
                let rhs = -&m.eval(s).unwrap();
                assert!(lhs.approx_eq(&rhs, 1e-12), "M~ != -M at {s}");
            }
        }

        let k = MemoryKernel::lorentzian(1.0, 2.0, 1).unwrap();
        let np = k.half_transform(Sign::Plus);
        let nm = k.half_transform(Sign::Minus);
        let npt = np.clone().tilde();
        let mut rng = StdRng::seed_from_u64(73);
        for _ in 0..10 {
            let s = random_s(&mut rng);
            assert!(npt.eval(s).unwrap().approx_eq(&nm.eval(s).unwrap(), 1e-13));
        }

        let id = TransferMap::identity(2);
        let s = c(0.4, 1.9);
        assert!(id.clone().tilde().eval(s).unwrap().approx_eq(&DMatrix::identity(2), 1e-15));
    }

    #[test]
    fn generator_from_hamiltonian_cases() {
        let g = generator_from_hamiltonian(&[1.5], &[], &[]).unwrap();
        assert!(g.matrix()[(0, 0)].approx_eq(&DNum::I.scale(1.5), 1e-15));

        // single-mode squeezing: beta = i sigma gives P = sigma k
        let sigma = 0.8;
        let g = generator_from_hamiltonian(&[0.0], &[], &[(0, 0, c(0.0, sigma))]).unwrap();
        assert!(g.matrix()[(0, 0)].approx_eq(&DNum::K.scale(sigma), 1e-15));

        let g = generator_from_hamiltonian(&[0.3, 0.9, -0.2], &[], &[]).unwrap();
        assert!(g.matrix().is_skew_flat_hermitian(1e-12));
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert!(g.matrix()[(j, k)].is_zero(0.0));
                }
            }
        }

        let mut rng = StdRng::seed_from_u64(79);
        for _ in 0..20 {
            let alphas: Vec<_> = (0..2)
                .map(|_| (0usize, rng.gen_range(1..3usize), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let betas: Vec<_> = (0..2)
                .map(|_| {
                    let k = rng.gen_range(0..3usize);
                    let j = rng.gen_range(k..3usize);
                    (k, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect();
            let g = generator_from_hamiltonian(&[0.1, -0.4, 0.7], &alphas, &betas).unwrap();
            assert!(g.matrix().is_skew_flat_hermitian(1e-12));
        }
    }

    #[test]
    fn system_m_shapes_and_values() {
        let p = Generator::new(DMatrix::scalar(DNum::I.scale(0.9))).unwrap();
        let zero = system_m(&p, &DMatrix::zeros(1, 2)).unwrap();
        let v = zero.eval(c(1.0, 0.5)).unwrap();
        assert!(v.approx_eq(&DMatrix::zeros(2, 2), 1e-15));

        // two identical unit couplings
        let d = DMatrix::from_row_slice(1, 2, &[DNum::E, DNum::E]);
        let m = system_m(&p, &d).unwrap();
        let s = c(1.2, -0.3);
        let v = m.eval(s).unwrap();
        let expect = DNum::scalar((s - c(0.0, 0.9)).inv());
        for r in 0..2 {
            for cc in 0..2 {
                assert!(v[(r, cc)].approx_eq(&expect, 1e-13));
            }
        }
    }
}
