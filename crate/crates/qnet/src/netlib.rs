//! Network-level constructions: direct coherent feedback, field-mediated
//! input-output systems, Markovian limits, static components and series
//! products.

use num_complex::Complex64;

use crate::dmatrix::{DMatrix, Generator};
use crate::dring::DNum;
use crate::error::{Error, Result};
use crate::sfg::{NodeId, SignalFlowGraph};
use crate::tfcore::{system_m, MemoryKernel, Sign, TransferMap, COND_LIMIT};

/// Closed-loop blocks of a plant directly coupled to a controller, mapping
/// the free evolutions `(x0, w0)` to the interacting signals `(x, w)`.
#[derive(Debug, Clone)]
pub struct ClosedLoopBlocks {
    pub xx: TransferMap,
    pub xw: TransferMap,
    pub wx: TransferMap,
    pub ww: TransferMap,
}

/// Direct coherent feedback between an `n`-mode plant `P` and an `m`-mode
/// controller `Q` with interaction `C` (an `m x n` matrix; the plant sees
/// `-C\flat`).
///
/// The blocks are `[[Lx^-1, Lx^-1 Gxw], [Lw^-1 Gwx, Lw^-1]]` with loop
/// differences `Lx = I - Gxw Gwx` and `Lw = I - Gwx Gxw`.
pub fn direct_feedback_closed_loop(
    p: &Generator,
    q: &Generator,
    c: &DMatrix,
) -> Result<ClosedLoopBlocks> {
    let (n, m) = (p.modes(), q.modes());
    if c.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            context: "direct feedback interaction",
            expected: format!("{m}x{n}"),
            got: format!("{}x{}", c.rows(), c.cols()),
        });
    }
    let gxw = TransferMap::resolvent(DMatrix::identity(n), p.matrix().clone(), c.flat())?;
    let gwx = TransferMap::resolvent(
        DMatrix::identity(m).scale(-1.0),
        q.matrix().clone(),
        c.clone(),
    )?;
    let lx = &TransferMap::identity(n) - &(&gxw * &gwx);
    let lw = &TransferMap::identity(m) - &(&gwx * &gxw);
    let lx_inv = lx.inverse()?;
    let lw_inv = lw.inverse()?;
    Ok(ClosedLoopBlocks {
        xx: lx_inv.clone(),
        xw: &lx_inv * &gxw,
        wx: &lw_inv * &gwx,
        ww: lw_inv,
    })
}

/// The two-node feedback loop as a signal flow graph with explicit free
/// injections; returns `(graph, x0, w0, x, w)`.
pub fn direct_feedback_graph(
    p: &Generator,
    q: &Generator,
    c: &DMatrix,
) -> Result<(SignalFlowGraph, NodeId, NodeId, NodeId, NodeId)> {
    let (n, m) = (p.modes(), q.modes());
    let gxw = TransferMap::resolvent(DMatrix::identity(n), p.matrix().clone(), c.flat())?;
    let gwx = TransferMap::resolvent(
        DMatrix::identity(m).scale(-1.0),
        q.matrix().clone(),
        c.clone(),
    )?;
    let mut g = SignalFlowGraph::new();
    let x0 = g.add_node("x0", n)?;
    let w0 = g.add_node("w0", m)?;
    let x = g.add_node("x", n)?;
    let w = g.add_node("w", m)?;
    g.add_arc(x0, x, TransferMap::identity(n))?;
    g.add_arc(w0, w, TransferMap::identity(m))?;
    g.add_arc(w, x, gxw)?;
    g.add_arc(x, w, gwx)?;
    Ok((g, x0, w0, x, w))
}

/// One bath mode of the two-bath decoherence example: detuning `omega`,
/// real couplings `g1`, `g2` to the two channels and a real bath-bath
/// coupling `f` (zero without feedback).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBathMode {
    pub omega: f64,
    pub g1: f64,
    pub g2: f64,
    pub f: f64,
}

/// Single-mode plant coupled to two multimode baths, optionally with direct
/// bath-bath coupling.
///
/// Couplings are restricted to real amplitudes; the displayed decoherence
/// sums hold verbatim in that case.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBathModel {
    pub omega0: f64,
    pub modes: Vec<TwoBathMode>,
}

impl TwoBathModel {
    fn plant_inverse(&self) -> TransferMap {
        // s e - i omega0 as the inverse of the plant resolvent
        let r = TransferMap::resolvent(
            DMatrix::identity(1),
            DMatrix::scalar(DNum::I.scale(self.omega0)),
            DMatrix::identity(1),
        )
        .expect("scalar resolvent");
        r.inverse().expect("square")
    }

    /// The decoherence spectrum `D(s)`: each bath mode contributes
    /// `(g1^2 + g2^2) (s e - i w)^-1`, with the denominator shifted by
    /// `f^2 (s e - i w)^-1` when the baths are coupled.
    pub fn decoherence(&self) -> TransferMap {
        let mut terms = Vec::new();
        for mode in &self.modes {
            let weight = mode.g1 * mode.g1 + mode.g2 * mode.g2;
            if weight == 0.0 {
                continue;
            }
            let r = TransferMap::resolvent(
                DMatrix::identity(1),
                DMatrix::scalar(DNum::I.scale(mode.omega)),
                DMatrix::identity(1),
            )
            .expect("scalar resolvent");
            let term = if mode.f == 0.0 {
                r
            } else {
                let shifted = &r.clone().inverse().expect("square")
                    + &r.scaled(DNum::real(mode.f * mode.f));
                shifted.inverse().expect("square")
            };
            terms.push(term.scaled(DNum::real(weight)));
        }
        if terms.is_empty() {
            TransferMap::zero(1, 1)
        } else {
            TransferMap::sum(terms).expect("scalar terms")
        }
    }

    /// Closed-loop gain from the free plant signal to the interacting one:
    /// `[s e - i omega0 + D(s)]^-1`.
    pub fn closed_loop(&self) -> TransferMap {
        (&self.plant_inverse() + &self.decoherence())
            .inverse()
            .expect("square")
    }

    /// The corresponding signal flow graph; returns `(graph, x0, x)`.
    pub fn flow_graph(&self) -> Result<(SignalFlowGraph, NodeId, NodeId)> {
        let m = self.modes.len();
        if m == 0 {
            return Err(Error::InvalidConfig("two-bath model needs at least one mode".into()));
        }
        let p = DMatrix::scalar(DNum::I.scale(self.omega0));
        let q = DMatrix::diagonal(
            &self
                .modes
                .iter()
                .map(|b| DNum::I.scale(b.omega))
                .collect::<Vec<_>>(),
        );
        let c1 = DMatrix::from_fn(m, 1, |r, _| DNum::real(self.modes[r].g1));
        let c2 = DMatrix::from_fn(m, 1, |r, _| DNum::real(self.modes[r].g2));
        let coupled = self.modes.iter().any(|b| b.f != 0.0);

        let mut g = SignalFlowGraph::new();
        let x0 = g.add_node("x0", 1)?;
        let x = g.add_node("x", 1)?;
        let w1 = g.add_node("w1", m)?;
        let w2 = g.add_node("w2", m)?;
        g.add_arc(x0, x, TransferMap::identity(1))?;
        g.add_arc(w1, x, TransferMap::resolvent(DMatrix::identity(1), p.clone(), c1.flat())?)?;
        g.add_arc(x, w1, TransferMap::resolvent(DMatrix::identity(m).scale(-1.0), q.clone(), c1)?)?;
        g.add_arc(w2, x, TransferMap::resolvent(DMatrix::identity(1), p.clone(), c2.flat())?)?;
        g.add_arc(x, w2, TransferMap::resolvent(DMatrix::identity(m).scale(-1.0), q.clone(), c2)?)?;
        if coupled {
            let f = DMatrix::diagonal(
                &self
                    .modes
                    .iter()
                    .map(|b| DNum::real(b.f))
                    .collect::<Vec<_>>(),
            );
            g.add_arc(w2, w1, TransferMap::resolvent(DMatrix::identity(m), q.clone(), f.flat())?)?;
            g.add_arc(w1, w2, TransferMap::resolvent(DMatrix::identity(m).scale(-1.0), q, f)?)?;
        }
        Ok((g, x0, x))
    }
}

/// One effective field coupled to the system: coupling matrix `D` (n modes
/// by k channels) and the bath correlation kernel for those channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub d: DMatrix,
    pub kernel: MemoryKernel,
}

/// System of `n` modes coupled to one or more effective fields.
#[derive(Debug, Clone, PartialEq)]
pub struct IOSystem {
    generator: Generator,
    couplings: Vec<Coupling>,
}

impl IOSystem {
    pub fn new(generator: Generator) -> Self {
        IOSystem {
            generator,
            couplings: Vec::new(),
        }
    }

    pub fn with_coupling(mut self, d: DMatrix, kernel: MemoryKernel) -> Result<Self> {
        if d.rows() != self.generator.modes() {
            return Err(Error::ShapeMismatch {
                context: "coupling matrix",
                expected: format!("{} rows", self.generator.modes()),
                got: format!("{} rows", d.rows()),
            });
        }
        if kernel.size() != d.cols() {
            return Err(Error::ShapeMismatch {
                context: "coupling kernel",
                expected: format!("size {}", d.cols()),
                got: format!("size {}", kernel.size()),
            });
        }
        self.couplings.push(Coupling { d, kernel });
        Ok(self)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    /// Total number of effective channels.
    pub fn channels(&self) -> usize {
        self.couplings.iter().map(|c| c.d.cols()).sum()
    }

    /// Input-output transfer function, dispatching on the coupling count.
    pub fn transfer(&self) -> Result<TransferMap> {
        match self.couplings.len() {
            0 => Err(Error::InvalidConfig("system has no coupling".into())),
            1 => io_transfer(self),
            _ => io_transfer_multi(self),
        }
    }

    fn stacked_coupling(&self) -> DMatrix {
        let parts: Vec<&DMatrix> = self.couplings.iter().map(|c| &c.d).collect();
        DMatrix::hcat(&parts)
    }

    fn block_kernel_half(&self, sign: Sign) -> TransferMap {
        let blocks: Vec<TransferMap> = self
            .couplings
            .iter()
            .map(|c| c.kernel.half_transform(sign))
            .collect();
        if blocks.len() == 1 {
            blocks.into_iter().next().unwrap()
        } else {
            TransferMap::block_diag(blocks).expect("nonempty")
        }
    }
}

/// Single-field transfer function `G = [I - N- M][I + N+ M]^-1`.
pub fn io_transfer(sys: &IOSystem) -> Result<TransferMap> {
    if sys.couplings.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "io_transfer needs exactly one coupling, system has {}",
            sys.couplings.len()
        )));
    }
    let coupling = &sys.couplings[0];
    let k = coupling.d.cols();
    let m = system_m(&sys.generator, &coupling.d)?;
    let n_plus = coupling.kernel.half_transform(Sign::Plus);
    let n_minus = coupling.kernel.half_transform(Sign::Minus);
    let identity = TransferMap::identity(k);
    let left = &identity - &(&n_minus * &m);
    let right = (&identity + &(&n_plus * &m)).inverse()?;
    Ok(&left * &right)
}

/// Multi-field transfer function with block resolvent and block-diagonal
/// kernel halves.
pub fn io_transfer_multi(sys: &IOSystem) -> Result<TransferMap> {
    if sys.couplings.is_empty() {
        return Err(Error::InvalidConfig("system has no coupling".into()));
    }
    let d = sys.stacked_coupling();
    let k = d.cols();
    let m = system_m(&sys.generator, &d)?;
    let n_plus = sys.block_kernel_half(Sign::Plus);
    let n_minus = sys.block_kernel_half(Sign::Minus);
    let identity = TransferMap::identity(k);
    let left = &identity - &(&n_minus * &m);
    let right = (&identity + &(&n_plus * &m)).inverse()?;
    Ok(&left * &right)
}

/// Alternate form `I - (N+ + N-)[I + M N+]^-1 M` used as a cross-check.
pub fn io_transfer_alt(sys: &IOSystem) -> Result<TransferMap> {
    if sys.couplings.is_empty() {
        return Err(Error::InvalidConfig("system has no coupling".into()));
    }
    let d = sys.stacked_coupling();
    let k = d.cols();
    let m = system_m(&sys.generator, &d)?;
    let n_plus = sys.block_kernel_half(Sign::Plus);
    let n_minus = sys.block_kernel_half(Sign::Minus);
    let identity = TransferMap::identity(k);
    let inner = (&identity + &(&m * &n_plus)).inverse()?;
    let correction = &(&(&n_plus + &n_minus) * &inner) * &m;
    Ok(&identity - &correction)
}

/// Commutator and unitarity defects behind the all-pass criterion.
#[derive(Debug, Clone)]
pub struct AllPassReport {
    pub max_comm_plus: f64,
    pub max_comm_minus: f64,
    pub max_comm_pm: f64,
    pub max_tilde_defect: f64,
    pub max_unitary_defect: f64,
    /// True when all commutators vanish below 1e-10, in which case the
    /// transfer function must be all-pass.
    pub conditions_hold: bool,
}

/// Evaluates the commutator conditions at `s_samples` and the flat-unitarity
/// defect on the imaginary axis at `omegas`.
pub fn all_pass_conditions(
    sys: &IOSystem,
    s_samples: &[Complex64],
    omegas: &[f64],
) -> Result<AllPassReport> {
    let d = sys.stacked_coupling();
    let m = system_m(&sys.generator, &d)?;
    let n_plus = sys.block_kernel_half(Sign::Plus);
    let n_minus = sys.block_kernel_half(Sign::Minus);
    let g = sys.transfer()?;
    let g_tilde = g.clone().tilde();
    let k = g.rows();
    let identity = DMatrix::identity(k);

    let comm = |a: &DMatrix, b: &DMatrix| (&(a * b) - &(b * a)).norm();
    let mut report = AllPassReport {
        max_comm_plus: 0.0,
        max_comm_minus: 0.0,
        max_comm_pm: 0.0,
        max_tilde_defect: 0.0,
        max_unitary_defect: 0.0,
        conditions_hold: false,
    };
    for &s in s_samples {
        let mv = m.eval(s)?;
        let np = n_plus.eval(s)?;
        let nm = n_minus.eval(s)?;
        report.max_comm_plus = report.max_comm_plus.max(comm(&np, &mv));
        report.max_comm_minus = report.max_comm_minus.max(comm(&nm, &mv));
        report.max_comm_pm = report.max_comm_pm.max(comm(&np, &nm));
        let defect = (&(&g_tilde.eval(s)? * &g.eval(s)?) - &identity).norm();
        report.max_tilde_defect = report.max_tilde_defect.max(defect);
    }
    for &w in omegas {
        let gv = g.eval(Complex64::new(0.0, w))?;
        let defect = (&(&gv.flat() * &gv) - &identity).norm();
        report.max_unitary_defect = report.max_unitary_defect.max(defect);
    }
    report.conditions_hold = report.max_comm_plus < 1e-10
        && report.max_comm_minus < 1e-10
        && report.max_comm_pm < 1e-10;
    Ok(report)
}

/// Coefficient matrices of the white-noise model recovered in the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhTriple {
    pub scattering: DMatrix,
    pub coupling: DMatrix,
    pub hamiltonian: DMatrix,
}

/// Markovian limit of the input-output relation for a flat kernel `N0`.
///
/// The transfer function is returned as the single resolvent
/// `I - D\flat (sI - P + D N0 D\flat / 2)^-1 D N0`, which is the closed
/// form of `[I - M N0/2][I + M N0/2]^-1` with the artificial plant pole
/// cancelled, so it is evaluable on the closed-loop poles' complement
/// (including `s = 0` for an undetuned cavity).
pub fn markovian_limit(
    p: &Generator,
    d: &DMatrix,
    n0: &DMatrix,
) -> Result<(TransferMap, SlhTriple)> {
    let n = p.modes();
    let k = d.cols();
    if d.rows() != n || n0.shape() != (k, k) {
        return Err(Error::ShapeMismatch {
            context: "markovian limit",
            expected: format!("D {n}xk, N0 kxk"),
            got: format!("D {}x{}, N0 {}x{}", d.rows(), d.cols(), n0.rows(), n0.cols()),
        });
    }
    if !n0.is_flat_hermitian(1e-10) {
        return Err(Error::InvalidConfig("N0 must be flat-Hermitian".into()));
    }
    let damping = (&(d * n0) * &d.flat()).scale(0.5);
    let dynamics = &p.matrix().clone() - &damping;
    let transfer = TransferMap::resolvent_with_feedthrough(
        -&d.flat(),
        dynamics,
        d * n0,
        DMatrix::identity(k),
    )?;
    let slh = SlhTriple {
        scattering: DMatrix::identity(k),
        coupling: d.flat(),
        hamiltonian: p.matrix().clone(),
    };
    Ok((transfer, slh))
}

/// Port selector for beam splitter blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitterPort {
    T1,
    R1,
    R2,
    T2,
}

/// Static mixing component with total matrix `[[T1, R1], [R2, T2]]`,
/// validated flat-unitary and complex-unitary (passive).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    t1: DMatrix,
    r1: DMatrix,
    r2: DMatrix,
    t2: DMatrix,
    total: DMatrix,
}

impl BeamSplitter {
    pub fn new(t1: DMatrix, r1: DMatrix, r2: DMatrix, t2: DMatrix) -> Result<Self> {
        let m1 = t1.rows();
        let m2 = t2.rows();
        if !t1.is_square()
            || !t2.is_square()
            || r1.shape() != (m1, m2)
            || r2.shape() != (m2, m1)
        {
            return Err(Error::ShapeMismatch {
                context: "beam splitter blocks",
                expected: format!("T1 {m1}x{m1}, R1 {m1}x{m2}, R2 {m2}x{m1}, T2 {m2}x{m2}"),
                got: format!(
                    "{:?}, {:?}, {:?}, {:?}",
                    t1.shape(),
                    r1.shape(),
                    r2.shape(),
                    t2.shape()
                ),
            });
        }
        let total = DMatrix::block2x2(&t1, &r1, &r2, &t2);
        let n = m1 + m2;
        let flat_defect = (&(&total.flat() * &total) - &DMatrix::identity(n)).norm();
        let unitary_defect = {
            let dd = total.to_doubled();
            (dd.adjoint() * &dd - crate::cmat::CMat::identity(2 * n, 2 * n)).norm()
        };
        let defect = flat_defect.max(unitary_defect);
        if defect > 1e-10 {
            return Err(Error::NotPassive { defect });
        }
        Ok(BeamSplitter { t1, r1, r2, t2, total })
    }

    pub fn block(&self, port: SplitterPort) -> &DMatrix {
        match port {
            SplitterPort::T1 => &self.t1,
            SplitterPort::R1 => &self.r1,
            SplitterPort::R2 => &self.r2,
            SplitterPort::T2 => &self.t2,
        }
    }

    pub fn total(&self) -> &DMatrix {
        &self.total
    }

    pub fn m1(&self) -> usize {
        self.t1.rows()
    }

    pub fn m2(&self) -> usize {
        self.t2.rows()
    }

    pub fn transfer_map(&self) -> TransferMap {
        TransferMap::constant(self.total.clone())
    }
}

/// Static network elements usable as arc gains.
#[derive(Debug, Clone)]
pub enum StaticComponent {
    Splitter(BeamSplitter),
    Delay { tau: f64, size: usize },
}

impl StaticComponent {
    pub fn delay(tau: f64, size: usize) -> Result<Self> {
        // validates tau >= 0
        TransferMap::delay(tau, size)?;
        Ok(StaticComponent::Delay { tau, size })
    }

    pub fn transfer_map(&self) -> TransferMap {
        match self {
            StaticComponent::Splitter(b) => b.transfer_map(),
            StaticComponent::Delay { tau, size } => {
                TransferMap::delay(*tau, *size).expect("validated")
            }
        }
    }
}

/// Dispersive delay: `diag(e^{-s tau_k})` across modes with distinct
/// propagation speeds.
pub fn delay_dispersive(taus: &[f64]) -> Result<TransferMap> {
    let blocks = taus
        .iter()
        .map(|&tau| TransferMap::delay(tau, 1))
        .collect::<Result<Vec<_>>>()?;
    TransferMap::block_diag(blocks)
}

/// Cascade of two field-coupled systems sharing one kernel:
/// `G = G2 * G1` in signal-flow order.
pub fn series_product(first: &IOSystem, second: &IOSystem) -> Result<TransferMap> {
    if first.couplings.len() != 1 || second.couplings.len() != 1 {
        return Err(Error::InvalidConfig(
            "series product is defined for single-field systems".into(),
        ));
    }
    if first.channels() != second.channels() {
        return Err(Error::ShapeMismatch {
            context: "series product",
            expected: format!("{} channels", first.channels()),
            got: format!("{} channels", second.channels()),
        });
    }
    if first.couplings[0].kernel != second.couplings[0].kernel {
        return Err(Error::KernelMismatch);
    }
    let g1 = io_transfer(first)?;
    let g2 = io_transfer(second)?;
    Ok(&g2 * &g1)
}

/// Cavity behind a beam splitter with a delayed return line.
#[derive(Debug, Clone)]
pub struct IndirectFeedback {
    pub graph: SignalFlowGraph,
    pub input: NodeId,
    pub output: NodeId,
    /// Gain from the open input port to the open output port by the matrix
    /// gain rule.
    pub riegle: TransferMap,
    /// The same gain in closed form,
    /// `r1 + t2 (e^{tau s} Ga^-1 - r2)^-1 t1`.
    pub closed_form: TransferMap,
}

/// Builds the indirect coherent feedback loop: input port `b1` splits into
/// the open output `c1` (gain `r1`) and the cavity drive `c2` (gain `t1`);
/// the cavity output `b2` returns through a delay into both splitter ports.
pub fn indirect_feedback_network(
    cavity: &IOSystem,
    splitter: &BeamSplitter,
    tau: f64,
) -> Result<IndirectFeedback> {
    if cavity.channels() != 1 {
        return Err(Error::InvalidConfig(
            "indirect feedback example needs a single-channel cavity".into(),
        ));
    }
    if splitter.m1() != 1 || splitter.m2() != 1 {
        return Err(Error::InvalidConfig(
            "indirect feedback example needs a two-port splitter".into(),
        ));
    }
    let ga = io_transfer(cavity)?;
    let delay = TransferMap::delay(tau, 1)?;
    let r1 = TransferMap::constant(splitter.block(SplitterPort::R1).clone());
    let t1 = TransferMap::constant(splitter.block(SplitterPort::T1).clone());
    let r2 = TransferMap::constant(splitter.block(SplitterPort::R2).clone());
    let t2 = TransferMap::constant(splitter.block(SplitterPort::T2).clone());

    let mut graph = SignalFlowGraph::new();
    let b1 = graph.add_node("b1", 1)?;
    let c1 = graph.add_node("c1", 1)?;
    let c2 = graph.add_node("c2", 1)?;
    let b2 = graph.add_node("b2", 1)?;
    graph.add_arc(b1, c1, r1)?;
    graph.add_arc(b1, c2, t1)?;
    graph.add_arc(b2, c1, &delay * &t2)?;
    graph.add_arc(b2, c2, &delay * &r2)?;
    graph.add_arc(c2, b2, ga.clone())?;
    let riegle = graph.gain_riegle(b1, c1)?;

    let r1m = splitter.block(SplitterPort::R1).clone();
    let t1m = splitter.block(SplitterPort::T1).clone();
    let r2m = splitter.block(SplitterPort::R2).clone();
    let t2m = splitter.block(SplitterPort::T2).clone();
    let closed_form = TransferMap::from_fn(1, 1, "indirect-feedback-closed-form", move |s| {
        let gav = ga.eval(s)?;
        let ga_inv = gav.try_inverse(COND_LIMIT).map_err(|e| match e {
            Error::IllConditioned { cond } => Error::SingularAt { s, cond },
            other => other,
        })?;
        let advanced = ga_inv.scale_left(DNum::scalar((s * tau).exp()));
        let inner = (&advanced - &r2m).try_inverse(COND_LIMIT).map_err(|e| match e {
            Error::IllConditioned { cond } => Error::SingularAt { s, cond },
            other => other,
        })?;
        Ok(&r1m + &(&(&t2m * &inner) * &t1m))
    });
    Ok(IndirectFeedback {
        graph,
        input: b1,
        output: c1,
        riegle,
        closed_form,
    })
}
