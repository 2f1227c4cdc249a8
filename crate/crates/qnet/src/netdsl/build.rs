//! Assembly of parsed network descriptions into analyzable objects.

use std::collections::BTreeMap;

use crate::dmatrix::Generator;
use crate::error::{Error, Result};
use crate::netlib::{BeamSplitter, IOSystem};
use crate::sfg::{NodeId, SignalFlowGraph};
use crate::tfcore::{MemoryKernel, TransferMap};

use super::ast::*;
use super::{ErrorCode, ParseError};

/// Graph and named objects produced from a validated description.
#[derive(Debug)]
pub struct BuiltNetwork {
    pub graph: SignalFlowGraph,
    pub systems: BTreeMap<String, IOSystem>,
    pub splitters: BTreeMap<String, BeamSplitter>,
    /// Query endpoints resolved to graph nodes, in declaration order.
    pub queries: Vec<(NodeId, NodeId)>,
}

fn kernel_for(couple: &CoupleDecl, decl: &KernelDecl) -> Result<MemoryKernel> {
    match &decl.form {
        KernelForm::Lorentzian { kappa, gamma } => {
            MemoryKernel::lorentzian(*kappa, *gamma, couple.d.cols())
        }
        KernelForm::Markov { n0 } => MemoryKernel::markov_delta(n0.clone()),
        KernelForm::ExpMode { e, q } => {
            MemoryKernel::exp_mode(e.clone(), Generator::new(q.clone())?)
        }
    }
}

/// Instantiates systems, splitters and the signal flow graph.
///
/// The input is assumed validated by [`parse_network`](super::parse_network);
/// residual semantic failures (a non-passive splitter, a singular
/// composition) are reported with the offending statement's span.
pub fn build_graph(spec: &NetworkSpec) -> Result<BuiltNetwork> {
    let mut systems = BTreeMap::new();
    for decl in &spec.systems {
        let generator = Generator::new(decl.p.clone()).map_err(|_| {
            ParseError::new(
                ErrorCode::ShapeMismatch,
                decl.span,
                format!("system `{}` has a P that is not skew flat-Hermitian", decl.name),
            )
        })?;
        systems.insert(decl.name.clone(), IOSystem::new(generator));
    }
    for couple in &spec.couples {
        let decl = spec.kernel(&couple.kernel).expect("validated");
        let kernel = kernel_for(couple, decl).map_err(|e| {
            Error::Parse(ParseError::new(
                ErrorCode::ShapeMismatch,
                couple.span,
                format!("cannot instantiate kernel `{}`: {e}", couple.kernel),
            ))
        })?;
        let sys = systems.remove(&couple.system).expect("validated");
        let sys = sys.with_coupling(couple.d.clone(), kernel).map_err(|e| {
            Error::Parse(ParseError::new(
                ErrorCode::ShapeMismatch,
                couple.span,
                format!("cannot couple `{}`: {e}", couple.system),
            ))
        })?;
        systems.insert(couple.system.clone(), sys);
    }

    let mut splitters = BTreeMap::new();
    for decl in &spec.splitters {
        let bs = BeamSplitter::new(
            decl.t1.clone(),
            decl.r1.clone(),
            decl.r2.clone(),
            decl.t2.clone(),
        )
        .map_err(|e| {
            Error::Parse(ParseError::new(
                ErrorCode::ShapeMismatch,
                decl.span,
                format!("splitter `{}` rejected: {e}", decl.name),
            ))
        })?;
        splitters.insert(decl.name.clone(), bs);
    }

    let mut graph = SignalFlowGraph::new();
    for node in &spec.nodes {
        graph.add_node(&node.name, node.width)?;
    }
    for arc in &spec.arcs {
        let to = graph.node(&arc.to)?;
        let from = graph.node(&arc.from)?;
        let mut current = graph.width(to);
        let mut factors = Vec::with_capacity(arc.terms.len());
        for term in &arc.terms {
            let factor = match &term.kind {
                GainTermKind::Matrix(m) => {
                    current = m.cols();
                    TransferMap::constant(m.clone())
                }
                GainTermKind::Io(name) => {
                    let sys = systems.get(name).expect("validated");
                    let tf = sys.transfer().map_err(|e| {
                        Error::Parse(ParseError::new(
                            ErrorCode::ShapeMismatch,
                            term.span,
                            format!("io({name}) is not available: {e}"),
                        ))
                    })?;
                    current = tf.cols();
                    tf
                }
                GainTermKind::Delay(name) => {
                    let decl = spec.delay(name).expect("validated");
                    TransferMap::delay(decl.tau, current)?
                }
                GainTermKind::Splitter(name, block) => {
                    let bs = splitters.get(name).expect("validated");
                    let port = match block {
                        SplitterBlock::T1 => crate::netlib::SplitterPort::T1,
                        SplitterBlock::R1 => crate::netlib::SplitterPort::R1,
                        SplitterBlock::R2 => crate::netlib::SplitterPort::R2,
                        SplitterBlock::T2 => crate::netlib::SplitterPort::T2,
                    };
                    let m = bs.block(port).clone();
                    current = m.cols();
                    TransferMap::constant(m)
                }
            };
            factors.push(factor);
        }
        let gain = TransferMap::product(factors).map_err(|e| {
            Error::Parse(ParseError::new(
                ErrorCode::ShapeMismatch,
                arc.span,
                format!("arc gain does not compose: {e}"),
            ))
        })?;
        graph.add_arc(from, to, gain).map_err(|e| {
            Error::Parse(ParseError::new(
                ErrorCode::ShapeMismatch,
                arc.span,
                format!("arc gain has the wrong shape: {e}"),
            ))
        })?;
    }

    let mut queries = Vec::new();
    for q in &spec.queries {
        queries.push((graph.node(&q.from)?, graph.node(&q.to)?));
    }

    Ok(BuiltNetwork {
        graph,
        systems,
        splitters,
        queries,
    })
}
