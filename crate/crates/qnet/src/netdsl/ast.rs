//! Syntax tree of a network description.

use crate::dmatrix::DMatrix;

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDecl {
    pub name: String,
    pub modes: usize,
    pub p: DMatrix,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    Lorentzian { kappa: f64, gamma: f64 },
    Markov { n0: DMatrix },
    ExpMode { e: DMatrix, q: DMatrix },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDecl {
    pub name: String,
    pub form: KernelForm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupleDecl {
    pub system: String,
    pub system_span: Span,
    pub kernel: String,
    pub kernel_span: Span,
    pub d: DMatrix,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitterDecl {
    pub name: String,
    pub t1: DMatrix,
    pub r1: DMatrix,
    pub r2: DMatrix,
    pub t2: DMatrix,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayDecl {
    pub name: String,
    pub tau: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub width: usize,
    pub span: Span,
}

/// Selector into a splitter declaration, as written in `sp(id.t1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitterBlock {
    T1,
    R1,
    R2,
    T2,
}

impl SplitterBlock {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitterBlock::T1 => "t1",
            SplitterBlock::R1 => "r1",
            SplitterBlock::R2 => "r2",
            SplitterBlock::T2 => "t2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainTermKind {
    Matrix(DMatrix),
    Io(String),
    Delay(String),
    Splitter(String, SplitterBlock),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainTerm {
    pub kind: GainTermKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcDecl {
    pub from: String,
    pub from_span: Span,
    pub to: String,
    pub to_span: Span,
    pub terms: Vec<GainTerm>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainQuery {
    pub from: String,
    pub from_span: Span,
    pub to: String,
    pub to_span: Span,
    pub span: Span,
}

/// A parsed and validated network description.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkSpec {
    pub systems: Vec<SystemDecl>,
    pub kernels: Vec<KernelDecl>,
    pub couples: Vec<CoupleDecl>,
    pub splitters: Vec<SplitterDecl>,
    pub delays: Vec<DelayDecl>,
    pub nodes: Vec<NodeDecl>,
    pub arcs: Vec<ArcDecl>,
    pub queries: Vec<GainQuery>,
}

impl NetworkSpec {
    pub fn system(&self, name: &str) -> Option<&SystemDecl> {
        self.systems.iter().find(|s| s.name == name)
    }

    pub fn kernel(&self, name: &str) -> Option<&KernelDecl> {
        self.kernels.iter().find(|k| k.name == name)
    }

    pub fn splitter(&self, name: &str) -> Option<&SplitterDecl> {
        self.splitters.iter().find(|s| s.name == name)
    }

    pub fn delay(&self, name: &str) -> Option<&DelayDecl> {
        self.delays.iter().find(|d| d.name == name)
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Channel count of a system: the summed column counts of its
    /// couplings.
    pub fn system_channels(&self, name: &str) -> usize {
        self.couples
            .iter()
            .filter(|c| c.system == name)
            .map(|c| c.d.cols())
            .sum()
    }

    /// Content equality ignoring source locations, via the canonical text
    /// form.
    pub fn structurally_eq(&self, other: &NetworkSpec) -> bool {
        self.to_text() == other.to_text()
    }
}
