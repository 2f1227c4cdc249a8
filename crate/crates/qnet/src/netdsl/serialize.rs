//! Canonical text form of a network description.

use std::fmt::Write;

use crate::dmatrix::DMatrix;

use super::ast::*;

fn matrix_literal(m: &DMatrix) -> String {
    let mut out = String::from("[");
    for r in 0..m.rows() {
        if r > 0 {
            out.push_str("; ");
        }
        for c in 0..m.cols() {
            if c > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}", m[(r, c)]);
        }
    }
    out.push(']');
    out
}

impl NetworkSpec {
    /// Serializes to the canonical form: statements grouped by kind, in
    /// declaration order. Parsing the output reproduces the same canonical
    /// form, which is what the round-trip tests rely on.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.systems {
            let _ = writeln!(
                out,
                "system {} modes {} P {}",
                s.name,
                s.modes,
                matrix_literal(&s.p)
            );
        }
        for k in &self.kernels {
            match &k.form {
                KernelForm::Lorentzian { kappa, gamma } => {
                    let _ = writeln!(out, "kernel {} lorentzian kappa={kappa} gamma={gamma}", k.name);
                }
                KernelForm::Markov { n0 } => {
                    let _ = writeln!(out, "kernel {} markov n0={}", k.name, matrix_literal(n0));
                }
                KernelForm::ExpMode { e, q } => {
                    let _ = writeln!(
                        out,
                        "kernel {} expmode E={} Q={}",
                        k.name,
                        matrix_literal(e),
                        matrix_literal(q)
                    );
                }
            }
        }
        for c in &self.couples {
            let _ = writeln!(
                out,
                "couple {} {} D={}",
                c.system,
                c.kernel,
                matrix_literal(&c.d)
            );
        }
        for s in &self.splitters {
            let _ = writeln!(
                out,
                "splitter {} t1={} r1={} r2={} t2={}",
                s.name,
                matrix_literal(&s.t1),
                matrix_literal(&s.r1),
                matrix_literal(&s.r2),
                matrix_literal(&s.t2)
            );
        }
        for d in &self.delays {
            let _ = writeln!(out, "delay {} tau={}", d.name, d.tau);
        }
        for n in &self.nodes {
            let _ = writeln!(out, "node {} width {}", n.name, n.width);
        }
        for a in &self.arcs {
            let terms: Vec<String> = a
                .terms
                .iter()
                .map(|t| match &t.kind {
                    GainTermKind::Matrix(m) => matrix_literal(m),
                    GainTermKind::Io(name) => format!("io({name})"),
                    GainTermKind::Delay(name) => format!("delay({name})"),
                    GainTermKind::Splitter(name, block) => {
                        format!("sp({name}.{})", block.as_str())
                    }
                })
                .collect();
            let _ = writeln!(out, "arc {} -> {} gain {}", a.from, a.to, terms.join(" * "));
        }
        for q in &self.queries {
            let _ = writeln!(out, "query gain from {} to {}", q.from, q.to);
        }
        out
    }
}
