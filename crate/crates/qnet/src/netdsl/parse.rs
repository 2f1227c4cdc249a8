//! Line-oriented recursive-descent parser with spanned diagnostics.

use num_complex::Complex64;

use crate::dmatrix::DMatrix;
use crate::dring::DNum;

use super::ast::*;
use super::{ErrorCode, ParseError, Span};

type PResult<T> = std::result::Result<T, ParseError>;

struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(line: usize, text: &str) -> Self {
        Cursor {
            line,
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn span_from(&self, start: usize) -> Span {
        Span::new(self.line, start + 1, self.pos.saturating_sub(start).max(1))
    }

    fn here(&self) -> Span {
        Span::new(self.line, self.pos + 1, 1)
    }

    fn error(&self, code: ErrorCode, msg: impl Into<String>) -> ParseError {
        ParseError::new(code, self.here(), msg)
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn expect_end(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(ErrorCode::Syntax, "unexpected trailing input"))
        }
    }

    fn expect_char(&mut self, c: char) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(ErrorCode::Syntax, format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.pos += 1;
            }
            _ => return Err(self.error(ErrorCode::Syntax, "expected an identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        Ok((word, self.span_from(start)))
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let (word, span) = self.ident()?;
        if word == kw {
            Ok(())
        } else {
            Err(ParseError::new(
                ErrorCode::Syntax,
                span,
                format!("expected keyword `{kw}`, found `{word}`"),
            ))
        }
    }

    fn number(&mut self) -> PResult<(f64, Span)> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.pos += 1;
        }
        let mut digits = 0;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
            digits += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.error(ErrorCode::InvalidNumber, "expected a number"));
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            let mut exp_digits = 0;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.error(ErrorCode::InvalidNumber, "missing exponent digits"));
            }
        }
        let span = self.span_from(start);
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(ErrorCode::InvalidNumber, span, "unreadable number"))?;
        if !value.is_finite() {
            return Err(ParseError::new(
                ErrorCode::InvalidNumber,
                span,
                "number overflows a double",
            ));
        }
        Ok((value, span))
    }

    fn integer(&mut self) -> PResult<(usize, Span)> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error(ErrorCode::InvalidNumber, "expected an integer"));
        }
        let span = self.span_from(start);
        let text: String = self.chars[start..self.pos].iter().collect();
        let value = text
            .parse()
            .map_err(|_| ParseError::new(ErrorCode::InvalidNumber, span, "integer out of range"))?;
        Ok((value, span))
    }

    /// `key=<...>` introducer.
    fn key(&mut self, name: &str) -> PResult<()> {
        let (word, span) = self.ident()?;
        if word != name {
            return Err(ParseError::new(
                ErrorCode::Syntax,
                span,
                format!("expected `{name}=`, found `{word}`"),
            ));
        }
        self.expect_char('=')
    }

    /// `d(a,b,c,d)` or `c(are,aim,bre,bim)`.
    fn dnum(&mut self) -> PResult<DNum> {
        let (word, span) = self.ident()?;
        if word != "d" && word != "c" {
            return Err(ParseError::new(
                ErrorCode::Syntax,
                span,
                "entries are written d(a,b,c,d) or c(are,aim,bre,bim)",
            ));
        }
        self.expect_char('(')?;
        let mut vals = [0.0; 4];
        for (i, slot) in vals.iter_mut().enumerate() {
            if i > 0 {
                self.expect_char(',')?;
            }
            *slot = self.number()?.0;
        }
        self.expect_char(')')?;
        Ok(if word == "d" {
            DNum::new(vals[0], vals[1], vals[2], vals[3])
        } else {
            DNum::from_complex(
                Complex64::new(vals[0], vals[1]),
                Complex64::new(vals[2], vals[3]),
            )
        })
    }

    /// `[ entry, entry ; entry, entry ]`.
    fn dmatrix(&mut self) -> PResult<DMatrix> {
        self.skip_ws();
        let start = self.pos;
        self.expect_char('[')?;
        let mut rows: Vec<Vec<DNum>> = vec![Vec::new()];
        loop {
            rows.last_mut().unwrap().push(self.dnum()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                }
                Some(';') => {
                    self.pos += 1;
                    rows.push(Vec::new());
                }
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error(ErrorCode::Syntax, "expected `,`, `;` or `]`")),
            }
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                self.span_from(start),
                "matrix rows have different lengths",
            ));
        }
        let flat: Vec<DNum> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
    }

    fn gain_term(&mut self) -> PResult<GainTerm> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('[') {
            let m = self.dmatrix()?;
            return Ok(GainTerm {
                kind: GainTermKind::Matrix(m),
                span: self.span_from(start),
            });
        }
        let (word, span) = self.ident()?;
        match word.as_str() {
            "io" => {
                self.expect_char('(')?;
                let (name, _) = self.ident()?;
                self.expect_char(')')?;
                Ok(GainTerm {
                    kind: GainTermKind::Io(name),
                    span: self.span_from(start),
                })
            }
            "delay" => {
                self.expect_char('(')?;
                let (name, _) = self.ident()?;
                self.expect_char(')')?;
                Ok(GainTerm {
                    kind: GainTermKind::Delay(name),
                    span: self.span_from(start),
                })
            }
            "sp" => {
                self.expect_char('(')?;
                let (name, _) = self.ident()?;
                self.expect_char('.')?;
                let (block, bspan) = self.ident()?;
                let block = match block.as_str() {
                    "t1" => SplitterBlock::T1,
                    "r1" => SplitterBlock::R1,
                    "r2" => SplitterBlock::R2,
                    "t2" => SplitterBlock::T2,
                    other => {
                        return Err(ParseError::new(
                            ErrorCode::Syntax,
                            bspan,
                            format!("unknown splitter block `{other}` (expected t1, r1, r2 or t2)"),
                        ))
                    }
                };
                self.expect_char(')')?;
                Ok(GainTerm {
                    kind: GainTermKind::Splitter(name, block),
                    span: self.span_from(start),
                })
            }
            other => Err(ParseError::new(
                ErrorCode::Syntax,
                span,
                format!("unknown gain term `{other}` (expected a matrix, io(..), delay(..) or sp(..))"),
            )),
        }
    }
}

/// Parses a `.qn` network description and validates identifiers and shapes.
pub fn parse_network(text: &str) -> PResult<NetworkSpec> {
    let mut spec = NetworkSpec::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(cut) => &raw_line[..cut],
            None => raw_line,
        };
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line_no, line);
        let (word, span) = cur.ident()?;
        match word.as_str() {
            "system" => {
                let (name, _) = cur.ident()?;
                cur.keyword("modes")?;
                let (modes, _) = cur.integer()?;
                cur.keyword("P")?;
                let p = cur.dmatrix()?;
                cur.expect_end()?;
                spec.systems.push(SystemDecl { name, modes, p, span });
            }
            "kernel" => {
                let (name, _) = cur.ident()?;
                let (variant, vspan) = cur.ident()?;
                let form = match variant.as_str() {
                    "lorentzian" => {
                        cur.key("kappa")?;
                        let (kappa, _) = cur.number()?;
                        cur.key("gamma")?;
                        let (gamma, _) = cur.number()?;
                        KernelForm::Lorentzian { kappa, gamma }
                    }
                    "markov" => {
                        cur.key("n0")?;
                        KernelForm::Markov { n0: cur.dmatrix()? }
                    }
                    "expmode" => {
                        cur.key("E")?;
                        let e = cur.dmatrix()?;
                        cur.key("Q")?;
                        let q = cur.dmatrix()?;
                        KernelForm::ExpMode { e, q }
                    }
                    other => {
                        return Err(ParseError::new(
                            ErrorCode::Syntax,
                            vspan,
                            format!("unknown kernel `{other}` (expected lorentzian, markov or expmode)"),
                        ))
                    }
                };
                cur.expect_end()?;
                spec.kernels.push(KernelDecl { name, form, span });
            }
            "couple" => {
                let (system, system_span) = cur.ident()?;
                let (kernel, kernel_span) = cur.ident()?;
                cur.key("D")?;
                let d = cur.dmatrix()?;
                cur.expect_end()?;
                spec.couples.push(CoupleDecl {
                    system,
                    system_span,
                    kernel,
                    kernel_span,
                    d,
                    span,
                });
            }
            "splitter" => {
                let (name, _) = cur.ident()?;
                cur.key("t1")?;
                let t1 = cur.dmatrix()?;
                cur.key("r1")?;
                let r1 = cur.dmatrix()?;
                cur.key("r2")?;
                let r2 = cur.dmatrix()?;
                cur.key("t2")?;
                let t2 = cur.dmatrix()?;
                cur.expect_end()?;
                spec.splitters.push(SplitterDecl { name, t1, r1, r2, t2, span });
            }
            "delay" => {
                let (name, _) = cur.ident()?;
                cur.key("tau")?;
                let (tau, tau_span) = cur.number()?;
                cur.expect_end()?;
                if tau < 0.0 {
                    return Err(ParseError::new(
                        ErrorCode::InvalidNumber,
                        tau_span,
                        "delay must be nonnegative",
                    ));
                }
                spec.delays.push(DelayDecl { name, tau, span });
            }
            "node" => {
                let (name, _) = cur.ident()?;
                cur.keyword("width")?;
                let (width, wspan) = cur.integer()?;
                cur.expect_end()?;
                if width == 0 {
                    return Err(ParseError::new(
                        ErrorCode::InvalidNumber,
                        wspan,
                        "node width must be at least 1",
                    ));
                }
                spec.nodes.push(NodeDecl { name, width, span });
            }
            "arc" => {
                let (from, from_span) = cur.ident()?;
                cur.expect_char('-')?;
                if cur.bump() != Some('>') {
                    return Err(cur.error(ErrorCode::Syntax, "expected `->`"));
                }
                let (to, to_span) = cur.ident()?;
                cur.keyword("gain")?;
                let mut terms = vec![cur.gain_term()?];
                loop {
                    cur.skip_ws();
                    if cur.peek() == Some('*') {
                        cur.pos += 1;
                        terms.push(cur.gain_term()?);
                    } else {
                        break;
                    }
                }
                cur.expect_end()?;
                spec.arcs.push(ArcDecl {
                    from,
                    from_span,
                    to,
                    to_span,
                    terms,
                    span,
                });
            }
            "query" => {
                cur.keyword("gain")?;
                cur.keyword("from")?;
                let (from, from_span) = cur.ident()?;
                cur.keyword("to")?;
                let (to, to_span) = cur.ident()?;
                cur.expect_end()?;
                spec.queries.push(GainQuery {
                    from,
                    from_span,
                    to,
                    to_span,
                    span,
                });
            }
            other => {
                return Err(ParseError::new(
                    ErrorCode::Syntax,
                    span,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
    }
    validate(&spec)?;
    Ok(spec)
}

/// Parses a bare ring-element literal, e.g. `d(1,0,0,0)`.
pub fn parse_dnum(text: &str) -> PResult<DNum> {
    let mut cur = Cursor::new(1, text);
    let value = cur.dnum()?;
    cur.expect_end()?;
    Ok(value)
}

/// Parses a bare matrix literal, e.g. `[d(1,0,0,0); d(0,1,0,0)]`.
pub fn parse_dmatrix(text: &str) -> PResult<DMatrix> {
    let mut cur = Cursor::new(1, text);
    let value = cur.dmatrix()?;
    cur.expect_end()?;
    Ok(value)
}

fn duplicate_check<'a>(
    names: impl Iterator<Item = (&'a str, Span)>,
    what: &str,
) -> PResult<()> {
    let mut seen: Vec<&str> = Vec::new();
    for (name, span) in names {
        if seen.contains(&name) {
            return Err(ParseError::new(
                ErrorCode::DuplicateIdentifier,
                span,
                format!("{what} `{name}` is declared twice"),
            ));
        }
        seen.push(name);
    }
    Ok(())
}

fn validate(spec: &NetworkSpec) -> PResult<()> {
    duplicate_check(
        spec.systems.iter().map(|s| (s.name.as_str(), s.span)),
        "system",
    )?;
    duplicate_check(
        spec.kernels.iter().map(|k| (k.name.as_str(), k.span)),
        "kernel",
    )?;
    duplicate_check(
        spec.splitters.iter().map(|s| (s.name.as_str(), s.span)),
        "splitter",
    )?;
    duplicate_check(spec.delays.iter().map(|d| (d.name.as_str(), d.span)), "delay")?;
    duplicate_check(spec.nodes.iter().map(|n| (n.name.as_str(), n.span)), "node")?;

    for sys in &spec.systems {
        if sys.p.shape() != (sys.modes, sys.modes) {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                sys.span,
                format!(
                    "system `{}` declares {} modes but P is {}x{}",
                    sys.name,
                    sys.modes,
                    sys.p.rows(),
                    sys.p.cols()
                ),
            ));
        }
        if !sys.p.is_skew_flat_hermitian(1e-12) {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                sys.span,
                format!("system `{}` has a P that is not skew flat-Hermitian", sys.name),
            ));
        }
    }

    for kernel in &spec.kernels {
        match &kernel.form {
            KernelForm::Lorentzian { kappa, gamma } => {
                if *kappa <= 0.0 || *gamma <= 0.0 {
                    return Err(ParseError::new(
                        ErrorCode::InvalidNumber,
                        kernel.span,
                        "lorentzian kernel needs kappa > 0 and gamma > 0",
                    ));
                }
            }
            KernelForm::Markov { n0 } => {
                if !n0.is_square() {
                    return Err(ParseError::new(
                        ErrorCode::ShapeMismatch,
                        kernel.span,
                        "markov kernel matrix must be square",
                    ));
                }
                if !n0.is_flat_hermitian(1e-10) {
                    return Err(ParseError::new(
                        ErrorCode::ShapeMismatch,
                        kernel.span,
                        "markov kernel matrix must be flat-Hermitian",
                    ));
                }
            }
            KernelForm::ExpMode { e, q } => {
                if !q.is_square() || e.rows() != q.rows() {
                    return Err(ParseError::new(
                        ErrorCode::ShapeMismatch,
                        kernel.span,
                        "expmode kernel needs square Q and E with matching rows",
                    ));
                }
                if !q.is_skew_flat_hermitian(1e-12) {
                    return Err(ParseError::new(
                        ErrorCode::ShapeMismatch,
                        kernel.span,
                        "expmode kernel Q must be skew flat-Hermitian",
                    ));
                }
            }
        }
    }

    for couple in &spec.couples {
        let sys = spec.system(&couple.system).ok_or_else(|| {
            ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                couple.system_span,
                format!("unknown system `{}`", couple.system),
            )
        })?;
        let kernel = spec.kernel(&couple.kernel).ok_or_else(|| {
            ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                couple.kernel_span,
                format!("unknown kernel `{}`", couple.kernel),
            )
        })?;
        if couple.d.rows() != sys.modes {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                couple.span,
                format!(
                    "coupling matrix has {} rows but `{}` has {} modes",
                    couple.d.rows(),
                    sys.name,
                    sys.modes
                ),
            ));
        }
        let width = couple.d.cols();
        match &kernel.form {
            KernelForm::Markov { n0 } if n0.rows() != width => {
                return Err(ParseError::new(
                    ErrorCode::ShapeMismatch,
                    couple.span,
                    format!("kernel `{}` has size {}, coupling has {width} channels", kernel.name, n0.rows()),
                ));
            }
            KernelForm::ExpMode { e, .. } if e.cols() != width => {
                return Err(ParseError::new(
                    ErrorCode::ShapeMismatch,
                    couple.span,
                    format!("kernel `{}` has size {}, coupling has {width} channels", kernel.name, e.cols()),
                ));
            }
            _ => {}
        }
    }

    for sp in &spec.splitters {
        let m1 = sp.t1.rows();
        let m2 = sp.t2.rows();
        if !sp.t1.is_square()
            || !sp.t2.is_square()
            || sp.r1.shape() != (m1, m2)
            || sp.r2.shape() != (m2, m1)
        {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                sp.span,
                format!("splitter `{}` blocks have inconsistent shapes", sp.name),
            ));
        }
    }

    for arc in &spec.arcs {
        let to = spec.node(&arc.to).ok_or_else(|| {
            ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                arc.to_span,
                format!("unknown node `{}`", arc.to),
            )
        })?;
        let from = spec.node(&arc.from).ok_or_else(|| {
            ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                arc.from_span,
                format!("unknown node `{}`", arc.from),
            )
        })?;
        // Walk the product left to right, tracking the inner dimension;
        // delays are square and adopt the current size.
        let mut current = to.width;
        for (idx, term) in arc.terms.iter().enumerate() {
            let shape = match &term.kind {
                GainTermKind::Matrix(m) => Some(m.shape()),
                GainTermKind::Io(name) => {
                    if spec.system(name).is_none() {
                        return Err(ParseError::new(
                            ErrorCode::UnresolvedIdentifier,
                            term.span,
                            format!("unknown system `{name}`"),
                        ));
                    }
                    let channels = spec.system_channels(name);
                    if channels == 0 {
                        return Err(ParseError::new(
                            ErrorCode::ShapeMismatch,
                            term.span,
                            format!("system `{name}` has no coupling, io({name}) is undefined"),
                        ));
                    }
                    Some((channels, channels))
                }
                GainTermKind::Delay(name) => {
                    if spec.delay(name).is_none() {
                        return Err(ParseError::new(
                            ErrorCode::UnresolvedIdentifier,
                            term.span,
                            format!("unknown delay `{name}`"),
                        ));
                    }
                    None
                }
                GainTermKind::Splitter(name, block) => {
                    let sp = spec.splitter(name).ok_or_else(|| {
                        ParseError::new(
                            ErrorCode::UnresolvedIdentifier,
                            term.span,
                            format!("unknown splitter `{name}`"),
                        )
                    })?;
                    let m = match block {
                        SplitterBlock::T1 => &sp.t1,
                        SplitterBlock::R1 => &sp.r1,
                        SplitterBlock::R2 => &sp.r2,
                        SplitterBlock::T2 => &sp.t2,
                    };
                    Some(m.shape())
                }
            };
            if let Some((rows, cols)) = shape {
                if rows != current {
                    return Err(ParseError::new(
                        ErrorCode::ShapeMismatch,
                        term.span,
                        format!(
                            "gain factor {} is {rows}x{cols} but {current} rows are needed here",
                            idx + 1
                        ),
                    ));
                }
                current = cols;
            }
        }
        if current != from.width {
            return Err(ParseError::new(
                ErrorCode::ShapeMismatch,
                arc.span,
                format!(
                    "arc gain maps {} columns but node `{}` has width {}",
                    current, arc.from, from.width
                ),
            ));
        }
    }

    for query in &spec.queries {
        if spec.node(&query.from).is_none() {
            return Err(ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                query.from_span,
                format!("unknown node `{}`", query.from),
            ));
        }
        if spec.node(&query.to).is_none() {
            return Err(ParseError::new(
                ErrorCode::UnresolvedIdentifier,
                query.to_span,
                format!("unknown node `{}`", query.to),
            ));
        }
    }
    Ok(())
}
