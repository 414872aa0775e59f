//! Line-oriented circuit description format (`.pic`).
//!
//! One statement per line, `#` starts a comment, statement order is free.
//!
//! ```text
//! source single <id> out(<m>)
//! source pair   <id> top(<m>, <m>) bottom(<m>, <m>)
//! source vacuum <id> out(<m>)
//! bs      <id> in(<m>, <m>) out(<m>, <m>) [refl(<expr>)]
//! mirror  <id> in(<m>) out(<m>) [refl(<expr>)]
//! phase   <id> in(<m>) out(<m>) value(<expr>)
//! segment <m> phase(<expr>)
//! segment <m> length(<nm>) lambda(<nm>)
//! detector <id> mode(<m>)
//! ```
//!
//! For `bs`, the first `out` mode is the transmit partner of the first `in`
//! mode. A pair source emits photon 1 into the first mode of each branch.
//! A `vacuum` source marks an unused input port. Modes without a segment
//! have propagation phase 0.
//!
//! ```text
//! # Mach-Zehnder interferometer
//! source single S out(e1)
//! source vacuum V out(e0)
//! bs BS1 in(e1, e0) out(e2, e3)
//! mirror M1 in(e3) out(e4)
//! mirror Mb in(e2) out(e5)
//! phase F in(e5) out(e6) value(pi/2)
//! bs BS2 in(e4, e6) out(p6, p7)
//! detector D6 mode(p6)
//! detector D7 mode(p7)
//! ```

mod expr;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::circuit::{
    validate, Circuit, Detector, Element, ElementKind, ModeId, Segment, Source, SourceKind,
    Violation, DEFAULT_REFLECTION_PHASE,
};
use crate::error::{Error, Result};

pub use expr::{eval_phase_expr, ExprError};

pub const HEADER: &str = "# photonic interferometer circuit";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    fn new(line: usize, column: usize) -> Self {
        SourceSpan { line, column }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    SyntaxError,
    UnknownKeyword,
    UnknownMode,
    DuplicateId,
    BadPhaseExpr,
    /// The text is well formed but describes a circuit that breaks a
    /// structural rule.
    InvalidCircuit,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseError {
            span,
            kind,
            message: message.into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Whether `name` can be written as an id or mode name.
pub fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(is_ident_char)
}

#[derive(Debug, Clone)]
struct Word {
    text: String,
    span: SourceSpan,
}

#[derive(Debug, Clone)]
struct Group {
    name: Word,
    args: Vec<Word>,
}

#[derive(Debug, Default)]
struct Line {
    words: Vec<Word>,
    groups: Vec<Group>,
}

fn lex_line(text: &str, line: usize) -> std::result::Result<Line, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let span = |i: usize| SourceSpan::new(line, i + 1);
    let mut out = Line::default();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !is_ident_char(c) {
            return Err(ParseError::new(
                span(i),
                ParseErrorKind::SyntaxError,
                format!("unexpected character `{c}`"),
            ));
        }
        let start = i;
        while i < chars.len() && is_ident_char(chars[i]) {
            i += 1;
        }
        let word = Word {
            text: chars[start..i].iter().collect(),
            span: span(start),
        };
        let mut j = i;
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if j < chars.len() && chars[j] == '(' {
            let open = j;
            let close = chars[open..]
                .iter()
                .position(|&c| c == ')')
                .map(|p| p + open)
                .ok_or_else(|| {
                    ParseError::new(span(open), ParseErrorKind::SyntaxError, "unclosed `(`")
                })?;
            let mut args = Vec::new();
            let mut arg_start = open + 1;
            for k in open + 1..=close {
                if k == close || chars[k] == ',' {
                    let raw: String = chars[arg_start..k].iter().collect();
                    let lead = raw.chars().take_while(|c| c.is_whitespace()).count();
                    args.push(Word {
                        text: raw.trim().to_owned(),
                        span: span(arg_start + lead),
                    });
                    arg_start = k + 1;
                }
            }
            out.groups.push(Group { name: word, args });
            i = close + 1;
        } else {
            if !out.groups.is_empty() {
                return Err(ParseError::new(
                    word.span,
                    ParseErrorKind::SyntaxError,
                    format!("expected `(` after `{}`", word.text),
                ));
            }
            out.words.push(word);
        }
    }
    Ok(out)
}

/// Reference to a mode from a statement, with its role.
#[derive(Debug, Clone)]
struct ModeRef {
    mode: ModeId,
    span: SourceSpan,
    produces: bool,
}

#[derive(Debug)]
enum Item {
    Source(Source),
    Element(Element),
    Segment(Segment),
    Detector(Detector),
}

struct LineParser<'a> {
    line: &'a Line,
    used: Vec<bool>,
    errors: Vec<ParseError>,
}

impl<'a> LineParser<'a> {
    fn new(line: &'a Line) -> Self {
        LineParser {
            line,
            used: vec![false; line.groups.len()],
            errors: Vec::new(),
        }
    }

    fn error(&mut self, span: SourceSpan, kind: ParseErrorKind, msg: impl Into<String>) {
        self.errors.push(ParseError::new(span, kind, msg));
    }

    fn end_span(&self) -> SourceSpan {
        let last = self
            .line
            .groups
            .last()
            .map(|g| &g.name)
            .or(self.line.words.last())
            .expect("non-empty line");
        last.span
    }

    fn group(&mut self, name: &str, required: bool) -> Option<&'a Group> {
        let line = self.line;
        let mut found = None;
        for (k, g) in line.groups.iter().enumerate() {
            if g.name.text == name {
                if found.is_some() {
                    self.error(
                        g.name.span,
                        ParseErrorKind::SyntaxError,
                        format!("`{name}(...)` given twice"),
                    );
                } else {
                    found = Some(g);
                }
                self.used[k] = true;
            }
        }
        if found.is_none() && required {
            self.error(
                self.end_span(),
                ParseErrorKind::SyntaxError,
                format!("missing `{name}(...)`"),
            );
        }
        found
    }

    fn modes<const N: usize>(&mut self, name: &str) -> Option<[Word; N]> {
        let g = self.group(name, true)?;
        if g.args.len() != N {
            self.error(
                g.name.span,
                ParseErrorKind::SyntaxError,
                format!("`{name}` takes {N} mode(s), got {}", g.args.len()),
            );
            return None;
        }
        let mut ok = true;
        for a in &g.args {
            if !is_identifier(&a.text) {
                self.error(
                    a.span,
                    ParseErrorKind::SyntaxError,
                    format!("`{}` is not a valid mode name", a.text),
                );
                ok = false;
            }
        }
        ok.then(|| std::array::from_fn(|k| g.args[k].clone()))
    }

    fn single_arg(&mut self, name: &str, required: bool) -> Option<&'a Word> {
        let g = self.group(name, required)?;
        if g.args.len() != 1 {
            self.error(
                g.name.span,
                ParseErrorKind::SyntaxError,
                format!("`{name}` takes one argument"),
            );
            return None;
        }
        Some(&g.args[0])
    }

    fn phase(&mut self, name: &str, required: bool) -> Option<f64> {
        let arg = self.single_arg(name, required)?;
        match eval_phase_expr(&arg.text) {
            Ok(v) => Some(v),
            Err(e) => {
                let span = SourceSpan::new(arg.span.line, arg.span.column + e.column);
                self.error(span, ParseErrorKind::BadPhaseExpr, e.message);
                None
            }
        }
    }

    fn real(&mut self, name: &str) -> Option<f64> {
        let arg = self.single_arg(name, true)?;
        match arg.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.error(
                    arg.span,
                    ParseErrorKind::BadPhaseExpr,
                    format!("`{}` is not a real number", arg.text),
                );
                None
            }
        }
    }

    fn finish(&mut self) {
        for (k, g) in self.line.groups.iter().enumerate() {
            if !self.used[k] {
                self.error(
                    g.name.span,
                    ParseErrorKind::UnknownKeyword,
                    format!("unknown argument `{}(...)`", g.name.text),
                );
            }
        }
    }
}

fn mode_ref(w: &Word, produces: bool) -> ModeRef {
    ModeRef {
        mode: ModeId::new(w.text.clone()),
        span: w.span,
        produces,
    }
}

/// Result of one line. Mode references and the id are kept even when the
/// statement itself is malformed, so later lines do not report spurious
/// unknown modes.
#[derive(Debug)]
struct Parsed {
    item: Option<Item>,
    id: Option<Word>,
    modes: Vec<ModeRef>,
    errors: Vec<ParseError>,
}

fn parse_statement(line: &Line) -> Parsed {
    let mut p = LineParser::new(line);
    let words = &line.words;
    let fail = |e: ParseError| Parsed {
        item: None,
        id: None,
        modes: Vec::new(),
        errors: vec![e],
    };
    let Some(keyword) = words.first() else {
        let g = &line.groups[0].name;
        return fail(ParseError::new(
            g.span,
            ParseErrorKind::UnknownKeyword,
            format!("unknown statement `{}`", g.text),
        ));
    };
    let (expected_words, id_at) = match keyword.text.as_str() {
        "source" => (3, 2),
        "bs" | "mirror" | "phase" | "segment" | "detector" => (2, 1),
        other => {
            return fail(ParseError::new(
                keyword.span,
                ParseErrorKind::UnknownKeyword,
                format!("unknown statement `{other}`"),
            ))
        }
    };
    if words.len() != expected_words {
        let span = words.get(expected_words).map_or(keyword.span, |w| w.span);
        return fail(ParseError::new(
            span,
            ParseErrorKind::SyntaxError,
            format!(
                "`{}` expects {} word(s) before its arguments, got {}",
                keyword.text,
                expected_words,
                words.len()
            ),
        ));
    }
    let id = words[id_at].clone();
    let name = id.text.clone();
    let mut modes = Vec::new();
    let mut refs = |ws: &[Word], produces: bool| {
        for w in ws {
            modes.push(mode_ref(w, produces));
        }
    };
    let mode = |w: &Word| ModeId::new(w.text.clone());

    let item = match keyword.text.as_str() {
        "source" => match words[1].text.as_str() {
            kind @ ("single" | "vacuum") => p.modes::<1>("out").map(|[o]| {
                refs(std::slice::from_ref(&o), true);
                Item::Source(if kind == "single" {
                    Source::single(name, mode(&o))
                } else {
                    Source::vacuum(name, mode(&o))
                })
            }),
            "pair" => {
                let top = p.modes::<2>("top");
                let bottom = p.modes::<2>("bottom");
                for ws in top.iter().chain(bottom.iter()) {
                    refs(ws, true);
                }
                top.zip(bottom).map(|([t1, t2], [b1, b2])| {
                    Item::Source(Source::pair(
                        name,
                        (mode(&t1), mode(&t2)),
                        (mode(&b1), mode(&b2)),
                    ))
                })
            }
            other => {
                p.error(
                    words[1].span,
                    ParseErrorKind::UnknownKeyword,
                    format!("unknown source kind `{other}`"),
                );
                None
            }
        },
        "bs" => {
            let ins = p.modes::<2>("in");
            let outs = p.modes::<2>("out");
            let refl = p.phase("refl", false);
            if let Some(ws) = &ins {
                refs(ws, false);
            }
            if let Some(ws) = &outs {
                refs(ws, true);
            }
            ins.zip(outs).map(|([i1, i2], [o1, o2])| {
                Item::Element(Element::beam_splitter_with_phase(
                    name,
                    [mode(&i1), mode(&i2)],
                    [mode(&o1), mode(&o2)],
                    refl.unwrap_or(DEFAULT_REFLECTION_PHASE),
                ))
            })
        }
        "mirror" | "phase" => {
            let ins = p.modes::<1>("in");
            let outs = p.modes::<1>("out");
            let value = if keyword.text == "mirror" {
                Some(p.phase("refl", false).unwrap_or(DEFAULT_REFLECTION_PHASE))
            } else {
                p.phase("value", true)
            };
            if let Some(ws) = &ins {
                refs(ws, false);
            }
            if let Some(ws) = &outs {
                refs(ws, true);
            }
            ins.zip(outs).zip(value).map(|(([i], [o]), v)| {
                Item::Element(if keyword.text == "mirror" {
                    Element::mirror_with_phase(name, mode(&i), mode(&o), v)
                } else {
                    Element::phase_shifter(name, mode(&i), mode(&o), v)
                })
            })
        }
        "segment" => {
            refs(std::slice::from_ref(&id), false);
            let has_phase = line.groups.iter().any(|g| g.name.text == "phase");
            if has_phase {
                p.phase("phase", true)
                    .map(|v| Item::Segment(Segment::new(mode(&id), v)))
            } else {
                let length = p.real("length");
                let lambda = p.real("lambda");
                match length.zip(lambda) {
                    Some((l, w)) => match Segment::from_length(mode(&id), l, w) {
                        Ok(s) => Some(Item::Segment(s)),
                        Err(e) => {
                            p.error(id.span, ParseErrorKind::BadPhaseExpr, e.to_string());
                            None
                        }
                    },
                    None => None,
                }
            }
        }
        "detector" => p.modes::<1>("mode").map(|[w]| {
            refs(std::slice::from_ref(&w), false);
            Item::Detector(Detector::new(name, mode(&w)))
        }),
        _ => unreachable!(),
    };
    if !is_identifier(&id.text) {
        p.error(id.span, ParseErrorKind::SyntaxError, "invalid identifier");
    }
    p.finish();
    let ok = p.errors.is_empty();
    Parsed {
        item: if ok { item } else { None },
        id: (keyword.text != "segment").then_some(id),
        modes,
        errors: p.errors,
    }
}

/// Parse circuit text. On failure every detectable error is returned,
/// sorted by position.
pub fn parse(text: &str) -> std::result::Result<Circuit, Vec<ParseError>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut errors = Vec::new();
    let mut statements = Vec::new();
    for (k, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        match lex_line(content, k + 1) {
            Ok(line) => {
                let mut parsed = parse_statement(&line);
                errors.append(&mut parsed.errors);
                statements.push(parsed);
            }
            Err(e) => errors.push(e),
        }
    }

    // name checks across statements
    let mut ids: HashMap<&str, SourceSpan> = HashMap::new();
    let mut segment_modes = HashSet::new();
    let mut produced = HashSet::new();
    for s in &statements {
        if let Some(id) = &s.id {
            if ids.insert(&id.text, id.span).is_some() {
                errors.push(ParseError::new(
                    id.span,
                    ParseErrorKind::DuplicateId,
                    format!("`{}` is already declared", id.text),
                ));
            }
        }
        if s.id.is_none() {
            if let Some(r) = s.modes.first() {
                if !segment_modes.insert(r.mode.clone()) {
                    errors.push(ParseError::new(
                        r.span,
                        ParseErrorKind::DuplicateId,
                        format!("mode `{}` already has a segment", r.mode),
                    ));
                }
            }
        }
        produced.extend(
            s.modes
                .iter()
                .filter(|r| r.produces)
                .map(|r| r.mode.clone()),
        );
    }
    for r in statements.iter().flat_map(|s| &s.modes) {
        if !r.produces && !produced.contains(&r.mode) {
            errors.push(ParseError::new(
                r.span,
                ParseErrorKind::UnknownMode,
                format!("mode `{}` is not produced by any source or element", r.mode),
            ));
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span);
        return Err(errors);
    }

    let mut circuit = Circuit::new();
    let mut spans: BTreeMap<String, SourceSpan> = BTreeMap::new();
    for s in statements {
        if let Some(id) = &s.id {
            spans.insert(id.text.clone(), id.span);
        }
        for r in &s.modes {
            // later mentions win, so duplicates point at the second use
            spans.insert(format!("mode:{}", r.mode), r.span);
        }
        match s.item.expect("statements without errors carry an item") {
            Item::Source(x) => circuit.sources.push(x),
            Item::Element(x) => circuit.elements.push(x),
            Item::Segment(x) => circuit.segments.push(x),
            Item::Detector(x) => circuit.detectors.push(x),
        }
    }
    let violations = validate(&circuit);
    if violations.is_empty() {
        return Ok(circuit);
    }
    let mut errors: Vec<ParseError> = violations
        .iter()
        .map(|v| {
            let span = violation_span(v, &spans).unwrap_or(SourceSpan::new(1, 1));
            ParseError::new(span, ParseErrorKind::InvalidCircuit, v.to_string())
        })
        .collect();
    errors.sort_by_key(|e| e.span);
    Err(errors)
}

fn violation_span(v: &Violation, spans: &BTreeMap<String, SourceSpan>) -> Option<SourceSpan> {
    let by_mode = spans.get(&format!("mode:{}", v.subject()));
    let by_id = spans.get(v.subject());
    match v {
        Violation::DuplicateProducer(_)
        | Violation::DuplicateConsumer(_)
        | Violation::DanglingMode(..)
        | Violation::DuplicateSegment(_)
        | Violation::UnusedSegment(_) => by_mode.or(by_id),
        Violation::NonFinitePhase(_) => by_id.or(by_mode),
        _ => by_id,
    }
    .copied()
}

fn fmt_phase(v: f64) -> String {
    format!("{v}")
}

fn check_name(name: &str) -> Result<()> {
    if is_identifier(name) {
        Ok(())
    } else {
        Err(Error::InvalidCircuit(format!(
            "`{name}` cannot be written as an identifier"
        )))
    }
}

/// Write a valid circuit as text. Statements are grouped as sources,
/// elements, segments, detectors, each in circuit order, so the text parses
/// back to an equal circuit.
pub fn serialize(circuit: &Circuit) -> Result<String> {
    let violations = validate(circuit);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidCircuit(v.to_string()));
    }
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for s in &circuit.sources {
        check_name(&s.id)?;
        for m in s.outputs() {
            check_name(m.as_str())?;
        }
        match &s.kind {
            SourceKind::SinglePhoton { output } => {
                writeln!(out, "source single {} out({output})", s.id).unwrap()
            }
            SourceKind::Vacuum { output } => {
                writeln!(out, "source vacuum {} out({output})", s.id).unwrap()
            }
            SourceKind::PairSource { top, bottom, .. } => writeln!(
                out,
                "source pair {} top({}, {}) bottom({}, {})",
                s.id, top.0, top.1, bottom.0, bottom.1
            )
            .unwrap(),
        }
    }
    for e in &circuit.elements {
        check_name(&e.id)?;
        for m in e.inputs().into_iter().chain(e.outputs()) {
            check_name(m.as_str())?;
        }
        match &e.kind {
            ElementKind::BeamSplitter {
                inputs,
                outputs,
                reflection_phase,
                ..
            } => {
                write!(
                    out,
                    "bs {} in({}, {}) out({}, {})",
                    e.id, inputs[0], inputs[1], outputs[0], outputs[1]
                )
                .unwrap();
                if *reflection_phase != DEFAULT_REFLECTION_PHASE {
                    write!(out, " refl({})", fmt_phase(*reflection_phase)).unwrap();
                }
                out.push('\n');
            }
            ElementKind::Mirror {
                input,
                output,
                reflection_phase,
            } => {
                write!(out, "mirror {} in({input}) out({output})", e.id).unwrap();
                if *reflection_phase != DEFAULT_REFLECTION_PHASE {
                    write!(out, " refl({})", fmt_phase(*reflection_phase)).unwrap();
                }
                out.push('\n');
            }
            ElementKind::PhaseShifter {
                input,
                output,
                value,
            } => writeln!(
                out,
                "phase {} in({input}) out({output}) value({})",
                e.id,
                fmt_phase(*value)
            )
            .unwrap(),
        }
    }
    for s in &circuit.segments {
        check_name(s.mode.as_str())?;
        writeln!(
            out,
            "segment {} phase({})",
            s.mode,
            fmt_phase(s.propagation_phase)
        )
        .unwrap();
    }
    for d in &circuit.detectors {
        check_name(&d.id)?;
        writeln!(out, "detector {} mode({})", d.id, d.mode).unwrap();
    }
    Ok(out)
}
