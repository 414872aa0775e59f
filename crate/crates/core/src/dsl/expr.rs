//! Phase expressions.
//!
//! ```text
//! expr := [sign] term (sign term)*
//! sign := '+' | '-'
//! term := NUMBER | NUMBER '*' 'pi' | 'pi' | 'pi' '/' NUMBER
//! ```

use std::f64::consts::PI;

/// Evaluation failure, `column` is 0-based within the expression text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Pi,
    Plus,
    Minus,
    Star,
    Slash,
}

fn err(column: usize, message: impl Into<String>) -> ExprError {
    ExprError {
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(start, format!("malformed number `{s}`")))?;
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word != "pi" {
                    return Err(err(
                        start,
                        format!("unknown name `{word}`, only `pi` is allowed"),
                    ));
                }
                out.push((start, Tok::Pi));
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Evaluate a phase expression to radians. The result is not reduced.
pub fn eval_phase_expr(text: &str) -> Result<f64, ExprError> {
    let toks = tokenize(text)?;
    let end = text.chars().count();
    if toks.is_empty() {
        return Err(err(0, "empty phase expression"));
    }
    let mut pos = 0;
    let mut total = 0.0;
    let mut first = true;
    while pos < toks.len() || first {
        let mut sign = 1.0;
        match toks.get(pos) {
            Some((_, Tok::Plus)) => pos += 1,
            Some((_, Tok::Minus)) => {
                sign = -1.0;
                pos += 1
            }
            Some((col, t)) if !first => {
                return Err(err(*col, format!("expected `+` or `-`, found {t:?}")))
            }
            _ => {}
        }
        first = false;
        let col = toks.get(pos).map_or(end, |t| t.0);
        let value = match toks.get(pos) {
            Some((_, Tok::Num(v))) => {
                pos += 1;
                if matches!(toks.get(pos), Some((_, Tok::Star))) {
                    pos += 1;
                    match toks.get(pos) {
                        Some((_, Tok::Pi)) => {
                            pos += 1;
                            v * PI
                        }
                        other => {
                            return Err(err(other.map_or(end, |t| t.0), "expected `pi` after `*`"))
                        }
                    }
                } else {
                    *v
                }
            }
            Some((_, Tok::Pi)) => {
                pos += 1;
                if matches!(toks.get(pos), Some((_, Tok::Slash))) {
                    pos += 1;
                    match toks.get(pos) {
                        Some((c, Tok::Num(d))) => {
                            pos += 1;
                            if *d == 0.0 {
                                return Err(err(*c, "division by zero"));
                            }
                            PI / d
                        }
                        other => {
                            return Err(err(
                                other.map_or(end, |t| t.0),
                                "expected a number after `/`",
                            ))
                        }
                    }
                } else {
                    PI
                }
            }
            _ => return Err(err(col, "expected a number or `pi`")),
        };
        total += sign * value;
    }
    if !total.is_finite() {
        return Err(err(0, "phase expression is not finite"));
    }
    Ok(total)
}
