//! S-expression syntax for sentences.
//!
//! ```text
//! (forall x (exists y (and (E x y) (not (= x y)))))
//! (forall (x z) (=> (= z (g x)) (P z)))
//! ```
//! Connectives: `and`, `or`, `not`, `=>`/`implies`, `<=>`/`iff`, `=`; the
//! atoms `true` and `false`; a bare symbol is a nullary predicate. `;`
//! starts a comment.

use super::{Formula, Term};
use crate::error::{Error, Result};

#[derive(Debug)]
enum Sx {
    Atom(String),
    List(Vec<Sx>, usize),
}

fn tokenize(text: &str) -> Vec<(String, usize)> {
    let mut toks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("");
        let mut cur = String::new();
        for ch in line.chars() {
            match ch {
                '(' | ')' => {
                    if !cur.is_empty() {
                        toks.push((std::mem::take(&mut cur), idx + 1));
                    }
                    toks.push((ch.to_string(), idx + 1));
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        toks.push((std::mem::take(&mut cur), idx + 1));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            toks.push((cur, idx + 1));
        }
    }
    toks
}

fn read(toks: &[(String, usize)], pos: &mut usize) -> Result<Sx> {
    let (tok, line) = toks
        .get(*pos)
        .ok_or_else(|| Error::parse(toks.last().map_or(1, |t| t.1), "unexpected end of input"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    Some((t, _)) if t == ")" => {
                        *pos += 1;
                        return Ok(Sx::List(items, *line));
                    }
                    Some(_) => items.push(read(toks, pos)?),
                    None => return Err(Error::parse(*line, "unclosed parenthesis")),
                }
            }
        }
        ")" => Err(Error::parse(*line, "unexpected `)`")),
        a => Ok(Sx::Atom(a.to_string())),
    }
}

fn atom(sx: &Sx) -> Result<&str> {
    match sx {
        Sx::Atom(a) => Ok(a),
        Sx::List(_, l) => Err(Error::parse(*l, "expected a symbol")),
    }
}

fn term(sx: &Sx) -> Result<Term> {
    match sx {
        Sx::Atom(a) => Ok(Term::Var(a.clone())),
        Sx::List(items, l) => {
            let (head, args) = items.split_first().ok_or_else(|| Error::parse(*l, "empty term"))?;
            Ok(Term::App(
                atom(head)?.to_string(),
                args.iter()
                    .map(|a| atom(a).map(str::to_string))
                    .collect::<Result<_>>()?,
            ))
        }
    }
}

fn formula(sx: &Sx) -> Result<Formula> {
    let (items, line) = match sx {
        Sx::Atom(a) => {
            return Ok(match a.as_str() {
                "true" => Formula::True,
                "false" => Formula::False,
                p => Formula::Pred(p.to_string(), Vec::new()),
            })
        }
        Sx::List(items, l) => (items, *l),
    };
    let (head, rest) = items.split_first().ok_or_else(|| Error::parse(line, "empty formula"))?;
    let head = atom(head)?;
    let arity = |n: usize| -> Result<()> {
        if rest.len() == n {
            Ok(())
        } else {
            Err(Error::parse(
                line,
                format!("`{head}` takes {n} arguments, found {}", rest.len()),
            ))
        }
    };
    Ok(match head {
        "forall" | "exists" => {
            arity(2)?;
            let vars: Vec<String> = match &rest[0] {
                Sx::Atom(a) => vec![a.clone()],
                Sx::List(vs, _) => vs.iter().map(|v| atom(v).map(str::to_string)).collect::<Result<_>>()?,
            };
            if vars.is_empty() {
                return Err(Error::parse(line, "quantifier without variables"));
            }
            let mut body = formula(&rest[1])?;
            for v in vars.into_iter().rev() {
                body = if head == "forall" {
                    Formula::Forall(v, Box::new(body))
                } else {
                    Formula::Exists(v, Box::new(body))
                };
            }
            body
        }
        "and" => Formula::And(rest.iter().map(formula).collect::<Result<_>>()?),
        "or" => Formula::Or(rest.iter().map(formula).collect::<Result<_>>()?),
        "not" => {
            arity(1)?;
            Formula::Not(Box::new(formula(&rest[0])?))
        }
        "=>" | "implies" => {
            arity(2)?;
            Formula::Implies(Box::new(formula(&rest[0])?), Box::new(formula(&rest[1])?))
        }
        "<=>" | "iff" => {
            arity(2)?;
            Formula::Iff(Box::new(formula(&rest[0])?), Box::new(formula(&rest[1])?))
        }
        "=" => {
            arity(2)?;
            Formula::Eq(term(&rest[0])?, term(&rest[1])?)
        }
        "true" | "false" => return Err(Error::parse(line, format!("`{head}` takes no arguments"))),
        p => Formula::Pred(
            p.to_string(),
            rest.iter()
                .map(|a| atom(a).map(str::to_string))
                .collect::<Result<_>>()?,
        ),
    })
}

/// Parses one formula; trailing content is an error.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = tokenize(text);
    if toks.is_empty() {
        return Err(Error::parse(1, "empty input"));
    }
    let mut pos = 0;
    let sx = read(&toks, &mut pos)?;
    if let Some((_, line)) = toks.get(pos) {
        return Err(Error::parse(*line, "content after the formula"));
    }
    formula(&sx)
}

fn emit_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::App(g, args) => {
            out.push('(');
            out.push_str(g);
            for a in args {
                out.push(' ');
                out.push_str(a);
            }
            out.push(')');
        }
    }
}

fn emit(f: &Formula, out: &mut String) {
    let list = |out: &mut String, head: &str, parts: &[&Formula]| {
        out.push('(');
        out.push_str(head);
        for p in parts {
            out.push(' ');
            emit(p, out);
        }
        out.push(')');
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Pred(p, args) if args.is_empty() => out.push_str(p),
        Formula::Pred(p, args) => {
            out.push('(');
            out.push_str(p);
            for a in args {
                out.push(' ');
                out.push_str(a);
            }
            out.push(')');
        }
        Formula::Eq(s, t) => {
            out.push_str("(= ");
            emit_term(s, out);
            out.push(' ');
            emit_term(t, out);
            out.push(')');
        }
        Formula::Not(a) => list(out, "not", &[a]),
        Formula::And(v) => list(out, "and", &v.iter().collect::<Vec<_>>()),
        Formula::Or(v) => list(out, "or", &v.iter().collect::<Vec<_>>()),
        Formula::Implies(a, b) => list(out, "=>", &[a, b]),
        Formula::Iff(a, b) => list(out, "<=>", &[a, b]),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "(forall "
            } else {
                "(exists "
            });
            out.push_str(x);
            out.push(' ');
            emit(body, out);
            out.push(')');
        }
    }
}

/// Single-line s-expression; `parse_formula` reads it back unchanged.
pub fn emit_formula(f: &Formula) -> String {
    let mut out = String::new();
    emit(f, &mut out);
    out
}
