//! CPLEX-style LP text: `Maximize`, `Subject To`, `Bounds`, `Binaries`,
//! `End`.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};

use super::model::{MipModel, Relation, VarId};

const TERMS_PER_LINE: usize = 8;

/// Formats with at most 12 significant digits, integers without a fraction.
pub fn format_number(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float formats parse back");
    format!("{rounded}")
}

fn write_expr(out: &mut String, model: &MipModel, terms: &[(VarId, f64)], indent: &str) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push('\n');
            out.push_str(indent);
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let mag = a.abs();
        let name = &model.variables[v].name;
        if k == 0 && sign == '+' {
            if mag == 1.0 {
                let _ = write!(out, " {name}");
            } else {
                let _ = write!(out, " {} {name}", format_number(mag));
            }
        } else if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {} {name}", format_number(mag));
        }
    }
}

/// Renders the model; constraints keep their declaration order.
pub fn export_lp_text(model: &MipModel) -> String {
    let mut out = String::new();
    out.push_str("Maximize\n obj:");
    write_expr(&mut out, model, &model.objective, "   ");
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, model, &c.terms, "   ");
        let _ = writeln!(out, " {} {}", c.relation.symbol(), format_number(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| !v.integer) {
        let default = v.lower == 0.0 && v.upper == f64::INFINITY;
        if default {
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, format_number(v.lower));
        } else if v.upper.is_finite() {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                format_number(v.lower),
                v.name,
                format_number(v.upper)
            );
        } else {
            let _ = writeln!(out, " {} >= {}", v.name, format_number(v.lower));
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.integer)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    General,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "minimize" | "minimise" | "min" => None,
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::General),
        "end" => Some(Section::End),
        _ => None,
    }
}

/// Whether a constraint statement already carries a relation and a value.
fn has_rhs(stmt: &str) -> bool {
    stmt.rfind(['<', '>', '='])
        .is_some_and(|pos| !stmt[pos + 1..].trim().is_empty())
}

#[derive(Default)]
struct Reader {
    model: MipModel,
    ids: HashMap<String, VarId>,
}

impl Reader {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.model.add_var(name.to_string(), 0.0, f64::INFINITY, false);
        self.ids.insert(name.to_string(), id);
        id
    }

    /// Parses `[+|-] [coef] name ...` into terms.
    fn expr(&mut self, text: &str, line: usize) -> Result<Vec<(VarId, f64)>> {
        let err = |m: String| Error::Parse { line, message: m };
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        for tok in text.split_whitespace() {
            match tok {
                "+" => sign = 1.0,
                "-" => sign = -sign,
                _ => {
                    if let Ok(c) = tok.parse::<f64>() {
                        if coef.is_some() {
                            return Err(err(format!("two coefficients in a row near `{tok}`")));
                        }
                        coef = Some(c);
                    } else {
                        let (s, name) = match tok.strip_prefix('-') {
                            Some(rest) => (-1.0, rest),
                            None => (1.0, tok.strip_prefix('+').unwrap_or(tok)),
                        };
                        let id = self.var(name);
                        let a = sign * s * coef.take().unwrap_or(1.0);
                        match terms.iter_mut().find(|t| t.0 == id) {
                            Some(t) => t.1 += a,
                            None => terms.push((id, a)),
                        }
                        sign = 1.0;
                    }
                }
            }
        }
        if let Some(c) = coef {
            if c != 0.0 {
                return Err(err("constant terms are not supported".into()));
            }
        }
        Ok(terms)
    }

    fn bound(&mut self, text: &str, line: usize) -> Result<()> {
        let err = |m: &str| Error::Parse {
            line,
            message: format!("{m}: `{text}`"),
        };
        let num = |s: &str| -> Option<f64> {
            match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
                "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
                t => t.parse().ok(),
            }
        };
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks.as_slice() {
            [lo, "<=", name, "<=", hi] => {
                let id = self.var(name);
                let v = &mut self.model.variables[id];
                v.lower = num(lo).ok_or_else(|| err("bad lower bound"))?;
                v.upper = num(hi).ok_or_else(|| err("bad upper bound"))?;
            }
            [name, op, val] if num(name).is_none() => {
                let id = self.var(name);
                let x = num(val).ok_or_else(|| err("bad bound"))?;
                let v = &mut self.model.variables[id];
                match *op {
                    "<=" => v.upper = x,
                    ">=" => v.lower = x,
                    "=" => {
                        v.lower = x;
                        v.upper = x;
                    }
                    _ => return Err(err("bad bound operator")),
                }
            }
            [val, op, name] => {
                let id = self.var(name);
                let x = num(val).ok_or_else(|| err("bad bound"))?;
                let v = &mut self.model.variables[id];
                match *op {
                    "<=" => v.lower = x,
                    ">=" => v.upper = x,
                    _ => return Err(err("bad bound operator")),
                }
            }
            [name, free] if free.eq_ignore_ascii_case("free") => {
                let id = self.var(name);
                self.model.variables[id].lower = f64::NEG_INFINITY;
            }
            _ => return Err(err("unrecognised bound")),
        }
        Ok(())
    }
}

/// Reads LP text written by [`export_lp_text`] (and the common subset of the
/// format used by other tools: named rows, continuation lines, `\` comments).
pub fn parse_lp_text(text: &str) -> Result<MipModel> {
    let mut rd = Reader::default();
    let mut section = Section::None;
    // statement being accumulated across continuation lines
    let mut pending: Option<(usize, String)> = None;

    let flush = |rd: &mut Reader, section: Section, pending: &mut Option<(usize, String)>| -> Result<()> {
        let Some((line, stmt)) = pending.take() else {
            return Ok(());
        };
        match section {
            Section::Objective => {
                let body = stmt.split_once(':').map_or(stmt.as_str(), |(_, b)| b);
                rd.model.objective = rd.expr(body, line)?;
            }
            Section::Constraints => {
                let (name, body) = match stmt.split_once(':') {
                    Some((n, b)) => (n.trim().to_string(), b.to_string()),
                    None => (format!("c{}", rd.model.constraints.len() + 1), stmt.clone()),
                };
                let (op_pos, op_len, relation) = ["<=", ">=", "=<", "=>", "<", ">", "="]
                    .iter()
                    .find_map(|op| {
                        body.find(op).map(|pos| {
                            let rel = match *op {
                                "<=" | "=<" | "<" => Relation::Le,
                                ">=" | "=>" | ">" => Relation::Ge,
                                _ => Relation::Eq,
                            };
                            (pos, op.len(), rel)
                        })
                    })
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("constraint `{name}` has no relation"),
                    })?;
                let terms = rd.expr(&body[..op_pos], line)?;
                let rhs: f64 = body[op_pos + op_len..].trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("constraint `{name}` has a non-numeric right-hand side"),
                })?;
                rd.model.add_constraint(name, terms, relation, rhs);
            }
            _ => {}
        }
        Ok(())
    };

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('\\').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(next) = section_of(content) {
            flush(&mut rd, section, &mut pending)?;
            section = next;
            continue;
        }
        if matches!(content.to_ascii_lowercase().as_str(), "minimize" | "minimise" | "min") {
            return Err(Error::Parse {
                line,
                message: "only maximization models are supported".into(),
            });
        }
        match section {
            Section::Objective | Section::Constraints => {
                let starts_new = match (&pending, section) {
                    (None, _) => true,
                    (Some((_, s)), Section::Constraints) => content.contains(':') || has_rhs(s),
                    _ => false,
                };
                if starts_new {
                    flush(&mut rd, section, &mut pending)?;
                    pending = Some((line, content.to_string()));
                } else if let Some((_, s)) = pending.as_mut() {
                    s.push(' ');
                    s.push_str(content);
                }
            }
            Section::Bounds => rd.bound(content, line)?,
            Section::Binaries | Section::General => {
                for name in content.split_whitespace() {
                    let id = rd.var(name);
                    let v = &mut rd.model.variables[id];
                    v.integer = true;
                    if section == Section::Binaries {
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                }
            }
            Section::None | Section::End => {
                return Err(Error::Parse {
                    line,
                    message: format!("unexpected text outside a section: `{content}`"),
                })
            }
        }
    }
    flush(&mut rd, section, &mut pending)?;
    Ok(rd.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-7.0), "-7");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123.456_789_012_345_67), "123.456789012");
    }

    #[test]
    fn tiny_model_round_trip() {
        let mut m = MipModel::default();
        let x = m.add_binary("x_1_1".into());
        let p = m.add_var("p_1".into(), 0.0, 5.0, false);
        let u = m.add_var("u_1".into(), 0.0, f64::INFINITY, false);
        m.objective = vec![(x, 5.0), (u, -1.0)];
        m.add_constraint("util_lb_1_1".into(), vec![(u, 1.0), (p, 1.0)], Relation::Ge, 5.0);
        m.add_constraint("assign_1".into(), vec![(x, 1.0)], Relation::Le, 1.0);
        let text = export_lp_text(&m);
        let back = parse_lp_text(&text).unwrap();
        // variable order may differ; compare through names
        assert_eq!(back.num_vars(), 3);
        assert_eq!(back.constraints.len(), 2);
        let pid = back.var_by_name("p_1").unwrap();
        assert_eq!(back.variables[pid].upper, 5.0);
        let xid = back.var_by_name("x_1_1").unwrap();
        assert!(back.variables[xid].integer);
        assert_eq!(back.constraints[0].rhs, 5.0);
        assert_eq!(back.constraints[0].relation, Relation::Ge);
    }

    #[test]
    fn continuation_lines_and_comments() {
        let text = "\\ comment\nMaximize\n obj: 2 a\n + 3 b\nSubject To\n c1: a + b\n   <= 4\n c2: a - b >= -1 \\ trailing\nBounds\n a <= 3\nEnd\n";
        let m = parse_lp_text(text).unwrap();
        assert_eq!(m.objective.len(), 2);
        assert_eq!(m.constraints.len(), 2);
        assert_eq!(m.constraints[0].terms.len(), 2);
        assert_eq!(m.constraints[1].terms[1].1, -1.0);
        assert_eq!(m.variables[0].upper, 3.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_lp_text("Maximize\n obj: a\nSubject To\n c1: a 4\nEnd\n").is_err());
        assert!(parse_lp_text("hello\n").is_err());
        assert!(parse_lp_text("Minimize\n obj: a\nEnd\n").is_err());
    }
}
