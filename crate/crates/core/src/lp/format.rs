//! CPLEX-style `.lp` text: `Maximize`, `Subject To`, `Bounds`, `Generals`,
//! `End`. The writer is byte-stable; the reader accepts what the writer
//! emits plus implicit unit coefficients and `\` comments.

use std::collections::HashMap;
use std::fmt::Write;

use super::{IntegerProgram, LinearRow, Sense};
use crate::error::{Error, Result};

fn write_terms(out: &mut String, terms: &[(usize, i64)], names: &[String]) {
    for (k, &(j, c)) in terms.iter().enumerate() {
        let sign = if c < 0 { "-" } else { "+" };
        if k == 0 {
            if c < 0 {
                out.push_str("- ");
            }
        } else {
            write!(out, " {sign} ").unwrap();
        }
        write!(out, "{} {}", c.abs(), names[j]).unwrap();
    }
    if terms.is_empty() {
        out.push('0');
    }
}

/// Renders `program` with an optional leading comment.
pub fn write_lp(program: &IntegerProgram, comment: &str) -> String {
    let names = &program.var_names;
    let mut out = String::new();
    for line in comment.lines() {
        writeln!(out, "\\ {line}").unwrap();
    }
    out.push_str("Maximize\n obj: ");
    let obj: Vec<(usize, i64)> = program
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (j, c))
        .collect();
    write_terms(&mut out, &obj, names);
    out.push_str("\nSubject To\n");
    for row in &program.rows {
        write!(out, " {}: ", row.name).unwrap();
        write_terms(&mut out, &row.terms, names);
        writeln!(out, " {} {}", row.sense.symbol(), row.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        match program.upper[j] {
            Some(u) => writeln!(out, " {} <= {name} <= {u}", program.lower[j]).unwrap(),
            None => writeln!(out, " {name} >= {}", program.lower[j]).unwrap(),
        }
    }
    out.push_str("Generals\n");
    for chunk in names.chunks(10) {
        writeln!(out, " {}", chunk.join(" ")).unwrap();
    }
    out.push_str("End\n");
    out
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Done,
}

struct Reader {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    /// Parses `[-] c x [+|- c x]...`, where `c` may be omitted.
    fn terms(&mut self, text: &str, line: usize) -> Result<Vec<(usize, i64)>> {
        let err = |message: String| Error::Parse {
            line,
            column: 1,
            message,
        };
        let mut out = Vec::new();
        let mut sign = 1i64;
        let mut coef: Option<i64> = None;
        for tok in text.split_whitespace() {
            match tok {
                "+" => sign = 1,
                "-" => sign = -1,
                "0" if out.is_empty() && coef.is_none() => {}
                _ => {
                    if let Ok(c) = tok.parse::<i64>() {
                        if coef.is_some() {
                            return Err(err(format!("two coefficients in a row near {tok:?}")));
                        }
                        coef = Some(c);
                    } else {
                        let j = self.var(tok);
                        out.push((j, sign * coef.take().unwrap_or(1)));
                        sign = 1;
                    }
                }
            }
        }
        if coef.is_some() {
            return Err(err("dangling coefficient".into()));
        }
        Ok(out)
    }
}

/// Parses the text produced by [`write_lp`].
pub fn read_lp(text: &str) -> Result<IntegerProgram> {
    let mut reader = Reader {
        names: Vec::new(),
        index: HashMap::new(),
    };
    let mut objective_terms = Vec::new();
    let mut rows = Vec::new();
    let mut bounds: Vec<(String, Option<i64>, Option<i64>)> = Vec::new();
    let mut generals: Vec<String> = Vec::new();
    let mut section = Section::Preamble;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('\\').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            column: 1,
            message,
        };
        match line.to_ascii_lowercase().as_str() {
            "maximize" | "maximise" | "max" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "generals" | "general" | "gen" => {
                section = Section::Generals;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble => return Err(err(format!("unexpected {line:?} before Maximize"))),
            Section::Done => return Err(err(format!("unexpected {line:?} after End"))),
            Section::Objective => {
                let body = line.split_once(':').map_or(line, |(_, b)| b);
                objective_terms.extend(reader.terms(body, line_no)?);
            }
            Section::Constraints => {
                let (name, body) = line
                    .split_once(':')
                    .map(|(a, b)| (a.trim().to_string(), b))
                    .unwrap_or_else(|| (format!("r{}", rows.len() + 1), line));
                let (sense, op) = if body.contains("<=") {
                    (Sense::Le, "<=")
                } else if body.contains(">=") {
                    (Sense::Ge, ">=")
                } else if body.contains('=') {
                    (Sense::Eq, "=")
                } else {
                    return Err(err("constraint without a relation".into()));
                };
                let (lhs, rhs) = body.split_once(op).unwrap();
                let rhs: i64 = rhs
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("right-hand side {:?} is not an integer", rhs.trim())))?;
                let terms = reader.terms(lhs, line_no)?;
                rows.push(LinearRow {
                    name,
                    terms,
                    sense,
                    rhs,
                });
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let num = |s: &str| {
                    s.parse::<i64>()
                        .map_err(|_| err(format!("bound {s:?} is not an integer")))
                };
                match toks.as_slice() {
                    [l, "<=", v, "<=", u] => bounds.push((v.to_string(), Some(num(l)?), Some(num(u)?))),
                    [v, ">=", l] => bounds.push((v.to_string(), Some(num(l)?), None)),
                    [v, "<=", u] => bounds.push((v.to_string(), None, Some(num(u)?))),
                    _ => return Err(err(format!("unsupported bound {line:?}"))),
                }
            }
            Section::Generals => generals.extend(line.split_whitespace().map(str::to_string)),
        }
    }
    if section != Section::Done {
        return Err(Error::Parse {
            line: text.lines().count(),
            column: 1,
            message: "missing End".into(),
        });
    }

    for (name, _, _) in &bounds {
        reader.var(name);
    }
    for name in &generals {
        reader.var(name);
    }
    // number variables in Bounds order, which the writer emits by index
    let mut order: Vec<usize> = Vec::with_capacity(reader.names.len());
    for name in bounds.iter().map(|b| &b.0).chain(&generals) {
        let j = reader.index[name];
        if !order.contains(&j) {
            order.push(j);
        }
    }
    for j in 0..reader.names.len() {
        if !order.contains(&j) {
            order.push(j);
        }
    }
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    reader.names = order.iter().map(|&j| reader.names[j].clone()).collect();
    reader.index = reader.names.iter().enumerate().map(|(j, s)| (s.clone(), j)).collect();
    for row in &mut rows {
        for t in &mut row.terms {
            t.0 = remap[t.0];
        }
    }

    let nv = reader.names.len();
    let mut objective = vec![0; nv];
    for (j, c) in objective_terms {
        objective[remap[j]] += c;
    }
    let mut lower = vec![0; nv];
    let mut upper = vec![None; nv];
    for (name, l, u) in bounds {
        let j = reader.index[&name];
        if let Some(l) = l {
            lower[j] = l;
        }
        if u.is_some() {
            upper[j] = u;
        }
    }
    Ok(IntegerProgram {
        var_names: reader.names,
        objective,
        rows,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> IntegerProgram {
        IntegerProgram {
            var_names: vec!["x".into(), "y".into()],
            objective: vec![1, 2],
            rows: vec![
                LinearRow {
                    name: "a".into(),
                    terms: vec![(0, 3), (1, -1)],
                    sense: Sense::Le,
                    rhs: 7,
                },
                LinearRow {
                    name: "b".into(),
                    terms: vec![(0, -1), (1, 1)],
                    sense: Sense::Eq,
                    rhs: 0,
                },
            ],
            lower: vec![0, 0],
            upper: vec![Some(5), None],
        }
    }

    #[test]
    fn writes_expected_text() {
        let text = write_lp(&sample(), "demo");
        assert_eq!(
            text,
            "\\ demo\nMaximize\n obj: 1 x + 2 y\nSubject To\n a: 3 x - 1 y <= 7\n b: - 1 x + 1 y = 0\nBounds\n 0 <= x <= 5\n y >= 0\nGenerals\n x y\nEnd\n"
        );
    }

    #[test]
    fn round_trip() {
        let p = sample();
        assert_eq!(read_lp(&write_lp(&p, "")).unwrap(), p);
    }

    #[test]
    fn implicit_coefficients() {
        let text = "Maximize\n obj: x + y\nSubject To\n c: x + 2 y <= 4\nEnd\n";
        let p = read_lp(text).unwrap();
        assert_eq!(p.objective, vec![1, 1]);
        assert_eq!(p.rows[0].terms, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_lp("Maximize\n obj: x\nSubject To\n c: x 4\nEnd\n").is_err());
        assert!(read_lp("Maximize\n obj: x\n").is_err());
        assert!(read_lp("x + y\n").is_err());
    }
}
