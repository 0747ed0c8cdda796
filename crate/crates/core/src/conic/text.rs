//! Line-oriented sparse text format.
//!
//! ```text
//! CONIC 1
//! VARS <n>
//! SENSE min|max
//! OBJ <constant> <nnz>        followed by nnz lines `<idx> <coef>`
//! BOUNDS                      followed by n lines `<idx> <lo> <hi> <tag>`
//! BINARY <k>                  followed by one line of k indices
//! ROWS <m>                    each: `ROW <eq|le> <rhs> <nnz> <tag>` + nnz term lines
//! CONES <c>                   each: `CONE <soc|rsoc> <dim> <tag>` + dim entries,
//!                             entry: `ENTRY <constant> <nnz>` + nnz term lines
//! NAMES                       followed by n lines `<idx> <name>`
//! END
//! ```
//! Empty tags are written as `-`. Infinite bounds are `inf` / `-inf`.

use std::fmt::Write;

use super::program::{AffineExpr, ConeBlock, ConeKind, ConicProgram, LinearRow, RowKind, Sense};
use crate::error::ConicError;

fn tag_out(tag: &str) -> &str {
    if tag.is_empty() {
        "-"
    } else {
        tag
    }
}

fn tag_in(tag: &str) -> String {
    if tag == "-" {
        String::new()
    } else {
        tag.to_string()
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)]) {
    for &(i, c) in terms {
        let _ = writeln!(out, "{i} {c}");
    }
}

pub fn export_program(program: &ConicProgram) -> String {
    let mut out = String::new();
    let n = program.n_vars();
    let _ = writeln!(out, "CONIC 1");
    let _ = writeln!(out, "VARS {n}");
    let _ = writeln!(out, "SENSE {}", if program.sense == Sense::Maximize { "max" } else { "min" });
    let _ = writeln!(out, "OBJ {} {}", program.objective_constant, program.objective.len());
    write_terms(&mut out, &program.objective);
    let _ = writeln!(out, "BOUNDS");
    for i in 0..n {
        let _ = writeln!(out, "{i} {} {} {}", program.lower[i], program.upper[i], tag_out(&program.bound_tags[i]));
    }
    let bins: Vec<String> = program.binaries.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(out, "BINARY {}", bins.len());
    let _ = writeln!(out, "{}", bins.join(" "));
    let _ = writeln!(out, "ROWS {}", program.rows.len());
    for r in &program.rows {
        let kind = if r.kind == RowKind::Eq { "eq" } else { "le" };
        let _ = writeln!(out, "ROW {kind} {} {} {}", r.rhs, r.terms.len(), tag_out(&r.tag));
        write_terms(&mut out, &r.terms);
    }
    let _ = writeln!(out, "CONES {}", program.cones.len());
    for c in &program.cones {
        let kind = if c.kind == ConeKind::SecondOrder { "soc" } else { "rsoc" };
        let _ = writeln!(out, "CONE {kind} {} {}", c.entries.len(), tag_out(&c.tag));
        for e in &c.entries {
            let _ = writeln!(out, "ENTRY {} {}", e.constant, e.terms.len());
            write_terms(&mut out, &e.terms);
        }
    }
    let _ = writeln!(out, "NAMES");
    for (i, name) in program.names.iter().enumerate() {
        let _ = writeln!(out, "{i} {name}");
    }
    let _ = writeln!(out, "END");
    out
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ConicError {
        let line = self.lines.get(self.pos.saturating_sub(1)).map(|l| l.0).unwrap_or(0);
        ConicError::Text { line, message: message.into() }
    }

    fn next(&mut self) -> Result<Vec<&'a str>, ConicError> {
        let (_, l) = *self.lines.get(self.pos).ok_or_else(|| ConicError::Text { line: 0, message: "unexpected end of input".into() })?;
        self.pos += 1;
        Ok(l.split_whitespace().collect())
    }

    fn keyword(&mut self, kw: &str, n_args: usize) -> Result<Vec<&'a str>, ConicError> {
        let toks = self.next()?;
        if toks.first() != Some(&kw) || toks.len() != n_args + 1 {
            return Err(self.err(format!("expected `{kw}` with {n_args} argument(s)")));
        }
        Ok(toks[1..].to_vec())
    }

    fn num<T: std::str::FromStr>(&self, tok: &str) -> Result<T, ConicError> {
        tok.parse::<T>().map_err(|_| self.err(format!("bad number `{tok}`")))
    }

    fn terms(&mut self, nnz: usize) -> Result<Vec<(usize, f64)>, ConicError> {
        (0..nnz)
            .map(|_| {
                let t = self.next()?;
                if t.len() != 2 {
                    return Err(self.err("expected `<idx> <coef>`"));
                }
                Ok((self.num(t[0])?, self.num(t[1])?))
            })
            .collect()
    }
}

pub fn import_program(text: &str) -> Result<ConicProgram, ConicError> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut c = Cursor { lines, pos: 0 };
    let v = c.keyword("CONIC", 1)?;
    if v[0] != "1" {
        return Err(c.err("unsupported format version"));
    }
    let n: usize = {
        let a = c.keyword("VARS", 1)?;
        c.num(a[0])?
    };
    let sense = match c.keyword("SENSE", 1)?[0] {
        "min" => Sense::Minimize,
        "max" => Sense::Maximize,
        other => return Err(c.err(format!("unknown sense `{other}`"))),
    };
    let mut p = ConicProgram::new(sense);
    let a = c.keyword("OBJ", 2)?;
    p.objective_constant = c.num(a[0])?;
    let nnz: usize = c.num(a[1])?;
    p.objective = c.terms(nnz)?;
    c.keyword("BOUNDS", 0)?;
    for i in 0..n {
        let t = c.next()?;
        if t.len() != 4 || c.num::<usize>(t[0])? != i {
            return Err(c.err(format!("expected bound line for variable {i}")));
        }
        p.lower.push(c.num(t[1])?);
        p.upper.push(c.num(t[2])?);
        p.bound_tags.push(tag_in(t[3]));
    }
    let a = c.keyword("BINARY", 1)?;
    let k: usize = c.num(a[0])?;
    let t = c.next()?;
    if t.len() != k {
        return Err(c.err("binary count mismatch"));
    }
    p.binaries = t.iter().map(|s| c.num(s)).collect::<Result<_, _>>()?;
    let a = c.keyword("ROWS", 1)?;
    let m: usize = c.num(a[0])?;
    for _ in 0..m {
        let t = c.keyword("ROW", 4)?;
        let kind = match t[0] {
            "eq" => RowKind::Eq,
            "le" => RowKind::Le,
            other => return Err(c.err(format!("unknown row kind `{other}`"))),
        };
        let rhs = c.num(t[1])?;
        let nnz: usize = c.num(t[2])?;
        let tag = tag_in(t[3]);
        let terms = c.terms(nnz)?;
        p.rows.push(LinearRow { terms, kind, rhs, tag });
    }
    let a = c.keyword("CONES", 1)?;
    let nc: usize = c.num(a[0])?;
    for _ in 0..nc {
        let t = c.keyword("CONE", 3)?;
        let kind = match t[0] {
            "soc" => ConeKind::SecondOrder,
            "rsoc" => ConeKind::Rotated,
            other => return Err(c.err(format!("unknown cone kind `{other}`"))),
        };
        let dim: usize = c.num(t[1])?;
        let tag = tag_in(t[2]);
        let mut entries = Vec::with_capacity(dim);
        for _ in 0..dim {
            let e = c.keyword("ENTRY", 2)?;
            let constant = c.num(e[0])?;
            let nnz: usize = c.num(e[1])?;
            entries.push(AffineExpr { terms: c.terms(nnz)?, constant });
        }
        p.cones.push(ConeBlock { kind, entries, tag });
    }
    c.keyword("NAMES", 0)?;
    for i in 0..n {
        let t = c.next()?;
        if t.len() != 2 || c.num::<usize>(t[0])? != i {
            return Err(c.err(format!("expected name line for variable {i}")));
        }
        p.names.push(t[1].to_string());
    }
    c.keyword("END", 0)?;
    p.validate().map_err(|e| c.err(e.to_string()))?;
    Ok(p)
}
