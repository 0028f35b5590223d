//! Plain-text program dump for cross-checking against other solvers.
//!
//! ```text
//! # comment lines start with '#'
//! conic-program 1
//! blocks 2
//! psd 3
//! nonneg 4
//! objective <nnz>
//! <coord> <value>
//! ...
//! constraints <m>
//! row <rhs> <nnz>
//! <coord> <value>
//! ...
//! end
//! ```
//!
//! Coordinates are global indices into the concatenated block vectors; PSD
//! blocks use the `svec` layout (diagonal first, then `√2·Re`, `√2·Im` of each
//! upper-triangular entry, row-major). Values are written with round-trip
//! precision.

use std::fmt::Write as _;

use super::program::{Cone, ConicProgram};
use crate::error::{Error, Result};

const HEADER: &str = "conic-program 1";

pub fn to_dump(p: &ConicProgram) -> String {
    let mut out = String::new();
    out.push_str("# minimize <c,x> subject to <a_i,x> = b_i, x in the product cone\n");
    out.push_str("# psd blocks are complex Hermitian in svec coordinates:\n");
    out.push_str("#   diagonal, then sqrt2*Re and sqrt2*Im of each upper entry (row-major)\n");
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "blocks {}", p.cones().len());
    for cone in p.cones() {
        match cone {
            Cone::Psd(n) => writeln!(out, "psd {n}"),
            Cone::Nonneg(n) => writeln!(out, "nonneg {n}"),
        }
        .expect("writing to a String cannot fail");
    }
    let obj: Vec<(usize, f64)> = p
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| (k, *v))
        .collect();
    let _ = writeln!(out, "objective {}", obj.len());
    for (k, v) in obj {
        let _ = writeln!(out, "{k} {v:?}");
    }
    let _ = writeln!(out, "constraints {}", p.num_constraints());
    for (row, b) in p.rows().iter().zip(p.rhs()) {
        let _ = writeln!(out, "row {b:?} {}", row.len());
        for (k, v) in row {
            let _ = writeln!(out, "{k} {v:?}");
        }
    }
    out.push_str("end\n");
    out
}

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = &'a str> + 'a>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(|l| l.split_whitespace());
        Tokens { inner: Box::new(inner) }
    }

    fn word(&mut self) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of dump".into()))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let got = self.word()?;
        if got != want {
            return Err(Error::Parse(format!("expected '{want}', found '{got}'")));
        }
        Ok(())
    }

    fn usize(&mut self) -> Result<usize> {
        let w = self.word()?;
        w.parse().map_err(|_| Error::Parse(format!("'{w}' is not a count")))
    }

    fn f64(&mut self) -> Result<f64> {
        let w = self.word()?;
        w.parse().map_err(|_| Error::Parse(format!("'{w}' is not a number")))
    }
}

pub fn from_dump(text: &str) -> Result<ConicProgram> {
    let mut t = Tokens::new(text);
    t.expect("conic-program")?;
    t.expect("1")?;
    t.expect("blocks")?;
    let nb = t.usize()?;
    let mut cones = Vec::with_capacity(nb);
    for _ in 0..nb {
        let kind = t.word()?;
        let n = t.usize()?;
        cones.push(match kind {
            "psd" => Cone::Psd(n),
            "nonneg" => Cone::Nonneg(n),
            other => return Err(Error::Parse(format!("unknown cone '{other}'"))),
        });
    }
    let nvars: usize = cones.iter().map(Cone::len).sum();
    t.expect("objective")?;
    let nnz = t.usize()?;
    let mut objective = vec![0.0; nvars];
    for _ in 0..nnz {
        let k = t.usize()?;
        let v = t.f64()?;
        *objective
            .get_mut(k)
            .ok_or_else(|| Error::Parse(format!("objective coordinate {k} out of range")))? = v;
    }
    t.expect("constraints")?;
    let m = t.usize()?;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        t.expect("row")?;
        rhs.push(t.f64()?);
        let nnz = t.usize()?;
        let mut row = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            row.push((t.usize()?, t.f64()?));
        }
        rows.push(row);
    }
    t.expect("end")?;
    ConicProgram::from_parts(cones, objective, rows, rhs)
}
