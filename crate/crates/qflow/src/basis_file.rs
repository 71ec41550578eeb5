//! Plain-text basis sets: per shell, an element symbol and primitive count,
//! followed by that many `exponent coefficient` lines. Repeating an element
//! adds another shell. `#` starts a comment.

use std::path::Path;

use qflow_core::molint::{BasisLibrary, ElementBasis, Primitive};

use crate::error::{Error, Result};

const SYMBOLS: [&str; 10] = ["H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"];

pub fn charge_of(symbol: &str) -> Option<u32> {
    SYMBOLS
        .iter()
        .position(|s| s.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
}

/// The bundled STO-3G hydrogen basis.
pub fn default_basis() -> BasisLibrary {
    parse_basis(include_str!("../data/sto-3g.basis"), "sto-3g.basis").expect("bundled basis parses")
}

pub fn load_basis(path: &Path) -> Result<BasisLibrary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_basis(&text, &path.display().to_string())
}

pub fn parse_basis(text: &str, name: &str) -> Result<BasisLibrary> {
    let mut shells: Vec<(u32, Vec<Primitive>)> = Vec::new();
    let mut pending = 0usize;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        last_line = line_no;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if pending == 0 {
            let [symbol, count] = fields[..] else {
                return Err(Error::parse(name, line_no, "expected `symbol primitive-count`"));
            };
            let charge = charge_of(symbol)
                .ok_or_else(|| Error::parse(name, line_no, format!("unknown element `{symbol}`")))?;
            pending = count
                .parse()
                .map_err(|_| Error::parse(name, line_no, format!("bad primitive count `{count}`")))?;
            if pending == 0 {
                return Err(Error::parse(name, line_no, "a shell needs at least one primitive"));
            }
            shells.push((charge, Vec::with_capacity(pending)));
        } else {
            let [e, c] = fields[..] else {
                return Err(Error::parse(name, line_no, "expected `exponent coefficient`"));
            };
            let num = |s: &str| -> Result<f64> {
                s.replace(['D', 'd'], "e")
                    .parse()
                    .map_err(|_| Error::parse(name, line_no, format!("bad number `{s}`")))
            };
            let exponent = num(e)?;
            if !(exponent > 0.0) {
                return Err(Error::parse(name, line_no, "exponents must be positive"));
            }
            let coefficient = num(c)?;
            shells.last_mut().expect("shell header seen").1.push(Primitive { exponent, coefficient });
            pending -= 1;
        }
    }
    if pending != 0 {
        return Err(Error::parse(name, last_line, format!("{pending} primitive line(s) missing")));
    }
    let mut lib = BasisLibrary::new();
    for (charge, prims) in shells {
        let mut element = lib.get(charge).cloned().unwrap_or(ElementBasis {
            charge,
            shells: Vec::new(),
        });
        element.shells.push(prims);
        lib.insert(element);
    }
    Ok(lib)
}
