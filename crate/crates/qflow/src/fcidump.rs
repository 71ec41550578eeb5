//! FCIDUMP interchange: a `&FCI ... &END` namelist header, then
//! `value i j k l` lines with 1-based chemist-order indices. Two-electron
//! entries come first, then one-electron (`k = l = 0`), then the core energy
//! (all indices zero).

use std::fmt::Write as _;
use std::path::Path;

use qflow_core::hamiltonian::MoHamiltonian;
use qflow_core::molint::EriTensor;
use qflow_core::nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcidumpHeader {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub orbsym: Vec<i64>,
    pub isym: i64,
}

/// Serialize the spatial integrals of `h`. Values are written with 17
/// significant digits, so reading the text back is exact.
pub fn write_fcidump(h: &MoHamiltonian) -> String {
    let n = h.n_spatial();
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    writeln!(out, " &FCI NORB={n},NELEC={},MS2=0,", h.n_electrons()).unwrap();
    writeln!(out, "  ORBSYM={orbsym},").unwrap();
    writeln!(out, "  ISYM=1,").unwrap();
    writeln!(out, " &END").unwrap();
    for ((i, j, k, l), v) in h.eri_spatial().unique() {
        if v != 0.0 {
            writeln!(out, "{v:24.16e} {:3} {:3} {:3} {:3}", i + 1, j + 1, k + 1, l + 1).unwrap();
        }
    }
    let hs = h.h_spatial();
    for i in 0..n {
        for j in 0..=i {
            let v = hs[(i, j)];
            if v != 0.0 {
                writeln!(out, "{v:24.16e} {:3} {:3} {:3} {:3}", i + 1, j + 1, 0, 0).unwrap();
            }
        }
    }
    writeln!(out, "{:24.16e} {:3} {:3} {:3} {:3}", h.core_energy(), 0, 0, 0, 0).unwrap();
    out
}

pub fn save_fcidump(h: &MoHamiltonian, path: &Path) -> Result<()> {
    std::fs::write(path, write_fcidump(h)).map_err(|e| Error::io(path, e))
}

pub fn load_fcidump(path: &Path) -> Result<(FcidumpHeader, MoHamiltonian)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fcidump(&text, &path.display().to_string())
}

fn parse_header(text: &str, name: &str) -> Result<(FcidumpHeader, usize)> {
    let mut namelist = String::new();
    let mut body_start = None;
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        let upper = t.to_ascii_uppercase();
        if idx == 0 && !upper.starts_with("&FCI") {
            return Err(Error::parse(name, 1, "header must start with &FCI"));
        }
        let end = upper.find("&END").or_else(|| (upper == "/").then_some(0));
        match end {
            Some(pos) => {
                namelist.push_str(&t[..pos]);
                body_start = Some(idx + 1);
                break;
            }
            None => {
                namelist.push_str(t);
                namelist.push(' ');
            }
        }
    }
    let body_start = body_start.ok_or_else(|| Error::parse(name, 1, "header is not terminated by &END"))?;
    let namelist = namelist.trim_start();
    let namelist = &namelist[4..];

    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = 0;
    let mut orbsym = Vec::new();
    let mut isym = 1;
    // KEY=v1,v2,...  where a value list ends at the next KEY=
    let mut key: Option<String> = None;
    let mut values: Vec<String> = Vec::new();
    let mut flush = |key: Option<String>, values: &mut Vec<String>| -> Result<()> {
        let Some(key) = key else { return Ok(()) };
        let ints: Vec<i64> = values
            .iter()
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::parse(name, 1, format!("bad value `{v}` for {key}")))
            })
            .collect::<Result<_>>()?;
        let single = |ints: &[i64]| -> Result<i64> {
            match ints {
                [x] => Ok(*x),
                _ => Err(Error::parse(name, 1, format!("{key} takes one value"))),
            }
        };
        match key.as_str() {
            "NORB" => norb = Some(single(&ints)?),
            "NELEC" => nelec = Some(single(&ints)?),
            "MS2" => ms2 = single(&ints)?,
            "ISYM" => isym = single(&ints)?,
            "ORBSYM" => orbsym = ints,
            "IUHF" | "UHF" => {
                if single(&ints)? != 0 {
                    return Err(Error::Unsupported("unrestricted FCIDUMP".into()));
                }
            }
            _ => {}
        }
        values.clear();
        Ok(())
    };
    for token in namelist.split([',', ' ', '\t']).filter(|s| !s.is_empty()) {
        if let Some((k, v)) = token.split_once('=') {
            flush(key.take(), &mut values)?;
            key = Some(k.trim().to_ascii_uppercase());
            if !v.is_empty() {
                values.push(v.to_string());
            }
        } else {
            values.push(token.to_string());
        }
    }
    flush(key.take(), &mut values)?;

    let norb = norb.ok_or_else(|| Error::parse(name, 1, "NORB missing"))?;
    let nelec = nelec.ok_or_else(|| Error::parse(name, 1, "NELEC missing"))?;
    if norb < 0 || nelec < 0 {
        return Err(Error::parse(name, 1, "NORB and NELEC must be non-negative"));
    }
    if ms2 != 0 {
        return Err(Error::Unsupported(format!("MS2={ms2}; only closed-shell references")));
    }
    if !orbsym.is_empty() && orbsym.len() != norb as usize {
        return Err(Error::parse(name, 1, "ORBSYM length differs from NORB"));
    }
    Ok((
        FcidumpHeader {
            norb: norb as usize,
            nelec: nelec as usize,
            ms2,
            orbsym,
            isym,
        },
        body_start,
    ))
}

pub fn parse_fcidump(text: &str, name: &str) -> Result<(FcidumpHeader, MoHamiltonian)> {
    let (header, body_start) = parse_header(text, name)?;
    let n = header.norb;
    let mut h = DMatrix::zeros(n, n);
    let mut eri = EriTensor::zeros(n);
    let mut core = 0.0;
    for (idx, line) in text.lines().enumerate().skip(body_start) {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields[0].starts_with('(') {
            return Err(Error::Unsupported(format!("complex integral on line {line_no}")));
        }
        let [v, i, j, k, l] = fields[..] else {
            return Err(Error::parse(name, line_no, "expected `value i j k l`"));
        };
        let value: f64 = v
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| Error::parse(name, line_no, format!("bad value `{v}`")))?;
        let mut idx4 = [0usize; 4];
        for (slot, s) in idx4.iter_mut().zip([i, j, k, l]) {
            let x: usize = s
                .parse()
                .map_err(|_| Error::parse(name, line_no, format!("bad index `{s}`")))?;
            if x > n {
                return Err(Error::parse(name, line_no, format!("index {x} exceeds NORB={n}")));
            }
            *slot = x;
        }
        match idx4 {
            [0, 0, 0, 0] => core = value,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = value;
                h[(j - 1, i - 1)] = value;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => eri.set(i - 1, j - 1, k - 1, l - 1, value),
            _ => return Err(Error::parse(name, line_no, "index pattern is neither 0000, ij00 nor ijkl")),
        }
    }
    let ham = MoHamiltonian::from_spatial(h, eri, core, header.nelec).map_err(|e| match e {
        qflow_core::Error::Unsupported(m) => Error::Unsupported(m),
        other => Error::Config(format!("{name}: {other}")),
    })?;
    Ok((header, ham))
}
