//! Geometry files: one atom per line, `Z x y z` in bohr. `#` starts a comment.

use std::path::Path;

use qflow_core::molint::{Atom, Geometry};

use crate::error::{Error, Result};

pub fn load_geometry(path: &Path) -> Result<Geometry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_geometry(&text, &path.display().to_string())
}

pub fn parse_geometry(text: &str, name: &str) -> Result<Geometry> {
    let mut atoms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [z, x, y, w] = fields[..] else {
            return Err(Error::parse(name, idx + 1, "expected `Z x y z`"));
        };
        let charge: u32 = z
            .parse()
            .map_err(|_| Error::parse(name, idx + 1, format!("bad nuclear charge `{z}`")))?;
        let mut position = [0.0; 3];
        for (p, s) in position.iter_mut().zip([x, y, w]) {
            *p = s
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(name, idx + 1, format!("bad coordinate `{s}`")))?;
        }
        atoms.push(Atom { charge, position });
    }
    Geometry::new(atoms).map_err(Error::stage("geometry"))
}

pub fn write_geometry(g: &Geometry) -> String {
    g.atoms()
        .iter()
        .map(|a| format!("{} {:e} {:e} {:e}\n", a.charge, a.position[0], a.position[1], a.position[2]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qflow_core::molint::chain_geometry;

    #[test]
    fn round_trip() {
        let g = chain_geometry(4, 2.5).unwrap();
        assert_eq!(parse_geometry(&write_geometry(&g), "t").unwrap(), g);
    }

    #[test]
    fn comments_and_errors() {
        let g = parse_geometry("# H2\n1 0 0 0\n\n1 0 0 1.4  # second\n", "t").unwrap();
        assert_eq!(g.len(), 2);
        assert!(matches!(parse_geometry("1 0 0\n", "t"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_geometry("1 0 0 0\nH 0 0 1\n", "t"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_geometry("1 0 0 0\n1 0 0 0\n", "t").is_err());
    }
}
