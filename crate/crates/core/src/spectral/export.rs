use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::eigen::RadialSpectrum;
use crate::error::{Error, Result};

/// Writes `# key = value` header lines (`d`, `rho`, `gap`, `lambda1`,
/// `residual`, `r_max`, `m`, `boundary`) followed by `r,phi` rows.
pub fn write_eigenpair_csv<W: Write>(spec: &RadialSpectrum, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# d = {}", spec.d)?;
    writeln!(w, "# rho = {:e}", spec.rho)?;
    writeln!(w, "# gap = {:e}", spec.gap)?;
    writeln!(w, "# lambda1 = {:e}", spec.lambda1)?;
    writeln!(w, "# residual = {:e}", spec.residual)?;
    writeln!(w, "# r_max = {}", spec.r_max)?;
    writeln!(w, "# m = {}", spec.m)?;
    writeln!(w, "# boundary = {}", spec.boundary)?;
    writeln!(w, "r,phi")?;
    for (r, p) in spec.r.iter().zip(&spec.phi) {
        writeln!(w, "{r:e},{p:e}")?;
    }
    Ok(())
}

/// Reads the format of [`write_eigenpair_csv`].
pub fn read_eigenpair_csv<R: BufRead>(reader: R) -> Result<RadialSpectrum> {
    let mut header = HashMap::new();
    let mut r = Vec::new();
    let mut phi = Vec::new();
    let parse_err = |line: usize, msg: &str| Error::Parse(format!("eigenpair line {line}: {msg}"));
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line == "r,phi" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').ok_or_else(|| parse_err(n + 1, "header without '='"))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| parse_err(n + 1, "expected two columns"))?;
        r.push(a.trim().parse::<f64>().map_err(|e| parse_err(n + 1, &e.to_string()))?);
        phi.push(b.trim().parse::<f64>().map_err(|e| parse_err(n + 1, &e.to_string()))?);
    }
    let get = |k: &str| header.get(k).ok_or_else(|| Error::Parse(format!("eigenpair header lacks '{k}'")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}"))) };
    if r.len() < 2 {
        return Err(Error::Parse("eigenpair table needs at least two rows".into()));
    }
    if phi.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Domain("eigenfunction must be strictly positive".into()));
    }
    let gap = num("gap")?;
    Ok(RadialSpectrum {
        d: get("d")?.parse().map_err(|e| Error::Parse(format!("d: {e}")))?,
        r_max: num("r_max")?,
        m: get("m")?.parse().map_err(|e| Error::Parse(format!("m: {e}")))?,
        boundary: get("boundary")?.parse()?,
        rho: num("rho")?,
        lambda1: num("lambda1")?,
        gap,
        residual: num("residual")?,
        degenerate: gap < 1e-12,
        r,
        phi,
    })
}
