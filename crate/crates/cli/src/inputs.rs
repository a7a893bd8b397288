//! Input files, built-in fixtures and flag value parsing.
//!
//! Arguments naming an input accept either a path to a JSON file or a
//! `builtin:` name.

use std::fs;
use std::str::FromStr;

use dpw_core::chartfamily::{Grid, MinimalChartData};
use dpw_core::genus2::HyperellipticCurve;
use dpw_core::loopcore::unit_circle;
use dpw_core::potential::{lawson_potential, lawson_weierstrass_locations, DPWPotential, PotentialFile, SpinPartition};
use dpw_core::transport::Path;
use dpw_core::C64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::report::CliError;

/// A parsed input together with the raw bytes it came from (none for
/// built-ins), which go into the config hash.
pub struct Loaded<T> {
    pub value: T,
    pub bytes: Option<Vec<u8>>,
}

fn builtin(spec: &str) -> Option<&str> {
    spec.strip_prefix("builtin:")
}

fn read_json<T: DeserializeOwned>(path: &str, what: &str) -> Result<Loaded<T>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("cannot read {what} file {path}: {e}")))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("malformed {what} file {path}: {e}")))?;
    Ok(Loaded { value, bytes: Some(bytes) })
}

pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    C64::from_str(s.trim()).map_err(|_| CliError::input(format!("not a complex number: {s:?}")))
}

/// Comma-separated complex numbers, e.g. `1,0.5-2i,i`.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, CliError> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_complex3(s: &str, what: &str) -> Result<[C64; 3], CliError> {
    let v = parse_complex_list(s)?;
    v.try_into().map_err(|v: Vec<C64>| CliError::input(format!("{what} needs 3 coefficients, got {}", v.len())))
}

/// `unit:M` (the `M`-th roots of unity) or an explicit list.
pub fn parse_zeta_grid(s: &str) -> Result<Vec<C64>, CliError> {
    let zetas = match s.strip_prefix("unit:") {
        Some(m) => {
            let m: usize = m.parse().map_err(|_| CliError::input(format!("bad ζ-grid {s:?}")))?;
            unit_circle(m)
        }
        None => parse_complex_list(s)?,
    };
    if zetas.is_empty() || zetas.iter().any(|z| *z == C64::new(0.0, 0.0)) {
        return Err(CliError::input(format!("ζ-grid {s:?} is empty or contains 0")));
    }
    Ok(zetas)
}

/// `cx,cy,h,n`: an `n × n` grid of spacing `h` centered at `cx + i·cy`.
pub fn parse_grid(s: &str) -> Result<Grid, CliError> {
    let bad = || CliError::input(format!("grid must be cx,cy,h,n, got {s:?}"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let n: usize = parts[3].parse().map_err(|_| bad())?;
    let h = num(parts[2])?;
    if n < 3 || !h.is_finite() || h <= 0.0 {
        return Err(CliError::input(format!("grid needs n ≥ 3 and h > 0, got {s:?}")));
    }
    Ok(Grid::centered(C64::new(num(parts[0])?, num(parts[1])?), h, n))
}

/// `a,b,c|d,e,f`, or a single triple whose complement is the second one.
pub fn parse_partition(s: &str) -> Result<SpinPartition, CliError> {
    let full = if s.contains('|') {
        s.to_string()
    } else {
        let first: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::input(format!("bad partition {s:?}")))?;
        let rest: Vec<String> = (0..6).filter(|w| !first.contains(w)).map(|w| w.to_string()).collect();
        format!("{s}|{}", rest.join(","))
    };
    full.parse().map_err(|e| CliError::input(format!("{e}")))
}

/// Built-ins: `empty`, `vacuum`, `lawson` or `lawson:A,G`.
pub fn load_potential(spec: &str) -> Result<Loaded<PotentialFile>, CliError> {
    let Some(name) = builtin(spec) else {
        return read_json(spec, "potential");
    };
    let plain = |potential| PotentialFile { potential, partition: None, weierstrass_locations: None };
    let value = match name.split_once(':') {
        None if name == "empty" => plain(DPWPotential::empty()),
        None if name == "vacuum" => plain(DPWPotential::vacuum(C64::new(1.0, 0.0))),
        None if name == "lawson" => lawson_file(C64::new(0.0, 0.0), C64::new(1.0, 0.0))?,
        Some(("lawson", args)) => {
            let v = parse_complex_list(args)?;
            if v.len() != 2 {
                return Err(CliError::input(format!("builtin:lawson:A,G needs two numbers, got {args:?}")));
            }
            lawson_file(v[0], v[1])?
        }
        _ => return Err(CliError::input(format!("unknown potential {spec:?}"))),
    };
    Ok(Loaded { value, bytes: None })
}

fn lawson_file(a: C64, g: C64) -> Result<PotentialFile, CliError> {
    let potential = lawson_potential(a, g).map_err(|e| CliError::input(format!("lawson potential: {e}")))?;
    Ok(PotentialFile {
        potential,
        partition: Some("012|345".parse().expect("valid partition")),
        weierstrass_locations: Some(lawson_weierstrass_locations()),
    })
}

/// Built-in: `lawson` (`y² = z⁶ − 1`).
pub fn load_curve(spec: &str) -> Result<Loaded<HyperellipticCurve>, CliError> {
    match builtin(spec) {
        Some("lawson") => Ok(Loaded { value: HyperellipticCurve::lawson(), bytes: None }),
        Some(_) => Err(CliError::input(format!("unknown curve {spec:?}"))),
        None => read_json(spec, "curve"),
    }
}

/// Built-ins `sphere`, `clifford`, `flat` are sampled on `grid`.
pub fn load_chart(spec: &str, grid: &str) -> Result<Loaded<MinimalChartData>, CliError> {
    let Some(name) = builtin(spec) else {
        return read_json(spec, "chart");
    };
    let g = parse_grid(grid)?;
    let value = match name {
        "sphere" => MinimalChartData::round_sphere(g),
        "clifford" => MinimalChartData::clifford(g),
        "flat" => MinimalChartData::flat_zero(g),
        _ => return Err(CliError::input(format!("unknown chart {spec:?}"))),
    };
    Ok(Loaded { value, bytes: None })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LoopSpec {
    Path(Path),
    Circle { center: C64, radius: f64, n: usize },
    Lasso { base: C64, center: C64, radius: f64, n: usize },
}

/// A JSON list of loops, each `{"path": {"waypoints": [...], "closed": true}}`,
/// `{"circle": {"center", "radius", "n"}}` or `{"lasso": {"base", "center", "radius", "n"}}`.
pub fn load_loops(spec: &str) -> Result<Loaded<Vec<Path>>, CliError> {
    let raw: Loaded<Vec<LoopSpec>> = read_json(spec, "loops")?;
    let value = raw
        .value
        .into_iter()
        .map(|l| match l {
            LoopSpec::Path(p) => p,
            LoopSpec::Circle { center, radius, n } => Path::circle(center, radius, n),
            LoopSpec::Lasso { base, center, radius, n } => Path::lasso(base, center, radius, n),
        })
        .collect();
    Ok(Loaded { value, bytes: raw.bytes })
}
