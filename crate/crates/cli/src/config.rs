//! Run configuration: a flat `key = value` file with `[section]` headers,
//! overridden by command-line flags.
//!
//! ```text
//! # comments start with '#'
//! [grid]
//! domain = lshape          # cube | lshape | slab | explicit boxes
//! h = 1/4, 1/8
//! bc = partial             # none | full | partial
//! gamma = z-, x+
//!
//! [run]
//! variant = dS_dC, S_C
//! seed = 7
//! out = results
//! format = both            # csv | svg | both
//! report = identities.csv
//! only = nye, kroener
//!
//! [babykorn]
//! fields = 50
//! bound = 2.05
//! ```
//!
//! Explicit boxes are written `x0,y0,z0:x1,y1,z1` separated by `;`, with
//! rational coordinates (e.g. `0,0,0:1,1,1; 1,0,0:2,1/2,1`).

use std::collections::BTreeMap;
use std::fmt;

use korn_core::grid::{Face, Grid, Preset};
use korn_core::korn::{Bc, Variant};
use korn_core::poly::{parse_rational, Aabb};
use korn_core::scalar::Rational;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KNOWN_KEYS: [&str; 13] = [
    "grid.domain",
    "grid.h",
    "grid.bc",
    "grid.gamma",
    "run.variant",
    "run.seed",
    "run.out",
    "run.format",
    "run.report",
    "run.only",
    "babykorn.fields",
    "babykorn.bound",
    "identities.cases",
];

/// `section.key → value`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected 'key = value'", lineno + 1));
            };
            let full = format!("{section}.{}", key.trim());
            if !KNOWN_KEYS.contains(&full.as_str()) {
                return err(format!("line {}: unknown key '{full}'", lineno + 1));
            }
            entries.insert(full, value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Preset(Preset),
    Boxes(Vec<Aabb>),
}

impl DomainSpec {
    pub fn boxes(&self) -> Vec<Aabb> {
        match self {
            DomainSpec::Preset(p) => p.boxes(),
            DomainSpec::Boxes(b) => b.clone(),
        }
    }
}

/// Fully resolved options for one command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub domain: DomainSpec,
    /// Sorted descending.
    pub h: Vec<Rational>,
    pub variants: Vec<Variant>,
    pub bc: Bc,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub report: Option<String>,
    pub only: Option<Vec<String>>,
    pub fields: usize,
    pub bound: f64,
}

impl RunConfig {
    pub fn grid(&self, h: &Rational) -> Result<Grid, ConfigError> {
        Grid::build(&self.domain.boxes(), h, &self.bc.gamma()).map_err(|e| ConfigError(e.to_string()))
    }
}

/// Values that are command-specific when absent from both file and flags.
pub struct Defaults {
    pub h: &'static str,
    pub variants: &'static str,
    pub bc: &'static str,
    pub fields: usize,
}

/// Raw string options; flags (`over`) win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub domain: Option<String>,
    pub h: Option<String>,
    pub variant: Option<String>,
    pub bc: Option<String>,
    pub gamma: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub report: Option<String>,
    pub only: Option<String>,
    pub fields: Option<usize>,
    pub bound: Option<f64>,
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_domain(s: &str) -> Result<DomainSpec, ConfigError> {
    if let Ok(p) = s.parse::<Preset>() {
        return Ok(DomainSpec::Preset(p));
    }
    if !s.contains(':') {
        return err(format!("unknown domain '{s}' (expected cube, lshape, slab or x0,y0,z0:x1,y1,z1;...)"));
    }
    let mut boxes = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((lo, hi)) = part.split_once(':') else {
            return err(format!("box '{part}' must be lo:hi"));
        };
        let corner = |t: &str| -> Result<[Rational; 3], ConfigError> {
            let v: Vec<Rational> = list(t)
                .map(|x| parse_rational(x).ok_or_else(|| ConfigError(format!("bad coordinate '{x}'"))))
                .collect::<Result<_, _>>()?;
            <[Rational; 3]>::try_from(v).map_err(|_| ConfigError(format!("corner '{t}' needs three coordinates")))
        };
        let (lo, hi) = (corner(lo)?, corner(hi)?);
        if (0..3).any(|k| lo[k] >= hi[k]) {
            return err(format!("box '{part}' is empty"));
        }
        boxes.push(Aabb::new(lo, hi));
    }
    if boxes.is_empty() {
        return err("no boxes given");
    }
    Ok(DomainSpec::Boxes(boxes))
}

pub fn parse_h_list(s: &str) -> Result<Vec<Rational>, ConfigError> {
    let mut hs: Vec<Rational> = list(s)
        .map(|t| parse_rational(t).ok_or_else(|| ConfigError(format!("bad spacing '{t}'"))))
        .collect::<Result<_, _>>()?;
    if hs.is_empty() {
        return err("empty h list");
    }
    if hs.iter().any(|h| h <= &Rational::from_integer(0.into())) {
        return err("h values must be positive");
    }
    hs.sort_by(|a, b| b.cmp(a));
    hs.dedup();
    Ok(hs)
}

fn parse_bc(bc: Option<&str>, gamma: Option<&str>) -> Result<Bc, ConfigError> {
    let faces: Option<Vec<Face>> = gamma
        .map(|g| list(g).map(|f| f.parse::<Face>().map_err(|e| ConfigError(e.to_string()))).collect::<Result<_, _>>())
        .transpose()?;
    match (bc, faces) {
        (None | Some("partial"), Some(f)) => {
            if f.is_empty() {
                err("gamma lists no faces")
            } else {
                Ok(Bc::Partial(f))
            }
        }
        (Some("partial"), None) => err("bc = partial needs gamma"),
        (Some("none"), None) => Ok(Bc::None),
        (Some("full"), None) => Ok(Bc::Full),
        (Some(b @ ("none" | "full")), Some(_)) => err(format!("gamma given together with bc = {b}")),
        (Some(other), _) => err(format!("unknown bc '{other}' (expected none, full, partial)")),
        (None, None) => unreachable!("callers supply a default"),
    }
}

pub fn resolve(file: &ConfigFile, over: &Overrides, defaults: &Defaults) -> Result<RunConfig, ConfigError> {
    let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).map(str::to_string));

    let domain = parse_domain(&pick(&over.domain, "grid.domain").unwrap_or_else(|| "cube".into()))?;
    let h = parse_h_list(&pick(&over.h, "grid.h").unwrap_or_else(|| defaults.h.into()))?;
    let variants: Vec<Variant> = list(&pick(&over.variant, "run.variant").unwrap_or_else(|| defaults.variants.into()))
        .map(|v| v.parse::<Variant>().map_err(ConfigError))
        .collect::<Result<_, _>>()?;
    if variants.is_empty() {
        return err("at least one variant is required");
    }
    let gamma = pick(&over.gamma, "grid.gamma");
    let bc_raw = pick(&over.bc, "grid.bc");
    let bc = match (bc_raw.as_deref(), gamma.as_deref()) {
        (None, None) => parse_bc(Some(defaults.bc), None)?,
        (b, g) => parse_bc(b, g)?,
    };
    let seed = match over.seed {
        Some(s) => s,
        None => match file.get("run.seed") {
            Some(s) => s.parse().map_err(|_| ConfigError(format!("bad seed '{s}'")))?,
            None => 2021,
        },
    };
    let format = match pick(&over.format, "run.format").as_deref() {
        None | Some("csv") => Format::Csv,
        Some("svg") => Format::Svg,
        Some("both") => Format::Both,
        Some(other) => return err(format!("unknown format '{other}' (expected csv, svg, both)")),
    };
    let fields = match over.fields {
        Some(n) => n,
        None => match file.get("babykorn.fields") {
            Some(s) => s.parse().map_err(|_| ConfigError(format!("bad field count '{s}'")))?,
            None => defaults.fields,
        },
    };
    let bound = match over.bound {
        Some(b) => b,
        None => match file.get("babykorn.bound") {
            Some(s) => s.parse().map_err(|_| ConfigError(format!("bad bound '{s}'")))?,
            None => 2.05,
        },
    };
    Ok(RunConfig {
        domain,
        h,
        variants,
        bc,
        seed,
        out: pick(&over.out, "run.out"),
        format,
        report: pick(&over.report, "run.report"),
        only: pick(&over.only, "run.only").map(|s| list(&s).map(str::to_string).collect()),
        fields,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: Defaults = Defaults { h: "1/4", variants: "dS_dC", bc: "full", fields: 3 };

    #[test]
    fn file_then_flags() {
        let file = ConfigFile::parse("[grid]\nh = 1/8, 1/4 # two levels\ndomain = slab\n[run]\nseed = 5\n").unwrap();
        let over = Overrides { seed: Some(9), ..Default::default() };
        let cfg = resolve(&file, &over, &DEFAULTS).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.domain, DomainSpec::Preset(Preset::Slab));
        assert_eq!(cfg.h[0], Rational::new(1.into(), 4.into()));
        assert_eq!(cfg.bc, Bc::Full);
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        assert!(ConfigFile::parse("[grid]\nspacing = 1/4\n").is_err());
        assert!(ConfigFile::parse("[grid]\nh 1/4\n").is_err());
        let file = ConfigFile::default();
        let bad = |o: Overrides| resolve(&file, &o, &DEFAULTS).is_err();
        assert!(bad(Overrides { h: Some("0".into()), ..Default::default() }));
        assert!(bad(Overrides { variant: Some("dS".into()), ..Default::default() }));
        assert!(bad(Overrides { bc: Some("full".into()), gamma: Some("z-".into()), ..Default::default() }));
        assert!(bad(Overrides { format: Some("png".into()), ..Default::default() }));
    }

    #[test]
    fn gamma_implies_partial() {
        let o = Overrides { gamma: Some("z-, x+".into()), ..Default::default() };
        let cfg = resolve(&ConfigFile::default(), &o, &DEFAULTS).unwrap();
        assert_eq!(cfg.bc, Bc::Partial(vec!["z-".parse().unwrap(), "x+".parse().unwrap()]));
    }

    #[test]
    fn explicit_boxes() {
        let d = parse_domain("0,0,0:1,1,1; 1,0,0:2,1/2,1").unwrap();
        assert_eq!(d.boxes().len(), 2);
        assert!(parse_domain("0,0,0:0,1,1").is_err());
        assert!(parse_domain("0,0:1,1").is_err());
    }
}
