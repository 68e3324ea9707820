//! File formats and input parsing.
//!
//! Mesh file: first significant line `N F`, then `F` lines of three 0-based
//! vertex indices. Weight file: one `i j phi` line per edge (radians),
//! absent edges default to 0. Radii / target files: one value per line.
//! Blank lines and `#` comments are ignored everywhere.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use calabi_core::mesh::{TriangulatedSurface, WeightAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::File { path: path.display().to_string(), source: e })
}

/// Loads and validates a mesh file.
pub fn load_mesh(path: &Path) -> Result<TriangulatedSurface, CliError> {
    let text = read(path)?;
    let mut lines = significant_lines(&text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty mesh file"))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_error(path, ln, "expected `N F` header"))?;
    let f: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_error(path, ln, "expected `N F` header"))?;
    if it.next().is_some() {
        return Err(parse_error(path, ln, "trailing tokens after `N F` header"));
    }
    let mut faces = Vec::with_capacity(f);
    for _ in 0..f {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_error(path, 0, format!("expected {f} face lines")))?;
        let idx: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        match idx.as_deref() {
            Ok([a, b, c]) => faces.push([*a, *b, *c]),
            _ => return Err(parse_error(path, ln, "expected three vertex indices")),
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_error(path, ln, "unexpected content after face list"));
    }
    Ok(TriangulatedSurface::build(n, &faces)?)
}

/// Loads an edge weight file against a surface; unlisted edges get 0.
pub fn load_weights(
    path: &Path,
    surface: &TriangulatedSurface,
) -> Result<WeightAssignment, CliError> {
    let text = read(path)?;
    let mut entries = Vec::new();
    for (ln, line) in significant_lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| -> Option<(usize, usize, f64)> {
            match toks.as_slice() {
                [a, b, phi] => Some((a.parse().ok()?, b.parse().ok()?, phi.parse().ok()?)),
                _ => None,
            }
        })();
        let (a, b, phi) =
            parsed.ok_or_else(|| parse_error(path, ln, "expected `i j phi`"))?;
        entries.push((a, b, phi));
    }
    Ok(WeightAssignment::from_edge_values(surface, &entries)?)
}

/// One float per significant line.
pub fn load_vector(path: &Path, expected: usize) -> Result<Vec<f64>, CliError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (ln, line) in significant_lines(&text) {
        let v: f64 = line
            .parse()
            .map_err(|_| parse_error(path, ln, "expected one number per line"))?;
        out.push(v);
    }
    if out.len() != expected {
        return Err(parse_error(
            path,
            0,
            format!("expected {expected} values, found {}", out.len()),
        ));
    }
    Ok(out)
}

/// How initial radii are produced: `const:<x>`, `rand:<seed>` or
/// `file:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiiSpec {
    Const(f64),
    Rand { seed: u64 },
    File(PathBuf),
}

impl Default for RadiiSpec {
    fn default() -> Self {
        RadiiSpec::Const(1.0)
    }
}

impl FromStr for RadiiSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected const:<x>, rand:<seed> or file:<path>"))?;
        match kind {
            "const" => {
                let v: f64 = rest.parse().map_err(|_| format!("`{rest}` is not a number"))?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("constant radius must be positive, got {v}"));
                }
                Ok(RadiiSpec::Const(v))
            }
            "rand" => {
                let seed: u64 = rest.parse().map_err(|_| format!("`{rest}` is not a seed"))?;
                Ok(RadiiSpec::Rand { seed })
            }
            "file" => Ok(RadiiSpec::File(PathBuf::from(rest))),
            other => Err(format!("unknown radii kind `{other}`")),
        }
    }
}

/// Log-uniform sampling window for `rand:<seed>` radii.
pub const RAND_RADII_RANGE: (f64, f64) = (0.1, 10.0);

impl RadiiSpec {
    /// Produces the radius vector for `n` vertices.
    pub fn realize(&self, n: usize) -> Result<Vec<f64>, CliError> {
        match self {
            RadiiSpec::Const(v) => Ok(vec![*v; n]),
            RadiiSpec::Rand { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let (lo, hi) = RAND_RADII_RANGE;
                Ok((0..n).map(|_| rng.gen_range(lo.ln()..hi.ln()).exp()).collect())
            }
            RadiiSpec::File(path) => load_vector(path, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_spec_parses() {
        assert_eq!("const:2.5".parse::<RadiiSpec>().unwrap(), RadiiSpec::Const(2.5));
        assert_eq!("rand:42".parse::<RadiiSpec>().unwrap(), RadiiSpec::Rand { seed: 42 });
        assert_eq!(
            "file:r.txt".parse::<RadiiSpec>().unwrap(),
            RadiiSpec::File(PathBuf::from("r.txt"))
        );
        assert!("const:-1".parse::<RadiiSpec>().is_err());
        assert!("bogus:1".parse::<RadiiSpec>().is_err());
        assert!("const".parse::<RadiiSpec>().is_err());
    }

    #[test]
    fn rand_radii_are_seeded_and_in_range() {
        let a = RadiiSpec::Rand { seed: 7 }.realize(32).unwrap();
        let b = RadiiSpec::Rand { seed: 7 }.realize(32).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&r| (0.1..=10.0).contains(&r)));
        let c = RadiiSpec::Rand { seed: 8 }.realize(32).unwrap();
        assert_ne!(a, c);
    }
}
