//! Flat `key = value` config files and the value syntaxes shared by flags.

use std::path::Path;

use dirand::geat::{lin_grid, log_grid};

/// Reads a config file into `--key=value` arguments. Blank lines and lines
/// starting with `#` are skipped; underscores in keys become dashes.
pub fn config_args(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading config {}: {e}", path.display()))?;
    let mut args = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("{}:{}: invalid key `{key}`", path.display(), lineno + 1));
        }
        args.push(format!("--{key}={}", value.trim()));
    }
    Ok(args)
}

/// Splices config-file arguments in front of the command-line flags so
/// that the flags win. The config path is taken from `--config PATH` or
/// `--config=PATH` after the subcommand.
pub fn expand_args(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut iter = argv.iter().skip(2);
    while let Some(a) = iter.next() {
        if a == "--config" {
            path = iter.next().cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let extra = config_args(Path::new(&path))?;
    let mut out = argv[..2].to_vec();
    out.extend(extra);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

/// A count given as an integer or in scientific notation, e.g. `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 1.0 && v <= 2f64.powi(53) && v.fract() == 0.0) {
        return Err(format!("`{s}` is not a positive integer count"));
    }
    Ok(v as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<u64>);

/// Comma-separated counts.
pub fn parse_counts(s: &str) -> Result<Counts, String> {
    s.split(',').map(parse_count).collect::<Result<_, _>>().map(Counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `log:lo:hi:k`, `lin:lo:hi:k` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 4 && (parts[0] == "log" || parts[0] == "lin") {
        let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number in grid `{s}`"));
        let (lo, hi) = (num(parts[1])?, num(parts[2])?);
        let k: usize = parts[3].parse().map_err(|_| format!("`{}` is not a point count", parts[3]))?;
        if k == 0 || !(lo <= hi) {
            return Err(format!("empty grid `{s}`"));
        }
        if parts[0] == "log" {
            if lo <= 0.0 {
                return Err(format!("log grid `{s}` needs a positive lower end"));
            }
            return Ok(Grid(log_grid(lo, hi, k)));
        }
        return Ok(Grid(lin_grid(lo, hi, k)));
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number in grid `{s}`")))
        .collect::<Result<Vec<_>, _>>()
        .map(Grid)
}
