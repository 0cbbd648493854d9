//! Flat `key = value` configuration files.
//!
//! Each key is a long flag name of the selected subcommand. Entries are
//! spliced into the argument list right after the subcommand path, ahead of
//! the user's own flags; every subcommand lets later occurrences override
//! earlier ones, which gives flags > file > defaults.

use std::path::Path;

/// Flags taking several whitespace-separated values.
const MULTI: &[&str] = &[
    "window", "params", "p0", "v", "x0", "v0", "t", "eps", "grid", "eta", "s", "point", "bump-center", "range",
];

/// Flags that take a value (used to skip over global flags when locating the
/// subcommand path).
const GLOBAL_WITH_VALUE: &[&str] = &["--config", "--summary"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<ConfigEntry>, String> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(format!("config line {}: bad key '{}'", n + 1, k.trim()));
        }
        let key = key.replace('_', "-");
        if key == "config" {
            return Err(format!("config line {}: nested config files are not supported", n + 1));
        }
        // a repeated key replaces the earlier entry
        out.retain(|e| e.key != key);
        out.push(ConfigEntry { key, value: v.trim().to_string() });
    }
    Ok(out)
}

fn to_tokens(entries: &[ConfigEntry]) -> Result<Vec<String>, String> {
    let mut toks = Vec::new();
    for e in entries {
        let flag = format!("--{}", e.key);
        if MULTI.contains(&e.key.as_str()) {
            toks.push(flag);
            toks.extend(e.value.split_whitespace().map(str::to_string));
        } else {
            match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" => toks.push(flag),
                "false" | "no" | "off" => {}
                _ => toks.push(format!("{flag}={}", e.value)),
            }
        }
    }
    Ok(toks)
}

/// Find `--config <path>` (or `--config=<path>`) in `args`.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Index just past the subcommand path (`residual`, `stability qform`, ...).
fn subcommand_end(args: &[String]) -> usize {
    let mut i = 1;
    let mut end = 1;
    while i < args.len() {
        let a = &args[i];
        if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            if end > 1 {
                break;
            }
            i += 1;
            continue;
        }
        i += 1;
        end = i;
    }
    end
}

/// Splice the configuration file named by `--config` into `args`.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config '{path}': {e}"))?;
    let toks = to_tokens(&parse(&text)?)?;
    let at = subcommand_end(&args);
    let mut out = args[..at].to_vec();
    out.extend(toks);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_and_splices() {
        let e = parse("# comment\ngrid = 10\nwindow = -1 1 -1 1 -1 1\nu = x + exp(z)*y\nflip_orientation = true\ngrid=12\n").unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e.last().unwrap().value, "12");
        let t = to_tokens(&e).unwrap();
        assert_eq!(t[0], "--window");
        assert_eq!(t[1], "-1");
        assert!(t.contains(&"--u=x + exp(z)*y".to_string()));
        assert!(t.contains(&"--flip-orientation".to_string()));
        assert!(parse("novalue").is_err());
    }

    #[test]
    fn finds_subcommand_path() {
        assert_eq!(subcommand_end(&s(&["sol-geo", "stability", "qform", "--battery", "5"])), 3);
        assert_eq!(subcommand_end(&s(&["sol-geo", "--config", "f", "residual", "--grid", "3"])), 4);
        assert_eq!(subcommand_end(&s(&["sol-geo", "curve"])), 2);
    }
}
