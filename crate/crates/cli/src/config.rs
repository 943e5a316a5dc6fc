//! `--config` expansion: file keys become flags inserted right after the
//! subcommand, so flags given on the command line still win.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

/// Global options that take a value and may precede the subcommand.
const VALUED_GLOBALS: [&str; 3] = ["--out", "--seed", "--config"];

#[derive(Debug)]
pub struct ConfigError(pub String);

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Reads the `config` object of an emitted manifest.
pub fn parse_manifest(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ConfigError(format!("manifest: {e}")))?;
    let obj = v
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(|| ConfigError("manifest has no `config` object".into()))?;
    Ok(obj
        .iter()
        .filter_map(|(k, v)| {
            let s = match v {
                Value::Null => return None,
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            Some((k.clone(), s))
        })
        .collect())
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_manifest(&text)
    } else {
        parse_flat(&text)
    }
}

fn to_flags(pairs: &[(String, String)]) -> Vec<OsString> {
    pairs
        .iter()
        .filter_map(|(k, v)| {
            let key = k.replace('_', "-");
            match v.as_str() {
                "true" => Some(format!("--{key}")),
                "false" | "null" => None,
                _ => Some(format!("--{key}={v}")),
            }
        })
        .map(OsString::from)
        .collect()
}

/// Removes `--config` from `argv` and splices the file's flags after the
/// subcommand token.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    if let Some(bin) = it.next() {
        rest.push(bin);
    }
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let path = it
                .next()
                .ok_or_else(|| ConfigError("--config needs a file".into()))?;
            config = Some(path);
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(OsString::from(path));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let flags = to_flags(&load(Path::new(&path))?);
    // first token that is neither a flag nor a global option's value
    let mut i = 1;
    while i < rest.len() {
        let s = rest[i].to_string_lossy();
        if VALUED_GLOBALS.contains(&s.as_ref()) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            break;
        }
    }
    let at = (i + 1).min(rest.len());
    rest.splice(at..at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flat_and_manifest_parsing() {
        let p = parse_flat("# c\ntrunc = 50 # t\n\nkhat=-3,-2\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("trunc".into(), "50".into()),
                ("khat".into(), "-3,-2".into())
            ]
        );
        assert!(parse_flat("oops").is_err());
        let m = parse_manifest(r#"{"config":{"refine":true,"trunc":50,"dt":null,"khat":"-3,-2"}}"#)
            .unwrap();
        assert_eq!(
            to_flags(&m),
            os(&["--khat=-3,-2", "--refine", "--trunc=50"])
        );
    }

    #[test]
    fn flags_land_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "sample_every = 3\n").unwrap();
        let p = path.to_str().unwrap();
        let got = expand(os(&[
            "bin", "--seed", "4", "--config", p, "nls-sim", "--n", "6",
        ]))
        .unwrap();
        assert_eq!(
            got,
            os(&[
                "bin",
                "--seed",
                "4",
                "nls-sim",
                "--sample-every=3",
                "--n",
                "6"
            ])
        );
        let got = expand(os(&["bin", "nls-sim", &format!("--config={p}")])).unwrap();
        assert_eq!(got, os(&["bin", "nls-sim", "--sample-every=3"]));
    }
}
