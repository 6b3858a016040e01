//! `--config` files: `key=value` lines whose keys are long flag names.
//!
//! Values are spliced in right after the subcommand, ahead of the user's own
//! flags; since every flag overrides earlier occurrences of itself, the
//! command line wins.

use std::fs;

/// The path given with `--config`, if any.
fn config_path(argv: &[String]) -> Option<Result<String, String>> {
    for (i, a) in argv.iter().enumerate().skip(1) {
        if a == "--config" {
            return Some(argv.get(i + 1).cloned().ok_or_else(|| "--config needs a file".to_string()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(Ok(p.to_string()));
        }
    }
    None
}

/// Flags from one config file, in file order.
pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("config line {}: empty key", lineno + 1));
        }
        if key == "config" {
            return Err(format!("config line {}: nested config files are not supported", lineno + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => out.push(format!("--{key}={value}")),
        }
    }
    Ok(out)
}

/// `argv` with the config file's flags inserted after the subcommand.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = path?;
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config '{path}': {e}"))?;
    let extra = parse(&text)?;
    // the subcommand is the first bare word that is not the config path
    let mut skip_next = false;
    let mut at = None;
    for (i, a) in argv.iter().enumerate().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--config" {
            skip_next = true;
        } else if !a.starts_with('-') {
            at = Some(i);
            break;
        }
    }
    let Some(at) = at else {
        // no subcommand: let the parser report it
        return Ok(argv);
    };
    let mut out = argv[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}
