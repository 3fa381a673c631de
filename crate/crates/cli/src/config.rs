//! Flat `key = value` config files. `#` starts a comment; blank lines are
//! ignored; a key may appear once.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Parse config text into `key -> (line, value)`.
pub fn parse(text: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {line}: expected 'key = value'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("line {line}: bad key '{k}'")));
        }
        let v = v.trim_matches('"').to_string();
        if out.insert(k.to_string(), (line, v)).is_some() {
            return Err(CliError::Config(format!("line {line}: duplicate key '{k}'")));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_quotes() {
        let c = parse("# run\nalt = 560\nmap = \"a.csv\"  # gridded\n\n").unwrap();
        assert_eq!(c["alt"], (2, "560".to_string()));
        assert_eq!(c["map"].1, "a.csv");
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(parse("a = 1\na = 2").is_err());
        assert!(parse("just words").is_err());
    }
}
