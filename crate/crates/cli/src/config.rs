//! `--config FILE` support: `key = value` lines become `--key value` flags
//! inserted right after the subcommand, so explicit flags override them.

use std::fs;

use dimerloops::Error;

const NESTED: [(&str, &[&str]); 4] = [
    ("ddm", &["stats"]),
    ("mdd", &["twopoint", "cesaro", "endpoint-law"]),
    ("sample", &["ddm"]),
    ("verify", &["upsilon", "leibniz", "injection", "identities"]),
];
const TOP: [&str; 8] = [
    "count",
    "ddm",
    "mdd",
    "sample",
    "verify",
    "rd",
    "constants",
    "suite",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("config line {}: expected key = value", no + 1))
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "config line {}: empty key",
                no + 1
            )));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Returns `argv` with the config entries spliced in.
pub fn expand(argv: &[String]) -> Result<Vec<String>, Error> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--config" {
            path = argv.get(i + 1).cloned();
            if path.is_none() {
                return Err(Error::InvalidArgument("--config needs a file".into()));
            }
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
            i += 1;
            continue;
        }
        rest.push(a.clone());
        i += 1;
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)?;
    let entries = parse(&text)?;
    let Some(top) = rest.iter().position(|a| TOP.contains(&a.as_str())) else {
        return Ok(rest);
    };
    let mut at = top + 1;
    if let Some((_, subs)) = NESTED.iter().find(|(n, _)| *n == rest[top]) {
        if rest.get(at).is_some_and(|a| subs.contains(&a.as_str())) {
            at += 1;
        }
    }
    let mut flags = Vec::new();
    for (k, v) in entries {
        let flag = format!("--{}", k.replace('_', "-"));
        match v.as_str() {
            "true" => flags.push(flag),
            "false" => {}
            _ => {
                flags.push(flag);
                flags.push(v);
            }
        }
    }
    rest.splice(at..at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_comments() {
        let e = parse("# header\nseed = 7\n\nsamples=10 # trailing\n").unwrap();
        assert_eq!(
            e,
            vec![("seed".into(), "7".into()), ("samples".into(), "10".into())]
        );
        assert!(parse("novalue\n").is_err());
    }

    #[test]
    fn splices_after_nested_subcommand() {
        let dir = std::env::temp_dir().join(format!("dimerloops-cfg-{}", std::process::id()));
        fs::write(&dir, "seed = 9\nmc_samples = 3\n").unwrap();
        let argv: Vec<String> = [
            "dimerloops",
            "--config",
            dir.to_str().unwrap(),
            "sample",
            "ddm",
            "--L",
            "4",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let out = expand(&argv).unwrap();
        assert_eq!(
            out,
            vec![
                "dimerloops",
                "sample",
                "ddm",
                "--seed",
                "9",
                "--mc-samples",
                "3",
                "--L",
                "4"
            ]
        );
        fs::remove_file(&dir).unwrap();
    }
}
