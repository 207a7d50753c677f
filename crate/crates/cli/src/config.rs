//! Flat `key = value` run configuration files.
//!
//! Keys are the long flag names of the subcommand being run. Values from the
//! file are spliced in ahead of the command-line flags, so flags given on the
//! command line win.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Command;

/// Parse `key = value` lines. `#` starts a comment line; blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value", i + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        if out.iter().any(|(k, _)| k == key) {
            bail!("line {}: duplicate key `{key}`", i + 1);
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Turn config entries into flags understood by `command`. Unknown keys are
/// rejected; switches accept `true` or `false`.
pub fn to_flags(entries: &[(String, String)], command: &Command) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        let arg = command
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .with_context(|| format!("unknown key `{key}` for `{}`", command.get_name()))?;
        if arg.get_action().takes_values() {
            if arg.get_num_args().is_some_and(|n| n.max_values() > 1)
                || matches!(arg.get_action(), clap::ArgAction::Append)
            {
                for v in value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                    flags.push(format!("--{key}={v}"));
                }
            } else {
                flags.push(format!("--{key}={value}"));
            }
        } else {
            match value.as_str() {
                "true" => flags.push(format!("--{key}")),
                "false" => {}
                other => bail!("key `{key}` is a switch; expected true or false, got `{other}`"),
            }
        }
    }
    Ok(flags)
}

/// Rewrite raw process arguments: pull out `--config <file>` and splice the
/// file's flags in right after the subcommand name.
pub fn expand_args(args: Vec<String>, root: &Command) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = Some(iter.next().context("--config needs a file")?);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let Some(sub_pos) = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        bail!("--config needs a subcommand");
    };
    let command = root
        .find_subcommand(&rest[sub_pos])
        .with_context(|| format!("unknown subcommand `{}`", rest[sub_pos]))?;
    let text = read(Path::new(&path))?;
    let entries = parse(&text).with_context(|| format!("config {path}"))?;
    let flags = to_flags(&entries, command).with_context(|| format!("config {path}"))?;
    rest.splice(sub_pos + 1..sub_pos + 1, flags);
    Ok(rest)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))
}
