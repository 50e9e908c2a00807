//! Value parsers for complex numbers and lattice-length ranges.

use std::ffi::OsString;

use vertex_spectra::C64;

/// Flags taking a list of complex values.
pub const LIST_FLAGS: [&str; 2] = ["--mu", "--lambda"];

/// Rewrites `--mu A B C` as `--mu=A --mu=B --mu=C` so that values with a
/// leading minus are not mistaken for flags.
pub fn expand_lists(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    let mut out = Vec::new();
    // The active list flag and whether it has received a value yet.
    let mut list: Option<(String, bool)> = None;
    for arg in args {
        let text = arg.to_str().map(str::to_owned);
        if let (Some((flag, seen)), Some(t)) = (&mut list, &text) {
            if looks_numeric(t) {
                out.push(format!("{flag}={t}").into());
                *seen = true;
                continue;
            }
        }
        if let Some((flag, false)) = list.take() {
            out.push(flag.into());
        }
        match text.filter(|t| LIST_FLAGS.contains(&t.as_str())) {
            Some(flag) => list = Some((flag, false)),
            None => out.push(arg),
        }
    }
    if let Some((flag, false)) = list {
        out.push(flag.into());
    }
    out
}

fn looks_numeric(t: &str) -> bool {
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    body.starts_with(|c: char| c.is_ascii_digit() || c == '.') || body.starts_with("inf") || body.starts_with("nan")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lengths(pub Vec<usize>);

/// `RE,IM` or a bare real `RE`.
pub fn complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let z = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected RE,IM, got `{s}`")),
    };
    if z.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// `3`, `3..5`, `3..=5`, `3-5` or a comma list `3,5,6`.
pub fn lengths(s: &str) -> Result<Lengths, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a lattice length"));
    let range = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'));
    let out: Vec<usize> = match range {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(format!("empty range `{s}`"));
            }
            (lo..=hi).collect()
        }
        None => s.split(',').map(num).collect::<Result<_, _>>()?,
    };
    if out.is_empty() {
        return Err("no lattice lengths".into());
    }
    Ok(Lengths(out))
}
