//! File formats: native net text, PNML import, query files, witness XML and
//! benchmark metadata sidecars.

mod pnml;
mod witness_xml;

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub use pnml::parse_pnml;
pub use witness_xml::{parse_witness_xml, write_witness_xml, WitnessDocument};

use crate::encodings::{BenchmarkKind, Metadata};
use crate::formula::{parse_query, HyperQuery, QueryError};
use crate::net::{Net, NetError, Tokens};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Net { line: usize, source: NetError },
    #[error("xml: {0}")]
    Xml(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

pub fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a net, as PNML if the file looks like XML and in the native format
/// otherwise.
pub fn read_net(path: &Path) -> Result<Net, FormatError> {
    let text = read_file(path)?;
    let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pnml")) || text.trim_start().starts_with('<');
    if is_xml {
        parse_pnml(&text)
    } else {
        parse_net(&text)
    }
}

fn weight(tok: Option<&str>, line: usize) -> Result<Tokens, FormatError> {
    match tok {
        None => Ok(1),
        Some(s) => s.parse().map_err(|_| syntax(line, format!("bad weight `{s}`"))),
    }
}

/// Parses the native line format:
///
/// ```text
/// place <id> <tokens>
/// trans <id>
/// arc <place> -> <trans> [weight]
/// arc <trans> -> <place> [weight]
/// inhib <place> -o <trans> [threshold]
/// ```
///
/// `#` starts a comment. Places and transitions must be declared before use.
pub fn parse_net(text: &str) -> Result<Net, FormatError> {
    let mut b = Net::builder();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let net_err = |source| FormatError::Net { line, source };
        match toks.as_slice() {
            [] => {}
            ["place", id, n] => {
                let n: Tokens = n.parse().map_err(|_| syntax(line, format!("bad token count `{n}`")))?;
                b.place(*id, n).map_err(net_err)?;
            }
            ["trans", id] => {
                b.transition(*id).map_err(net_err)?;
            }
            ["arc", from, "->", to, rest @ ..] if rest.len() <= 1 => {
                let w = weight(rest.first().copied(), line)?;
                if b.has_place(from) && b.has_transition(to) {
                    b.input(from, to, w).map_err(net_err)?;
                } else if b.has_transition(from) && b.has_place(to) {
                    b.output(from, to, w).map_err(net_err)?;
                } else {
                    return Err(syntax(line, format!("arc `{from} -> {to}` must join a declared place and transition")));
                }
            }
            ["inhib", p, "-o", t, rest @ ..] if rest.len() <= 1 => {
                let h = weight(rest.first().copied(), line)?;
                b.inhibitor(p, t, h).map_err(net_err)?;
            }
            _ => return Err(syntax(line, format!("cannot parse `{}`", content.trim()))),
        }
    }
    Ok(b.build())
}

/// Native text for `net`; [`parse_net`] reads it back to an identical net.
pub fn write_net(net: &Net) -> String {
    let mut s = String::new();
    for p in net.places() {
        let _ = writeln!(s, "place {} {}", net.place_name(p), net.initial_marking().get(p));
    }
    for t in net.transitions() {
        let _ = writeln!(s, "trans {}", net.transition_name(t));
    }
    let w = |w: Tokens| if w == 1 { String::new() } else { format!(" {w}") };
    for t in net.transitions() {
        let tn = net.transition_name(t);
        for &(p, n) in net.inputs(t) {
            let _ = writeln!(s, "arc {} -> {tn}{}", net.place_name(p), w(n));
        }
        for &(p, n) in net.outputs(t) {
            let _ = writeln!(s, "arc {tn} -> {}{}", net.place_name(p), w(n));
        }
        for &(p, n) in net.inhibitors(t) {
            let _ = writeln!(s, "inhib {} -o {tn}{}", net.place_name(p), w(n));
        }
    }
    s
}

/// A query file holds one query; lines starting with `#` are ignored.
pub fn parse_query_file(text: &str) -> Result<HyperQuery, FormatError> {
    let body: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
    Ok(parse_query(&body.join("\n"))?)
}

pub fn write_query(q: &HyperQuery) -> String {
    format!("{q}\n")
}

pub fn write_metadata(m: &Metadata) -> String {
    format!(
        "kind: {}\nk: {}\nl: {}\nsource: {}\ntarget: {}\nseed: {}\nscale: {}\nindex: {}\n",
        m.kind.name(),
        m.k,
        m.l,
        m.source,
        m.target,
        m.seed,
        m.scale,
        m.index
    )
}

pub fn parse_metadata(text: &str) -> Result<Metadata, FormatError> {
    let mut get = std::collections::HashMap::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let (k, v) = l.split_once(':').ok_or_else(|| syntax(i + 1, "expected `key: value`"))?;
        get.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let field = |k: &str| get.get(k).ok_or_else(|| syntax(0, format!("missing key `{k}`")));
    fn num<T: std::str::FromStr>(f: &(usize, String)) -> Result<T, FormatError> {
        f.1.parse().map_err(|_| syntax(f.0, format!("bad number `{}`", f.1)))
    }
    let kind = field("kind")?;
    let kind = match kind.1.as_str() {
        "congestion" => BenchmarkKind::Congestion,
        "selfcompose" => BenchmarkKind::SelfComposed,
        "latency" => BenchmarkKind::Latency,
        other => return Err(syntax(kind.0, format!("unknown kind `{other}`"))),
    };
    Ok(Metadata {
        kind,
        k: num(field("k")?)?,
        l: num(field("l")?)?,
        source: field("source")?.1.clone(),
        target: field("target")?.1.clone(),
        seed: num(field("seed")?)?,
        scale: num(field("scale")?)?,
        index: num(field("index")?)?,
    })
}
