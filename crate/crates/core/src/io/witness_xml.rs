use std::fmt::Write as _;

use roxmltree::Document;

use super::FormatError;
use crate::checker::{TraceWitness, Witness};
use crate::net::{Net, Step};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn steps(out: &mut String, net: &Net, steps: &[Step]) {
    for s in steps {
        match s {
            Step::Fire(t) => {
                let _ = write!(out, "<fire t=\"{}\"/>", escape(net.transition_name(*t)));
            }
            Step::Stutter => out.push_str("<stutter/>"),
        }
    }
}

/// Serializes a verdict and its lasso; traces in declaration order.
pub fn write_witness_xml(net: &Net, satisfied: bool, configurations: usize, w: &Witness) -> String {
    let verdict = if satisfied { "SATISFIED" } else { "NOT-SATISFIED" };
    let mut s = format!("<result verdict=\"{verdict}\" configurations=\"{configurations}\">\n");
    for t in &w.traces {
        let _ = writeln!(s, "  <trace var=\"{}\">", escape(&t.var));
        s.push_str("    <prefix>");
        steps(&mut s, net, &t.prefix);
        s.push_str("</prefix>\n    <loop>");
        steps(&mut s, net, &t.cycle);
        s.push_str("</loop>\n  </trace>\n");
    }
    s.push_str("</result>\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDocument {
    pub satisfied: bool,
    pub configurations: usize,
    pub witness: Witness,
}

/// Parses a witness file, resolving transition names against `net`.
pub fn parse_witness_xml(text: &str, net: &Net) -> Result<WitnessDocument, FormatError> {
    let doc = Document::parse(text).map_err(|e| FormatError::Xml(e.to_string()))?;
    let err = |n: roxmltree::Node, msg: String| {
        let pos = doc.text_pos_at(n.range().start);
        FormatError::Xml(format!("{}:{}: {msg}", pos.row, pos.col))
    };
    let root = doc.root_element();
    if !root.has_tag_name("result") {
        return Err(err(root, "expected <result>".into()));
    }
    let satisfied = match root.attribute("verdict") {
        Some("SATISFIED") => true,
        Some("NOT-SATISFIED") => false,
        other => return Err(err(root, format!("bad verdict {other:?}"))),
    };
    let configurations = root
        .attribute("configurations")
        .unwrap_or("0")
        .parse()
        .map_err(|_| err(root, "bad configurations count".into()))?;
    let mut traces = Vec::new();
    for tr in root.children().filter(|n| n.is_element()) {
        if !tr.has_tag_name("trace") {
            return Err(err(tr, format!("unexpected <{}>", tr.tag_name().name())));
        }
        let var = tr.attribute("var").ok_or_else(|| err(tr, "trace without var".into()))?;
        let mut parts: [Option<Vec<Step>>; 2] = [None, None];
        for part in tr.children().filter(|n| n.is_element()) {
            let slot = match part.tag_name().name() {
                "prefix" => 0,
                "loop" => 1,
                other => return Err(err(part, format!("unexpected <{other}>"))),
            };
            let mut seq = Vec::new();
            for s in part.children().filter(|n| n.is_element()) {
                seq.push(match s.tag_name().name() {
                    "stutter" => Step::Stutter,
                    "fire" => {
                        let name = s.attribute("t").ok_or_else(|| err(s, "fire without t".into()))?;
                        Step::Fire(net.transition(name).map_err(|e| err(s, e.to_string()))?)
                    }
                    other => return Err(err(s, format!("unexpected <{other}>"))),
                });
            }
            if parts[slot].replace(seq).is_some() {
                return Err(err(part, "repeated element".into()));
            }
        }
        let [prefix, cycle] = parts;
        traces.push(TraceWitness {
            var: var.to_string(),
            prefix: prefix.unwrap_or_default(),
            cycle: cycle.ok_or_else(|| err(tr, "trace without <loop>".into()))?,
        });
    }
    Ok(WitnessDocument {
        satisfied,
        configurations,
        witness: Witness { traces },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> Net {
        let mut b = Net::builder();
        b.place("P", 1).unwrap();
        b.transition("t0").unwrap();
        b.input("P", "t0", 1).unwrap();
        b.build()
    }

    #[test]
    fn exact_layout_and_round_trip() {
        let n = net();
        let t0 = n.transition("t0").unwrap();
        let w = Witness {
            traces: vec![
                TraceWitness {
                    var: "p1".into(),
                    prefix: vec![Step::Fire(t0)],
                    cycle: vec![Step::Stutter],
                },
                TraceWitness {
                    var: "p2".into(),
                    prefix: vec![Step::Stutter],
                    cycle: vec![Step::Stutter],
                },
            ],
        };
        let xml = write_witness_xml(&n, true, 12, &w);
        assert_eq!(
            xml,
            "<result verdict=\"SATISFIED\" configurations=\"12\">\n  <trace var=\"p1\">\n    <prefix><fire t=\"t0\"/></prefix>\n    <loop><stutter/></loop>\n  </trace>\n  <trace var=\"p2\">\n    <prefix><stutter/></prefix>\n    <loop><stutter/></loop>\n  </trace>\n</result>\n"
        );
        let back = parse_witness_xml(&xml, &n).unwrap();
        assert_eq!(back.witness, w);
        assert_eq!((back.satisfied, back.configurations), (true, 12));
    }

    #[test]
    fn rejects_unknown_transition() {
        let n = net();
        let xml = "<result verdict=\"SATISFIED\"><trace var=\"p\"><prefix/><loop><fire t=\"zz\"/></loop></trace></result>";
        let e = parse_witness_xml(xml, &n).unwrap_err();
        assert!(e.to_string().contains("zz"), "{e}");
        assert!(parse_witness_xml("<result verdict=\"MAYBE\"/>", &n).is_err());
        assert!(parse_witness_xml("<result verdict=\"SATISFIED\"><trace var=\"p\"><prefix/></trace></result>", &n).is_err());
    }
}
