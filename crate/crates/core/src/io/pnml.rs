//! Read-only importer for the P/T subset of PNML.

use roxmltree::{Document, Node};

use super::FormatError;
use crate::net::{Net, Tokens};

fn xml_err(doc: &Document, n: Node, msg: impl std::fmt::Display) -> FormatError {
    let pos = doc.text_pos_at(n.range().start);
    FormatError::Xml(format!("{}:{}: {msg}", pos.row, pos.col))
}

fn id<'a>(doc: &Document, n: Node<'a, '_>) -> Result<&'a str, FormatError> {
    n.attribute("id").ok_or_else(|| xml_err(doc, n, "missing id"))
}

fn child<'a, 'i>(n: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    n.children().find(|c| c.is_element() && c.tag_name().name() == tag)
}

/// Integer in `<tag><text>n</text></tag>`; `default` if absent.
fn inscription(doc: &Document, n: Node, tags: &[&str], default: Tokens) -> Result<Tokens, FormatError> {
    let Some(el) = tags.iter().find_map(|t| child(n, t)) else {
        return Ok(default);
    };
    let text = child(el, "text").and_then(|t| t.text()).unwrap_or("").trim();
    text.parse()
        .map_err(|_| xml_err(doc, el, format!("expected a nonnegative integer, got `{text}`")))
}

/// Places, transitions and arcs are taken from anywhere under `<net>`, so
/// pages are flattened. Element ids become names. Arcs with
/// `<type value="inhibitor"/>` become inhibitor arcs.
pub fn parse_pnml(text: &str) -> Result<Net, FormatError> {
    let doc = Document::parse(text).map_err(|e| FormatError::Xml(e.to_string()))?;
    let net_el = doc
        .descendants()
        .find(|n| n.has_tag_name("net"))
        .ok_or_else(|| FormatError::Xml("no <net> element".into()))?;
    let net_err = |n: Node, e| xml_err(&doc, n, e);
    let mut b = Net::builder();
    let elements: Vec<Node> = net_el.descendants().filter(|n| n.is_element()).collect();
    for &n in &elements {
        match n.tag_name().name() {
            "place" => {
                let m = inscription(&doc, n, &["initialMarking", "hlinitialMarking"], 0)?;
                b.place(id(&doc, n)?, m).map_err(|e| net_err(n, e))?;
            }
            "transition" => {
                b.transition(id(&doc, n)?).map_err(|e| net_err(n, e))?;
            }
            _ => {}
        }
    }
    for &n in elements.iter().filter(|n| n.has_tag_name("arc")) {
        let src = n.attribute("source").ok_or_else(|| xml_err(&doc, n, "arc without source"))?;
        let tgt = n.attribute("target").ok_or_else(|| xml_err(&doc, n, "arc without target"))?;
        let w = inscription(&doc, n, &["inscription"], 1)?;
        let kind = child(n, "type").and_then(|t| t.attribute("value")).unwrap_or("normal");
        let r = match kind {
            "normal" if b.has_place(src) && b.has_transition(tgt) => b.input(src, tgt, w).map(|_| ()),
            "normal" if b.has_transition(src) && b.has_place(tgt) => b.output(src, tgt, w).map(|_| ()),
            "inhibitor" if b.has_place(src) && b.has_transition(tgt) => b.inhibitor(src, tgt, w).map(|_| ()),
            "normal" | "inhibitor" => return Err(xml_err(&doc, n, format!("arc `{src}` -> `{tgt}` has bad endpoints"))),
            other => return Err(xml_err(&doc, n, format!("unsupported arc type `{other}`"))),
        };
        r.map_err(|e| net_err(n, e))?;
    }
    Ok(b.build())
}
