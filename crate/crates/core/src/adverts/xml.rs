//! Canonical XML form of advertisements.
//!
//! Element names and order are fixed. The serializer is the single source of
//! the canonical byte layout; the parser is strict and rejects unknown,
//! missing or misordered elements and attributes.

use quick_xml::events::{BytesStart, Event};
use quick_xml::reader::Reader;

use super::{
    AdvertError, Advertisement, ModuleClassAdvertisement, ModuleClassId, ModuleSpecAdvertisement, ModuleSpecId, PeerId,
    PipeAdvertisement, WsdlDocument, WsdlMessage, WsdlOperation, WsdlPart, WsdlPortType,
};

const DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
const MSA_ROOT: &str = "jxta:MSA";
const MCA_ROOT: &str = "jxta:MCA";
const PIPE_ROOT: &str = "jxta:PipeAdvertisement";
const MSA_CHILDREN: [&str; 10] = ["MSID", "Name", "Ctrr", "SURI", "Vers", "Desc", "Parm", PIPE_ROOT, "Proxy", "Auth"];
const MCA_CHILDREN: [&str; 3] = ["MCID", "Name", "Desc"];

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            c => escape_text(c.encode_utf8(&mut [0; 4]), out),
        }
    }
}

struct XmlWriter {
    out: String,
    depth: usize,
}

impl XmlWriter {
    fn new() -> Self {
        Self { out: DECL.to_string(), depth: 0 }
    }

    fn start_tag(&mut self, tag: &str, attrs: &[(&str, &str)]) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push('<');
        self.out.push_str(tag);
        for (key, value) in attrs {
            self.out.push(' ');
            self.out.push_str(key);
            self.out.push_str("=\"");
            escape_attr(value, &mut self.out);
            self.out.push('"');
        }
    }

    fn open(&mut self, tag: &str, attrs: &[(&str, &str)]) {
        self.start_tag(tag, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    fn close(&mut self, tag: &str) {
        self.depth -= 1;
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push_str(">\n");
    }

    fn empty(&mut self, tag: &str, attrs: &[(&str, &str)]) {
        self.start_tag(tag, attrs);
        self.out.push_str("/>\n");
    }

    fn leaf(&mut self, tag: &str, attrs: &[(&str, &str)], text: &str) {
        if text.is_empty() {
            return self.empty(tag, attrs);
        }
        self.start_tag(tag, attrs);
        self.out.push('>');
        escape_text(text, &mut self.out);
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push_str(">\n");
    }
}

fn write_wsdl(w: &mut XmlWriter, wsdl: &WsdlDocument) {
    w.open("WSDL", &[]);
    w.open("definitions", &[("targetNamespace", &wsdl.target_namespace)]);
    for message in &wsdl.messages {
        if message.parts.is_empty() {
            w.empty("message", &[("name", &message.name)]);
            continue;
        }
        w.open("message", &[("name", &message.name)]);
        for part in &message.parts {
            w.empty("part", &[("name", &part.name), ("type", &part.type_name)]);
        }
        w.close("message");
    }
    for port_type in &wsdl.port_types {
        if port_type.operations.is_empty() {
            w.empty("portType", &[("name", &port_type.name)]);
            continue;
        }
        w.open("portType", &[("name", &port_type.name)]);
        for op in &port_type.operations {
            w.open("operation", &[("name", &op.name)]);
            w.empty("input", &[("message", &op.input_message)]);
            w.empty("output", &[("message", &op.output_message)]);
            w.close("operation");
        }
        w.close("portType");
    }
    w.open("service", &[("name", &wsdl.service_name)]);
    w.open("port", &[]);
    w.empty("address", &[("location", &wsdl.port_address)]);
    w.close("port");
    w.close("service");
    w.close("definitions");
    w.close("WSDL");
}

fn write_msa(w: &mut XmlWriter, msa: &ModuleSpecAdvertisement) {
    w.open(MSA_ROOT, &[]);
    w.leaf("MSID", &[], msa.msid.as_str());
    w.leaf("Name", &[], &msa.name);
    w.leaf("Ctrr", &[], &msa.creator);
    w.leaf("SURI", &[], &msa.spec_uri);
    w.leaf("Vers", &[], &msa.version);
    w.leaf("Desc", &[], &msa.description);
    w.open("Parm", &[]);
    write_wsdl(w, &msa.wsdl);
    w.close("Parm");
    w.open(PIPE_ROOT, &[]);
    w.leaf("Id", &[], &msa.pipe.pipe_id);
    w.leaf("Type", &[], msa.pipe.pipe_type.as_str());
    match msa.pipe.endpoint_peer.phone_alias() {
        Some(phone) => w.leaf("Peer", &[("phone", phone)], msa.pipe.endpoint_peer.as_str()),
        None => w.leaf("Peer", &[], msa.pipe.endpoint_peer.as_str()),
    }
    w.close(PIPE_ROOT);
    w.leaf("Proxy", &[], &msa.proxy);
    w.leaf("Auth", &[], &msa.auth);
    w.close(MSA_ROOT);
}

/// Renders an advertisement in its canonical XML form.
///
/// The input must satisfy its `validate()` invariants; the output is
/// deterministic and UTF-8.
pub fn serialize_advert(advert: &Advertisement) -> String {
    let mut w = XmlWriter::new();
    match advert {
        Advertisement::Spec(msa) => write_msa(&mut w, msa),
        Advertisement::Class(mca) => {
            w.open(MCA_ROOT, &[]);
            w.leaf("MCID", &[], mca.mcid.as_str());
            w.leaf("Name", &[], &mca.name);
            w.leaf("Desc", &[], &mca.description);
            w.close(MCA_ROOT);
        }
    }
    w.out
}

impl ModuleSpecAdvertisement {
    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        write_msa(&mut w, self);
        w.out
    }
}

#[derive(Debug)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
}

#[derive(Debug)]
enum Node {
    Element(Element),
    Text(String),
}

fn malformed(e: impl std::fmt::Display) -> AdvertError {
    AdvertError::MalformedXml(e.to_string())
}

fn schema(msg: impl Into<String>) -> AdvertError {
    AdvertError::SchemaViolation(msg.into())
}

fn start_element(e: &BytesStart<'_>) -> Result<Element, AdvertError> {
    let name = std::str::from_utf8(e.name().as_ref()).map_err(malformed)?.to_string();
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(malformed)?;
        let key = std::str::from_utf8(attr.key.as_ref()).map_err(malformed)?.to_string();
        let value = attr.unescape_value().map_err(malformed)?.into_owned();
        attrs.push((key, value));
    }
    Ok(Element { name, attrs, children: Vec::new() })
}

fn read_tree(xml: &str) -> Result<Element, AdvertError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let attach = |stack: &mut Vec<Element>, root: &mut Option<Element>, node: Node| -> Result<(), AdvertError> {
        match (stack.last_mut(), node) {
            (Some(parent), node) => parent.children.push(node),
            (None, Node::Element(el)) if root.is_none() => *root = Some(el),
            (None, Node::Element(_)) => return Err(malformed("multiple root elements")),
            (None, Node::Text(t)) if t.trim().is_empty() => {}
            (None, Node::Text(_)) => return Err(malformed("text outside the root element")),
        }
        Ok(())
    };

    loop {
        match reader.read_event().map_err(malformed)? {
            Event::Start(e) => stack.push(start_element(&e)?),
            Event::Empty(e) => {
                let el = start_element(&e)?;
                attach(&mut stack, &mut root, Node::Element(el))?;
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| malformed("unbalanced end tag"))?;
                attach(&mut stack, &mut root, Node::Element(el))?;
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(malformed)?.into_owned();
                attach(&mut stack, &mut root, Node::Text(text))?;
            }
            Event::CData(c) => {
                let text = std::str::from_utf8(&c.into_inner()).map_err(malformed)?.to_string();
                attach(&mut stack, &mut root, Node::Text(text))?;
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(malformed("unexpected end of document"));
    }
    root.ok_or_else(|| malformed("no root element"))
}

impl Element {
    fn attrs(&self, required: &[&str], optional: &[&str]) -> Result<Vec<Option<&str>>, AdvertError> {
        for (key, _) in &self.attrs {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(schema(format!("<{}> has unknown attribute {key:?}", self.name)));
            }
        }
        let lookup = |k: &str| self.attrs.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let mut values = Vec::with_capacity(required.len() + optional.len());
        for key in required {
            let value = lookup(key).ok_or_else(|| schema(format!("<{}> is missing attribute {key:?}", self.name)))?;
            values.push(Some(value));
        }
        values.extend(optional.iter().map(|k| lookup(k)));
        Ok(values)
    }

    fn attr(&self, key: &str) -> Result<String, AdvertError> {
        Ok(self.attrs(&[key], &[])?[0].unwrap_or_default().to_string())
    }

    fn no_attrs(&self) -> Result<(), AdvertError> {
        self.attrs(&[], &[]).map(|_| ())
    }

    fn elements(&self) -> Result<Vec<&Element>, AdvertError> {
        let mut out = Vec::new();
        for child in &self.children {
            match child {
                Node::Element(el) => out.push(el),
                Node::Text(t) if t.trim().is_empty() => {}
                Node::Text(_) => return Err(schema(format!("<{}> must not contain text", self.name))),
            }
        }
        Ok(out)
    }

    /// Child elements matching `names` exactly, in order.
    fn sequence(&self, names: &[&str]) -> Result<Vec<&Element>, AdvertError> {
        let children = self.elements()?;
        for (i, expected) in names.iter().enumerate() {
            match children.get(i) {
                Some(el) if el.name == *expected => {}
                Some(el) => {
                    return Err(schema(format!(
                        "<{}>: expected <{expected}> at position {i}, found <{}>",
                        self.name, el.name
                    )))
                }
                None => return Err(schema(format!("<{}> is missing <{expected}>", self.name))),
            }
        }
        if let Some(extra) = children.get(names.len()) {
            return Err(schema(format!("<{}> has unexpected element <{}>", self.name, extra.name)));
        }
        Ok(children)
    }

    fn text(&self) -> Result<String, AdvertError> {
        let mut text = String::new();
        for child in &self.children {
            match child {
                Node::Text(t) => text.push_str(t),
                Node::Element(el) => return Err(schema(format!("<{}> must not contain <{}>", self.name, el.name))),
            }
        }
        Ok(text)
    }

    fn leaf(&self) -> Result<String, AdvertError> {
        self.no_attrs()?;
        self.text()
    }
}

fn to_schema(e: AdvertError) -> AdvertError {
    match e {
        AdvertError::Invalid { field, reason } => schema(format!("{field}: {reason}")),
        other => other,
    }
}

fn read_wsdl(parm: &Element) -> Result<WsdlDocument, AdvertError> {
    parm.no_attrs()?;
    let wsdl = parm.sequence(&["WSDL"])?[0];
    wsdl.no_attrs()?;
    let defs = wsdl.sequence(&["definitions"])?[0];
    let target_namespace = defs.attr("targetNamespace")?;
    let children = defs.elements()?;

    let mut messages = Vec::new();
    let mut port_types = Vec::new();
    let mut i = 0;
    while let Some(el) = children.get(i).filter(|el| el.name == "message") {
        let parts = el
            .elements()?
            .into_iter()
            .map(|p| {
                if p.name != "part" {
                    return Err(schema(format!("<message> has unexpected element <{}>", p.name)));
                }
                p.sequence(&[])?;
                let attrs = p.attrs(&["name", "type"], &[])?;
                Ok(WsdlPart {
                    name: attrs[0].unwrap_or_default().into(),
                    type_name: attrs[1].unwrap_or_default().into(),
                })
            })
            .collect::<Result<_, _>>()?;
        messages.push(WsdlMessage { name: el.attr("name")?, parts });
        i += 1;
    }
    while let Some(el) = children.get(i).filter(|el| el.name == "portType") {
        let operations = el
            .elements()?
            .into_iter()
            .map(|op| {
                if op.name != "operation" {
                    return Err(schema(format!("<portType> has unexpected element <{}>", op.name)));
                }
                let io = op.sequence(&["input", "output"])?;
                for el in &io {
                    el.sequence(&[])?;
                }
                Ok(WsdlOperation {
                    name: op.attr("name")?,
                    input_message: io[0].attr("message")?,
                    output_message: io[1].attr("message")?,
                })
            })
            .collect::<Result<_, _>>()?;
        port_types.push(WsdlPortType { name: el.attr("name")?, operations });
        i += 1;
    }
    let service = match children.get(i) {
        Some(el) if el.name == "service" => el,
        Some(el) => return Err(schema(format!("<definitions>: expected <service>, found <{}>", el.name))),
        None => return Err(schema("<definitions> is missing <service>")),
    };
    if let Some(extra) = children.get(i + 1) {
        return Err(schema(format!("<definitions> has unexpected element <{}>", extra.name)));
    }
    let port = service.sequence(&["port"])?[0];
    port.no_attrs()?;
    let address = port.sequence(&["address"])?[0];
    address.sequence(&[])?;

    Ok(WsdlDocument {
        target_namespace,
        messages,
        port_types,
        service_name: service.attr("name")?,
        port_address: address.attr("location")?,
    })
}

fn read_pipe(el: &Element) -> Result<PipeAdvertisement, AdvertError> {
    el.no_attrs()?;
    let children = el.sequence(&["Id", "Type", "Peer"])?;
    let peer_el = children[2];
    let phone = peer_el.attrs(&[], &["phone"])?[0];
    let mut peer = PeerId::parse(&peer_el.text()?).map_err(to_schema)?;
    if let Some(phone) = phone {
        peer = peer.with_phone(phone).map_err(to_schema)?;
    }
    Ok(PipeAdvertisement {
        pipe_id: children[0].leaf()?,
        pipe_type: children[1].leaf()?.parse().map_err(to_schema)?,
        endpoint_peer: peer,
    })
}

fn read_msa(root: &Element) -> Result<ModuleSpecAdvertisement, AdvertError> {
    let c = root.sequence(&MSA_CHILDREN)?;
    let msa = ModuleSpecAdvertisement {
        msid: ModuleSpecId::parse(&c[0].leaf()?).map_err(to_schema)?,
        name: c[1].leaf()?,
        creator: c[2].leaf()?,
        spec_uri: c[3].leaf()?,
        version: c[4].leaf()?,
        description: c[5].leaf()?,
        wsdl: read_wsdl(c[6])?,
        pipe: read_pipe(c[7])?,
        proxy: c[8].leaf()?,
        auth: c[9].leaf()?,
    };
    msa.validate().map_err(to_schema)?;
    Ok(msa)
}

fn read_mca(root: &Element) -> Result<ModuleClassAdvertisement, AdvertError> {
    let c = root.sequence(&MCA_CHILDREN)?;
    let mca = ModuleClassAdvertisement {
        mcid: ModuleClassId::parse(&c[0].leaf()?).map_err(to_schema)?,
        name: c[1].leaf()?,
        description: c[2].leaf()?,
    };
    mca.validate().map_err(to_schema)?;
    Ok(mca)
}

/// Parses either advertisement kind from its canonical XML form.
pub fn parse_advert(xml: &str) -> Result<Advertisement, AdvertError> {
    let root = read_tree(xml)?;
    root.no_attrs()?;
    match root.name.as_str() {
        MSA_ROOT => read_msa(&root).map(Advertisement::Spec),
        MCA_ROOT => read_mca(&root).map(Advertisement::Class),
        other => Err(schema(format!("unknown root element <{other}>"))),
    }
}
