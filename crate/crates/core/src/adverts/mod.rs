//! Advertisement and WSDL domain types.
//!
//! A module class advertisement (MCA) declares that web service definitions
//! exist; a module specification advertisement (MSA) carries one concrete
//! service: metadata, its WSDL description, the pipe used to reach the
//! hosting peer and opaque proxy/auth payloads. Both have a canonical XML
//! form, see [`serialize_advert`] and [`parse_advert`].

mod ids;
mod xml;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ids::{ModuleClassId, ModuleSpecId, PeerId};
pub use xml::{parse_advert, serialize_advert};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvertError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl AdvertError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        AdvertError::Invalid { field, reason: reason.into() }
    }
}

/// Characters that cannot appear in an XML 1.0 document.
fn check_xml_chars(field: &'static str, s: &str) -> Result<(), AdvertError> {
    match s.chars().find(|&c| (c < ' ' && !matches!(c, '\t' | '\n' | '\r')) || c == '\u{fffe}' || c == '\u{ffff}') {
        Some(c) => Err(AdvertError::invalid(field, format!("character U+{:04X} not representable in XML", c as u32))),
        None => Ok(()),
    }
}

fn check_non_empty(field: &'static str, s: &str) -> Result<(), AdvertError> {
    if s.is_empty() {
        return Err(AdvertError::invalid(field, "must not be empty"));
    }
    check_xml_chars(field, s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleClassAdvertisement {
    pub mcid: ModuleClassId,
    pub name: String,
    pub description: String,
}

impl ModuleClassAdvertisement {
    pub fn new(
        mcid: ModuleClassId,
        name: impl Into<String>,
        description: impl Into<String>,
    ) -> Result<Self, AdvertError> {
        let mca = Self { mcid, name: name.into(), description: description.into() };
        mca.validate()?;
        Ok(mca)
    }

    pub fn validate(&self) -> Result<(), AdvertError> {
        check_non_empty("Name", &self.name)?;
        check_xml_chars("Desc", &self.description)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdlPart {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdlMessage {
    pub name: String,
    pub parts: Vec<WsdlPart>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdlOperation {
    pub name: String,
    pub input_message: String,
    pub output_message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdlPortType {
    pub name: String,
    pub operations: Vec<WsdlOperation>,
}

/// The subset of a WSDL 1.1 document that discovery consumes: identifier
/// text for indexing and the endpoint address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdlDocument {
    pub target_namespace: String,
    pub messages: Vec<WsdlMessage>,
    pub port_types: Vec<WsdlPortType>,
    pub service_name: String,
    pub port_address: String,
}

impl WsdlDocument {
    pub fn validate(&self) -> Result<(), AdvertError> {
        check_non_empty("targetNamespace", &self.target_namespace)?;
        check_non_empty("service name", &self.service_name)?;
        check_xml_chars("port address", &self.port_address)?;
        for message in &self.messages {
            check_non_empty("message name", &message.name)?;
            for part in &message.parts {
                check_non_empty("part name", &part.name)?;
                check_non_empty("part type", &part.type_name)?;
            }
        }
        for port_type in &self.port_types {
            check_non_empty("portType name", &port_type.name)?;
            for op in &port_type.operations {
                check_non_empty("operation name", &op.name)?;
                for referenced in [&op.input_message, &op.output_message] {
                    if !self.messages.iter().any(|m| &m.name == referenced) {
                        return Err(AdvertError::invalid(
                            "operation",
                            format!("{} references undefined message {referenced:?}", op.name),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Identifier text that participates in indexing, space separated, in
    /// the order: service name, port type names, operation names, message
    /// names, part names, target namespace.
    pub fn search_text(&self) -> String {
        let mut pieces: Vec<&str> = vec![&self.service_name];
        pieces.extend(self.port_types.iter().map(|p| p.name.as_str()));
        pieces.extend(self.port_types.iter().flat_map(|p| p.operations.iter().map(|o| o.name.as_str())));
        pieces.extend(self.messages.iter().map(|m| m.name.as_str()));
        pieces.extend(self.messages.iter().flat_map(|m| m.parts.iter().map(|p| p.name.as_str())));
        pieces.push(&self.target_namespace);
        pieces.join(" ")
    }
}

/// See [`WsdlDocument::search_text`].
pub fn wsdl_search_text(wsdl: &WsdlDocument) -> String {
    wsdl.search_text()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PipeType {
    Unicast,
    UnicastSecure,
    Propagate,
}

impl PipeType {
    pub fn as_str(self) -> &'static str {
        match self {
            PipeType::Unicast => "unicast",
            PipeType::UnicastSecure => "unicast-secure",
            PipeType::Propagate => "propagate",
        }
    }
}

impl fmt::Display for PipeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipeType {
    type Err = AdvertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicast" => Ok(PipeType::Unicast),
            "unicast-secure" => Ok(PipeType::UnicastSecure),
            "propagate" => Ok(PipeType::Propagate),
            other => Err(AdvertError::invalid("pipe type", format!("unknown pipe type {other:?}"))),
        }
    }
}

/// Virtual channel to the peer hosting a service, addressed by peer id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipeAdvertisement {
    pub pipe_id: String,
    pub pipe_type: PipeType,
    pub endpoint_peer: PeerId,
}

/// Everything a client needs to find and reach one web service.
///
/// `proxy` and `auth` are carried verbatim and never interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleSpecAdvertisement {
    pub msid: ModuleSpecId,
    pub name: String,
    pub creator: String,
    pub spec_uri: String,
    pub version: String,
    pub description: String,
    pub wsdl: WsdlDocument,
    pub pipe: PipeAdvertisement,
    pub proxy: String,
    pub auth: String,
}

impl ModuleSpecAdvertisement {
    pub fn validate(&self) -> Result<(), AdvertError> {
        check_non_empty("Name", &self.name)?;
        check_xml_chars("Ctrr", &self.creator)?;
        check_xml_chars("SURI", &self.spec_uri)?;
        check_xml_chars("Vers", &self.version)?;
        check_xml_chars("Desc", &self.description)?;
        check_xml_chars("Proxy", &self.proxy)?;
        check_xml_chars("Auth", &self.auth)?;
        check_non_empty("pipe id", &self.pipe.pipe_id)?;
        self.wsdl.validate()
    }

    /// Whether this specification refines the given class advertisement.
    pub fn refines(&self, mca: &ModuleClassAdvertisement) -> bool {
        self.msid.class_id() == mca.mcid
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Advertisement {
    Class(ModuleClassAdvertisement),
    Spec(ModuleSpecAdvertisement),
}

impl From<ModuleClassAdvertisement> for Advertisement {
    fn from(mca: ModuleClassAdvertisement) -> Self {
        Advertisement::Class(mca)
    }
}

impl From<ModuleSpecAdvertisement> for Advertisement {
    fn from(msa: ModuleSpecAdvertisement) -> Self {
        Advertisement::Spec(msa)
    }
}

/// Compact description of a service, expanded into a full MSA with a
/// request/response message pair per operation.
#[derive(Debug, Clone)]
pub struct ServiceSketch<'a> {
    pub class_id: &'a ModuleClassId,
    pub host: &'a PeerId,
    pub name: &'a str,
    pub description: &'a str,
    pub operations: &'a [String],
}

impl ServiceSketch<'_> {
    pub fn build(&self) -> Result<ModuleSpecAdvertisement, AdvertError> {
        let label = format!("{}/{}", self.host, self.name);
        let msid = ModuleSpecId::derive(self.class_id, &label);
        let mut messages = Vec::new();
        let mut operations = Vec::new();
        for op in self.operations {
            let input = format!("{op}Request");
            let output = format!("{op}Response");
            messages.push(WsdlMessage {
                name: input.clone(),
                parts: vec![WsdlPart { name: "parameters".into(), type_name: "xsd:string".into() }],
            });
            messages.push(WsdlMessage {
                name: output.clone(),
                parts: vec![WsdlPart { name: "result".into(), type_name: "xsd:string".into() }],
            });
            operations.push(WsdlOperation { name: op.clone(), input_message: input, output_message: output });
        }
        let port_types = if operations.is_empty() {
            Vec::new()
        } else {
            vec![WsdlPortType { name: format!("{}PortType", self.name), operations }]
        };
        let msa = ModuleSpecAdvertisement {
            name: self.name.to_string(),
            creator: self.host.to_string(),
            spec_uri: format!("urn:wsdisco:spec:{}", msid.suffix()),
            version: "1.0".into(),
            description: self.description.to_string(),
            wsdl: WsdlDocument {
                target_namespace: format!("urn:wsdisco:{}", self.name),
                messages,
                port_types,
                service_name: self.name.to_string(),
                port_address: format!("http://{}/{}", self.host.as_str().replace(':', "-"), self.name),
            },
            pipe: PipeAdvertisement {
                pipe_id: format!("urn:jxta:pipe:{}", msid.suffix()),
                pipe_type: PipeType::Unicast,
                endpoint_peer: self.host.clone(),
            },
            proxy: String::new(),
            auth: String::new(),
            msid,
        };
        msa.validate()?;
        Ok(msa)
    }
}
