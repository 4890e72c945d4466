//! Elements-only XML reader producing open/close events. Attributes, text,
//! comments and processing instructions are skipped; a document type
//! declaration is skipped too, so no entity is ever expanded.

use std::io::BufRead;

use quick_xml::events::Event;
use quick_xml::Reader;

/// One element event, with the name as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlEvent {
    Open(String),
    Close(String),
}

#[derive(Debug)]
pub struct XmlError {
    pub position: u64,
    pub message: String,
}

impl std::fmt::Display for XmlError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "malformed XML at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for XmlError {}

pub struct ElementReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    pending_close: Option<String>,
    /// Kinds of skipped content seen so far, for one warning each.
    pub skipped: Vec<&'static str>,
}

impl<R: BufRead> ElementReader<R> {
    pub fn new(input: R) -> ElementReader<R> {
        let mut reader = Reader::from_reader(input);
        reader.check_end_names(true);
        ElementReader { reader, buf: Vec::new(), pending_close: None, skipped: Vec::new() }
    }

    fn skip(skipped: &mut Vec<&'static str>, what: &'static str) {
        if !skipped.contains(&what) {
            skipped.push(what);
        }
    }

    fn name(bytes: &[u8]) -> String {
        String::from_utf8_lossy(bytes).into_owned()
    }

    pub fn next_event(&mut self) -> Result<Option<XmlEvent>, XmlError> {
        if let Some(name) = self.pending_close.take() {
            return Ok(Some(XmlEvent::Close(name)));
        }
        loop {
            self.buf.clear();
            let ev = self
                .reader
                .read_event_into(&mut self.buf)
                .map_err(|e| XmlError { position: self.reader.buffer_position() as u64, message: e.to_string() })?;
            match ev {
                Event::Start(e) => {
                    if e.attributes().next().is_some() {
                        Self::skip(&mut self.skipped, "attributes");
                    }
                    return Ok(Some(XmlEvent::Open(Self::name(e.name().as_ref()))));
                }
                Event::Empty(e) => {
                    if e.attributes().next().is_some() {
                        Self::skip(&mut self.skipped, "attributes");
                    }
                    let name = Self::name(e.name().as_ref());
                    self.pending_close = Some(name.clone());
                    return Ok(Some(XmlEvent::Open(name)));
                }
                Event::End(e) => return Ok(Some(XmlEvent::Close(Self::name(e.name().as_ref())))),
                Event::Text(t) => {
                    if t.iter().any(|b| !b.is_ascii_whitespace()) {
                        Self::skip(&mut self.skipped, "text");
                    }
                }
                Event::CData(_) => Self::skip(&mut self.skipped, "text"),
                Event::DocType(_) => Self::skip(&mut self.skipped, "document type declaration"),
                Event::Comment(_) | Event::Decl(_) | Event::PI(_) => {}
                Event::Eof => return Ok(None),
            }
        }
    }
}
