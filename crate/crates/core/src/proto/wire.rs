//! Newline-delimited JSON framing, links and transcripts.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::polar::{decode_bits, encode_bits, BitMatrix};

pub const WIRE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

/// Bit vector as MSB-first base64 with an explicit length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bits(pub Vec<u8>);

#[derive(Serialize, Deserialize)]
struct BitsWire {
    len: usize,
    bits: String,
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitsWire {
            len: self.0.len(),
            bits: encode_bits(self.0.iter().map(|&b| b & 1 == 1)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = BitsWire::deserialize(d)?;
        decode_bits(&w.bits, w.len)
            .map(Bits)
            .map_err(serde::de::Error::custom)
    }
}

/// Reals written with 17 significant digits, which round-trips every `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reals(pub Vec<f64>);

impl Serialize for Reals {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: std::result::Result<Vec<Box<RawValue>>, _> = self
            .0
            .iter()
            .map(|v| {
                if !v.is_finite() {
                    return Err(serde::ser::Error::custom("non-finite real"));
                }
                RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)
            })
            .collect();
        raw?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Reals {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<f64>::deserialize(d).map(Reals)
    }
}

/// Protocol messages. Index sets are 1-based on the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Hello {
        role: Role,
        n: usize,
        pairs: usize,
        ell: usize,
    },
    PublicTransform {
        f: BitMatrix,
    },
    IndexSets {
        j0: Vec<usize>,
        j1: Vec<usize>,
    },
    ChannelFrame {
        symbols: Reals,
    },
    HashSeeds {
        a: usize,
        l: usize,
        h0: Bits,
        h1: Bits,
    },
    Ciphertexts {
        c0: Bits,
        c1: Bits,
    },
    Close,
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "hello",
            Message::PublicTransform { .. } => "public_transform",
            Message::IndexSets { .. } => "index_sets",
            Message::ChannelFrame { .. } => "channel_frame",
            Message::HashSeeds { .. } => "hash_seeds",
            Message::Ciphertexts { .. } => "ciphertexts",
            Message::Close => "close",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub v: u32,
    #[serde(flatten)]
    pub body: Message,
}

impl Envelope {
    pub fn encode(body: &Message) -> Result<String> {
        Ok(serde_json::to_string(&Envelope {
            v: WIRE_VERSION,
            body: body.clone(),
        })?)
    }

    pub fn decode(line: &str) -> Result<Message> {
        #[derive(Deserialize)]
        struct Version {
            v: u32,
        }
        let v: Version =
            serde_json::from_str(line).map_err(|e| Error::Malformed(format!("frame: {e}")))?;
        if v.v != WIRE_VERSION {
            return Err(Error::Protocol(format!(
                "version {} (expected {WIRE_VERSION})",
                v.v
            )));
        }
        let env: Envelope =
            serde_json::from_str(line).map_err(|e| Error::Malformed(format!("frame: {e}")))?;
        Ok(env.body)
    }
}

/// A bidirectional line transport.
pub trait Link {
    fn send_line(&mut self, line: &str) -> Result<()>;
    fn recv_line(&mut self) -> Result<String>;
}

/// In-process link over a pair of channels.
pub struct MemoryLink {
    tx: Sender<String>,
    rx: Receiver<String>,
}

pub fn memory_pair() -> (MemoryLink, MemoryLink) {
    let (a_tx, b_rx) = channel();
    let (b_tx, a_rx) = channel();
    (
        MemoryLink { tx: a_tx, rx: a_rx },
        MemoryLink { tx: b_tx, rx: b_rx },
    )
}

impl Link for MemoryLink {
    fn send_line(&mut self, line: &str) -> Result<()> {
        self.tx
            .send(line.to_owned())
            .map_err(|_| Error::Protocol("peer hung up".into()))
    }

    fn recv_line(&mut self) -> Result<String> {
        self.rx
            .recv()
            .map_err(|_| Error::Protocol("peer hung up".into()))
    }
}

pub struct TcpLink {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpLink {
    pub fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        Self::new(TcpStream::connect(addr)?)
    }
}

impl Link for TcpLink {
    fn send_line(&mut self, line: &str) -> Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv_line(&mut self) -> Result<String> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(Error::Protocol("connection closed".into()));
        }
        if line.ends_with('\n') {
            line.pop();
        }
        Ok(line)
    }
}

/// Every frame of a session in the order it crossed the link.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<String>,
}

impl Transcript {
    /// One frame per line, newline-terminated.
    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn messages(&self) -> Result<Vec<Message>> {
        self.lines.iter().map(|l| Envelope::decode(l)).collect()
    }
}

/// A link that records the transcript and enforces the message order.
pub struct Endpoint<L> {
    link: L,
    pub transcript: Transcript,
}

impl<L: Link> Endpoint<L> {
    pub fn new(link: L) -> Self {
        Self {
            link,
            transcript: Transcript::default(),
        }
    }

    pub fn send(&mut self, msg: &Message) -> Result<()> {
        let line = Envelope::encode(msg)?;
        self.link.send_line(&line)?;
        self.transcript.lines.push(line);
        Ok(())
    }

    pub fn recv(&mut self, expected: &str) -> Result<Message> {
        let line = self.link.recv_line()?;
        let msg = Envelope::decode(&line)?;
        self.transcript.lines.push(line);
        if msg.kind() != expected {
            return Err(Error::Protocol(format!(
                "expected {expected}, got {}",
                msg.kind()
            )));
        }
        Ok(msg)
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}
