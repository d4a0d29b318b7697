//! One full session end to end, with an optional channel fault.
//!
//! The reader↔tag air interface is the only unreliable link; the
//! reader↔server connection is assumed secure and lossless. A fault either
//! drops the final relay (the classic desynchronisation attempt) or flips a
//! bit in one of the three over-the-air messages.

use crate::bits::BitStr;
use crate::rng::SplitMix64;

use super::{reader_challenge, AuthOutcome, Message, ProtocolConfig, ServerDb, TagState};

/// Over-the-air messages a corruption fault can target (steps 1, 2 and 5;
/// the wired reader↔server leg cannot be faulted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptTarget {
    Challenge,
    TagResponse,
    ReaderRelay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// The reader's relay of `M3` is lost; the tag never finalizes.
    DropM3,
    /// Flip the low bit of the targeted message's first field in transit.
    Corrupt(CorruptTarget),
}

/// What the transcript records: the messages in wire order, plus the tag's
/// final accept/reject decision when the session got that far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptEntry {
    Message { step: u8, message: Message },
    TagDecision { accepted: bool },
}

impl TranscriptEntry {
    fn line(&self) -> String {
        match self {
            TranscriptEntry::Message { step, message } => {
                format!("step={} type={} payload={}", step, message.type_name(), message.payload_hex())
            }
            TranscriptEntry::TagDecision { accepted } => {
                let name = if *accepted { "tag_accept" } else { "tag_reject" };
                format!("step=6 type={name} payload=")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionTranscript {
    pub entries: Vec<TranscriptEntry>,
    /// The server's scan outcome (a session always reaches step 4).
    pub server: AuthOutcome,
    /// `None` when the reply never reached the tag.
    pub tag_accepted: Option<bool>,
}

impl SessionTranscript {
    /// Both sides accepted: the server matched a pair and the tag verified
    /// the reply.
    pub fn mutual(&self) -> bool {
        self.server.is_success() && self.tag_accepted == Some(true)
    }

    pub fn probes(&self) -> usize {
        self.server.probes()
    }

    /// Line-oriented rendering, one `step=<n> type=<name> payload=<hex>` per
    /// entry. This format is stable; tests pin it byte for byte.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }
}

fn flip_low_bit(x: BitStr) -> BitStr {
    x ^ BitStr::new(1, x.len())
}

/// Drive one session: challenge, response, forward, scan, reply, relay,
/// finalize. The reader is a pass-through; all protocol logic lives in the
/// tag and server operations.
pub fn run_session(
    cfg: &ProtocolConfig,
    tag: &mut TagState,
    db: &mut ServerDb,
    rng: &mut SplitMix64,
    fault: Fault,
) -> SessionTranscript {
    let mut entries = Vec::new();

    // Step 1: the challenge, possibly corrupted on the air. The reader keeps
    // its own copy of r1 for the forward in step 3.
    let r1 = reader_challenge(cfg, rng);
    let r1_heard = match fault {
        Fault::Corrupt(CorruptTarget::Challenge) => flip_low_bit(r1),
        _ => r1,
    };
    entries.push(TranscriptEntry::Message {
        step: 1,
        message: Message::Challenge { r1: r1_heard },
    });

    // Step 2: the tag answers what it heard.
    let (m1, m2) = tag
        .respond(cfg, r1_heard, rng)
        .expect("challenge width matches the configuration");
    let (m1_heard, m2_heard) = match fault {
        Fault::Corrupt(CorruptTarget::TagResponse) => (flip_low_bit(m1), m2),
        _ => (m1, m2),
    };
    entries.push(TranscriptEntry::Message {
        step: 2,
        message: Message::TagResponse { m1: m1_heard, m2: m2_heard },
    });

    // Step 3: reader forwards its own r1 with the response as received.
    entries.push(TranscriptEntry::Message {
        step: 3,
        message: Message::ReaderForward { r1, m1: m1_heard, m2: m2_heard },
    });

    // Step 4: database scan.
    let outcome = db.authenticate(cfg, r1, m1_heard, m2_heard);
    let m3 = match &outcome {
        AuthOutcome::Success(s) => {
            entries.push(TranscriptEntry::Message {
                step: 4,
                message: Message::ServerReply { m3: s.m3, d: s.d.clone() },
            });
            Some(s.m3)
        }
        AuthOutcome::Failure { .. } => {
            entries.push(TranscriptEntry::Message { step: 4, message: Message::ServerError });
            None
        }
    };

    // Steps 5 and 6 only happen when the server had something to relay.
    let mut tag_accepted = None;
    if let Some(m3) = m3 {
        let m3_heard = match fault {
            Fault::Corrupt(CorruptTarget::ReaderRelay) => flip_low_bit(m3),
            _ => m3,
        };
        entries.push(TranscriptEntry::Message {
            step: 5,
            message: Message::ReaderRelay { m3: m3_heard },
        });
        if fault != Fault::DropM3 {
            let accepted = tag
                .finalize(cfg, m3_heard)
                .expect("a response is pending in this flow");
            entries.push(TranscriptEntry::TagDecision { accepted });
            tag_accepted = Some(accepted);
        }
    }

    SessionTranscript { entries, server: outcome, tag_accepted }
}
