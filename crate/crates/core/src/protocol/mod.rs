//! Executable model of the RFID mutual-authentication protocol.
//!
//! Three parties: a tag holding a secret `t`, a reader, and a back-end server
//! whose database keeps, per tag, the *current* identifier pair `(u, t)` and
//! the pair from the previous successful session. A session runs six steps:
//!
//! 1. reader → tag: nonce `r1`
//! 2. tag → reader: `M1 = t ⊕ r2`, `M2 = f_t(r1 ⊕ r2)` for a fresh nonce `r2`
//! 3. reader → server: `r1, M1, M2`
//! 4. server: scan the database trying both stored pairs per record; on a
//!    match reply `M3 = u ⊕ (r2 ⋙ l/2)` plus the tag's data entry, then roll
//!    the record forward (old ← matched pair, new ← refreshed pair)
//! 5. reader → tag: `M3`
//! 6. tag: recover `u`, check `h(u) = t`, and on success refresh `t`
//!
//! Keeping the previous pair is what lets a tag that never saw step 5
//! re-authenticate: the server then matches on the old pair and the two sides
//! converge again. `keyed_hash` is `h(k ∥ m)` over a standard 256-bit digest
//! truncated to the first `l` bits.

mod session;

pub use session::{run_session, CorruptTarget, Fault, SessionTranscript, TranscriptEntry};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::{width_is_valid, BitStr, BitWriter, Rotation};
use crate::rng::SplitMix64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("bit length {len} is unsupported: widths must be positive multiples of 4, at most 128")]
    BadLength { len: u32 },
    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: u32, got: u32 },
    #[error("rotation by {k} exceeds width {len}")]
    RotationRange { k: u32, len: u32 },
    #[error("no pending challenge: a tag can only finalize after responding")]
    NoPendingSession,
}

/// The hash backing `h` and `f`. Kept as an explicit enum so configurations
/// (and their frozen test vectors) pin down exactly which digest is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashId {
    Sha256,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    bits: u32,
    hash: HashId,
}

impl ProtocolConfig {
    pub fn new(bits: u32, hash: HashId) -> Result<Self, ProtocolError> {
        if !width_is_valid(bits) {
            return Err(ProtocolError::BadLength { len: bits });
        }
        Ok(ProtocolConfig { bits, hash })
    }

    /// Identifier width `l` in bits.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn hash_id(&self) -> HashId {
        self.hash
    }

    fn digest_prefix(&self, bytes: &[u8]) -> BitStr {
        let digest = match self.hash {
            HashId::Sha256 => Sha256::digest(bytes),
        };
        // First `l` bits of the digest, MSB-first.
        let mut value: u128 = 0;
        let nibbles = self.bits / 4;
        for i in 0..nibbles {
            let byte = digest[(i / 2) as usize];
            let nib = if i % 2 == 0 { byte >> 4 } else { byte & 0xF };
            value = (value << 4) | nib as u128;
        }
        BitStr::new(value, self.bits)
    }

    /// `h(x)`: the configured digest of the packed bits of `x`, truncated to
    /// the first `l` bits. `x` may be any width (the protocol hashes `l`-bit
    /// strings, but the definition does not depend on it).
    pub fn hash(&self, x: BitStr) -> BitStr {
        self.digest_prefix(&x.to_bytes())
    }

    /// `h` applied to the empty string; split out because an empty [`BitStr`]
    /// is not representable.
    pub fn hash_empty(&self) -> BitStr {
        self.digest_prefix(&[])
    }

    /// `f_k(m) = h(k ∥ m)` with bit-level concatenation. Both arguments must
    /// be `l` bits wide.
    pub fn keyed_hash(&self, k: BitStr, m: BitStr) -> Result<BitStr, ProtocolError> {
        for v in [k, m] {
            if v.len() != self.bits {
                return Err(ProtocolError::LengthMismatch { expected: self.bits, got: v.len() });
            }
        }
        let mut w = BitWriter::new();
        w.push(k);
        w.push(m);
        Ok(self.digest_prefix(&w.finish()))
    }

    /// A uniformly random `l`-bit string. Words are drawn low-half first so
    /// the stream layout is frozen for every width.
    pub fn random_bits(&self, rng: &mut SplitMix64) -> BitStr {
        let lo = rng.next_u64() as u128;
        let raw = if self.bits > 64 {
            ((rng.next_u64() as u128) << 64) | lo
        } else {
            lo
        };
        let masked = if self.bits == 128 { raw } else { raw & ((1u128 << self.bits) - 1) };
        BitStr::new(masked, self.bits)
    }
}

/// Circular rotation with an explicit argument check: `k` up to and including
/// the width is legal (`k = l` is the identity).
pub fn rot(x: BitStr, k: u32, dir: Rotation) -> Result<BitStr, ProtocolError> {
    if k > x.len() {
        return Err(ProtocolError::RotationRange { k, len: x.len() });
    }
    Ok(x.rotate(k, dir))
}

/// The identifier refresh applied by both sides after a successful session:
/// `u' = (u ⋘ l/4) ⊕ (t ⋙ l/4) ⊕ r1 ⊕ r2`, `t' = h(u')`.
pub fn update_identifiers(
    cfg: &ProtocolConfig,
    u: BitStr,
    t: BitStr,
    r1: BitStr,
    r2: BitStr,
) -> (BitStr, BitStr) {
    let q = cfg.bits() / 4;
    let u_next = u.rotate(q, Rotation::Left) ^ t.rotate(q, Rotation::Right) ^ r1 ^ r2;
    (u_next, cfg.hash(u_next))
}

/// Everything that travels between the parties during one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Challenge { r1: BitStr },
    TagResponse { m1: BitStr, m2: BitStr },
    ReaderForward { r1: BitStr, m1: BitStr, m2: BitStr },
    ServerReply { m3: BitStr, d: Vec<u8> },
    ReaderRelay { m3: BitStr },
    ServerError,
}

impl Message {
    /// The message fields as one lowercase hex payload, fields concatenated
    /// in wire order. Widths are fixed by the configuration, so the encoding
    /// is unambiguous.
    pub fn payload_hex(&self) -> String {
        fn hex_bytes(d: &[u8]) -> String {
            d.iter().map(|b| format!("{b:02x}")).collect()
        }
        match self {
            Message::Challenge { r1 } => r1.to_hex(),
            Message::TagResponse { m1, m2 } => format!("{}{}", m1.to_hex(), m2.to_hex()),
            Message::ReaderForward { r1, m1, m2 } => {
                format!("{}{}{}", r1.to_hex(), m1.to_hex(), m2.to_hex())
            }
            Message::ServerReply { m3, d } => format!("{}{}", m3.to_hex(), hex_bytes(d)),
            Message::ReaderRelay { m3 } => m3.to_hex(),
            Message::ServerError => String::new(),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Challenge { .. } => "challenge",
            Message::TagResponse { .. } => "tag_response",
            Message::ReaderForward { .. } => "reader_forward",
            Message::ServerReply { .. } => "server_reply",
            Message::ReaderRelay { .. } => "reader_relay",
            Message::ServerError => "server_error",
        }
    }
}

/// Tag-side state: the current secret plus the nonces of an in-flight
/// session. `pending` is present exactly between a response and the matching
/// finalize (or the next challenge, if the reply never arrives).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagState {
    t: BitStr,
    pending: Option<(BitStr, BitStr)>,
}

impl TagState {
    pub fn new(t: BitStr) -> Self {
        TagState { t, pending: None }
    }

    pub fn secret(&self) -> BitStr {
        self.t
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    /// Step 2: draw `r2`, remember both nonces, answer `(M1, M2)`. A stale
    /// pending session is discarded — the tag always serves the newest
    /// challenge.
    pub fn respond(
        &mut self,
        cfg: &ProtocolConfig,
        r1: BitStr,
        rng: &mut SplitMix64,
    ) -> Result<(BitStr, BitStr), ProtocolError> {
        if r1.len() != cfg.bits() {
            return Err(ProtocolError::LengthMismatch { expected: cfg.bits(), got: r1.len() });
        }
        let r2 = cfg.random_bits(rng);
        let m1 = self.t ^ r2;
        let m2 = cfg.keyed_hash(self.t, r1 ^ r2)?;
        self.pending = Some((r1, r2));
        Ok((m1, m2))
    }

    /// Step 6: recover `u` from `M3`, accept iff `h(u)` equals the stored
    /// secret, and refresh the secret on acceptance. Clears the pending
    /// nonces either way.
    pub fn finalize(&mut self, cfg: &ProtocolConfig, m3: BitStr) -> Result<bool, ProtocolError> {
        let (r1, r2) = self.pending.take().ok_or(ProtocolError::NoPendingSession)?;
        if m3.len() != cfg.bits() {
            return Err(ProtocolError::LengthMismatch { expected: cfg.bits(), got: m3.len() });
        }
        let u = m3 ^ r2.rotate(cfg.bits() / 2, Rotation::Right);
        if cfg.hash(u) == self.t {
            let (_, t_next) = update_identifiers(cfg, u, self.t, r1, r2);
            self.t = t_next;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Which stored pair matched during a database scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchedPair {
    New,
    Old,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerRecord {
    pub u_new: BitStr,
    pub t_new: BitStr,
    pub u_old: BitStr,
    pub t_old: BitStr,
    /// Opaque per-tag data entry, returned verbatim on success.
    pub d: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthSuccess {
    pub m3: BitStr,
    pub d: Vec<u8>,
    pub matched: MatchedPair,
    /// Keyed-hash evaluations spent before the match.
    pub probes: usize,
    /// Index of the matched record.
    pub record: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuthOutcome {
    Success(AuthSuccess),
    /// A full scan found nothing; `probes` is two per record.
    Failure { probes: usize },
}

impl AuthOutcome {
    pub fn probes(&self) -> usize {
        match self {
            AuthOutcome::Success(s) => s.probes,
            AuthOutcome::Failure { probes } => *probes,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, AuthOutcome::Success(_))
    }
}

/// Server database: records in registration order. Lookup walks that order,
/// trying the current pair before the previous one, and the first match wins.
#[derive(Debug, Clone, Default)]
pub struct ServerDb {
    records: Vec<ServerRecord>,
}

impl ServerDb {
    pub fn new() -> Self {
        ServerDb::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ServerRecord] {
        &self.records
    }

    /// Register a tag by its initial `u`; both stored pairs start as
    /// `(u, h(u))`. Returns the record index and the tag's initial secret.
    pub fn register(&mut self, cfg: &ProtocolConfig, u: BitStr, d: &[u8]) -> (usize, BitStr) {
        assert_eq!(u.len(), cfg.bits(), "identifier width must match the configuration");
        let t = cfg.hash(u);
        self.records.push(ServerRecord {
            u_new: u,
            t_new: t,
            u_old: u,
            t_old: t,
            d: d.to_vec(),
        });
        (self.records.len() - 1, t)
    }

    /// Step 4: scan for a pair explaining `(M1, M2)`, reply and roll the
    /// matched record forward. Authentication failure is a value, not an
    /// error.
    pub fn authenticate(
        &mut self,
        cfg: &ProtocolConfig,
        r1: BitStr,
        m1: BitStr,
        m2: BitStr,
    ) -> AuthOutcome {
        for v in [r1, m1, m2] {
            assert_eq!(v.len(), cfg.bits(), "message width must match the configuration");
        }
        let mut probes = 0;
        for idx in 0..self.records.len() {
            for which in [MatchedPair::New, MatchedPair::Old] {
                let (u, t) = {
                    let rec = &self.records[idx];
                    match which {
                        MatchedPair::New => (rec.u_new, rec.t_new),
                        MatchedPair::Old => (rec.u_old, rec.t_old),
                    }
                };
                let r2 = m1 ^ t;
                probes += 1;
                let expected = cfg
                    .keyed_hash(t, r1 ^ r2)
                    .expect("widths were checked above");
                if expected == m2 {
                    let m3 = u ^ r2.rotate(cfg.bits() / 2, Rotation::Right);
                    let (u_next, t_next) = update_identifiers(cfg, u, t, r1, r2);
                    let rec = &mut self.records[idx];
                    rec.u_old = u;
                    rec.t_old = t;
                    rec.u_new = u_next;
                    rec.t_new = t_next;
                    let d = rec.d.clone();
                    return AuthOutcome::Success(AuthSuccess {
                        m3,
                        d,
                        matched: which,
                        probes,
                        record: idx,
                    });
                }
            }
        }
        AuthOutcome::Failure { probes }
    }
}

/// Step 1: the reader's fresh challenge nonce.
pub fn reader_challenge(cfg: &ProtocolConfig, rng: &mut SplitMix64) -> BitStr {
    cfg.random_bits(rng)
}
