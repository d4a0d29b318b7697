//! `protocol-demo`: run one authentication session against a freshly
//! registered tag and print the message transcript plus both accept
//! decisions.

use clap::{Args, ValueEnum};
use tagchain_core::protocol::{
    run_session, AuthOutcome, CorruptTarget, Fault, HashId, MatchedPair, ProtocolConfig,
    ServerDb, TagState,
};
use tagchain_core::rng::SplitMix64;

use crate::CliError;

#[derive(Args)]
pub struct DemoArgs {
    /// Identifier width in bits: a positive multiple of 4, at most 128.
    #[arg(long, default_value_t = 128)]
    pub bits: u32,
    /// Fault injected into the session.
    #[arg(long, value_enum, default_value_t = FaultArg::None)]
    pub fault: FaultArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    /// Deliver every message intact.
    #[value(name = "none")]
    None,
    /// Lose the server's final reply before it reaches the tag.
    #[value(name = "drop_m3")]
    DropM3,
    /// Flip a bit in the reader's challenge.
    #[value(name = "corrupt_challenge")]
    CorruptChallenge,
    /// Flip a bit in the tag's response.
    #[value(name = "corrupt_response")]
    CorruptResponse,
    /// Flip a bit in the reader-to-server relay.
    #[value(name = "corrupt_relay")]
    CorruptRelay,
}

impl FaultArg {
    fn fault(self) -> Fault {
        match self {
            FaultArg::None => Fault::None,
            FaultArg::DropM3 => Fault::DropM3,
            FaultArg::CorruptChallenge => Fault::Corrupt(CorruptTarget::Challenge),
            FaultArg::CorruptResponse => Fault::Corrupt(CorruptTarget::TagResponse),
            FaultArg::CorruptRelay => Fault::Corrupt(CorruptTarget::ReaderRelay),
        }
    }
}

/// Returns `Ok(true)` when mutual authentication failed, which the caller
/// turns into exit code 1.
pub fn run(args: &DemoArgs) -> Result<bool, CliError> {
    let pcfg = ProtocolConfig::new(args.bits, HashId::Sha256)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut rng = SplitMix64::new(args.seed);
    let mut db = ServerDb::new();
    let u = pcfg.random_bits(&mut rng);
    let (_, t) = db.register(&pcfg, u, b"demo-tag");
    let mut tag = TagState::new(t);

    let transcript = run_session(&pcfg, &mut tag, &mut db, &mut rng, args.fault.fault());
    print!("{}", transcript.to_text());

    match &transcript.server {
        AuthOutcome::Success(s) => {
            let pair = match s.matched {
                MatchedPair::New => "new",
                MatchedPair::Old => "old",
            };
            println!(
                "server: matched record {} via the {pair} pair after {} probe{}",
                s.record,
                s.probes,
                if s.probes == 1 { "" } else { "s" }
            );
        }
        AuthOutcome::Failure { probes } => {
            println!("server: no stored pair matched after {probes} probes");
        }
    }
    match transcript.tag_accepted {
        Some(true) => println!("tag: accepted the final reply"),
        Some(false) => println!("tag: rejected the final reply"),
        None => println!("tag: no final reply received"),
    }

    let ok = transcript.mutual();
    println!("mutual authentication {}", if ok { "succeeded" } else { "failed" });
    Ok(!ok)
}
