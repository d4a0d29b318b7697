//! End-to-end session flows: long fault-free soaks, desynchronisation and
//! recovery chains, corruption handling, and a byte-pinned transcript.

use tagchain_core::protocol::{
    run_session, AuthOutcome, CorruptTarget, Fault, HashId, MatchedPair, ProtocolConfig,
    ServerDb, TagState,
};
use tagchain_core::rng::SplitMix64;

fn setup(bits: u32, seed: u64) -> (ProtocolConfig, ServerDb, TagState, SplitMix64) {
    let cfg = ProtocolConfig::new(bits, HashId::Sha256).unwrap();
    let mut rng = SplitMix64::new(seed);
    let mut db = ServerDb::new();
    let u = cfg.random_bits(&mut rng);
    let (_, t) = db.register(&cfg, u, b"demo-tag");
    (cfg, db, TagState::new(t), rng)
}

fn matched(outcome: &AuthOutcome) -> MatchedPair {
    match outcome {
        AuthOutcome::Success(s) => s.matched,
        AuthOutcome::Failure { probes } => panic!("scan failed after {probes} probes"),
    }
}

#[test]
fn ten_thousand_clean_sessions_stay_synchronised() {
    for bits in [4, 16, 64, 128] {
        let (cfg, mut db, mut tag, mut rng) = setup(bits, u64::from(bits));
        for round in 0..2_500 {
            let tr = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
            assert!(tr.mutual(), "bits {bits}, round {round}");
            assert_eq!(matched(&tr.server), MatchedPair::New);
            assert_eq!(tr.probes(), 1);
            assert_eq!(tr.entries.len(), 6);
        }
    }
}

#[test]
fn a_lost_reply_desynchronises_and_the_old_pair_recovers() {
    for run in 0..1_000 {
        let (cfg, mut db, mut tag, mut rng) = setup(64, 40_000 + run);

        let lost = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::DropM3);
        assert!(!lost.mutual());
        assert!(lost.server.is_success(), "the server already rotated");
        assert_eq!(lost.tag_accepted, None);
        assert_eq!(lost.entries.len(), 5);

        // The server moved on; the tag's secret now matches the old slot.
        assert_eq!(db.records()[0].t_old, tag.secret());

        let retry = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
        assert!(retry.mutual(), "run {run}");
        assert_eq!(matched(&retry.server), MatchedPair::Old);

        let clean = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
        assert!(clean.mutual());
        assert_eq!(matched(&clean.server), MatchedPair::New);
    }
}

#[test]
fn corruption_before_the_scan_fails_it_and_leaves_both_sides_intact() {
    for target in [CorruptTarget::Challenge, CorruptTarget::TagResponse] {
        let (cfg, mut db, mut tag, mut rng) = setup(32, 5);
        let before = db.records()[0].clone();
        let secret = tag.secret();

        let bad = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::Corrupt(target));
        assert!(!bad.mutual(), "{target:?}");
        assert!(!bad.server.is_success(), "{target:?}");
        assert_eq!(bad.server.probes(), 2, "one full scan of new and old");
        assert_eq!(db.records()[0], before, "a failed scan must not rotate");
        assert_eq!(tag.secret(), secret);

        let clean = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
        assert!(clean.mutual());
        assert_eq!(matched(&clean.server), MatchedPair::New);
    }
}

#[test]
fn a_corrupted_relay_is_rejected_by_the_tag_and_recovered_like_a_loss() {
    let (cfg, mut db, mut tag, mut rng) = setup(32, 5);

    let bad = run_session(
        &cfg,
        &mut tag,
        &mut db,
        &mut rng,
        Fault::Corrupt(CorruptTarget::ReaderRelay),
    );
    assert!(!bad.mutual());
    assert!(bad.server.is_success(), "the scan saw an intact response");
    assert_eq!(bad.tag_accepted, Some(false));
    assert_eq!(db.records()[0].t_old, tag.secret(), "rotation left the tag behind");

    let retry = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
    assert!(retry.mutual());
    assert_eq!(matched(&retry.server), MatchedPair::Old);
}

#[test]
fn transcripts_are_reproducible_and_byte_pinned() {
    let (cfg, mut db, mut tag, mut rng) = setup(32, 7);
    let tr = run_session(&cfg, &mut tag, &mut db, &mut rng, Fault::None);
    assert_eq!(
        tr.to_text(),
        "step=1 type=challenge payload=f43c661c\n\
         step=2 type=tag_response payload=e9e4f0051e6bcc8c\n\
         step=3 type=reader_forward payload=f43c661ce9e4f0051e6bcc8c\n\
         step=4 type=server_reply payload=7330b76664656d6f2d746167\n\
         step=5 type=reader_relay payload=7330b766\n\
         step=6 type=tag_accept payload=\n"
    );

    let (cfg2, mut db2, mut tag2, mut rng2) = setup(32, 7);
    let again = run_session(&cfg2, &mut tag2, &mut db2, &mut rng2, Fault::None);
    assert_eq!(again.to_text(), tr.to_text());

    let (cfg3, mut db3, mut tag3, mut rng3) = setup(32, 8);
    let other = run_session(&cfg3, &mut tag3, &mut db3, &mut rng3, Fault::None);
    assert_ne!(other.to_text(), tr.to_text());
}

#[test]
fn fleets_share_the_database_without_cross_talk() {
    let cfg = ProtocolConfig::new(64, HashId::Sha256).unwrap();
    let mut rng = SplitMix64::new(99);
    let mut db = ServerDb::new();
    let mut tags: Vec<TagState> = (0..20)
        .map(|k| {
            let u = cfg.random_bits(&mut rng);
            let (_, t) = db.register(&cfg, u, format!("tag-{k}").as_bytes());
            TagState::new(t)
        })
        .collect();

    for round in 0..50 {
        for (k, tag) in tags.iter_mut().enumerate() {
            let tr = run_session(&cfg, tag, &mut db, &mut rng, Fault::None);
            assert!(tr.mutual(), "round {round}, tag {k}");
            match &tr.server {
                AuthOutcome::Success(s) => {
                    assert_eq!(s.record, k);
                    assert_eq!(s.d, format!("tag-{k}").into_bytes());
                }
                AuthOutcome::Failure { .. } => unreachable!(),
            }
        }
    }
}
