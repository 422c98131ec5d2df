use std::sync::OnceLock;

use facetalk_core::face::{integrate, ParameterVector, PARAM_COUNT};
use facetalk_core::nlp::{
    analyze, classify_input, disambiguate, tokenize, Hypothesis, NBestInput, ParseTree, PcsContext, RecognitionKind,
};
use facetalk_core::plan::{commit, seed_contexts, Commit};
use facetalk_core::session::{classify, decode, encode, Payload, ProtocolMessage};
use facetalk_core::Resources;
use proptest::prelude::*;

fn res() -> &'static Resources {
    static RES: OnceLock<Resources> = OnceLock::new();
    RES.get_or_init(Resources::builtin)
}

const UTTERANCES: [&str; 8] = [
    "Can I use UNIX with NEWS?",
    "Can I use UNIX with it?",
    "Tell me about a workstation.",
    "Is it light?",
    "How much?",
    "uh ...",
    "What does the personal computer cost?",
    "blorp zz",
];

const WORDS: [&str; 16] = [
    "tell", "me", "about", "a", "workstation", "is", "it", "light", "how", "much", "sony", "can", "i", "use",
    "unix", "with",
];

fn spans_partition(t: &ParseTree) -> bool {
    if t.children.is_empty() {
        return t.span.0 < t.span.1;
    }
    let mut at = t.span.0;
    for c in &t.children {
        if c.span.0 != at || !spans_partition(c) {
            return false;
        }
        at = c.span.1;
    }
    at == t.span.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn disambiguation_ignores_candidate_order(
        seed in prop::sample::select(&UTTERANCES[..3]),
        order in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let r = res();
        let parsed = r.parser().parse(&tokenize(seed));
        let cands = analyze(&parsed.trees, &r.grammar, &r.kb, parsed.skipped.len()).unwrap();
        let ctx = PcsContext { topic: Some("workstation"), entity: Some("news") };
        let want = disambiguate(cands.clone(), &r.constraints, ctx).unwrap();
        let mut shuffled = Vec::new();
        for i in order.iter().filter(|&&i| i < cands.len()) {
            shuffled.push(cands[*i].clone());
        }
        shuffled.extend(cands.iter().skip(8).cloned());
        let got = disambiguate(shuffled, &r.constraints, ctx).unwrap();
        prop_assert_eq!(got.frame, want.frame);
        prop_assert_eq!(got.tree, want.tree);
    }

    #[test]
    fn parses_are_total_and_spans_partition(words in prop::collection::vec(prop::sample::select(&WORDS[..]), 0..8)) {
        let r = res();
        let tokens: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        let a = r.parser().parse(&tokens);
        let b = r.parser().parse(&tokens);
        prop_assert_eq!(&a.trees, &b.trees);
        for t in &a.trees {
            prop_assert!(spans_partition(t));
        }
    }

    #[test]
    fn wider_delta_never_separates_close_scores(
        picks in prop::collection::vec((prop::sample::select(&UTTERANCES[..]), 0.0..1.0f64), 0..5),
        d1 in 0.001..0.3f64,
        extra in 0.0..0.3f64,
    ) {
        let mut scores: Vec<f64> = picks.iter().map(|p| p.1).collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        let hyps = picks.iter().zip(scores).map(|((t, _), score)| Hypothesis { text: t.to_string(), score }).collect();
        let input = NBestInput::new(hyps).unwrap();
        let parser = res().parser();
        let narrow = classify_input(&input, d1, &parser);
        let wide = classify_input(&input, d1 + extra, &parser);
        prop_assert!(wide.contenders.len() >= narrow.contenders.len());
        prop_assert_eq!(narrow.best, wide.best);
        if narrow.kind == RecognitionKind::CloseScores {
            prop_assert_eq!(wide.kind, RecognitionKind::CloseScores);
        }
    }

    #[test]
    fn wider_epsilon_never_resolves_a_critical_situation(
        prefs in prop::collection::vec(0.0..3.0f64, 8),
        e1 in 0.0..1.0f64,
        extra in 0.0..1.0f64,
    ) {
        let mut contexts = seed_contexts(&res().kb);
        for (c, p) in contexts.iter_mut().zip(prefs.iter().cycle()) {
            c.preference = *p;
        }
        let critical = |e| matches!(commit(&contexts, e), Commit::Critical(..));
        if critical(e1) {
            prop_assert!(critical(e1 + extra));
        }
    }

    #[test]
    fn steps_close_in_without_overshoot(
        f in prop::array::uniform26(-2.0..2.0f64),
        a in prop::array::uniform26(-2.0..2.0f64),
        dt in 0.001..2.0f64,
    ) {
        let (f, a) = (ParameterVector(f), ParameterVector(a));
        let next = integrate(&f, &a, dt);
        let gap = |x: &ParameterVector| (0..PARAM_COUNT).map(|i| (x[i] - a[i]).powi(2)).sum::<f64>();
        if gap(&f) > 0.0 {
            prop_assert!(gap(&next) < gap(&f));
        }
        for i in 0..PARAM_COUNT {
            prop_assert!((a[i] - next[i]) * (a[i] - f[i]) >= 0.0, "sign flipped at {}", i);
        }
    }

    #[test]
    fn classify_is_scale_invariant(counts in prop::collection::vec(0u64..30, 5), k in 1u64..40, score in -5.0..5.0f64) {
        let names = ["ModConfident", "BOSStory", "Backchannel/Attend", "Neutral", "NotConfident"];
        let h: std::collections::BTreeMap<String, u64> = names.iter().map(|n| n.to_string()).zip(counts).collect();
        let scaled = h.iter().map(|(n, c)| (n.clone(), c * k)).collect();
        prop_assert_eq!(classify(&h, score, 1.0), classify(&scaled, score, 1.0));
    }

    #[test]
    fn utterance_messages_round_trip(seq in any::<u64>(), text in any::<String>()) {
        let m = ProtocolMessage { seq, payload: Payload::Utterance { text } };
        let line = encode(&m);
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(decode(&line).unwrap(), m);
    }

    #[test]
    fn decoding_never_panics(line in any::<String>()) {
        let _ = decode(&line);
    }
}

#[test]
fn exact_step_tracks_fine_euler() {
    let f0 = ParameterVector(std::array::from_fn(|i| (i as f64 * 0.37).sin()));
    let a = ParameterVector(std::array::from_fn(|i| (i as f64 * 0.91).cos()));
    let dt = 1e-4;
    let (mut euler, mut exact) = (f0, f0);
    let mut worst: f64 = 0.0;
    for _ in 0..50_000 {
        for i in 0..PARAM_COUNT {
            euler[i] += dt * (a[i] - euler[i]);
        }
        exact = integrate(&exact, &a, dt);
        for i in 0..PARAM_COUNT {
            worst = worst.max((euler[i] - exact[i]).abs());
        }
    }
    assert!(worst < 1e-3, "diverged by {worst}");
}
