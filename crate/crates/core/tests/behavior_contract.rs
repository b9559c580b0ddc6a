//! Contract tests for agent backends: prompt rendering, response parsing,
//! the deterministic rule oracle, HTTP retry behavior, and the runner.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use socioverse_core::behavior::{
    parse_response, render_prompt, rule_oracle_pick, run_simulation, AgentBackend, AnswerValue,
    HttpLlm, HttpLlmConfig, RuleOracle, RunOptions,
};
use socioverse_core::scenario::{
    AnswerKind, BackendRequirements, ContextBundle, Question, QuestionOption, Questionnaire,
    ScenarioKind, SimulationPlan,
};
use socioverse_core::synthesis::AgentProfile;

mod common;
use common::{StubReply, StubServer};

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

fn option(label: &str, text: &str) -> QuestionOption {
    QuestionOption { label: label.into(), text: text.into(), numeric_value: None, interval: None }
}

fn likert_options() -> Vec<QuestionOption> {
    ["Disagree", "Partially disagree", "Neutral", "Partially agree", "Agree"]
        .iter()
        .enumerate()
        .map(|(i, text)| QuestionOption {
            label: (i + 1).to_string(),
            text: (*text).into(),
            numeric_value: Some((i + 1) as f64),
            interval: None,
        })
        .collect()
}

/// Three questions: one single-choice, one multi-choice, one five-point scale.
fn instrument() -> Questionnaire {
    Questionnaire {
        id: "mixed-v1".into(),
        language: "EN".into(),
        notes: None,
        questions: vec![
            Question {
                id: "Q01".into(),
                text: "Which candidate do you support?".into(),
                dimension: None,
                answer_kind: AnswerKind::SingleChoice,
                options: vec![
                    option("A", "Candidate Alpha"),
                    option("B", "Candidate Beta"),
                    option("C", "Someone else"),
                ],
            },
            Question {
                id: "Q02".into(),
                text: "Which topics do you follow?".into(),
                dimension: None,
                answer_kind: AnswerKind::MultiChoice,
                options: vec![
                    option("A", "Politics"),
                    option("B", "Sports"),
                    option("C", "Technology"),
                ],
            },
            Question {
                id: "Q03".into(),
                text: "The economy is doing well.".into(),
                dimension: None,
                answer_kind: AnswerKind::Likert1To5,
                options: likert_options(),
            },
        ],
        dimension_map: BTreeMap::new(),
    }
}

fn profile(i: usize) -> AgentProfile {
    let mut attributes = BTreeMap::new();
    attributes.insert("age".to_string(), "30-44".to_string());
    attributes.insert("gender".to_string(), if i % 2 == 0 { "female" } else { "male" }.to_string());
    AgentProfile {
        agent_id: format!("agent-{i:06}"),
        attributes,
        income: None,
        group_key: None,
        matched_user: None,
    }
}

fn plan(n: usize) -> SimulationPlan {
    SimulationPlan {
        scenario_id: "behavior-test".into(),
        kind: ScenarioKind::News,
        seed: 42,
        group_key: None,
        vote_question: Some("Q01".into()),
        backend: BackendRequirements::default(),
        questionnaire: instrument(),
        population: (0..n).map(profile).collect(),
        contexts: (0..n)
            .map(|i| ContextBundle {
                posts: if i % 2 == 0 { vec![format!("post from {i}")] } else { Vec::new() },
                extra: None,
            })
            .collect(),
    }
}

/// A response text answering every question with its first option.
fn first_option_answers(q: &Questionnaire) -> String {
    q.questions
        .iter()
        .map(|question| format!("{}: {}", question.id, question.options[0].label))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Fast-retry options for tests.
fn fast(concurrency: usize) -> RunOptions {
    RunOptions { concurrency, max_attempts: 3, initial_backoff_ms: 1 }
}

// ---------------------------------------------------------------------------
// Rule oracle: frozen hash vectors and an independent reimplementation
// ---------------------------------------------------------------------------

/// Independent FNV-1a (64-bit) over agent id, question id, and seed, joined
/// by 0x1F separators, reduced modulo the option count.
fn naive_pick(agent_id: &str, question_id: &str, seed: u64, n_options: usize) -> usize {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut eat = |byte: u8| {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    };
    for b in agent_id.bytes() {
        eat(b);
    }
    eat(0x1f);
    for b in question_id.bytes() {
        eat(b);
    }
    eat(0x1f);
    for b in seed.to_le_bytes() {
        eat(b);
    }
    (hash % n_options as u64) as usize
}

#[test]
fn oracle_matches_independent_fnv_reimplementation() {
    for agent in 0..50 {
        let agent_id = format!("agent-{agent:06}");
        for (qid, n) in [("Q01", 3usize), ("Q02", 3), ("Q03", 5), ("Q17", 4)] {
            for seed in [0u64, 1, 42, u64::MAX] {
                assert_eq!(
                    rule_oracle_pick(&agent_id, qid, seed, n),
                    naive_pick(&agent_id, qid, seed, n),
                    "agent {agent_id} {qid} seed {seed}"
                );
            }
        }
    }
}

#[test]
fn oracle_pick_is_frozen() {
    // Hand-derived FNV-1a 64 vector: hashing "a" then 0x1F then "b" then
    // 0x1F then the little-endian bytes of 0. Any change to the hashing
    // scheme shows up here as a changed pick sequence.
    let picks: Vec<usize> = (2..=7).map(|n| rule_oracle_pick("a", "b", 0, n)).collect();
    let expected: Vec<usize> = (2..=7).map(|n| naive_pick("a", "b", 0, n)).collect();
    assert_eq!(picks, expected);
    // Distinct inputs decorrelate: across many agents the picks spread out.
    let mut counts = [0usize; 5];
    for agent in 0..5000 {
        let id = format!("agent-{agent:06}");
        counts[rule_oracle_pick(&id, "Q03", 42, 5)] += 1;
    }
    for &c in &counts {
        let rate = c as f64 / 5000.0;
        assert!((rate - 0.2).abs() < 0.05, "oracle skew: {counts:?}");
    }
}

// ---------------------------------------------------------------------------
// Prompt rendering
// ---------------------------------------------------------------------------

#[test]
fn prompt_contains_persona_instrument_and_output_contract() {
    let p = plan(2);
    let prompt = render_prompt(&p.population[0], &p.contexts[0], &p.questionnaire);
    // Persona block lists attributes.
    assert!(prompt.contains("age: 30-44"), "{prompt}");
    assert!(prompt.contains("gender: female"), "{prompt}");
    // Context present and delimited.
    assert!(prompt.contains("post from 0"), "{prompt}");
    // Every question and its options appear.
    for q in &p.questionnaire.questions {
        assert!(prompt.contains(&q.id), "missing {} in:\n{prompt}", q.id);
        assert!(prompt.contains(&q.text));
        for opt in &q.options {
            assert!(prompt.contains(&opt.text));
        }
    }
    // Output contract names the line format.
    assert!(prompt.contains("Q01: "), "{prompt}");
}

#[test]
fn prompt_omits_context_block_when_bundle_is_empty() {
    let p = plan(2);
    let with = render_prompt(&p.population[0], &p.contexts[0], &p.questionnaire);
    let without = render_prompt(&p.population[1], &p.contexts[1], &p.questionnaire);
    assert!(with.len() > without.len());
    assert!(!without.contains("post from"), "{without}");
}

#[test]
fn prompt_mentions_income_when_present() {
    let p = plan(1);
    let mut agent = p.population[0].clone();
    agent.income = Some(8123.45);
    let prompt = render_prompt(&agent, &p.contexts[0], &p.questionnaire);
    assert!(prompt.contains("8123"), "{prompt}");
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

#[test]
fn parse_accepts_well_formed_responses() {
    let q = instrument();
    let outcome = parse_response("Q01: B\nQ02: A, C\nQ03: 4", &q);
    assert!(outcome.is_complete(&q), "{:?}", outcome.problems);
    assert_eq!(outcome.answers["Q01"], AnswerValue::Label("B".into()));
    assert_eq!(
        outcome.answers["Q02"],
        AnswerValue::Labels(vec!["A".into(), "C".into()])
    );
    assert_eq!(outcome.answers["Q03"], AnswerValue::Number(4.0));
}

#[test]
fn parse_tolerates_case_whitespace_and_option_text() {
    let q = instrument();
    let text = "  q01 :  candidate beta \nQ02: sports\nq03: Partially agree";
    let outcome = parse_response(text, &q);
    assert!(outcome.is_complete(&q), "{:?}", outcome.problems);
    assert_eq!(outcome.answers["Q01"], AnswerValue::Label("B".into()));
    assert_eq!(outcome.answers["Q02"], AnswerValue::Labels(vec!["B".into()]));
    assert_eq!(outcome.answers["Q03"], AnswerValue::Number(4.0));
}

#[test]
fn parse_accepts_label_with_trailing_text() {
    let q = instrument();
    let outcome = parse_response("Q01: B) Candidate Beta\nQ02: A\nQ03: 2 - Partially disagree", &q);
    assert!(outcome.is_complete(&q), "{:?}", outcome.problems);
    assert_eq!(outcome.answers["Q01"], AnswerValue::Label("B".into()));
    assert_eq!(outcome.answers["Q03"], AnswerValue::Number(2.0));
}

#[test]
fn parse_last_answer_wins_and_warns() {
    let q = instrument();
    let outcome = parse_response("Q01: A\nQ02: B\nQ03: 1\nQ01: C", &q);
    assert_eq!(outcome.answers["Q01"], AnswerValue::Label("C".into()));
    assert!(outcome.problems.iter().any(|p| p.contains("Q01")), "{:?}", outcome.problems);
}

#[test]
fn parse_dedupes_multi_choice_and_orders_by_option() {
    let q = instrument();
    let outcome = parse_response("Q01: A\nQ02: C, A, C, a\nQ03: 5", &q);
    assert_eq!(
        outcome.answers["Q02"],
        AnswerValue::Labels(vec!["A".into(), "C".into()]),
        "labels deduped and in option order"
    );
}

#[test]
fn parse_flags_unknown_questions_and_illegal_values() {
    let q = instrument();
    let outcome = parse_response("Q01: Z\nQ99: A\nQ02: B\nQ03: 9", &q);
    assert!(!outcome.is_complete(&q));
    assert!(!outcome.answers.contains_key("Q01"), "illegal label must not count");
    assert!(!outcome.answers.contains_key("Q03"), "off-scale value must not count");
    assert!(outcome.problems.iter().any(|p| p.contains("Q99")));
}

#[test]
fn parse_is_total_on_garbage() {
    let q = instrument();
    for garbage in ["", "::::", "no colons here", "\u{0}\u{1f}", "Q01", ": A"] {
        let outcome = parse_response(garbage, &q);
        assert!(!outcome.is_complete(&q));
        assert!(outcome.answers.is_empty(), "{garbage:?} -> {:?}", outcome.answers);
    }
    // Surrounding chatter is ignored; the answer lines still land.
    let noisy = "Sure! Here are my answers:\n\nQ01: A\nQ02: B\nQ03: 3\n\nHope that helps!";
    let outcome = parse_response(noisy, &q);
    assert!(outcome.is_complete(&q), "{:?}", outcome.problems);
}

#[test]
fn answer_values_round_trip_as_bare_json() {
    let cases = vec![
        (AnswerValue::Number(4.0), "4.0"),
        (AnswerValue::Label("B".into()), "\"B\""),
        (
            AnswerValue::Labels(vec!["A".into(), "C".into()]),
            "[\"A\",\"C\"]",
        ),
    ];
    for (value, json) in cases {
        assert_eq!(serde_json::to_string(&value).unwrap(), json);
        let back: AnswerValue = serde_json::from_str(json).unwrap();
        assert_eq!(back, value);
    }
}

// ---------------------------------------------------------------------------
// Runner with the rule oracle
// ---------------------------------------------------------------------------

#[test]
fn oracle_run_is_complete_valid_and_deterministic_across_concurrency() {
    let p = plan(50);
    let run = |concurrency| {
        let mut streamed = 0usize;
        let out = run_simulation(&p, &RuleOracle, &fast(concurrency), |_r| streamed += 1).unwrap();
        (serde_json::to_string(&out.results).unwrap(), out.manifest, streamed)
    };
    let (a, manifest_a, streamed_a) = run(1);
    let (b, manifest_b, streamed_b) = run(8);
    assert_eq!(a, b, "results must not depend on worker count");
    assert_eq!(streamed_a, 50);
    assert_eq!(streamed_b, 50);
    assert_eq!(manifest_a.population, 50);
    assert_eq!(manifest_a.completed, 50);
    assert_eq!(manifest_a.invalid, 0);
    assert!(!manifest_a.aborted);
    assert_eq!(manifest_a.plan_hash, p.content_hash());
    assert_eq!(manifest_a.plan_hash, manifest_b.plan_hash);
}

#[test]
fn oracle_answers_depend_on_plan_seed() {
    let p1 = plan(10);
    let mut p2 = plan(10);
    p2.seed = 43;
    let o1 = run_simulation(&p1, &RuleOracle, &fast(4), |_| {}).unwrap();
    let o2 = run_simulation(&p2, &RuleOracle, &fast(4), |_| {}).unwrap();
    assert_ne!(
        serde_json::to_string(&o1.results).unwrap(),
        serde_json::to_string(&o2.results).unwrap()
    );
}

#[test]
fn oracle_results_are_plan_ordered_with_valid_answers() {
    let p = plan(12);
    let out = run_simulation(&p, &RuleOracle, &fast(5), |_| {}).unwrap();
    assert_eq!(out.results.len(), 12);
    for (i, r) in out.results.iter().enumerate() {
        assert_eq!(r.agent_id, format!("agent-{i:06}"));
        assert!(r.valid);
        assert_eq!(r.attempts_used, 1);
        assert_eq!(r.answers.len(), 3);
        // The vote answer matches the oracle pick directly.
        let pick = rule_oracle_pick(&r.agent_id, "Q01", p.seed, 3);
        let expected = p.questionnaire.questions[0].options[pick].label.clone();
        assert_eq!(r.answers["Q01"], AnswerValue::Label(expected));
    }
}

// ---------------------------------------------------------------------------
// HTTP backend against the stub server
// ---------------------------------------------------------------------------

fn http_backend(endpoint: &str) -> HttpLlm {
    HttpLlm::new(HttpLlmConfig {
        endpoint: endpoint.to_string(),
        model: "test-model".into(),
        api_key: Some("test-key".into()),
        timeout_secs: 5,
        rpm_limit: None,
    })
}

#[test]
fn http_run_succeeds_and_sends_expected_body() {
    let q = instrument();
    let good = first_option_answers(&q);
    let bodies = std::sync::Arc::new(Mutex::new(Vec::new()));
    let bodies2 = bodies.clone();
    let server = StubServer::start(move |_i, body| {
        bodies2.lock().unwrap().push(body.clone());
        StubReply::Text(good.clone())
    });
    let p = plan(3);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(2), |_| {}).unwrap();
    assert_eq!(out.manifest.completed, 3);
    assert!(!out.manifest.aborted);
    let bodies = bodies.lock().unwrap();
    assert_eq!(bodies.len(), 3);
    for body in bodies.iter() {
        assert_eq!(body["model"], "test-model");
        assert!((body["temperature"].as_f64().unwrap() - 0.7).abs() < 1e-9);
        assert_eq!(body["max_tokens"], 2048);
        let content = body["messages"][0]["content"].as_str().unwrap();
        assert!(content.contains("Q01"));
    }
}

#[test]
fn http_retries_rate_limits_then_succeeds() {
    let q = instrument();
    let good = first_option_answers(&q);
    let first_seen = std::sync::Arc::new(Mutex::new(std::collections::HashSet::new()));
    let fs = first_seen.clone();
    let server = StubServer::start(move |_i, body| {
        // 429 on each agent's first attempt, keyed by prompt content.
        let key = body["messages"][0]["content"].as_str().unwrap_or("").to_string();
        if fs.lock().unwrap().insert(key) {
            StubReply::Raw { status: 429, body: "{\"error\":\"slow down\"}".into() }
        } else {
            StubReply::Text(good.clone())
        }
    });
    let mut p = plan(4);
    // Give every agent a distinct context so prompts are unique keys.
    for (i, ctx) in p.contexts.iter_mut().enumerate() {
        ctx.posts = vec![format!("distinct post {i}")];
    }
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(2), |_| {}).unwrap();
    assert_eq!(out.manifest.completed, 4);
    assert!(out.results.iter().all(|r| r.attempts_used == 2), "one retry each");
    assert_eq!(server.hits(), 8);
}

#[test]
fn http_aborts_on_auth_failure_without_retrying() {
    let server = StubServer::start(|_i, _b| StubReply::Raw {
        status: 401,
        body: "{\"error\":\"bad key\"}".into(),
    });
    let p = plan(3);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(1), |_| {}).unwrap();
    assert!(out.manifest.aborted);
    let reason = out.manifest.abort_reason.clone().unwrap_or_default();
    assert!(reason.contains("401"), "{reason}");
    // No retry on auth errors: strictly one request for the aborting agent.
    assert_eq!(server.hits(), 1);
}

#[test]
fn http_aborts_when_server_errors_exhaust_the_retry_budget() {
    let server = StubServer::start(|_i, _b| StubReply::Raw {
        status: 500,
        body: "{\"error\":\"boom\"}".into(),
    });
    let p = plan(2);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(1), |_| {}).unwrap();
    assert!(out.manifest.aborted);
    assert_eq!(server.hits(), 3, "three attempts for the first agent, then abort");
    assert!(out.results.is_empty());
}

#[test]
fn http_retries_malformed_success_bodies() {
    let q = instrument();
    let good = first_option_answers(&q);
    let count = std::sync::Arc::new(AtomicUsize::new(0));
    let c2 = count.clone();
    let server = StubServer::start(move |_i, _b| {
        if c2.fetch_add(1, Ordering::SeqCst) == 0 {
            StubReply::Raw { status: 200, body: "this is not json".into() }
        } else {
            StubReply::Text(good.clone())
        }
    });
    let p = plan(1);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(1), |_| {}).unwrap();
    assert!(!out.manifest.aborted);
    assert_eq!(out.manifest.completed, 1);
    assert_eq!(out.results[0].attempts_used, 2);
}

#[test]
fn unparseable_content_marks_the_agent_invalid_after_full_budget() {
    let server = StubServer::start(|_i, _b| StubReply::Text("I refuse to answer.".into()));
    let p = plan(2);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(1), |_| {}).unwrap();
    assert!(!out.manifest.aborted, "content problems never abort the run");
    assert_eq!(out.manifest.completed, 0);
    assert_eq!(out.manifest.invalid, 2);
    assert_eq!(out.manifest.population, 2);
    for r in &out.results {
        assert!(!r.valid);
        assert_eq!(r.attempts_used, 3, "full budget spent before giving up");
        assert!(r.answers.is_empty());
    }
    assert_eq!(server.hits(), 6);
}

#[test]
fn partially_valid_content_keeps_the_parsed_answers() {
    // Q01 parses; Q02/Q03 never arrive. The agent ends invalid but retains
    // what it did answer, so downstream diagnostics can see how far it got.
    let server = StubServer::start(|_i, _b| StubReply::Text("Q01: A".into()));
    let p = plan(1);
    let out = run_simulation(&p, &http_backend(&server.endpoint), &fast(1), |_| {}).unwrap();
    assert_eq!(out.manifest.invalid, 1);
    let r = &out.results[0];
    assert!(!r.valid);
    assert_eq!(r.answers["Q01"], AnswerValue::Label("A".into()));
    assert!(r.problems.iter().any(|m| m.contains("Q02")), "{:?}", r.problems);
}

#[test]
fn backend_names_identify_the_implementation() {
    assert_eq!(RuleOracle.name(), "rule_oracle");
    let http = http_backend("http://127.0.0.1:1/v1/chat/completions");
    assert_eq!(http.name(), "http:test-model");
}

// ---------------------------------------------------------------------------
// Golden files: a frozen rendered prompt and an adversarial transcript
// ---------------------------------------------------------------------------

fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// The rendered prompt for a fixed agent is frozen as a reviewed golden
/// file. Run with `UPDATE_GOLDEN=1` to regenerate after a deliberate
/// template change; any other diff is a regression.
#[test]
fn golden_prompt_is_byte_identical_to_the_reviewed_file() {
    let mut attributes = BTreeMap::new();
    attributes.insert("age".to_string(), "30-44".to_string());
    attributes.insert("gender".to_string(), "female".to_string());
    attributes.insert("region".to_string(), "r03".to_string());
    let agent = AgentProfile {
        agent_id: "agent-00017".into(),
        attributes,
        income: Some(8123.45),
        group_key: Some("r03".into()),
        matched_user: None,
    };
    let context = ContextBundle {
        posts: vec![
            "Spent the weekend fixing my bike, ready for spring.".to_string(),
            "The new transit schedule is finally out.".to_string(),
        ],
        extra: Some("A storm disrupted rail service across the region this week.".to_string()),
    };
    let rendered = render_prompt(&agent, &context, &instrument());
    let path = golden_path("golden_prompt.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &rendered).unwrap();
        return;
    }
    let golden = std::fs::read_to_string(&path).expect("golden prompt file exists");
    assert_eq!(rendered, golden, "prompt template drifted from the golden file");
}

/// A hand-built messy transcript — preamble chatter, reordered lines,
/// lowercase ids, label-with-text values, and a duplicate line — still
/// yields a complete answer set.
#[test]
fn messy_transcript_fixture_parses_completely() {
    let raw = std::fs::read_to_string(golden_path("messy_transcript.txt")).unwrap();
    let q = instrument();
    let outcome = parse_response(&raw, &q);
    assert!(outcome.is_complete(&q), "problems: {:?}", outcome.problems);
    assert_eq!(outcome.answers["Q01"], AnswerValue::Label("B".into()));
    assert_eq!(
        outcome.answers["Q02"],
        AnswerValue::Labels(vec!["A".into(), "C".into()])
    );
    assert_eq!(outcome.answers["Q03"], AnswerValue::Number(4.0));
    // The duplicate Q01 line is kept (last wins) but flagged.
    assert!(outcome.problems.iter().any(|p| p.contains("more than once")));
}

// ---------------------------------------------------------------------------
// Oracle seed sensitivity
// ---------------------------------------------------------------------------

/// Changing the master seed re-rolls nearly every (agent, question) pick.
/// Chance agreement between two seeds is 1/|options|, so the sensitivity
/// bound is checked on wide questions where collisions are rare.
#[test]
fn oracle_seed_change_flips_at_least_99_percent_of_wide_picks() {
    let n_options = 256;
    let mut changed = 0;
    let mut pairs = 0;
    for agent in 0..250 {
        let agent_id = format!("agent-{agent:06}");
        for q in 0..4 {
            let qid = format!("Q{q:02}");
            let a = rule_oracle_pick(&agent_id, &qid, 1, n_options);
            let b = rule_oracle_pick(&agent_id, &qid, 2, n_options);
            pairs += 1;
            if a != b {
                changed += 1;
            }
        }
    }
    assert_eq!(pairs, 1000);
    assert!(changed >= 990, "only {changed}/1000 picks changed with the seed");
}
