//! Emitting the fixture tree: pool files, instruments, scenario configs,
//! auxiliary inputs, and ground truths produced by running the rule oracle
//! over each scenario and recording its aggregate outcomes.
//!
//! Layout under the target directory:
//!
//! ```text
//! pool.jsonl  schema.json  bot_pool.jsonl
//! election/  scenario.json questionnaire.json targets.json truth.json
//! news/      scenario.json questionnaire.json context.txt  truth.json
//! economic/  scenario.json questionnaire.json regions.json truth.json
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::behavior::{run_simulation, AgentResult, AnswerValue, RuleOracle, RunOptions};
use crate::evaluation::{
    likert_aggregate, spending_aggregate, winner_takes_all, ElectionGroupTruth, GroundTruth,
    NewsDimensionTruth,
};
use crate::pool::Pool;
use crate::scenario::{
    build_plan, AblationFlags, BackendRequirements, ContextPolicy, PopulationMethod,
    PopulationSpec, ScenarioConfig, ScenarioKind, SimulationPlan,
};
use crate::synthesis::{MarginalTargets, RegionSpec, RegionalIncomeConfig};
use crate::{Error, Result};

use super::{
    bot_pool_records, economic_instrument, election_instrument, fixture_pool_records,
    fixture_schema, news_instrument, FIXTURE_SEED,
};

/// Event description injected into every news-scenario prompt.
const NEWS_BRIEF: &str = "\
Recent news: a conversational AI assistant called ChatGPT has spread at a \
record pace, reaching an estimated one hundred million users within two \
months of its public release. The system answers questions, drafts text, \
and explains concepts in plain language, and employers, schools, and media \
outlets are debating what that means. Supporters point to productivity \
gains and easier access to knowledge; critics warn about fabricated \
information, weakened independent thinking, and jobs that may be displaced. \
Regulators in several countries have opened consultations on how the \
technology should be governed, while the companies behind it promise \
responsible development. Surveys are now asking the public how well they \
know the tool, what risks and benefits they see, and whether they welcome \
its continued rollout.
";

/// Write the complete fixture tree into `dir`, returning the relative paths
/// of every file written. Output is byte-identical across calls.
pub fn write_all(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let root = dir.as_ref();
    let mut writer = TreeWriter { root, written: Vec::new() };

    // Shared pool files.
    let schema = fixture_schema();
    writer.put_json("schema.json", &schema)?;
    let pool = Pool::from_records(schema.clone(), fixture_pool_records())?;
    writer.put_pool("pool.jsonl", &pool)?;
    let bots = Pool::from_records(schema, bot_pool_records())?;
    writer.put_pool("bot_pool.jsonl", &bots)?;

    write_election(&mut writer, &pool)?;
    write_news(&mut writer, &pool)?;
    write_economic(&mut writer, &pool)?;

    Ok(writer.written)
}

// ===========================================================================
// Tree writer
// ===========================================================================

struct TreeWriter<'a> {
    root: &'a Path,
    written: Vec<PathBuf>,
}

impl TreeWriter<'_> {
    fn put(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::from(e).in_file(&path))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::from(e).in_file(&path))?;
        self.written.push(rel.to_path_buf());
        Ok(())
    }

    fn put_json<T: serde::Serialize>(&mut self, rel: impl AsRef<Path>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(rel, &bytes)
    }

    fn put_pool(&mut self, rel: impl AsRef<Path>, pool: &Pool) -> Result<()> {
        let mut bytes = Vec::new();
        pool.write_jsonl(&mut bytes)?;
        self.put(rel, &bytes)
    }
}

// ===========================================================================
// Shared truth-generation plumbing
// ===========================================================================

/// Plan the scenario at the fixture seed and run it through the rule oracle.
fn oracle_run(
    config: &ScenarioConfig,
    base: &Path,
    pool: &Pool,
) -> Result<(SimulationPlan, Vec<AgentResult>)> {
    let plan = build_plan(config, base, pool, FIXTURE_SEED)?;
    let output = run_simulation(&plan, &RuleOracle, &RunOptions::default(), |_| {})?;
    Ok((plan, output.results))
}

/// agent id -> group key, for slicing results the same way evaluation does.
fn groups_by_agent(plan: &SimulationPlan) -> BTreeMap<&str, &str> {
    plan.population
        .iter()
        .filter_map(|p| p.group_key.as_deref().map(|g| (p.agent_id.as_str(), g)))
        .collect()
}

fn shared_context(max_posts: usize, extra: Option<PathBuf>) -> ContextPolicy {
    ContextPolicy { include_posts: true, max_posts, extra_context: extra }
}

// ===========================================================================
// Election
// ===========================================================================

fn election_config() -> ScenarioConfig {
    ScenarioConfig {
        scenario_id: "election-demo".into(),
        kind: ScenarioKind::Election,
        questionnaire: "questionnaire.json".into(),
        pool: "../pool.jsonl".into(),
        schema: "../schema.json".into(),
        population: PopulationSpec {
            method: PopulationMethod::Ipf,
            size: 1000,
            attributes: ["gender", "age", "region", "ideology"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            targets: Some("targets.json".into()),
            seed_table: None,
            reference: None,
            allow_replacement: false,
            regions: None,
            income: None,
        },
        context: shared_context(5, None),
        group_key: Some("region".into()),
        vote_question: Some("Q01".into()),
        ground_truth: "truth.json".into(),
        ablation: AblationFlags::default(),
        backend: BackendRequirements::default(),
    }
}

/// Marginal targets as integer masses; every attribute sums to 1,000 so the
/// fit's consistency check is exact.
fn election_targets() -> MarginalTargets {
    let masses = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    MarginalTargets::new(BTreeMap::from([
        ("gender".to_string(), masses(&[("female", 480.0), ("male", 520.0)])),
        (
            "age".to_string(),
            masses(&[("18-29", 250.0), ("30-44", 300.0), ("45-64", 280.0), ("65+", 170.0)]),
        ),
        (
            "region".to_string(),
            masses(&[
                ("r01", 160.0),
                ("r02", 140.0),
                ("r03", 120.0),
                ("r04", 110.0),
                ("r05", 100.0),
                ("r06", 90.0),
                ("r07", 80.0),
                ("r08", 80.0),
                ("r09", 70.0),
                ("r10", 50.0),
            ]),
        ),
        (
            "ideology".to_string(),
            masses(&[("liberal", 340.0), ("moderate", 330.0), ("conservative", 330.0)]),
        ),
    ]))
}

fn write_election(writer: &mut TreeWriter, pool: &Pool) -> Result<()> {
    writer.put_json("election/questionnaire.json", &election_instrument())?;
    writer.put_json("election/targets.json", &election_targets())?;
    let config = election_config();
    writer.put_json("election/scenario.json", &config)?;

    let base = writer.root.join("election");
    let (plan, results) = oracle_run(&config, &base, pool)?;
    let groups_of = groups_by_agent(&plan);

    // Collect votes per region exactly the way the evaluator will.
    let vote_question = config.vote_question.as_deref().expect("election config names one");
    let mut votes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for result in results.iter().filter(|r| r.valid) {
        let Some(AnswerValue::Label(label)) = result.answers.get(vote_question) else {
            return Err(Error::Evaluation(format!(
                "oracle vote for agent '{}' is not a single label",
                result.agent_id
            )));
        };
        let group = groups_of.get(result.agent_id.as_str()).ok_or_else(|| {
            Error::Evaluation(format!("agent '{}' has no group key", result.agent_id))
        })?;
        votes.entry(group.to_string()).or_default().push(label.clone());
    }
    let calls = winner_takes_all(&votes)?;

    // The three narrowest winning margins form a "close races" subset.
    let mut margins: Vec<(f64, &String)> = calls
        .iter()
        .map(|(region, call)| {
            let winner_share = call.shares[&call.winner];
            let runner_up = call
                .shares
                .iter()
                .filter(|(label, _)| **label != call.winner)
                .map(|(_, share)| *share)
                .fold(0.0, f64::max);
            (winner_share - runner_up, region)
        })
        .collect();
    margins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let mut close_races: Vec<String> =
        margins.iter().take(3).map(|(_, region)| (*region).clone()).collect();
    close_races.sort();

    let groups = calls
        .into_iter()
        .map(|(region, call)| {
            (region, ElectionGroupTruth { winner: call.winner, shares: call.shares })
        })
        .collect();
    let truth = GroundTruth::Election {
        question: vote_question.to_string(),
        groups,
        subsets: BTreeMap::from([("close_races".to_string(), close_races)]),
    };
    writer.put_json("election/truth.json", &truth)
}

// ===========================================================================
// News
// ===========================================================================

fn news_config() -> ScenarioConfig {
    ScenarioConfig {
        scenario_id: "news-demo".into(),
        kind: ScenarioKind::News,
        questionnaire: "questionnaire.json".into(),
        pool: "../pool.jsonl".into(),
        schema: "../schema.json".into(),
        population: PopulationSpec {
            method: PopulationMethod::Ids,
            size: 500,
            attributes: ["gender", "age", "education", "consumption"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            targets: None,
            seed_table: None,
            reference: Some(BTreeMap::from([("hobbies".to_string(), "tech".to_string())])),
            allow_replacement: true,
            regions: None,
            income: None,
        },
        context: shared_context(5, Some("context.txt".into())),
        group_key: None,
        vote_question: None,
        ground_truth: "truth.json".into(),
        ablation: AblationFlags::default(),
        backend: BackendRequirements::default(),
    }
}

fn write_news(writer: &mut TreeWriter, pool: &Pool) -> Result<()> {
    writer.put_json("news/questionnaire.json", &news_instrument())?;
    writer.put("news/context.txt", NEWS_BRIEF.as_bytes())?;
    let config = news_config();
    writer.put_json("news/scenario.json", &config)?;

    let base = writer.root.join("news");
    let (plan, results) = oracle_run(&config, &base, pool)?;
    let dimensions = likert_aggregate(&results, &plan.questionnaire)?
        .into_iter()
        .map(|(name, d)| {
            (name, NewsDimensionTruth { mean: d.mean, distribution: d.distribution })
        })
        .collect();
    writer.put_json("news/truth.json", &GroundTruth::News { dimensions })
}

// ===========================================================================
// Economic
// ===========================================================================

fn fixture_regions() -> Vec<RegionSpec> {
    [
        ("r01", 8_400u64, 11_800.0),
        ("r02", 6_200, 9_600.0),
        ("r03", 5_100, 8_400.0),
        ("r04", 3_800, 7_200.0),
        ("r05", 2_500, 6_100.0),
    ]
    .into_iter()
    .map(|(region, population, mean_income)| RegionSpec {
        region: region.to_string(),
        population,
        mean_income,
    })
    .collect()
}

fn economic_config() -> ScenarioConfig {
    ScenarioConfig {
        scenario_id: "economic-demo".into(),
        kind: ScenarioKind::Economic,
        questionnaire: "questionnaire.json".into(),
        pool: "../pool.jsonl".into(),
        schema: "../schema.json".into(),
        population: PopulationSpec {
            method: PopulationMethod::Regional,
            size: 500,
            attributes: vec!["region".to_string()],
            targets: None,
            seed_table: None,
            reference: None,
            allow_replacement: false,
            regions: Some("regions.json".into()),
            income: Some(RegionalIncomeConfig::default()),
        },
        context: shared_context(5, None),
        group_key: Some("region".into()),
        vote_question: None,
        ground_truth: "truth.json".into(),
        ablation: AblationFlags::default(),
        backend: BackendRequirements::default(),
    }
}

fn write_economic(writer: &mut TreeWriter, pool: &Pool) -> Result<()> {
    writer.put_json("economic/questionnaire.json", &economic_instrument())?;
    let regions = fixture_regions();
    writer.put_json("economic/regions.json", &regions)?;
    let config = economic_config();
    writer.put_json("economic/scenario.json", &config)?;

    let base = writer.root.join("economic");
    let (plan, results) = oracle_run(&config, &base, pool)?;
    let categories: Vec<String> = plan.questionnaire.dimension_map.keys().cloned().collect();
    let overall = spending_aggregate(&results, &plan.questionnaire, &categories)?;

    let groups_of = groups_by_agent(&plan);
    let mut groups = BTreeMap::new();
    for region in regions.iter().map(|r| r.region.as_str()) {
        let members: Vec<AgentResult> = results
            .iter()
            .filter(|r| r.valid && groups_of.get(r.agent_id.as_str()) == Some(&region))
            .cloned()
            .collect();
        let shares = spending_aggregate(&members, &plan.questionnaire, &categories)?;
        groups.insert(region.to_string(), shares);
    }

    let truth = GroundTruth::Economic {
        overall,
        groups,
        subsets: BTreeMap::from([(
            "high_income".to_string(),
            vec!["r01".to_string(), "r02".to_string()],
        )]),
    };
    writer.put_json("economic/truth.json", &truth)
}
