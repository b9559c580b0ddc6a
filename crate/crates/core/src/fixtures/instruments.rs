//! The three shipped survey instruments.
//!
//! The news and spending instruments carry full question text; the election
//! instrument pairs a real vote-choice question with structurally valid
//! placeholder items (flagged in its notes), since only its size and shape
//! are contractual.

use std::collections::BTreeMap;

use crate::scenario::{AnswerKind, Interval, Question, QuestionOption, Questionnaire};

fn choice(label: &str, text: &str) -> QuestionOption {
    QuestionOption { label: label.into(), text: text.into(), numeric_value: None, interval: None }
}

fn likert_options() -> Vec<QuestionOption> {
    ["Disagree", "Partially disagree", "Neutral", "Partially agree", "Agree"]
        .iter()
        .enumerate()
        .map(|(i, text)| QuestionOption {
            label: (i + 1).to_string(),
            text: (*text).to_string(),
            numeric_value: Some((i + 1) as f64),
            interval: None,
        })
        .collect()
}

fn likert(id: &str, dimension: Option<&str>, text: &str) -> Question {
    Question {
        id: id.into(),
        text: text.into(),
        dimension: dimension.map(str::to_string),
        answer_kind: AnswerKind::Likert1To5,
        options: likert_options(),
    }
}

fn single(id: &str, text: &str, options: Vec<QuestionOption>) -> Question {
    Question {
        id: id.into(),
        text: text.into(),
        dimension: None,
        answer_kind: AnswerKind::SingleChoice,
        options,
    }
}

// ---------------------------------------------------------------------------
// Election
// ---------------------------------------------------------------------------

const ISSUE_AREAS: [&str; 24] = [
    "the economy",
    "healthcare",
    "education",
    "immigration",
    "the environment",
    "taxation",
    "housing",
    "transportation",
    "public safety",
    "foreign policy",
    "energy",
    "agriculture",
    "technology regulation",
    "international trade",
    "infrastructure",
    "social welfare",
    "veterans' services",
    "firearms policy",
    "drug policy",
    "election administration",
    "the court system",
    "press freedom",
    "labor rights",
    "small business support",
];

/// A 49-question election instrument: the vote-choice question first, then
/// alternating agreement and stance items over 24 issue areas.
pub fn election_instrument() -> Questionnaire {
    let mut questions = vec![single(
        "Q01",
        "If the election were held today, which candidate would you vote for?",
        vec![
            choice("A", "Candidate Alpha"),
            choice("B", "Candidate Beta"),
            choice("C", "Another candidate"),
        ],
    )];
    for (i, issue) in ISSUE_AREAS.iter().enumerate() {
        questions.push(likert(
            &format!("Q{:02}", 2 * i + 2),
            None,
            &format!("The country is on the right track when it comes to {issue}."),
        ));
        questions.push(single(
            &format!("Q{:02}", 2 * i + 3),
            &format!("Which statement best matches your view on {issue}?"),
            vec![
                choice("A", "It should be a top national priority"),
                choice("B", "It matters, but other issues come first"),
                choice("C", "It receives more attention than it deserves"),
                choice("D", "No opinion"),
            ],
        ));
    }
    Questionnaire {
        id: "election-v1".into(),
        language: "EN".into(),
        notes: Some(
            "Synthetic instrument: the vote-choice question is real, the 48 issue items \
             are generated placeholders that preserve count and structure only."
                .into(),
        ),
        questions,
        dimension_map: BTreeMap::new(),
    }
}

// ---------------------------------------------------------------------------
// News attitudes
// ---------------------------------------------------------------------------

/// The 18-item attitude instrument: six dimensions, three five-point
/// agreement statements each, covering awareness, risk, benefit, trust,
/// fairness, and acceptance of a widely discussed AI chat assistant.
pub fn news_instrument() -> Questionnaire {
    let items: [(&str, [&str; 3]); 6] = [
        (
            "public_cognition",
            [
                "I have heard of ChatGPT.",
                "Many people around me use ChatGPT.",
                "I have a deep understanding of ChatGPT's functions and applications.",
            ],
        ),
        (
            "perceived_risks",
            [
                "ChatGPT may lead to the widespread dissemination of false information.",
                "ChatGPT may reduce human thinking ability and creativity.",
                "The development of ChatGPT may replace certain jobs, and I am deeply concerned about this.",
            ],
        ),
        (
            "perceived_benefits",
            [
                "ChatGPT will definitely improve my work and study efficiency.",
                "ChatGPT helps broaden my knowledge and provides me with new perspectives and ideas.",
                "ChatGPT promotes technological innovation and development in related fields.",
            ],
        ),
        (
            "trust",
            [
                "I fully trust the team developing ChatGPT to manage and guide its development responsibly.",
                "I have strong confidence in the accuracy and reliability of the information generated by ChatGPT.",
                "I believe that the future application of ChatGPT will be effectively regulated.",
            ],
        ),
        (
            "fairness",
            [
                "The opportunities to use ChatGPT are distributed fairly among different groups of people.",
                "I find the distribution of benefits brought by ChatGPT to be fair.",
                "I believe that the decision-making process for the development and promotion of ChatGPT is fully transparent and adequately reflects public interests.",
            ],
        ),
        (
            "public_acceptance",
            [
                "Overall, I strongly welcome the emergence of ChatGPT.",
                "I am definitely willing to use ChatGPT in my work or studies.",
                "I strongly support increased investment in the research and development of AI technologies like ChatGPT.",
            ],
        ),
    ];
    let mut questions = Vec::new();
    let mut dimension_map = BTreeMap::new();
    for (d, (dimension, texts)) in items.iter().enumerate() {
        let mut ids = Vec::new();
        for (k, text) in texts.iter().enumerate() {
            let id = format!("Q{:02}", 3 * d + k + 1);
            questions.push(likert(&id, Some(dimension), text));
            ids.push(id);
        }
        dimension_map.insert(dimension.to_string(), ids);
    }
    Questionnaire {
        id: "news-attitudes-v1".into(),
        language: "EN".into(),
        notes: None,
        questions,
        dimension_map,
    }
}

// ---------------------------------------------------------------------------
// Household spending
// ---------------------------------------------------------------------------

fn bracket_options(bounds: [f64; 4]) -> Vec<QuestionOption> {
    let [b1, b2, b3, b4] = bounds;
    vec![
        QuestionOption {
            label: "A".into(),
            text: format!("Below {b1:.0} CNY"),
            numeric_value: None,
            interval: Some(Interval { lo: None, hi: Some(b1) }),
        },
        QuestionOption {
            label: "B".into(),
            text: format!("{:.0}-{b2:.0} CNY", b1 + 1.0),
            numeric_value: None,
            interval: Some(Interval { lo: Some(b1 + 1.0), hi: Some(b2) }),
        },
        QuestionOption {
            label: "C".into(),
            text: format!("{:.0}-{b3:.0} CNY", b2 + 1.0),
            numeric_value: None,
            interval: Some(Interval { lo: Some(b2 + 1.0), hi: Some(b3) }),
        },
        QuestionOption {
            label: "D".into(),
            text: format!("{:.0}-{b4:.0} CNY", b3 + 1.0),
            numeric_value: None,
            interval: Some(Interval { lo: Some(b3 + 1.0), hi: Some(b4) }),
        },
        QuestionOption {
            label: "E".into(),
            text: format!("Above {b4:.0} CNY"),
            numeric_value: None,
            interval: Some(Interval { lo: Some(b4), hi: None }),
        },
    ]
}

fn bracket(id: &str, dimension: &str, text: &str, bounds: [f64; 4]) -> Question {
    Question {
        id: id.into(),
        text: text.into(),
        dimension: Some(dimension.into()),
        answer_kind: AnswerKind::SingleChoice,
        options: bracket_options(bounds),
    }
}

/// The 17-item monthly spending instrument: eight bracketed expenditure
/// questions (one per spending category) interleaved with attitude items,
/// closing with outlook questions and a multi-choice expansion item.
pub fn economic_instrument() -> Questionnaire {
    let questions = vec![
        bracket(
            "Q01",
            "food",
            "What is your average monthly expenditure on food (including dining out)? (Unit: CNY)",
            [500.0, 650.0, 800.0, 1000.0],
        ),
        single(
            "Q02",
            "Do you think your current spending on food, tobacco, and alcohol is too high relative to your income?",
            vec![choice("A", "Yes"), choice("B", "No"), choice("C", "Acceptable")],
        ),
        bracket(
            "Q03",
            "clothing",
            "What is your average monthly expenditure on clothing (including apparel, shoes, and accessories)? (Unit: CNY)",
            [50.0, 100.0, 150.0, 200.0],
        ),
        single(
            "Q04",
            "How much economic pressure do you feel from clothing expenses?",
            vec![
                choice("A", "Very low, almost no pressure"),
                choice("B", "Moderate, some pressure but manageable"),
                choice("C", "High, requires careful spending"),
                choice("D", "Very high, affects spending in other areas"),
            ],
        ),
        bracket(
            "Q05",
            "housing",
            "What is your average monthly housing expenditure? (Including rent, mortgage, property fees, maintenance, etc.) (Unit: CNY)",
            [200.0, 500.0, 800.0, 1200.0],
        ),
        single(
            "Q06",
            "What percentage of your monthly income is spent on housing? (Including rent, mortgage, property fees, maintenance, etc.)",
            vec![
                choice("A", "Below 10%"),
                choice("B", "10%-20%"),
                choice("C", "21%-30%"),
                choice("D", "31%-40%"),
                choice("E", "Above 40%"),
            ],
        ),
        bracket(
            "Q07",
            "daily_services",
            "What is your average monthly expenditure on daily necessities (personal care, household items, cleaning supplies, etc.) and services (housekeeping, repairs, beauty, pet services, etc.)? (Unit: CNY)",
            [80.0, 120.0, 160.0, 200.0],
        ),
        bracket(
            "Q08",
            "transport_communication",
            "What is your average monthly expenditure on transportation (public transport, taxis, fuel, parking, etc.) and communication (mobile and internet fees)? (Unit: CNY)",
            [200.0, 300.0, 400.0, 500.0],
        ),
        bracket(
            "Q09",
            "education_entertainment",
            "What is your average monthly expenditure on education (tuition, training, books, etc.) and cultural entertainment (movies, performances, games, fitness, cultural activities, etc.)? (Unit: CNY)",
            [100.0, 200.0, 300.0, 400.0],
        ),
        single(
            "Q10",
            "Can you easily afford your current education, cultural, and entertainment expenses?",
            vec![
                choice("A", "Yes, spending does not affect other areas"),
                choice("B", "Barely, needs some control"),
                choice("C", "Not really, affects other expenditures"),
                choice("D", "No, it creates significant financial pressure"),
            ],
        ),
        bracket(
            "Q11",
            "healthcare",
            "What is your average monthly expenditure on healthcare (medications, medical services, health management, etc.)? (Unit: CNY)",
            [100.0, 200.0, 300.0, 400.0],
        ),
        single(
            "Q12",
            "Have you purchased private medical or health insurance for yourself or your family?",
            vec![
                choice("A", "Yes"),
                choice("B", "Not yet, but planning to"),
                choice("C", "No, and no plans to"),
            ],
        ),
        bracket(
            "Q13",
            "others",
            "Besides food, clothing, housing, daily necessities and services, transportation, education, culture, and healthcare, what is your average monthly expenditure on other areas (e.g., hobbies, charitable donations, investment, etc.)? (Unit: CNY)",
            [30.0, 60.0, 90.0, 120.0],
        ),
        single(
            "Q14",
            "How would you evaluate the impact of your current consumption level on your household (or personal) financial situation?",
            vec![
                choice("A", "Comfortable, can moderately increase spending"),
                choice("B", "Average, can maintain current spending"),
                choice("C", "Tight, need to control or reduce spending"),
                choice("D", "Very tight, affects quality of life"),
            ],
        ),
        single(
            "Q15",
            "Do you feel that your consumption pressure is too high relative to your income level?",
            vec![choice("A", "Yes"), choice("B", "No"), choice("C", "Not sure")],
        ),
        Question {
            id: "Q16".into(),
            text: "If your income increases, which consumption areas would you most like to expand or improve? (Multiple choices allowed)".into(),
            dimension: None,
            answer_kind: AnswerKind::MultiChoice,
            options: vec![
                choice("A", "Food and alcohol"),
                choice("B", "Clothing"),
                choice("C", "Housing"),
                choice("D", "Daily necessities and services"),
                choice("E", "Transportation and communication"),
                choice("F", "Education, culture, and entertainment"),
                choice("G", "Healthcare"),
                choice("H", "Other goods and services"),
            ],
        },
        single(
            "Q17",
            "What is your consumption expectation for the next six months to a year?",
            vec![
                choice("A", "Will continue to increase"),
                choice("B", "Will remain roughly the same"),
                choice("C", "Will moderately decrease"),
                choice("D", "Uncertain"),
            ],
        ),
    ];
    let dimension_map = BTreeMap::from(
        [
            ("food", "Q01"),
            ("clothing", "Q03"),
            ("housing", "Q05"),
            ("daily_services", "Q07"),
            ("transport_communication", "Q08"),
            ("education_entertainment", "Q09"),
            ("healthcare", "Q11"),
            ("others", "Q13"),
        ]
        .map(|(d, q)| (d.to_string(), vec![q.to_string()])),
    );
    Questionnaire {
        id: "spending-v1".into(),
        language: "EN".into(),
        notes: None,
        questions,
        dimension_map,
    }
}
