//! Synthetic user pools with planted, test-checkable structure.
//!
//! The main pool has exactly 1,000 fully labeled users with a 300/700
//! gender split and guaranteed coverage of every (gender, age, region,
//! ideology) combination, so profile matching over those attributes never
//! comes up empty. The bot pool has 100 users, ten of which repeat
//! themselves enough to trip the repetition filter at the 0.3 threshold.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::LogNormal;

use crate::pool::{AttributeKind, AttributeSchema, Platform, Post, UserRecord};
use crate::synthesis::rng::substream;

use super::FIXTURE_SEED;

/// Number of users in the main pool.
pub const POOL_SIZE: usize = 1000;

/// Number of users in the bot-cleaning pool.
pub const BOT_POOL_SIZE: usize = 100;

// Substream indices for pool generation, kept away from the small indices
// used by samplers so fixture randomness never aliases plan randomness.
const S_EDUCATION: u64 = 9001;
const S_CONSUMPTION: u64 = 9002;
const S_INCOME_BRACKET: u64 = 9003;
const S_RACE: u64 = 9004;
const S_PARTY: u64 = 9005;
const S_EMPLOYMENT: u64 = 9006;
const S_MARITAL: u64 = 9007;
const S_URBANICITY: u64 = 9008;
const S_HAS_CHILDREN: u64 = 9009;
const S_ACTIVITY: u64 = 9010;
const S_GENDER_TAIL: u64 = 9011;
const S_HOBBIES: u64 = 9012;
const S_INCOME: u64 = 9013;
const S_POSTS: u64 = 9014;
const S_AGE_TAIL: u64 = 9015;
const S_REGION_TAIL: u64 = 9016;
const S_IDEOLOGY_TAIL: u64 = 9017;
const S_BOT_LABELS: u64 = 9020;
const S_BOT_POSTS: u64 = 9021;

const GENDERS: [&str; 2] = ["female", "male"];
const AGES: [&str; 4] = ["18-29", "30-44", "45-64", "65+"];
const REGIONS: [&str; 10] =
    ["r01", "r02", "r03", "r04", "r05", "r06", "r07", "r08", "r09", "r10"];
const IDEOLOGIES: [&str; 3] = ["liberal", "moderate", "conservative"];
const EDUCATIONS: [&str; 3] = ["high_school", "college", "graduate"];
const CONSUMPTIONS: [&str; 3] = ["low", "medium", "high"];
const INCOME_BRACKETS: [&str; 3] = ["low", "middle", "high"];
const RACES: [&str; 5] = ["asian", "black", "hispanic", "white", "other"];
const PARTIES: [&str; 3] = ["party_a", "party_b", "unaffiliated"];
const HOBBIES: [&str; 4] = ["tech", "sports", "music", "art"];
const EMPLOYMENTS: [&str; 4] = ["employed", "student", "retired", "unemployed"];
const MARITALS: [&str; 3] = ["single", "married", "divorced"];
const URBANICITIES: [&str; 3] = ["urban", "suburban", "rural"];
const YES_NO: [&str; 2] = ["yes", "no"];
const ACTIVITIES: [&str; 3] = ["daily", "weekly", "monthly"];

/// Post texts for ordinary users. Each sentence keeps its vocabulary apart
/// from the others so any pair stays safely under the 0.3 repetition
/// threshold (a unit test checks every pair), and a user never gets the
/// same sentence twice.
const SENTENCES: [&str; 48] = [
    "Caught an early train into town and grabbed coffee before work.",
    "My tomato seedlings finally sprouted after two weeks under grow lamps.",
    "Finished that mystery novel everyone recommended; its ending genuinely surprised me.",
    "Weekend plans: repaint our fence, then cycle along some quiet lanes.",
    "Tried a new dumpling spot near the station, absolutely worth queueing.",
    "Our five-a-side team lost again, though the second half showed improvement.",
    "Rainy evening indoors sorting years of old photographs into albums.",
    "Landlord promised to fix this radiator before winter; still waiting.",
    "Learned three guitar chords today and my fingertips ache already.",
    "Neighborhood cleanup drew a huge crowd; the park looks fantastic now.",
    "Switched phone carriers at last, signal finally reaches my basement.",
    "Baked sourdough for the first time, crust came out shockingly good.",
    "Marathon training week four: knees complaining, spirit mostly intact.",
    "Found a vintage lamp at the flea market for almost nothing.",
    "Power went out during dinner so we played cards by candlelight.",
    "New documentary about deep-sea creatures completely changed how I see octopuses.",
    "Commute took ninety minutes because of roadworks on the bridge.",
    "Adopted a scruffy terrier from the shelter; he snores like an engine.",
    "Planted garlic and onions this morning before frost arrives next month.",
    "Local library extended evening hours, which honestly improves my whole week.",
    "Repaired grandma's sewing machine using a tutorial and borrowed screwdrivers.",
    "Farmers market peaches were ridiculous this Saturday, bought an entire crate.",
    "Finally beat that video game boss after thirty embarrassing attempts.",
    "Jazz trio at the corner bar played until midnight; worth every yawn today.",
    "Painted the spare bedroom a deep green; verdict pending from family.",
    "Volunteered at the food bank; shifts fill fast around holidays.",
    "Bus route changes mean I walk twelve extra minutes each way.",
    "Watched lightning roll across the valley from our balcony last night.",
    "Swapped winter tires early since forecasts keep mentioning black ice.",
    "Recipe experiment: miso butter noodles, verdict unanimous, making them again tomorrow.",
    "Studio upstairs rents cheap if anyone needs practice space for drums.",
    "Half the office caught colds, so meetings moved online this week.",
    "Refinished an oak dresser someone abandoned on the curb; looks brand new.",
    "Morning swim sessions resumed; pool water still feels arctic in April.",
    "Birdwatching haul: two herons, a kingfisher, and countless bold sparrows.",
    "Tax paperwork done early for once, celebrating with takeout tonight.",
    "Street festival shut traffic down but the dance floats were spectacular.",
    "Replaced my bike chain solo, only pinched one finger doing it.",
    "Night class on ceramics started; my first mug leans like a tower.",
    "Car inspection passed with nothing flagged, small miracles do happen.",
    "Heatwave broke at last; windows open, fans finally resting.",
    "Quiz night victory came down to a question about rivers.",
    "Sold my old camera lenses to fund a telescope upgrade.",
    "Apartment building elevator works again after three weeks of stairs.",
    "Foraged chanterelles with an experienced guide; dinner tasted like triumph.",
    "City council meeting ran long debating crosswalk signals on Ninth.",
    "Knitted mittens for everyone; wool everywhere, regrets nowhere.",
    "Espresso machine descaled, morning shots pull smooth once more.",
];

/// Repetitive promotional lines for planted bots; each bot posts the same
/// line three times with one rotating word, so overlap stays near 0.9.
const BOT_LINES: [&str; 5] = [
    "flash sale ends tonight follow my link for instant discounts",
    "win big prizes now click here and claim your reward",
    "crypto signals daily join the channel for guaranteed profit tips",
    "cheap followers fast boost your account today with our service",
    "limited stock designer bags order now direct message for prices",
];

fn cat(name: &str, values: &[&str], description: &str) -> AttributeSchema {
    AttributeSchema {
        name: name.to_string(),
        kind: AttributeKind::Categorical {
            values: values.iter().map(|v| v.to_string()).collect(),
        },
        description: description.to_string(),
    }
}

/// The shared attribute schema: fifteen categorical dimensions plus a
/// continuous monthly income.
pub fn fixture_schema() -> Vec<AttributeSchema> {
    vec![
        cat("gender", &GENDERS, "Self-reported gender."),
        cat("age", &AGES, "Age bracket."),
        cat("region", &REGIONS, "Home region code."),
        cat("education", &EDUCATIONS, "Highest completed education level."),
        cat("consumption", &CONSUMPTIONS, "Overall consumption level."),
        cat("income_bracket", &INCOME_BRACKETS, "Coarse income tier."),
        cat("race", &RACES, "Self-reported race or ethnicity."),
        cat("ideology", &IDEOLOGIES, "Political ideology."),
        cat("party", &PARTIES, "Party identification."),
        cat("hobbies", &HOBBIES, "Dominant hobby interest."),
        cat("employment", &EMPLOYMENTS, "Employment status."),
        cat("marital", &MARITALS, "Marital status."),
        cat("urbanicity", &URBANICITIES, "Settlement type of residence."),
        cat("has_children", &YES_NO, "Whether the user has children."),
        cat("platform_activity", &ACTIVITIES, "Posting frequency tier."),
        AttributeSchema {
            name: "income".to_string(),
            kind: AttributeKind::Continuous { unit: "CNY/month".to_string() },
            description: "Monthly income.".to_string(),
        },
    ]
}

/// One column of categorical values drawn independently per user.
fn random_column(stream: u64, values: &[&str], n: usize) -> Vec<String> {
    let mut rng = substream(FIXTURE_SEED, stream);
    (0..n).map(|_| values[rng.random_range(0..values.len())].to_string()).collect()
}

/// A column with exact per-value counts, shuffled into random positions.
fn exact_column(stream: u64, counts: &[(&str, usize)]) -> Vec<String> {
    let mut column: Vec<String> = counts
        .iter()
        .flat_map(|(value, count)| std::iter::repeat_n(value.to_string(), *count))
        .collect();
    let mut rng = substream(FIXTURE_SEED, stream);
    column.shuffle(&mut rng);
    column
}

fn posts_for_user(index: usize, rng: &mut impl Rng) -> Vec<Post> {
    let count = rng.random_range(1..=4);
    let picks = rand::seq::index::sample(rng, SENTENCES.len(), count);
    let born = Utc.with_ymd_and_hms(2025, 3, 1, 8, 0, 0).unwrap();
    picks
        .iter()
        .enumerate()
        .map(|(j, sentence)| Post {
            text: SENTENCES[sentence].to_string(),
            timestamp: Some(born + Duration::hours((index * 7 + j * 31) as i64 % 2003)),
            likes: Some(rng.random_range(0..500)),
            comments: Some(rng.random_range(0..40)),
            reposts: if rng.random_bool(0.5) { Some(rng.random_range(0..25)) } else { None },
        })
        .collect()
}

/// The 1,000-user main pool.
///
/// Users 0..240 enumerate every (gender, age, region, ideology) combination
/// once; the rest are drawn randomly with the gender tail balanced so the
/// whole pool lands on exactly 300 female / 700 male. Hobbies are planted
/// at exactly 250 users per value so subset queries have a stable size.
pub fn fixture_pool_records() -> Vec<UserRecord> {
    let n = POOL_SIZE;
    let planted = GENDERS.len() * AGES.len() * REGIONS.len() * IDEOLOGIES.len();

    // Planted head: full coverage of the election-attribute combinations.
    let mut gender = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    let mut region = Vec::with_capacity(n);
    let mut ideology = Vec::with_capacity(n);
    for g in GENDERS {
        for a in AGES {
            for r in REGIONS {
                for i in IDEOLOGIES {
                    gender.push(g.to_string());
                    age.push(a.to_string());
                    region.push(r.to_string());
                    ideology.push(i.to_string());
                }
            }
        }
    }
    debug_assert_eq!(gender.len(), planted);

    // Tail: the head holds 120 female / 120 male, so 180/580 more lands the
    // pool on exactly 300/700.
    gender.extend(exact_column(S_GENDER_TAIL, &[("female", 180), ("male", 580)]));
    age.extend(random_column(S_AGE_TAIL, &AGES, n - planted));
    region.extend(random_column(S_REGION_TAIL, &REGIONS, n - planted));
    ideology.extend(random_column(S_IDEOLOGY_TAIL, &IDEOLOGIES, n - planted));

    let education = random_column(S_EDUCATION, &EDUCATIONS, n);
    let consumption = random_column(S_CONSUMPTION, &CONSUMPTIONS, n);
    let income_bracket = random_column(S_INCOME_BRACKET, &INCOME_BRACKETS, n);
    let race = random_column(S_RACE, &RACES, n);
    let party = random_column(S_PARTY, &PARTIES, n);
    let employment = random_column(S_EMPLOYMENT, &EMPLOYMENTS, n);
    let marital = random_column(S_MARITAL, &MARITALS, n);
    let urbanicity = random_column(S_URBANICITY, &URBANICITIES, n);
    let has_children = random_column(S_HAS_CHILDREN, &YES_NO, n);
    let activity = random_column(S_ACTIVITY, &ACTIVITIES, n);
    let hobbies = exact_column(
        S_HOBBIES,
        &[("tech", 250), ("sports", 250), ("music", 250), ("art", 250)],
    );

    let mut income_rng = substream(FIXTURE_SEED, S_INCOME);
    let income_dist = LogNormal::new(9.0, 0.5).expect("valid lognormal");
    let mut post_rng = substream(FIXTURE_SEED, S_POSTS);

    (0..n)
        .map(|i| {
            let mut labels = BTreeMap::new();
            labels.insert("gender".to_string(), gender[i].clone());
            labels.insert("age".to_string(), age[i].clone());
            labels.insert("region".to_string(), region[i].clone());
            labels.insert("ideology".to_string(), ideology[i].clone());
            labels.insert("education".to_string(), education[i].clone());
            labels.insert("consumption".to_string(), consumption[i].clone());
            labels.insert("income_bracket".to_string(), income_bracket[i].clone());
            labels.insert("race".to_string(), race[i].clone());
            labels.insert("party".to_string(), party[i].clone());
            labels.insert("hobbies".to_string(), hobbies[i].clone());
            labels.insert("employment".to_string(), employment[i].clone());
            labels.insert("marital".to_string(), marital[i].clone());
            labels.insert("urbanicity".to_string(), urbanicity[i].clone());
            labels.insert("has_children".to_string(), has_children[i].clone());
            labels.insert("platform_activity".to_string(), activity[i].clone());
            labels.insert(
                "income".to_string(),
                format!("{:.2}", income_dist.sample(&mut income_rng)),
            );
            UserRecord {
                user_id: format!("user-{:04}", i + 1),
                platform: if i % 2 == 0 { Platform::X } else { Platform::Rednote },
                posts: posts_for_user(i, &mut post_rng),
                labels,
            }
        })
        .collect()
}

/// Indices (0-based) of the planted bots within the bot pool.
const BOT_SLOTS: [usize; 10] = [3, 11, 24, 37, 42, 55, 63, 78, 86, 95];

/// User ids of the ten planted bots in the bot pool.
pub fn bot_user_ids() -> Vec<String> {
    BOT_SLOTS.iter().map(|i| format!("user-b{:03}", i + 1)).collect()
}

/// The 100-user cleaning pool: ninety ordinary users plus ten bots whose
/// near-identical posts push their repetition ratio far above 0.3.
pub fn bot_pool_records() -> Vec<UserRecord> {
    let mut label_rng = substream(FIXTURE_SEED, S_BOT_LABELS);
    let mut post_rng = substream(FIXTURE_SEED, S_BOT_POSTS);
    let born = Utc.with_ymd_and_hms(2025, 4, 1, 12, 0, 0).unwrap();
    (0..BOT_POOL_SIZE)
        .map(|i| {
            let mut labels = BTreeMap::new();
            labels.insert(
                "gender".to_string(),
                GENDERS[label_rng.random_range(0..GENDERS.len())].to_string(),
            );
            labels.insert(
                "age".to_string(),
                AGES[label_rng.random_range(0..AGES.len())].to_string(),
            );
            let posts = if BOT_SLOTS.contains(&i) {
                let line = BOT_LINES[i % BOT_LINES.len()];
                (0..3)
                    .map(|j| Post {
                        text: format!("{line} {}", ["today", "friends", "everyone"][j]),
                        timestamp: Some(born + Duration::hours((i * 5 + j) as i64)),
                        likes: Some(0),
                        comments: Some(0),
                        reposts: None,
                    })
                    .collect()
            } else {
                posts_for_user(i, &mut post_rng)
            };
            UserRecord {
                user_id: format!("user-b{:03}", i + 1),
                platform: if i % 3 == 0 { Platform::Rednote } else { Platform::X },
                posts,
                labels,
            }
        })
        .collect()
}
