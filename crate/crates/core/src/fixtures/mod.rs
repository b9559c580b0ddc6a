//! Deterministic synthetic fixtures: a labeled user pool, three survey
//! instruments, ready-to-run scenario configs, and ground truths generated
//! by closing the loop with the rule oracle.
//!
//! Everything derives from [`FIXTURE_SEED`], so [`write_all`] emits a
//! byte-identical tree on every call. Checked-in fixture files can therefore
//! be compared against regeneration, and evaluating an oracle run of a
//! fixture scenario against its shipped truth scores perfectly by
//! construction.

mod instruments;
mod pool;
mod scenarios;

pub use instruments::{economic_instrument, election_instrument, news_instrument};
pub use pool::{
    bot_pool_records, bot_user_ids, fixture_pool_records, fixture_schema, BOT_POOL_SIZE,
    POOL_SIZE,
};
pub use scenarios::write_all;

/// Master seed every fixture derives from.
pub const FIXTURE_SEED: u64 = 42;
