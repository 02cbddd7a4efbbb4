//! Seeded Monte Carlo campaigns: configuration, parallel execution over
//! samples, persisted outputs, shard merging and comparison with reference
//! tables.

mod compare;
mod config;
mod run;

pub use compare::{
    compare_to_reference, parse_probabilities, read_probabilities, reference_table, AtomDifference,
    DiscrepancyReport, Tolerances, REFERENCE_ALPHA0, REFERENCE_ALPHA1,
};
pub use config::{Mode, Precision, RunConfig};
pub use run::{
    compute_campaign, kacrice_sample, merge_shards, plane_sample_forest, plane_sample_grid, run_campaign,
    sphere_sample_forest, sphere_sample_grid, summarize, write_atomic, CampaignResult, ConstructSummary,
    RunManifest, SampleSeed, Summary, Timing, ACCUMULATOR_FILE, CONFIG_FILE, CONSTRUCT_FILE, KACRICE_FILE,
    MANIFEST_FILE, MU_GAMMA_FILE, MU_X_FILE, SUMMARY_FILE,
};
