// mdbook cannot run listings that depend on workspace crates, so each
// chapter is compiled as a module doc and `cargo test` runs its listings.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/fields-and-tensors.md")]
pub mod fields_and_tensors {}
#[doc = include_str!("src/group-action.md")]
pub mod group_action {}
#[doc = include_str!("src/rank-strata.md")]
pub mod rank_strata {}
#[doc = include_str!("src/classification.md")]
pub mod classification {}
#[doc = include_str!("src/binary-forms.md")]
pub mod binary_forms {}
#[doc = include_str!("src/reports-and-audits.md")]
pub mod reports_and_audits {}
#[doc = include_str!("src/command-line.md")]
pub mod command_line {}
