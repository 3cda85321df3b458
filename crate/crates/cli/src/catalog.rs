//! Embedded preset catalog. Every preset is a complete config file shipped
//! under `presets/` at the repository root and compiled into the binary, so
//! `run <name>` works from any directory and the shipped files stay the
//! single source of truth.

pub struct PresetEntry {
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub summary: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, [$($tag:literal),*], $summary:literal) => {
        PresetEntry {
            name: $name,
            tags: &[$($tag),*],
            summary: $summary,
            text: include_str!(concat!("../../../presets/", $name, ".cfg")),
        }
    };
}

pub const PRESETS: &[PresetEntry] = &[
    preset!(
        "kernel_ring_L2_N1",
        ["ring", "kernel"],
        "kernel diagnostics, uniform 2-ring, one particle"
    ),
    preset!(
        "kernel_ring_L4_N1",
        ["ring", "kernel"],
        "kernel diagnostics, uniform 4-ring, one particle"
    ),
    preset!(
        "kernel_ring_L8_N1",
        ["ring", "kernel"],
        "kernel diagnostics, uniform 8-ring, one particle"
    ),
    preset!(
        "kernel_ring_L16_N1",
        ["ring", "kernel"],
        "kernel diagnostics, uniform 16-ring, one particle"
    ),
    preset!(
        "kernel_ring_L32_N1",
        ["ring", "kernel"],
        "kernel diagnostics, uniform 32-ring, one particle"
    ),
    preset!(
        "kernel_ring_L4_N2",
        ["ring", "kernel", "degenerate"],
        "equal-weights ensemble kernel, half-filled 4-ring"
    ),
    preset!(
        "kernel_ring_L6_N2",
        ["ring", "kernel", "degenerate"],
        "equal-weights ensemble kernel, 6-ring at N=2"
    ),
    preset!(
        "kernel_chain_L4_N1_biased",
        ["chain", "kernel", "biased"],
        "kernel diagnostics, ramped 4-chain, one particle"
    ),
    preset!(
        "kernel_chain_L4_N2_biased",
        ["chain", "kernel", "biased"],
        "kernel diagnostics, ramped 4-chain, two particles"
    ),
    preset!(
        "kernel_chain_L6_N1_biased",
        ["chain", "kernel", "biased"],
        "kernel diagnostics, ramped 6-chain, one particle"
    ),
    preset!(
        "kernel_chain_L6_N2_biased",
        ["chain", "kernel", "biased"],
        "kernel diagnostics, ramped 6-chain, two particles"
    ),
    preset!(
        "cancellation_4ring",
        ["ring", "degenerate", "cancellation"],
        "equal-weights cancellation statistics, half-filled 4-ring"
    ),
    preset!(
        "cancellation_6ring",
        ["ring", "degenerate", "cancellation"],
        "cancellation statistics where unequal weights stay visible"
    ),
    preset!(
        "remainder_4ring_N1",
        ["ring", "response"],
        "first-order remainder scan, non-degenerate 4-ring"
    ),
    preset!(
        "remainder_6ring_N2",
        ["ring", "response", "degenerate"],
        "first-order remainder scan, degenerate 6-ring ensemble"
    ),
    preset!(
        "roundtrip_inversion",
        ["ring", "inversion"],
        "potential recovery from its own ground density"
    ),
    preset!(
        "zero_density_chain",
        ["chain", "inversion", "probe"],
        "representability probe of a density with exact-zero sites"
    ),
    preset!(
        "conditioning_family",
        ["ring", "conditioning"],
        "kernel condition ratios along growing uniform rings"
    ),
    preset!(
        "lieb_identity_4ring",
        ["ring", "interacting", "lieb"],
        "dual identity and xc decomposition on random draws"
    ),
];

pub fn find(name: &str) -> Option<&'static PresetEntry> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Catalog filtered by name substring and/or exact tag; no filters lists
/// everything.
pub fn filtered(query: Option<&str>, tag: Option<&str>) -> Vec<&'static PresetEntry> {
    PRESETS
        .iter()
        .filter(|p| query.is_none_or(|q| p.name.contains(q)))
        .filter(|p| tag.is_none_or(|t| p.tags.contains(&t)))
        .collect()
}

pub fn render_listing(entries: &[&PresetEntry]) -> String {
    let width = entries.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for p in entries {
        out.push_str(&format!(
            "{:width$}  [{}]  {}\n",
            p.name,
            p.tags.join(", "),
            p.summary
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn every_preset_parses_and_matches_its_file_name() {
        for p in PRESETS {
            let cfg = ExperimentConfig::parse(p.text)
                .unwrap_or_else(|e| panic!("preset {} does not parse: {e}", p.name));
            assert_eq!(cfg.name, p.name, "name mismatch in preset {}", p.name);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }

    #[test]
    fn filters_cut_the_catalog_down() {
        assert_eq!(filtered(None, None).len(), PRESETS.len());
        let by_name = filtered(Some("cancellation"), None);
        assert_eq!(by_name.len(), 2);
        let by_tag = filtered(None, Some("conditioning"));
        assert_eq!(by_tag.len(), 1);
        assert_eq!(by_tag[0].name, "conditioning_family");
        let both = filtered(Some("6ring"), Some("degenerate"));
        assert!(both.iter().all(|p| p.name.contains("6ring")));
        assert!(filtered(Some("no_such"), None).is_empty());
    }
}
