//! Bundled experiment specs.

pub const PRESETS: &[(&str, &str)] = &[
    ("pe-symmetric", include_str!("../presets/pe-symmetric.toml")),
    (
        "pe-asymmetric",
        include_str!("../presets/pe-asymmetric.toml"),
    ),
    (
        "see-symmetric",
        include_str!("../presets/see-symmetric.toml"),
    ),
    (
        "see-asymmetric",
        include_str!("../presets/see-asymmetric.toml"),
    ),
    ("aoi", include_str!("../presets/aoi.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// First comment line of a preset.
pub fn description(text: &str) -> &str {
    text.lines()
        .find_map(|l| l.strip_prefix('#'))
        .map(str::trim)
        .unwrap_or("")
}
