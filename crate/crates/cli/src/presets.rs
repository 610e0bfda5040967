//! Config files shipped with the binary.

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../presets/", $name, ".toml")))),*]
    };
}

/// The experiment matrix: 2-DOF with 3 or 4 wires, 3-DOF with 4 to 6 wires, each with
/// two and three points per wire.
pub const EXPERIMENTS: &[(&str, &str)] = presets![
    "2dof_m3_n2",
    "2dof_m3_n3",
    "2dof_m4_n2",
    "2dof_m4_n3",
    "3dof_m4_n2",
    "3dof_m4_n3",
    "3dof_m5_n2",
    "3dof_m5_n3",
    "3dof_m6_n2",
    "3dof_m6_n3",
];

pub const SMOKE: (&str, &str) = ("smoke", include_str!("../presets/smoke.toml"));

pub fn get(name: &str) -> Option<&'static str> {
    EXPERIMENTS
        .iter()
        .chain(std::iter::once(&SMOKE))
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}

pub fn names() -> Vec<&'static str> {
    EXPERIMENTS.iter().chain(std::iter::once(&SMOKE)).map(|(n, _)| *n).collect()
}
