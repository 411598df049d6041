//! Experiment configuration: enums, validation and the flat `key=value` file format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Bad arguments or configuration. Maps to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn canonical(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('-', "_")
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UsageError;

            fn from_str(s: &str) -> Result<Self, UsageError> {
                let key = canonical(s);
                $name::ALL.iter().copied().find(|v| v.as_str() == key).ok_or_else(|| {
                    let names: Vec<&str> = $name::ALL.iter().map(|v| v.as_str()).collect();
                    usage(format!("unknown {} `{s}` (expected one of {})", stringify!($name), names.join(", ")))
                })
            }
        }
    };
}

keyword_enum!(
    /// Problem solved at every level.
    Study {
        Poisson0Primal => "poisson0_primal",
        Poisson0Dual => "poisson0_dual",
        Poisson1 => "poisson1",
        NsPoiseuille => "ns_poiseuille",
        NsShearCurved => "ns_shear_curved",
    }
);

keyword_enum!(
    /// Mesh family used for a refinement sequence.
    MeshGroup {
        Delaunay => "delaunay",
        Nd1 => "nd1",
        Nd5 => "nd5",
        Nd15 => "nd15",
        Subdivided => "subdivided",
        Curved => "curved",
    }
);

keyword_enum!(
    CondnumMode {
        Off => "off",
        Dense => "dense",
        Estimate => "estimate",
    }
);

impl MeshGroup {
    /// Target non-Delaunay edge ratio of the distorted groups.
    pub fn distortion_ratio(self) -> Option<f64> {
        match self {
            MeshGroup::Nd1 => Some(0.01),
            MeshGroup::Nd5 => Some(0.05),
            MeshGroup::Nd15 => Some(0.15),
            _ => None,
        }
    }

    /// The four groups of planar convergence sweeps.
    pub const PLANAR: [MeshGroup; 4] = [MeshGroup::Delaunay, MeshGroup::Nd1, MeshGroup::Nd5, MeshGroup::Nd15];
}

pub const MIN_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub mesh_group: MeshGroup,
    pub levels: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub condnum_mode: CondnumMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            study: Study::Poisson0Primal,
            mesh_group: MeshGroup::Delaunay,
            levels: 5,
            seed: 7,
            output_dir: PathBuf::from("runs"),
            condnum_mode: CondnumMode::Off,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), UsageError> {
        if !(MIN_LEVELS..=MAX_LEVELS).contains(&self.levels) {
            return Err(usage(format!("levels must lie in [{MIN_LEVELS}, {MAX_LEVELS}], got {}", self.levels)));
        }
        let curved_study = self.study == Study::NsShearCurved;
        let curved_group = self.mesh_group == MeshGroup::Curved;
        if curved_study != curved_group {
            return Err(usage("the curved group and the ns_shear_curved study only go together"));
        }
        Ok(())
    }

    /// Apply `key=value` settings on top of the current values.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<(), UsageError> {
        for (key, value) in settings {
            match canonical(key).as_str() {
                "study" => self.study = value.parse()?,
                "mesh_group" | "group" => self.mesh_group = value.parse()?,
                "levels" => self.levels = parse_number(key, value)?,
                "seed" => self.seed = parse_number(key, value)?,
                "output_dir" | "out" => self.output_dir = PathBuf::from(value.trim()),
                "condnum_mode" | "condnum" => self.condnum_mode = value.parse()?,
                _ => return Err(usage(format!("unknown config key `{key}`"))),
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "study={}\nmesh_group={}\nlevels={}\nseed={}\noutput_dir={}\ncondnum_mode={}\n",
            self.study,
            self.mesh_group,
            self.levels,
            self.seed,
            self.output_dir.display(),
            self.condnum_mode
        )
    }
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value.trim().parse().map_err(|_| usage(format!("`{key}` expects an integer, got `{value}`")))
}

/// Parse flat `key=value` text. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_kv(&text)
}
