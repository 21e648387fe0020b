//! Figure scenarios with the caption parameters bound exactly.
//!
//! Axis extents are not given by the captions: intensities run over
//! `[0, 5]` with 26 points and rates over `[0.05, 3]` with 30 points.

use std::fmt;
use std::str::FromStr;

use cavity_discord::model::ModelParams;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{Axis, AxisVar, Mode, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig6,
}

pub fn intensity_axis(name: AxisVar) -> Axis {
    Axis::new(name, 0.0, 5.0, 26)
}

pub fn rate_axis(name: AxisVar) -> Axis {
    Axis::new(name, 0.05, 3.0, 30)
}

impl Preset {
    pub const ALL: [Preset; 11] = [
        Preset::Fig2,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
        Preset::Fig3d,
        Preset::Fig4,
        Preset::Fig5a,
        Preset::Fig5b,
        Preset::Fig5c,
        Preset::Fig5d,
        Preset::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig3d => "fig3d",
            Preset::Fig4 => "fig4",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig5c => "fig5c",
            Preset::Fig5d => "fig5d",
            Preset::Fig6 => "fig6",
        }
    }

    /// The column the figure panel plots.
    pub fn quantity(self) -> &'static str {
        match self {
            Preset::Fig3b | Preset::Fig3d | Preset::Fig5b | Preset::Fig5d => "concurrence",
            _ => "discord",
        }
    }

    pub fn config(self) -> ScenarioConfig {
        use AxisVar::*;
        let (mode, params, axes) = match self {
            Preset::Fig2 => (Mode::Evolve, ModelParams::new(0.1, 1.5, 0.0, 0.0), vec![intensity_axis(NT)]),
            Preset::Fig3a | Preset::Fig3b => (
                Mode::Sweep,
                ModelParams::new(0.1, 0.0, 0.0, 0.0),
                vec![intensity_axis(NT), rate_axis(Kappa)],
            ),
            Preset::Fig3c | Preset::Fig3d => (
                Mode::Sweep,
                ModelParams::new(0.0, 2.0, 0.0, 0.0),
                vec![intensity_axis(NT), rate_axis(Gamma)],
            ),
            Preset::Fig4 => (Mode::Evolve, ModelParams::new(0.2, 0.1, 0.0, 0.0), vec![intensity_axis(MT)]),
            Preset::Fig5a | Preset::Fig5b => (
                Mode::Sweep,
                ModelParams::new(0.1, 0.0, 0.0, 0.0),
                vec![intensity_axis(MT), rate_axis(Kappa)],
            ),
            Preset::Fig5c | Preset::Fig5d => (
                Mode::Sweep,
                ModelParams::new(0.0, 0.1, 0.0, 0.0),
                vec![intensity_axis(MT), rate_axis(Gamma)],
            ),
            Preset::Fig6 => (Mode::Evolve, ModelParams::new(0.1, 1.0, 0.0, 0.0), vec![intensity_axis(Noise)]),
        };
        let mut cfg = ScenarioConfig::new(mode);
        cfg.preset = Some(self);
        cfg.params = params;
        cfg.axes = axes;
        cfg
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset {s:?}; expected one of {}", names.join(", "))
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Preset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Preset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
