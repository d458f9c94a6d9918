//! Zero-shot prompts: task instruction, rendered inputs, setting sentence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::grid::RenderPalette;
use crate::nav::{NavQaRecord, NavTask};
use crate::tiling::TilingQaRecord;

pub const NAV_TEMPLATE_VERSION: &str = "nav-v1-reconstructed";
pub const TILING_TEMPLATE_VERSION: &str = "tiling-v1-reconstructed";

const VOT: &str = "Visualize the state after each reasoning step.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptSetting {
    Cot,
    NoViz,
    Vot,
    VotAscii,
}

impl PromptSetting {
    pub const ALL: [PromptSetting; 4] = [
        PromptSetting::Cot,
        PromptSetting::NoViz,
        PromptSetting::Vot,
        PromptSetting::VotAscii,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptSetting::Cot => "cot",
            PromptSetting::NoViz => "noviz",
            PromptSetting::Vot => "vot",
            PromptSetting::VotAscii => "vot_ascii",
        }
    }

    /// Row label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            PromptSetting::Cot => "CoT",
            PromptSetting::NoViz => "w/o Viz",
            PromptSetting::Vot => "VoT",
            PromptSetting::VotAscii => "VoT (ascii-art)",
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            PromptSetting::Cot => "Let's think step by step.",
            PromptSetting::NoViz => "Don't use visualization. Let's think step by step.",
            PromptSetting::Vot => VOT,
            PromptSetting::VotAscii => {
                "Visualize the state after each reasoning step. Use ascii-art to visualize."
            }
        }
    }

    pub fn visualizes(self) -> bool {
        matches!(self, PromptSetting::Vot | PromptSetting::VotAscii)
    }
}

impl fmt::Display for PromptSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_lowercase().replace('-', "_");
        PromptSetting::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown prompt setting `{s}` (expected cot, noviz, vot, vot_ascii)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

fn nav_instruction(p: &RenderPalette) -> String {
    format!(
        "Navigation Task: You are given a map drawn as a grid of squares. {s} is the starting point, {d} is the destination, \
{r} is a road square you can walk on and {o} is an obstacle you cannot pass. \
You can move up, down, left or right. Each move follows the road in that direction until the road turns or ends, \
or until you arrive at the destination. A move into an obstacle or off the map is not allowed.",
        s = p.start,
        d = p.dest,
        r = p.road,
        o = p.obstacle
    )
}

fn nav_inputs(r: &NavQaRecord) -> String {
    let mut s = format!("Map:\n{}\n\n", r.map_text);
    match r.task {
        NavTask::RoutePlanning => s.push_str(
            "Question: Plan a route from the starting point to the destination. Answer with the sequence of moves, for example \"up, right\".",
        ),
        NavTask::NextStep => {
            let taken: Vec<&str> = r.given_instructions.iter().map(|d| d.name()).collect();
            s.push_str(&format!(
                "Starting from the starting point, you moved {}. Question: What is the next move to reach the destination? Answer with one of up, down, left, right.",
                taken.join(", then ")
            ));
        }
    }
    s
}

fn tiling_instruction(p: &RenderPalette) -> String {
    format!(
        "Polyomino Tiling Task: A 5 by 4 rectangle is filled with five tetrominoes: two I, two T and one L. \
Some pieces have been removed and their squares are shown as {b}. Each remaining piece is drawn with its own symbol \
({i} for I, {t} for T, {l} for L). Pieces cannot overlap and must fill the empty squares exactly. \
Rotated and reflected variants of a piece are allowed.",
        b = p.blank,
        i = p.pieces[0],
        t = p.pieces[1],
        l = p.pieces[2]
    )
}

fn tiling_inputs(r: &TilingQaRecord) -> String {
    let masked: Vec<&str> = r.masked_pieces.iter().map(|m| m.name()).collect();
    format!(
        "Rectangle:\n{}\n\nRemoved pieces: {}.\n\nOption 1:\n{}\n\nOption 2:\n{}\n\nQuestion: Which variant of the {} tetromino fits into the empty squares so that the remaining pieces can also be placed? Answer with Option 1 or Option 2.",
        r.rect_text,
        masked.join(", "),
        r.offered_variant_texts[0],
        r.offered_variant_texts[1],
        r.query_piece
    )
}

/// Task instruction plus rendered inputs, shared by every setting.
pub fn task_body(instance: &Instance) -> Result<String> {
    Ok(match instance {
        Instance::Nav(r) => format!("{}\n\n{}", nav_instruction(&r.palette()?), nav_inputs(r)),
        Instance::Tiling(r) => format!(
            "{}\n\n{}",
            tiling_instruction(&r.palette()?),
            tiling_inputs(r)
        ),
        Instance::NlNav(r) => r.prompt_text.clone(),
        Instance::Ring(r) => r.prompt_text.clone(),
    })
}

/// Template version stamped on each run record.
pub fn template_version(instance: &Instance) -> &str {
    match instance {
        Instance::Nav(_) => NAV_TEMPLATE_VERSION,
        Instance::Tiling(_) => TILING_TEMPLATE_VERSION,
        Instance::NlNav(r) => &r.template_version,
        Instance::Ring(r) => &r.template_version,
    }
}

/// One user message; no demonstrations.
pub fn build_prompt(instance: &Instance, setting: PromptSetting) -> Result<Vec<Message>> {
    let content = format!("{}\n\n{}", task_body(instance)?, setting.suffix());
    Ok(vec![Message {
        role: "user".into(),
        content,
    }])
}
