use clap::ValueEnum;
use sca_core::{Alphabet, SpaceTime};

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Style {
    Text,
    Pgm,
}

/// Text: one line per time step. PGM: binary P5, one pixel per cell, state `i`
/// drawn at level `255·i / max(|Q|−1, 1)` (the first state is black).
pub fn render_diagram(d: &SpaceTime, states: &Alphabet, style: Style) -> Vec<u8> {
    match style {
        Style::Text => {
            let mut out = String::new();
            for row in &d.rows {
                out.push_str(&states.format_word(&row.period));
                out.push('\n');
            }
            out.into_bytes()
        }
        Style::Pgm => {
            let width = d.rows.first().map_or(0, |r| r.period.len());
            let top = states.len().saturating_sub(1).max(1);
            let mut out = format!("P5\n{} {}\n255\n", width, d.rows.len()).into_bytes();
            for row in &d.rows {
                out.extend(row.period.iter().map(|&s| (255 * s / top) as u8));
            }
            out
        }
    }
}
