//! 7×7 heatmaps of per-target values as SVG, CSV matrices, or terminal text.
//!
//! Values are supplied in target order (`values[n - 1]` for target `n`);
//! `None` marks a flagged cell, drawn hatched and left out of the colour
//! scale.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{GridSpec, TargetId, GRID_SIDE, TARGET_COUNT};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatmapError {
    #[error("expected 49 cell values, got {0}")]
    WrongCellCount(usize),
    #[error("every cell is flagged; nothing to scale")]
    AllCellsFlagged,
    #[error("invalid colour scale {0:?}; use `auto` or `fixed:<lo>,<hi>` with lo < hi")]
    InvalidScale(String),
    #[error("malformed CSV matrix: {0}")]
    MalformedMatrix(String),
}

pub fn target_to_cell(n: TargetId, grid: &GridSpec) -> (u8, u8) {
    grid.cell_of(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ColorScale {
    /// Min to max of the unflagged values.
    #[default]
    Auto,
    Fixed {
        lo: f64,
        hi: f64,
    },
}

impl FromStr for ColorScale {
    type Err = HeatmapError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HeatmapError::InvalidScale(s.to_string());
        let t = s.trim();
        if t.eq_ignore_ascii_case("auto") {
            return Ok(ColorScale::Auto);
        }
        let rest = t.strip_prefix("fixed:").ok_or_else(bad)?;
        let (lo, hi) = rest.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(bad());
        }
        Ok(ColorScale::Fixed { lo, hi })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapOptions {
    pub title: Option<String>,
    pub scale: ColorScale,
    pub cell_px: u32,
    /// Decimal places in cell annotations and legend.
    pub decimals: usize,
    /// ANSI true-colour backgrounds in terminal output.
    pub ansi: bool,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        HeatmapOptions { title: None, scale: ColorScale::Auto, cell_px: 64, decimals: 2, ansi: false }
    }
}

/// Light-to-dark single-hue ramp (white to deep blue).
const RAMP_LO: [f64; 3] = [247.0, 251.0, 255.0];
const RAMP_HI: [f64; 3] = [8.0, 48.0, 107.0];

pub fn ramp_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [0, 1, 2].map(|i| (RAMP_LO[i] + (RAMP_HI[i] - RAMP_LO[i]) * t).round() as u8)
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

struct Scaled {
    values: Vec<Option<f64>>,
    lo: f64,
    hi: f64,
}

impl Scaled {
    fn new<T: Scalar>(values: &[Option<T>], scale: ColorScale) -> Result<Self, HeatmapError> {
        if values.len() != TARGET_COUNT {
            return Err(HeatmapError::WrongCellCount(values.len()));
        }
        let values: Vec<Option<f64>> = values.iter().map(|v| v.map(Scalar::as_f64).filter(|x| x.is_finite())).collect();
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        if present.is_empty() {
            return Err(HeatmapError::AllCellsFlagged);
        }
        let (lo, hi) = match scale {
            ColorScale::Auto => (
                present.iter().copied().fold(f64::INFINITY, f64::min),
                present.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            ColorScale::Fixed { lo, hi } => (lo, hi),
        };
        Ok(Scaled { values, lo, hi })
    }

    /// Position on the ramp; a constant map sits at the dark end.
    fn t(&self, v: f64) -> f64 {
        if self.hi > self.lo {
            ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
        } else {
            1.0
        }
    }

    fn cell(&self, grid: &GridSpec, row: u8, col: u8) -> (TargetId, Option<f64>) {
        let t = grid.target_at(row, col).expect("grid is bijective");
        (t, self.values[t.slot()])
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG 1.1 document with one `<rect>` per cell carrying `data-target` and
/// `data-value` attributes.
pub fn render_svg<T: Scalar>(
    values: &[Option<T>],
    grid: &GridSpec,
    opts: &HeatmapOptions,
) -> Result<String, HeatmapError> {
    let sc = Scaled::new(values, opts.scale)?;
    let c = opts.cell_px.max(16) as f64;
    let side = GRID_SIDE as f64;
    let margin = 20.0;
    let title_h = if opts.title.is_some() { 30.0 } else { 0.0 };
    let legend_w = 90.0;
    let width = margin * 2.0 + side * c + legend_w;
    let height = margin * 2.0 + title_h + side * c;
    let top = margin + title_h;
    let p = opts.decimals;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    s.push_str("<defs>\n");
    s.push_str("<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\"><rect width=\"8\" height=\"8\" fill=\"#ffffff\"/><path d=\"M0,8 L8,0 M-2,2 L2,-2 M6,10 L10,6\" stroke=\"#808080\" stroke-width=\"1.5\"/></pattern>\n");
    let _ = writeln!(
        s,
        "<linearGradient id=\"legend-ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\"><stop offset=\"0\" stop-color=\"{}\"/><stop offset=\"1\" stop-color=\"{}\"/></linearGradient>",
        hex(ramp_color(0.0)),
        hex(ramp_color(1.0))
    );
    s.push_str("</defs>\n");
    if let Some(title) = &opts.title {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
            margin + side * c / 2.0,
            margin + 16.0,
            xml_escape(title)
        );
    }

    s.push_str("<g class=\"cells\" font-family=\"sans-serif\" text-anchor=\"middle\">\n");
    for row in 1..=GRID_SIDE {
        for col in 1..=GRID_SIDE {
            let (target, v) = sc.cell(grid, row, col);
            let x = margin + (col - 1) as f64 * c;
            let y = top + (row - 1) as f64 * c;
            let (fill, label, text_color, data) = match v {
                Some(v) => {
                    let t = sc.t(v);
                    let color = if t > 0.55 { "#ffffff" } else { "#000000" };
                    (hex(ramp_color(t)), format!("{v:.p$}"), color, format!("{v}"))
                }
                None => ("url(#hatch)".to_string(), "n/a".to_string(), "#000000", "flagged".to_string()),
            };
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{c}\" height=\"{c}\" fill=\"{fill}\" stroke=\"#404040\" stroke-width=\"0.5\" data-target=\"{target}\" data-value=\"{data}\"/>"
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"{text_color}\">{target}</text>",
                x + c / 2.0,
                y + c * 0.35,
                (c * 0.18).round()
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"{text_color}\">{label}</text>",
                x + c / 2.0,
                y + c * 0.7,
                (c * 0.22).round()
            );
        }
    }
    s.push_str("</g>\n");

    let lx = margin + side * c + 20.0;
    let lh = side * c;
    s.push_str("<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n");
    if sc.hi > sc.lo {
        let _ = writeln!(s, "<rect x=\"{lx}\" y=\"{top}\" width=\"18\" height=\"{lh}\" fill=\"url(#legend-ramp)\" stroke=\"#404040\" stroke-width=\"0.5\"/>");
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" class=\"legend-hi\">{:.p$}</text>", lx + 22.0, top + 10.0, sc.hi);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" class=\"legend-lo\">{:.p$}</text>", lx + 22.0, top + lh, sc.lo);
    } else {
        let _ = writeln!(
            s,
            "<rect x=\"{lx}\" y=\"{top}\" width=\"18\" height=\"18\" fill=\"{}\" stroke=\"#404040\" stroke-width=\"0.5\"/>",
            hex(ramp_color(1.0))
        );
        let _ =
            writeln!(s, "<text x=\"{}\" y=\"{}\" class=\"legend-single\">{:.p$}</text>", lx + 22.0, top + 14.0, sc.hi);
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Formats to six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

/// A 7×7 comma-separated matrix in grid layout; flagged cells are `NA`.
pub fn render_csv<T: Scalar>(values: &[Option<T>], grid: &GridSpec) -> Result<String, HeatmapError> {
    if values.len() != TARGET_COUNT {
        return Err(HeatmapError::WrongCellCount(values.len()));
    }
    let mut s = String::new();
    for row in 1..=GRID_SIDE {
        let line: Vec<String> = (1..=GRID_SIDE)
            .map(|col| {
                let t = grid.target_at(row, col).expect("grid is bijective");
                values[t.slot()].map_or_else(|| "NA".to_string(), |v| format_sig6(v.as_f64()))
            })
            .collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    Ok(s)
}

/// Inverse of [`render_csv`]: values back in target order.
pub fn parse_csv_matrix(text: &str, grid: &GridSpec) -> Result<Vec<Option<f64>>, HeatmapError> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != GRID_SIDE as usize {
        return Err(HeatmapError::MalformedMatrix(format!("{} rows", rows.len())));
    }
    let mut out = vec![None; TARGET_COUNT];
    for (r, line) in rows.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != GRID_SIDE as usize {
            return Err(HeatmapError::MalformedMatrix(format!("row {} has {} cells", r + 1, cells.len())));
        }
        for (c, cell) in cells.iter().enumerate() {
            let t = grid.target_at(r as u8 + 1, c as u8 + 1).expect("grid is bijective");
            let cell = cell.trim();
            out[t.slot()] = if cell == "NA" {
                None
            } else {
                Some(cell.parse().map_err(|_| HeatmapError::MalformedMatrix(format!("bad value {cell:?}")))?)
            };
        }
    }
    Ok(out)
}

const SHADES: [char; 5] = [' ', '░', '▒', '▓', '█'];

/// Aligned text grid: a shade glyph plus the value per cell.
pub fn render_text<T: Scalar>(
    values: &[Option<T>],
    grid: &GridSpec,
    opts: &HeatmapOptions,
) -> Result<String, HeatmapError> {
    let sc = Scaled::new(values, opts.scale)?;
    let p = opts.decimals;
    let labels: Vec<String> =
        sc.values.iter().map(|v| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.p$}"))).collect();
    let w = labels.iter().map(|l| l.chars().count()).max().unwrap_or(3);
    let mut s = String::new();
    if let Some(title) = &opts.title {
        let _ = writeln!(s, "{title}");
    }
    for row in 1..=GRID_SIDE {
        for col in 1..=GRID_SIDE {
            let (target, v) = sc.cell(grid, row, col);
            let label = &labels[target.slot()];
            let (glyph, rgb) = match v {
                Some(v) => {
                    let t = sc.t(v);
                    (SHADES[(t * 4.0).round() as usize], Some(ramp_color(t)))
                }
                None => ('/', None),
            };
            if col > 1 {
                s.push(' ');
            }
            match (opts.ansi, rgb) {
                (true, Some([r, g, b])) => {
                    let fg = if sc.t(v.unwrap_or(0.0)) > 0.55 { "97" } else { "30" };
                    let _ = write!(s, "\x1b[48;2;{r};{g};{b}m\x1b[{fg}m{glyph}{label:>w$}\x1b[0m");
                }
                _ => {
                    let _ = write!(s, "{glyph}{label:>w$}");
                }
            }
        }
        s.push('\n');
    }
    let _ = writeln!(s, "scale: {:.p$} .. {:.p$}", sc.lo, sc.hi);
    Ok(s)
}
