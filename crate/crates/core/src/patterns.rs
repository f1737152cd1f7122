//! The 3x6 skin patch: geometry, pattern acquisition from force frames,
//! the triangle dataset, corruption, LED rendering and the ASCII pattern
//! file format.
//!
//! Cells are indexed column-major: cell `c` sits in column `c / rows` and
//! row `c % rows`.

use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Number of normal-force sensors per skin cell.
pub const SENSORS_PER_CELL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkinGeometry {
    pub rows: usize,
    pub cols: usize,
}

impl SkinGeometry {
    /// The 18-cell patch used throughout: 3 rows by 6 columns.
    pub const STANDARD: SkinGeometry = SkinGeometry { rows: 3, cols: 6 };

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn column_of(&self, cell: usize) -> usize {
        cell / self.rows
    }

    pub fn row_of(&self, cell: usize) -> usize {
        cell % self.rows
    }

    pub fn cell_at(&self, row: usize, col: usize) -> usize {
        col * self.rows + row
    }
}

impl Default for SkinGeometry {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Hyperparameters of the acquisition and display loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionConfig {
    /// Force threshold above which a cell counts as touched (`MAX_FORCE`).
    pub force_threshold: f64,
    /// Minimum number of active cells for a round to be accepted (`MIN_NUMBER_OF_CELLS`).
    pub min_cells: usize,
    /// Number of frames combined into one round (`COMBINE_ITER`).
    pub combine_iter: usize,
    /// Number of display steps for an output pattern (`DISPLAY_DURATION`).
    pub display_duration: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            force_threshold: 0.012,
            min_cells: 2,
            combine_iter: 5,
            display_duration: 3,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.force_threshold) {
            return Err(Error::Config(format!(
                "force threshold {} outside [0, 1]",
                self.force_threshold
            )));
        }
        if self.min_cells == 0 || self.combine_iter == 0 || self.display_duration == 0 {
            return Err(Error::Config(
                "min_cells, combine_iter and display_duration must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One 250 ms sample of the three normal-force sensors of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceFrame {
    readings: Vec<[f64; SENSORS_PER_CELL]>,
    pub step_index: usize,
}

impl ForceFrame {
    pub fn new(readings: Vec<[f64; SENSORS_PER_CELL]>, step_index: usize) -> Result<Self> {
        if let Some((cell, _)) = readings
            .iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|x| !(0.0..=1.0).contains(x)))
        {
            return Err(Error::invalid(format!("force reading of cell {cell} outside [0, 1]")));
        }
        Ok(Self { readings, step_index })
    }

    pub fn zeros(cells: usize, step_index: usize) -> Self {
        Self {
            readings: vec![[0.0; SENSORS_PER_CELL]; cells],
            step_index,
        }
    }

    pub fn readings(&self) -> &[[f64; SENSORS_PER_CELL]] {
        &self.readings
    }

    pub fn cell_count(&self) -> usize {
        self.readings.len()
    }

    /// Largest of the three sensor values of `cell`.
    pub fn peak(&self, cell: usize) -> f64 {
        self.readings[cell].iter().copied().fold(0.0, f64::max)
    }
}

/// Binary activation of every skin cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TactilePattern {
    cells: Vec<bool>,
}

impl TactilePattern {
    pub fn new(cells: Vec<bool>) -> Self {
        Self { cells }
    }

    pub fn blank(len: usize) -> Self {
        Self {
            cells: vec![false; len],
        }
    }

    pub fn from_active(len: usize, active: &[usize]) -> Result<Self> {
        let mut cells = vec![false; len];
        for &c in active {
            if c >= len {
                return Err(Error::invalid(format!("cell {c} out of range for length {len}")));
            }
            cells[c] = true;
        }
        Ok(Self { cells })
    }

    /// Builds a pattern from 0/1 values; anything else is rejected.
    pub fn from_binary(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&x| {
                if x == 0.0 {
                    Ok(false)
                } else if x == 1.0 {
                    Ok(true)
                } else {
                    Err(Error::invalid(format!("non-binary unit value {x}")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn is_on(&self, cell: usize) -> bool {
        self.cells[cell]
    }

    pub fn active_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn active_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then_some(i))
            .collect()
    }

    pub fn is_subset_of(&self, other: &TactilePattern) -> bool {
        self.len() == other.len() && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }

    /// Renders the pattern as `rows` lines of `'0'`/`'1'`.
    pub fn to_grid(&self, geometry: SkinGeometry, on: char, off: char) -> String {
        let mut out = String::with_capacity(geometry.cell_count() + geometry.rows);
        for r in 0..geometry.rows {
            if r > 0 {
                out.push('\n');
            }
            for k in 0..geometry.cols {
                out.push(if self.cells[geometry.cell_at(r, k)] { on } else { off });
            }
        }
        out
    }
}

impl fmt::Display for TactilePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() == SkinGeometry::STANDARD.cell_count() {
            f.write_str(&self.to_grid(SkinGeometry::STANDARD, '1', '0'))
        } else {
            for &c in &self.cells {
                f.write_str(if c { "1" } else { "0" })?;
            }
            Ok(())
        }
    }
}

/// Ordered training patterns, each with at least `min_cells` active cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    patterns: Vec<TactilePattern>,
}

impl Dataset {
    pub fn new(patterns: Vec<TactilePattern>, min_cells: usize) -> Result<Self> {
        if let Some(first) = patterns.first() {
            if patterns.iter().any(|p| p.len() != first.len()) {
                return Err(Error::invalid("dataset patterns differ in length"));
            }
        }
        if let Some(i) = patterns.iter().position(|p| p.active_count() < min_cells) {
            return Err(Error::invalid(format!(
                "pattern {i} has fewer than {min_cells} active cells"
            )));
        }
        Ok(Self { patterns })
    }

    pub fn patterns(&self) -> &[TactilePattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern_len(&self) -> Option<usize> {
        self.patterns.first().map(TactilePattern::len)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TactilePattern> {
        self.patterns.iter()
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a TactilePattern;
    type IntoIter = std::slice::Iter<'a, TactilePattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

/// Cell triples of the three training triangles on the standard patch.
pub const TRIANGLE_CELLS: [[usize; 3]; 3] = [[0, 1, 2], [6, 7, 8], [12, 13, 14]];

/// The three disjoint triangle patterns.
pub fn make_triangle_dataset(geometry: SkinGeometry) -> Dataset {
    assert_eq!(
        geometry,
        SkinGeometry::STANDARD,
        "triangle dataset is defined for the 3x6 patch"
    );
    let patterns = TRIANGLE_CELLS
        .iter()
        .map(|cells| TactilePattern::from_active(geometry.cell_count(), cells).unwrap())
        .collect();
    Dataset { patterns }
}

/// Combines one round of frames into a pattern. `Ok(None)` means the round
/// was rejected for having fewer than `min_cells` active cells.
pub fn acquire_pattern(frames: &[ForceFrame], config: &AcquisitionConfig) -> Result<Option<TactilePattern>> {
    if frames.len() != config.combine_iter {
        return Err(Error::invalid(format!(
            "expected {} frames per round, got {}",
            config.combine_iter,
            frames.len()
        )));
    }
    let cells = frames[0].cell_count();
    if frames.iter().any(|f| f.cell_count() != cells) {
        return Err(Error::invalid("frames in a round differ in cell count"));
    }
    let pattern = TactilePattern::new(
        (0..cells)
            .map(|c| frames.iter().any(|f| f.peak(c) > config.force_threshold))
            .collect(),
    );
    Ok((pattern.active_count() >= config.min_cells).then_some(pattern))
}

/// Switches off `k` distinct active cells chosen uniformly at random.
pub fn corrupt<R: Rng + ?Sized>(p: &TactilePattern, k: usize, rng: &mut R) -> Result<TactilePattern> {
    let active = p.active_cells();
    if k > active.len() {
        return Err(Error::invalid(format!(
            "cannot switch off {k} cells of a pattern with {} active",
            active.len()
        )));
    }
    let mut out = p.clone();
    for i in index::sample(rng, active.len(), k) {
        out.cells[active[i]] = false;
    }
    Ok(out)
}

/// All-zero input on the standard patch.
pub fn blank() -> TactilePattern {
    TactilePattern::blank(SkinGeometry::STANDARD.cell_count())
}

/// LED frames for displaying `p`: `'B'` (blue) for on cells and `'G'`
/// (green) for off cells, repeated for the display duration.
pub fn render_led_frames(p: &TactilePattern, config: &AcquisitionConfig) -> Vec<String> {
    let frame = p.to_grid(SkinGeometry::STANDARD, 'B', 'G');
    vec![frame; config.display_duration]
}

/// Synthetic force frames for one round in which the cells of `touch` are
/// pressed. Off cells read uniform noise below half the threshold; pressed
/// cells read the threshold plus 0.001 to 0.05 on one randomly chosen sensor
/// in every frame.
pub fn simulate_round<R: Rng + ?Sized>(
    touch: &TactilePattern,
    config: &AcquisitionConfig,
    first_step: usize,
    noise: bool,
    rng: &mut R,
) -> Vec<ForceFrame> {
    let theta = config.force_threshold;
    (0..config.combine_iter)
        .map(|s| {
            let readings = touch
                .cells()
                .iter()
                .map(|&on| {
                    let mut r = [0.0; SENSORS_PER_CELL];
                    if noise {
                        for x in r.iter_mut() {
                            *x = rng.random_range(0.0..theta / 2.0);
                        }
                    }
                    if on {
                        let sensor = rng.random_range(0..SENSORS_PER_CELL);
                        let extra = if noise { rng.random_range(0.001..0.05) } else { 0.02 };
                        r[sensor] = (theta + extra).min(1.0);
                    }
                    r
                })
                .collect();
            ForceFrame {
                readings,
                step_index: first_step + s,
            }
        })
        .collect()
}

/// Serializes patterns as 3x6 blocks of `'0'`/`'1'` separated by blank lines.
pub fn format_patterns(patterns: &[TactilePattern]) -> String {
    let mut out = String::new();
    for (i, p) in patterns.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&p.to_grid(SkinGeometry::STANDARD, '1', '0'));
    }
    out.push('\n');
    out
}

/// Parses the block format written by [`format_patterns`].
pub fn parse_patterns(text: &str) -> Result<Vec<TactilePattern>> {
    let geometry = SkinGeometry::STANDARD;
    let mut patterns = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();

    let mut flush = |block: &mut Vec<(usize, &str)>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        if block.len() != geometry.rows {
            return Err(Error::parse(
                block[0].0,
                format!("pattern block has {} lines, expected {}", block.len(), geometry.rows),
            ));
        }
        let mut cells = vec![false; geometry.cell_count()];
        for (r, &(line_no, line)) in block.iter().enumerate() {
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != geometry.cols {
                return Err(Error::parse(
                    line_no,
                    format!("expected {} characters, got {}", geometry.cols, chars.len()),
                ));
            }
            for (k, ch) in chars.into_iter().enumerate() {
                cells[geometry.cell_at(r, k)] = match ch {
                    '0' => false,
                    '1' => true,
                    other => return Err(Error::parse(line_no, format!("unexpected character {other:?}"))),
                };
            }
        }
        patterns.push(TactilePattern::new(cells));
        block.clear();
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            flush(&mut block)?;
        } else {
            block.push((i + 1, line));
        }
    }
    flush(&mut block)?;
    Ok(patterns)
}

pub fn read_patterns(path: &Path) -> Result<Vec<TactilePattern>> {
    parse_patterns(&std::fs::read_to_string(path)?)
}

pub fn write_patterns(path: &Path, patterns: &[TactilePattern]) -> Result<()> {
    std::fs::write(path, format_patterns(patterns))?;
    Ok(())
}

/// Loads a dataset file, enforcing the minimum active-cell count.
pub fn read_dataset(path: &Path, min_cells: usize) -> Result<Dataset> {
    Dataset::new(read_patterns(path)?, min_cells)
}
