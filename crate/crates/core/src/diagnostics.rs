//! Counters for estimates discarded along a pipeline.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Order chosen by the first (or only) model-order selection.
    pub selected_order: Option<usize>,
    /// Singular values of the first Hankel matrix, descending.
    pub singular_values: Vec<f64>,
    /// Poles at the origin (infinite damping).
    pub dropped_origin: usize,
    /// Poles outside the unit disk beyond tolerance.
    pub dropped_unstable: usize,
    /// Modes damped past the usable ceiling.
    pub dropped_dead: usize,
    /// Negative-frequency halves of conjugate pairs of a real signal.
    pub dropped_conjugate: usize,
    /// Repeated (omega, alpha) pairs.
    pub dropped_duplicate: usize,
    /// Modes outside the owning band or merge region.
    pub dropped_out_of_band: usize,
    pub bands: Vec<BandReport>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn absorb(&mut self, other: Diagnostics) {
        if self.selected_order.is_none() {
            self.selected_order = other.selected_order;
        }
        if self.singular_values.is_empty() {
            self.singular_values = other.singular_values;
        }
        self.dropped_origin += other.dropped_origin;
        self.dropped_unstable += other.dropped_unstable;
        self.dropped_dead += other.dropped_dead;
        self.dropped_conjugate += other.dropped_conjugate;
        self.dropped_duplicate += other.dropped_duplicate;
        self.dropped_out_of_band += other.dropped_out_of_band;
        self.bands.extend(other.bands);
        self.notes.extend(other.notes);
    }

    pub fn total_dropped(&self) -> usize {
        self.dropped_origin
            + self.dropped_unstable
            + self.dropped_dead
            + self.dropped_duplicate
            + self.dropped_out_of_band
    }
}

/// Per-band outcome of a subband estimate or optimization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BandReport {
    pub index: usize,
    pub center_hz: f64,
    /// Mode budget in effect for the final pass.
    pub budget: usize,
    pub selected_order: usize,
    pub kept: usize,
    pub discarded: usize,
    pub error: Option<String>,
}
