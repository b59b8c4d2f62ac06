use alloc::vec::Vec;

use crate::Matrix;

/// Which transform produced a [`TfRepresentation`].
///
/// The discriminants are the kind tags used in the on-disk feature format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum TfKind {
    LinearStft = 0,
    Mel = 1,
    Cqt = 2,
    Cwt = 3,
    Mfcc = 4,
}

impl TfKind {
    pub const ALL: [TfKind; 5] = [
        TfKind::LinearStft,
        TfKind::Mel,
        TfKind::Cqt,
        TfKind::Cwt,
        TfKind::Mfcc,
    ];

    pub fn tag(self) -> u32 {
        self as u32
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Preset name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            TfKind::LinearStft => "linear-stft",
            TfKind::Mel => "mel-stft",
            TfKind::Cqt => "cqt",
            TfKind::Cwt => "cwt",
            TfKind::Mfcc => "mfcc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// A frequency x time matrix with axis metadata.
///
/// Rows are ordered from low to high frequency. For every kind except
/// [`TfKind::Mfcc`] the values are nonnegative powers; MFCC rows are cepstral
/// coefficients and `bin_frequencies` then holds the coefficient indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TfRepresentation {
    pub values: Matrix,
    pub bin_frequencies: Vec<f64>,
    pub frame_times: Vec<f64>,
    pub kind: TfKind,
}

impl TfRepresentation {
    pub fn n_bins(&self) -> usize {
        self.values.rows()
    }

    pub fn n_frames(&self) -> usize {
        self.values.cols()
    }

    /// Per-frame argmax over the frequency axis.
    pub fn frame_argmax(&self) -> Vec<usize> {
        (0..self.n_frames())
            .map(|c| self.values.argmax_in_column(c))
            .collect()
    }
}
