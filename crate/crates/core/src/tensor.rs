//! Complex measurement tensor H(f, phi_TX, phi_RX).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex tensor over (subcarrier, TX beam, RX beam).
///
/// Storage is frequency-fastest, then TX, then RX:
/// `index(f, tx, rx) = (rx * n_tx + tx) * n_freq + f`. Each direction
/// pair's frequency response is therefore a contiguous slice, which is
/// also the on-disk payload order of the archive format.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    n_freq: usize,
    n_tx: usize,
    n_rx: usize,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    /// All-zero tensor with the given dimensions.
    pub fn zeros(n_freq: usize, n_tx: usize, n_rx: usize) -> Self {
        Self { n_freq, n_tx, n_rx, data: vec![Complex64::new(0.0, 0.0); n_freq * n_tx * n_rx] }
    }

    /// Wrap an existing buffer. The element count must equal the product
    /// of the dimensions and every value must be finite.
    pub fn from_data(n_freq: usize, n_tx: usize, n_rx: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_freq * n_tx * n_rx {
            return Err(Error::Config(format!(
                "tensor data length {} does not match dims {}x{}x{}",
                data.len(),
                n_freq,
                n_tx,
                n_rx
            )));
        }
        if !data.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Config("tensor contains non-finite values".into()));
        }
        Ok(Self { n_freq, n_tx, n_rx, data })
    }

    pub fn n_freq(&self) -> usize {
        self.n_freq
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    #[inline]
    pub fn index(&self, f: usize, tx: usize, rx: usize) -> usize {
        debug_assert!(f < self.n_freq && tx < self.n_tx && rx < self.n_rx);
        (rx * self.n_tx + tx) * self.n_freq + f
    }

    #[inline]
    pub fn get(&self, f: usize, tx: usize, rx: usize) -> Complex64 {
        self.data[self.index(f, tx, rx)]
    }

    #[inline]
    pub fn set(&mut self, f: usize, tx: usize, rx: usize, value: Complex64) {
        let i = self.index(f, tx, rx);
        self.data[i] = value;
    }

    /// Frequency response of one direction pair as a contiguous slice.
    pub fn pair(&self, tx: usize, rx: usize) -> &[Complex64] {
        let base = (rx * self.n_tx + tx) * self.n_freq;
        &self.data[base..base + self.n_freq]
    }

    /// Mutable frequency response of one direction pair.
    pub fn pair_mut(&mut self, tx: usize, rx: usize) -> &mut [Complex64] {
        let base = (rx * self.n_tx + tx) * self.n_freq;
        &mut self.data[base..base + self.n_freq]
    }

    /// Raw storage in (rx, tx, f) row-major order (frequency fastest).
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Total received power summed over all samples.
    pub fn total_power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}
