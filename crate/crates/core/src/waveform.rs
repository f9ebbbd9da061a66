//! Payload grids, NR frame modulation/demodulation and the radar data matrix.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat};
use crate::numerology::Numerology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    /// Unit average power. Its symbols are not unit modulus, so dividing them
    /// out scales the noise per resource element (the noise is no longer
    /// white across the grid).
    Qam16,
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            "qam16" | "16qam" => Ok(Constellation::Qam16),
            other => Err(Error::InvalidParameter(format!("unknown constellation {other:?}"))),
        }
    }
}

impl Constellation {
    fn draw(self, rng: &mut impl Rng) -> c64 {
        match self {
            Constellation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let re = if rng.random::<bool>() { s } else { -s };
                let im = if rng.random::<bool>() { s } else { -s };
                c64::new(re, im)
            }
            Constellation::Qam16 => {
                const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
                let scale = 1.0 / 10f64.sqrt();
                let re = LEVELS[rng.random_range(0..4)] * scale;
                let im = LEVELS[rng.random_range(0..4)] * scale;
                c64::new(re, im)
            }
        }
    }
}

/// Communication payload `b[k, l]`: subcarriers along rows, symbols along columns.
#[derive(Debug, Clone)]
pub struct ResourceGrid {
    pub data: CMat,
    pub constellation: Constellation,
    pub seed: u64,
}

impl ResourceGrid {
    pub fn n_subcarriers(&self) -> usize {
        self.data.nrows()
    }
    pub fn n_symbols(&self) -> usize {
        self.data.ncols()
    }
}

pub fn generate_payload(seed: u64, k: usize, l: usize, constellation: Constellation) -> Result<ResourceGrid> {
    if k == 0 {
        return Err(Error::ZeroDimension("subcarrier count"));
    }
    if l == 0 {
        return Err(Error::ZeroDimension("symbol count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // column-major fill
    let mut data = CMat::zeros(k, l);
    for col in 0..l {
        for row in 0..k {
            data[(row, col)] = constellation.draw(&mut rng);
        }
    }
    Ok(ResourceGrid {
        data,
        constellation,
        seed,
    })
}

/// Baseband samples at rate `1 / T_C`.
#[derive(Debug, Clone, Default)]
pub struct SampleStream {
    pub samples: Vec<c64>,
}

impl SampleStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Dump as interleaved little-endian `f32` I/Q pairs.
    pub fn write_iq_f32le(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for s in &self.samples {
            w.write_all(&(s.re as f32).to_le_bytes()).map_err(|e| Error::io(path, e))?;
            w.write_all(&(s.im as f32).to_le_bytes()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn check_grid_fits(k: usize, l: usize, num: &Numerology) -> Result<()> {
    if k > num.n_sc() || l > num.n_symb() {
        return Err(Error::DimensionMismatch(format!(
            "{k}x{l} grid does not fit numerology {}x{}",
            num.n_sc(),
            num.n_symb()
        )));
    }
    if k as u64 > num.n_u() {
        return Err(Error::DimensionMismatch(format!(
            "{k} subcarriers exceed the {}-point symbol FFT",
            num.n_u()
        )));
    }
    Ok(())
}

/// OFDM-modulate the grid into consecutive CP-prefixed symbols.
///
/// Each body is `sum_k b[k, l] exp(j 2 pi k n / N_u)` (no `1/N_u` factor),
/// so subcarrier `k` sits at baseband frequency `k * delta_f`.
pub fn modulate_frame(grid: &ResourceGrid, num: &Numerology) -> Result<SampleStream> {
    let (k, l) = (grid.n_subcarriers(), grid.n_symbols());
    check_grid_fits(k, l, num)?;
    let n_u = num.n_u() as usize;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n_u);

    let total = num.start_sample(l)? as usize;
    let mut samples = Vec::with_capacity(total);
    let mut body = vec![c64::new(0.0, 0.0); n_u];
    for sym in 0..l {
        body.iter_mut().for_each(|x| *x = c64::new(0.0, 0.0));
        for sc in 0..k {
            body[sc] = grid.data[(sc, sym)];
        }
        ifft.process(&mut body);
        let cp = num.cp_length(sym)? as usize;
        samples.extend_from_slice(&body[n_u - cp..]);
        samples.extend_from_slice(&body);
    }
    debug_assert_eq!(samples.len(), total);
    Ok(SampleStream { samples })
}

/// Strip CPs and FFT each symbol, keeping the first `k` bins of the first
/// `l` symbols. Output is scaled so demodulation inverts [`modulate_frame`].
pub fn demodulate_frame(stream: &SampleStream, num: &Numerology, k: usize, l: usize) -> Result<CMat> {
    if k == 0 || l == 0 {
        return Err(Error::ZeroDimension("demodulated grid"));
    }
    check_grid_fits(k, l, num)?;
    let expected = num.start_sample(l)? as usize;
    if stream.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "stream has {} samples, {l} symbols need {expected}",
            stream.len()
        )));
    }
    let n_u = num.n_u() as usize;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_u);
    let scale = 1.0 / n_u as f64;
    let mut y = CMat::zeros(k, l);
    let mut buf = vec![c64::new(0.0, 0.0); n_u];
    for sym in 0..l {
        let start = (num.start_sample(sym)? + num.cp_length(sym)?) as usize;
        buf.copy_from_slice(&stream.samples[start..start + n_u]);
        fft.process(&mut buf);
        for sc in 0..k {
            y[(sc, sym)] = buf[sc] * scale;
        }
    }
    Ok(y)
}

/// `Y~` after dividing out the payload, together with the numerology that
/// fixes its timing.
#[derive(Debug, Clone)]
pub struct RadarDataMatrix {
    pub data: CMat,
    pub numerology: Numerology,
}

impl RadarDataMatrix {
    pub fn new(data: CMat, numerology: Numerology) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyInput("radar data matrix"));
        }
        check_grid_fits(data.nrows(), data.ncols(), &numerology)?;
        Ok(Self { data, numerology })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_finite(&self) -> bool {
        let d = &self.data;
        (0..d.ncols()).all(|j| (0..d.nrows()).all(|i| d[(i, j)].re.is_finite() && d[(i, j)].im.is_finite()))
    }

    pub fn scaled(&self, factor: c64) -> Self {
        let data = CMat::from_fn(self.data.nrows(), self.data.ncols(), |i, j| self.data[(i, j)] * factor);
        Self {
            data,
            numerology: self.numerology.clone(),
        }
    }
}

pub fn build_radar_matrix(y: &CMat, grid: &ResourceGrid, num: &Numerology) -> Result<RadarDataMatrix> {
    if y.nrows() != grid.n_subcarriers() || y.ncols() != grid.n_symbols() {
        return Err(Error::DimensionMismatch(format!(
            "Y is {}x{}, payload is {}x{}",
            y.nrows(),
            y.ncols(),
            grid.n_subcarriers(),
            grid.n_symbols()
        )));
    }
    let mut data = CMat::zeros(y.nrows(), y.ncols());
    for col in 0..y.ncols() {
        for row in 0..y.nrows() {
            let b = grid.data[(row, col)];
            if b.norm_sqr() == 0.0 {
                return Err(Error::ZeroDivisor { row, col });
            }
            data[(row, col)] = y[(row, col)] / b;
        }
    }
    RadarDataMatrix::new(data, num.clone())
}
