//! Sampled spectra, CSV export and peak picking.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::CpMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Abscissa in Hz.
    Doppler,
    /// Abscissa in seconds.
    Delay,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Doppler => "doppler",
            Axis::Delay => "delay",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "doppler" => Ok(Axis::Doppler),
            "delay" => Ok(Axis::Delay),
            other => Err(Error::InvalidParameter(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub kind: Axis,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Option<CpMethod>,
}

impl Spectrum {
    pub fn new(kind: Axis, axis: Vec<f64>, values: Vec<f64>, method: Option<CpMethod>) -> Result<Self> {
        if axis.is_empty() {
            return Err(Error::EmptyInput("spectrum"));
        }
        if axis.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} axis points, {} values",
                axis.len(),
                values.len()
            )));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("spectrum axis must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("spectrum values must be finite and non-negative".into()));
        }
        Ok(Self {
            kind,
            axis,
            values,
            method,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["axis", "value"])?;
        for (a, v) in self.axis.iter().zip(&self.values) {
            w.write_record([a.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read back an `axis,value` file written by [`Spectrum::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>, kind: Axis, method: Option<CpMethod>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["axis", "value"] {
            return Err(Error::InvalidParameter(format!("unexpected spectrum header {headers:?}")));
        }
        let (mut axis, mut values) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad spectrum row {rec:?}")))
            };
            axis.push(parse(0)?);
            values.push(parse(1)?);
        }
        Self::new(kind, axis, values, method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub position: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    /// Descending by height.
    pub peaks: Vec<Peak>,
    /// Fewer than the requested number of maxima were found.
    pub shortfall: bool,
}

impl PeakList {
    pub fn positions(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.position).collect()
    }
}

/// Indices of local maxima. A run of equal values counts once, at its lowest
/// index, when it is strictly above both neighbouring samples; the ends of
/// the sequence only need to beat their single neighbour.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] < values[i];
        let right_ok = j + 1 == n || values[j + 1] < values[i];
        if left_ok && right_ok && !(i == 0 && j + 1 == n && n > 1) {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

/// The `p` largest local maxima of `spec`.
pub fn find_peaks(spec: &Spectrum, p: usize) -> Result<PeakList> {
    find_peaks_above(spec, p, None)
}

/// As [`find_peaks`], ignoring maxima more than `floor_db` below the global
/// maximum.
pub fn find_peaks_above(spec: &Spectrum, p: usize, floor_db: Option<f64>) -> Result<PeakList> {
    if spec.is_empty() {
        return Err(Error::EmptyInput("spectrum"));
    }
    if p == 0 {
        return Err(Error::ZeroDimension("requested peak count"));
    }
    let threshold = floor_db.map(|db| spec.max_value() * 10f64.powf(-db.abs() / 10.0));
    let mut peaks: Vec<Peak> = local_maxima(&spec.values)
        .into_iter()
        .map(|i| Peak {
            index: i,
            position: spec.axis[i],
            height: spec.values[i],
        })
        .filter(|pk| threshold.is_none_or(|t| pk.height >= t))
        .collect();
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));
    let shortfall = peaks.len() < p;
    peaks.truncate(p);
    Ok(PeakList { peaks, shortfall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(values: &[f64]) -> Spectrum {
        let axis = (0..values.len()).map(|i| i as f64 * 10.0).collect();
        Spectrum::new(Axis::Doppler, axis, values.to_vec(), None).unwrap()
    }

    #[test]
    fn single_maximum() {
        let pk = find_peaks(&spec(&[0.0, 1.0, 4.0, 2.0]), 1).unwrap();
        assert_eq!(pk.positions(), vec![20.0]);
        assert!(!pk.shortfall);
    }

    #[test]
    fn bimodal() {
        let pk = find_peaks(&spec(&[1.0, 3.0, 1.0, 5.0, 1.0]), 2).unwrap();
        assert_eq!(pk.peaks.iter().map(|p| p.index).collect::<Vec<_>>(), vec![3, 1]);
    }

    #[test]
    fn merged_peak_flags_shortfall() {
        let pk = find_peaks(&spec(&[0.0, 1.0, 3.0, 4.0, 3.0, 1.0, 0.0]), 2).unwrap();
        assert_eq!(pk.peaks.len(), 1);
        assert!(pk.shortfall);
    }

    #[test]
    fn plateau_takes_lowest_index() {
        assert_eq!(local_maxima(&[1.0, 3.0, 3.0, 3.0, 1.0]), vec![1]);
        assert_eq!(local_maxima(&[1.0, 3.0, 3.0, 4.0]), vec![3]);
        assert!(local_maxima(&[2.0, 2.0, 2.0]).is_empty());
    }

    #[test]
    fn edges_and_single_bin() {
        assert_eq!(local_maxima(&[5.0, 1.0, 2.0]), vec![0, 2]);
        assert_eq!(local_maxima(&[7.0]), vec![0]);
    }

    #[test]
    fn floor_discards_sidelobes() {
        let s = spec(&[0.0, 100.0, 0.0, 5.0, 0.0]);
        assert_eq!(find_peaks(&s, 2).unwrap().peaks.len(), 2);
        let f = find_peaks_above(&s, 2, Some(10.0)).unwrap();
        assert_eq!(f.peaks.len(), 1);
        assert!(f.shortfall);
    }

    #[test]
    fn invalid_spectra_rejected() {
        assert!(Spectrum::new(Axis::Delay, vec![], vec![], None).is_err());
        assert!(Spectrum::new(Axis::Delay, vec![1.0, 1.0], vec![0.0, 0.0], None).is_err());
        assert!(Spectrum::new(Axis::Delay, vec![1.0, 2.0], vec![-1.0, 0.0], None).is_err());
        assert!(find_peaks(&spec(&[1.0]), 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = Spectrum::new(
            Axis::Doppler,
            vec![-1.5e4, 0.1, 1.0 / 3.0],
            vec![1e-300, 2.0 / 7.0, 123456.789],
            Some(CpMethod::Exact),
        )
        .unwrap();
        s.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("axis,value\n"));
        let back = Spectrum::read_csv(&path, Axis::Doppler, Some(CpMethod::Exact)).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn peaks_are_local_maxima(values in proptest::collection::vec(0.0f64..10.0, 1..64), p in 1usize..5) {
            let s = spec(&values);
            let pk = find_peaks(&s, p).unwrap();
            prop_assert!(pk.peaks.len() <= p);
            for w in pk.peaks.windows(2) {
                prop_assert!(w[0].height >= w[1].height);
            }
            for peak in &pk.peaks {
                let i = peak.index;
                if i > 0 { prop_assert!(values[i - 1] < values[i]); }
                if i + 1 < values.len() { prop_assert!(values[i + 1] <= values[i]); }
            }
        }
    }
}
