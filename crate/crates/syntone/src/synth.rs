//! Synthetic-tone dataset generation.
//!
//! The dataset is a full factorial grid over three generative factors:
//! waveform timbre (4 shapes), amplitude (20 levels), and frequency
//! (400 steps), giving 32,000 one-second clips at 16 kHz. Every clip is
//! a deterministic function of its factor tuple, so ground truth is
//! exact and regeneration is byte-identical.
//!
//! Oscillators are naive (not band-limited); square/saw/triangle alias
//! at high frequencies. That is intentional: the factors describe ideal
//! waveform shapes.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Audio sample rate in Hz.
pub const SAMPLE_RATE: u32 = 16_000;
/// Samples per clip (exactly one second).
pub const CLIP_LEN: usize = 16_000;
/// Number of amplitude levels.
pub const N_AMPS: usize = 20;
/// Number of frequency steps.
pub const N_FREQS: usize = 400;
/// Lowest frequency on the grid, Hz.
pub const FREQ_LO: f64 = 440.0;
/// Open upper end of the frequency grid, Hz (never reached).
pub const FREQ_HI: f64 = 8_000.0;

/// Waveform shape, the first generative factor.
///
/// The integer encoding (0..3, declaration order) is stable and used in
/// all file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Timbre {
    Sine,
    Triangle,
    Square,
    Sawtooth,
}

impl Timbre {
    pub const ALL: [Timbre; 4] = [Timbre::Sine, Timbre::Triangle, Timbre::Square, Timbre::Sawtooth];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("timbre index {i} not in 0..4")))
    }

    /// Lowercase variant name as used in file names and manifests.
    pub fn name(self) -> &'static str {
        match self {
            Timbre::Sine => "sine",
            Timbre::Triangle => "triangle",
            Timbre::Square => "square",
            Timbre::Sawtooth => "sawtooth",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Timbre::Sine),
            "triangle" => Ok(Timbre::Triangle),
            "square" => Ok(Timbre::Square),
            "sawtooth" => Ok(Timbre::Sawtooth),
            other => Err(Error::InvalidArgument(format!("unknown timbre `{other}`"))),
        }
    }
}

/// One point of the ground-truth generative grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorTuple {
    pub timbre: Timbre,
    pub amp_index: usize,
    pub freq_index: usize,
}

impl FactorTuple {
    pub fn new(timbre: Timbre, amp_index: usize, freq_index: usize) -> Result<Self> {
        if amp_index >= N_AMPS {
            return Err(Error::InvalidArgument(format!(
                "amp_index {amp_index} not in 0..{N_AMPS}"
            )));
        }
        if freq_index >= N_FREQS {
            return Err(Error::InvalidArgument(format!(
                "freq_index {freq_index} not in 0..{N_FREQS}"
            )));
        }
        Ok(Self { timbre, amp_index, freq_index })
    }

    /// Clip identifier, also the WAV file stem: `{timbre}_{amp:02}_{freq:03}`.
    pub fn id(&self) -> String {
        format!("{}_{:02}_{:03}", self.timbre.name(), self.amp_index, self.freq_index)
    }

    pub fn amplitude(&self) -> f64 {
        amplitude_of(self.amp_index).expect("amp_index validated on construction")
    }

    pub fn frequency_hz(&self) -> f64 {
        frequency_of(self.freq_index).expect("freq_index validated on construction")
    }
}

/// One-second mono waveform tied to its factor tuple.
#[derive(Debug, Clone)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub factors: FactorTuple,
}

/// Amplitude of level `amp_index`: `(i + 1) / 20`.
///
/// Level 0 maps to 0.05, level 19 to exactly 1.0. Exact silence is
/// excluded: at zero amplitude the timbre and frequency factors would be
/// unrecoverable from the signal.
pub fn amplitude_of(amp_index: usize) -> Result<f64> {
    if amp_index >= N_AMPS {
        return Err(Error::InvalidArgument(format!(
            "amp_index {amp_index} not in 0..{N_AMPS}"
        )));
    }
    Ok((amp_index as f64 + 1.0) / N_AMPS as f64)
}

/// Frequency of step `freq_index`: `440 + k * (8000 - 440) / 400` Hz.
///
/// The grid is linear and half-open; the top step is 7981.1 Hz. An
/// inclusive 8000 Hz endpoint would sit exactly at Nyquist, where a
/// phase-zero sine is identically zero.
pub fn frequency_of(freq_index: usize) -> Result<f64> {
    if freq_index >= N_FREQS {
        return Err(Error::InvalidArgument(format!(
            "freq_index {freq_index} not in 0..{N_FREQS}"
        )));
    }
    Ok(FREQ_LO + freq_index as f64 * (FREQ_HI - FREQ_LO) / N_FREQS as f64)
}

/// Synthesize the clip for one factor tuple.
///
/// All oscillators start at phase 0 and are evaluated per sample from
/// `phase = frac(f * n / sr)` in 64-bit floats:
///
/// * sine:     `a * sin(2*pi*phase)`
/// * square:   `+a` for phase in [0, 0.5], `-a` otherwise (sign(0) := +1)
/// * sawtooth: `a * (2*phase - 1)`
/// * triangle: `a * (2*|2*phase - 1| - 1)`
pub fn synth_waveform(factors: FactorTuple) -> AudioClip {
    let a = factors.amplitude();
    let f = factors.frequency_hz();
    let sr = SAMPLE_RATE as f64;
    let samples = (0..CLIP_LEN)
        .map(|n| {
            let t = f * n as f64 / sr;
            let phase = t - t.floor();
            match factors.timbre {
                Timbre::Sine => a * (std::f64::consts::TAU * phase).sin(),
                Timbre::Square => {
                    if phase <= 0.5 {
                        a
                    } else {
                        -a
                    }
                }
                Timbre::Sawtooth => a * (2.0 * phase - 1.0),
                Timbre::Triangle => a * (2.0 * (2.0 * phase - 1.0).abs() - 1.0),
            }
        })
        .collect();
    AudioClip { samples, sample_rate: SAMPLE_RATE, factors }
}

/// All 32,000 factor tuples in lexicographic (timbre, amp, freq) order.
pub fn factor_grid() -> Vec<FactorTuple> {
    let mut grid = Vec::with_capacity(Timbre::ALL.len() * N_AMPS * N_FREQS);
    for timbre in Timbre::ALL {
        for amp_index in 0..N_AMPS {
            for freq_index in 0..N_FREQS {
                grid.push(FactorTuple { timbre, amp_index, freq_index });
            }
        }
    }
    grid
}

/// Stride specification for desk-scale subsets of the factor grid.
///
/// `Subset::new(1, 4, 20)` keeps every timbre, every 4th amplitude level,
/// and every 20th frequency step: 4 * 5 * 20 = 400 tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subset {
    pub timbre_stride: usize,
    pub amp_stride: usize,
    pub freq_stride: usize,
}

impl Subset {
    pub const FULL: Subset = Subset { timbre_stride: 1, amp_stride: 1, freq_stride: 1 };

    pub fn new(timbre_stride: usize, amp_stride: usize, freq_stride: usize) -> Result<Self> {
        if timbre_stride == 0 || amp_stride == 0 || freq_stride == 0 {
            return Err(Error::InvalidArgument("subset strides must be >= 1".into()));
        }
        Ok(Self { timbre_stride, amp_stride, freq_stride })
    }

    /// Parse a `T,A,F` stride triple, e.g. `1,4,20`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "subset spec `{s}` must be three comma-separated strides, e.g. 1,4,20"
            )));
        }
        let parse = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad stride `{p}` in subset `{s}`")))
        };
        Subset::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    }

    pub fn contains(&self, t: &FactorTuple) -> bool {
        t.timbre.index() % self.timbre_stride == 0
            && t.amp_index % self.amp_stride == 0
            && t.freq_index % self.freq_stride == 0
    }

    /// Grid tuples surviving the stride, in lexicographic order.
    pub fn tuples(&self) -> Vec<FactorTuple> {
        factor_grid().into_iter().filter(|t| self.contains(t)).collect()
    }
}

/// One manifest row per generated clip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub timbre: String,
    pub amp_index: usize,
    pub amplitude: f64,
    pub freq_index: usize,
    pub frequency_hz: f64,
    pub path: String,
}

impl ManifestRow {
    pub fn factors(&self) -> Result<FactorTuple> {
        FactorTuple::new(Timbre::from_name(&self.timbre)?, self.amp_index, self.freq_index)
    }
}

/// Dataset manifest: the rows plus the directory they are rooted at.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    pub fn csv_path(root: &Path) -> PathBuf {
        root.join("manifest.csv")
    }

    /// Absolute path of the WAV for row `i`.
    pub fn wav_path(&self, row: &ManifestRow) -> PathBuf {
        self.root.join(&row.path)
    }

    pub fn save(&self) -> Result<()> {
        let mut w = csv::Writer::from_path(Self::csv_path(&self.root))?;
        for row in &self.rows {
            w.serialize(CsvRow::from(row))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = Self::csv_path(root);
        if !path.is_file() {
            return Err(Error::MissingArtifact { id: "manifest.csv".into(), path });
        }
        let mut rows = Vec::new();
        for rec in csv::Reader::from_path(&path)?.deserialize::<CsvRow>() {
            rows.push(rec?.into());
        }
        Ok(Self { root: root.to_path_buf(), rows })
    }
}

/// Manifest row with pinned float formatting so reruns are byte-identical.
#[derive(Serialize, Deserialize)]
struct CsvRow {
    id: String,
    timbre: String,
    amp_index: usize,
    amplitude: String,
    freq_index: usize,
    frequency_hz: String,
    path: String,
}

impl From<&ManifestRow> for CsvRow {
    fn from(r: &ManifestRow) -> Self {
        CsvRow {
            id: r.id.clone(),
            timbre: r.timbre.clone(),
            amp_index: r.amp_index,
            amplitude: format!("{:.4}", r.amplitude),
            freq_index: r.freq_index,
            frequency_hz: format!("{:.4}", r.frequency_hz),
            path: r.path.clone(),
        }
    }
}

impl From<CsvRow> for ManifestRow {
    fn from(r: CsvRow) -> Self {
        ManifestRow {
            id: r.id,
            timbre: r.timbre,
            amp_index: r.amp_index,
            amplitude: r.amplitude.parse().unwrap_or(f64::NAN),
            freq_index: r.freq_index,
            frequency_hz: r.frequency_hz.parse().unwrap_or(f64::NAN),
            path: r.path,
        }
    }
}

/// Quantize one sample to 16-bit PCM: `round(s * 32767)` clamped.
pub fn quantize_i16(s: f64) -> i16 {
    (s * 32767.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Inverse of [`quantize_i16`] up to rounding.
pub fn dequantize_i16(q: i16) -> f64 {
    q as f64 / 32767.0
}

/// Write a clip as RIFF/WAVE, PCM 16-bit signed little-endian, mono.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &clip.samples {
        writer.write_sample(quantize_i16(s))?;
    }
    writer.finalize()?;
    Ok(())
}

/// Read a mono 16-bit WAV back into f64 samples in [-1, 1].
pub fn read_wav(path: &Path) -> Result<(Vec<f64>, u32)> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 {
        return Err(Error::Format(format!(
            "{}: expected mono 16-bit PCM, got {} ch / {} bit",
            path.display(),
            spec.channels,
            spec.bits_per_sample
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(dequantize_i16).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, spec.sample_rate))
}

/// Materialize the (sub)grid to disk: one WAV per tuple plus a manifest.
///
/// Idempotent: re-running into the same directory rewrites byte-identical
/// files. On any write failure the offending partial file is removed and
/// no manifest is written.
pub fn generate_dataset(output_dir: &Path, subset: Subset) -> Result<DatasetManifest> {
    fs::create_dir_all(output_dir)?;
    // Probe writability up front so a read-only target fails before any synthesis.
    let probe = output_dir.join(".write-probe");
    fs::File::create(&probe).and_then(|mut f| f.write_all(b"ok"))?;
    fs::remove_file(&probe)?;

    let tuples = subset.tuples();
    let rows = tuples
        .par_iter()
        .map(|&factors| {
            let clip = synth_waveform(factors);
            let file = format!("{}.wav", factors.id());
            let path = output_dir.join(&file);
            write_wav(&path, &clip).map_err(|e| {
                let _ = fs::remove_file(&path);
                e
            })?;
            Ok(ManifestRow {
                id: factors.id(),
                timbre: factors.timbre.name().to_string(),
                amp_index: factors.amp_index,
                amplitude: factors.amplitude(),
                freq_index: factors.freq_index,
                frequency_hz: factors.frequency_hz(),
                path: file,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest { root: output_dir.to_path_buf(), rows };
    manifest.save()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn amplitude_grid_endpoints() {
        assert_eq!(amplitude_of(19).unwrap(), 1.0);
        assert_eq!(amplitude_of(0).unwrap(), 0.05);
        assert!(amplitude_of(20).is_err());
    }

    #[test]
    fn amplitude_levels_distinct_equally_spaced() {
        // Brute-force enumeration of the whole level set.
        let levels: Vec<f64> = (0..N_AMPS).map(|i| amplitude_of(i).unwrap()).collect();
        for w in levels.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.05, epsilon = 1e-15);
            assert!(w[1] > w[0]);
        }
        assert!(levels.iter().all(|&a| a > 0.0));
    }

    #[test]
    fn frequency_grid_endpoints() {
        assert_eq!(frequency_of(0).unwrap(), 440.0);
        assert_abs_diff_eq!(frequency_of(399).unwrap(), 7981.1, epsilon = 1e-9);
        assert_abs_diff_eq!(frequency_of(1).unwrap(), 458.9, epsilon = 1e-9);
        assert!(frequency_of(400).is_err());
    }

    #[test]
    fn all_frequencies_below_nyquist() {
        for k in 0..N_FREQS {
            assert!(frequency_of(k).unwrap() < 8000.0);
        }
    }

    #[test]
    fn grid_cardinality_and_order() {
        let grid = factor_grid();
        assert_eq!(grid.len(), 32_000);
        assert_eq!(grid[0], FactorTuple { timbre: Timbre::Sine, amp_index: 0, freq_index: 0 });
        let squares = grid.iter().filter(|t| t.timbre == Timbre::Square).count();
        assert_eq!(squares, 8_000);
        // Lexicographic and duplicate-free.
        for w in grid.windows(2) {
            let a = (w[0].timbre.index(), w[0].amp_index, w[0].freq_index);
            let b = (w[1].timbre.index(), w[1].amp_index, w[1].freq_index);
            assert!(a < b);
        }
    }

    #[test]
    fn sine_starts_at_zero() {
        for (a, f) in [(0, 0), (19, 399), (7, 123)] {
            let clip =
                synth_waveform(FactorTuple::new(Timbre::Sine, a, f).unwrap());
            assert_eq!(clip.samples[0], 0.0);
            assert_eq!(clip.samples.len(), CLIP_LEN);
        }
    }

    #[test]
    fn square_is_two_valued() {
        let clip = synth_waveform(FactorTuple::new(Timbre::Square, 9, 200).unwrap());
        let a = amplitude_of(9).unwrap();
        assert!(clip.samples.iter().all(|&s| s == a || s == -a));
    }

    #[test]
    fn sawtooth_sample_matches_ramp_formula() {
        let clip = synth_waveform(FactorTuple::new(Timbre::Sawtooth, 19, 0).unwrap());
        // n = 18 at 440 Hz: 2 * frac(440 * 18 / 16000) - 1 = -0.01
        assert_abs_diff_eq!(clip.samples[18], -0.01, epsilon = 1e-12);
        // Independent re-implementation of the ramp over the whole clip.
        for (n, &s) in clip.samples.iter().enumerate() {
            let cycles = 440.0 * n as f64 / 16000.0;
            let expect = 2.0 * (cycles - cycles.floor()) - 1.0;
            assert_eq!(s, expect);
        }
    }

    #[test]
    fn triangle_peaks_at_phase_zero() {
        let clip = synth_waveform(FactorTuple::new(Timbre::Triangle, 19, 0).unwrap());
        assert_eq!(clip.samples[0], 1.0);
        assert!(clip.samples.iter().all(|&s| (-1.0..=1.0).contains(&s)));
    }

    #[test]
    fn synthesis_is_deterministic() {
        let t = FactorTuple::new(Timbre::Sawtooth, 3, 77).unwrap();
        let a = synth_waveform(t);
        let b = synth_waveform(t);
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn no_sample_exceeds_level_amplitude() {
        for timbre in Timbre::ALL {
            let t = FactorTuple::new(timbre, 12, 350).unwrap();
            let clip = synth_waveform(t);
            let a = t.amplitude();
            assert!(clip.samples.iter().all(|&s| s.abs() <= a + 1e-15));
        }
    }

    #[test]
    fn sine_peak_within_one_percent_of_amplitude() {
        for f in [0, 100, 250, 399] {
            let t = FactorTuple::new(Timbre::Sine, 19, f).unwrap();
            let peak = synth_waveform(t).samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
            assert!(peak <= 1.0 && peak > 0.99, "peak {peak} at freq_index {f}");
        }
    }

    #[test]
    fn square_rms_equals_amplitude() {
        for a in [0, 10, 19] {
            let t = FactorTuple::new(Timbre::Square, a, 123).unwrap();
            let clip = synth_waveform(t);
            // Every sample is exactly +-a, so the RMS is a up to summation
            // rounding.
            assert!(clip.samples.iter().all(|&s| s.abs() == t.amplitude()));
            let rms =
                (clip.samples.iter().map(|s| s * s).sum::<f64>() / clip.samples.len() as f64).sqrt();
            assert_abs_diff_eq!(rms, t.amplitude(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quantization_round_trip_error_bounded() {
        for &s in &[0.0, 0.05, -0.05, 0.999, -1.0, 1.0, 0.31415] {
            let q = dequantize_i16(quantize_i16(s));
            assert!((q - s).abs() <= 0.5 / 32767.0 + 1e-12);
        }
        assert_eq!(quantize_i16(1.0), 32767);
        assert_eq!(quantize_i16(-1.0), -32767);
    }

    #[test]
    fn subset_stride_counts() {
        assert_eq!(Subset::new(1, 4, 20).unwrap().tuples().len(), 400);
        assert_eq!(Subset::FULL.tuples().len(), 32_000);
        assert!(Subset::parse("1,4,20").is_ok());
        assert!(Subset::parse("1,4").is_err());
        assert!(Subset::parse("0,4,20").is_err());
    }

    #[test]
    fn generate_writes_wavs_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let subset = Subset::new(2, 10, 100).unwrap(); // 2 * 2 * 4 = 16 clips
        let manifest = generate_dataset(dir.path(), subset).unwrap();
        assert_eq!(manifest.rows.len(), 16);
        for row in &manifest.rows {
            let (samples, sr) = read_wav(&manifest.wav_path(row)).unwrap();
            assert_eq!(sr, SAMPLE_RATE);
            assert_eq!(samples.len(), CLIP_LEN);
        }
        let reloaded = DatasetManifest::load(dir.path()).unwrap();
        assert_eq!(reloaded.rows.len(), 16);
        assert_eq!(reloaded.rows[0].id, manifest.rows[0].id);
        assert_eq!(reloaded.rows[0].factors().unwrap().timbre, Timbre::Sine);
    }

    #[test]
    fn generate_is_byte_identical_on_rerun() {
        let dir = tempfile::tempdir().unwrap();
        let subset = Subset::new(4, 20, 400).unwrap(); // 1 clip
        let m1 = generate_dataset(dir.path(), subset).unwrap();
        let bytes1 = fs::read(m1.wav_path(&m1.rows[0])).unwrap();
        let csv1 = fs::read(DatasetManifest::csv_path(dir.path())).unwrap();
        let m2 = generate_dataset(dir.path(), subset).unwrap();
        let bytes2 = fs::read(m2.wav_path(&m2.rows[0])).unwrap();
        let csv2 = fs::read(DatasetManifest::csv_path(dir.path())).unwrap();
        assert_eq!(bytes1, bytes2);
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn generate_into_unwritable_dir_fails_without_manifest() {
        // A regular file where the directory should go blocks creation
        // regardless of uid.
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        fs::write(&blocker, b"not a dir").unwrap();
        let target = blocker.join("out");
        let result = generate_dataset(&target, Subset::new(4, 20, 400).unwrap());
        assert!(result.is_err());
        assert!(!DatasetManifest::csv_path(&target).exists());
    }
}
