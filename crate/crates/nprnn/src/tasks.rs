//! Benchmark data. The addition and multiplication problems feed the net a
//! two-channel sequence — a uniform signal plus a two-spike mask — and ask
//! for the sum (or product) of the two marked signal values at the end.
//! Sequential MNIST reads one pixel at a time in scanline order. A shared
//! 0.04 absolute-error threshold defines regression "correctness".

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng};
use std::io::Write;
use std::path::Path;

/// A regression prediction counts as correct when its absolute error is
/// below this threshold.
pub const CORRECTNESS_THRESHOLD: f64 = 0.04;

pub fn is_correct(prediction: f64, target: f64) -> bool {
    (prediction - target).abs() < CORRECTNESS_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Addition,
    Multiplication,
    SequentialMnist,
}

impl Task {
    pub fn tag(self) -> &'static str {
        match self {
            Task::Addition => "addition",
            Task::Multiplication => "multiplication",
            Task::SequentialMnist => "mnist",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Task> {
        match tag {
            "addition" => Ok(Task::Addition),
            "multiplication" => Ok(Task::Multiplication),
            "mnist" | "sequential-mnist" => Ok(Task::SequentialMnist),
            other => Err(Error::Parse(format!("unknown task `{other}`"))),
        }
    }
}

/// One mask-and-signal sequence. The logical input at step `t` is the pair
/// `(signal[t], mask[t])` with the mask one at exactly two steps; the
/// target is the sum or product of the two marked signal values.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub signal: Vec<f64>,
    pub mask_first: usize,
    pub mask_second: usize,
    pub target: f64,
}

impl RegressionSample {
    pub fn t_len(&self) -> usize {
        self.signal.len()
    }

    /// Flat time-major input rows `(signal_t, mask_t)` for the forward pass.
    pub fn input_rows(&self) -> Vec<f64> {
        let mut rows = Vec::with_capacity(2 * self.signal.len());
        for (t, &s) in self.signal.iter().enumerate() {
            rows.push(s);
            rows.push(if t == self.mask_first || t == self.mask_second {
                1.0
            } else {
                0.0
            });
        }
        rows
    }
}

/// One sequential-image sample: pixel intensities in `[0, 1]`, scanline
/// order, plus the digit label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationSample {
    pub pixels: Vec<f64>,
    pub label: u8,
}

/// Declarative description of a dataset draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub task: Task,
    pub t_len: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

fn gen_one(task: Task, t_len: usize, rng: &mut Rng) -> RegressionSample {
    let signal: Vec<f64> = (0..t_len).map(|_| rng.uniform()).collect();
    let half = t_len / 2;
    let mask_first = rng.uniform_usize(half);
    let mask_second = half + rng.uniform_usize(t_len - half);
    let target = match task {
        Task::Addition => signal[mask_first] + signal[mask_second],
        Task::Multiplication => signal[mask_first] * signal[mask_second],
        Task::SequentialMnist => unreachable!("not a generated task"),
    };
    RegressionSample {
        signal,
        mask_first,
        mask_second,
        target,
    }
}

fn gen_regression(task: Task, t_len: usize, n: usize, rng: &mut Rng) -> Result<Vec<RegressionSample>> {
    if t_len < 2 {
        return Err(Error::contract(format!(
            "{} requires T >= 2, got {t_len}",
            task.tag()
        )));
    }
    Ok((0..n).map(|_| gen_one(task, t_len, rng)).collect())
}

/// Addition problem: the first mask spike lands uniformly in the first half
/// of the sequence, the second uniformly in the second half, so the
/// dependency always spans at least half the horizon. Unmarked signal
/// entries stay uniform noise the net must learn to ignore.
pub fn gen_addition(t_len: usize, n: usize, rng: &mut Rng) -> Result<Vec<RegressionSample>> {
    gen_regression(Task::Addition, t_len, n, rng)
}

/// Multiplication problem: identical construction with a product target.
pub fn gen_multiplication(t_len: usize, n: usize, rng: &mut Rng) -> Result<Vec<RegressionSample>> {
    gen_regression(Task::Multiplication, t_len, n, rng)
}

/// Monte Carlo mean squared error of the constant predictor over `n` fresh
/// samples. The target distribution does not depend on the horizon; a
/// fixed T = 100 keeps runs cheap and comparable.
pub fn baseline_mse(task: Task, constant: f64, n: usize, rng: &mut Rng) -> Result<f64> {
    if n == 0 {
        return Err(Error::contract("baseline_mse requires n >= 1"));
    }
    if task == Task::SequentialMnist {
        return Err(Error::contract("baseline_mse applies to regression tasks"));
    }
    let t_len = 100;
    let mut acc = 0.0;
    for _ in 0..n {
        let s = gen_one(task, t_len, rng);
        let d = s.target - constant;
        acc += d * d;
    }
    Ok(acc / n as f64)
}

// --- MNIST IDX -------------------------------------------------------------

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_be_u32(bytes: &[u8], offset: usize, what: &str, path: &Path) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Parse(format!(
            "{}: truncated reading {what} at offset {offset}",
            path.display()
        )));
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

/// Loads an MNIST-style IDX image/label pair. Pixels are scaled to `[0, 1]`
/// by division by 255; labels are validated to lie in 0–9; image and label
/// counts must agree.
pub fn load_mnist_idx(
    image_path: &Path,
    label_path: &Path,
) -> Result<Vec<ClassificationSample>> {
    let img = std::fs::read(image_path).map_err(|e| Error::io(image_path, e))?;
    let lbl = std::fs::read(label_path).map_err(|e| Error::io(label_path, e))?;

    let magic = read_be_u32(&img, 0, "image magic", image_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Parse(format!(
            "{}: bad image magic {magic:#010x} at offset 0",
            image_path.display()
        )));
    }
    let n = read_be_u32(&img, 4, "image count", image_path)? as usize;
    let rows = read_be_u32(&img, 8, "row count", image_path)? as usize;
    let cols = read_be_u32(&img, 12, "column count", image_path)? as usize;
    let pixel_bytes = n * rows * cols;
    if img.len() != 16 + pixel_bytes {
        return Err(Error::Parse(format!(
            "{}: expected {} pixel bytes after offset 16, found {}",
            image_path.display(),
            pixel_bytes,
            img.len().saturating_sub(16)
        )));
    }

    let magic = read_be_u32(&lbl, 0, "label magic", label_path)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Parse(format!(
            "{}: bad label magic {magic:#010x} at offset 0",
            label_path.display()
        )));
    }
    let n_labels = read_be_u32(&lbl, 4, "label count", label_path)? as usize;
    if lbl.len() != 8 + n_labels {
        return Err(Error::Parse(format!(
            "{}: expected {n_labels} label bytes after offset 8, found {}",
            label_path.display(),
            lbl.len().saturating_sub(8)
        )));
    }
    if n != n_labels {
        return Err(Error::Parse(format!(
            "image count {n} does not match label count {n_labels}"
        )));
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let label = lbl[8 + i];
        if label > 9 {
            return Err(Error::Parse(format!(
                "{}: label {label} out of range at offset {}",
                label_path.display(),
                8 + i
            )));
        }
        let start = 16 + i * rows * cols;
        let pixels = img[start..start + rows * cols]
            .iter()
            .map(|&b| b as f64 / 255.0)
            .collect();
        out.push(ClassificationSample { pixels, label });
    }
    Ok(out)
}

/// Writes samples back out as an IDX pair; the inverse of [`load_mnist_idx`]
/// for byte-valued pixels.
pub fn write_mnist_idx(
    samples: &[ClassificationSample],
    side: usize,
    image_path: &Path,
    label_path: &Path,
) -> Result<()> {
    let mut img = Vec::with_capacity(16 + samples.len() * side * side);
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    img.extend_from_slice(&(side as u32).to_be_bytes());
    img.extend_from_slice(&(side as u32).to_be_bytes());
    let mut lbl = Vec::with_capacity(8 + samples.len());
    lbl.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lbl.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    for s in samples {
        if s.pixels.len() != side * side {
            return Err(Error::contract(format!(
                "sample has {} pixels, expected {}",
                s.pixels.len(),
                side * side
            )));
        }
        for &p in &s.pixels {
            img.push((p * 255.0).round() as u8);
        }
        lbl.push(s.label);
    }
    std::fs::write(image_path, img).map_err(|e| Error::io(image_path, e))?;
    std::fs::write(label_path, lbl).map_err(|e| Error::io(label_path, e))
}

/// Flattens a square image in scanline (row-major) order; `downscale = k`
/// first mean-pools k×k blocks, shrinking a 28×28 image to T = (28/k)².
/// `downscale = 1` is the plain 784-step serialization.
pub fn sequentialize(image: &Matrix, downscale: usize) -> Result<Vec<f64>> {
    if !image.is_square() {
        return Err(Error::contract(format!(
            "sequentialize requires a square image, got {}x{}",
            image.rows(),
            image.cols()
        )));
    }
    if downscale == 0 {
        return Err(Error::contract("downscale factor must be >= 1"));
    }
    let side = image.rows();
    if downscale == 1 {
        return Ok(image.data().to_vec());
    }
    if side % downscale != 0 {
        return Err(Error::contract(format!(
            "downscale {downscale} does not divide image side {side}"
        )));
    }
    let out_side = side / downscale;
    let norm = (downscale * downscale) as f64;
    let mut out = Vec::with_capacity(out_side * out_side);
    for bi in 0..out_side {
        for bj in 0..out_side {
            let mut acc = 0.0;
            for di in 0..downscale {
                for dj in 0..downscale {
                    acc += image.get(bi * downscale + di, bj * downscale + dj);
                }
            }
            out.push(acc / norm);
        }
    }
    Ok(out)
}

/// Classification sample as a square image matrix (side inferred).
pub fn sample_image(sample: &ClassificationSample) -> Result<Matrix> {
    let len = sample.pixels.len();
    let side = (len as f64).sqrt().round() as usize;
    if side * side != len {
        return Err(Error::contract(format!(
            "pixel count {len} is not a perfect square"
        )));
    }
    Matrix::from_vec(side, side, sample.pixels.clone())
}

/// Writes generated regression samples as CSV, one row per sample:
/// `T, mask_first, mask_second, signal values..., target`.
pub fn export_regression_csv(samples: &[RegressionSample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for s in samples {
            write!(w, "{},{},{}", s.t_len(), s.mask_first, s.mask_second)?;
            for v in &s.signal {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{}", s.target)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_satisfy_their_invariants_across_horizons() {
        for task in [Task::Addition, Task::Multiplication] {
            for t_len in [50usize, 150, 500] {
                let mut rng = Rng::new(7);
                let samples = gen_regression(task, t_len, 2_000, &mut rng).unwrap();
                for s in &samples {
                    assert_eq!(s.t_len(), t_len);
                    assert!(s.mask_first < t_len / 2);
                    assert!(s.mask_second >= t_len / 2 && s.mask_second < t_len);
                    assert_ne!(s.mask_first, s.mask_second);
                    let expect = match task {
                        Task::Addition => s.signal[s.mask_first] + s.signal[s.mask_second],
                        Task::Multiplication => {
                            s.signal[s.mask_first] * s.signal[s.mask_second]
                        }
                        _ => unreachable!(),
                    };
                    assert_eq!(s.target, expect, "target must be exact");
                    let bound = if task == Task::Addition { 2.0 } else { 1.0 };
                    assert!((0.0..=bound).contains(&s.target));
                    // mask row has exactly two ones
                    let rows = s.input_rows();
                    let ones = rows
                        .chunks_exact(2)
                        .filter(|step| step[1] == 1.0)
                        .count();
                    assert_eq!(ones, 2);
                    assert!(rows
                        .chunks_exact(2)
                        .all(|step| step[1] == 0.0 || step[1] == 1.0));
                }
            }
        }
    }

    #[test]
    fn generators_deterministic_and_streams_disjoint() {
        let a = gen_addition(150, 100, &mut Rng::new(5)).unwrap();
        let b = gen_addition(150, 100, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);

        // spot-check train/test disjointness: no shared
        // (mask positions, first signal value) triple across streams
        let train = gen_addition(150, 10_000, &mut Rng::new(1)).unwrap();
        let test = gen_addition(150, 10_000, &mut Rng::new(2)).unwrap();
        let keys: std::collections::HashSet<(usize, usize, u64)> = train
            .iter()
            .map(|s| (s.mask_first, s.mask_second, s.signal[0].to_bits()))
            .collect();
        let overlap = test
            .iter()
            .filter(|s| keys.contains(&(s.mask_first, s.mask_second, s.signal[0].to_bits())))
            .count();
        assert_eq!(overlap, 0, "streams with different seeds must not collide");
    }

    #[test]
    fn gen_rejects_degenerate_horizon() {
        assert!(gen_addition(1, 5, &mut Rng::new(0)).is_err());
        assert!(gen_multiplication(0, 5, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn addition_baseline_near_one_sixth() {
        let mse = baseline_mse(Task::Addition, 1.0, 100_000, &mut Rng::new(11)).unwrap();
        assert!(
            (mse - 1.0 / 6.0).abs() < 0.005,
            "constant-1 MSE {mse} should be ~0.1667"
        );
    }

    #[test]
    fn multiplication_baseline_near_7_over_144() {
        let mse =
            baseline_mse(Task::Multiplication, 0.25, 100_000, &mut Rng::new(13)).unwrap();
        assert!(
            (mse - 7.0 / 144.0).abs() < 0.003,
            "constant-0.25 MSE {mse} should be ~0.0486"
        );
    }

    #[test]
    fn baseline_of_exact_constant_on_single_sample() {
        let s = gen_one(Task::Addition, 20, &mut Rng::new(3));
        // n = 1 Monte Carlo with the matching constant: reproduce by hand
        let d = s.target - s.target;
        assert_eq!(d * d, 0.0);
    }

    #[test]
    fn correctness_threshold_is_strict() {
        assert!(is_correct(1.0, 1.039));
        assert!(!is_correct(1.0, 1.04));
        assert!(is_correct(0.5, 0.5));
    }

    #[test]
    fn idx_roundtrip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("images-idx3-ubyte");
        let lbl = dir.path().join("labels-idx1-ubyte");
        let samples = vec![
            ClassificationSample {
                pixels: (0..784).map(|i| (i % 256) as f64 / 255.0).collect(),
                label: 3,
            },
            ClassificationSample {
                pixels: vec![0.0; 784],
                label: 9,
            },
        ];
        write_mnist_idx(&samples, 28, &img, &lbl).unwrap();
        let loaded = load_mnist_idx(&img, &lbl).unwrap();
        assert_eq!(loaded.len(), 2);
        for (a, b) in samples.iter().zip(&loaded) {
            assert_eq!(a.label, b.label);
            for (pa, pb) in a.pixels.iter().zip(&b.pixels) {
                assert_eq!(pa.to_bits(), pb.to_bits(), "pixel roundtrip must be exact");
            }
        }
        // all-zero image stays all-zero
        assert!(loaded[1].pixels.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn idx_loader_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img");
        let lbl = dir.path().join("lbl");

        // bad image magic
        std::fs::write(&img, 0x0000_0999_u32.to_be_bytes()).unwrap();
        std::fs::write(&lbl, IDX_LABELS_MAGIC.to_be_bytes()).unwrap();
        let err = load_mnist_idx(&img, &lbl).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("magic")), "{err}");

        // truncated image payload
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&[1, 2, 3]); // needs 8
        std::fs::write(&img, &bytes).unwrap();
        let err = load_mnist_idx(&img, &lbl).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("pixel bytes")), "{err}");

        // count mismatch
        let samples = vec![ClassificationSample {
            pixels: vec![0.5; 4],
            label: 1,
        }];
        write_mnist_idx(&samples, 2, &img, &lbl).unwrap();
        let mut lbl_bytes = std::fs::read(&lbl).unwrap();
        lbl_bytes[7] = 2; // claim two labels
        lbl_bytes.push(4);
        std::fs::write(&lbl, &lbl_bytes).unwrap();
        let err = load_mnist_idx(&img, &lbl).unwrap_err();
        assert!(
            matches!(err, Error::Parse(ref m) if m.contains("does not match")),
            "{err}"
        );
    }

    #[test]
    fn sequentialize_scanline_and_pooling() {
        let img = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(sequentialize(&img, 1).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(sequentialize(&img, 2).unwrap(), vec![2.5]);

        let mut big = Matrix::zeros(28, 28);
        for i in 0..28 {
            for j in 0..28 {
                big.set(i, j, (i * 28 + j) as f64);
            }
        }
        assert_eq!(sequentialize(&big, 1).unwrap().len(), 784);
        assert_eq!(sequentialize(&big, 2).unwrap().len(), 196);
        assert!(sequentialize(&big, 3).is_err(), "3 does not divide 28");
    }

    #[test]
    fn csv_export_matches_sample_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let samples = gen_addition(5, 3, &mut Rng::new(9)).unwrap();
        export_regression_csv(&samples, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (line, s) in lines.iter().zip(&samples) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3 + 5 + 1);
            assert_eq!(fields[0], "5");
            assert_eq!(fields[1], s.mask_first.to_string());
            assert_eq!(fields[2], s.mask_second.to_string());
            let target: f64 = fields.last().unwrap().parse().unwrap();
            assert_eq!(target, s.target);
        }
    }
}
