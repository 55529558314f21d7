//! Sequence generation and the on-disk sequence format.
//!
//! Two generators are built in:
//!
//! * [`gen_case1`] — two analytic 2-dimensional patterns over 100 steps,
//!   closed-form sine products with the removable singularities at the
//!   midpoint resolved by their analytic limits.
//! * [`gen_multimodal`] — an explicitly **synthetic** 43-dimensional
//!   stand-in for a robot manipulation corpus: two command dimensions hold a
//!   verb/noun code constant over the whole sequence while 41 motor
//!   dimensions carry smooth multi-sine trajectories. The trajectory shape
//!   is keyed by the object and location; the commanded action only bends
//!   the trajectories in a late window, so predicting the end of a sequence
//!   requires remembering the command dims from the very first step — a
//!   deliberate long-range dependency. Manifests label this generator
//!   synthetic; it makes no claim of matching real recordings.
//!
//! On disk a sequence set is a directory: one CSV per sequence (header
//! `d0,d1,...`, one row per timestep) plus `manifest.json` with generator
//! provenance and the per-sequence shapes. Floats are written in shortest
//! round-trip decimal form, so save → load reproduces every bit.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng, Vector};
use crate::training::write_text;

/// The nine verbs, in code order (value = index / 10).
pub const VERBS: [&str; 9] = [
    "slide left",
    "slide right",
    "touch",
    "reach",
    "push",
    "pull",
    "point",
    "grasp",
    "lift",
];

/// The nine nouns, in code order (value = index / 10).
pub const NOUNS: [&str; 9] = [
    "tractor", "hammer", "ball", "bus", "modi", "car", "cup", "cubes", "spiky",
];

/// Verb/noun vocabulary with the fixed 0.0..0.8 value grid.
#[derive(Debug, Clone)]
pub struct CommandDictionary {
    verbs: Vec<(String, f64)>,
    nouns: Vec<(String, f64)>,
}

impl Default for CommandDictionary {
    fn default() -> Self {
        let grid = |words: &[&str]| {
            words
                .iter()
                .enumerate()
                .map(|(i, w)| (w.to_string(), i as f64 / 10.0))
                .collect()
        };
        CommandDictionary {
            verbs: grid(&VERBS),
            nouns: grid(&NOUNS),
        }
    }
}

impl CommandDictionary {
    pub fn verb_value(&self, verb: &str) -> Result<f64> {
        lookup(&self.verbs, verb, "verb")
    }

    pub fn noun_value(&self, noun: &str) -> Result<f64> {
        lookup(&self.nouns, noun, "noun")
    }

    pub fn verbs(&self) -> &[(String, f64)] {
        &self.verbs
    }

    pub fn nouns(&self) -> &[(String, f64)] {
        &self.nouns
    }
}

fn lookup(map: &[(String, f64)], word: &str, kind: &'static str) -> Result<f64> {
    map.iter()
        .find(|(w, _)| w == word)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::UnknownWord {
            kind,
            word: word.to_string(),
            valid: map
                .iter()
                .map(|(w, _)| w.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Translate a command sentence into its two-dimensional code,
/// `[verb value, noun value]`; e.g. "lift ball" becomes `[0.8, 0.2]`.
pub fn encode_command(verb: &str, noun: &str, dict: &CommandDictionary) -> Result<Vector> {
    Ok(Vector::from_vec(vec![
        dict.verb_value(verb)?,
        dict.noun_value(noun)?,
    ]))
}

/// One named sequence.
#[derive(Debug, Clone)]
pub struct NamedSequence {
    pub id: String,
    pub data: Matrix,
}

/// A set of equally-dimensioned sequences plus generator provenance.
#[derive(Debug, Clone)]
pub struct SequenceSet {
    /// Generator name (`case1`, `multimodal`, or `external`).
    pub generator: String,
    /// Generator parameters, recorded verbatim in the manifest.
    pub params: serde_json::Value,
    /// Seed the generator consumed, if it used randomness.
    pub seed: Option<u64>,
    pub sequences: Vec<NamedSequence>,
}

impl SequenceSet {
    /// Shared dimension of all sequences.
    pub fn dims(&self) -> usize {
        self.sequences.first().map_or(0, |s| s.data.cols())
    }

    /// Clone the raw matrices in set order (the shape the trainer takes).
    pub fn matrices(&self) -> Vec<Matrix> {
        self.sequences.iter().map(|s| s.data.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::InvalidArgument("sequence set is empty".into()));
        }
        let d = self.dims();
        for s in &self.sequences {
            if s.data.cols() != d {
                return Err(Error::ShapeMismatch {
                    op: "sequence_set",
                    left: format!("sequence {} with {} dims", self.sequences[0].id, d),
                    right: format!("sequence {} with {} dims", s.id, s.data.cols()),
                });
            }
            if s.data.rows() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "sequence {} has {} rows; need at least 2",
                    s.id,
                    s.data.rows()
                )));
            }
        }
        Ok(())
    }
}

/// The two analytic benchmark patterns: 100 steps of
///
/// * pattern 1: `(sin 2t, sin t)`
/// * pattern 2: `(sin 2t * cos 3t, (sin 3t / 2t)(sin t / t) - 0.5)`
///
/// with `t = (k - 50)/50 * pi` for `k = 0..99`. At `k = 50` (`t = 0`) the
/// second pattern's quotients take their analytic limits, giving exactly
/// `(0, 1.0)`.
pub fn gen_case1() -> SequenceSet {
    let t_len = 100;
    let mut x1 = Matrix::zeros(t_len, 2);
    let mut x2 = Matrix::zeros(t_len, 2);
    for k in 0..t_len {
        let t = (k as f64 - 50.0) / 50.0 * std::f64::consts::PI;
        x1.set(k, 0, (2.0 * t).sin());
        x1.set(k, 1, t.sin());
        if t == 0.0 {
            // sin 2t * cos 3t -> 0; (sin 3t / 2t) -> 3/2, (sin t / t) -> 1.
            x2.set(k, 0, 0.0);
            x2.set(k, 1, 1.0);
        } else {
            x2.set(k, 0, (2.0 * t).sin() * (3.0 * t).cos());
            x2.set(k, 1, ((3.0 * t).sin() / (2.0 * t)) * (t.sin() / t) - 0.5);
        }
    }
    SequenceSet {
        generator: "case1".to_string(),
        params: serde_json::json!({ "t": t_len, "d": 2 }),
        seed: None,
        sequences: vec![
            NamedSequence {
                id: "pattern_1".to_string(),
                data: x1,
            },
            NamedSequence {
                id: "pattern_2".to_string(),
                data: x2,
            },
        ],
    }
}

/// Which (action, object, location) combinations a multimodal set contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceSelection {
    /// Draw this many distinct combinations from the seeded generator.
    Sample(usize),
    /// Every (action, object) pair once, location cycling deterministically.
    Sweep,
}

/// Parameters of the synthetic multimodal generator.
#[derive(Debug, Clone)]
pub struct MultimodalSpec {
    /// Actions in play (at most the 9-verb vocabulary).
    pub n_actions: usize,
    /// Objects in play (at most the 9-noun vocabulary).
    pub n_objects: usize,
    /// Scene locations that shape the motor trajectories.
    pub n_locations: usize,
    pub seq_len: usize,
    /// Motor/vision dimensions on top of the 2 command dimensions.
    pub motor_dims: usize,
    /// Std of the Gaussian noise added to every motor sample.
    pub noise_std: f64,
    pub seed: u64,
    pub selection: SequenceSelection,
}

impl Default for MultimodalSpec {
    fn default() -> Self {
        MultimodalSpec {
            n_actions: 9,
            n_objects: 9,
            n_locations: 6,
            seq_len: 100,
            motor_dims: 41,
            noise_std: 0.01,
            seed: 7,
            selection: SequenceSelection::Sample(20),
        }
    }
}

impl MultimodalSpec {
    pub fn validate(&self) -> Result<()> {
        fn bail(msg: String) -> Result<()> {
            Err(Error::InvalidArgument(msg))
        }
        if self.n_actions == 0 || self.n_actions > VERBS.len() {
            return bail(format!(
                "n_actions must lie in 1..={}, got {}",
                VERBS.len(),
                self.n_actions
            ));
        }
        if self.n_objects == 0 || self.n_objects > NOUNS.len() {
            return bail(format!(
                "n_objects must lie in 1..={}, got {}",
                NOUNS.len(),
                self.n_objects
            ));
        }
        if self.n_locations == 0 {
            return bail("n_locations must be at least 1".into());
        }
        if self.seq_len < 2 {
            return bail(format!("seq_len must be at least 2, got {}", self.seq_len));
        }
        if self.motor_dims == 0 {
            return bail("motor_dims must be at least 1".into());
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bail(format!(
                "noise_std must be finite and non-negative, got {}",
                self.noise_std
            ));
        }
        if let SequenceSelection::Sample(n) = self.selection {
            let total = self.n_actions * self.n_objects * self.n_locations;
            if n == 0 {
                return bail("selection sample count must be at least 1".into());
            }
            if n > total {
                return bail(format!(
                    "cannot sample {n} distinct combinations from {total} available"
                ));
            }
        }
        Ok(())
    }
}

// Seed bases for the per-trajectory parameter streams. The base waveform of
// a motor dimension is keyed by (object, location, dim) only — the action
// must not be readable from the early trajectory — while the late component
// is keyed by (action, dim).
const BASE_PARAM_SEED: u64 = 0x6d74_7363_616c_6531;
const LATE_PARAM_SEED: u64 = 0x6d74_7363_616c_6532;

fn mix_seed(base: u64, a: u64, b: u64, c: u64) -> u64 {
    base ^ (a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        ^ (b.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        ^ (c.wrapping_mul(0x94D0_49BB_1331_11EB))
}

/// Smooth 0 -> 1 ramp across the late window `[k0, k1]` (raised cosine).
fn late_window(k: usize, k0: usize, k1: usize) -> f64 {
    if k < k0 {
        0.0
    } else if k >= k1 {
        1.0
    } else {
        let frac = (k - k0) as f64 / (k1 - k0) as f64;
        0.5 * (1.0 - (std::f64::consts::PI * frac).cos())
    }
}

/// Generate a synthetic multimodal set per `spec`. Deterministic in the
/// spec; with `noise_std = 0` two sequences sharing (object, location) are
/// bit-identical on every motor dimension until the late window opens.
pub fn gen_multimodal(spec: &MultimodalSpec) -> Result<SequenceSet> {
    spec.validate()?;
    let triples = select_triples(spec);
    let t_len = spec.seq_len;
    let k0 = (0.6 * (t_len as f64 - 1.0)).floor() as usize;
    let k1 = ((0.8 * (t_len as f64 - 1.0)).floor() as usize).max(k0 + 1);
    let dict = CommandDictionary::default();
    let mut noise_rng = Rng::new(spec.seed);

    let mut sequences = Vec::with_capacity(triples.len());
    for &(a, o, l) in &triples {
        let verb_value = dict.verbs[a].1;
        let noun_value = dict.nouns[o].1;
        let d = 2 + spec.motor_dims;
        let mut m = Matrix::zeros(t_len, d);
        for k in 0..t_len {
            m.set(k, 0, verb_value);
            m.set(k, 1, noun_value);
        }
        for dim in 0..spec.motor_dims {
            // Base waveform: 2-3 sines keyed by (object, location, dim).
            let mut prng = Rng::new(mix_seed(BASE_PARAM_SEED, o as u64, l as u64, dim as u64));
            let n_waves = 2 + prng.below(2);
            let mut waves = Vec::with_capacity(n_waves);
            let mut amp_total = 0.0;
            for _ in 0..n_waves {
                let cycles = 0.5 + 3.0 * prng.next_f64();
                let omega = 2.0 * std::f64::consts::PI * cycles / t_len as f64;
                let phase = 2.0 * std::f64::consts::PI * prng.next_f64();
                let amp = 0.3 + 0.7 * prng.next_f64();
                amp_total += amp;
                waves.push((omega, phase, amp));
            }
            // Normalize so the base stays within +-0.7.
            for w in &mut waves {
                w.2 *= 0.7 / amp_total;
            }
            // Late component: keyed by (action, dim), gated by the window.
            let mut lrng = Rng::new(mix_seed(LATE_PARAM_SEED, a as u64, dim as u64, 0));
            let late_cycles = 1.0 + 2.0 * lrng.next_f64();
            let late_omega = 2.0 * std::f64::consts::PI * late_cycles / t_len as f64;
            let late_phase = 2.0 * std::f64::consts::PI * lrng.next_f64();

            let mut max_abs = 0.0f64;
            for k in 0..t_len {
                let mut v = 0.0;
                for &(omega, phase, amp) in &waves {
                    v += amp * (omega * k as f64 + phase).sin();
                }
                v += late_window(k, k0, k1) * 0.25 * (late_omega * k as f64 + late_phase).sin();
                if spec.noise_std > 0.0 {
                    v += spec.noise_std * noise_rng.gauss();
                }
                max_abs = max_abs.max(v.abs());
                m.set(k, 2 + dim, v);
            }
            // Rescale only when the bound is actually exceeded, so the
            // noiseless generator stays exactly reproducible window-wise.
            if max_abs > 1.0 {
                for k in 0..t_len {
                    m.set(k, 2 + dim, m.get(k, 2 + dim) / max_abs);
                }
            }
        }
        sequences.push(NamedSequence {
            id: format!(
                "{}_{}_l{}",
                VERBS[a].replace(' ', "-"),
                NOUNS[o],
                l
            ),
            data: m,
        });
    }

    Ok(SequenceSet {
        generator: "multimodal".to_string(),
        params: serde_json::json!({
            "synthetic": true,
            "note": "synthetic stand-in trajectories, not robot recordings",
            "n_actions": spec.n_actions,
            "n_objects": spec.n_objects,
            "n_locations": spec.n_locations,
            "seq_len": spec.seq_len,
            "motor_dims": spec.motor_dims,
            "noise_std": spec.noise_std,
            "late_window": [k0, k1],
            "selection": match spec.selection {
                SequenceSelection::Sample(n) => serde_json::json!({ "sample": n }),
                SequenceSelection::Sweep => serde_json::json!("sweep"),
            },
        }),
        seed: Some(spec.seed),
        sequences,
    })
}

fn select_triples(spec: &MultimodalSpec) -> Vec<(usize, usize, usize)> {
    match spec.selection {
        SequenceSelection::Sweep => {
            let mut out = Vec::with_capacity(spec.n_actions * spec.n_objects);
            for a in 0..spec.n_actions {
                for o in 0..spec.n_objects {
                    out.push((a, o, (a + o) % spec.n_locations));
                }
            }
            out
        }
        SequenceSelection::Sample(n) => {
            let mut rng = Rng::new(spec.seed ^ 0x5e1e_c715);
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let triple = (
                    rng.below(spec.n_actions),
                    rng.below(spec.n_objects),
                    rng.below(spec.n_locations),
                );
                if seen.insert(triple) {
                    out.push(triple);
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    generator: String,
    params: serde_json::Value,
    #[serde(default)]
    seed: Option<u64>,
    sequences: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    file: String,
    t: usize,
    d: usize,
}

/// Write a set into `dir` (created if missing): one CSV per sequence plus
/// `manifest.json`.
pub fn save_set(set: &SequenceSet, dir: &Path) -> Result<()> {
    set.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(set.sequences.len());
    for s in &set.sequences {
        let file = format!("{}.csv", s.id);
        let mut text = String::new();
        let d = s.data.cols();
        for j in 0..d {
            if j > 0 {
                text.push(',');
            }
            text.push_str(&format!("d{j}"));
        }
        text.push('\n');
        for k in 0..s.data.rows() {
            let row = s.data.row(k);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    text.push(',');
                }
                text.push_str(&format!("{v}"));
            }
            text.push('\n');
        }
        write_text(&dir.join(&file), &text)?;
        entries.push(ManifestEntry {
            id: s.id.clone(),
            file,
            t: s.data.rows(),
            d,
        });
    }
    let manifest = Manifest {
        generator: set.generator.clone(),
        params: set.params.clone(),
        seed: set.seed,
        sequences: entries,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))?;
    write_text(&dir.join("manifest.json"), &json)
}

/// Read a set back from `dir`, validating the manifest against every file.
pub fn load_set(dir: &Path) -> Result<SequenceSet> {
    let manifest_path = dir.join("manifest.json");
    let manifest_text =
        std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text).map_err(|e| Error::CorruptData {
        path: manifest_path.clone(),
        reason: format!("manifest does not parse: {e}"),
    })?;
    if manifest.sequences.is_empty() {
        return Err(Error::CorruptData {
            path: manifest_path,
            reason: "manifest lists no sequences".into(),
        });
    }
    let d0 = manifest.sequences[0].d;
    for entry in &manifest.sequences {
        if entry.d != d0 {
            return Err(Error::CorruptData {
                path: manifest_path,
                reason: format!(
                    "sequences disagree on dimension: {} has d={}, {} has d={}",
                    manifest.sequences[0].id, d0, entry.id, entry.d
                ),
            });
        }
    }

    let mut sequences = Vec::with_capacity(manifest.sequences.len());
    for entry in &manifest.sequences {
        let path = dir.join(&entry.file);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let header_cols = header.split(',').count();
        if header_cols != entry.d {
            return Err(Error::CorruptData {
                path,
                reason: format!(
                    "header has {} columns but the manifest says d={}",
                    header_cols, entry.d
                ),
            });
        }
        let mut rows = Vec::with_capacity(entry.t);
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(entry.d);
            for cell in line.split(',') {
                let v: f64 = cell.parse().map_err(|_| Error::CorruptData {
                    path: path.clone(),
                    reason: format!("row {}: {cell:?} is not a number", lineno + 2),
                })?;
                if !v.is_finite() {
                    return Err(Error::CorruptData {
                        path: path.clone(),
                        reason: format!("row {}: non-finite value {v}", lineno + 2),
                    });
                }
                row.push(v);
            }
            if row.len() != entry.d {
                return Err(Error::CorruptData {
                    path: path.clone(),
                    reason: format!(
                        "row {} has {} columns, expected {}",
                        lineno + 2,
                        row.len(),
                        entry.d
                    ),
                });
            }
            rows.push(row);
        }
        if rows.len() != entry.t {
            return Err(Error::CorruptData {
                path,
                reason: format!("{} data rows, but the manifest says t={}", rows.len(), entry.t),
            });
        }
        let matrix = Matrix::from_rows(&rows).map_err(|e| Error::CorruptData {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        sequences.push(NamedSequence {
            id: entry.id.clone(),
            data: matrix,
        });
    }
    let set = SequenceSet {
        generator: manifest.generator,
        params: manifest.params,
        seed: manifest.seed,
        sequences,
    };
    set.validate()?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_matches_closed_form_at_probe_points() {
        let set = gen_case1();
        assert_eq!(set.sequences.len(), 2);
        let x1 = &set.sequences[0].data;
        let x2 = &set.sequences[1].data;
        assert_eq!((x1.rows(), x1.cols()), (100, 2));
        assert_eq!((x2.rows(), x2.cols()), (100, 2));

        // Frozen closed-form values at five probe points.
        let expect_x1 = [
            (0, 2.4492935982947064e-16, -1.2246467991473532e-16),
            (25, -1.2246467991473532e-16, -1.0),
            (50, 0.0, 0.0),
            (75, 1.2246467991473532e-16, 1.0),
            (99, -0.12533323356430465, 0.06279051952931358),
        ];
        let expect_x2 = [
            (0, -2.4492935982947064e-16, -0.5),
            (25, 2.2496396739927864e-32, -0.7026423672846756),
            (50, 0.0, 1.0),
            (75, -2.2496396739927864e-32, -0.7026423672846756),
            (99, 0.12311323742281739, -0.4993793618532494),
        ];
        for &(k, a, b) in &expect_x1 {
            assert!((x1.get(k, 0) - a).abs() < 1e-12, "x1[{k}][0]");
            assert!((x1.get(k, 1) - b).abs() < 1e-12, "x1[{k}][1]");
        }
        for &(k, a, b) in &expect_x2 {
            assert!((x2.get(k, 0) - a).abs() < 1e-12, "x2[{k}][0]");
            assert!((x2.get(k, 1) - b).abs() < 1e-12, "x2[{k}][1]");
        }
        // The analytic-limit row is exact, not approximate.
        assert_eq!(x2.get(50, 0), 0.0);
        assert_eq!(x2.get(50, 1), 1.0);
    }

    /// The midpoint value continues the function: evaluating the closed form
    /// just off zero lands within 1e-6 of the analytic limit.
    #[test]
    fn case1_singularity_is_removable() {
        let set = gen_case1();
        let x2 = &set.sequences[1].data;
        let t = 1e-8f64;
        let near = ((3.0 * t).sin() / (2.0 * t)) * (t.sin() / t) - 0.5;
        assert!((x2.get(50, 1) - near).abs() < 1e-6);
    }

    #[test]
    fn case1_values_stay_in_documented_ranges() {
        let set = gen_case1();
        for v in set.sequences[0].data.data() {
            assert!(v.abs() <= 1.0);
        }
        let x2 = &set.sequences[1].data;
        for k in 0..100 {
            assert!(x2.get(k, 0).abs() <= 1.0);
            let v = x2.get(k, 1);
            assert!((-2.0..=1.0).contains(&v) && v.is_finite());
        }
    }

    #[test]
    fn dictionary_grid_and_known_encodings() {
        let dict = CommandDictionary::default();
        for (i, (_, v)) in dict.verbs().iter().enumerate() {
            assert_eq!(*v, i as f64 / 10.0);
        }
        for (i, (_, v)) in dict.nouns().iter().enumerate() {
            assert_eq!(*v, i as f64 / 10.0);
        }
        // Bijective: all values distinct within each map.
        let unique: HashSet<u64> = dict.verbs().iter().map(|(_, v)| v.to_bits()).collect();
        assert_eq!(unique.len(), 9);

        let enc = encode_command("lift", "ball", &dict).unwrap();
        assert_eq!(enc.as_slice(), &[0.8, 0.2]);
        let enc = encode_command("slide left", "tractor", &dict).unwrap();
        assert_eq!(enc.as_slice(), &[0.0, 0.0]);
        let enc = encode_command("push", "modi", &dict).unwrap();
        assert_eq!(enc.as_slice(), &[0.4, 0.4]);

        let err = encode_command("throw", "ball", &dict).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("throw") && msg.contains("slide left") && msg.contains("lift"));
        assert!(encode_command("lift", "rocket", &dict).is_err());
    }

    fn small_spec() -> MultimodalSpec {
        MultimodalSpec {
            n_actions: 4,
            n_objects: 3,
            n_locations: 2,
            seq_len: 60,
            motor_dims: 7,
            noise_std: 0.01,
            seed: 21,
            selection: SequenceSelection::Sample(6),
        }
    }

    #[test]
    fn multimodal_structure_and_determinism() {
        let spec = small_spec();
        let set = gen_multimodal(&spec).unwrap();
        assert_eq!(set.sequences.len(), 6);
        let ids: HashSet<&str> = set.sequences.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids.len(), 6, "sampled combinations must be distinct");
        for s in &set.sequences {
            assert_eq!(s.data.cols(), 9);
            assert_eq!(s.data.rows(), 60);
            // Command dims constant over time; motor dims bounded.
            for k in 0..s.data.rows() {
                assert_eq!(s.data.get(k, 0), s.data.get(0, 0));
                assert_eq!(s.data.get(k, 1), s.data.get(0, 1));
                for j in 2..9 {
                    assert!(s.data.get(k, j).abs() <= 1.0);
                }
            }
        }
        let again = gen_multimodal(&spec).unwrap();
        for (a, b) in set.sequences.iter().zip(&again.sequences) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.data.data(), b.data.data());
        }
    }

    /// Same object and location, different action: the motor trajectories
    /// are bit-identical until the late window opens, then diverge. The
    /// action is therefore only recoverable from the command dims fixed at
    /// the first step — the long-range dependency the gated cell targets.
    #[test]
    fn multimodal_action_only_shows_in_the_late_window() {
        let spec = MultimodalSpec {
            n_actions: 2,
            n_objects: 1,
            n_locations: 1,
            seq_len: 80,
            motor_dims: 9,
            noise_std: 0.0,
            seed: 3,
            selection: SequenceSelection::Sweep,
        };
        let set = gen_multimodal(&spec).unwrap();
        assert_eq!(set.sequences.len(), 2);
        let (a, b) = (&set.sequences[0].data, &set.sequences[1].data);
        let k0 = (0.6f64 * 79.0).floor() as usize;

        assert_ne!(a.get(0, 0), b.get(0, 0), "verb codes must differ");
        assert_eq!(a.get(0, 1), b.get(0, 1), "same object, same noun code");
        let mut late_diff = 0.0f64;
        for j in 2..11 {
            for k in 0..k0 {
                assert_eq!(a.get(k, j), b.get(k, j), "early window must match (k={k}, d={j})");
            }
            for k in k0..80 {
                late_diff = late_diff.max((a.get(k, j) - b.get(k, j)).abs());
            }
        }
        assert!(late_diff > 0.05, "late windows barely differ: {late_diff}");
    }

    #[test]
    fn sweep_covers_every_pair() {
        let spec = MultimodalSpec {
            n_actions: 3,
            n_objects: 2,
            n_locations: 2,
            seq_len: 10,
            motor_dims: 2,
            noise_std: 0.0,
            seed: 1,
            selection: SequenceSelection::Sweep,
        };
        let set = gen_multimodal(&spec).unwrap();
        assert_eq!(set.sequences.len(), 6);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = small_spec();
        spec.n_actions = 10;
        assert!(gen_multimodal(&spec).is_err());
        let mut spec = small_spec();
        spec.noise_std = -0.1;
        assert!(gen_multimodal(&spec).is_err());
        let mut spec = small_spec();
        spec.selection = SequenceSelection::Sample(1000);
        assert!(gen_multimodal(&spec).is_err());
    }

    #[test]
    fn save_load_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for set in [gen_case1(), gen_multimodal(&small_spec()).unwrap()] {
            let sub = dir.path().join(&set.generator);
            save_set(&set, &sub).unwrap();
            let loaded = load_set(&sub).unwrap();
            assert_eq!(loaded.generator, set.generator);
            assert_eq!(loaded.seed, set.seed);
            assert_eq!(loaded.params, set.params);
            assert_eq!(loaded.sequences.len(), set.sequences.len());
            for (a, b) in loaded.sequences.iter().zip(&set.sequences) {
                assert_eq!(a.id, b.id);
                assert_eq!(a.data.data(), b.data.data(), "round trip must be bit-exact");
            }
        }
    }

    #[test]
    fn load_errors_name_the_problem() {
        let dir = tempfile::tempdir().unwrap();

        // Missing manifest.
        let err = load_set(&dir.path().join("nowhere")).unwrap_err();
        assert!(err.to_string().contains("nowhere"));

        // Corrupt cell.
        let sub = dir.path().join("corrupt");
        save_set(&gen_case1(), &sub).unwrap();
        let csv = sub.join("pattern_1.csv");
        let mut text = std::fs::read_to_string(&csv).unwrap();
        text = text.replacen("0.", "zz.", 1);
        std::fs::write(&csv, text).unwrap();
        let err = load_set(&sub).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pattern_1.csv") && msg.contains("not a number"), "{msg}");

        // Dims disagreeing across manifest entries are named with both dims.
        let sub = dir.path().join("dims");
        std::fs::create_dir_all(&sub).unwrap();
        std::fs::write(sub.join("a.csv"), "d0,d1\n0,0\n1,1\n").unwrap();
        std::fs::write(sub.join("b.csv"), "d0,d1,d2\n0,0,0\n1,1,1\n").unwrap();
        std::fs::write(
            sub.join("manifest.json"),
            r#"{"generator":"external","params":{},"sequences":[
                {"id":"a","file":"a.csv","t":2,"d":2},
                {"id":"b","file":"b.csv","t":2,"d":3}]}"#,
        )
        .unwrap();
        let err = load_set(&sub).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("d=2") && msg.contains("d=3"), "{msg}");

        // A file whose shape contradicts its manifest entry.
        let sub = dir.path().join("shape");
        save_set(&gen_case1(), &sub).unwrap();
        let csv = sub.join("pattern_2.csv");
        let text = std::fs::read_to_string(&csv).unwrap();
        let truncated: Vec<&str> = text.lines().take(50).collect();
        std::fs::write(&csv, truncated.join("\n")).unwrap();
        let err = load_set(&sub).unwrap_err();
        assert!(err.to_string().contains("manifest says t=100"), "{err}");
    }
}
