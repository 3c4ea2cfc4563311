//! Job classes, workload specs, and arrival-stream generation.
//!
//! A workload is a set of job classes over `k` servers; class-`i` jobs need
//! `i` servers, arrive Poisson at rate λᵢ, and have exponential sizes with
//! mean 1/μᵢ. Class tables load from JSON (`{k, classes: [{need,
//! rate|fraction, mean_size}]}`, fractions scaled by a required `total_rate`)
//! or CSV (`need,rate,mean_size` header; k defaults to the largest need, the
//! convention used for trace-derived tables).
//!
//! Arrival generation draws one independent ChaCha substream per class, so
//! adding or removing a class never perturbs another class's jobs and two
//! policies run against the same seed consume identical streams.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One job class: server need, arrival rate, mean size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub need: usize,
    pub arrival_rate: f64,
    pub mean_size: f64,
}

impl ClassSpec {
    pub fn service_rate(&self) -> f64 {
        1.0 / self.mean_size
    }
}

/// A validated workload: k servers and classes sorted by ascending need,
/// at most one class per need.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadSpec {
    k: usize,
    classes: Vec<ClassSpec>,
}

impl WorkloadSpec {
    pub fn new(k: usize, mut classes: Vec<ClassSpec>) -> Result<Self> {
        if k < 1 {
            return Err(Error::workload("k must be at least 1"));
        }
        if classes.is_empty() {
            return Err(Error::workload("workload needs at least one class"));
        }
        classes.sort_by_key(|c| c.need);
        for pair in classes.windows(2) {
            if pair[0].need == pair[1].need {
                return Err(Error::workload(format!(
                    "duplicate class for need {}",
                    pair[0].need
                )));
            }
        }
        for c in &classes {
            if c.need < 1 || c.need > k {
                return Err(Error::workload(format!(
                    "class need {} outside 1..={k}",
                    c.need
                )));
            }
            if !(c.arrival_rate >= 0.0) {
                return Err(Error::workload(format!(
                    "class {} has negative or NaN arrival rate",
                    c.need
                )));
            }
            if !(c.mean_size > 0.0) {
                return Err(Error::workload(format!(
                    "class {} has nonpositive mean size",
                    c.need
                )));
            }
        }
        Ok(WorkloadSpec { k, classes })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> &[ClassSpec] {
        &self.classes
    }

    pub fn total_rate(&self) -> f64 {
        self.classes.iter().map(|c| c.arrival_rate).sum()
    }

    /// Per-class arrival fractions p_i = λ_i/λ (empty-load guard: zeros).
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total_rate();
        self.classes
            .iter()
            .map(|c| if total > 0.0 { c.arrival_rate / total } else { 0.0 })
            .collect()
    }

    /// Same class mix rescaled so the total arrival rate is `total`.
    pub fn scaled_to(&self, total: f64) -> Result<WorkloadSpec> {
        if !(total >= 0.0) {
            return Err(Error::workload("total rate must be nonnegative"));
        }
        let current = self.total_rate();
        if current <= 0.0 {
            return Err(Error::workload(
                "cannot rescale a workload with zero total rate",
            ));
        }
        let classes = self
            .classes
            .iter()
            .map(|c| ClassSpec {
                need: c.need,
                arrival_rate: c.arrival_rate / current * total,
                mean_size: c.mean_size,
            })
            .collect();
        WorkloadSpec::new(self.k, classes)
    }

    /// ρ_j = j·λ_j/μ_j per class, and the total ρ.
    pub fn load_share(&self) -> (Vec<f64>, f64) {
        let per: Vec<f64> = self
            .classes
            .iter()
            .map(|c| c.need as f64 * c.arrival_rate * c.mean_size)
            .collect();
        let total = per.iter().sum();
        (per, total)
    }

    /// Needs are a subset of {1, k}.
    pub fn one_or_all(&self) -> bool {
        self.classes.iter().all(|c| c.need == 1 || c.need == self.k)
    }

    pub fn class_index(&self, need: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.need == need)
    }

    pub fn load(path: impl AsRef<Path>, format: WorkloadFormat) -> Result<WorkloadSpec> {
        let text = std::fs::read_to_string(path)?;
        match format {
            WorkloadFormat::Json => Self::from_json_str(&text),
            WorkloadFormat::Csv => Self::from_csv_str(&text),
        }
    }

    pub fn from_json_str(text: &str) -> Result<WorkloadSpec> {
        let raw: RawWorkload =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("workload JSON: {e}")))?;
        raw.resolve()
    }

    /// CSV with header `need,rate,mean_size`; k is the largest need.
    pub fn from_csv_str(text: &str) -> Result<WorkloadSpec> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(format!("workload CSV: {e}")))?
            .clone();
        let expect = ["need", "rate", "mean_size"];
        let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
        if got != expect {
            return Err(Error::parse(format!(
                "workload CSV header must be need,rate,mean_size (got {})",
                got.join(",")
            )));
        }
        let mut classes = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(format!("workload CSV: {e}")))?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::parse("short CSV row".to_string()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(format!("workload CSV field: {e}")))
            };
            let need = field(0)?;
            if need.fract() != 0.0 || need < 1.0 {
                return Err(Error::parse(format!("need must be a positive integer, got {need}")));
            }
            classes.push(ClassSpec {
                need: need as usize,
                arrival_rate: field(1)?,
                mean_size: field(2)?,
            });
        }
        let k = classes.iter().map(|c| c.need).max().ok_or_else(|| {
            Error::parse("workload CSV has no data rows".to_string())
        })?;
        WorkloadSpec::new(k, classes)
    }
}

/// On-disk JSON schema. Rows carry either `rate` for every class or
/// `fraction` for every class; fractions require a top-level `total_rate`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawWorkload {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_rate: Option<f64>,
    pub classes: Vec<RawClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawClass {
    pub need: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    pub mean_size: f64,
}

impl RawWorkload {
    pub fn resolve(&self) -> Result<WorkloadSpec> {
        let any_rate = self.classes.iter().any(|c| c.rate.is_some());
        let any_fraction = self.classes.iter().any(|c| c.fraction.is_some());
        if any_rate && any_fraction {
            return Err(Error::workload(
                "classes mix `rate` and `fraction`; use exactly one of the two",
            ));
        }
        if !any_rate && !any_fraction {
            return Err(Error::workload(
                "every class needs either `rate` or `fraction`",
            ));
        }
        let classes: Vec<ClassSpec> = if any_rate {
            if self.total_rate.is_some() {
                return Err(Error::workload(
                    "`total_rate` is only meaningful with fractional classes",
                ));
            }
            self.classes
                .iter()
                .map(|c| {
                    let rate = c
                        .rate
                        .ok_or_else(|| Error::workload(format!("class {} is missing `rate`", c.need)))?;
                    Ok(ClassSpec { need: c.need, arrival_rate: rate, mean_size: c.mean_size })
                })
                .collect::<Result<_>>()?
        } else {
            let total = self.total_rate.ok_or_else(|| {
                Error::workload("fractional classes need a top-level `total_rate`")
            })?;
            if !(total >= 0.0) {
                return Err(Error::workload("`total_rate` must be nonnegative"));
            }
            let sum: f64 = self
                .classes
                .iter()
                .map(|c| c.fraction.unwrap_or(f64::NAN))
                .sum();
            if !((sum - 1.0).abs() < 1e-9) {
                return Err(Error::workload(format!(
                    "fractions must sum to 1, got {sum}"
                )));
            }
            self.classes
                .iter()
                .map(|c| {
                    let fraction = c.fraction.ok_or_else(|| {
                        Error::workload(format!("class {} is missing `fraction`", c.need))
                    })?;
                    Ok(ClassSpec {
                        need: c.need,
                        arrival_rate: fraction * total,
                        mean_size: c.mean_size,
                    })
                })
                .collect::<Result<_>>()?
        };
        WorkloadSpec::new(self.k, classes)
    }

    pub fn from_spec(spec: &WorkloadSpec) -> RawWorkload {
        RawWorkload {
            k: spec.k(),
            total_rate: None,
            classes: spec
                .classes()
                .iter()
                .map(|c| RawClass {
                    need: c.need,
                    rate: Some(c.arrival_rate),
                    fraction: None,
                    mean_size: c.mean_size,
                })
                .collect(),
        }
    }
}

pub enum WorkloadFormat {
    Json,
    Csv,
}

/// A generated job: ids strictly increase in merged arrival order, and the
/// size is fixed at generation time so coupled runs agree on every job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub id: u64,
    pub need: usize,
    pub size: f64,
    pub arrival: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the per-class substream: scrambles (seed, need) through two
/// splitmix rounds, so class streams are mutually independent.
pub(crate) fn class_stream_seed(seed: u64, need: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(need as u64 + 1))
}

/// Seed of the policy-internal substream (nMSR chain), disjoint from every
/// class stream.
pub(crate) fn policy_stream_seed(seed: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ 0xA5A5_5A5A_DEAD_BEEF)
}

/// Generate the merged arrival stream up to `horizon`. Per class the gaps
/// are i.i.d. exponential(λ) and the sizes i.i.d. exponential(μ), drawn
/// gap-size-gap-size from the class substream.
pub fn generate_arrivals(spec: &WorkloadSpec, horizon: f64, seed: u64) -> Vec<Job> {
    let mut streams: Vec<Vec<(f64, f64, usize)>> = Vec::new();
    for class in spec.classes() {
        if class.arrival_rate <= 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(class_stream_seed(seed, class.need));
        let gap = Exp::new(class.arrival_rate).expect("positive rate");
        let size = Exp::new(class.service_rate()).expect("positive service rate");
        let mut t = 0.0;
        let mut out = Vec::new();
        loop {
            t += gap.sample(&mut rng);
            if t > horizon {
                break;
            }
            out.push((t, size.sample(&mut rng), class.need));
        }
        streams.push(out);
    }
    let mut merged: Vec<(f64, f64, usize)> = streams.concat();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    merged
        .into_iter()
        .enumerate()
        .map(|(i, (arrival, size, need))| Job {
            id: i as u64,
            need,
            size,
            arrival,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_or_all_json(lambda: f64) -> String {
        format!(
            r#"{{"k": 32, "total_rate": {lambda},
                 "classes": [
                   {{"need": 1, "fraction": 0.9, "mean_size": 1.0}},
                   {{"need": 32, "fraction": 0.1, "mean_size": 1.0}}
                 ]}}"#
        )
    }

    #[test]
    fn one_or_all_fractions_scale_to_rates() {
        let spec = WorkloadSpec::from_json_str(&one_or_all_json(7.5)).unwrap();
        assert_eq!(spec.k(), 32);
        assert!((spec.classes()[0].arrival_rate - 6.75).abs() < 1e-12);
        assert!((spec.classes()[1].arrival_rate - 0.75).abs() < 1e-12);
        assert!(spec.one_or_all());
    }

    #[test]
    fn single_class_degenerate() {
        let spec = WorkloadSpec::from_json_str(
            r#"{"k": 1, "classes": [{"need": 1, "rate": 1.0, "mean_size": 1.0}]}"#,
        )
        .unwrap();
        assert_eq!(spec.fractions(), vec![1.0]);
    }

    #[test]
    fn four_class_fraction_table() {
        let spec = WorkloadSpec::from_json_str(
            r#"{"k": 15, "total_rate": 4.0, "classes": [
                {"need": 1, "fraction": 0.5, "mean_size": 1.0},
                {"need": 3, "fraction": 0.25, "mean_size": 1.0},
                {"need": 5, "fraction": 0.2, "mean_size": 1.0},
                {"need": 15, "fraction": 0.05, "mean_size": 1.0}]}"#,
        )
        .unwrap();
        let rates: Vec<f64> = spec.classes().iter().map(|c| c.arrival_rate).collect();
        for (got, want) in rates.iter().zip([2.0, 1.0, 0.8, 0.2]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_takes_k_from_largest_need() {
        let spec = WorkloadSpec::from_csv_str("need,rate,mean_size\n1,6.75,1.0\n32,0.75,1.0\n").unwrap();
        assert_eq!(spec.k(), 32);
        assert_eq!(spec.classes().len(), 2);
    }

    #[test]
    fn rejects_malformed_tables() {
        // duplicate need
        assert!(WorkloadSpec::from_json_str(
            r#"{"k": 4, "classes": [{"need": 1, "rate": 1.0, "mean_size": 1.0},
                                     {"need": 1, "rate": 2.0, "mean_size": 1.0}]}"#
        )
        .is_err());
        // need > k
        assert!(WorkloadSpec::from_json_str(
            r#"{"k": 4, "classes": [{"need": 5, "rate": 1.0, "mean_size": 1.0}]}"#
        )
        .is_err());
        // nonpositive mean size
        assert!(WorkloadSpec::from_json_str(
            r#"{"k": 4, "classes": [{"need": 1, "rate": 1.0, "mean_size": 0.0}]}"#
        )
        .is_err());
        // mixed rate and fraction
        assert!(WorkloadSpec::from_json_str(
            r#"{"k": 4, "total_rate": 1.0,
                "classes": [{"need": 1, "rate": 1.0, "mean_size": 1.0},
                            {"need": 2, "fraction": 0.5, "mean_size": 1.0}]}"#
        )
        .is_err());
        // fractions without total_rate
        assert!(WorkloadSpec::from_json_str(
            r#"{"k": 4, "classes": [{"need": 1, "fraction": 1.0, "mean_size": 1.0}]}"#
        )
        .is_err());
        // bad CSV header
        assert!(WorkloadSpec::from_csv_str("need,lambda,mean\n1,1,1\n").is_err());
    }

    #[test]
    fn load_share_example() {
        let spec = WorkloadSpec::from_json_str(&one_or_all_json(7.5)).unwrap();
        let (per, total) = spec.load_share();
        assert!((per[0] - 6.75).abs() < 1e-12);
        assert!((per[1] - 24.0).abs() < 1e-12);
        assert!((total - 30.75).abs() < 1e-12);

        let single = WorkloadSpec::new(
            3,
            vec![ClassSpec { need: 1, arrival_rate: 0.5, mean_size: 2.0 }],
        )
        .unwrap();
        let (per, total) = single.load_share();
        assert!((per[0] - 1.0).abs() < 1e-12);
        assert!((total - 1.0).abs() < 1e-12);

        let idle = WorkloadSpec::new(
            3,
            vec![ClassSpec { need: 2, arrival_rate: 0.0, mean_size: 1.0 }],
        )
        .unwrap();
        assert_eq!(idle.load_share().1, 0.0);
    }

    #[test]
    fn zero_rate_class_emits_no_jobs() {
        let spec = WorkloadSpec::new(
            4,
            vec![
                ClassSpec { need: 1, arrival_rate: 1.0, mean_size: 1.0 },
                ClassSpec { need: 4, arrival_rate: 0.0, mean_size: 1.0 },
            ],
        )
        .unwrap();
        let jobs = generate_arrivals(&spec, 100.0, 7);
        assert!(jobs.iter().all(|j| j.need == 1));
    }

    #[test]
    fn generation_is_deterministic_and_sorted() {
        let spec = WorkloadSpec::from_json_str(&one_or_all_json(6.0)).unwrap();
        let a = generate_arrivals(&spec, 500.0, 42);
        let b = generate_arrivals(&spec, 500.0, 42);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].arrival <= w[1].arrival));
        assert!(a.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn adding_a_class_leaves_other_streams_untouched() {
        let base = WorkloadSpec::new(
            8,
            vec![ClassSpec { need: 1, arrival_rate: 1.0, mean_size: 1.0 }],
        )
        .unwrap();
        let extended = WorkloadSpec::new(
            8,
            vec![
                ClassSpec { need: 1, arrival_rate: 1.0, mean_size: 1.0 },
                ClassSpec { need: 8, arrival_rate: 0.5, mean_size: 2.0 },
            ],
        )
        .unwrap();
        let a: Vec<(f64, f64)> = generate_arrivals(&base, 200.0, 11)
            .into_iter()
            .map(|j| (j.arrival, j.size))
            .collect();
        let b: Vec<(f64, f64)> = generate_arrivals(&extended, 200.0, 11)
            .into_iter()
            .filter(|j| j.need == 1)
            .map(|j| (j.arrival, j.size))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_count_within_three_sigma() {
        let spec = WorkloadSpec::new(
            1,
            vec![ClassSpec { need: 1, arrival_rate: 1.0, mean_size: 1.0 }],
        )
        .unwrap();
        let horizon = 1e6;
        let n = generate_arrivals(&spec, horizon, 1234).len() as f64;
        assert!((n - horizon).abs() < 3.0 * horizon.sqrt(), "count {n}");
    }

    /// Kolmogorov–Smirnov against the exponential gap distribution at the
    /// 0.01 level on 1e5 samples per class.
    #[test]
    fn interarrival_gaps_pass_ks() {
        let spec = WorkloadSpec::from_json_str(&one_or_all_json(6.0)).unwrap();
        let horizon = 1.2e5 / 0.75; // at least 1e5 arrivals for the slower class
        let jobs = generate_arrivals(&spec, horizon, 99);
        for class in spec.classes() {
            let times: Vec<f64> = jobs
                .iter()
                .filter(|j| j.need == class.need)
                .map(|j| j.arrival)
                .collect();
            let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.truncate(100_000);
            assert!(gaps.len() == 100_000, "need 1e5 samples, got {}", gaps.len());
            gaps.sort_by(|a, b| a.total_cmp(b));
            let n = gaps.len() as f64;
            let mut d: f64 = 0.0;
            for (i, g) in gaps.iter().enumerate() {
                let cdf = 1.0 - (-class.arrival_rate * g).exp();
                let hi = (i + 1) as f64 / n - cdf;
                let lo = cdf - i as f64 / n;
                d = d.max(hi).max(lo);
            }
            let critical = 1.628 / n.sqrt(); // alpha = 0.01
            assert!(d < critical, "class {}: D={d} critical={critical}", class.need);
        }
    }

    #[test]
    fn rates_to_fractions_round_trip() {
        let spec = WorkloadSpec::from_json_str(
            r#"{"k": 15, "classes": [
                {"need": 1, "rate": 2.0, "mean_size": 1.0},
                {"need": 3, "rate": 1.0, "mean_size": 0.5},
                {"need": 5, "rate": 0.8, "mean_size": 2.0},
                {"need": 15, "rate": 0.2, "mean_size": 1.0}]}"#,
        )
        .unwrap();
        let total = spec.total_rate();
        let back = spec.scaled_to(total).unwrap();
        for (a, b) in spec.classes().iter().zip(back.classes()) {
            assert!((a.arrival_rate - b.arrival_rate).abs() <= 1e-12 * a.arrival_rate.abs());
        }
    }
}
