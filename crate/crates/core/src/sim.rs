//! Event-driven simulation of the k-server system.
//!
//! One run is a single-threaded event loop over a pre-generated arrival
//! stream: maintain `(n, u, z)`, process arrivals, completions, and policy
//! timers in nondecreasing time order, re-run the policy's decision
//! procedure after every event, and record per-job and per-phase
//! measurements. Completion times are fixed at admission (sizes are fixed at
//! generation), so two policies run against the same seed consume identical
//! randomness and differ only through their decisions.
//!
//! Simultaneous events are ordered completion, then policy timer, then
//! arrival; ties among completions break by admission sequence. Jobs that
//! arrive before the warmup cutoff still occupy the system but are excluded
//! from response-time aggregates.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::policy::{PhaseTag, PolicyConfig, PolicyRuntime, SchedView};
use crate::workload::{generate_arrivals, WorkloadSpec};

/// Number of batches for batch-means confidence intervals.
pub const BATCHES: usize = 20;
/// Number of horizon buckets for time-average occupancy diagnostics.
pub const N_BUCKETS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    /// Keep per-job records (needed for coupling and jobs.csv export).
    pub record_jobs: bool,
    /// Sample the occupancy vector on every n-changing event.
    pub record_series: bool,
    /// Keep every `series_stride`-th sample.
    pub series_stride: usize,
}

impl SimConfig {
    pub fn new(horizon: f64, warmup: f64, seed: u64) -> Self {
        SimConfig {
            horizon,
            warmup,
            seed,
            record_jobs: true,
            record_series: false,
            series_stride: 1,
        }
    }

    /// Aggregates only; no per-job records. For long runs.
    pub fn streaming(horizon: f64, warmup: f64, seed: u64) -> Self {
        SimConfig {
            record_jobs: false,
            ..Self::new(horizon, warmup, seed)
        }
    }

    pub fn with_series(mut self, stride: usize) -> Self {
        self.record_series = true;
        self.series_stride = stride.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > self.warmup && self.warmup >= 0.0) {
            return Err(Error::sim(format!(
                "need horizon > warmup >= 0, got horizon={}, warmup={}",
                self.horizon, self.warmup
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JobRecord {
    pub id: u64,
    pub need: usize,
    pub arrival: f64,
    pub start: f64,
    pub completion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub tag: PhaseTag,
    pub entry: f64,
    pub exit: f64,
    /// Occupancy per class at phase entry.
    pub n_at_entry: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub n: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct ClassTally {
    pub need: usize,
    pub completed: u64,
    pub sum_response: f64,
    pub batch_count: [u64; BATCHES],
    pub batch_sum: [f64; BATCHES],
}

#[derive(Debug, Clone, Default)]
pub struct RunTallies {
    pub per_class: Vec<ClassTally>,
    pub arrivals: u64,
    pub completions: u64,
    /// ∫ Σᵢ i·uᵢ dt — server-busy time.
    pub busy_time: f64,
    /// Σ over served jobs of need × served duration (clipped at horizon).
    pub served_time: f64,
    /// ∫ Σᵢ nᵢ dt — for time-average occupancy.
    pub n_time: f64,
    /// ∫ total-n dt per horizon twentieth, for growth diagnostics.
    pub n_buckets: [f64; N_BUCKETS],
    /// Phase-1 entries and how many found no large job waiting.
    pub p1_entries: u64,
    pub p1_no_large: u64,
    /// Phase-2 entries and how many found fewer than k small jobs.
    pub p2_entries: u64,
    pub p2_below_k: u64,
}

#[derive(Debug, Clone)]
pub struct EventLog {
    pub policy: String,
    pub k: usize,
    pub needs: Vec<usize>,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub jobs: Vec<JobRecord>,
    pub phases: Vec<PhaseRecord>,
    pub series: Vec<SeriesPoint>,
    pub tallies: RunTallies,
}

struct CompletionEvent {
    time: f64,
    seq: u64,
    class: usize,
    record: JobRecord,
}

impl PartialEq for CompletionEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for CompletionEvent {}
impl PartialOrd for CompletionEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CompletionEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest first.
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Run one simulation.
pub fn run(spec: &WorkloadSpec, policy: &PolicyConfig, cfg: &SimConfig) -> Result<EventLog> {
    cfg.validate()?;
    let arrivals = generate_arrivals(spec, cfg.horizon, cfg.seed);
    let mut rt = PolicyRuntime::new(policy, spec, cfg.seed)?;

    let k = spec.k();
    let needs: Vec<usize> = spec.classes().iter().map(|c| c.need).collect();
    let classes = needs.len();
    let small_idx = spec.class_index(1);
    let large_idx = spec.class_index(k);

    let mut queues: Vec<VecDeque<crate::workload::Job>> = vec![VecDeque::new(); classes];
    let mut n = vec![0usize; classes];
    let mut u = vec![0usize; classes];
    let mut completions: BinaryHeap<CompletionEvent> = BinaryHeap::new();
    let mut admit_seq: u64 = 0;

    let mut tallies = RunTallies {
        per_class: needs
            .iter()
            .map(|&need| ClassTally {
                need,
                ..ClassTally::default()
            })
            .collect(),
        ..RunTallies::default()
    };
    let mut jobs_out: Vec<JobRecord> = Vec::new();
    let mut phases: Vec<PhaseRecord> = Vec::new();
    let mut series: Vec<SeriesPoint> = Vec::new();
    let mut series_counter: usize = 0;

    let mut clock = 0.0f64;
    let mut open_phase: Option<(PhaseTag, f64, Vec<u32>)> =
        rt.initial_tag(&needs).map(|tag| (tag, 0.0, vec![0; classes]));

    let span = cfg.horizon - cfg.warmup;
    let bucket_len = cfg.horizon / N_BUCKETS as f64;

    let mut arr_idx = 0usize;

    macro_rules! integrate {
        ($to:expr) => {{
            let to: f64 = $to;
            if to > clock {
                let busy: usize = needs.iter().zip(&u).map(|(need, cnt)| need * cnt).sum();
                let n_tot: usize = n.iter().sum();
                let dt = to - clock;
                tallies.busy_time += busy as f64 * dt;
                tallies.n_time += n_tot as f64 * dt;
                // Spread ∫n dt across horizon buckets.
                let mut t0 = clock;
                while t0 < to {
                    let b = ((t0 / bucket_len) as usize).min(N_BUCKETS - 1);
                    let edge = ((b + 1) as f64 * bucket_len).min(to);
                    tallies.n_buckets[b] += n_tot as f64 * (edge - t0);
                    t0 = edge;
                }
            }
        }};
    }

    enum Kind {
        Completion,
        Timer,
        Arrival,
    }

    loop {
        let t_arr = arrivals.get(arr_idx).map_or(f64::INFINITY, |j| j.arrival);
        let t_comp = completions.peek().map_or(f64::INFINITY, |c| c.time);
        let t_timer = rt.next_timer();
        let (t_next, kind) = if t_comp <= t_timer && t_comp <= t_arr {
            (t_comp, Kind::Completion)
        } else if t_timer <= t_arr {
            (t_timer, Kind::Timer)
        } else {
            (t_arr, Kind::Arrival)
        };
        if !t_next.is_finite() || t_next > cfg.horizon {
            break;
        }
        integrate!(t_next);
        clock = t_next;

        let mut entered: Vec<PhaseTag> = Vec::new();
        let mut n_changed = false;
        match kind {
            Kind::Completion => {
                let ev = completions.pop().expect("peeked");
                u[ev.class] -= 1;
                n[ev.class] -= 1;
                n_changed = true;
                tallies.completions += 1;
                tallies.served_time +=
                    ev.record.need as f64 * (ev.record.completion - ev.record.start);
                if ev.record.arrival >= cfg.warmup {
                    let tally = &mut tallies.per_class[ev.class];
                    let response = ev.record.completion - ev.record.arrival;
                    let b = (((ev.record.completion - cfg.warmup) / span * BATCHES as f64) as usize)
                        .min(BATCHES - 1);
                    tally.completed += 1;
                    tally.sum_response += response;
                    tally.batch_count[b] += 1;
                    tally.batch_sum[b] += response;
                }
                if cfg.record_jobs {
                    jobs_out.push(ev.record);
                }
            }
            Kind::Timer => {
                if let Some(tag) = rt.on_timer(clock) {
                    entered.push(tag);
                }
            }
            Kind::Arrival => {
                let job = arrivals[arr_idx];
                arr_idx += 1;
                let class = needs
                    .iter()
                    .position(|&need| need == job.need)
                    .expect("job class exists");
                queues[class].push_back(job);
                n[class] += 1;
                n_changed = true;
                tallies.arrivals += 1;
            }
        }

        let decision = {
            let view = SchedView {
                k,
                needs: &needs,
                n: &n,
                u: &u,
                queues: &queues,
            };
            rt.decide(&view)
        };
        entered.extend(decision.entered.iter().copied());

        for tag in entered {
            if let Some((old_tag, entry, n_snapshot)) = open_phase.take() {
                phases.push(PhaseRecord {
                    tag: old_tag,
                    entry,
                    exit: clock,
                    n_at_entry: n_snapshot,
                });
            }
            let snapshot: Vec<u32> = n.iter().map(|&x| x as u32).collect();
            match tag {
                PhaseTag::P1 => {
                    tallies.p1_entries += 1;
                    if large_idx.map_or(0, |i| n[i]) == 0 {
                        tallies.p1_no_large += 1;
                    }
                }
                PhaseTag::P2 => {
                    tallies.p2_entries += 1;
                    if small_idx.map_or(0, |i| n[i]) < k {
                        tallies.p2_below_k += 1;
                    }
                }
                _ => {}
            }
            open_phase = Some((tag, clock, snapshot));
        }

        for (class, &count) in decision.admit.iter().enumerate() {
            for _ in 0..count {
                let job = queues[class].pop_front().expect("admission from empty queue");
                u[class] += 1;
                admit_seq += 1;
                completions.push(CompletionEvent {
                    time: clock + job.size,
                    seq: admit_seq,
                    class,
                    record: JobRecord {
                        id: job.id,
                        need: job.need,
                        arrival: job.arrival,
                        start: clock,
                        completion: clock + job.size,
                    },
                });
            }
        }
        debug_assert!(
            needs.iter().zip(&u).map(|(need, cnt)| need * cnt).sum::<usize>() <= k,
            "feasibility violated"
        );
        debug_assert!(n
            .iter()
            .zip(&u)
            .zip(&queues)
            .all(|((&ni, &ui), q)| ni == ui + q.len()));

        if cfg.record_series && n_changed {
            if series_counter % cfg.series_stride == 0 {
                series.push(SeriesPoint {
                    t: clock,
                    n: n.iter().map(|&x| x as u32).collect(),
                });
            }
            series_counter += 1;
        }
    }

    integrate!(cfg.horizon);
    // Account the service the still-running jobs received by the horizon.
    for ev in completions.iter() {
        tallies.served_time += ev.record.need as f64 * (cfg.horizon - ev.record.start);
    }
    if let Some((tag, entry, n_snapshot)) = open_phase.take() {
        phases.push(PhaseRecord {
            tag,
            entry,
            exit: cfg.horizon,
            n_at_entry: n_snapshot,
        });
    }

    Ok(EventLog {
        policy: rt.label().to_string(),
        k,
        needs,
        horizon: cfg.horizon,
        warmup: cfg.warmup,
        seed: cfg.seed,
        jobs: jobs_out,
        phases,
        series,
        tallies,
    })
}

/// Per-phase aggregates measured from the log.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseAggregate {
    pub tag: PhaseTag,
    /// Closed phase intervals observed after the cutoff.
    pub count: u64,
    pub mean_duration: f64,
    pub second_moment: f64,
    /// Fraction of post-cutoff time spent in this phase.
    pub time_fraction: f64,
    pub mean_n_at_entry: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseStats {
    pub per_phase: Vec<PhaseAggregate>,
    /// False when no complete phase interval was observed.
    pub complete: bool,
}

/// Aggregate phase durations, time fractions, and entry occupancies over
/// intervals after `from` (pass the warmup cutoff, or 0.0 for everything).
pub fn measure_phase_stats(log: &EventLog, from: f64) -> PhaseStats {
    let mut order: Vec<PhaseTag> = Vec::new();
    let mut time_in: Vec<f64> = Vec::new();
    let mut durations: Vec<(u64, f64, f64)> = Vec::new(); // count, sum, sum sq
    let mut entry_n: Vec<Vec<f64>> = Vec::new();
    let span = log.horizon - from;
    for rec in &log.phases {
        let overlap = (rec.exit.min(log.horizon) - rec.entry.max(from)).max(0.0);
        if overlap == 0.0 && !(rec.entry >= from && rec.exit >= from) {
            continue;
        }
        let idx = match order.iter().position(|&t| t == rec.tag) {
            Some(i) => i,
            None => {
                order.push(rec.tag);
                time_in.push(0.0);
                durations.push((0, 0.0, 0.0));
                entry_n.push(vec![0.0; log.needs.len()]);
                order.len() - 1
            }
        };
        time_in[idx] += overlap;
        // Durations only from intervals fully inside (from, horizon): the
        // final interval is clipped at the horizon and would bias them.
        if rec.entry >= from && rec.exit < log.horizon {
            let d = rec.exit - rec.entry;
            durations[idx].0 += 1;
            durations[idx].1 += d;
            durations[idx].2 += d * d;
            for (acc, &x) in entry_n[idx].iter_mut().zip(&rec.n_at_entry) {
                *acc += x as f64;
            }
        }
    }
    let complete = durations.iter().any(|&(count, _, _)| count > 0);
    let per_phase = order
        .into_iter()
        .enumerate()
        .map(|(i, tag)| {
            let (count, sum, sumsq) = durations[i];
            let cf = count as f64;
            PhaseAggregate {
                tag,
                count,
                mean_duration: if count > 0 { sum / cf } else { f64::NAN },
                second_moment: if count > 0 { sumsq / cf } else { f64::NAN },
                time_fraction: time_in[i] / span,
                mean_n_at_entry: entry_n[i]
                    .iter()
                    .map(|&s| if count > 0 { s / cf } else { f64::NAN })
                    .collect(),
            }
        })
        .collect();
    PhaseStats { per_phase, complete }
}

/// Paired comparison of two runs driven by the same workload, seed, and
/// horizon (common random numbers).
#[derive(Debug, Clone, Serialize)]
pub struct PairedComparison {
    pub jobs_compared: usize,
    /// Every start and completion time agrees bitwise.
    pub identical: bool,
    /// mean(T_b - T_a) over jobs completed in both runs.
    pub mean_response_diff: f64,
    pub mean_response_a: f64,
    pub mean_response_b: f64,
}

pub fn couple(a: &EventLog, b: &EventLog) -> Result<PairedComparison> {
    if a.seed != b.seed || a.horizon != b.horizon || a.k != b.k || a.needs != b.needs {
        return Err(Error::sim(
            "coupled runs need identical workload, horizon, and seed".to_string(),
        ));
    }
    if a.jobs.is_empty() && b.jobs.is_empty() && a.tallies.arrivals > 0 {
        return Err(Error::sim(
            "coupling requires per-job records; run with record_jobs".to_string(),
        ));
    }
    let mut by_id: std::collections::HashMap<u64, &JobRecord> =
        std::collections::HashMap::with_capacity(a.jobs.len());
    for rec in &a.jobs {
        by_id.insert(rec.id, rec);
    }
    let mut compared = 0usize;
    let mut identical = a.jobs.len() == b.jobs.len();
    let mut sum_diff = 0.0;
    let mut sum_a = 0.0;
    let mut sum_b = 0.0;
    for rb in &b.jobs {
        if let Some(ra) = by_id.get(&rb.id) {
            if ra.arrival != rb.arrival {
                return Err(Error::sim("coupled runs disagree on an arrival time".to_string()));
            }
            compared += 1;
            let ta = ra.completion - ra.arrival;
            let tb = rb.completion - rb.arrival;
            sum_diff += tb - ta;
            sum_a += ta;
            sum_b += tb;
            if ra.start.to_bits() != rb.start.to_bits()
                || ra.completion.to_bits() != rb.completion.to_bits()
            {
                identical = false;
            }
        } else {
            identical = false;
        }
    }
    let cf = compared.max(1) as f64;
    Ok(PairedComparison {
        jobs_compared: compared,
        identical,
        mean_response_diff: sum_diff / cf,
        mean_response_a: sum_a / cf,
        mean_response_b: sum_b / cf,
    })
}

impl EventLog {
    /// Time-average total occupancy over a window of horizon twentieths,
    /// `buckets` as half-open indices into 0..20.
    pub fn window_mean_n(&self, buckets: std::ops::Range<usize>) -> f64 {
        let len = buckets.len() as f64 * self.horizon / N_BUCKETS as f64;
        let sum: f64 = self.tallies.n_buckets[buckets].iter().sum();
        sum / len
    }

    pub fn write_jobs_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(&mut w);
        out.write_record(["id", "class", "arrival", "start", "completion"])
            .map_err(csv_err)?;
        for j in &self.jobs {
            out.write_record(&[
                j.id.to_string(),
                j.need.to_string(),
                j.arrival.to_string(),
                j.start.to_string(),
                j.completion.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_phases_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(&mut w);
        out.write_record(["phase", "entry", "exit"]).map_err(csv_err)?;
        for p in &self.phases {
            out.write_record(&[p.tag.to_string(), p.entry.to_string(), p.exit.to_string()])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_series_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(&mut w);
        let mut header = vec!["t".to_string()];
        header.extend(self.needs.iter().map(|need| format!("n{need}")));
        out.write_record(&header).map_err(csv_err)?;
        for p in &self.series {
            let mut row = vec![p.t.to_string()];
            row.extend(p.n.iter().map(|x| x.to_string()));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse(format!("csv write: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::ClassSpec;

    fn one_or_all(k: usize, lambda: f64) -> WorkloadSpec {
        WorkloadSpec::new(
            k,
            vec![
                ClassSpec { need: 1, arrival_rate: 0.9 * lambda, mean_size: 1.0 },
                ClassSpec { need: k, arrival_rate: 0.1 * lambda, mean_size: 1.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_rates_give_an_empty_log() {
        let spec = WorkloadSpec::new(
            2,
            vec![ClassSpec { need: 1, arrival_rate: 0.0, mean_size: 1.0 }],
        )
        .unwrap();
        let log = run(&spec, &PolicyConfig::fcfs(), &SimConfig::new(100.0, 0.0, 1)).unwrap();
        assert!(log.jobs.is_empty());
        assert_eq!(log.tallies.arrivals, 0);
        assert_eq!(log.tallies.busy_time, 0.0);
    }

    #[test]
    fn mm1_mean_response_matches_closed_form() {
        // k=1, lambda=0.5, mu=1, FCFS: E[T] = 1/(mu-lambda) = 2.
        let spec = WorkloadSpec::new(
            1,
            vec![ClassSpec { need: 1, arrival_rate: 0.5, mean_size: 1.0 }],
        )
        .unwrap();
        let cfg = SimConfig::streaming(400_000.0, 40_000.0, 42);
        let log = run(&spec, &PolicyConfig::fcfs(), &cfg).unwrap();
        let tally = &log.tallies.per_class[0];
        let mean = tally.sum_response / tally.completed as f64;
        assert!((mean - 2.0).abs() < 0.05, "E[T] = {mean}");
    }

    #[test]
    fn work_conservation_accounting() {
        let spec = one_or_all(8, 4.0);
        for policy in [
            PolicyConfig::fcfs(),
            PolicyConfig::first_fit(),
            PolicyConfig::msf(),
            PolicyConfig::msfq(7),
            PolicyConfig::static_quickswap(7),
            PolicyConfig::adaptive_quickswap(),
            PolicyConfig::nmsr(),
        ] {
            let log = run(&spec, &policy, &SimConfig::new(2000.0, 0.0, 3)).unwrap();
            let rel = (log.tallies.busy_time - log.tallies.served_time).abs()
                / log.tallies.busy_time.max(1.0);
            assert!(rel < 1e-9, "{}: busy {} vs served {}", log.policy, log.tallies.busy_time, log.tallies.served_time);
        }
    }

    #[test]
    fn non_preemption_start_plus_size_is_completion() {
        let spec = one_or_all(8, 5.0);
        let log = run(&spec, &PolicyConfig::msfq(7), &SimConfig::new(500.0, 0.0, 9)).unwrap();
        assert!(!log.jobs.is_empty());
        for j in &log.jobs {
            assert!(j.arrival <= j.start && j.start < j.completion);
        }
    }

    #[test]
    fn msfq_one_or_all_exclusivity_via_phase_log() {
        // u1 and uk never positive together: check через phase structure —
        // large service only inside P1 intervals.
        let spec = one_or_all(8, 5.0);
        let log = run(&spec, &PolicyConfig::msfq(7), &SimConfig::new(2000.0, 0.0, 11)).unwrap();
        let p1: Vec<(f64, f64)> = log
            .phases
            .iter()
            .filter(|p| p.tag == PhaseTag::P1)
            .map(|p| (p.entry, p.exit))
            .collect();
        for j in log.jobs.iter().filter(|j| j.need == 8) {
            let inside = p1
                .iter()
                .any(|&(entry, exit)| j.start >= entry && j.start <= exit);
            assert!(inside, "large job started outside phase 1");
        }
    }

    #[test]
    fn msfq_phase_cycle_order() {
        let spec = one_or_all(8, 5.0);
        let log = run(&spec, &PolicyConfig::msfq(7), &SimConfig::new(2000.0, 0.0, 11)).unwrap();
        let tags: Vec<PhaseTag> = log.phases.iter().map(|p| p.tag).collect();
        for w in tags.windows(2) {
            let expected = match w[0] {
                PhaseTag::P1 => PhaseTag::P2,
                PhaseTag::P2 => PhaseTag::P3,
                PhaseTag::P3 => PhaseTag::P4,
                PhaseTag::P4 => PhaseTag::P1,
                _ => unreachable!(),
            };
            assert_eq!(w[1], expected, "phase order violated");
        }
        // Phase intervals partition the horizon.
        assert_eq!(log.phases[0].entry, 0.0);
        for w in log.phases.windows(2) {
            assert_eq!(w[0].exit, w[1].entry);
        }
        assert_eq!(log.phases.last().unwrap().exit, log.horizon);
    }

    #[test]
    fn msfq_threshold_k_minus_one_has_zero_length_p3() {
        let spec = one_or_all(8, 5.0);
        let log = run(&spec, &PolicyConfig::msfq(7), &SimConfig::new(5000.0, 0.0, 13)).unwrap();
        let stats = measure_phase_stats(&log, 0.0);
        let p3 = stats.per_phase.iter().find(|p| p.tag == PhaseTag::P3).unwrap();
        assert!(p3.count > 10);
        assert_eq!(p3.mean_duration, 0.0);
        let sum: f64 = stats.per_phase.iter().map(|p| p.time_fraction).sum();
        assert!((sum - 1.0).abs() < 1e-9, "fractions sum to {sum}");
    }

    #[test]
    fn coupling_policy_against_itself_is_exact() {
        let spec = one_or_all(8, 5.0);
        let cfg = SimConfig::new(1000.0, 0.0, 21);
        let a = run(&spec, &PolicyConfig::msf(), &cfg).unwrap();
        let b = run(&spec, &PolicyConfig::msf(), &cfg).unwrap();
        let cmp = couple(&a, &b).unwrap();
        assert!(cmp.identical);
        assert_eq!(cmp.mean_response_diff, 0.0);
    }

    #[test]
    fn coupling_msf_and_msfq_zero_threshold_is_exact() {
        let spec = one_or_all(16, 10.0);
        let cfg = SimConfig::new(2000.0, 0.0, 33);
        let a = run(&spec, &PolicyConfig::msf(), &cfg).unwrap();
        let b = run(&spec, &PolicyConfig::msfq(0), &cfg).unwrap();
        let cmp = couple(&a, &b).unwrap();
        assert_eq!(a.jobs.len(), b.jobs.len());
        assert!(cmp.identical, "logs differ: mean diff {}", cmp.mean_response_diff);
    }

    #[test]
    fn coupling_rejects_mismatched_runs() {
        let spec = one_or_all(8, 5.0);
        let a = run(&spec, &PolicyConfig::msf(), &SimConfig::new(1000.0, 0.0, 1)).unwrap();
        let b = run(&spec, &PolicyConfig::msf(), &SimConfig::new(1000.0, 0.0, 2)).unwrap();
        assert!(couple(&a, &b).is_err());
    }

    #[test]
    fn series_records_on_occupancy_changes() {
        let spec = one_or_all(4, 2.0);
        let cfg = SimConfig::new(200.0, 0.0, 5).with_series(1);
        let log = run(&spec, &PolicyConfig::msf(), &cfg).unwrap();
        assert!(!log.series.is_empty());
        assert!(log.series.windows(2).all(|w| w[0].t <= w[1].t));
        let expected = (log.tallies.arrivals + log.tallies.completions) as usize;
        assert_eq!(log.series.len(), expected);
    }

    #[test]
    fn static_quickswap_single_class_serves_everything() {
        let spec = WorkloadSpec::new(
            4,
            vec![ClassSpec { need: 1, arrival_rate: 2.0, mean_size: 1.0 }],
        )
        .unwrap();
        let log = run(
            &spec,
            &PolicyConfig::static_quickswap(3),
            &SimConfig::new(5000.0, 500.0, 17),
        )
        .unwrap();
        // Stable single-class system: essentially all arrivals complete.
        let done = log.tallies.completions as f64;
        let arrived = log.tallies.arrivals as f64;
        assert!(done / arrived > 0.99, "completed {done} of {arrived}");
    }

    #[test]
    fn warmup_excludes_early_jobs_from_aggregates() {
        let spec = one_or_all(4, 2.0);
        let cfg = SimConfig::new(1000.0, 500.0, 23);
        let log = run(&spec, &PolicyConfig::msf(), &cfg).unwrap();
        let counted: u64 = log.tallies.per_class.iter().map(|c| c.completed).sum();
        let eligible = log
            .jobs
            .iter()
            .filter(|j| j.arrival >= 500.0)
            .count() as u64;
        assert_eq!(counted, eligible);
        assert!(counted < log.tallies.completions);
    }
}
