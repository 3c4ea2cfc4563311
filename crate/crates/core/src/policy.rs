//! Scheduling policies as decision procedures over the explicit state
//! `(n, u, z)`: given the queues and the jobs in service, decide which
//! queued jobs enter service now and advance the policy's phase variable.
//!
//! Non-preemption is structural: a decision can only admit queued jobs,
//! never remove running ones. Within a class every policy serves in arrival
//! order. Admission scans re-run on every arrival and completion.
//!
//! * `fcfs` — admit from the global arrival-order head until the head does
//!   not fit (head-of-line blocking).
//! * `first_fit` — scan in arrival order, skipping jobs that do not fit.
//! * `msf` — scan classes in descending server need, admitting greedily.
//! * `msfq` — one-or-all only. Four phases: serve large jobs until none
//!   remain; serve small jobs until fewer than k are present; keep serving
//!   until at most ℓ remain; drain the ℓ in service while blocking new small
//!   admissions; repeat.
//! * `static_quickswap` — cycle classes in a fixed order; the working phase
//!   runs the maximal single-class schedule ⌊k/i⌋ until more than k-ℓ
//!   servers idle, then drains and advances (empty classes are skipped).
//! * `adaptive_quickswap` — greedy largest-fitting admission until some
//!   queued class is shut out while every in-service class has no backlog,
//!   then drain until the largest queued job fits.
//! * `nmsr_simplified` — queue-oblivious baseline: a cyclic chain of
//!   single-class schedules switched by exponential timers, with per-class
//!   caps honored non-preemptively.

use std::collections::VecDeque;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{policy_stream_seed, Job, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fcfs,
    FirstFit,
    Msf,
    Msfq,
    StaticQuickswap,
    AdaptiveQuickswap,
    NmsrSimplified,
}

/// Policy selection plus the knobs the quickswap and nMSR variants need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Quickswap threshold; defaults to k-1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Static quickswap visiting order as a list of needs; defaults to
    /// descending need.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_order: Option<Vec<usize>>,
    /// Static quickswap per-class threshold overrides as (need, ell) pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class_ell: Option<Vec<(usize, usize)>>,
    /// nMSR chain cycle length in units of the workload mean job size;
    /// defaults to 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmsr_cycle: Option<f64>,
    /// Explicit nMSR schedules as lists of (need, count); defaults to one
    /// maximal single-class schedule per class in descending need order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmsr_schedules: Option<Vec<Vec<(usize, usize)>>>,
    /// Explicit nMSR mean holding times, one per schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmsr_holding: Option<Vec<f64>>,
}

impl PolicyConfig {
    pub fn plain(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            ell: None,
            cycle_order: None,
            per_class_ell: None,
            nmsr_cycle: None,
            nmsr_schedules: None,
            nmsr_holding: None,
        }
    }

    pub fn fcfs() -> Self {
        Self::plain(PolicyKind::Fcfs)
    }
    pub fn first_fit() -> Self {
        Self::plain(PolicyKind::FirstFit)
    }
    pub fn msf() -> Self {
        Self::plain(PolicyKind::Msf)
    }
    pub fn msfq(ell: usize) -> Self {
        PolicyConfig {
            ell: Some(ell),
            ..Self::plain(PolicyKind::Msfq)
        }
    }
    pub fn static_quickswap(ell: usize) -> Self {
        PolicyConfig {
            ell: Some(ell),
            ..Self::plain(PolicyKind::StaticQuickswap)
        }
    }
    pub fn adaptive_quickswap() -> Self {
        Self::plain(PolicyKind::AdaptiveQuickswap)
    }
    pub fn nmsr() -> Self {
        Self::plain(PolicyKind::NmsrSimplified)
    }

    pub fn label(&self) -> String {
        match self.kind {
            PolicyKind::Fcfs => "fcfs".to_string(),
            PolicyKind::FirstFit => "first_fit".to_string(),
            PolicyKind::Msf => "msf".to_string(),
            PolicyKind::Msfq => match self.ell {
                Some(ell) => format!("msfq({ell})"),
                None => "msfq".to_string(),
            },
            PolicyKind::StaticQuickswap => match self.ell {
                Some(ell) => format!("static_quickswap({ell})"),
                None => "static_quickswap".to_string(),
            },
            PolicyKind::AdaptiveQuickswap => "adaptive_quickswap".to_string(),
            PolicyKind::NmsrSimplified => "nmsr".to_string(),
        }
    }
}

/// Phase label attached to the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhaseTag {
    P1,
    P2,
    P3,
    P4,
    /// Working phase of a class-cycling policy; need 0 means the adaptive
    /// policy's classless working phase.
    Working(usize),
    Draining(usize),
    /// Active nMSR schedule index.
    Schedule(usize),
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseTag::P1 => write!(f, "P1"),
            PhaseTag::P2 => write!(f, "P2"),
            PhaseTag::P3 => write!(f, "P3"),
            PhaseTag::P4 => write!(f, "P4"),
            PhaseTag::Working(0) => write!(f, "working"),
            PhaseTag::Working(need) => write!(f, "working[{need}]"),
            PhaseTag::Draining(0) => write!(f, "draining"),
            PhaseTag::Draining(need) => write!(f, "draining[{need}]"),
            PhaseTag::Schedule(i) => write!(f, "sched[{i}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsfqPhase {
    P1,
    P2,
    P3,
    P4,
}

/// Policy-specific Markovian state z.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseState {
    None,
    Msfq(MsfqPhase),
    Cycle { pos: usize, draining: bool },
    Adaptive { draining: bool },
    Schedule { active: usize },
}

/// What a policy sees when deciding: counts per class plus the queues
/// themselves (needed for arrival-order scans).
pub struct SchedView<'a> {
    pub k: usize,
    pub needs: &'a [usize],
    pub n: &'a [usize],
    pub u: &'a [usize],
    pub queues: &'a [VecDeque<Job>],
}

impl<'a> SchedView<'a> {
    pub fn free(&self) -> usize {
        let busy: usize = self.needs.iter().zip(self.u).map(|(need, u)| need * u).sum();
        debug_assert!(busy <= self.k, "schedule infeasible: {busy} busy of {}", self.k);
        self.k - busy
    }

    fn queued(&self, class: usize) -> usize {
        self.queues[class].len()
    }
}

/// Admission counts per class plus any phases entered while deciding
/// (several per event when phases collapse to zero length).
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub admit: Vec<usize>,
    pub entered: Vec<PhaseTag>,
}

enum Engine {
    Fcfs,
    FirstFit,
    Msf,
    Msfq {
        small: Option<usize>,
        large: Option<usize>,
        ell: usize,
    },
    CycleQs {
        cycle: Vec<usize>,
        ell: Vec<usize>,
        caps: Vec<usize>,
    },
    Adaptive,
    Nmsr {
        schedules: Vec<Vec<usize>>,
        holding: Vec<f64>,
    },
}

/// A policy instantiated against a workload: resolved class indices, the
/// phase variable, and (for nMSR) the chain's RNG and next switch time.
pub struct PolicyRuntime {
    engine: Engine,
    pub phase: PhaseState,
    rng: ChaCha8Rng,
    next_switch: f64,
    label: String,
}

impl PolicyRuntime {
    pub fn new(cfg: &PolicyConfig, spec: &WorkloadSpec, seed: u64) -> Result<Self> {
        let k = spec.k();
        let needs: Vec<usize> = spec.classes().iter().map(|c| c.need).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(policy_stream_seed(seed));
        let mut next_switch = f64::INFINITY;

        let (engine, phase) = match cfg.kind {
            PolicyKind::Fcfs => (Engine::Fcfs, PhaseState::None),
            PolicyKind::FirstFit => (Engine::FirstFit, PhaseState::None),
            PolicyKind::Msf => (Engine::Msf, PhaseState::None),
            PolicyKind::Msfq => {
                if k < 2 {
                    return Err(Error::policy("msfq needs k >= 2".to_string()));
                }
                if !spec.one_or_all() {
                    return Err(Error::policy(format!(
                        "msfq is defined for one-or-all workloads only; got needs {:?} with k={k}",
                        needs
                    )));
                }
                let ell = cfg.ell.unwrap_or(k - 1);
                if ell > k - 1 {
                    return Err(Error::policy(format!(
                        "msfq threshold ell={ell} must satisfy 0 <= ell <= k-1={}",
                        k - 1
                    )));
                }
                (
                    Engine::Msfq {
                        small: spec.class_index(1),
                        large: spec.class_index(k),
                        ell,
                    },
                    PhaseState::Msfq(MsfqPhase::P1),
                )
            }
            PolicyKind::StaticQuickswap => {
                let global_ell = cfg.ell.unwrap_or(k - 1);
                let cycle_needs: Vec<usize> = match &cfg.cycle_order {
                    Some(order) => {
                        let mut sorted = order.clone();
                        sorted.sort_unstable();
                        let mut have = needs.clone();
                        have.sort_unstable();
                        if sorted != have {
                            return Err(Error::policy(format!(
                                "cycle_order {:?} is not a permutation of the workload needs {:?}",
                                order, needs
                            )));
                        }
                        order.clone()
                    }
                    None => {
                        let mut desc = needs.clone();
                        desc.sort_unstable_by(|a, b| b.cmp(a));
                        desc
                    }
                };
                let cycle: Vec<usize> = cycle_needs
                    .iter()
                    .map(|&need| spec.class_index(need).expect("validated"))
                    .collect();
                let mut ell = vec![global_ell; needs.len()];
                if let Some(overrides) = &cfg.per_class_ell {
                    for &(need, e) in overrides {
                        let idx = spec.class_index(need).ok_or_else(|| {
                            Error::policy(format!("per_class_ell names unknown need {need}"))
                        })?;
                        ell[idx] = e;
                    }
                }
                for (i, &e) in ell.iter().enumerate() {
                    if e < 1 || e > k - 1 {
                        return Err(Error::policy(format!(
                            "static quickswap threshold for need {} must satisfy 1 <= ell <= k-1, got {e}",
                            needs[i]
                        )));
                    }
                }
                let caps = needs.iter().map(|&need| k / need).collect();
                (
                    Engine::CycleQs { cycle, ell, caps },
                    PhaseState::Cycle { pos: 0, draining: false },
                )
            }
            PolicyKind::AdaptiveQuickswap => (Engine::Adaptive, PhaseState::Adaptive { draining: false }),
            PolicyKind::NmsrSimplified => {
                let (schedules, holding) = nmsr_setup(cfg, spec)?;
                let mean0 = holding[0];
                next_switch = Exp::new(1.0 / mean0)
                    .map_err(|e| Error::policy(format!("nmsr holding rate: {e}")))?
                    .sample(&mut rng);
                (
                    Engine::Nmsr { schedules, holding },
                    PhaseState::Schedule { active: 0 },
                )
            }
        };
        let label = cfg.label();
        Ok(PolicyRuntime {
            engine,
            phase,
            rng,
            next_switch,
            label,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Phase tag the run starts in, for the log's first interval.
    pub fn initial_tag(&self, needs: &[usize]) -> Option<PhaseTag> {
        match (&self.engine, &self.phase) {
            (Engine::Msfq { .. }, _) => Some(PhaseTag::P1),
            (Engine::CycleQs { cycle, .. }, PhaseState::Cycle { pos, .. }) => {
                Some(PhaseTag::Working(needs[cycle[*pos]]))
            }
            (Engine::Adaptive, _) => Some(PhaseTag::Working(0)),
            (Engine::Nmsr { .. }, PhaseState::Schedule { active }) => {
                Some(PhaseTag::Schedule(*active))
            }
            _ => None,
        }
    }

    /// Absolute time of the next policy-internal event (nMSR chain switch).
    pub fn next_timer(&self) -> f64 {
        self.next_switch
    }

    /// Advance the nMSR chain. Transitions are sampled independently of the
    /// queues: the chain keeps cycling even through an empty system.
    pub fn on_timer(&mut self, now: f64) -> Option<PhaseTag> {
        if let Engine::Nmsr { schedules, holding } = &self.engine {
            if let PhaseState::Schedule { active } = &mut self.phase {
                *active = (*active + 1) % schedules.len();
                let mean = holding[*active];
                self.next_switch = now + Exp::new(1.0 / mean).expect("positive rate").sample(&mut self.rng);
                return Some(PhaseTag::Schedule(*active));
            }
        }
        None
    }

    /// The decision procedure: run after every arrival, completion, and
    /// timer event.
    pub fn decide(&mut self, view: &SchedView) -> Decision {
        let mut admit = vec![0usize; view.needs.len()];
        let mut entered = Vec::new();
        match &self.engine {
            Engine::Fcfs => fcfs_step(view, &mut admit),
            Engine::FirstFit => first_fit_step(view, &mut admit),
            Engine::Msf => msf_step(view, &mut admit),
            Engine::Msfq { small, large, ell } => {
                if let PhaseState::Msfq(phase) = &mut self.phase {
                    msfq_step(*small, *large, *ell, view, phase, &mut admit, &mut entered);
                }
            }
            Engine::CycleQs { cycle, ell, caps } => {
                if let PhaseState::Cycle { pos, draining } = &mut self.phase {
                    static_quickswap_step(
                        cycle, ell, caps, view, pos, draining, &mut admit, &mut entered,
                    );
                }
            }
            Engine::Adaptive => {
                if let PhaseState::Adaptive { draining } = &mut self.phase {
                    adaptive_quickswap_step(view, draining, &mut admit, &mut entered);
                }
            }
            Engine::Nmsr { schedules, .. } => {
                if let PhaseState::Schedule { active } = &self.phase {
                    nmsr_step(&schedules[*active], view, &mut admit);
                }
            }
        }
        Decision { admit, entered }
    }
}

fn nmsr_setup(cfg: &PolicyConfig, spec: &WorkloadSpec) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let k = spec.k();
    let schedules: Vec<Vec<usize>> = match &cfg.nmsr_schedules {
        Some(raw) => {
            let mut out = Vec::new();
            for sched in raw {
                let mut caps = vec![0usize; spec.classes().len()];
                let mut demand = 0usize;
                for &(need, count) in sched {
                    let idx = spec
                        .class_index(need)
                        .ok_or_else(|| Error::policy(format!("nmsr schedule names unknown need {need}")))?;
                    caps[idx] = count;
                    demand += need * count;
                }
                if demand > k {
                    return Err(Error::policy(format!(
                        "nmsr schedule demands {demand} servers of {k}"
                    )));
                }
                out.push(caps);
            }
            out
        }
        None => {
            // One maximal single-class schedule per class, descending need.
            let mut order: Vec<usize> = (0..spec.classes().len()).collect();
            order.sort_unstable_by_key(|&i| std::cmp::Reverse(spec.classes()[i].need));
            order
                .into_iter()
                .map(|i| {
                    let mut caps = vec![0usize; spec.classes().len()];
                    caps[i] = k / spec.classes()[i].need;
                    caps
                })
                .collect()
        }
    };
    if schedules.is_empty() {
        return Err(Error::policy("nmsr needs at least one schedule".to_string()));
    }

    let holding: Vec<f64> = match &cfg.nmsr_holding {
        Some(h) => {
            if h.len() != schedules.len() {
                return Err(Error::policy(format!(
                    "nmsr_holding has {} entries for {} schedules",
                    h.len(),
                    schedules.len()
                )));
            }
            if h.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::policy("nmsr holding times must be positive".to_string()));
            }
            h.clone()
        }
        None => {
            // Mean holding proportional to the load share a schedule serves,
            // over a cycle of `nmsr_cycle` mean job sizes (default 10).
            let mean_size: f64 = spec
                .classes()
                .iter()
                .zip(spec.fractions())
                .map(|(c, p)| p * c.mean_size)
                .sum();
            let cycle = cfg.nmsr_cycle.unwrap_or(10.0) * if mean_size > 0.0 { mean_size } else { 1.0 };
            let (rho, total_rho) = spec.load_share();
            schedules
                .iter()
                .map(|caps| {
                    let share: f64 = caps
                        .iter()
                        .enumerate()
                        .filter(|&(_, &c)| c > 0)
                        .map(|(i, _)| if total_rho > 0.0 { rho[i] / total_rho } else { 0.0 })
                        .sum();
                    let mean = cycle * share;
                    if mean > 0.0 {
                        mean
                    } else {
                        // Zero-load schedules still need a finite dwell time.
                        0.1 * cycle.max(1.0)
                    }
                })
                .collect()
        }
    };
    Ok((schedules, holding))
}

fn fcfs_step(view: &SchedView, admit: &mut [usize]) {
    let mut free = view.free();
    loop {
        let mut head: Option<(u64, usize)> = None;
        for class in 0..admit.len() {
            if admit[class] < view.queued(class) {
                let id = view.queues[class][admit[class]].id;
                if head.map_or(true, |(best, _)| id < best) {
                    head = Some((id, class));
                }
            }
        }
        match head {
            Some((_, class)) if view.needs[class] <= free => {
                admit[class] += 1;
                free -= view.needs[class];
            }
            // Head of the line does not fit: block.
            _ => break,
        }
    }
}

fn first_fit_step(view: &SchedView, admit: &mut [usize]) {
    let mut free = view.free();
    let mut skipped = vec![false; admit.len()];
    loop {
        let mut head: Option<(u64, usize)> = None;
        for class in 0..admit.len() {
            if !skipped[class] && admit[class] < view.queued(class) {
                let id = view.queues[class][admit[class]].id;
                if head.map_or(true, |(best, _)| id < best) {
                    head = Some((id, class));
                }
            }
        }
        match head {
            None => break,
            Some((_, class)) => {
                if view.needs[class] <= free {
                    admit[class] += 1;
                    free -= view.needs[class];
                } else {
                    // Later jobs of this class cannot fit either; skip them all.
                    skipped[class] = true;
                }
            }
        }
    }
}

fn msf_step(view: &SchedView, admit: &mut [usize]) {
    let mut free = view.free();
    for class in (0..admit.len()).rev() {
        while admit[class] < view.queued(class) && view.needs[class] <= free {
            admit[class] += 1;
            free -= view.needs[class];
        }
    }
}

/// One-or-all threshold policy. Phases 2 and 3 admit before testing their
/// exit condition so that small jobs present when a phase collapses to zero
/// length still reach the servers; the phase-1 test requires a small job to
/// be present, which is where an empty system rests.
fn msfq_step(
    small: Option<usize>,
    large: Option<usize>,
    ell: usize,
    view: &SchedView,
    phase: &mut MsfqPhase,
    admit: &mut [usize],
    entered: &mut Vec<PhaseTag>,
) {
    let k = view.k;
    let n1 = small.map_or(0, |i| view.n[i]);
    let nk = large.map_or(0, |i| view.n[i]);
    let mut free = view.free();

    let mut guard = 0;
    loop {
        guard += 1;
        debug_assert!(guard <= 8, "msfq phase cascade failed to settle");
        match *phase {
            MsfqPhase::P1 => {
                if nk == 0 && n1 > 0 {
                    *phase = MsfqPhase::P2;
                    entered.push(PhaseTag::P2);
                    continue;
                }
                if let Some(li) = large {
                    let uk = view.u[li] + admit[li];
                    if uk == 0 && admit[li] < view.queued(li) && free >= k {
                        admit[li] += 1;
                        free -= k;
                    }
                }
                break;
            }
            MsfqPhase::P2 | MsfqPhase::P3 => {
                if let Some(si) = small {
                    while admit[si] < view.queued(si) && view.u[si] + admit[si] < k && free >= 1 {
                        admit[si] += 1;
                        free -= 1;
                    }
                }
                if *phase == MsfqPhase::P2 {
                    if n1 < k {
                        *phase = MsfqPhase::P3;
                        entered.push(PhaseTag::P3);
                        continue;
                    }
                } else if n1 <= ell {
                    *phase = MsfqPhase::P4;
                    entered.push(PhaseTag::P4);
                    continue;
                }
                break;
            }
            MsfqPhase::P4 => {
                let u1 = small.map_or(0, |i| view.u[i] + admit[i]);
                if u1 == 0 {
                    *phase = MsfqPhase::P1;
                    entered.push(PhaseTag::P1);
                    continue;
                }
                break;
            }
        }
    }
}

fn static_quickswap_step(
    cycle: &[usize],
    ell: &[usize],
    caps: &[usize],
    view: &SchedView,
    pos: &mut usize,
    draining: &mut bool,
    admit: &mut [usize],
    entered: &mut Vec<PhaseTag>,
) {
    let k = view.k;
    let mut free = view.free();
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 2 * cycle.len() + 4 {
            break;
        }
        let class = cycle[*pos];
        if !*draining {
            while admit[class] < view.queued(class)
                && view.u[class] + admit[class] < caps[class]
                && view.needs[class] <= free
            {
                admit[class] += 1;
                free -= view.needs[class];
            }
            if free > k - ell[class] {
                *draining = true;
                entered.push(PhaseTag::Draining(view.needs[class]));
                continue;
            }
            break;
        } else {
            if view.u[class] + admit[class] == 0 {
                let len = cycle.len();
                let next = (1..=len)
                    .map(|step| (*pos + step) % len)
                    .find(|&q| admit[cycle[q]] < view.queued(cycle[q]));
                match next {
                    Some(q) => {
                        *pos = q;
                        *draining = false;
                        entered.push(PhaseTag::Working(view.needs[cycle[q]]));
                        continue;
                    }
                    None => {
                        // Nothing anywhere: park in the next slot's working phase.
                        *pos = (*pos + 1) % len;
                        *draining = false;
                        entered.push(PhaseTag::Working(view.needs[cycle[*pos]]));
                        break;
                    }
                }
            }
            break;
        }
    }
}

fn adaptive_quickswap_step(
    view: &SchedView,
    draining: &mut bool,
    admit: &mut [usize],
    entered: &mut Vec<PhaseTag>,
) {
    let classes = admit.len();
    let mut free = view.free();
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 2 * view.k + 4 {
            break;
        }
        if !*draining {
            // Admit the largest queued job that fits, repeatedly.
            loop {
                let pick = (0..classes)
                    .rev()
                    .find(|&i| admit[i] < view.queued(i) && view.needs[i] <= free);
                match pick {
                    Some(i) => {
                        admit[i] += 1;
                        free -= view.needs[i];
                    }
                    None => break,
                }
            }
            let waiting = |i: usize| view.queued(i) - admit[i];
            let in_service = |i: usize| view.u[i] + admit[i] > 0;
            let shut_out = (0..classes).any(|i| waiting(i) > 0 && !in_service(i));
            let service_clear = (0..classes).all(|i| !in_service(i) || waiting(i) == 0);
            if shut_out && service_clear {
                *draining = true;
                entered.push(PhaseTag::Draining(0));
                continue;
            }
            break;
        } else {
            // Only the largest queued job may enter; once it does, work again.
            let target = (0..classes).rev().find(|&i| admit[i] < view.queued(i));
            match target {
                Some(i) if view.needs[i] <= free => {
                    admit[i] += 1;
                    free -= view.needs[i];
                    *draining = false;
                    entered.push(PhaseTag::Working(0));
                    continue;
                }
                _ => break,
            }
        }
    }
}

fn nmsr_step(caps: &[usize], view: &SchedView, admit: &mut [usize]) {
    let mut free = view.free();
    for class in (0..admit.len()).rev() {
        while admit[class] < view.queued(class)
            && view.u[class] + admit[class] < caps[class]
            && view.needs[class] <= free
        {
            admit[class] += 1;
            free -= view.needs[class];
        }
    }
}
