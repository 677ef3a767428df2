//! Exact event-driven simulation on a finite closed window.
//!
//! A site is schedulable when `eta_i = 1, eta_{i+1} = 0`. Schedulable
//! sites are grouped by rate; the next event time is exponential with the
//! total rate, the class is chosen proportionally to its share and the site
//! uniformly inside the class.
//!
//! The sites whose state may differ from the infinite system because of
//! the closed ends grow only when the clock of their frontier site rings.
//! Rings of a frontier site that are not jumps are added as separate
//! events at the same rate, so the contaminated region is tracked exactly
//! and checked against the observed sites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SimConfig, SimError};
use crate::rng::derive_seed;

/// State at one observation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Macroscopic time (clock time divided by `n`).
    pub t: f64,
    pub n: u64,
    pub i_min: i64,
    pub eta: Vec<u8>,
    /// Jumps `i -> i + 1` so far, per window site.
    pub current: Vec<u64>,
    /// `z_{i_min}(0)`.
    pub z0_min: i64,
    pub eta0: Vec<u8>,
}

impl Snapshot {
    pub fn i_max(&self) -> i64 {
        self.i_min + self.eta.len() as i64 - 1
    }

    fn index(&self, i: i64) -> Result<usize, SimError> {
        if i < self.i_min || i > self.i_max() {
            Err(SimError::OutOfWindow {
                lo: i,
                hi: i,
                i_min: self.i_min,
                i_max: self.i_max(),
            })
        } else {
            Ok((i - self.i_min) as usize)
        }
    }

    pub fn occupation(&self, i: i64) -> Result<u8, SimError> {
        Ok(self.eta[self.index(i)?])
    }

    /// `J_i(t)`, the number of jumps from `i` to `i + 1`.
    pub fn current_at(&self, i: i64) -> Result<u64, SimError> {
        Ok(self.current[self.index(i)?])
    }

    /// `z_i(t) = z_i(0) - J_i(t)`.
    pub fn height(&self, i: i64) -> Result<i64, SimError> {
        let k = self.index(i)?;
        let z0: i64 = self.z0_min + self.eta0[1..=k].iter().map(|&e| e as i64).sum::<i64>();
        Ok(z0 - self.current[k] as i64)
    }

    /// Heights over the whole window.
    pub fn heights(&self) -> Vec<i64> {
        let mut z0 = self.z0_min;
        (0..self.eta.len())
            .map(|k| {
                if k > 0 {
                    z0 += self.eta0[k] as i64;
                }
                z0 - self.current[k] as i64
            })
            .collect()
    }

    /// `n^-1 sum_{i = floor(na) + 1}^{floor(nb)} eta_i`.
    pub fn empirical_density(&self, a: f64, b: f64) -> Result<f64, SimError> {
        let nf = self.n as f64;
        let lo = (nf * a).floor() as i64 + 1;
        let hi = (nf * b).floor() as i64;
        if hi < lo {
            return Ok(0.0);
        }
        if lo < self.i_min || hi > self.i_max() {
            return Err(SimError::OutOfWindow {
                lo,
                hi,
                i_min: self.i_min,
                i_max: self.i_max(),
            });
        }
        let (s, e) = ((lo - self.i_min) as usize, (hi - self.i_min) as usize);
        Ok(self.eta[s..=e].iter().map(|&x| x as u64).sum::<u64>() as f64 / nf)
    }
}

/// Schedulable sites of one rate class, with O(1) insert and remove.
struct ClassSet {
    rate: f64,
    members: Vec<u32>,
}

struct Engine {
    eta: Vec<u8>,
    /// Jumps out of the first window site; every other current follows
    /// from it and the occupation change.
    first_jumps: u64,
    #[cfg(test)]
    jumps: Vec<u64>,
    class_of: Vec<u8>,
    pos: Vec<u32>,
    classes: Vec<ClassSet>,
}

const ABSENT: u32 = u32::MAX;

impl Engine {
    fn schedulable(&self, k: usize) -> bool {
        k + 1 < self.eta.len() && self.eta[k] == 1 && self.eta[k + 1] == 0
    }

    fn refresh(&mut self, k: usize) {
        let want = self.schedulable(k);
        let have = self.pos[k] != ABSENT;
        if want == have {
            return;
        }
        let c = self.class_of[k] as usize;
        if want {
            self.pos[k] = self.classes[c].members.len() as u32;
            self.classes[c].members.push(k as u32);
        } else {
            let p = self.pos[k] as usize;
            let members = &mut self.classes[c].members;
            let last = *members.last().unwrap();
            members.swap_remove(p);
            if last as usize != k {
                self.pos[last as usize] = p as u32;
            }
            self.pos[k] = ABSENT;
        }
    }

    fn rate(&self, k: usize) -> f64 {
        self.classes[self.class_of[k] as usize].rate
    }

    /// `J` at every window site.
    fn currents(&self, eta0: &[u8]) -> Vec<u64> {
        let mut j = self.first_jumps as i64;
        let mut out = Vec::with_capacity(self.eta.len());
        out.push(self.first_jumps);
        for (&before, &now) in eta0.iter().zip(&self.eta).skip(1) {
            j += i64::from(before) - i64::from(now);
            out.push(j as u64);
        }
        out
    }

    fn insert(&mut self, k: usize) {
        let members = &mut self.classes[self.class_of[k] as usize].members;
        self.pos[k] = members.len() as u32;
        members.push(k as u32);
    }

    fn remove(&mut self, k: usize) {
        let members = &mut self.classes[self.class_of[k] as usize].members;
        let p = self.pos[k] as usize;
        let last = members[members.len() - 1];
        members.swap_remove(p);
        self.pos[last as usize] = p as u32;
        self.pos[k] = ABSENT;
    }

    /// Moves the particle at `k` (schedulable) to `k + 1`. Only `k` leaves
    /// the schedulable set; `k - 1` and `k + 1` may join it.
    fn jump(&mut self, k: usize) {
        self.eta[k] = 0;
        self.eta[k + 1] = 1;
        if k == 0 {
            self.first_jumps += 1;
        }
        #[cfg(test)]
        {
            self.jumps[k] += 1;
        }
        self.remove(k);
        if k > 0 && self.eta[k - 1] == 1 {
            self.insert(k - 1);
        }
        if k + 2 < self.eta.len() && self.eta[k + 2] == 0 {
            self.insert(k + 1);
        }
    }
}

/// Runs one realization and returns a snapshot at each requested
/// macroscopic time (sorted ascending, each in `[0, t_end]`).
pub fn run(config: &SimConfig, observe_times: &[f64]) -> Result<Vec<Snapshot>, SimError> {
    if observe_times.windows(2).any(|w| w[1] < w[0])
        || observe_times.iter().any(|&t| !(0.0..=config.t_end).contains(&t))
    {
        return Err(SimError::Config(format!(
            "observation times must be sorted and lie in [0, {}]",
            config.t_end
        )));
    }
    let (i_min, i_max) = config.window;
    if i_min > config.observe.0 || i_max < config.observe.1 {
        return Err(SimError::OutOfWindow {
            lo: config.observe.0,
            hi: config.observe.1,
            i_min,
            i_max,
        });
    }
    let m = config.sites();
    if m >= ABSENT as usize {
        return Err(SimError::Config(format!("window of {m} sites is too large")));
    }
    let nf = config.n as f64;
    let eta0: Vec<u8> = (i_min..=i_max)
        .map(|i| config.initial.occupation(i, config.n, config.seed))
        .collect();
    let rate_of: Vec<f64> = (i_min..=i_max).map(|i| config.speed.eval(i as f64 / nf)).collect();
    let mut distinct: Vec<f64> = rate_of.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() > u8::MAX as usize {
        return Err(SimError::Config("too many distinct rates in the window".into()));
    }
    let class_of: Vec<u8> = rate_of
        .iter()
        .map(|r| distinct.binary_search_by(|d| d.total_cmp(r)).unwrap() as u8)
        .collect();
    let mut engine = Engine {
        eta: eta0.clone(),
        first_jumps: 0,
        #[cfg(test)]
        jumps: vec![0; m],
        class_of,
        pos: vec![ABSENT; m],
        classes: distinct
            .iter()
            .map(|&rate| ClassSet {
                rate,
                members: Vec::new(),
            })
            .collect(),
    };
    for k in 0..m {
        engine.refresh(k);
    }

    let z0_min = config.initial_height(i_min);
    let snapshot = |engine: &Engine, t: f64| {
        let current = engine.currents(&eta0);
        #[cfg(test)]
        assert_eq!(current, engine.jumps, "currents derived from occupations disagree with counted jumps");
        Snapshot {
            t,
            n: config.n,
            i_min,
            eta: engine.eta.clone(),
            current,
            z0_min,
            eta0: eta0.clone(),
        }
    };

    // Contaminated sites are 0..=left and right..m-1 (window indices).
    let (obs_lo, obs_hi) = (
        (config.observe.0 - i_min) as usize,
        (config.observe.1 - i_min) as usize,
    );
    let mut left = 0usize;
    let mut right = m - 1;
    let overflow = |site: usize, clock: f64| SimError::WindowOverflow {
        time: clock / nf,
        site: site as i64 + i_min,
        observe_lo: config.observe.0,
        observe_hi: config.observe.1,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0xd1a));
    let horizon = nf * config.t_end;
    let mut clock = 0.0f64;
    let mut out = Vec::with_capacity(observe_times.len());
    let mut next_obs = 0;
    loop {
        let jump_rate: f64 = engine
            .classes
            .iter()
            .map(|c| c.rate * c.members.len() as f64)
            .sum();
        let left_idle = if engine.pos[left] == ABSENT { engine.rate(left) } else { 0.0 };
        let right_idle = if right > 0 && engine.pos[right - 1] == ABSENT {
            engine.rate(right - 1)
        } else {
            0.0
        };
        let total = jump_rate + left_idle + right_idle;
        let dt = if total > 0.0 {
            rng.sample::<f64, _>(Exp1) / total
        } else {
            f64::INFINITY
        };
        while next_obs < observe_times.len() && clock + dt > nf * observe_times[next_obs] {
            out.push(snapshot(&engine, observe_times[next_obs]));
            next_obs += 1;
        }
        if next_obs == observe_times.len() || clock + dt > horizon {
            break;
        }
        clock += dt;
        let mut u = rng.gen::<f64>() * total;
        let mut site = None;
        for c in &engine.classes {
            let share = c.rate * c.members.len() as f64;
            if u < share {
                let idx = ((u / c.rate) as usize).min(c.members.len() - 1);
                site = Some(c.members[idx] as usize);
                break;
            }
            u -= share;
        }
        let ringing = match site {
            Some(k) => {
                engine.jump(k);
                k
            }
            None if u < left_idle => left,
            None => right - 1,
        };
        if ringing == left && left + 1 < m {
            left += 1;
            if left >= obs_lo {
                return Err(overflow(left, clock));
            }
        }
        if right > 0 && ringing == right - 1 {
            right -= 1;
            if right <= obs_hi + 1 {
                return Err(overflow(right, clock));
            }
        }
    }
    Ok(out)
}

/// Independent replicas with seeds `derive_seed(config.seed, rep)`, run in
/// parallel; results do not depend on the thread count.
pub fn run_replicas(
    config: &SimConfig,
    reps: u64,
    observe_times: &[f64],
) -> Result<Vec<Vec<Snapshot>>, SimError> {
    (0..reps)
        .into_par_iter()
        .map(|rep| run(&config.with_seed(derive_seed(config.seed, rep)), observe_times))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::InitialCondition;
    use crate::speed::SpeedFunction;
    use crate::variational::InitialProfile;

    fn config(eta: Vec<u8>, first: i64, speed: SpeedFunction, t: f64, seed: u64) -> SimConfig {
        SimConfig::new(1, speed, t, seed, InitialCondition::Sites { first, eta }, (-2.0, 2.0))
            .unwrap()
    }

    #[test]
    fn empty_and_full_systems_do_not_move() {
        let speed = SpeedFunction::constant(1.0).unwrap();
        let empty = config(vec![], 0, speed.clone(), 5.0, 1);
        let snaps = run(&empty, &[0.0, 2.5, 5.0]).unwrap();
        assert!(snaps.iter().all(|s| s.eta.iter().all(|&e| e == 0) && s.current.iter().all(|&j| j == 0)));

        let full = SimConfig::new(
            10,
            speed,
            1.0,
            3,
            InitialCondition::Bernoulli(InitialProfile::constant(1.0).unwrap()),
            (-1.0, 1.0),
        )
        .unwrap();
        let snaps = run(&full, &[1.0]).unwrap();
        assert!(snaps[0].current.iter().all(|&j| j == 0));
        assert!(snaps[0].eta.iter().all(|&e| e == 1));
    }

    #[test]
    fn free_particle_is_poisson() {
        let c = 1.7;
        let speed = SpeedFunction::constant(c).unwrap();
        let t = 3.0;
        let reps = 10_000u64;
        let base = config(vec![1], 0, speed, t, 11);
        let base = base.with_window(-40, 60).unwrap();
        let mut sum = 0.0;
        let mut sq = 0.0;
        for rep in 0..reps {
            let s = &run(&base.with_seed(derive_seed(11, rep)), &[t]).unwrap()[0];
            let pos = s.eta.iter().position(|&e| e == 1).unwrap() as f64 + s.i_min as f64;
            sum += pos;
            sq += pos * pos;
        }
        let mean = sum / reps as f64;
        let var = sq / reps as f64 - mean * mean;
        let se = (var / reps as f64).sqrt();
        assert!((mean - c * t).abs() < 3.0 * se, "{mean} vs {}", c * t);
        assert!((var - c * t).abs() < 0.1 * c * t);
    }

    #[test]
    fn invariants_along_a_run() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        let cfg = SimConfig::new(
            200,
            speed,
            0.3,
            5,
            InitialCondition::Bernoulli(InitialProfile::new(vec![0.0], vec![0.7, 0.2]).unwrap()),
            (-0.5, 0.5),
        )
        .unwrap();
        let times: Vec<f64> = (0..=6).map(|k| 0.3 * k as f64 / 6.0).collect();
        let snaps = run(&cfg, &times).unwrap();
        let particles = snaps[0].eta.iter().map(|&e| e as u64).sum::<u64>();
        for w in snaps.windows(2) {
            assert!(w[0].current.iter().zip(&w[1].current).all(|(a, b)| a <= b));
        }
        for s in &snaps {
            assert_eq!(s.eta.iter().map(|&e| e as u64).sum::<u64>(), particles);
            let z = s.heights();
            for (k, w) in z.windows(2).enumerate() {
                let d = w[1] - w[0];
                assert!((0..=1).contains(&d));
                assert_eq!(d, s.eta[k + 1] as i64);
            }
            assert_eq!(s.height(s.i_min + 3).unwrap(), z[3]);
        }
        assert_eq!(snaps[0].height(0).unwrap(), 0);
        let i = 17;
        let j = snaps[6].current_at(i).unwrap() as i64;
        assert_eq!(snaps[0].height(i).unwrap() - snaps[6].height(i).unwrap(), j);
    }

    #[test]
    fn reproducible_per_seed() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        let cfg = SimConfig::new(
            100,
            speed,
            0.5,
            9,
            InitialCondition::Bernoulli(InitialProfile::constant(0.5).unwrap()),
            (-0.3, 0.3),
        )
        .unwrap();
        let a = run(&cfg, &[0.5]).unwrap();
        let b = run(&cfg, &[0.5]).unwrap();
        assert_eq!(a, b);
        let c = run(&cfg.with_seed(10), &[0.5]).unwrap();
        assert_ne!(a[0].current, c[0].current);
        let reps = run_replicas(&cfg, 3, &[0.5]).unwrap();
        assert_eq!(reps[1], run(&cfg.with_seed(derive_seed(9, 1)), &[0.5]).unwrap());
    }

    #[test]
    fn small_window_overflows() {
        let speed = SpeedFunction::constant(1.0).unwrap();
        let cfg = SimConfig::new(
            100,
            speed,
            1.0,
            2,
            InitialCondition::Bernoulli(InitialProfile::constant(0.5).unwrap()),
            (-0.2, 0.2),
        )
        .unwrap()
        .with_window(-25, 25)
        .unwrap();
        assert!(matches!(run(&cfg, &[1.0]), Err(SimError::WindowOverflow { .. })));
    }

    #[test]
    fn empirical_density_at_time_zero() {
        let n = 10_000;
        let rho = 0.35;
        let cfg = SimConfig::new(
            n,
            SpeedFunction::constant(1.0).unwrap(),
            0.1,
            4,
            InitialCondition::Bernoulli(InitialProfile::constant(rho).unwrap()),
            (0.0, 1.0),
        )
        .unwrap();
        let s = &run(&cfg, &[0.0]).unwrap()[0];
        assert!((s.empirical_density(0.0, 1.0).unwrap() - rho).abs() < 3.0 / (n as f64).sqrt());
        assert!(s.empirical_density(-10.0, 0.0).is_err());
        assert_eq!(s.empirical_density(0.5, 0.5).unwrap(), 0.0);
    }
}
