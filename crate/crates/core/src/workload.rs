//! Arrival processes, per-job weights, and job construction.
//!
//! Arrival times are nondecreasing integer nanoseconds. The bursty process
//! alternates deterministic on/off windows starting with an on window at
//! t = 0; arrivals inside on windows are Poisson at the on rate and off
//! windows carry none. Weights model the number of fired checks across a
//! syndrome window: one binomial draw over checks x rounds trials per job.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::time::{secs_to_nanos, Nanos};
use crate::{Error, Result};

/// How primary jobs arrive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArrivalProcess {
    /// Memoryless arrivals at `rate_per_sec`.
    Poisson { rate_per_sec: f64 },
    /// Deterministic alternation of on/off windows; Poisson at
    /// `rate_on_per_sec` inside on windows, silent otherwise.
    BurstyOnOff {
        rate_on_per_sec: f64,
        on_ns: Nanos,
        off_ns: Nanos,
    },
    /// Fixed spacing; job k arrives at (k + 1) * interarrival.
    Deterministic { interarrival_ns: Nanos },
}

impl ArrivalProcess {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrivalProcess::Poisson { rate_per_sec } => {
                if !(rate_per_sec > 0.0) || !rate_per_sec.is_finite() {
                    return Err(Error::Config(format!(
                        "poisson rate must be finite and > 0 (got {rate_per_sec})"
                    )));
                }
            }
            ArrivalProcess::BurstyOnOff {
                rate_on_per_sec,
                on_ns,
                off_ns,
            } => {
                if !(rate_on_per_sec > 0.0) || !rate_on_per_sec.is_finite() {
                    return Err(Error::Config(format!(
                        "on-rate must be finite and > 0 (got {rate_on_per_sec})"
                    )));
                }
                if on_ns.as_ns() <= 0 {
                    return Err(Error::Config(String::from("on window must be > 0")));
                }
                if off_ns.as_ns() < 0 {
                    return Err(Error::Config(String::from("off window must be >= 0")));
                }
            }
            ArrivalProcess::Deterministic { interarrival_ns } => {
                if interarrival_ns.as_ns() <= 0 {
                    return Err(Error::Config(String::from("interarrival must be > 0")));
                }
            }
        }
        Ok(())
    }
}

/// Generate `n_jobs` nondecreasing arrival times.
pub fn generate_arrivals(
    process: &ArrivalProcess,
    n_jobs: u64,
    rng: &mut impl Rng,
) -> Result<Vec<Nanos>> {
    process.validate()?;
    let n = usize::try_from(n_jobs)
        .map_err(|_| Error::Config(String::from("n_jobs does not fit in memory")))?;
    let mut times = Vec::with_capacity(n);
    match *process {
        ArrivalProcess::Deterministic { interarrival_ns } => {
            for k in 0..n_jobs as i64 {
                times.push(interarrival_ns * (k + 1));
            }
        }
        ArrivalProcess::Poisson { rate_per_sec } => {
            let exp = Exp::new(rate_per_sec)
                .map_err(|e| Error::Config(format!("bad poisson rate: {e}")))?;
            let mut t = Nanos::ZERO;
            for _ in 0..n_jobs {
                t += secs_to_nanos(exp.sample(rng));
                times.push(t);
            }
        }
        ArrivalProcess::BurstyOnOff {
            rate_on_per_sec,
            on_ns,
            off_ns,
        } => {
            let exp = Exp::new(rate_on_per_sec)
                .map_err(|e| Error::Config(format!("bad on-rate: {e}")))?;
            let cycle = on_ns + off_ns;
            // Accumulate on compressed time (off windows removed), then map
            // back onto the real axis. Position j*on_ns maps to the start of
            // on window j, so no arrival ever lands inside an off window.
            let mut on_time: i64 = 0;
            for _ in 0..n_jobs {
                on_time += secs_to_nanos(exp.sample(rng)).as_ns();
                let window = on_time / on_ns.as_ns();
                let offset = on_time % on_ns.as_ns();
                times.push(Nanos(window * cycle.as_ns() + offset));
            }
        }
    }
    Ok(times)
}

/// Syndrome-weight model: each of `checks` checks may fire independently in
/// each of `rounds` rounds with probability `firing_prob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub checks: u64,
    pub rounds: u32,
    pub firing_prob: f64,
}

impl WeightModel {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config(String::from("rounds must be > 0")));
        }
        if !(0.0..=1.0).contains(&self.firing_prob) || !self.firing_prob.is_finite() {
            return Err(Error::Config(format!(
                "firing_prob must be in [0, 1] (got {})",
                self.firing_prob
            )));
        }
        Ok(())
    }

    pub fn trials(&self) -> u64 {
        self.checks * self.rounds as u64
    }
}

/// Draw one job weight: Binomial(checks * rounds, firing_prob).
pub fn sample_weight(model: &WeightModel, rng: &mut impl Rng) -> u64 {
    let n = model.trials();
    if model.firing_prob <= 0.0 {
        return 0;
    }
    if model.firing_prob >= 1.0 {
        return n;
    }
    Binomial::new(n, model.firing_prob)
        .expect("validated firing_prob")
        .sample(rng)
}

/// Draw a weight per job.
pub fn sample_weights(model: &WeightModel, n_jobs: u64, rng: &mut impl Rng) -> Result<Vec<u64>> {
    model.validate()?;
    Ok((0..n_jobs).map(|_| sample_weight(model, rng)).collect())
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Primary,
    Rescue,
}

/// One unit of decode work submitted to the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: u64,
    pub kind: JobKind,
    /// Set on rescue jobs: the primary whose completion spawned them.
    pub parent_id: Option<u64>,
    pub arrival: Nanos,
    pub deadline: Nanos,
    /// Sampled syndrome weight; primaries only.
    pub weight: Option<u64>,
}

/// Pair arrivals with weights into primary jobs; deadline = arrival + slack.
/// Ids are assigned in arrival order starting at 0.
pub fn make_primary_jobs(arrivals: &[Nanos], slack: Nanos, weights: &[u64]) -> Result<Vec<Job>> {
    if arrivals.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} arrivals but {} weights",
            arrivals.len(),
            weights.len()
        )));
    }
    if slack.as_ns() <= 0 {
        return Err(Error::Config(String::from("slack must be > 0")));
    }
    Ok(arrivals
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (&arrival, &w))| Job {
            id: i as u64,
            kind: JobKind::Primary,
            parent_id: None,
            arrival,
            deadline: arrival + slack,
            weight: Some(w),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreams;

    #[test]
    fn deterministic_spacing() {
        let mut rng = RngStreams::new(0).arrivals();
        let p = ArrivalProcess::Deterministic {
            interarrival_ns: Nanos::from_micros(10),
        };
        let times = generate_arrivals(&p, 3, &mut rng).unwrap();
        assert_eq!(
            times,
            [Nanos::from_micros(10), Nanos::from_micros(20), Nanos::from_micros(30)]
        );
    }

    #[test]
    fn poisson_mean_and_cv() {
        let mut rng = RngStreams::new(11).arrivals();
        let rate = 50_000.0;
        let n = 10_000u64;
        let times =
            generate_arrivals(&ArrivalProcess::Poisson { rate_per_sec: rate }, n, &mut rng)
                .unwrap();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        let gaps: Vec<f64> = core::iter::once(times[0])
            .chain(times.windows(2).map(|w| w[1] - w[0]))
            .map(|d| d.as_secs_f64())
            .collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
        let cv = libm::sqrt(var) / mean;
        let expect = 1.0 / rate;
        assert!((mean - expect).abs() / expect < 0.05, "mean gap {mean} vs {expect}");
        assert!((0.9..=1.1).contains(&cv), "cv {cv}");
    }

    #[test]
    fn bursty_avoids_off_windows_and_matches_long_run_rate() {
        let mut rng = RngStreams::new(3).arrivals();
        let on = Nanos::from_millis(1);
        let off = Nanos::from_millis(4);
        let rate_on = 100_000.0;
        let p = ArrivalProcess::BurstyOnOff {
            rate_on_per_sec: rate_on,
            on_ns: on,
            off_ns: off,
        };
        let n = 10_000u64;
        let times = generate_arrivals(&p, n, &mut rng).unwrap();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        let cycle = (on + off).as_ns();
        for t in &times {
            assert!(t.as_ns() % cycle < on.as_ns(), "arrival {t} inside off window");
        }
        let long_run = rate_on * on.as_ns() as f64 / cycle as f64;
        let measured = n as f64 / times.last().unwrap().as_secs_f64();
        assert!(
            (measured - long_run).abs() / long_run < 0.05,
            "rate {measured} vs {long_run}"
        );
    }

    #[test]
    fn weight_mean_tracks_binomial() {
        let model = WeightModel { checks: 72, rounds: 10, firing_prob: 0.01 };
        let mut rng = RngStreams::new(5).weights();
        let draws = sample_weights(&model, 10_000, &mut rng).unwrap();
        let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
        assert!((mean - 7.2).abs() / 7.2 < 0.10, "mean {mean}");
        assert!(draws.iter().all(|&w| w <= model.trials()));
    }

    #[test]
    fn weight_degenerate_probs() {
        let mut rng = RngStreams::new(5).weights();
        let zero = WeightModel { checks: 72, rounds: 10, firing_prob: 0.0 };
        let one = WeightModel { checks: 72, rounds: 10, firing_prob: 1.0 };
        assert_eq!(sample_weight(&zero, &mut rng), 0);
        assert_eq!(sample_weight(&one, &mut rng), 720);
    }

    #[test]
    fn jobs_pair_arrivals_with_weights() {
        let arrivals = [Nanos(100), Nanos(250)];
        let jobs = make_primary_jobs(&arrivals, Nanos(50), &[3, 0]).unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].id, 0);
        assert_eq!(jobs[0].deadline, Nanos(150));
        assert_eq!(jobs[1].deadline, Nanos(300));
        assert_eq!(jobs[1].weight, Some(0));
        assert!(jobs.iter().all(|j| j.kind == JobKind::Primary && j.parent_id.is_none()));

        assert!(make_primary_jobs(&arrivals, Nanos(50), &[1]).is_err());
        assert!(make_primary_jobs(&arrivals, Nanos(0), &[1, 2]).is_err());
    }

    #[test]
    fn same_seed_same_sequences() {
        let p = ArrivalProcess::Poisson { rate_per_sec: 9_000.0 };
        let a = generate_arrivals(&p, 500, &mut RngStreams::new(9).arrivals()).unwrap();
        let b = generate_arrivals(&p, 500, &mut RngStreams::new(9).arrivals()).unwrap();
        assert_eq!(a, b);
        let c = generate_arrivals(&p, 500, &mut RngStreams::new(10).arrivals()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn validation_rejects_bad_processes() {
        assert!(ArrivalProcess::Poisson { rate_per_sec: 0.0 }.validate().is_err());
        assert!(ArrivalProcess::Poisson { rate_per_sec: f64::NAN }.validate().is_err());
        assert!(ArrivalProcess::Deterministic { interarrival_ns: Nanos(0) }
            .validate()
            .is_err());
        assert!(ArrivalProcess::BurstyOnOff {
            rate_on_per_sec: 1e3,
            on_ns: Nanos(0),
            off_ns: Nanos(10),
        }
        .validate()
        .is_err());
    }
}
