use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use super::path::EnvironmentPath;
use crate::environment::EnvironmentModel;
use crate::error::{Error, Result};

/// Counts customers at each grid time along a given environment path.
///
/// Work is measured on the cumulative-work axis `W(t) = ∫ beta` so that a
/// customer arriving at `u` with requirement `sigma` leaves once `W` reaches
/// `W(u) + sigma`. The system starts empty at time 0. `grid` must be sorted.
pub fn simulate_queue<R: Rng + ?Sized>(
    model: &EnvironmentModel,
    path: &EnvironmentPath,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("sampling grid must be sorted".into()));
    }
    if grid.last().is_some_and(|t| *t >= path.end()) {
        return Err(Error::Config(
            "sampling grid extends beyond the environment path".into(),
        ));
    }
    let requirement =
        Exp::new(model.service_rate).map_err(|e| Error::Config(format!("service rate: {e}")))?;
    let mut thresholds: BinaryHeap<Reverse<OrderedFloat<f64>>> = BinaryHeap::new();
    let mut counts = Vec::with_capacity(grid.len());
    let mut next_sample = 0;
    let mut work = 0.0;
    let mut arrivals = Vec::new();

    for seg in &path.segments {
        if next_sample == grid.len() {
            break;
        }
        let params = &model.states[seg.state];
        let beta = params.speed;
        let mean_count = params.arrival_rate * seg.duration;
        arrivals.clear();
        if mean_count > 0.0 {
            let count = Poisson::new(mean_count)
                .map_err(|e| Error::Config(format!("arrival count: {e}")))?
                .sample(rng) as usize;
            arrivals.extend((0..count).map(|_| seg.start + rng.random::<f64>() * seg.duration));
            arrivals.sort_by(f64::total_cmp);
        }
        let work_at = |t: f64| work + beta * (t - seg.start);
        let mut a = 0;
        while next_sample < grid.len() && grid[next_sample] < seg.end() {
            let t = grid[next_sample];
            while a < arrivals.len() && arrivals[a] <= t {
                thresholds.push(Reverse(OrderedFloat(
                    work_at(arrivals[a]) + requirement.sample(rng),
                )));
                a += 1;
            }
            let now = work_at(t);
            while thresholds.peek().is_some_and(|Reverse(th)| th.0 <= now) {
                thresholds.pop();
            }
            counts.push(thresholds.len() as u64);
            next_sample += 1;
        }
        for &u in &arrivals[a..] {
            thresholds.push(Reverse(OrderedFloat(work_at(u) + requirement.sample(rng))));
        }
        work += beta * seg.duration;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::SojournDistribution;
    use crate::fixtures::two_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(lambdas: [f64; 2], betas: [f64; 2], mu: f64) -> EnvironmentModel {
        let e = SojournDistribution::Exponential { rate: 1.0 };
        two_state(lambdas, betas, mu, e.clone(), e)
    }

    fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
        let n = ((to - from) / step) as usize;
        (0..n).map(|i| from + step * i as f64).collect()
    }

    #[test]
    fn no_arrivals_means_empty_system() {
        let m = model([0.0, 0.0], [1.0, 1.0], 1.0);
        let path = EnvironmentPath::frozen(0, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = simulate_queue(&m, &path, &grid(0.0, 99.0, 1.0), &mut rng).unwrap();
        assert!(n.iter().all(|&x| x == 0));
    }

    #[test]
    fn frozen_state_is_a_classical_mminf_queue() {
        // lambda / (beta mu) = 3 / (0.5 * 2)
        let m = model([0.1, 3.0], [1.0, 0.5], 2.0);
        let path = EnvironmentPath::frozen(1, 20_000.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = simulate_queue(&m, &path, &grid(50.0, 19_999.0, 2.0), &mut rng).unwrap();
        let mean = n.iter().sum::<u64>() as f64 / n.len() as f64;
        assert!((mean - 3.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn zero_speed_state_keeps_customers() {
        let m = model([2.0, 0.0], [1.0, 0.0], 1.0);
        let path = EnvironmentPath {
            segments: vec![
                super::super::path::Segment {
                    state: 0,
                    start: 0.0,
                    duration: 50.0,
                },
                super::super::path::Segment {
                    state: 1,
                    start: 50.0,
                    duration: 50.0,
                },
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = simulate_queue(&m, &path, &[50.0, 60.0, 99.0], &mut rng).unwrap();
        assert_eq!(n[0], n[1]);
        assert_eq!(n[1], n[2]);
    }

    #[test]
    fn grid_must_fit_the_path() {
        let m = model([1.0, 1.0], [1.0, 1.0], 1.0);
        let path = EnvironmentPath::frozen(0, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_queue(&m, &path, &[1.0, 10.0], &mut rng).is_err());
        assert!(simulate_queue(&m, &path, &[2.0, 1.0], &mut rng).is_err());
    }
}
