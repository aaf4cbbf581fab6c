use mminf::environment::{chain_statics, EnvironmentModel, SojournDistribution};
use mminf::fixtures::{random_mixed_model, reference_model};
use mminf::moments::{MomentTable, Weighting};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sojourn() -> impl Strategy<Value = SojournDistribution> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|rate| SojournDistribution::Exponential { rate }),
        (0.1f64..10.0, 0.05f64..20.0)
            .prop_map(|(shape, rate)| SojournDistribution::Gamma { shape, rate }),
        (0.01f64..10.0).prop_map(|value| SojournDistribution::Deterministic { value }),
        (0.05f64..0.95, 0.05f64..5.0, 0.05f64..5.0).prop_map(|(p, a, b)| {
            SojournDistribution::HyperExponential {
                probs: vec![p, 1.0 - p],
                rates: vec![a, b],
            }
        }),
    ]
}

fn model() -> impl Strategy<Value = EnvironmentModel> {
    (2usize..=5, any::<u64>())
        .prop_map(|(k, seed)| random_mixed_model(k, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn scale_time(d: &SojournDistribution, c: f64) -> SojournDistribution {
    match d {
        SojournDistribution::Exponential { rate } => {
            SojournDistribution::Exponential { rate: rate * c }
        }
        SojournDistribution::Gamma { shape, rate } => SojournDistribution::Gamma {
            shape: *shape,
            rate: rate * c,
        },
        SojournDistribution::Deterministic { value } => {
            SojournDistribution::Deterministic { value: value / c }
        }
        SojournDistribution::HyperExponential { probs, rates } => {
            SojournDistribution::HyperExponential {
                probs: probs.clone(),
                rates: rates.iter().map(|r| r * c).collect(),
            }
        }
        SojournDistribution::Tabulated { .. } => unreachable!(),
    }
}

fn moments(m: &EnvironmentModel, order: usize) -> MomentTable {
    let st = chain_statics(m).unwrap();
    MomentTable::compute(m, &st, order).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_are_decreasing_in_unit_interval(d in sojourn(), s in 0.0f64..50.0, ds in 1e-3f64..5.0) {
        prop_assert_eq!(d.laplace(0.0).unwrap(), 1.0);
        let (a, b) = (d.laplace(s).unwrap(), d.laplace(s + ds).unwrap());
        prop_assert!(a > 0.0 && a <= 1.0 && b <= a);
        let (ra, rb) = (d.residual_laplace(s).unwrap(), d.residual_laplace(s + ds).unwrap());
        prop_assert!(ra > 0.0 && ra <= 1.0 && rb <= ra);
        // the complement is accurate where 1 - tau would cancel
        prop_assert!(close(d.laplace_complement(s).unwrap(), 1.0 - a, 1e-6) || a > 0.5);
        prop_assert!(d.laplace(-1.0).is_err());
    }

    #[test]
    fn residual_transform_definition(d in sojourn(), s in 1e-3f64..30.0) {
        let direct = (1.0 - d.laplace(s).unwrap()) / (s * d.mean());
        prop_assert!(close(d.residual_laplace(s).unwrap(), direct, 1e-9));
    }

    #[test]
    fn moments_are_valid_moment_sequences(m in model()) {
        let t = moments(&m, 8);
        for w in Weighting::ALL {
            let f = &t.weighted(w).factorial;
            prop_assert_eq!(f[0], 1.0);
            prop_assert_eq!(t.weighted(w).raw[1], f[1]);
            for n in 1..=8 {
                prop_assert!(f[n] >= 0.0);
                // Lyapunov: E[A^n]^(1/n) is nondecreasing
                if n >= 2 && f[n - 1] > 0.0 {
                    prop_assert!(f[n].powf(1.0 / n as f64) >= f[n - 1].powf(1.0 / (n - 1) as f64) * (1.0 - 1e-9));
                }
            }
        }
        for (p, s) in t.palm.iter().zip(&t.stationary) {
            prop_assert!(p.iter().chain(s.iter()).all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn arrival_scaling_multiplies_moments(m in model(), c in 0.1f64..5.0) {
        let mut scaled = m.clone();
        for s in &mut scaled.states {
            s.arrival_rate *= c;
        }
        let (a, b) = (moments(&m, 6), moments(&scaled, 6));
        for w in Weighting::ALL {
            for n in 0..=6 {
                prop_assert!(close(b.weighted(w).factorial[n], c.powi(n as i32) * a.weighted(w).factorial[n], 1e-9));
            }
        }
    }

    #[test]
    fn time_rescaling_leaves_counts_unchanged(m in model(), c in 0.2f64..5.0) {
        let mut fast = m.clone();
        fast.service_rate *= c;
        for s in &mut fast.states {
            s.arrival_rate *= c;
            s.sojourn = scale_time(&s.sojourn, c);
        }
        let (a, b) = (moments(&m, 6), moments(&fast, 6));
        for w in Weighting::ALL {
            for n in 0..=6 {
                prop_assert!(close(a.weighted(w).factorial[n], b.weighted(w).factorial[n], 1e-8));
            }
        }
    }

    #[test]
    fn relabelling_states_changes_nothing(m in model(), shift in 1usize..5) {
        let k = m.state_count();
        let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).collect();
        let mut relabelled = m.clone();
        for (i, &p) in perm.iter().enumerate() {
            relabelled.states[p] = m.states[i].clone();
        }
        relabelled.routing = DMatrix::from_fn(k, k, |i, j| {
            let (oi, oj) = (perm.iter().position(|&p| p == i).unwrap(), perm.iter().position(|&p| p == j).unwrap());
            m.routing[(oi, oj)]
        });
        let (a, b) = (moments(&m, 6), moments(&relabelled, 6));
        for w in Weighting::ALL {
            for n in 0..=6 {
                prop_assert!(close(a.weighted(w).factorial[n], b.weighted(w).factorial[n], 1e-10));
            }
        }
    }

    #[test]
    fn occupancy_mean_is_time_average_load(m in model(), beta in 0.1f64..1.0) {
        let mut same_speed = m.clone();
        for s in &mut same_speed.states {
            s.speed = beta;
        }
        let st = chain_statics(&same_speed).unwrap();
        let t = MomentTable::compute(&same_speed, &st, 1).unwrap();
        let mu = beta * same_speed.service_rate;
        let load: f64 = st.occupancy.iter().zip(&same_speed.states).map(|(o, s)| o * s.arrival_rate / mu).sum();
        prop_assert!(close(t.occupancy.factorial[1], load, 1e-10));
    }
}

#[test]
fn reference_model_second_moment_exceeds_square_of_mean() {
    let t = moments(&reference_model(), 2);
    for w in Weighting::ALL {
        let f = &t.weighted(w).factorial;
        assert!(f[2] > f[1] * f[1]);
    }
}
