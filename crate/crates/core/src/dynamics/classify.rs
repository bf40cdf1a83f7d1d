use serde::{Deserialize, Serialize};

use super::integrate::{Trajectory, TrajectoryStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryClass {
    Converged,
    Unbounded,
    OscillatoryCandidate,
    Undetermined,
}

/// Minimum number of upward mean crossings in the tail for a candidate.
pub const MIN_CROSSINGS: usize = 3;

/// Classify from the tail `[t_end − tail_window, t_end]`.
///
/// Amplitudes are relative: (max − min) / (mean |x| + 1e-6) per coordinate.
/// A tail whose amplitude is below `conv_tol` is converged. A tail that
/// keeps crossing its mean without decaying (second-half amplitude at least
/// half the first-half amplitude) is an oscillatory candidate.
pub fn classify(traj: &Trajectory, tail_window: f64, conv_tol: f64) -> TrajectoryClass {
    match traj.status {
        TrajectoryStatus::Unbounded => return TrajectoryClass::Unbounded,
        TrajectoryStatus::SteadyState => return TrajectoryClass::Converged,
        TrajectoryStatus::StepLimit | TrajectoryStatus::Failed => {
            return TrajectoryClass::Undetermined
        }
        TrajectoryStatus::Completed => {}
    }
    let Some(t_end) = traj.times.last().copied() else {
        return TrajectoryClass::Undetermined;
    };
    let start = traj.times.partition_point(|&t| t < t_end - tail_window);
    let tail = &traj.states[start..];
    if tail.len() < 4 {
        return TrajectoryClass::Undetermined;
    }
    let n = tail[0].len();
    let rel_amp = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let (lo, hi, sum) = rows
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), x| {
                        (lo.min(x[i]), hi.max(x[i]), s + x[i].abs())
                    });
                (hi - lo) / (sum / rows.len() as f64 + 1e-6)
            })
            .collect()
    };
    let amps = rel_amp(tail);
    let (lead, &amp) = amps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("n ≥ 1");
    if amp < conv_tol {
        return TrajectoryClass::Converged;
    }
    let mid = tail.len() / 2;
    let first = rel_amp(&tail[..mid])[lead];
    let second = rel_amp(&tail[mid..])[lead];
    if second < conv_tol {
        return TrajectoryClass::Converged;
    }
    let mean = tail.iter().map(|x| x[lead]).sum::<f64>() / tail.len() as f64;
    let ups = tail
        .windows(2)
        .filter(|w| w[0][lead] < mean && w[1][lead] >= mean)
        .count();
    if ups >= MIN_CROSSINGS && second >= 0.5 * first {
        TrajectoryClass::OscillatoryCandidate
    } else {
        TrajectoryClass::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate::StepStats;

    fn traj(f: impl Fn(f64) -> f64) -> Trajectory {
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
        let states = times.iter().map(|&t| vec![f(t), 1.0]).collect();
        Trajectory {
            times,
            states,
            status: TrajectoryStatus::Completed,
            stats: StepStats::default(),
        }
    }

    #[test]
    fn sustained_oscillation() {
        assert_eq!(
            classify(&traj(|t| 2.0 + t.sin()), 50.0, 1e-4),
            TrajectoryClass::OscillatoryCandidate
        );
    }

    #[test]
    fn constant_is_converged() {
        assert_eq!(
            classify(&traj(|_| 2.0), 50.0, 1e-4),
            TrajectoryClass::Converged
        );
    }

    #[test]
    fn damped_is_not_candidate() {
        let c = classify(&traj(|t| 2.0 + (-0.2 * t).exp() * t.sin()), 50.0, 1e-4);
        assert_ne!(c, TrajectoryClass::OscillatoryCandidate);
    }

    #[test]
    fn monotone_drift_undetermined() {
        assert_eq!(
            classify(&traj(|t| 1.0 + t), 50.0, 1e-4),
            TrajectoryClass::Undetermined
        );
    }

    #[test]
    fn status_passthrough() {
        let mut t = traj(|_| 1.0);
        t.status = TrajectoryStatus::Unbounded;
        assert_eq!(classify(&t, 10.0, 1e-4), TrajectoryClass::Unbounded);
        t.status = TrajectoryStatus::StepLimit;
        assert_eq!(classify(&t, 10.0, 1e-4), TrajectoryClass::Undetermined);
    }
}
