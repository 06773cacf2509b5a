use crate::analysis::AnalysisError;
use crate::particle::FieldSnapshot;

/// Candidate runs separated by at most this many intervals are one shock.
const MERGE_INTERVALS: usize = 8;

/// A steep density rise in one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockCandidate {
    /// Jump-weighted centre of the steep region, in `[0, L)`.
    pub position: f64,
    /// Density rise across the steep region.
    pub jump: f64,
}

/// A jamiton tracked through a sequence of snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedWave {
    /// Shock position in the last snapshot, in `[0, L)`.
    pub shock_position: f64,
    /// Least-squares speed of the shock over the tracked window; NaN when
    /// the wave appears only in the last snapshot.
    pub measured_speed: f64,
    /// Density range between this shock and the next, in the last snapshot.
    pub amplitude: f64,
    /// Distance from the shock to 90% recovery towards the segment minimum.
    pub width: f64,
    /// The track was involved in a merge, a split or a late appearance, so
    /// its speed covers only part of the window.
    pub merged: bool,
    /// Tracked `(t, x)` with `x` unwrapped around the ring.
    pub track: Vec<(f64, f64)>,
}

fn ring_gap(snap: &FieldSnapshot<f64>, i: usize) -> f64 {
    let n = snap.len();
    if i + 1 < n {
        snap.x[i + 1] - snap.x[i]
    } else {
        snap.x[0] + snap.ring_length - snap.x[n - 1]
    }
}

/// Shock candidates where the density rises faster than `threshold` times
/// the ring-mean `|ρ_x|`.
pub fn shock_candidates(snap: &FieldSnapshot<f64>, threshold: f64) -> Vec<ShockCandidate> {
    let n = snap.len();
    if n < 3 {
        return Vec::new();
    }
    let l = snap.ring_length;
    let (lo, hi) = snap
        .rho
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let mean = snap.rho.iter().sum::<f64>() / n as f64;
    if !(hi - lo > 1e-6 * mean.abs()) {
        return Vec::new();
    }

    let rise: Vec<f64> = (0..n).map(|i| snap.rho[(i + 1) % n] - snap.rho[i]).collect();
    let mean_abs_grad = rise.iter().map(|r| r.abs()).sum::<f64>() / l;
    let steep: Vec<bool> = (0..n)
        .map(|i| rise[i] > 0.0 && rise[i] / ring_gap(snap, i) > threshold * mean_abs_grad)
        .collect();
    let Some(start) = (0..n).find(|&i| !steep[i]) else {
        return Vec::new();
    };

    // runs of steep intervals, walking once around the ring from a flat one
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut since_last = usize::MAX;
    for k in 1..=n {
        let i = (start + k) % n;
        if steep[i] {
            if since_last <= MERGE_INTERVALS && !runs.is_empty() {
                runs.last_mut().expect("non-empty").push(i);
            } else {
                runs.push(vec![i]);
            }
            since_last = 0;
        } else {
            since_last = since_last.saturating_add(1);
        }
    }
    if runs.len() > 1 {
        // the last run may continue into the first across the starting point
        let first = runs[0][0];
        let last = *runs.last().expect("non-empty").last().expect("non-empty");
        if (first + n - last) % n <= MERGE_INTERVALS + 1 {
            let head = runs.remove(0);
            runs.last_mut().expect("non-empty").extend(head);
        }
    }

    runs.into_iter()
        .map(|run| {
            let base = snap.x[run[0]];
            let (mut w, mut wx) = (0.0, 0.0);
            for &i in &run {
                let mut mid = snap.x[i] + 0.5 * ring_gap(snap, i);
                if mid < base {
                    mid += l;
                }
                w += rise[i];
                wx += rise[i] * mid;
            }
            ShockCandidate {
                position: (wx / w).rem_euclid(l),
                jump: w,
            }
        })
        .collect()
}

fn ring_dist(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

/// Signed displacement from `a` to `b` on the ring, in `[−L/2, L/2)`.
fn ring_delta(a: f64, b: f64, l: f64) -> f64 {
    (b - a + 0.5 * l).rem_euclid(l) - 0.5 * l
}

fn least_squares_slope(track: &[(f64, f64)]) -> f64 {
    let n = track.len() as f64;
    if track.len() < 2 {
        return f64::NAN;
    }
    let mt = track.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = track.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, x) in track {
        num += (t - mt) * (x - mx);
        den += (t - mt) * (t - mt);
    }
    num / den
}

struct Track {
    points: Vec<(f64, f64)>,
    merged: bool,
    alive: bool,
}

impl Track {
    fn predict(&self, t: f64) -> f64 {
        let (t1, x1) = *self.points.last().expect("tracks start with a point");
        if self.points.len() < 2 {
            return x1;
        }
        let (t0, x0) = self.points[self.points.len() - 2];
        x1 + (x1 - x0) / (t1 - t0) * (t - t1)
    }
}

/// Detects jamitons in the last snapshot and measures their speeds by
/// tracking shocks through all `snapshots`.
///
/// Consecutive snapshots must be close enough in time that each shock moves
/// less than half the distance between neighbouring shocks.
pub fn detect_jamitons(snapshots: &[FieldSnapshot<f64>], threshold: f64) -> Result<Vec<DetectedWave>, AnalysisError> {
    if snapshots.len() < 2 {
        return Err(AnalysisError::InsufficientSnapshots {
            needed: 2,
            got: snapshots.len(),
        });
    }
    let l = snapshots[0].ring_length;
    let mut tracks: Vec<Track> = shock_candidates(&snapshots[0], threshold)
        .into_iter()
        .map(|c| Track {
            points: vec![(snapshots[0].t, c.position)],
            merged: false,
            alive: true,
        })
        .collect();

    for snap in &snapshots[1..] {
        let cands = shock_candidates(snap, threshold);
        let reach = if cands.len() > 1 {
            let mut pos: Vec<f64> = cands.iter().map(|c| c.position).collect();
            pos.sort_by(f64::total_cmp);
            let min_sep = (0..pos.len())
                .map(|k| ring_dist(pos[k], pos[(k + 1) % pos.len()], l))
                .fold(f64::INFINITY, f64::min);
            0.5 * min_sep
        } else {
            0.5 * l
        };

        let mut claimed: Vec<Option<usize>> = vec![None; cands.len()];
        for ti in 0..tracks.len() {
            if !tracks[ti].alive {
                continue;
            }
            let guess = tracks[ti].predict(snap.t);
            let best = cands
                .iter()
                .enumerate()
                .map(|(j, c)| (j, ring_dist(guess, c.position, l)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((j, d)) if d < reach => {
                    if let Some(other) = claimed[j] {
                        // two shocks became one
                        tracks[other].merged = true;
                        tracks[ti].merged = true;
                        tracks[ti].alive = false;
                        continue;
                    }
                    claimed[j] = Some(ti);
                    let (_, last) = *tracks[ti].points.last().expect("non-empty");
                    let x = last + ring_delta(last, cands[j].position, l);
                    tracks[ti].points.push((snap.t, x));
                }
                _ => {
                    tracks[ti].alive = false;
                    tracks[ti].merged = true;
                }
            }
        }
        for (j, c) in cands.iter().enumerate() {
            if claimed[j].is_none() {
                tracks.push(Track {
                    points: vec![(snap.t, c.position)],
                    merged: true,
                    alive: true,
                });
            }
        }
    }

    let last = snapshots.last().expect("checked length");
    let mut alive: Vec<&Track> = tracks.iter().filter(|t| t.alive).collect();
    alive.sort_by(|a, b| {
        let pa = a.points.last().expect("non-empty").1.rem_euclid(l);
        let pb = b.points.last().expect("non-empty").1.rem_euclid(l);
        pa.total_cmp(&pb)
    });
    let positions: Vec<f64> = alive
        .iter()
        .map(|t| t.points.last().expect("non-empty").1.rem_euclid(l))
        .collect();
    Ok(alive
        .iter()
        .enumerate()
        .map(|(k, track)| {
            let next = positions[(k + 1) % positions.len()];
            let (amplitude, width) = segment_shape(last, positions[k], next);
            DetectedWave {
                shock_position: positions[k],
                measured_speed: least_squares_slope(&track.points),
                amplitude,
                width,
                merged: track.merged,
                track: track.points.clone(),
            }
        })
        .collect())
}

/// Amplitude and 90%-recovery width of the segment from shock `a` to the
/// next shock `b` downstream.
fn segment_shape(snap: &FieldSnapshot<f64>, a: f64, b: f64) -> (f64, f64) {
    let l = snap.ring_length;
    let mut span = (b - a).rem_euclid(l);
    if span == 0.0 {
        span = l;
    }
    let mut seg: Vec<(f64, f64)> = snap
        .x
        .iter()
        .zip(&snap.rho)
        .map(|(&x, &r)| ((x - a).rem_euclid(l), r))
        .filter(|&(d, _)| d < span)
        .collect();
    if seg.is_empty() {
        return (0.0, 0.0);
    }
    seg.sort_by(|p, q| p.0.total_cmp(&q.0));
    let hi = seg.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = seg.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let peak_at = seg.iter().position(|p| p.1 == hi).unwrap_or(0);
    let level = hi - 0.9 * (hi - lo);
    let width = seg[peak_at..]
        .iter()
        .find(|p| p.1 <= level)
        .map_or(span, |p| p.0);
    (hi - lo, width)
}
