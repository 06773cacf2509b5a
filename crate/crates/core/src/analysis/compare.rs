use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::analysis::{detect_jamitons, AnalysisError, RingField, TheoryTrain, DEFAULT_THRESHOLD};
use crate::jamiton::JamitonSolution;
use crate::particle::FieldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Number of points of the common grid.
    pub grid: usize,
    /// Points closer than this to a shock of either field are skipped, m.
    pub shock_halfwidth: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            grid: 1 << 15,
            shock_halfwidth: 0.0,
        }
    }
}

/// Density difference of two aligned ring fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldComparison {
    /// `max|ρ_a − ρ_b| / max(max ρ_a, max ρ_b)` over compared points.
    pub linf_rel: f64,
    /// `‖ρ_a − ρ_b‖₂ / max(‖ρ_a‖₂, ‖ρ_b‖₂)` over compared points.
    pub l2_rel: f64,
    /// Shift `δ` with `ρ_b(x + δ) ≈ ρ_a(x)`, in `[−L/2, L/2)`.
    pub offset: f64,
    /// Fraction of grid points skipped near shocks.
    pub excluded: f64,
}

/// Theory against simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileComparison {
    pub fields: FieldComparison,
    pub theory_speed: f64,
    pub measured_speed: f64,
    /// `|s_sim − s| / |s|`.
    pub speed_err_rel: f64,
    pub waves: usize,
}

impl ProfileComparison {
    pub fn linf_rel(&self) -> f64 {
        self.fields.linf_rel
    }

    pub fn l2_rel(&self) -> f64 {
        self.fields.l2_rel
    }
}

fn sample<F: RingField>(f: &F, n: usize, shift: f64) -> Vec<f64> {
    let dx = f.ring_length() / n as f64;
    (0..n).map(|j| f.density_at(j as f64 * dx + shift)).collect()
}

/// Lag (in grid cells, fractional) maximizing `Σ_j a[j]·b[j + k]`.
fn correlation_peak(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v - ma, 0.0)).collect();
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v - mb, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut c: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    planner.plan_fft_inverse(n).process(&mut c);
    let re: Vec<f64> = c.iter().map(|z| z.re).collect();

    let k = (0..n).max_by(|&i, &j| re[i].total_cmp(&re[j])).unwrap_or(0);
    let (ym, y0, yp) = (re[(k + n - 1) % n], re[k], re[(k + 1) % n]);
    let curv = ym - 2.0 * y0 + yp;
    let frac = if curv < 0.0 { 0.5 * (ym - yp) / curv } else { 0.0 };
    let mut lag = k as f64 + frac;
    if lag >= 0.5 * n as f64 {
        lag -= n as f64;
    }
    lag
}

/// Aligns `b` to `a` by cross-correlation and measures the density
/// difference on a common grid. Symmetric in its arguments: both fields are
/// resampled half an offset from the grid.
pub fn compare_fields<A: RingField, B: RingField>(
    a: &A,
    b: &B,
    opts: &CompareOptions,
) -> Result<FieldComparison, AnalysisError> {
    let l = a.ring_length();
    if (b.ring_length() - l).abs() > 1e-9 * l {
        return Err(AnalysisError::InvalidInput(format!(
            "ring lengths differ: {l} vs {}",
            b.ring_length()
        )));
    }
    let n = opts.grid;
    if n < 8 {
        return Err(AnalysisError::InvalidInput(format!("grid of {n} points is too coarse")));
    }
    let dx = l / n as f64;
    let lag = correlation_peak(&sample(a, n, 0.0), &sample(b, n, 0.0));
    let offset = lag * dx;

    let ra = sample(a, n, -0.5 * offset);
    let rb = sample(b, n, 0.5 * offset);

    // shocks in grid coordinates
    let mut shocks: Vec<f64> = a.shocks().into_iter().map(|s| s + 0.5 * offset).collect();
    shocks.extend(b.shocks().into_iter().map(|s| s - 0.5 * offset));
    let near_shock = |x: f64| {
        shocks.iter().any(|&s| {
            let d = (x - s).rem_euclid(l);
            d.min(l - d) <= opts.shock_halfwidth
        })
    };

    let scale = ra.iter().chain(&rb).fold(0.0_f64, |m, v| m.max(v.abs()));
    let (mut linf, mut diff2, mut a2, mut b2, mut skipped) = (0.0_f64, 0.0, 0.0, 0.0, 0usize);
    for j in 0..n {
        if near_shock(j as f64 * dx) {
            skipped += 1;
            continue;
        }
        let d = ra[j] - rb[j];
        linf = linf.max(d.abs());
        diff2 += d * d;
        a2 += ra[j] * ra[j];
        b2 += rb[j] * rb[j];
    }
    if skipped == n {
        return Err(AnalysisError::NothingToCompare);
    }
    Ok(FieldComparison {
        linf_rel: linf / scale,
        l2_rel: (diff2 / a2.max(b2)).sqrt(),
        offset,
        excluded: skipped as f64 / n as f64,
    })
}

/// Compares the last of `snapshots` with the periodic train `theory`, and the
/// shock speed measured over all `snapshots` with the train's speed.
pub fn compare_profiles(
    theory: &JamitonSolution<f64>,
    snapshots: &[FieldSnapshot<f64>],
    opts: &CompareOptions,
) -> Result<ProfileComparison, AnalysisError> {
    let waves = detect_jamitons(snapshots, DEFAULT_THRESHOLD)?;
    if waves.is_empty() {
        return Err(AnalysisError::NothingToCompare);
    }
    let last = snapshots.last().expect("detect_jamitons checked the length");
    let train = TheoryTrain::new(theory, last.ring_length, last.t)?;
    if train.wave_count() != waves.len() {
        return Err(AnalysisError::RingMismatch {
            ring_length: last.ring_length,
            wavelength: last.ring_length / waves.len() as f64,
        });
    }
    let fields = compare_fields(&train, last, opts)?;
    let speeds: Vec<f64> = waves.iter().map(|w| w.measured_speed).filter(|v| v.is_finite()).collect();
    if speeds.is_empty() {
        return Err(AnalysisError::InsufficientSnapshots {
            needed: 2,
            got: 1,
        });
    }
    let measured = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let s = theory.frame.s;
    Ok(ProfileComparison {
        fields,
        theory_speed: s,
        measured_speed: measured,
        speed_err_rel: (measured - s).abs() / s.abs(),
        waves: waves.len(),
    })
}
